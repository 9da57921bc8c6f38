//! Results must not depend on the worker count.
#![cfg(feature = "rayon")]

use ps4::expsum::{k_moment, moment_integrals};
use ps4::gamma::{gamma_parts, RunParams};
use ps4::stats::{hooley_variance, singular_product, HooleyRange};
use ps4::PrimeTable;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn bit_identical_across_thread_counts() {
    let t = PrimeTable::sieve(200_000).unwrap();
    let run = || {
        let p = RunParams::from_x(3000.0, 1.2, 5.0, 1.0, None).unwrap();
        let g = gamma_parts(&p, &t).unwrap();
        let m = moment_integrals(&p, 2.0, &t).unwrap();
        let k = k_moment(&RunParams::from_x(500.0, 1.1, 2.0, 1.0, None).unwrap(), &t).unwrap();
        let s = singular_product(200_000, &t).unwrap();
        let h = hooley_variance(&HooleyRange::new(2e5, 0.5).unwrap(), &t).unwrap();
        [
            g.gamma0.to_bits(),
            g.gamma_raw.to_bits(),
            g.g2.to_bits(),
            m.l2_s.to_bits(),
            m.l2_i.to_bits(),
            m.unit_l2_s.to_bits(),
            k.value.to_bits(),
            s.value.to_bits(),
            h,
        ]
    };
    let one = in_pool(1, run);
    let four = in_pool(4, run);
    assert_eq!(one, four);
}
