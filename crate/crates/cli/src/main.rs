use std::process::ExitCode;

fn main() -> ExitCode {
    let code = match ps4_cli::parse_args(std::env::args_os()) {
        Ok(cfg) => ps4_cli::run(&cfg),
        Err(e) => {
            // clap renders help and usage itself.
            let _ = e.print();
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
