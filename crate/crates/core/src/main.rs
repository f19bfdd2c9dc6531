use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(eplab::cli::run(std::env::args_os()))
}
