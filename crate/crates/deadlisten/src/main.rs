use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(deadlisten::cli::run(std::env::args_os()))
}
