use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(vqra::cli::run(std::env::args_os()) as u8)
}
