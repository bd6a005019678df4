use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(clonelab_cli::run(std::env::args_os()) as u8)
}
