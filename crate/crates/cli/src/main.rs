use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(hapsim_cli::run(std::env::args_os()))
}
