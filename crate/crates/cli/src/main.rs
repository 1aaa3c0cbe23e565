use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(rscsim_cli::run(std::env::args_os()))
}
