use std::io;
use std::process::ExitCode;

use steklov_core::cli;

fn main() -> ExitCode {
    cli::configure_threads();
    let code = cli::main_with_args(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    ExitCode::from(code as u8)
}
