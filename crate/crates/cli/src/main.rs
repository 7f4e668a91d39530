use std::io;
use std::process::ExitCode;

use clap::Parser;
use sheaf_sampling_cli::{commands, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match commands::run(cli, &mut io::stdout().lock(), &mut io::stderr().lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    };
    ExitCode::from(code as u8)
}
