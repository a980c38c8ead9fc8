use std::process::ExitCode;

use clap::Parser;
use xtunnel_cli::{run, Cli, CliError};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::Usage(e.kind().to_string() + ": " + &first_line(&e.to_string()))),
    };
    match run(&cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn first_line(s: &str) -> String {
    s.lines().next().unwrap_or_default().trim_start_matches("error: ").to_string()
}

fn fail(e: &CliError) -> ExitCode {
    let code = e.exit_code();
    eprintln!("ERROR {code}: {}", e.to_string().replace('\n', " "));
    ExitCode::from(code as u8)
}
