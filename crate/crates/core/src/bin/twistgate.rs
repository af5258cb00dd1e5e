use std::process::ExitCode;

use clap::Parser;
use twistgate::cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 2 } else { 0 };
            err.print().ok();
            return ExitCode::from(code);
        }
    };
    let result = execute(&cli);
    if cli.json {
        println!("{}", result.to_json());
    } else if result.status == twistgate::cli::Status::Ok || result.payload.get("error").is_none() {
        print!("{}", result.text);
    } else {
        eprintln!("{}", result.text);
    }
    ExitCode::from(result.exit_code() as u8)
}
