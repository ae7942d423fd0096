use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    // usage errors exit 1; exit 2 is reserved for indeterminate results
    let cli = match kwidth::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match kwidth::run(&cli) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("kwidth: error: {e:#}");
            ExitCode::from(1)
        }
    }
}
