use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use superpfaff_cli::{emit, run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli).and_then(|r| emit(&r).map(|text| (r.code, text))) {
        Ok((code, text)) => {
            if let Some(t) = text {
                // A closed pipe is not an error for a report printer.
                let _ = writeln!(std::io::stdout(), "{t}");
            }
            ExitCode::from(code as u8)
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code as u8)
        }
    }
}
