use std::io::{ErrorKind, Write};
use std::process::ExitCode;

use clap::Parser;
use wave_oracle_cli::{run, Cli, EXIT_VALIDATION};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let out_path = match &cli.command {
        wave_oracle_cli::Command::Search(a) => a.output.out.clone(),
        wave_oracle_cli::Command::Multisearch(a) => a.output.out.clone(),
        wave_oracle_cli::Command::Margin(a) => a.output.out.clone(),
        wave_oracle_cli::Command::Factor(a) => a.output.out.clone(),
        wave_oracle_cli::Command::Dataset(a) => a.output.out.clone(),
    };
    match run(&cli) {
        Ok(report) => {
            let written = match &out_path {
                Some(path) => std::fs::write(path, &report.machine)
                    .map(|_| print!("{}", report.summary))
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => {
                    eprint!("{}", report.summary);
                    match std::io::stdout().write_all(report.machine.as_bytes()) {
                        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(e.to_string()),
                        _ => Ok(()),
                    }
                }
            };
            match written {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_VALIDATION as u8)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
