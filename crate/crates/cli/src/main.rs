use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use sldic_cli::{run, CliConfig, CliError, EXIT_OK, EXIT_USAGE};

fn main() -> ExitCode {
    let cfg = match CliConfig::try_parse() {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = run(&cfg, &mut out);
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            report(&e);
            ExitCode::from(e.exit_code())
        }
    }
}

fn report(e: &CliError) {
    eprintln!("error: {e}");
    eprintln!("{}", e.machine_readable());
}
