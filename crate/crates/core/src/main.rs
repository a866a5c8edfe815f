use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use dct_flowgraph::cli::{run, CliConfig};

fn main() -> ExitCode {
    let config = CliConfig::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = match run(&config, &mut out) {
        Ok(status) => status.exit_code(),
        Err(e) => {
            eprintln!("dctflow: {e}");
            e.exit_code()
        }
    };
    let _ = out.flush();
    ExitCode::from(code)
}
