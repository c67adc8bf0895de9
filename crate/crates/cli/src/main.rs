use std::process::ExitCode;

use clap::Parser;

use jsccsj_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("JSCCSJ_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                {
                    eprintln!("error: cannot size the thread pool: {e}");
                    return ExitCode::FAILURE;
                }
            }
            _ => {
                eprintln!("error: JSCCSJ_THREADS must be a positive integer, got {threads:?}");
                return ExitCode::FAILURE;
            }
        }
    }
    let output = match run(&cli) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &output),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(output.as_bytes())
        }
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            ExitCode::FAILURE
        }
    }
}
