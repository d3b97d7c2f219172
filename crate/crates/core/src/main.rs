use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use gdiscord::cli::{self, Cli};

fn main() -> ExitCode {
    let args = match Cli::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };

    if let Some(n) = std::env::var(cli::THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }

    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = match cli::run(&args, &mut io::stdin().lock(), &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gdiscord: {e}");
            e.exit_code()
        }
    };
    let _ = out.flush();
    ExitCode::from(code as u8)
}
