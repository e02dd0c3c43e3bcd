use clap::Parser;
use htc_core::cli::{run, Cli};

fn main() {
    if let Ok(value) = std::env::var("HTC_THREADS") {
        match value.parse::<usize>() {
            Ok(threads) if threads > 0 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
            _ => {
                eprintln!("error: HTC_THREADS must be a positive integer");
                std::process::exit(1);
            }
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here with non-error kinds
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli.command, &mut std::io::stdout().lock()) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
