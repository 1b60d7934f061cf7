use clap::Parser;
use foliant::cli::{run, Cli, CONFIG_ERROR_CODE};

fn main() {
    if let Ok(n) = std::env::var("FOLIANT_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => {
                eprintln!("foliant: FOLIANT_THREADS must be a positive integer, got `{n}`");
                std::process::exit(CONFIG_ERROR_CODE);
            }
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { CONFIG_ERROR_CODE } else { 0 });
        }
    };
    std::process::exit(run(cli));
}
