use clap::Parser;

use sdsp_core::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("SDSP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("warning: could not size the worker pool: {e}");
            }
        }
    }
    std::process::exit(run(cli));
}
