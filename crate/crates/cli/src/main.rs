use clap::Parser;
use sphereproj_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    configure_threads();
    if let Err(e) = run(cli) {
        eprintln!("sphereproj: {e}");
        std::process::exit(e.exit_code());
    }
}

/// `SPHEREPROJ_THREADS` caps the worker pool.
fn configure_threads() {
    #[cfg(feature = "parallel")]
    if let Some(threads) = std::env::var("SPHEREPROJ_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t > 0)
    {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("sphereproj: could not size the thread pool: {e}");
        }
    }
}
