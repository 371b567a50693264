use clap::Parser;

fn main() {
    // optional worker cap for the frequency sweep
    if let Some(n) = std::env::var("QLOCK_THREADS").ok().and_then(|v| v.parse().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let args = qlock::cli::Args::parse();
    std::process::exit(qlock::cli::main_with_args(&args));
}
