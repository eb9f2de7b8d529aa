use aakit::cli::{self, Cli};
use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    // Cap the compute pool at the requested worker count; ignore failure if
    // a pool already exists (e.g. under tests).
    let workers = cli::resolve_workers();
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global();

    std::process::exit(cli::run(&cli));
}
