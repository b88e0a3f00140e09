use clap::Parser;
use openbo_cli::{run_and_emit, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run_and_emit(&cli) {
        eprintln!("openbo: {e}");
        std::process::exit(e.exit_code());
    }
}
