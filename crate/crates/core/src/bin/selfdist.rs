use clap::Parser;
use selfdist::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
