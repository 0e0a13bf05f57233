use clap::Parser;
use robust_duel_cli::{main_with, Cli};

fn main() {
    std::process::exit(main_with(Cli::parse()));
}
