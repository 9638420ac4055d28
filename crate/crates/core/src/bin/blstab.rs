//! Command-line driver: `blstab <profile|spectrum|shoot|sweep|os> [flags]`.
//!
//! Exit codes: 0 success (or unstable mode found), 2 usage error,
//! 3 no unstable mode, 4 numerical failure.

use blstab::cli::{self, Cli};
use clap::Parser;

fn main() {
    let args = Cli::parse();
    std::process::exit(cli::run(args));
}
