use std::process::ExitCode;

use clap::Parser;
use hardylab::cli::{main_with_args, Args};

fn main() -> ExitCode {
    main_with_args(Args::parse())
}
