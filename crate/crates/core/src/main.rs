use clap::Parser;

fn main() {
    let args = acontract::cli::Args::parse();
    std::process::exit(acontract::cli::main_with_args(args));
}
