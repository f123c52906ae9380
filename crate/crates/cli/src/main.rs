use clap::Parser;

fn main() {
    std::process::exit(finsler_cli::run(finsler_cli::Cli::parse()));
}
