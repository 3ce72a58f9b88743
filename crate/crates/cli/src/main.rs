use clap::Parser;

fn main() {
    std::process::exit(bellrange_cli::run(bellrange_cli::Cli::parse()));
}
