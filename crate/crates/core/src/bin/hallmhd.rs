use clap::Parser;

fn main() {
    let cli = hallmhd::cli::Cli::parse();
    std::process::exit(hallmhd::cli::dispatch(cli));
}
