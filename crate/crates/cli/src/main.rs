use clap::Parser;

fn main() {
    let cli = chemolab_cli::Cli::parse();
    std::process::exit(chemolab_cli::run(cli));
}
