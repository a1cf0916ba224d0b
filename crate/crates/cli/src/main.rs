use clap::Parser;

fn main() {
    let cli = qsl_cli::Cli::parse();
    std::process::exit(qsl_cli::run(cli));
}
