use clap::Parser;

fn main() {
    let cli = matorth_cli::Cli::parse();
    std::process::exit(matorth_cli::run(&cli));
}
