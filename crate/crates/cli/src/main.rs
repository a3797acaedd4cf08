use clap::Parser;

fn main() {
    let cli = tracelab_cli::Cli::parse();
    std::process::exit(tracelab_cli::execute(&cli));
}
