use clap::Parser;
use fxstyle_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = fxstyle_cli::run(&cli.command) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
