use clap::Parser;

fn main() {
    let cli = qwkt_cli::cli::Cli::parse();
    if let Err(e) = qwkt_cli::run(cli) {
        eprintln!("qwkt: {e}");
        std::process::exit(e.exit_code());
    }
}
