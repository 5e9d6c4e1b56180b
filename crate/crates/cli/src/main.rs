use clap::Parser;

fn main() {
    let cli = mpoq_cli::Cli::parse();
    if let Err(e) = mpoq_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
