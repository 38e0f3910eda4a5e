use clap::Parser;

fn main() {
    let cli = deeplbp_cli::Cli::parse();
    if let Err(err) = deeplbp_cli::run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
