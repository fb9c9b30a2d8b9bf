use clap::Parser;

fn main() {
    let cli = lqsolve::cli::Cli::parse();
    std::process::exit(lqsolve::cli::run(cli));
}
