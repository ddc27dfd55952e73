use clap::Parser;

fn main() {
    let cli = cdo_pricer::cli::Cli::parse();
    std::process::exit(cdo_pricer::cli::run(cli));
}
