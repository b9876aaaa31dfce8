use clap::Parser;

fn main() {
    let config = ilc::cli::RunConfig::parse();
    std::process::exit(ilc::cli::main_with(&config));
}
