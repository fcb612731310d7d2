use clap::Parser;

fn main() {
    let cli = ocpde::cli::Cli::parse();
    let mut out = std::io::stdout();
    let mut err = std::io::stderr();
    let code = ocpde::cli::run(cli, &mut out, &mut err);
    std::process::exit(code);
}
