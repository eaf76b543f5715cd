use clap::Parser;

mod cli;

fn main() {
    match cli::run(cli::Cli::parse()) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}
