use clap::Parser;
use hsdetect::cli::{self, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    if let Err(err) = cli::run(args, &mut stdout) {
        eprintln!("error: {err}");
        std::process::exit(cli::exit_code(&err));
    }
}
