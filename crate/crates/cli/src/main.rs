use clap::Parser;
use tpms_forge_cli::args::Cli;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // help and version are not errors; every usage error exits 1
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };
    std::process::exit(tpms_forge_cli::run(cli));
}
