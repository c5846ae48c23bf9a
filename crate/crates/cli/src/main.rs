use std::io;

use clap::Parser;

fn main() {
    let args = match ccslm_cli::cli::Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { ccslm_cli::exit::USAGE } else { ccslm_cli::exit::OK });
        }
    };
    let stdin = io::stdin();
    let code = ccslm_cli::cli::run(
        args,
        ccslm_cli::cli::Io {
            input: &mut stdin.lock(),
            out: &mut io::stdout(),
            err: &mut io::stderr(),
        },
    );
    std::process::exit(code);
}
