use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = contractnet_cli::run(std::env::args_os());
    if outcome.report.is_some() || outcome.code == contractnet_cli::EXIT_HOLDS {
        print!("{}", outcome.output);
        if !outcome.output.ends_with('\n') {
            println!();
        }
    } else {
        eprint!("{}", outcome.output);
    }
    ExitCode::from(outcome.code as u8)
}
