use std::process::ExitCode;

fn main() -> ExitCode {
    // a panic anywhere below is a broken internal contract: exit 2
    let code = std::panic::catch_unwind(primec::cli::entry).unwrap_or(2);
    ExitCode::from(code)
}
