use std::process::ExitCode;

fn main() -> ExitCode {
    rlcm::cli::run()
}
