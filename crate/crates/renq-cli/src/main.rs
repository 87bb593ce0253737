use std::process::ExitCode;

fn main() -> ExitCode {
    renq_cli::app::main_entry()
}
