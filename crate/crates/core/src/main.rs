use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let code = cartan_motion::cli::run(args, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}
