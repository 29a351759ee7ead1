use std::io::Write;
use std::process::ExitCode;

use padiflow::cli::{run, PRECISION_ENV};

fn main() -> ExitCode {
    let precision = std::env::var(PRECISION_ENV).ok();
    let out = run(std::env::args_os(), precision.as_deref());
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code as u8)
}
