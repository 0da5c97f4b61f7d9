use std::process::ExitCode;

fn main() -> ExitCode {
    let out = hyperkappa_cli::run_args(std::env::args_os());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    ExitCode::from(out.code)
}
