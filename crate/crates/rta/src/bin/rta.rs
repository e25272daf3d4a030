use std::io::Write;

fn main() {
    let (code, out, err) = rta::cli::main_with(std::env::args().collect());
    let _ = std::io::stdout().write_all(out.as_bytes());
    let _ = std::io::stderr().write_all(err.as_bytes());
    std::process::exit(code);
}
