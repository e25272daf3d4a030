// Running a subcommand from code and reading the JSON report.

use rta::cli::main_with;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let args = ["rta", "zelems", "weyl", "--n", "2", "--weight", "h=1/2", "--json"];
    let (code, out, err) = main_with(args.iter().map(|s| s.to_string()).collect());
    if code != 0 {
        return Err(err.into());
    }
    let report: serde_json::Value = serde_json::from_str(&out)?;
    println!("{}", report["result"]["values"]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
