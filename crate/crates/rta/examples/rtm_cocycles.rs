// Cocycle checks and classification of regular triangular monoids.

use rta::rtm::{check_cocycles, classify, Lattice, Rtm};
use num_bigint::BigInt;
use num_rational::BigRational;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let one = BigRational::from_integer(BigInt::from(1));
    let m = Rtm::Semidirect { zeta: vec![BigRational::from_integer(BigInt::from(2))], lattice: Lattice::new(one, [2])? };
    let verdict = check_cocycles(&m, 2)?;
    println!("semidirect zeta=2: {verdict:?}");
    assert!(verdict.passed());
    println!("classification: {:?}", classify(&m)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
