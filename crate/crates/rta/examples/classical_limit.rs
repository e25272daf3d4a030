// The q -> 1 limit of the quantum Smith-type family.

use rta::cartan::BaseElement;
use rta::cli::classical_limit;
use rta::scalar::Scalar;
use num_bigint::BigInt;
use num_rational::BigRational;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for x in [1, 2] {
        let x = BigRational::from_integer(BigInt::from(x));
        let rep = classical_limit(2, 0, 0, &Scalar::one(), &Scalar::int(-1), &BaseElement::h(), &x, 6)?;
        println!("x = {x}: lambda(K) = {}, maximal degrees {:?}", rep.quantum_weight, rep.classical_maximal_degrees);
        assert!(rep.all_equal);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
