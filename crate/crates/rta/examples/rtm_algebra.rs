// Normal forms and Verma modules of the algebra attached to a cone.

use rta::rtm::{maximal_vector_check, AZeta, GroupEl, Lattice, Rtm};
use rta::scalar::Scalar;
use num_bigint::BigInt;
use num_rational::BigRational;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let int = |n: i64| BigRational::from_integer(BigInt::from(n));
    let m = Rtm::Semidirect { zeta: vec![int(2)], lattice: Lattice::new(int(1), [2])? };
    let a = AZeta::new(&m, vec![Scalar::one()])?;
    let x = a.parse("x1+*x1- - t^(1/2)*t^(-1/2)")?;
    println!("x1+ x1- - t^(1/2) t^(-1/2) = {x}");

    let c0 = AZeta::new(&m, vec![Scalar::zero()])?;
    let g0 = GroupEl { e: BigRational::new(BigInt::from(1), BigInt::from(4)), n: vec![2] };
    let r = maximal_vector_check(&c0, &g0, 3)?;
    println!("c = 0: {} of {} monomials maximal, dim L = 1: {}", r.maximal, r.monomials_checked, r.dim_simple_is_one);
    assert!(r.dim_simple_is_one);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
