// The quadratic Casimir and its central character.

use rta::cartan::{dual_act, Weight};
use rta::gwa::{CasimirOutcome, TriangularGwa};
use rta::scalar::Scalar;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let a = TriangularGwa::dispin();
    let CasimirOutcome::Found { zeta, omega } = a.casimir()? else {
        return Err("dispin has a Casimir".into());
    };
    println!("zeta = {zeta}\nOmega = {omega}");
    assert!(a.commutator(&omega, &a.u())?.is_zero());
    assert!(a.commutator(&omega, &a.d())?.is_zero());

    // lambda(zeta) - (theta^-n lambda)(zeta) = lambda(z~_n)
    let w = Weight::Poly(Scalar::ratio(3, 2));
    let values = a.weighted_z_tilde(&w, 5)?;
    for n in 1..=5 {
        let diff = &zeta.evaluate(&w)? - &zeta.evaluate(&dual_act(a.theta(), -n, &w)?)?;
        assert_eq!(&diff, values.at(n));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
