// Diamond-lemma check for GWAs over finite-dimensional Cartan algebras.

use rta::rewrite::{gwa_presentation, ConfluenceVerdict, FiniteAlgebra};
use rta::scalar::Scalar;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // F[C3] with theta(g) = g^2 and the central element z0 = 1 + g + g^2.
    let h = FiniteAlgebra::group_algebra(&[3]);
    let theta = ["1", "g^2", "g"].map(|s| h.parse_element(s).expect("basis element"));
    let z0 = h.parse_element("1 + g + g^2").expect("element");
    let one = h.parse_element("1").expect("unit");
    let p = gwa_presentation(&h, &theta, &z0, &one)?;
    let verdict = p.check_confluence(10_000, 10_000)?;
    println!("C3, central z0: {verdict:?}");
    assert!(matches!(verdict, ConfluenceVerdict::Confluent { .. }));

    // 2x2 matrix units with a non-central z0 = e11.
    let m = FiniteAlgebra::matrix_units();
    let ident: Vec<Vec<Scalar>> = m.names.iter().map(|n| m.parse_element(n).expect("basis")).collect();
    let p = gwa_presentation(&m, &ident, &m.parse_element("e11").expect("e11"), &m.parse_element("1").expect("1"))?;
    match p.check_confluence(10_000, 10_000)? {
        ConfluenceVerdict::NotConfluent { ambiguity, difference, .. } => {
            println!("matrix units: ambiguity {ambiguity} resolves to {difference}, not zero");
        }
        other => return Err(format!("expected an unresolvable ambiguity, got {other:?}").into()),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
