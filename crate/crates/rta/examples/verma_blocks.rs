// Verma modules, linkage and blocks in category O.

use rta::cartan::Weight;
use rta::cat_o::{block_report, tensor_block, verma_report, DEFAULT_WINDOW};
use rta::gwa::TriangularGwa;
use rta::scalar::Scalar;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let uq = TriangularGwa::uq_sl2();
    let w = Weight::Group(vec![Scalar::q().pow(3)]);
    let v = verma_report(&uq, &w, 50, DEFAULT_WINDOW)?;
    println!("U_q, K = q^3: maximal vectors in degrees {:?}", v.maximal_degrees);

    let dispin = TriangularGwa::dispin();
    let b1 = block_report(&dispin, &Weight::Poly(Scalar::int(1)), 50, DEFAULT_WINDOW)?;
    println!("dispin block at h=1: decomposition {:?}, Cartan {:?}", b1.decomposition, b1.cartan);
    let b2 = block_report(&uq, &w, 50, DEFAULT_WINDOW)?;
    let t = tensor_block(&[b1, b2]);
    println!("tensor block: {} members, Cartan {:?}", t.members.len(), t.cartan);
    assert_eq!(t.members.len(), 4);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
