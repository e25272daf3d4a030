// The Shapovalov form on powers of `d` is the running product of `z~_j`.

use rta::cartan::BaseElement;
use rta::gwa::TriangularGwa;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for a in [TriangularGwa::dispin(), TriangularGwa::uq_sl2()] {
        let mut product = BaseElement::one(a.family());
        for n in 0..=4u32 {
            if n > 0 {
                product = &product * &a.z_tilde(n as i64);
            }
            let dn = a.pow(&a.d(), n)?;
            let gram = a.shapovalov(&dn, &dn)?;
            assert_eq!(gram, product);
            println!("{}: <d^{n}, d^{n}> = {gram}", a.name().unwrap_or("?"));
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
