// Integer zeros of polynomial-exponential sums.

use rta::cat_o::{polyexp_solve, PolyExpProblem, DEFAULT_WINDOW};
use rta::scalar::Scalar;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // 2^n - n^2
    let problem = PolyExpProblem {
        terms: vec![
            (vec![Scalar::one()], Scalar::int(2)),
            (vec![Scalar::zero(), Scalar::zero(), Scalar::int(-1)], Scalar::one()),
        ],
        window: DEFAULT_WINDOW,
    };
    let sol = polyexp_solve(&problem)?;
    println!("2^n = n^2 for n in {:?} ({:?})", sol.solutions, sol.status);
    assert_eq!(sol.solutions.iter().copied().collect::<Vec<i64>>(), vec![2, 4]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
