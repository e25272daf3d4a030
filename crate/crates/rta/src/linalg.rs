//! Dense exact linear algebra over [`Scalar`].

use crate::scalar::Scalar;

/// Row-reduces in place; returns the pivot columns.
fn row_reduce(m: &mut [Vec<Scalar>]) -> Vec<usize> {
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].inv().expect("nonzero pivot");
        for x in m[row].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..cols {
                    let sub = &f * &m[row][c];
                    m[r][c] = &m[r][c] - &sub;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    pivots
}

pub fn rank(m: &[Vec<Scalar>]) -> usize {
    let mut m = m.to_vec();
    row_reduce(&mut m).len()
}

/// A basis of `{x : m x = 0}`.
pub fn nullspace(m: &[Vec<Scalar>], cols: usize) -> Vec<Vec<Scalar>> {
    let mut m = m.to_vec();
    let pivots = row_reduce(&mut m);
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Scalar::zero(); cols];
            v[free] = Scalar::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -&m[r][free];
            }
            v
        })
        .collect()
}

/// One solution of `m x = b` (free variables set to zero), or `None`.
pub fn solve(m: &[Vec<Scalar>], b: &[Scalar]) -> Option<Vec<Scalar>> {
    let cols = m.first().map_or(0, Vec::len);
    let mut aug: Vec<Vec<Scalar>> = m
        .iter()
        .zip(b)
        .map(|(row, x)| row.iter().cloned().chain(std::iter::once(x.clone())).collect())
        .collect();
    let pivots = row_reduce(&mut aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![Scalar::zero(); cols];
    for (r, &p) in pivots.iter().enumerate() {
        x[p] = aug[r][cols].clone();
    }
    Some(x)
}
