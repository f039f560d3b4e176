// A commuting family with a repeated eigenvalue, diagonalized by one
// orthogonal basis.

use calabi::commute::{simultaneous_diagonalize, SymFamily};
use nalgebra::{DMatrix, DVector};

pub fn run_example() {
    let (s, c) = (0.4f64.sin(), 0.4f64.cos());
    let q = DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
    let conj = |d: [f64; 3]| &q * DMatrix::from_diagonal(&DVector::from_row_slice(&d)) * q.transpose();
    // the first matrix alone cannot separate the first two directions
    let fam = SymFamily::new(vec![conj([1.0, 1.0, 3.0]), conj([2.0, -1.0, 0.0])]).unwrap();
    let d = simultaneous_diagonalize(&fam).unwrap();
    println!("P = {}", d.p);
    for (k, ev) in d.eigenvalues.iter().enumerate() {
        println!("eigenvalues of matrix {k}: {ev:?}");
    }
    println!("worst off-diagonal entry: {:.3e}", d.worst_offdiag);
    assert!(d.worst_offdiag < 1e-12);
}

#[allow(dead_code)]
fn main() {
    run_example();
}
