// Invariants survive an equiaffine change of the graph.

use calabi::affine::{check_equivalence_invariants, AffineMap};
use calabi::catalog::CatalogSurface;
use nalgebra::{DMatrix, DVector};

pub fn run_example() {
    let s = CatalogSurface::q(vec![2.0, 3.0], 3).unwrap();
    let phi = AffineMap::new(
        DMatrix::from_row_slice(3, 3, &[1.5, 0.2, 0.0, -0.4, 0.8, 0.3, 0.1, 0.0, 1.2]),
        DVector::from_vec(vec![0.3, -0.7, 2.0]),
        DVector::from_vec(vec![1.0, 0.0, -1.0, 0.5]),
    )
    .unwrap();
    println!("{}", serde_json::to_string(&phi).unwrap());
    let rep = check_equivalence_invariants(&phi, &s.as_function(), &s.sample_points(10, 3)).unwrap();
    println!("{rep:#?}");
    assert!(rep.max_scalar_deviation() < 1e-7 && rep.case_mismatches == 0);
}

#[allow(dead_code)]
fn main() {
    run_example();
}
