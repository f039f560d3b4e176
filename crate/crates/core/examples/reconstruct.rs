// Rebuilds a flat surface from constant cubic data and identifies it.

use calabi::reconstruct::{closed_form, integrate_frames, recovered_surface, FlatParallelData};

pub fn run_example() {
    let data = FlatParallelData::new(3, vec![2.0, 1.0], vec![0.5, 1.0, 1.5]).unwrap();
    let run = integrate_frames(&data, 10_000).unwrap();
    let exact = closed_form(&data);
    let err = run
        .position
        .iter()
        .zip(&exact)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("x(1) = {exact:?}");
    println!("rk4 deviation {err:.3e}, step estimate {:.3e}", run.error_estimate);
    println!("affine equivalent to {}", recovered_surface(&data).unwrap());
    assert!(err < 1e-9);
}

#[allow(dead_code)]
fn main() {
    run_example();
}
