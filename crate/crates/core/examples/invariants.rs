// Calabi metric, cubic form and curvature invariants at one point of the
// log-cone surface.

use calabi::catalog::CatalogSurface;
use calabi::function::eval_jet;
use calabi::geometry::{extremal_residual, parallel_rhs_checks, TensorBundle};

pub fn run_example() {
    let surface = CatalogSurface::log_cone(1.0).unwrap();
    let f = surface.as_function();
    let x = [2.0, 0.3, -0.5];
    let jet = eval_jet(&f, &x, 4).unwrap();
    let b = TensorBundle::from_jet(&jet).unwrap();
    let c = &b.curvature;
    println!("{surface} at {x:?}");
    println!("  J      = {:.12}", c.pick);
    println!("  R      = {:.12}", c.scalar);
    println!("  |T|^2  = {:.12}", c.t_norm_sq);
    println!("  |DA|   = {:.3e}", c.cov_a_norm.unwrap());
    println!("  |Riem| = {:.6}", c.riem_norm);
    println!("  Delta ln det Hess f = {:.3e}", extremal_residual(&jet).unwrap());
    let (t, j) = parallel_rhs_checks(&b);
    println!("  parallel identities: {t:.3e} {j:.3e}");
    assert!((c.scalar + 2.0).abs() < 1e-10);
}

#[allow(dead_code)]
fn main() {
    run_example();
}
