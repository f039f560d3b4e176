// The explicit parametrization of the log-cone and its induced metric.

use calabi::catalog::{logcone_graph_residual, logcone_param, logcone_pullback_metric};

pub fn run_example() {
    let c = 1.0;
    for y in [[0.0, 0.5, 0.0], [0.3, 1.2, 2.0], [-0.7, 2.5, -1.0]] {
        let x = logcone_param(c, y).unwrap();
        let g = logcone_pullback_metric(c, y).unwrap();
        println!("y = {y:?}");
        println!("  x = {x:?}");
        println!("  graph residual {:.3e}", logcone_graph_residual(c, y).unwrap());
        println!(
            "  metric diag ({:.6}, {:.6}, {:.6}), sinh^2 = {:.6}",
            g[(0, 0)],
            g[(1, 1)],
            g[(2, 2)],
            (c * y[1]).sinh().powi(2)
        );
    }
}

#[allow(dead_code)]
fn main() {
    run_example();
}
