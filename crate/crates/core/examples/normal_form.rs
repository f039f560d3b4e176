// Normal form of the cubic form and the case label for each catalog family.

use calabi::catalog::CatalogSurface;
use calabi::geometry::TensorBundle;
use calabi::normal_form::normal_form;

pub fn run_example() {
    for id in ["paraboloid:3", "q:2,3:3", "logcone:1"] {
        let s = CatalogSurface::parse_id(id).unwrap().unwrap();
        let x = &s.sample_points(1, 7)[0];
        let nf = normal_form(&TensorBundle::compute(&s.as_function(), x).unwrap()).unwrap();
        let label = nf.case.map(|c| c.to_string()).unwrap_or_else(|| "-".into());
        println!("{id:<14} case {label}  spectrum {:?}", nf.spectrum);
        assert_eq!(nf.case, Some(s.expected_invariants().case));
    }
}

#[allow(dead_code)]
fn main() {
    run_example();
}
