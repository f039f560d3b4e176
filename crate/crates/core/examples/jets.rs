// Fourth-order jets of an expression, checked against hand derivatives.

use calabi::function::{eval_jet, parse};

pub fn run_example() {
    let f = parse("x1^3*x2 + exp(x2) - ln(x1)").expect("valid expression");
    let jet = eval_jet(&f, &[2.0, 0.5], 4).expect("inside the domain");
    println!("f       = {:.6}", jet.value());
    println!("grad    = {:?}", jet.gradient().as_slice());
    println!("hessian = {}", jet.hessian());

    // f_112 = 6 x1, f_1111 = 6 / x1^4
    let f112 = jet.partial(&[0, 0, 1]);
    let f1111 = jet.partial(&[0, 0, 0, 0]);
    println!("f_112 = {f112}, f_1111 = {f1111}");
    assert!((f112 - 12.0).abs() < 1e-12);
    assert!((f1111 - 6.0 / 16.0).abs() < 1e-12);
}

#[allow(dead_code)]
fn main() {
    run_example();
}
