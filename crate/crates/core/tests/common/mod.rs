#![allow(dead_code)]

use calabi::expr::Expr;
use calabi::function::FunctionSpec;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `f = x^T S x / 2 + sum a_k (u_k . x)^4 - sum b_k ln(2 + w_k . x)` with `S`
/// positive definite; convex on the whole box `[-1, 1]^n`.
pub struct RandomConvex {
    pub f: FunctionSpec,
    pub n: usize,
}

fn dot(c: &[f64]) -> Expr {
    Expr::sum(c.iter().enumerate().map(|(i, ci)| Expr::constant(*ci) * Expr::var(i)))
}

pub fn random_convex(rng: &mut ChaCha8Rng, n: usize) -> RandomConvex {
    let m: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut terms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            // S = M^T M + I / 2
            let mut s: f64 = (0..n).map(|k| m[k][i] * m[k][j]).sum();
            if i == j {
                s += 0.5;
            }
            terms.push(Expr::constant(0.5 * s) * Expr::var(i) * Expr::var(j));
        }
    }
    for _ in 0..2 {
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        terms.push(Expr::constant(rng.gen_range(0.05..0.5)) * dot(&u).powi(4));
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.4..0.4)).collect();
        let arg = Expr::constant(2.0) + dot(&w);
        terms.push(-(Expr::constant(rng.gen_range(0.2..2.0)) * arg.ln()));
    }
    RandomConvex {
        f: FunctionSpec::from_expr(Expr::sum(terms), n).unwrap(),
        n,
    }
}

pub fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Fourth-order central difference of `g` at `x` along coordinate `k`.
pub fn central_diff<T>(
    x: &[f64],
    k: usize,
    h: f64,
    mut g: impl FnMut(&[f64]) -> T,
    combine: impl Fn([&T; 4]) -> T,
) -> T {
    let shifted = |d: f64| {
        let mut y = x.to_vec();
        y[k] += d * h;
        y
    };
    let (p2, p1, m1, m2) = (g(&shifted(2.0)), g(&shifted(1.0)), g(&shifted(-1.0)), g(&shifted(-2.0)));
    combine([&p2, &p1, &m1, &m2])
}

/// `(-g(x+2h) + 8 g(x+h) - 8 g(x-h) + g(x-2h)) / 12h` for scalars.
pub fn diff_scalar(x: &[f64], k: usize, h: f64, g: impl FnMut(&[f64]) -> f64) -> f64 {
    central_diff(x, k, h, g, |[p2, p1, m1, m2]| {
        (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h)
    })
}
