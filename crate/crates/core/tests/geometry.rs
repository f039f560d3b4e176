mod common;

use calabi::function::FunctionSpec;
use calabi::geometry::TensorBundle;
use calabi::tensor::multi_indices;
use common::{central_diff, diff_scalar, random_convex, random_point};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-3;

fn setup(seed: u64, n: usize) -> (FunctionSpec, Vec<f64>, TensorBundle) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rc = random_convex(&mut rng, n);
    let x = random_point(&mut rng, n);
    let b = TensorBundle::compute(&rc.f, &x).unwrap();
    (rc.f, x, b)
}

fn bundle_at(f: &FunctionSpec, y: &[f64]) -> TensorBundle {
    TensorBundle::compute(f, y).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn codazzi_and_full_symmetry(seed in any::<u64>(), n in 2usize..=4) {
        let (_, _, b) = setup(seed, n);
        let cov = b.cubic.cov_a.as_ref().unwrap();
        let scale = 1.0 + cov.max_abs();
        for [i, j, k, l] in multi_indices::<4>(n) {
            let v = cov[[i, j, k, l]];
            prop_assert!((v - cov[[i, j, l, k]]).abs() < 1e-10 * scale);
            prop_assert!((v - cov[[j, i, k, l]]).abs() < 1e-10 * scale);
            prop_assert!((v - cov[[k, j, i, l]]).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn curvature_symmetries_and_bianchi(seed in any::<u64>(), n in 2usize..=4) {
        let (_, _, b) = setup(seed, n);
        let r = &b.curvature.riem;
        let scale = 1.0 + r.max_abs();
        for [i, j, k, l] in multi_indices::<4>(n) {
            let v = r[[i, j, k, l]];
            prop_assert!((v + r[[j, i, k, l]]).abs() < 1e-12 * scale);
            prop_assert!((v + r[[i, j, l, k]]).abs() < 1e-12 * scale);
            prop_assert!((v - r[[k, l, i, j]]).abs() < 1e-12 * scale);
            let cyc = v + r[[j, k, i, l]] + r[[k, i, j, l]];
            prop_assert!(cyc.abs() < 1e-12 * scale);
        }
        let ric = &b.curvature.ric;
        prop_assert!((ric - ric.transpose()).amax() < 1e-12 * (1.0 + ric.amax()));
    }

    /// R computed from the curvature tensor equals n(n-1)J - n^2|T|^2.
    #[test]
    fn scalar_curvature_from_invariants(seed in any::<u64>(), n in 2usize..=4) {
        let (_, _, b) = setup(seed, n);
        let c = &b.curvature;
        prop_assert!((c.scalar - c.scalar_from_invariants).abs() < 1e-10 * (1.0 + c.scalar.abs()));
    }

    /// T_k = -(1/2n) d_k ln det G.
    #[test]
    fn tchebychev_is_log_determinant_gradient(seed in any::<u64>(), n in 2usize..=4) {
        let (f, x, b) = setup(seed, n);
        for k in 0..n {
            let d = diff_scalar(&x, k, H, |y| bundle_at(&f, y).metric.det.ln());
            let want = -d / (2.0 * n as f64);
            let got = b.curvature.t_down[k];
            prop_assert!((got - want).abs() < 1e-7 * (1.0 + want.abs()), "{k}: {got} vs {want}");
        }
    }

    /// Curvature built from finite differences of the connection.
    #[test]
    fn riemann_from_connection(seed in any::<u64>(), n in 2usize..=3) {
        let (f, x, b) = setup(seed, n);
        let gamma = &b.cubic.gamma;
        // dgamma[l][[m, i, j]] = d_l Gamma^m_ij
        let dgamma: Vec<_> = (0..n)
            .map(|l| {
                central_diff(&x, l, H, |y| bundle_at(&f, y).cubic.gamma, |[p2, p1, m1, m2]| {
                    calabi::tensor::Tensor::<3>::from_fn(n, |idx| {
                        (-p2[idx] + 8.0 * p1[idx] - 8.0 * m1[idx] + m2[idx]) / (12.0 * H)
                    })
                })
            })
            .collect();
        let g = &b.metric.g;
        let r = &b.curvature.riem;
        for [i, j, k, l] in multi_indices::<4>(n) {
            // R(d_i, d_j) d_l with components along d_m, then lowered by k
            let mut want = 0.0;
            for m in 0..n {
                let mut comp = dgamma[i][[m, j, l]] - dgamma[j][[m, i, l]];
                for p in 0..n {
                    comp += gamma[[p, j, l]] * gamma[[m, i, p]] - gamma[[p, i, l]] * gamma[[m, j, p]];
                }
                want += g[(k, m)] * comp;
            }
            let got = r[[i, j, k, l]];
            prop_assert!((got - want).abs() < 1e-6 * (1.0 + r.max_abs()), "{i}{j}{k}{l}: {got} vs {want}");
        }
    }

    /// Covariant derivative of A from finite differences of A and the connection.
    #[test]
    fn covariant_derivative_from_differences(seed in any::<u64>(), n in 2usize..=3) {
        let (f, x, b) = setup(seed, n);
        let a = &b.cubic.a;
        let gamma = &b.cubic.gamma;
        let cov = b.cubic.cov_a.as_ref().unwrap();
        for l in 0..n {
            let da = central_diff(&x, l, H, |y| bundle_at(&f, y).cubic.a, |[p2, p1, m1, m2]| {
                calabi::tensor::Tensor::<3>::from_fn(n, |idx| {
                    (-p2[idx] + 8.0 * p1[idx] - 8.0 * m1[idx] + m2[idx]) / (12.0 * H)
                })
            });
            for [i, j, k] in multi_indices::<3>(n) {
                let mut want = da[[i, j, k]];
                for m in 0..n {
                    want -= gamma[[m, l, i]] * a[[m, j, k]] + gamma[[m, l, j]] * a[[i, m, k]] + gamma[[m, l, k]] * a[[i, j, m]];
                }
                let got = cov[[i, j, k, l]];
                prop_assert!((got - want).abs() < 1e-6 * (1.0 + cov.max_abs()));
            }
        }
    }
}

#[test]
fn metric_frame_is_orthonormal() {
    let (_, _, b) = setup(11, 4);
    let e = &b.metric.frame;
    let id = e.transpose() * &b.metric.g * e;
    assert!((id - DMatrix::<f64>::identity(4, 4)).amax() < 1e-12);
}
