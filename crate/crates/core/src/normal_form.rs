//! Ejiri-type normal form of the cubic form at a point and the case label.
//!
//! `e1` maximizes `F(v) = A(v, v, v)` on the `G`-unit sphere. The rest of the
//! basis diagonalizes `v -> A(e1, v, .)` on `e1`'s orthogonal complement; inside
//! an eigenspace of repeated `mu` the restricted `F` is maximized again to fix
//! the remaining freedom.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::TensorBundle;
use crate::tensor::Tensor;

/// Relative tolerance for `mu_j = mu_1 / 2` and `mu_j = 0` coincidences.
pub const TIE_TOL: f64 = 1e-6;
pub const MIN_STARTS: usize = 32;
const START_SEED: u64 = 0xe71_0ba5;
const MAX_ITERS: usize = 20_000;

/// Label `C_i` of the spectrum pattern `mu_2 = .. = mu_i = mu_1/2`, rest zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CaseLabel(pub usize);

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", self.0)
    }
}

impl Serialize for CaseLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Maximizer of the cubic on the unit sphere.
#[derive(Debug, Clone)]
pub struct CubicMaximum {
    /// `G`-unit vector in coordinates.
    pub direction: DVector<f64>,
    /// Same vector in the Cholesky frame of the bundle.
    pub frame_direction: DVector<f64>,
    pub value: f64,
    /// `|A(e1, e1, .)^# - mu1 e1|`, measured in the frame.
    pub lagrange_residual: f64,
}

#[derive(Debug, Clone)]
pub struct NormalForm {
    /// Columns `e_1..e_n` in coordinates; `e_i^T G e_j = delta_ij`.
    pub basis: DMatrix<f64>,
    /// `mu_i = A(e1, e_i, e_i)`; entries 2.. in decreasing order.
    pub spectrum: Vec<f64>,
    /// `None` when the spectrum fits none of the patterns.
    pub case: Option<CaseLabel>,
    /// `max_{i != j} |A(e1, e_i, e_j)|`.
    pub off_diagonality: f64,
    pub lagrange_residual: f64,
    /// `A(e_i, e_j, e_k)`.
    pub frame_cubic: Tensor<3>,
}

/// Largest value of `A(v, v, v)` over `G`-unit vectors.
pub fn maximize_cubic(bundle: &TensorBundle) -> Result<CubicMaximum> {
    let n = bundle.dim();
    if n < 2 {
        return Err(Error::InvalidParameter("cubic maximization needs n >= 2".into()));
    }
    let a = bundle.frame_cubic();
    let (w, value, residual) = sphere_max(&a, START_SEED)?;
    Ok(CubicMaximum {
        direction: &bundle.metric.frame * &w,
        frame_direction: w,
        value,
        lagrange_residual: residual,
    })
}

/// Completes a maximizer to the full normal form, classifying with [`TIE_TOL`].
pub fn build_basis(bundle: &TensorBundle, max: &CubicMaximum) -> Result<NormalForm> {
    let n = bundle.dim();
    let a = bundle.frame_cubic();
    let w = max.frame_direction.normalize();
    let mu1 = max.value.max(0.0);

    let complement = orthogonal_complement(&w);
    let op = contract_first(&a, &w);
    let restricted = complement.transpose() * &op * &complement;
    let eig = SymmetricEigen::new((&restricted + restricted.transpose()) * 0.5);
    let mut order: Vec<usize> = (0..n - 1).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let tie = TIE_TOL * mu1.max(1e-12);
    let mut columns = vec![w.clone()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && eig.eigenvalues[order[start]] - eig.eigenvalues[order[end]] < tie {
            end += 1;
        }
        let cols: Vec<DVector<f64>> = order[start..end]
            .iter()
            .map(|&i| &complement * eig.eigenvectors.column(i))
            .collect();
        refine_eigenspace(&a, DMatrix::from_columns(&cols), &mut columns)?;
        start = end;
    }

    let frame_basis = DMatrix::from_columns(&columns);
    let frame_cubic = a.transform(&frame_basis);
    let spectrum: Vec<f64> = (0..n).map(|i| frame_cubic[[0, i, i]]).collect();
    let mut off: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off = off.max(frame_cubic[[0, i, j]].abs());
            }
        }
    }
    Ok(NormalForm {
        basis: &bundle.metric.frame * &frame_basis,
        case: classify_case(&spectrum, TIE_TOL).ok(),
        spectrum,
        off_diagonality: off,
        lagrange_residual: max.lagrange_residual,
        frame_cubic,
    })
}

pub fn normal_form(bundle: &TensorBundle) -> Result<NormalForm> {
    let max = maximize_cubic(bundle)?;
    build_basis(bundle, &max)
}

/// Case label of an ordered spectrum `(mu_1, .., mu_n)`.
pub fn classify_case(spectrum: &[f64], tol: f64) -> Result<CaseLabel> {
    let Some(&mu1) = spectrum.first() else {
        return Err(Error::PatternMismatch { spectrum: vec![] });
    };
    if mu1 < tol {
        return Ok(CaseLabel(0));
    }
    let mut halves = 0;
    for &mu in &spectrum[1..] {
        if (mu - 0.5 * mu1).abs() < tol * mu1 {
            halves += 1;
        } else if mu.abs() >= tol * mu1 {
            return Err(Error::PatternMismatch {
                spectrum: spectrum.to_vec(),
            });
        }
    }
    Ok(CaseLabel(1 + halves))
}

/// Orders the eigenspace spanned by `space`'s orthonormal columns by repeated
/// maximization of the cubic restricted to what is left.
fn refine_eigenspace(a: &Tensor<3>, mut space: DMatrix<f64>, out: &mut Vec<DVector<f64>>) -> Result<()> {
    while space.ncols() > 1 {
        let restricted = restrict(a, &space);
        let (z, _, _) = sphere_max(&restricted, START_SEED ^ space.ncols() as u64)?;
        out.push(&space * &z);
        space = &space * orthogonal_complement(&z);
    }
    let mut last = space.column(0).into_owned();
    if cubic_value(a, &last) < 0.0 {
        last = -last;
    }
    out.push(last);
    Ok(())
}

/// `B(a, b, c) = A(V a, V b, V c)` for the columns of `v`.
fn restrict(a: &Tensor<3>, v: &DMatrix<f64>) -> Tensor<3> {
    let n = a.dim();
    let d = v.ncols();
    Tensor::from_fn(d, |[p, q, r]| {
        let mut s = 0.0;
        for ([i, j, k], val) in a.iter() {
            if val != 0.0 {
                s += val * v[(i, p)] * v[(j, q)] * v[(k, r)];
            }
        }
        debug_assert_eq!(v.nrows(), n);
        s
    })
}

/// Matrix `A(w, ., .)`.
fn contract_first(a: &Tensor<3>, w: &DVector<f64>) -> DMatrix<f64> {
    let n = a.dim();
    DMatrix::from_fn(n, n, |j, k| (0..n).map(|i| w[i] * a[[i, j, k]]).sum())
}

/// Vector `A(w, w, .)`.
fn contract_two(a: &Tensor<3>, w: &DVector<f64>) -> DVector<f64> {
    contract_first(a, w) * w
}

fn cubic_value(a: &Tensor<3>, w: &DVector<f64>) -> f64 {
    contract_two(a, w).dot(w)
}

/// Orthonormal basis (as columns) of the complement of the unit vector `w`,
/// taken from a Householder reflection.
fn orthogonal_complement(w: &DVector<f64>) -> DMatrix<f64> {
    let n = w.len();
    let mut u = w.clone();
    let s = if w[0] >= 0.0 { 1.0 } else { -1.0 };
    u[0] += s;
    let norm_sq = u.norm_squared();
    let h = DMatrix::identity(n, n) - (&u * u.transpose()) * (2.0 / norm_sq);
    h.columns(1, n - 1).into_owned()
}

/// Shifted power iteration from many starts, polished by Riemannian Newton
/// steps. Returns `(argmax, max, lagrange residual)`.
fn sphere_max(a: &Tensor<3>, seed: u64) -> Result<(DVector<f64>, f64, f64)> {
    let d = a.dim();
    let scale = a.norm_sq().sqrt();
    if scale < 1e-300 {
        return Ok((DVector::from_fn(d, |i, _| if i == 0 { 1.0 } else { 0.0 }), 0.0, 0.0));
    }
    if d == 1 {
        let v = a[[0, 0, 0]];
        return Ok((
            DVector::from_element(1, if v >= 0.0 { 1.0 } else { -1.0 }),
            v.abs(),
            0.0,
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<DVector<f64>> = Vec::with_capacity(MIN_STARTS + 2 * d);
    for i in 0..d {
        for s in [1.0, -1.0] {
            starts.push(DVector::from_fn(d, |j, _| if i == j { s } else { 0.0 }));
        }
    }
    while starts.len() < MIN_STARTS + 2 * d {
        let v = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        if v.norm() > 1e-8 {
            starts.push(v.normalize());
        }
    }

    let shift = 2.0 * scale;
    let mut best: Option<(DVector<f64>, f64, f64)> = None;
    for start in starts {
        let mut w = start;
        let floor = best.as_ref().map(|b| b.1);
        for _ in 0..MAX_ITERS {
            let next = (contract_two(a, &w) + &w * shift).normalize();
            let step = (&next - &w).amax();
            w = next;
            // Newton polish supplies the last digits
            if step < 1e-11 {
                break;
            }
            // stalled near a degenerate critical point below the best maximum
            if step < 1e-4 && floor.is_some_and(|f| cubic_value(a, &w) < f - 1e-3 * scale) {
                break;
            }
        }
        let w = newton_polish(a, w, scale);
        let value = cubic_value(a, &w);
        let residual = (contract_two(a, &w) - &w * value).norm();
        let better = match &best {
            None => true,
            Some((_, v, r)) => value > *v + 1e-12 * scale || (value > *v - 1e-12 * scale && residual < *r),
        };
        if better {
            best = Some((w, value, residual));
        }
    }
    let (w, value, residual) = best.expect("at least one start");
    if residual > 1e-8 * (1.0 + scale) {
        return Err(Error::Convergence {
            what: "cubic maximization",
            detail: format!("best value {value} with Lagrange residual {residual:e}"),
        });
    }
    Ok((w, value, residual))
}

fn newton_polish(a: &Tensor<3>, mut w: DVector<f64>, scale: f64) -> DVector<f64> {
    let d = w.len();
    let residual = |w: &DVector<f64>| (contract_two(a, w) - w * cubic_value(a, w)).norm();
    let mut r = residual(&w);
    for _ in 0..4 {
        if r < 1e-15 * scale {
            break;
        }
        let lambda = cubic_value(a, &w);
        let grad = contract_two(a, &w) - &w * lambda;
        let proj = DMatrix::identity(d, d) - &w * w.transpose();
        let hess = &proj * (contract_first(a, &w) * 2.0 - DMatrix::identity(d, d) * lambda) * &proj;
        let Ok(pinv) = hess.pseudo_inverse(1e-10 * scale) else {
            break;
        };
        let step = -(pinv * grad);
        let cand = (&w + step).normalize();
        let rc = residual(&cand);
        if rc < r && cubic_value(a, &cand) >= lambda - 1e-12 * scale {
            w = cand;
            r = rc;
        } else {
            break;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::parse;

    fn nf(src: &str, x: &[f64]) -> NormalForm {
        let b = TensorBundle::compute(&parse(src).unwrap(), x).unwrap();
        normal_form(&b).unwrap()
    }

    #[test]
    fn classification_patterns() {
        assert_eq!(classify_case(&[0.0, 0.0, 0.0], 1e-6).unwrap(), CaseLabel(0));
        let s = std::f64::consts::SQRT_2;
        assert_eq!(classify_case(&[s, 1.0 / s, 0.0], 1e-6).unwrap(), CaseLabel(2));
        assert_eq!(classify_case(&[1.0, 0.0, 0.0], 1e-6).unwrap(), CaseLabel(1));
        assert_eq!(classify_case(&[2.0, 1.0, 1.0], 1e-6).unwrap(), CaseLabel(3));
        assert!(matches!(
            classify_case(&[1.0, 0.3, 0.0], 1e-6),
            Err(Error::PatternMismatch { .. })
        ));
    }

    #[test]
    fn paraboloid_normal_form() {
        let f = nf("0.5*(x1^2+x2^2+x3^2)", &[0.1, 0.2, 0.3]);
        assert_eq!(f.spectrum, vec![0.0; 3]);
        assert_eq!(f.case, Some(CaseLabel(0)));
        assert_eq!(f.frame_cubic.max_abs(), 0.0);
    }

    #[test]
    fn single_log_maximizer_matches_dense_sampling() {
        let b = TensorBundle::compute(&parse("-ln(x1)+0.5*x2^2").unwrap(), &[1.0, 0.3]).unwrap();
        let max = maximize_cubic(&b).unwrap();
        assert!((max.value - 1.0).abs() < 1e-12);
        assert!(max.direction[0] > 0.0 && max.direction[1].abs() < 1e-9);
        // oracle: F on the unit circle at 1e-3 rad resolution
        let a = b.frame_cubic();
        let sampled = (0..6284)
            .map(|k| {
                let t = k as f64 * 1e-3;
                let v = DVector::from_vec(vec![t.cos(), t.sin()]);
                cubic_value(&a, &v)
            })
            .fold(f64::MIN, f64::max);
        assert!(max.value >= sampled - 1e-12 && max.value - sampled < 1e-5);
    }

    #[test]
    fn unit_q3_frame_is_diagonal() {
        let f = nf("-ln(x1)-ln(x2)-ln(x3)", &[1.0, 1.0, 1.0]);
        for ([i, j, k], v) in f.frame_cubic.iter() {
            let expect = if i == j && j == k { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-9, "{i}{j}{k} {v}");
        }
        assert_eq!(f.case, Some(CaseLabel(1)));
    }

    #[test]
    fn lorentz_log_frame_has_case_two_shape() {
        let f = nf("-0.5*ln(x1^2-x2^2-x3^2)", &[2.0, 1.0, 0.0]);
        let s = std::f64::consts::SQRT_2;
        assert!((f.spectrum[0] - s).abs() < 1e-9);
        assert!((f.spectrum[1] - 1.0 / s).abs() < 1e-9);
        assert!(f.spectrum[2].abs() < 1e-9);
        assert_eq!(f.case, Some(CaseLabel(2)));
        let a = &f.frame_cubic;
        let d = a[[1, 1, 2]];
        assert!(a[[1, 1, 1]].abs() < 1e-9);
        assert!(a[[1, 2, 2]].abs() < 1e-9);
        assert!((d * d - 0.5).abs() < 1e-9);
        assert!((a[[2, 2, 2]] - 2.0 * d).abs() < 1e-9);
        assert!(f.off_diagonality < 1e-9);
    }

    #[test]
    fn basis_is_g_orthonormal() {
        let src = "-2*ln(x1)-0.5*ln(x2)+x3^2+0.1*x1*x3^3";
        let b = TensorBundle::compute(&parse(src).unwrap(), &[1.3, 0.8, 0.4]).unwrap();
        let f = normal_form(&b).unwrap();
        let gram = f.basis.transpose() * &b.metric.g * &f.basis;
        assert!((gram - DMatrix::<f64>::identity(3, 3)).amax() < 1e-10);
        assert!(f.off_diagonality < 1e-8 * (1.0 + f.spectrum[0]));
        for mu in &f.spectrum[1..] {
            assert!(f.spectrum[0] >= 2.0 * mu - 1e-8);
        }
    }
}
