//! Pointwise Calabi geometry of a graph `x_{n+1} = f(x)`.
//!
//! Everything here is stored in coordinate indices. Contractions raise
//! indices with `G^{-1}` explicitly; norms are taken in a `G`-orthonormal frame
//! obtained from the Cholesky factor, which is the same contraction.
//!
//! Conventions:
//! * `G_ij = f_ij`, `A_ijk = -f_ijk / 2`, `Gamma^k_ij = f^{kl} f_ijl / 2`
//!   (stored as `gamma[[k, i, j]]`).
//! * `R_ijkl = f^{mh} (A_jkm A_hil - A_ikm A_hjl)`, so `R_ijij` is a sectional
//!   curvature, `Ric_ik = G^{jl} R_ijkl`, and the scalar curvature equals
//!   `n(n-1) J - n^2 |T|^2`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::function::{eval_jet, FunctionSpec};
use crate::jet::Jet4;
use crate::tensor::Tensor;

#[derive(Debug, Clone)]
pub struct MetricData {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub det: f64,
    /// Lower Cholesky factor, `G = L L^T`.
    pub chol: DMatrix<f64>,
    /// Columns form a `G`-orthonormal frame (`L^{-T}`).
    pub frame: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct CubicData {
    pub a: Tensor<3>,
    pub gamma: Tensor<3>,
    /// `A_{ijk,l}` stored as `[[i, j, k, l]]`; present for order-4 jets.
    pub cov_a: Option<Tensor<4>>,
}

#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub riem: Tensor<4>,
    pub ric: DMatrix<f64>,
    /// `G^{ik} Ric_ik`.
    pub scalar: f64,
    /// `n(n-1) J - n^2 |T|^2`.
    pub scalar_from_invariants: f64,
    pub t_up: DVector<f64>,
    pub t_down: DVector<f64>,
    pub t_norm_sq: f64,
    pub pick: f64,
    /// `|nabla A|` (G-contracted), when the jet has order 4.
    pub cov_a_norm: Option<f64>,
    pub riem_norm: f64,
}

impl CurvatureData {
    pub fn scalar_discrepancy(&self) -> f64 {
        (self.scalar - self.scalar_from_invariants).abs()
    }
}

/// All pointwise data at one point.
#[derive(Debug, Clone)]
pub struct TensorBundle {
    pub point: Vec<f64>,
    pub metric: MetricData,
    pub cubic: CubicData,
    pub curvature: CurvatureData,
}

impl TensorBundle {
    pub fn from_jet(jet: &Jet4) -> Result<Self> {
        let metric = metric_at(jet)?;
        let cubic = cubic_with_metric(jet, &metric)?;
        let curvature = curvature_with(&metric, &cubic)?;
        Ok(Self {
            point: jet.point().to_vec(),
            metric,
            cubic,
            curvature,
        })
    }

    /// Jet of order 4 at `x`, then every tensor.
    pub fn compute(f: &FunctionSpec, x: &[f64]) -> Result<Self> {
        Self::from_jet(&eval_jet(f, x, 4)?)
    }

    pub fn dim(&self) -> usize {
        self.point.len()
    }

    /// Cubic form expressed in the Cholesky frame.
    pub fn frame_cubic(&self) -> Tensor<3> {
        self.cubic.a.transform(&self.metric.frame)
    }
}

pub fn metric_at(jet: &Jet4) -> Result<MetricData> {
    jet.require_order(2)?;
    let g = jet.hessian();
    let n = g.nrows();
    let min_eig = || SymmetricEigen::new(g.clone()).eigenvalues.min();
    let chol = match g.clone().cholesky() {
        Some(c) => c,
        None => {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min_eig(),
            })
        }
    };
    let l = chol.l();
    if (0..n).any(|i| !(l[(i, i)] > 0.0)) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min_eig(),
        });
    }
    let det = (0..n).map(|i| l[(i, i)] * l[(i, i)]).product();
    let g_inv = chol.inverse();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or(Error::NotPositiveDefinite { min_eigenvalue: 0.0 })?;
    let frame = l_inv.transpose();
    Ok(MetricData {
        g,
        g_inv,
        det,
        chol: l,
        frame,
    })
}

pub fn cubic_at(jet: &Jet4) -> Result<CubicData> {
    let metric = metric_at(jet)?;
    cubic_with_metric(jet, &metric)
}

fn cubic_with_metric(jet: &Jet4, metric: &MetricData) -> Result<CubicData> {
    jet.require_order(3)?;
    let n = jet.dim();
    let f3 = jet.third();
    let a = Tensor::from_fn(n, |idx| -0.5 * f3[idx]);
    let gi = &metric.g_inv;
    let gamma = Tensor::from_fn(n, |[k, i, j]| {
        0.5 * (0..n).map(|l| gi[(k, l)] * f3[[i, j, l]]).sum::<f64>()
    });
    let cov_a = if jet.order() >= 4 {
        let f4 = jet.fourth();
        Some(Tensor::from_fn(n, |[i, j, k, l]| {
            let mut v = -0.5 * f4[[i, j, k, l]];
            for m in 0..n {
                v -=
                    gamma[[m, l, i]] * a[[m, j, k]] + gamma[[m, l, j]] * a[[i, m, k]] + gamma[[m, l, k]] * a[[i, j, m]];
            }
            v
        }))
    } else {
        None
    };
    Ok(CubicData { a, gamma, cov_a })
}

pub fn curvature_at(jet: &Jet4) -> Result<CurvatureData> {
    let metric = metric_at(jet)?;
    let cubic = cubic_with_metric(jet, &metric)?;
    curvature_with(&metric, &cubic)
}

fn curvature_with(metric: &MetricData, cubic: &CubicData) -> Result<CurvatureData> {
    let n = metric.g.nrows();
    if n < 2 {
        return Err(Error::PickUndefined);
    }
    let gi = &metric.g_inv;
    let a = &cubic.a;

    // A^h_{il} = G^{hm} A_{mil}
    let a_up = Tensor::<3>::from_fn(n, |[h, i, l]| (0..n).map(|m| gi[(h, m)] * a[[m, i, l]]).sum());
    let riem = Tensor::<4>::from_fn(n, |[i, j, k, l]| {
        (0..n)
            .map(|h| a[[j, k, h]] * a_up[[h, i, l]] - a[[i, k, h]] * a_up[[h, j, l]])
            .sum()
    });
    let ric = DMatrix::from_fn(n, n, |i, k| {
        let mut s = 0.0;
        for j in 0..n {
            for l in 0..n {
                s += gi[(j, l)] * riem[[i, j, k, l]];
            }
        }
        s
    });
    let scalar = (gi.component_mul(&ric)).sum();

    // T_k = (1/n) G^{ij} A_ijk
    let t_down = DVector::from_fn(n, |k, _| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += gi[(i, j)] * a[[i, j, k]];
            }
        }
        s / n as f64
    });
    let t_up = gi * &t_down;
    let t_norm_sq = t_down.dot(&t_up);

    let frame = &metric.frame;
    let a_norm_sq = a.transform(frame).norm_sq();
    let nf = n as f64;
    let pick = a_norm_sq / (nf * (nf - 1.0));
    let scalar_from_invariants = nf * (nf - 1.0) * pick - nf * nf * t_norm_sq;
    let riem_norm = riem.transform(frame).norm_sq().sqrt();
    let cov_a_norm = cubic.cov_a.as_ref().map(|c| c.transform(frame).norm_sq().sqrt());

    Ok(CurvatureData {
        riem,
        ric,
        scalar,
        scalar_from_invariants,
        t_up,
        t_down,
        t_norm_sq,
        pick,
        cov_a_norm,
        riem_norm,
    })
}

/// Right-hand sides of the Laplacian identities for `|T|^2` and `J` with all
/// covariant-derivative terms dropped:
/// `|Ric(T, T)|` and `||Riem||^2 + sum Ric_ij A_ipq A_jpq`, both in a
/// `G`-orthonormal frame. Both vanish on a surface with parallel cubic form.
pub fn parallel_rhs_checks(bundle: &TensorBundle) -> (f64, f64) {
    let frame = &bundle.metric.frame;
    let curv = &bundle.curvature;
    let ric_f = frame.transpose() * &curv.ric * frame;
    let t_f = bundle.metric.chol.transpose() * &curv.t_up;
    let tcheb = (t_f.transpose() * &ric_f * &t_f)[(0, 0)].abs();

    let a_f = bundle.frame_cubic();
    let riem_sq = curv.riem.transform(frame).norm_sq();
    let n = bundle.dim();
    let mut mixed = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut dot = 0.0;
            for p in 0..n {
                for q in 0..n {
                    dot += a_f[[i, p, q]] * a_f[[j, p, q]];
                }
            }
            mixed += ric_f[(i, j)] * dot;
        }
    }
    (tcheb, (riem_sq + mixed).abs())
}

/// `Delta ln det(f_ij)` with `Delta` the Laplacian of the Calabi metric.
pub fn extremal_residual(jet: &Jet4) -> Result<f64> {
    jet.require_order(4)?;
    let metric = metric_at(jet)?;
    let n = jet.dim();
    let gi = &metric.g_inv;
    let f3 = jet.third();
    let f4 = jet.fourth();
    // phi = ln det(f_ij); d_l phi = f^{ij} f_ijl
    let dphi = DVector::from_fn(n, |l, _| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += gi[(i, j)] * f3[[i, j, l]];
            }
        }
        s
    });
    // d_k d_l phi = f^{ij} f_ijkl - f^{ia} f_abk f^{bj} f_ijl
    let slice = |k: usize| DMatrix::from_fn(n, n, |a, b| f3[[a, b, k]]);
    let slices: Vec<DMatrix<f64>> = (0..n).map(slice).collect();
    let gs: Vec<DMatrix<f64>> = slices.iter().map(|s| gi * s).collect();
    let mut lap = 0.0;
    for k in 0..n {
        for l in 0..n {
            let mut h = 0.0;
            for i in 0..n {
                for j in 0..n {
                    h += gi[(i, j)] * f4[[i, j, k, l]];
                }
            }
            h -= (&gs[k] * &gs[l]).trace();
            // Gamma^m_kl d_m phi
            let mut christoffel = 0.0;
            for m in 0..n {
                let gamma: f64 = 0.5 * (0..n).map(|q| gi[(m, q)] * f3[[k, l, q]]).sum::<f64>();
                christoffel += gamma * dphi[m];
            }
            lap += gi[(k, l)] * (h - christoffel);
        }
    }
    Ok(lap)
}
