//! Closed-form hypersurfaces with parallel cubic form and their known invariants.
//!
//! * `Paraboloid(n)`: `f = |x|^2 / 2`.
//! * `Q(c_1..c_r; n)`: `f = -sum_{i<=r} c_i ln x_i + sum_{j>r} x_j^2 / 2` on
//!   `x_1, .., x_r > 0`. Flat metric, parallel cubic form.
//! * `LogCone(c)`: `f = -ln(x_1^2 - x_2^2 - x_3^2) / (2 c^2)` on the solid cone
//!   `x_1 > sqrt(x_2^2 + x_3^2)`. Parallel cubic form, metric locally a product
//!   of a line with a hyperbolic plane of curvature `-c^2`.

use std::fmt;

use nalgebra::{DMatrix, SMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::function::{eval_jet, FunctionSpec};
use crate::jet::MAX_DIM;
use crate::normal_form::CaseLabel;

/// Distance kept from the boundary of the domain when sampling.
pub const SAMPLE_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub enum CatalogSurface {
    Paraboloid { n: usize },
    Q { c: Vec<f64>, n: usize },
    LogCone { c: f64 },
}

/// Invariants every point of a catalog surface must show.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedInvariants {
    pub flat: bool,
    pub parallel: bool,
    pub pick: f64,
    pub scalar: f64,
    pub tchebychev_sq: f64,
    pub case: CaseLabel,
    /// Normal-form spectrum `(mu_1, .., mu_n)`.
    pub spectrum: Vec<f64>,
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::UnsupportedDimension(n));
    }
    Ok(())
}

impl CatalogSurface {
    pub fn paraboloid(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self::Paraboloid { n })
    }

    pub fn q(c: Vec<f64>, n: usize) -> Result<Self> {
        check_dim(n)?;
        if c.is_empty() || c.len() > n {
            return Err(Error::InvalidParameter(format!(
                "Q needs 1 <= r <= n, got r = {} with n = {n}",
                c.len()
            )));
        }
        if let Some(bad) = c.iter().find(|ci| !(ci.is_finite() && **ci > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "Q coefficients must be positive, got {bad}"
            )));
        }
        Ok(Self::Q { c, n })
    }

    pub fn log_cone(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "log-cone constant must be positive, got {c}"
            )));
        }
        Ok(Self::LogCone { c })
    }

    /// Recognizes `paraboloid:n`, `q:c1,...,cr:n` and `logcone:c`.
    ///
    /// Returns `Ok(None)` for text that is not a catalog id at all.
    pub fn parse_id(text: &str) -> Result<Option<Self>> {
        let text = text.trim();
        let Some((kind, rest)) = text.split_once(':') else {
            return Ok(None);
        };
        let bad = |what: &str| Error::InvalidParameter(format!("`{text}`: {what}"));
        let real = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("malformed number"));
        let count = |s: &str| s.trim().parse::<usize>().map_err(|_| bad("malformed dimension"));
        let surface = match kind.trim().to_ascii_lowercase().as_str() {
            "paraboloid" => Self::paraboloid(count(rest)?)?,
            "q" => {
                let (coeffs, n) = rest.rsplit_once(':').ok_or_else(|| bad("expected q:c1,...,cr:n"))?;
                let c = coeffs.split(',').map(real).collect::<Result<Vec<_>>>()?;
                Self::q(c, count(n)?)?
            }
            "logcone" => Self::log_cone(real(rest)?)?,
            _ => return Ok(None),
        };
        Ok(Some(surface))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Paraboloid { n } | Self::Q { n, .. } => *n,
            Self::LogCone { .. } => 3,
        }
    }

    pub fn expr(&self) -> Expr {
        let half_sq = |j: usize| Expr::constant(0.5) * Expr::var(j).powi(2);
        match self {
            Self::Paraboloid { n } => Expr::sum((0..*n).map(half_sq)),
            Self::Q { c, n } => {
                let logs = c
                    .iter()
                    .enumerate()
                    .map(|(i, &ci)| Expr::constant(-ci) * Expr::var(i).ln());
                Expr::sum(logs.chain((c.len()..*n).map(half_sq)))
            }
            Self::LogCone { c } => {
                let q = Expr::var(0).powi(2) - Expr::var(1).powi(2) - Expr::var(2).powi(2);
                Expr::constant(-1.0 / (2.0 * c * c)) * q.ln()
            }
        }
    }

    pub fn as_function(&self) -> FunctionSpec {
        FunctionSpec::Expr {
            expr: self.expr(),
            dim: self.dim(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            Self::Paraboloid { .. } => true,
            Self::Q { c, .. } => x[..c.len()].iter().all(|&xi| xi > 0.0),
            Self::LogCone { .. } => x[0] > x[1].hypot(x[2]),
        }
    }

    pub fn expected_invariants(&self) -> ExpectedInvariants {
        match self {
            Self::Paraboloid { n } => ExpectedInvariants {
                flat: true,
                parallel: true,
                pick: 0.0,
                scalar: 0.0,
                tchebychev_sq: 0.0,
                case: CaseLabel(0),
                spectrum: vec![0.0; *n],
            },
            Self::Q { c, n } => {
                let nf = *n as f64;
                let inv_sum: f64 = c.iter().map(|ci| 1.0 / ci).sum();
                let top = c.iter().map(|ci| ci.recip().sqrt()).fold(0.0, f64::max);
                let mut spectrum = vec![0.0; *n];
                spectrum[0] = top;
                ExpectedInvariants {
                    flat: true,
                    parallel: true,
                    pick: if *n > 1 { inv_sum / (nf * (nf - 1.0)) } else { f64::NAN },
                    scalar: 0.0,
                    tchebychev_sq: inv_sum / (nf * nf),
                    case: CaseLabel(1),
                    spectrum,
                }
            }
            Self::LogCone { c } => ExpectedInvariants {
                flat: false,
                parallel: true,
                pick: 7.0 * c * c / 6.0,
                scalar: -2.0 * c * c,
                tchebychev_sq: c * c,
                case: CaseLabel(2),
                spectrum: vec![std::f64::consts::SQRT_2 * c, c / std::f64::consts::SQRT_2, 0.0],
            },
        }
    }

    /// `Abar_iii` in a flat orthonormal frame, decreasing; `Q` only.
    pub fn flat_diagonal(&self) -> Option<Vec<f64>> {
        match self {
            Self::Paraboloid { n } => Some(vec![0.0; *n]),
            Self::Q { c, n } => {
                let mut d: Vec<f64> = c.iter().map(|ci| ci.recip().sqrt()).collect();
                d.sort_by(|a, b| b.total_cmp(a));
                d.resize(*n, 0.0);
                Some(d)
            }
            Self::LogCone { .. } => None,
        }
    }

    /// A fixed selection covering every family: paraboloids, `Q` of each
    /// rank in dimensions 2 and 3, and three log-cones.
    pub fn standard() -> Vec<Self> {
        let ids = [
            "paraboloid:2",
            "paraboloid:3",
            "q:1:2",
            "q:1,1:2",
            "q:2:3",
            "q:2,3:3",
            "q:0.5,1,4:3",
            "logcone:0.5",
            "logcone:1",
            "logcone:2",
        ];
        ids.iter()
            .map(|id| Self::parse_id(id).ok().flatten().expect("valid id"))
            .collect()
    }

    /// `count` domain points from a fixed-seed generator, kept
    /// [`SAMPLE_MARGIN`] away from the domain boundary.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| match self {
                Self::Paraboloid { n } => (0..*n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
                Self::Q { c, n } => (0..*n)
                    .map(|i| {
                        if i < c.len() {
                            rng.gen_range(0.3..3.0)
                        } else {
                            rng.gen_range(-2.0..2.0)
                        }
                    })
                    .collect(),
                Self::LogCone { .. } => {
                    let x2: f64 = rng.gen_range(-2.0..2.0);
                    let x3: f64 = rng.gen_range(-2.0..2.0);
                    let x1 = x2.hypot(x3) + SAMPLE_MARGIN + rng.gen_range(0.0..2.5);
                    vec![x1, x2, x3]
                }
            })
            .collect()
    }
}

impl fmt::Display for CatalogSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Paraboloid { n } => write!(f, "paraboloid:{n}"),
            Self::Q { c, n } => {
                let cs: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                write!(f, "q:{}:{n}", cs.join(","))
            }
            Self::LogCone { c } => write!(f, "logcone:{c}"),
        }
    }
}

/// Position on the log-cone hypersurface in hyperbolic-product coordinates:
/// `(cosh(c y2) e^{c y1}, cos(c y3) sinh(c y2) e^{c y1}, sin(c y3) sinh(c y2) e^{c y1}, -y1/c)`.
pub fn logcone_param(c: f64, y: [f64; 3]) -> Result<[f64; 4]> {
    check_param(c, y)?;
    let [y1, y2, y3] = y;
    let e = (c * y1).exp();
    let (ch, sh) = ((c * y2).cosh(), (c * y2).sinh());
    let (co, si) = ((c * y3).cos(), (c * y3).sin());
    Ok([ch * e, co * sh * e, si * sh * e, -y1 / c])
}

/// `d x / d y` of [`logcone_param`], a 4x3 matrix.
pub fn logcone_param_jacobian(c: f64, y: [f64; 3]) -> Result<SMatrix<f64, 4, 3>> {
    check_param(c, y)?;
    let [y1, y2, y3] = y;
    let e = (c * y1).exp();
    let (ch, sh) = ((c * y2).cosh(), (c * y2).sinh());
    let (co, si) = ((c * y3).cos(), (c * y3).sin());
    Ok(SMatrix::<f64, 4, 3>::from_row_slice(&[
        c * ch * e,
        c * sh * e,
        0.0,
        c * co * sh * e,
        c * co * ch * e,
        -c * si * sh * e,
        c * si * sh * e,
        c * si * ch * e,
        c * co * sh * e,
        -1.0 / c,
        0.0,
        0.0,
    ]))
}

/// `|x_4 + ln(x_1^2 - x_2^2 - x_3^2) / (2c^2)|` at the parametrized point.
pub fn logcone_graph_residual(c: f64, y: [f64; 3]) -> Result<f64> {
    let x = logcone_param(c, y)?;
    // x1^2 - x2^2 - x3^2 = e^{2 c y1} up to rounding; use the factored form
    // (x1 - r)(x1 + r) to avoid cancellation.
    let r = x[1].hypot(x[2]);
    let q = (x[0] - r) * (x[0] + r);
    Ok((x[3] + q.ln() / (2.0 * c * c)).abs())
}

/// Calabi metric of `LogCone(c)` pulled back to `y` coordinates.
pub fn logcone_pullback_metric(c: f64, y: [f64; 3]) -> Result<DMatrix<f64>> {
    let x = logcone_param(c, y)?;
    let jac = logcone_param_jacobian(c, y)?;
    let f = CatalogSurface::log_cone(c)?.as_function();
    let hess = eval_jet(&f, &x[..3], 2)?.hessian();
    let j3 = DMatrix::from_fn(3, 3, |i, k| jac[(i, k)]);
    Ok(j3.transpose() * hess * j3)
}

fn check_param(c: f64, y: [f64; 3]) -> Result<()> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
    }
    if !(y[1] > 0.0) {
        return Err(Error::InvalidParameter(format!("y2 must be positive, got {}", y[1])));
    }
    Ok(())
}
