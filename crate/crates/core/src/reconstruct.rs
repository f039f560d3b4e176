//! Rebuilding flat hypersurfaces with parallel cubic form from constant
//! diagonal frame data.
//!
//! In flat coordinates `u` with constant cubic form `Abar_iii` (and all other
//! components zero) the moving frame obeys, along the ray `u(t) = t v`,
//!
//! ```text
//! d e_i / dt = Abar_iii v^i e_i + v^i Y,      dx/dt = sum_i v^i e_i,
//! ```
//!
//! with `Y = (0, .., 0, 1)`. [`integrate_frames`] solves this with a classical
//! fourth-order Runge-Kutta scheme; [`closed_form`] evaluates the explicit
//! solution at `t = 1`.

use nalgebra::{DMatrix, DVector};

use crate::affine::AffineMap;
use crate::catalog::CatalogSurface;
use crate::commute::{simultaneous_diagonalize, SymFamily};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::function::FunctionSpec;
use crate::jet::MAX_DIM;
use crate::tensor::Tensor;

/// Largest accepted Richardson error estimate of the integrator.
pub const MAX_STEP_ERROR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct FlatParallelData {
    n: usize,
    diag: Vec<f64>,
    v: Vec<f64>,
}

impl FlatParallelData {
    /// `diag` holds the `r` positive values `Abar_11 >= .. >= Abar_rr > 0`; the
    /// remaining `n - r` diagonal entries are zero. `v` is the ray target.
    pub fn new(n: usize, diag: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::UnsupportedDimension(n));
        }
        if diag.len() > n {
            return Err(Error::InvalidParameter(format!(
                "{} diagonal values for dimension {n}",
                diag.len()
            )));
        }
        if diag.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::InvalidParameter("diagonal values must be positive".into()));
        }
        if diag.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "diagonal values must be in decreasing order".into(),
            ));
        }
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        if v.iter().any(|vi| !(vi.is_finite() && *vi > 0.0)) {
            return Err(Error::InvalidParameter("ray coordinates must be positive".into()));
        }
        Ok(Self { n, diag, v })
    }

    /// Unit ray `v = (1, .., 1)`.
    pub fn unit_ray(n: usize, diag: Vec<f64>) -> Result<Self> {
        Self::new(n, diag, vec![1.0; n])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn ray(&self) -> &[f64] {
        &self.v
    }

    pub fn with_ray(&self, v: Vec<f64>) -> Result<Self> {
        Self::new(self.n, self.diag.clone(), v)
    }

    /// `Abar_iii` for every `i`, zero-padded.
    pub fn full_diag(&self) -> Vec<f64> {
        let mut d = self.diag.clone();
        d.resize(self.n, 0.0);
        d
    }

    /// Reduces a constant cubic form in flat orthonormal coordinates to the
    /// diagonal normal form by simultaneously diagonalizing its slices
    /// `A^(k)_ij = A_ijk`.
    pub fn from_constant_cubic(cubic: &Tensor<3>, v: Vec<f64>) -> Result<Self> {
        let n = cubic.dim();
        let slices: Vec<DMatrix<f64>> = (0..n)
            .map(|k| DMatrix::from_fn(n, n, |i, j| cubic[[i, j, k]]))
            .collect();
        let fam = SymFamily::new(slices)?;
        let diag = simultaneous_diagonalize(&fam)?;
        // Rows of P are the new frame; Abar_iii = A(e_i, e_i, e_i).
        let frame = diag.p.transpose();
        let abar = cubic.transform(&frame);
        let scale = cubic.max_abs().max(f64::MIN_POSITIVE);
        let mut values: Vec<f64> = (0..n)
            .map(|i| abar[[i, i, i]].abs())
            .filter(|a| *a > 1e-9 * scale)
            .collect();
        values.sort_by(|a, b| b.total_cmp(a));
        Self::new(n, values, v)
    }
}

/// Endpoint of the integrated frame system and the sampled path.
#[derive(Debug, Clone)]
pub struct FrameIntegration {
    /// `x(1)` in `R^{n+1}`.
    pub position: Vec<f64>,
    /// `e_i(1)` for each `i`.
    pub frames: Vec<Vec<f64>>,
    /// `x(t_k)` at every step boundary, `t_0 = 0` included.
    pub path: Vec<Vec<f64>>,
    /// Richardson estimate `|x_N - x_{2N}| / 15`.
    pub error_estimate: f64,
}

/// State: `n` frame vectors followed by the position, each in `R^{n+1}`.
fn rk4(data: &FlatParallelData, steps: usize, keep_path: bool) -> (Vec<DVector<f64>>, Vec<Vec<f64>>) {
    let n = data.n;
    let a = data.full_diag();
    let v = &data.v;
    let rhs = |s: &[DVector<f64>]| -> Vec<DVector<f64>> {
        let mut out = Vec::with_capacity(n + 1);
        let mut dx = DVector::zeros(n + 1);
        for i in 0..n {
            let mut de = &s[i] * (a[i] * v[i]);
            de[n] += v[i];
            dx += &s[i] * v[i];
            out.push(de);
        }
        out.push(dx);
        out
    };
    let axpy = |s: &[DVector<f64>], k: &[DVector<f64>], h: f64| -> Vec<DVector<f64>> {
        s.iter().zip(k).map(|(a, b)| a + b * h).collect()
    };

    let mut state: Vec<DVector<f64>> = (0..n)
        .map(|i| DVector::from_fn(n + 1, |j, _| if i == j { 1.0 } else { 0.0 }))
        .collect();
    state.push(DVector::zeros(n + 1));
    let h = 1.0 / steps as f64;
    let mut path = Vec::new();
    if keep_path {
        path.reserve(steps + 1);
        path.push(state[n].iter().copied().collect());
    }
    for _ in 0..steps {
        let k1 = rhs(&state);
        let k2 = rhs(&axpy(&state, &k1, h / 2.0));
        let k3 = rhs(&axpy(&state, &k2, h / 2.0));
        let k4 = rhs(&axpy(&state, &k3, h));
        for (i, s) in state.iter_mut().enumerate() {
            *s += (&k1[i] + &k2[i] * 2.0 + &k3[i] * 2.0 + &k4[i]) * (h / 6.0);
        }
        if keep_path {
            path.push(state[n].iter().copied().collect());
        }
    }
    (state, path)
}

pub fn integrate_frames(data: &FlatParallelData, steps: usize) -> Result<FrameIntegration> {
    if steps == 0 {
        return Err(Error::TooFewSteps {
            steps,
            estimate: f64::INFINITY,
        });
    }
    let (state, path) = rk4(data, steps, true);
    let (fine, _) = rk4(data, 2 * steps, false);
    let n = data.n;
    let estimate = (&state[n] - &fine[n]).amax() / 15.0;
    if !(estimate <= MAX_STEP_ERROR) {
        return Err(Error::TooFewSteps { steps, estimate });
    }
    Ok(FrameIntegration {
        position: state[n].iter().copied().collect(),
        frames: state[..n].iter().map(|e| e.iter().copied().collect()).collect(),
        path,
        error_estimate: estimate,
    })
}

/// Exact `x(1)`:
/// `x_i = (e^{a_i v^i} - 1)/a_i` for `a_i > 0`, `x_j = v^j` otherwise, and
/// height `sum_i [(e^{a_i v^i} - 1)/a_i^2 - v^i/a_i] + sum_j (v^j)^2 / 2`.
pub fn closed_form(data: &FlatParallelData) -> Vec<f64> {
    let n = data.n;
    let mut x = vec![0.0; n + 1];
    for (i, &vi) in data.v.iter().enumerate() {
        match data.diag.get(i) {
            Some(&a) => {
                let em1 = (a * vi).exp_m1();
                x[i] = em1 / a;
                x[n] += em1 / (a * a) - vi / a;
            }
            None => {
                x[i] = vi;
                x[n] += 0.5 * vi * vi;
            }
        }
    }
    x
}

/// Recovers the ray coordinates from the base point `x(1)`; inverse of the
/// first `n` components of [`closed_form`].
pub fn ray_from_base_point(data: &FlatParallelData, x: &[f64]) -> Vec<f64> {
    (0..data.n)
        .map(|i| match data.diag.get(i) {
            Some(&a) => (a * x[i]).ln_1p() / a,
            None => x[i],
        })
        .collect()
}

/// The canonical function affine equivalent to the reconstructed graph:
/// `Q(c_1..c_r; n)` with `c_i = 1 / Abar_iii^2`, or the paraboloid for `r = 0`.
pub fn recovered_surface(data: &FlatParallelData) -> Result<CatalogSurface> {
    if data.diag.is_empty() {
        return CatalogSurface::paraboloid(data.n);
    }
    CatalogSurface::q(data.diag.iter().map(|a| 1.0 / (a * a)).collect(), data.n)
}

pub fn recovered_function(data: &FlatParallelData) -> Result<FunctionSpec> {
    Ok(FunctionSpec::Catalog(recovered_surface(data)?))
}

/// The graph traced by the rays before normalization:
/// `g(x) = sum_i [x_i/a_i - ln(a_i x_i + 1)/a_i^2] + sum_j x_j^2 / 2`.
pub fn traced_function(data: &FlatParallelData) -> FunctionSpec {
    let terms = (0..data.n).map(|i| match data.diag.get(i) {
        Some(&a) => {
            let xi = Expr::var(i);
            Expr::constant(1.0 / a) * xi.clone()
                - Expr::constant(1.0 / (a * a)) * (Expr::constant(a) * xi + Expr::constant(1.0)).ln()
        }
        None => Expr::constant(0.5) * Expr::var(i).powi(2),
    });
    FunctionSpec::Expr {
        expr: Expr::sum(terms),
        dim: data.n,
    }
}

/// Element of the affine group carrying the traced graph onto the graph of
/// [`recovered_function`]: base `y_i = a_i x_i + 1`, height shear `-x_i / a_i`.
pub fn normalizing_map(data: &FlatParallelData) -> AffineMap {
    let n = data.n;
    let full = data.full_diag();
    let linear = DMatrix::from_fn(n, n, |i, j| {
        if i != j {
            0.0
        } else if full[i] > 0.0 {
            full[i]
        } else {
            1.0
        }
    });
    let shear = DVector::from_fn(n, |i, _| if full[i] > 0.0 { -1.0 / full[i] } else { 0.0 });
    let translate = DVector::from_fn(n + 1, |i, _| if i < n && full[i] > 0.0 { 1.0 } else { 0.0 });
    AffineMap::new(linear, shear, translate).expect("diagonal entries are nonzero")
}

/// Closed-form solution of the hyperbolic frame system of the log-cone for
/// cross-checking [`crate::catalog::logcone_param`]: integrates the
/// second-order system along the straight segment `y(t) = y0 + t (y1 - y0)`
/// starting from position and first derivatives at `y0`.
pub mod hyperbolic {
    use nalgebra::SVector;

    use crate::catalog::{logcone_param, logcone_param_jacobian};
    use crate::error::{Error, Result};

    type V4 = SVector<f64, 4>;
    const Y: V4 = V4::new(0.0, 0.0, 0.0, 1.0);

    /// Second derivatives `d^2 x / dy_a dy_b` in terms of the first ones.
    fn hessian(c: f64, y2: f64, d: &[V4; 3]) -> [[V4; 3]; 3] {
        let (sh, ch) = ((c * y2).sinh(), (c * y2).cosh());
        let x11 = d[0] * c + Y;
        let x12 = d[1] * c;
        let x13 = d[2] * c;
        let x22 = d[0] * c + Y;
        let x23 = d[2] * (c * ch / sh);
        let x33 = d[0] * (c * sh * sh) - d[1] * (c * sh * ch) + Y * (sh * sh);
        [[x11, x12, x13], [x12, x22, x23], [x13, x23, x33]]
    }

    /// Position at `y1` obtained by integrating the frame system from `y0`.
    pub fn integrate(c: f64, y0: [f64; 3], y1: [f64; 3], steps: usize) -> Result<[f64; 4]> {
        if steps == 0 {
            return Err(Error::TooFewSteps {
                steps,
                estimate: f64::INFINITY,
            });
        }
        if !(y0[1] > 0.0 && y1[1] > 0.0) {
            return Err(Error::InvalidParameter("segment must stay in y2 > 0".into()));
        }
        let x0 = V4::from(logcone_param(c, y0)?);
        let jac = logcone_param_jacobian(c, y0)?;
        let d0 = [
            jac.column(0).into_owned(),
            jac.column(1).into_owned(),
            jac.column(2).into_owned(),
        ];
        let dir = [y1[0] - y0[0], y1[1] - y0[1], y1[2] - y0[2]];

        // State: x, dx/dy_1, dx/dy_2, dx/dy_3.
        let rhs = |t: f64, s: &[V4; 4]| -> [V4; 4] {
            let y2 = y0[1] + t * dir[1];
            let d = [s[1], s[2], s[3]];
            let h = hessian(c, y2, &d);
            let mut out = [V4::zeros(); 4];
            for a in 0..3 {
                out[0] += d[a] * dir[a];
                for b in 0..3 {
                    out[1 + a] += h[a][b] * dir[b];
                }
            }
            out
        };
        let add = |s: &[V4; 4], k: &[V4; 4], h: f64| -> [V4; 4] {
            [s[0] + k[0] * h, s[1] + k[1] * h, s[2] + k[2] * h, s[3] + k[3] * h]
        };
        let mut s = [x0, d0[0], d0[1], d0[2]];
        let h = 1.0 / steps as f64;
        for k in 0..steps {
            let t = k as f64 * h;
            let k1 = rhs(t, &s);
            let k2 = rhs(t + h / 2.0, &add(&s, &k1, h / 2.0));
            let k3 = rhs(t + h / 2.0, &add(&s, &k2, h / 2.0));
            let k4 = rhs(t + h, &add(&s, &k3, h));
            for i in 0..4 {
                s[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
            }
        }
        Ok([s[0][0], s[0][1], s[0][2], s[0][3]])
    }

}
