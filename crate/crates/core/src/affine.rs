//! Affine maps of `R^{n+1}` fixing the vertical direction `(0, .., 0, 1)`.
//!
//! Such a map has block form `X -> [[L, 0], [s^T, 1]] X + b` and acts on a graph
//! `(x, f(x))` by `(L x + b', f(x) + s.x + b_{n+1})`, so it sends `f` to the
//! function `f~(y) = f(L^{-1}(y - b')) + s.L^{-1}(y - b') + b_{n+1}`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::FunctionSpec;
use crate::geometry::TensorBundle;
use crate::jet::Taylor;
use crate::normal_form::normal_form;

#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    linear: DMatrix<f64>,
    linear_inv: DMatrix<f64>,
    shear: DVector<f64>,
    translate: DVector<f64>,
}

/// Wire form: `{"linear": [[..]], "shear": [..], "translate": [..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMapJson {
    pub linear: Vec<Vec<f64>>,
    pub shear: Vec<f64>,
    pub translate: Vec<f64>,
}

impl AffineMap {
    /// `linear` is `n x n`, `shear` has `n` entries, `translate` has `n + 1`.
    pub fn new(linear: DMatrix<f64>, shear: DVector<f64>, translate: DVector<f64>) -> Result<Self> {
        let n = linear.nrows();
        if n == 0 || linear.ncols() != n {
            return Err(Error::InvalidParameter("linear block must be square".into()));
        }
        if shear.len() != n || translate.len() != n + 1 {
            return Err(Error::InvalidParameter(format!(
                "shear needs {n} entries and translate {} (got {} and {})",
                n + 1,
                shear.len(),
                translate.len()
            )));
        }
        let scale = linear.amax();
        let det = linear.determinant();
        if !(det.abs() > 1e-12 * scale.powi(n as i32)) {
            return Err(Error::SingularMap);
        }
        let linear_inv = linear.clone().try_inverse().ok_or(Error::SingularMap)?;
        Ok(Self {
            linear,
            linear_inv,
            shear,
            translate,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            linear: DMatrix::identity(n, n),
            linear_inv: DMatrix::identity(n, n),
            shear: DVector::zeros(n),
            translate: DVector::zeros(n + 1),
        }
    }

    pub fn dim(&self) -> usize {
        self.linear.nrows()
    }

    pub fn linear(&self) -> &DMatrix<f64> {
        &self.linear
    }

    pub fn shear(&self) -> &DVector<f64> {
        &self.shear
    }

    pub fn translate(&self) -> &DVector<f64> {
        &self.translate
    }

    /// The `(n+1) x (n+1)` linear part; its last column is `(0, .., 0, 1)`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n + 1, n + 1);
        m.view_mut((0, 0), (n, n)).copy_from(&self.linear);
        for j in 0..n {
            m[(n, j)] = self.shear[j];
        }
        m[(n, n)] = 1.0;
        m
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.matrix() * x + &self.translate
    }

    /// `x -> L x + b'`.
    pub fn base_point(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let y = &self.linear * DVector::from_column_slice(x) + self.translate.rows(0, n);
        y.iter().copied().collect()
    }

    /// `self o other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        let n = self.dim();
        let m = self.matrix() * other.matrix();
        let translate = self.matrix() * &other.translate + &self.translate;
        AffineMap {
            linear: m.view((0, 0), (n, n)).into_owned(),
            linear_inv: &other.linear_inv * &self.linear_inv,
            shear: m.row(n).columns(0, n).transpose(),
            translate,
        }
    }

    pub fn inverse(&self) -> AffineMap {
        let n = self.dim();
        let mi = self
            .matrix()
            .try_inverse()
            .expect("block-triangular with invertible diagonal");
        let translate = -(&mi * &self.translate);
        AffineMap {
            linear: self.linear_inv.clone(),
            linear_inv: self.linear.clone(),
            shear: mi.row(n).columns(0, n).transpose(),
            translate,
        }
    }

    /// Inputs of the original function, `L^{-1}(y - b')`, as Taylor polynomials.
    pub(crate) fn pull_back_inputs(&self, y: &[Taylor]) -> Vec<Taylor> {
        let n = self.dim();
        (0..n)
            .map(|a| {
                let mut acc = Taylor::constant(y[0].basis(), y[0].order(), 0.0);
                for (i, yi) in y.iter().enumerate() {
                    let m = self.linear_inv[(a, i)];
                    if m != 0.0 {
                        acc = acc.add(&yi.add_scalar(-self.translate[i]).scale(m));
                    }
                }
                acc
            })
            .collect()
    }

    /// `value + s.x + b_{n+1}` for pulled-back inputs `x`.
    pub(crate) fn add_height_terms(&self, value: Taylor, x: &[Taylor]) -> Taylor {
        let n = self.dim();
        let mut out = value.add_scalar(self.translate[n]);
        for (j, xj) in x.iter().enumerate() {
            if self.shear[j] != 0.0 {
                out = out.add(&xj.scale(self.shear[j]));
            }
        }
        out
    }

    pub fn to_json(&self) -> AffineMapJson {
        AffineMapJson {
            linear: self.linear.row_iter().map(|r| r.iter().copied().collect()).collect(),
            shear: self.shear.iter().copied().collect(),
            translate: self.translate.iter().copied().collect(),
        }
    }

    pub fn from_json(j: &AffineMapJson) -> Result<Self> {
        let n = j.linear.len();
        if j.linear.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("linear block must be square".into()));
        }
        let linear = DMatrix::from_fn(n, n, |i, k| j.linear[i][k]);
        Self::new(
            linear,
            DVector::from_column_slice(&j.shear),
            DVector::from_column_slice(&j.translate),
        )
    }
}

impl Serialize for AffineMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for AffineMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = AffineMapJson::deserialize(d)?;
        AffineMap::from_json(&j).map_err(serde::de::Error::custom)
    }
}

/// Image of `f` under `phi` and the map between base points.
#[allow(clippy::type_complexity)]
pub fn act_on_function(phi: &AffineMap, f: &FunctionSpec) -> Result<(FunctionSpec, impl Fn(&[f64]) -> Vec<f64>)> {
    if phi.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: phi.dim(),
        });
    }
    let image = FunctionSpec::Transformed {
        inner: Box::new(f.clone()),
        map: phi.clone(),
    };
    let map = phi.clone();
    Ok((image, move |x: &[f64]| map.base_point(x)))
}

/// Largest deviations between invariants of `f` at `x` and of `phi(f)` at
/// `phi_base(x)`, over a set of sample points.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub points: usize,
    /// `|L^T G~ L - G|`, relative to `1 + |G|`.
    pub metric: f64,
    /// Same for the cubic form with three factors of `L`.
    pub cubic: f64,
    pub pick: f64,
    pub scalar: f64,
    pub tchebychev_sq: f64,
    pub spectrum: f64,
    pub case_mismatches: usize,
}

impl InvarianceReport {
    pub fn max_scalar_deviation(&self) -> f64 {
        self.pick.max(self.scalar).max(self.tchebychev_sq).max(self.spectrum)
    }
}

pub fn check_equivalence_invariants(
    phi: &AffineMap,
    f: &FunctionSpec,
    points: &[Vec<f64>],
) -> Result<InvarianceReport> {
    let (image, base) = act_on_function(phi, f)?;
    let l = phi.linear();
    let mut rep = InvarianceReport {
        points: points.len(),
        ..Default::default()
    };
    for x in points {
        let src = TensorBundle::compute(f, x)?;
        let dst = TensorBundle::compute(&image, &base(x))?;

        let g_back = l.transpose() * &dst.metric.g * l;
        rep.metric = rep
            .metric
            .max((g_back - &src.metric.g).amax() / (1.0 + src.metric.g.amax()));
        let a_back = dst.cubic.a.transform(l);
        rep.cubic = rep
            .cubic
            .max(a_back.max_abs_diff(&src.cubic.a) / (1.0 + src.cubic.a.max_abs()));

        let (cs, cd) = (&src.curvature, &dst.curvature);
        rep.pick = rep.pick.max((cs.pick - cd.pick).abs());
        rep.scalar = rep.scalar.max((cs.scalar - cd.scalar).abs());
        rep.tchebychev_sq = rep.tchebychev_sq.max((cs.t_norm_sq - cd.t_norm_sq).abs());

        let (ns, nd) = (normal_form(&src)?, normal_form(&dst)?);
        let dev = ns
            .spectrum
            .iter()
            .zip(&nd.spectrum)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        rep.spectrum = rep.spectrum.max(dev);
        if ns.case != nd.case {
            rep.case_mismatches += 1;
        }
    }
    Ok(rep)
}
