//! Strictly convex functions and their exact jets.

use std::fmt;

use crate::affine::AffineMap;
use crate::catalog::CatalogSurface;
use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expr};
use crate::jet::{Jet4, MonomialBasis, Taylor, MAX_DIM, MAX_ORDER};

/// A function `f: R^n -> R` whose graph is the hypersurface under study.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    Expr {
        expr: Expr,
        dim: usize,
    },
    Catalog(CatalogSurface),
    /// `f~(L x + b') = f(x) + s.x + b_{n+1}`, the graph of `inner` moved by `map`.
    Transformed {
        inner: Box<FunctionSpec>,
        map: AffineMap,
    },
}

impl FunctionSpec {
    pub fn from_expr(expr: Expr, dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        let needed = expr.min_dim();
        if needed > dim {
            return Err(Error::VariableOutOfRange { index: needed, dim });
        }
        Ok(Self::Expr { expr, dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Expr { dim, .. } => *dim,
            Self::Catalog(s) => s.dim(),
            Self::Transformed { inner, .. } => inner.dim(),
        }
    }

    /// Evaluates with Taylor-polynomial inputs, one per coordinate.
    pub fn eval_taylor(&self, inputs: &[Taylor]) -> Result<Taylor> {
        match self {
            Self::Expr { expr, .. } => expr.eval_taylor(inputs),
            Self::Catalog(s) => s.expr().eval_taylor(inputs),
            Self::Transformed { inner, map } => {
                let pre = map.pull_back_inputs(inputs);
                let value = inner.eval_taylor(&pre)?;
                Ok(map.add_height_terms(value, &pre))
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(eval_jet(self, x, 0)?.value())
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Expr { expr, .. } => write!(f, "{expr}"),
            Self::Catalog(s) => write!(f, "{s}"),
            Self::Transformed { inner, .. } => write!(f, "affine image of [{inner}]"),
        }
    }
}

/// Parses either a catalog id (`paraboloid:n`, `q:c1,...,cr:n`, `logcone:c`)
/// or an expression in `x1..xn`.
pub fn parse(text: &str) -> Result<FunctionSpec> {
    if let Some(surface) = CatalogSurface::parse_id(text)? {
        return Ok(FunctionSpec::Catalog(surface));
    }
    let (expr, dim) = parse_expr(text)?;
    FunctionSpec::from_expr(expr, dim)
}

/// Parses an expression with an explicit dimension at least as large as the
/// largest variable index.
pub fn parse_with_dim(text: &str, dim: usize) -> Result<FunctionSpec> {
    let (expr, _) = parse_expr(text)?;
    FunctionSpec::from_expr(expr, dim)
}

/// All partials of `f` up to `order` at `x`.
pub fn eval_jet(f: &FunctionSpec, x: &[f64], order: usize) -> Result<Jet4> {
    if order > MAX_ORDER {
        return Err(Error::JetOrder {
            got: order,
            required: MAX_ORDER,
        });
    }
    let dim = f.dim();
    if x.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    let basis = MonomialBasis::get(dim)?;
    let inputs: Vec<Taylor> = x
        .iter()
        .enumerate()
        .map(|(i, &xi)| Taylor::variable(basis, order, i, xi))
        .collect();
    let t = f.eval_taylor(&inputs)?;
    Ok(Jet4::from_taylor(x.to_vec(), &t))
}
