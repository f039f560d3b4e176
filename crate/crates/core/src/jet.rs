//! Truncated multivariate Taylor arithmetic and the order-4 jet of a function.
//!
//! A [`Taylor`] is a polynomial in the perturbation `h = x - x0` truncated at
//! total degree `order <= 4`. Arithmetic on these polynomials carries exact
//! partial derivatives through an expression tree: the coefficient of the
//! monomial `h^alpha` equals `d^alpha f / alpha!`.

use std::collections::HashMap;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const MAX_ORDER: usize = 4;
pub const MAX_DIM: usize = 8;

type Exponent = [u8; MAX_DIM];

/// Monomial layout for polynomials of total degree `<= MAX_ORDER` in `dim`
/// variables, graded by degree, plus a precomputed product table.
#[derive(Debug)]
pub struct MonomialBasis {
    dim: usize,
    exponents: Vec<Exponent>,
    degrees: Vec<usize>,
    lookup: HashMap<Exponent, usize>,
    /// `(a, b, a*b)` for every pair whose product stays within degree 4.
    products: Vec<(u16, u16, u16)>,
    /// `degree_start[d]` is the index of the first monomial of degree `d`.
    degree_start: [usize; MAX_ORDER + 2],
}

impl MonomialBasis {
    fn build(dim: usize) -> Self {
        let mut exponents = Vec::new();
        let mut degree_start = [0; MAX_ORDER + 2];
        for degree in 0..=MAX_ORDER {
            degree_start[degree] = exponents.len();
            let mut cur = [0u8; MAX_DIM];
            push_compositions(dim, degree, 0, &mut cur, &mut exponents);
        }
        degree_start[MAX_ORDER + 1] = exponents.len();
        let degrees: Vec<usize> = exponents.iter().map(|e| e.iter().map(|&v| v as usize).sum()).collect();
        let lookup: HashMap<Exponent, usize> = exponents.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let mut products = Vec::new();
        for (a, ea) in exponents.iter().enumerate() {
            for (b, eb) in exponents.iter().enumerate() {
                if degrees[a] + degrees[b] > MAX_ORDER {
                    continue;
                }
                let mut sum = [0u8; MAX_DIM];
                for k in 0..MAX_DIM {
                    sum[k] = ea[k] + eb[k];
                }
                products.push((a as u16, b as u16, lookup[&sum] as u16));
            }
        }
        // Sorting by output degree lets truncated products stop early.
        products.sort_by_key(|&(_, _, c)| degrees[c as usize]);
        Self {
            dim,
            exponents,
            degrees,
            lookup,
            products,
            degree_start,
        }
    }

    /// Shared basis for `dim` variables.
    pub fn get(dim: usize) -> Result<&'static MonomialBasis> {
        static BASES: OnceLock<Vec<MonomialBasis>> = OnceLock::new();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        let bases = BASES.get_or_init(|| (1..=MAX_DIM).map(MonomialBasis::build).collect());
        Ok(&bases[dim - 1])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of monomials up to and including degree `order`.
    pub fn len_to(&self, order: usize) -> usize {
        self.degree_start[order + 1]
    }

    /// Index of the monomial for a multi-index of variables (any order).
    pub fn index_of(&self, vars: &[usize]) -> usize {
        let mut e = [0u8; MAX_DIM];
        for &v in vars {
            e[v] += 1;
        }
        self.lookup[&e]
    }

    /// `alpha!` for the monomial at `idx`.
    fn factorial_weight(&self, idx: usize) -> f64 {
        self.exponents[idx][..self.dim]
            .iter()
            .map(|&k| (1..=k as u32).product::<u32>() as f64)
            .product()
    }
}

fn push_compositions(dim: usize, remaining: usize, slot: usize, cur: &mut Exponent, out: &mut Vec<Exponent>) {
    if slot + 1 == dim {
        cur[slot] = remaining as u8;
        out.push(*cur);
        cur[slot] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        cur[slot] = k as u8;
        push_compositions(dim, remaining - k, slot + 1, cur, out);
    }
    cur[slot] = 0;
}

/// Truncated Taylor polynomial in the perturbation of `dim` variables.
#[derive(Debug, Clone)]
pub struct Taylor {
    basis: &'static MonomialBasis,
    order: usize,
    coeffs: Vec<f64>,
}

impl Taylor {
    pub fn constant(basis: &'static MonomialBasis, order: usize, value: f64) -> Self {
        let mut coeffs = vec![0.0; basis.len_to(order)];
        coeffs[0] = value;
        Self { basis, order, coeffs }
    }

    /// The independent variable `x_var` expanded at `value`.
    pub fn variable(basis: &'static MonomialBasis, order: usize, var: usize, value: f64) -> Self {
        let mut t = Self::constant(basis, order, value);
        if order >= 1 {
            t.coeffs[basis.index_of(&[var])] = 1.0;
        }
        t
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn basis(&self) -> &'static MonomialBasis {
        self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    pub fn add_scalar(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().zip(&other.coeffs).for_each(|(a, b)| *a += b);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().zip(&other.coeffs).for_each(|(a, b)| *a -= b);
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let limit = self.order;
        let mut coeffs = vec![0.0; self.coeffs.len()];
        for &(a, b, c) in &self.basis.products {
            let c = c as usize;
            if self.basis.degrees[c] > limit {
                break;
            }
            coeffs[c] += self.coeffs[a as usize] * other.coeffs[b as usize];
        }
        Self {
            basis: self.basis,
            order: self.order,
            coeffs,
        }
    }

    /// Composes a univariate function with this polynomial, given the
    /// function's derivatives `g^(k)(value)` for `k = 0..=order`.
    pub fn compose(&self, derivs: &[f64]) -> Self {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut out = Self::constant(self.basis, self.order, derivs[0]);
        let mut power = Self::constant(self.basis, self.order, 1.0);
        let mut factorial = 1.0;
        for (k, d) in derivs.iter().enumerate().take(self.order + 1).skip(1) {
            power = power.mul(&h);
            factorial *= k as f64;
            out = out.add(&power.scale(d / factorial));
        }
        out
    }

    /// `1 / self`; caller is responsible for a nonzero value.
    pub fn recip(&self) -> Self {
        let u = self.value();
        let mut derivs = [0.0; MAX_ORDER + 1];
        let mut term = 1.0 / u;
        for (k, d) in derivs.iter_mut().enumerate() {
            *d = term;
            term *= -((k + 1) as f64) / u;
        }
        self.compose(&derivs)
    }

    /// Natural log; caller is responsible for a positive value.
    pub fn ln(&self) -> Self {
        let u = self.value();
        let mut derivs = [0.0; MAX_ORDER + 1];
        derivs[0] = u.ln();
        let mut term = 1.0 / u;
        for (k, d) in derivs.iter_mut().enumerate().skip(1) {
            *d = term;
            term *= -(k as f64) / u;
        }
        self.compose(&derivs)
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&[e; MAX_ORDER + 1])
    }

    /// Integer power by repeated squaring; negative exponents go through `recip`.
    pub fn powi(&self, exp: i32) -> Self {
        let base = if exp < 0 { self.recip() } else { self.clone() };
        let mut k = exp.unsigned_abs();
        let mut acc = Self::constant(self.basis, self.order, 1.0);
        let mut sq = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&sq);
            }
            k >>= 1;
            if k > 0 {
                sq = sq.mul(&sq);
            }
        }
        acc
    }
}

/// Value and all partial derivatives of a function up to order 4 at a point.
///
/// Partials are stored once per sorted multi-index; any permutation of the
/// indices reads the same slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet4 {
    dim: usize,
    order: usize,
    point: Vec<f64>,
    partials: Vec<f64>,
}

impl Jet4 {
    /// Converts Taylor coefficients into partial derivatives.
    pub fn from_taylor(point: Vec<f64>, t: &Taylor) -> Self {
        let basis = t.basis();
        let partials = t
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| c * basis.factorial_weight(i))
            .collect();
        Self {
            dim: basis.dim(),
            order: t.order(),
            point,
            partials,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn value(&self) -> f64 {
        self.partials[0]
    }

    /// `d^k f / dx_{i1} ... dx_{ik}` with zero-based variable indices.
    ///
    /// Panics if `indices.len()` exceeds the jet order.
    pub fn partial(&self, indices: &[usize]) -> f64 {
        assert!(
            indices.len() <= self.order,
            "jet of order {} has no order-{} partials",
            self.order,
            indices.len()
        );
        let basis = MonomialBasis::get(self.dim).expect("dimension validated on construction");
        self.partials[basis.index_of(indices)]
    }

    pub fn require_order(&self, required: usize) -> Result<()> {
        if self.order < required {
            return Err(Error::JetOrder {
                got: self.order,
                required,
            });
        }
        Ok(())
    }

    pub fn gradient(&self) -> DVector<f64> {
        DVector::from_fn(self.dim, |i, _| self.partial(&[i]))
    }

    pub fn hessian(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.partial(&[i, j]))
    }

    pub fn third(&self) -> Tensor<3> {
        Tensor::from_fn(self.dim, |[i, j, k]| self.partial(&[i, j, k]))
    }

    pub fn fourth(&self) -> Tensor<4> {
        Tensor::from_fn(self.dim, |[i, j, k, l]| self.partial(&[i, j, k, l]))
    }
}
