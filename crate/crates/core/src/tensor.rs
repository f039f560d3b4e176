//! Dense coordinate tensors of fixed rank over a small dimension.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;

/// Dense rank-`R` tensor on an `dim`-dimensional space, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<const R: usize> {
    dim: usize,
    data: Vec<f64>,
}

impl<const R: usize> Tensor<R> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim.pow(R as u32)],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut([usize; R]) -> f64) -> Self {
        let mut t = Self::zeros(dim);
        for (slot, idx) in t.data.iter_mut().zip(multi_indices::<R>(dim)) {
            *slot = f(idx);
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Iterates `(multi-index, value)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = ([usize; R], f64)> + '_ {
        multi_indices::<R>(self.dim).zip(self.data.iter().copied())
    }

    /// Sum of squared components (Euclidean, no metric).
    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest componentwise difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Contracts every slot with `m`: `out[a..] = sum T[i..] m[i,a] ...`.
    ///
    /// With `m` the matrix whose columns are a frame, this expresses a
    /// covariant tensor in that frame.
    pub fn transform(&self, m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), self.dim);
        let out_dim = m.ncols();
        assert_eq!(out_dim, self.dim, "square frames only");
        let mut cur = self.clone();
        for mode in 0..R {
            let mut next = Self::zeros(out_dim);
            for idx in multi_indices::<R>(out_dim) {
                let mut src = idx;
                let mut acc = 0.0;
                for i in 0..self.dim {
                    src[mode] = i;
                    acc += cur[src] * m[(i, idx[mode])];
                }
                next[idx] = acc;
            }
            cur = next;
        }
        cur
    }

    fn offset(&self, idx: [usize; R]) -> usize {
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim + i
        })
    }
}

impl<const R: usize> Index<[usize; R]> for Tensor<R> {
    type Output = f64;
    fn index(&self, idx: [usize; R]) -> &f64 {
        &self.data[self.offset(idx)]
    }
}

impl<const R: usize> IndexMut<[usize; R]> for Tensor<R> {
    fn index_mut(&mut self, idx: [usize; R]) -> &mut f64 {
        let o = self.offset(idx);
        &mut self.data[o]
    }
}

/// All multi-indices of length `R` over `0..dim`, in row-major order.
pub fn multi_indices<const R: usize>(dim: usize) -> impl Iterator<Item = [usize; R]> {
    let total = dim.pow(R as u32);
    (0..total).map(move |mut flat| {
        let mut idx = [0; R];
        for slot in idx.iter_mut().rev() {
            *slot = flat % dim;
            flat /= dim;
        }
        idx
    })
}

/// Largest deviation from full permutation symmetry of a rank-3 tensor.
pub fn asymmetry3(t: &Tensor<3>) -> f64 {
    let mut worst: f64 = 0.0;
    for ([i, j, k], v) in t.iter() {
        for p in [[i, k, j], [j, i, k], [j, k, i], [k, i, j], [k, j, i]] {
            worst = worst.max((v - t[p]).abs());
        }
    }
    worst
}
