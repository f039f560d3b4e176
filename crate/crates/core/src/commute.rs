//! Simultaneous orthogonal diagonalization of commuting symmetric matrices.
//!
//! A random convex combination of the family is diagonalized first. Each
//! cluster of (numerically) equal eigenvalues spans a subspace invariant under
//! every member; on such a cluster the family is restricted and the procedure
//! recurses with fresh weights, stopping once every restricted member is a
//! multiple of the identity.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Relative eigenvalue gap below which eigenvalues form one cluster.
pub const DEGENERACY_GAP: f64 = 1e-8;
pub const DEFAULT_COMMUTATOR_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-12;
const DEFAULT_SEED: u64 = 0x5eed_d1a6;

/// A validated family of pairwise-commuting symmetric matrices.
#[derive(Debug, Clone)]
pub struct SymFamily {
    matrices: Vec<DMatrix<f64>>,
    tol: f64,
}

impl SymFamily {
    pub fn new(matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        Self::with_tolerance(matrices, DEFAULT_COMMUTATOR_TOL)
    }

    /// Checks symmetry (to `1e-12` relative) and
    /// `|A_i A_j - A_j A_i| <= tol |A_i| |A_j|` for every pair.
    pub fn with_tolerance(matrices: Vec<DMatrix<f64>>, tol: f64) -> Result<Self> {
        let Some(first) = matrices.first() else {
            return Err(Error::InvalidParameter("empty matrix family".into()));
        };
        let n = first.nrows();
        if n == 0 {
            return Err(Error::InvalidParameter("zero-sized matrices".into()));
        }
        for (index, m) in matrices.iter().enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::InvalidParameter(format!(
                    "matrix {index} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let residual = (m - m.transpose()).amax();
            if residual > SYMMETRY_TOL * (1.0 + m.amax()) {
                return Err(Error::NotSymmetric { index, residual });
            }
        }
        for i in 0..matrices.len() {
            for j in i + 1..matrices.len() {
                let (a, b) = (&matrices[i], &matrices[j]);
                let comm = (a * b - b * a).norm();
                let scale = a.norm() * b.norm();
                if comm > tol * scale {
                    return Err(Error::NonCommuting {
                        i,
                        j,
                        residual: if scale > 0.0 { comm / scale } else { comm },
                    });
                }
            }
        }
        Ok(Self { matrices, tol })
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }
}

/// Orthogonal `P` with every `P A_k P^T` diagonal.
#[derive(Debug, Clone)]
pub struct Diagonalization {
    /// Rows are the common eigenvectors.
    pub p: DMatrix<f64>,
    /// `eigenvalues[k][i] = (P A_k P^T)_ii`.
    pub eigenvalues: Vec<Vec<f64>>,
    /// Largest `|offdiag(P A_k P^T)| / (1 + |A_k|)` over the family.
    pub worst_offdiag: f64,
}

pub fn simultaneous_diagonalize(fam: &SymFamily) -> Result<Diagonalization> {
    simultaneous_diagonalize_seeded(fam, DEFAULT_SEED)
}

pub fn simultaneous_diagonalize_seeded(fam: &SymFamily, seed: u64) -> Result<Diagonalization> {
    let n = fam.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = fam.matrices.iter().map(|m| m.amax()).fold(0.0, f64::max);
    let mut columns = Vec::with_capacity(n);
    refine(&fam.matrices, DMatrix::identity(n, n), scale, &mut rng, 0, &mut columns)?;
    let q = DMatrix::from_columns(&columns);
    let p = q.transpose();

    let mut eigenvalues = Vec::with_capacity(fam.matrices.len());
    let mut worst: f64 = 0.0;
    for m in &fam.matrices {
        let d = &p * m * &q;
        let mut off: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off = off.max(d[(i, j)].abs());
                }
            }
        }
        worst = worst.max(off / (1.0 + m.norm()));
        eigenvalues.push((0..n).map(|i| d[(i, i)]).collect());
    }
    if worst > 1e-9 {
        return Err(Error::Convergence {
            what: "simultaneous diagonalization",
            detail: format!("worst relative off-diagonal {worst:e}"),
        });
    }
    Ok(Diagonalization {
        p,
        eigenvalues,
        worst_offdiag: worst,
    })
}

/// Splits the subspace spanned by the orthonormal columns of `basis` into
/// common eigenvectors, appending them to `out`.
fn refine(
    family: &[DMatrix<f64>],
    basis: DMatrix<f64>,
    scale: f64,
    rng: &mut ChaCha8Rng,
    depth: usize,
    out: &mut Vec<nalgebra::DVector<f64>>,
) -> Result<()> {
    let d = basis.ncols();
    if d == 1 {
        out.push(basis.column(0).into_owned());
        return Ok(());
    }
    let restricted: Vec<DMatrix<f64>> = family.iter().map(|m| basis.transpose() * m * &basis).collect();
    if restricted.iter().all(|m| is_scalar(m, scale)) {
        out.extend(basis.column_iter().map(|c| c.into_owned()));
        return Ok(());
    }
    if depth > basis.nrows() + family.len() {
        return Err(Error::Convergence {
            what: "simultaneous diagonalization",
            detail: format!("recursion depth {depth} on a {d}-dimensional cluster"),
        });
    }

    let weights: Vec<f64> = (0..restricted.len()).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut comb = DMatrix::zeros(d, d);
    for (w, m) in weights.iter().zip(&restricted) {
        comb += m * (*w / total);
    }
    comb = (&comb + comb.transpose()) * 0.5;
    let eig = SymmetricEigen::new(comb);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let radius = eig.eigenvalues.amax().max(scale * f64::EPSILON);
    let gap = DEGENERACY_GAP * radius;
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && eig.eigenvalues[order[end]] - eig.eigenvalues[order[end - 1]] < gap {
            end += 1;
        }
        let cols: Vec<_> = order[start..end]
            .iter()
            .map(|&i| &basis * eig.eigenvectors.column(i))
            .collect();
        let sub = DMatrix::from_columns(&cols);
        if end - start == d {
            // The whole block is one cluster of this combination although the
            // family is not scalar on it; try again with new weights.
            refine(family, sub, scale, rng, depth + 1, out)?;
        } else {
            refine(family, sub, scale, rng, depth, out)?;
        }
        start = end;
    }
    Ok(())
}

fn is_scalar(m: &DMatrix<f64>, scale: f64) -> bool {
    let d = m.nrows();
    let mean = m.trace() / d as f64;
    let mut dev: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let target = if i == j { mean } else { 0.0 };
            dev = dev.max((m[(i, j)] - target).abs());
        }
    }
    dev <= DEGENERACY_GAP * scale.max(f64::MIN_POSITIVE)
}
