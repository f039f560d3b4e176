use calabi::commute::{simultaneous_diagonalize_seeded, SymFamily};
use calabi::error::Error;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random orthogonal matrix from the QR factorization of a Gaussian-ish matrix.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    m.qr().q()
}

/// `m` matrices sharing eigenvectors; eigenvalues are drawn from a small set
/// so that repeated values are common.
fn family(seed: u64, n: usize, m: usize) -> (DMatrix<f64>, Vec<Vec<f64>>, SymFamily) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = random_orthogonal(&mut rng, n);
    let values: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-2i32..=2) as f64).collect())
        .collect();
    let mats = values
        .iter()
        .map(|d| &q * DMatrix::from_diagonal(&DVector::from_row_slice(d)) * q.transpose())
        .collect();
    (q, values, SymFamily::new(mats).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reconstructs_every_member(seed in any::<u64>(), n in 1usize..=6, m in 1usize..=4) {
        let (_, _, fam) = family(seed, n, m);
        let d = simultaneous_diagonalize_seeded(&fam, seed ^ 0x5eed).unwrap();
        let id = DMatrix::<f64>::identity(n, n);
        prop_assert!((&d.p * d.p.transpose() - &id).amax() < 1e-9);
        for (k, a) in fam.matrices().iter().enumerate() {
            let diag = DMatrix::from_diagonal(&DVector::from_row_slice(&d.eigenvalues[k]));
            let back = d.p.transpose() * diag * &d.p;
            prop_assert!((back - a).amax() < 1e-9);
        }
        prop_assert!(d.worst_offdiag < 1e-9);
    }

    #[test]
    fn eigenvalue_multisets_are_recovered(seed in any::<u64>(), n in 1usize..=5) {
        let (_, values, fam) = family(seed, n, 2);
        let d = simultaneous_diagonalize_seeded(&fam, 3).unwrap();
        for (got, want) in d.eigenvalues.iter().zip(&values) {
            let (mut got, mut want) = (got.clone(), want.clone());
            got.sort_by(f64::total_cmp);
            want.sort_by(f64::total_cmp);
            for (a, b) in got.iter().zip(&want) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn non_commuting_family_is_rejected() {
    let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let b = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    assert!(matches!(SymFamily::new(vec![a, b]), Err(Error::NonCommuting { .. })));
}

#[test]
fn asymmetric_matrix_is_rejected() {
    let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
    assert!(matches!(SymFamily::new(vec![a]), Err(Error::NotSymmetric { .. })));
}
