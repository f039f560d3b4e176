//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL line
//! per criterion with its worst residual and wall time, and exits non-zero if
//! any criterion fails.

mod common;

use std::f64::consts::SQRT_2;
use std::time::{Duration, Instant};

use calabi::affine::{check_equivalence_invariants, AffineMap};
use calabi::catalog::{logcone_graph_residual, logcone_pullback_metric, CatalogSurface};
use calabi::commute::{simultaneous_diagonalize_seeded, SymFamily};
use calabi::function::eval_jet;
use calabi::geometry::{extremal_residual, parallel_rhs_checks, TensorBundle};
use calabi::normal_form::{normal_form, CaseLabel};
use calabi::reconstruct::{closed_form, integrate_frames, recovered_surface, FlatParallelData};
use calabi::tensor::multi_indices;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const POINTS: usize = 100;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

/// Worst value seen and where.
#[derive(Default)]
struct Worst {
    value: f64,
    at: String,
}

impl Worst {
    fn see(&mut self, v: f64, at: impl FnOnce() -> String) {
        if v.is_nan() || v > self.value {
            self.value = if v.is_nan() { f64::INFINITY } else { v };
            self.at = at();
        }
    }
}

fn random_q(rng: &mut ChaCha8Rng, n: usize, r: usize) -> CatalogSurface {
    let c = (0..r).map(|_| rng.gen_range(0.2..=5.0)).collect();
    CatalogSurface::q(c, n).unwrap()
}

fn q_surfaces() -> Vec<CatalogSurface> {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    [(2, 1), (2, 2), (3, 1), (3, 2), (3, 3)]
        .iter()
        .map(|&(n, r)| random_q(&mut rng, n, r))
        .collect()
}

fn all_surfaces() -> Vec<CatalogSurface> {
    let mut s = CatalogSurface::standard();
    s.extend(q_surfaces());
    s
}

fn canonicity_of_q() -> Outcome {
    let (mut cov, mut riem, mut scalar, mut pick) =
        (Worst::default(), Worst::default(), Worst::default(), Worst::default());
    for (k, s) in q_surfaces().iter().enumerate() {
        let CatalogSurface::Q { c, n } = s else { unreachable!() };
        let nf = *n as f64;
        let want = c.iter().map(|ci| 1.0 / ci).sum::<f64>() / (nf * (nf - 1.0));
        for x in s.sample_points(POINTS, 200 + k as u64) {
            let b = TensorBundle::compute(&s.as_function(), &x).unwrap();
            let cv = &b.curvature;
            let at = || format!("{s} at {x:?}");
            cov.see(cv.cov_a_norm.unwrap(), at);
            riem.see(cv.riem_norm, at);
            scalar.see(cv.scalar.abs(), at);
            pick.see((cv.pick - want).abs() / want, at);
        }
    }
    let ok = cov.value < 1e-8 && riem.value < 1e-8 && scalar.value < 1e-8 && pick.value < 1e-8;
    outcome(
        ok,
        format!(
            "|DA| {:.1e}, |Riem| {:.1e}, |R| {:.1e}, J rel {:.1e}",
            cov.value, riem.value, scalar.value, pick.value
        ),
    )
}

fn logcone_invariants() -> Outcome {
    let (mut r, mut j, mut cov, mut mu) = (Worst::default(), Worst::default(), Worst::default(), Worst::default());
    let mut wrong_case = 0;
    for (k, c) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let s = CatalogSurface::log_cone(c).unwrap();
        for x in s.sample_points(POINTS, 300 + k as u64) {
            let b = TensorBundle::compute(&s.as_function(), &x).unwrap();
            let cv = &b.curvature;
            let at = || format!("{s} at {x:?}");
            r.see((cv.scalar + 2.0 * c * c).abs(), at);
            j.see((cv.pick - 7.0 * c * c / 6.0).abs(), at);
            cov.see(cv.cov_a_norm.unwrap(), at);
            let nf = normal_form(&b).unwrap();
            mu.see((nf.spectrum[0] - SQRT_2 * c).abs(), at);
            if nf.case != Some(CaseLabel(2)) {
                wrong_case += 1;
            }
        }
    }
    let ok = r.value < 1e-8 && j.value < 1e-8 && cov.value < 1e-7 && mu.value < 1e-6 && wrong_case == 0;
    outcome(
        ok,
        format!(
            "|R+2c^2| {:.1e}, |J-7c^2/6| {:.1e}, |DA| {:.1e}, |mu1-sqrt2 c| {:.1e}, non-C2 {wrong_case}",
            r.value, j.value, cov.value, mu.value
        ),
    )
}

fn parametrization() -> Outcome {
    let c = 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(400);
    let (mut graph, mut metric) = (Worst::default(), Worst::default());
    for _ in 0..1000 {
        let y = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.1..3.0),
            rng.gen_range(-3.0..3.0),
        ];
        graph.see(logcone_graph_residual(c, y).unwrap().abs(), || format!("{y:?}"));
        let g = logcone_pullback_metric(c, y).unwrap();
        let sh = (c * y[1]).sinh();
        let want = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, sh * sh]));
        metric.see((g - want).amax(), || format!("{y:?}"));
    }
    outcome(
        graph.value < 1e-12 && metric.value < 1e-8,
        format!(
            "graph {:.1e} at y = {}, metric {:.1e}",
            graph.value, graph.at, metric.value
        ),
    )
}

fn extremal_pde() -> Outcome {
    let mut worst = Worst::default();
    for (k, s) in all_surfaces().iter().enumerate() {
        let f = s.as_function();
        for x in s.sample_points(POINTS, 500 + k as u64) {
            let jet = eval_jet(&f, &x, 4).unwrap();
            worst.see(extremal_residual(&jet).unwrap().abs(), || format!("{s} at {x:?}"));
        }
    }
    outcome(
        worst.value < 1e-8,
        format!("max |Delta ln det Hess f| {:.1e} ({})", worst.value, worst.at),
    )
}

fn codazzi() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(600);
    let mut worst = Worst::default();
    for k in 0..50 {
        let n = 2 + k % 3;
        let rc = common::random_convex(&mut rng, n);
        for _ in 0..10 {
            let x = common::random_point(&mut rng, n);
            let b = TensorBundle::compute(&rc.f, &x).unwrap();
            let cov = b.cubic.cov_a.as_ref().unwrap().transform(&b.metric.frame);
            let norm = cov.norm_sq().sqrt();
            let mut asym = 0.0f64;
            for [i, j, p, l] in multi_indices::<4>(n) {
                asym = asym.max((cov[[i, j, p, l]] - cov[[i, j, l, p]]).abs());
            }
            worst.see(asym / (1.0 + norm), || format!("function {k} at {x:?}"));
        }
    }
    outcome(
        worst.value < 1e-9,
        format!("max |A_ijk,l - A_ijl,k| / (1+|DA|) {:.1e}", worst.value),
    )
}

fn simultaneous_diagonalization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(700);
    let (mut orth, mut off) = (Worst::default(), Worst::default());
    let mut failures = 0;
    for k in 0..200 {
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=4);
        let q = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)).qr().q();
        // every fourth family draws from only two eigenvalues per matrix
        let degenerate = k % 4 == 0;
        let mats: Vec<DMatrix<f64>> = (0..m)
            .map(|_| {
                let d = DVector::from_fn(n, |_, _| {
                    if degenerate {
                        rng.gen_range(0..2) as f64
                    } else {
                        rng.gen_range(-3.0..3.0)
                    }
                });
                &q * DMatrix::from_diagonal(&d) * q.transpose()
            })
            .collect();
        let fam = SymFamily::new(mats).unwrap();
        match simultaneous_diagonalize_seeded(&fam, k) {
            Ok(d) => {
                let id = DMatrix::<f64>::identity(n, n);
                orth.see((&d.p * d.p.transpose() - id).amax(), || format!("family {k}"));
                for a in fam.matrices() {
                    let t = &d.p * a * d.p.transpose();
                    let mut w = 0.0f64;
                    for i in 0..n {
                        for j in 0..n {
                            if i != j {
                                w = w.max(t[(i, j)].abs());
                            }
                        }
                    }
                    off.see(w, || format!("family {k}"));
                }
            }
            Err(_) => failures += 1,
        }
    }
    outcome(
        orth.value < 1e-9 && off.value < 1e-9 && failures == 0,
        format!(
            "orthogonality {:.1e}, off-diagonal {:.1e}, errors {failures}",
            orth.value, off.value
        ),
    )
}

fn reconstruction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(800);
    let (mut integ, mut diag) = (Worst::default(), Worst::default());
    for k in 0..20 {
        let n = rng.gen_range(2..=4);
        let r = rng.gen_range(1..=n);
        let mut a: Vec<f64> = (0..r).map(|_| rng.gen_range(0.2..2.0)).collect();
        a.sort_by(|x, y| y.total_cmp(x));
        let v = (0..n).map(|_| rng.gen_range(0.1..1.5)).collect();
        let data = FlatParallelData::new(n, a, v).unwrap();
        let run = integrate_frames(&data, 10_000).unwrap();
        let exact = closed_form(&data);
        let dev = run
            .position
            .iter()
            .zip(&exact)
            .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        integ.see(dev, || format!("instance {k}"));

        let s = recovered_surface(&data).unwrap();
        let x = &s.sample_points(1, k)[0];
        let nf = normal_form(&TensorBundle::compute(&s.as_function(), x).unwrap()).unwrap();
        for (i, want) in data.full_diag().iter().enumerate() {
            diag.see((nf.frame_cubic[[i, i, i]] - want).abs(), || format!("instance {k}"));
        }
    }
    outcome(
        integ.value < 1e-9 && diag.value < 1e-7,
        format!(
            "|rk4 - closed form| {:.1e}, |Abar_iii - 1/sqrt(c_i)| {:.1e}",
            integ.value, diag.value
        ),
    )
}

/// Random map with `det L = 1`, so the full matrix lies in SA(n+1).
fn random_sa_map(rng: &mut ChaCha8Rng, n: usize) -> AffineMap {
    loop {
        let l = DMatrix::<f64>::from_fn(n, n, |i, j| rng.gen_range(-1.0..1.0) + if i == j { 1.5 } else { 0.0 });
        let det = l.determinant();
        if det < 0.2 {
            continue;
        }
        let l = l / det.powf(1.0 / n as f64);
        let shear = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let translate = DVector::from_fn(n + 1, |_, _| rng.gen_range(-1.0..1.0));
        return AffineMap::new(l, shear, translate).unwrap();
    }
}

fn affine_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(900);
    let mut worst = Worst::default();
    let mut mismatches = 0;
    for (k, s) in CatalogSurface::standard().iter().enumerate() {
        let f = s.as_function();
        for m in 0..20 {
            let phi = random_sa_map(&mut rng, s.dim());
            let points = s.sample_points(5, 1000 * k as u64 + m);
            let rep = check_equivalence_invariants(&phi, &f, &points).unwrap();
            worst.see(rep.max_scalar_deviation(), || format!("{s}, map {m}"));
            mismatches += rep.case_mismatches;
        }
    }
    outcome(
        worst.value < 1e-7 && mismatches == 0,
        format!(
            "max J/R/|T|^2/mu deviation {:.1e}, case mismatches {mismatches}",
            worst.value
        ),
    )
}

fn parallel_rhs() -> Outcome {
    let (mut t, mut j) = (Worst::default(), Worst::default());
    for (k, s) in all_surfaces().iter().enumerate() {
        for x in s.sample_points(POINTS, 1100 + k as u64) {
            let b = TensorBundle::compute(&s.as_function(), &x).unwrap();
            let (rt, rj) = parallel_rhs_checks(&b);
            t.see(rt, || format!("{s} at {x:?}"));
            j.see(rj, || format!("{s} at {x:?}"));
        }
    }
    outcome(
        t.value < 1e-8 && j.value < 1e-8,
        format!(
            "Ric(T,T) {:.1e}, |Riem|^2 + Ric.AA {:.1e} ({})",
            t.value,
            j.value,
            if t.value > j.value { &t.at } else { &j.at }
        ),
    )
}

fn exclusions() -> Outcome {
    let mut violations = Vec::new();
    let mut checked = 0;
    for (k, s) in all_surfaces().iter().enumerate() {
        let paraboloid = matches!(s, CatalogSurface::Paraboloid { .. });
        for x in s.sample_points(POINTS, 1200 + k as u64) {
            let nf = normal_form(&TensorBundle::compute(&s.as_function(), &x).unwrap()).unwrap();
            checked += 1;
            let case = nf.case;
            if s.dim() == 3 && case == Some(CaseLabel(3)) {
                violations.push(format!("C3 on {s}"));
            }
            if (case == Some(CaseLabel(0))) != paraboloid {
                violations.push(format!("C0 mismatch on {s}: {case:?}"));
            }
            if case.is_none() {
                violations.push(format!("unclassified point on {s}"));
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "{checked} points, {} violations{}",
            violations.len(),
            violations.first().map(|v| format!(" ({v})")).unwrap_or_default()
        ),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);
    let criteria: [Criterion; 10] = [
        ("canonicity of Q", canonicity_of_q, Some(Duration::from_secs(5))),
        ("log-cone invariants", logcone_invariants, Some(Duration::from_secs(5))),
        (
            "log-cone parametrization",
            parametrization,
            Some(Duration::from_secs(1)),
        ),
        ("affine-extremal equation", extremal_pde, Some(Duration::from_secs(2))),
        ("Codazzi on random functions", codazzi, Some(Duration::from_secs(10))),
        (
            "simultaneous diagonalization",
            simultaneous_diagonalization,
            Some(Duration::from_secs(3)),
        ),
        (
            "reconstruction round trip",
            reconstruction,
            Some(Duration::from_secs(5)),
        ),
        ("affine invariance", affine_invariance, Some(Duration::from_secs(5))),
        ("parallel right-hand sides", parallel_rhs, Some(Duration::from_secs(2))),
        ("case exclusions", exclusions, None),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed <= b);
        let pass = out.passed && in_time;
        if !pass {
            failed += 1;
        }
        let budget_text = budget
            .map(|b| format!(" / {:.0} s", b.as_secs_f64()))
            .unwrap_or_default();
        println!(
            "{} {:>2} {:<30} {:.3} s{}  {}",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            name,
            elapsed.as_secs_f64(),
            budget_text,
            out.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
