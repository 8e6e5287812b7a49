use mplobpcg::analysis::{
    accuracy_floor, beta, epsilon_a, epsilon_r, gamma_total, measure_gamma_precond, measure_norm_product, rate_bound,
};
use mplobpcg::dense::{norm2, DenseMatrix};
use mplobpcg::oracle::{random_spd, sturm_eigenvalues};
use mplobpcg::ortho::QrKind;
use mplobpcg::precision::PrecisionTag;
use mplobpcg::precond::Preconditioner;
use mplobpcg::solver::{initial_block, pinvit, StageOptions};
use mplobpcg::sparse::CsrMatrix;
use mplobpcg::{solve, Matrix, Operator, SolverConfig, Variant};
use proptest::prelude::*;

const U_H: f64 = 1.0 / 9_007_199_254_740_992.0;

fn variant(i: usize) -> Variant {
    [Variant::DlobpcgDchol, Variant::DlobpcgSchol, Variant::MplobpcgSchol, Variant::Pinvit][i]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solve_invariants(n in 30usize..90, k in 1usize..5, log_kappa in 1.0..3.5f64, seed in 0u64..1000, vi in 0usize..4) {
        let (a, _) = random_spd(n, 10f64.powf(log_kappa), seed);
        let exact = sturm_eigenvalues(&a);
        let m = Matrix::Dense(a);
        let cfg = SolverConfig::new(k, variant(vi)).with_seed(seed);
        let res = solve(&m, &cfg).unwrap();
        prop_assert!(res.converged);
        let slack = 10.0 * n as f64 * U_H * exact[n - 1];

        // residual criterion, recomputed
        let ax = m.apply(&res.x);
        for j in 0..k {
            let r: Vec<f64> = ax.col(j).iter().zip(res.x.col(j)).map(|(y, x)| y - res.theta[j] * x).collect();
            prop_assert!(norm2(&r) <= cfg.tol * (res.norm_estimate + res.theta[j]) * norm2(res.x.col(j)));
            prop_assert!(res.theta[j] >= exact[j] - slack);
            prop_assert!((res.theta[j] - exact[j]).abs() <= 1e-10 * exact[j]);
        }

        for h in &res.history {
            let (orth_tol, lower_slack) = match h.stage {
                PrecisionTag::Working => (1e-10, 0.0),
                PrecisionTag::Lower => (1e-5, 1e-5 * exact[n - 1]),
            };
            prop_assert!(h.orth_error <= orth_tol, "orthonormality {}", h.orth_error);
            for (j, t) in h.ritz.iter().enumerate() {
                prop_assert!(*t >= exact[j] - slack - lower_slack);
            }
        }

        // trace monotone within each working-precision LOBPCG stage
        if variant(vi) != Variant::Pinvit {
            let working: Vec<f64> = res.history.iter().filter(|h| h.stage == PrecisionTag::Working).map(|h| h.trace).collect();
            for w in working.windows(2) {
                prop_assert!(w[1] <= w[0] + slack, "{} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn sparse_and_dense_paths_agree(nx in 4usize..12, ny in 4usize..12, seed in 0u64..100) {
        let mut t = Vec::new();
        let idx = |i: usize, j: usize| i + nx * j;
        for j in 0..ny {
            for i in 0..nx {
                t.push((idx(i, j), idx(i, j), 4.0 + 0.01 * i as f64));
                if i + 1 < nx {
                    t.push((idx(i, j), idx(i + 1, j), -1.0));
                    t.push((idx(i + 1, j), idx(i, j), -1.0));
                }
                if j + 1 < ny {
                    t.push((idx(i, j), idx(i, j + 1), -1.0));
                    t.push((idx(i, j + 1), idx(i, j), -1.0));
                }
            }
        }
        let sparse = CsrMatrix::from_triplets(nx * ny, &t).unwrap();
        let dense = Matrix::Dense(sparse.to_dense());
        let cfg = SolverConfig::new(3, Variant::MplobpcgSchol).with_seed(seed);
        let a = solve(&Matrix::Sparse(sparse), &cfg).unwrap();
        let b = solve(&dense, &cfg).unwrap();
        for j in 0..3 {
            prop_assert!((a.theta[j] - b.theta[j]).abs() <= 1e-10 * b.theta[j]);
        }
    }
}

fn rate_violations(spectrum: &[f64], p_kind: &str) -> (usize, usize) {
    let n = spectrum.len();
    let a = DenseMatrix::<f64>::from_diagonal(spectrum);
    let m = Matrix::Dense(a.clone());
    let p = match p_kind {
        "exact" => Preconditioner::exact_inverse(&m).unwrap(),
        _ => Preconditioner::build(&m, PrecisionTag::Lower).unwrap(),
    };
    let (l1, l2, ln) = (spectrum[0], spectrum[1], spectrum[n - 1]);
    let gp = measure_gamma_precond(&a, &p).unwrap();
    let tn = measure_norm_product(&a, &p).unwrap();
    let er = epsilon_r(n, U_H, epsilon_a(n, U_H).unwrap()).unwrap();
    let floor = accuracy_floor(gp, tn, U_H, er, l1, ln).unwrap();
    let opts = StageOptions {
        k: 1,
        maxit: 300,
        tol: 1e-15,
        norm_estimate: ln,
        qr: QrKind::Mixed,
    };
    let out = pinvit(&m, &initial_block::<f64>(n, 1, 3), &p, &opts).unwrap();
    let rho: Vec<f64> = out.history.iter().map(|h| h.ritz[0]).collect();
    let (mut checked, mut bad) = (0, 0);
    for w in rho.windows(2) {
        if !(l1 < w[0] && w[0] < l2) || w[0] - l1 <= 10.0 * floor {
            continue;
        }
        let g = gamma_total(gp, tn, beta(w[0], l1, l2, ln).unwrap(), U_H, er).unwrap();
        let Ok(bound) = rate_bound(g, l1, l2) else { continue };
        checked += 1;
        let ratio = ((w[1] - l1) / (l2 - w[1])) / ((w[0] - l1) / (l2 - w[0]));
        if ratio > 1.05 * bound {
            bad += 1;
        }
    }
    (checked, bad)
}

#[test]
fn pinvit_rate_compliance_on_diagonal_spectra() {
    let spectra: Vec<Vec<f64>> = vec![
        (1..=10).map(|i| i as f64).collect(),
        (1..=40).map(|i| (i as f64).powi(2)).collect(),
        vec![1.0, 1.5, 3.0, 3.0, 7.0, 20.0, 50.0],
    ];
    for s in &spectra {
        for kind in ["exact", "lower"] {
            let (checked, bad) = rate_violations(s, kind);
            assert!(checked > 0, "{kind}: no steps in the certified window");
            assert_eq!(bad, 0, "{kind} on n={}", s.len());
        }
    }
}

#[test]
fn indefinite_input_reports_preconditioner_failure() {
    let a = Matrix::Dense(DenseMatrix::<f64>::from_diagonal(&[1.0, -1.0, 2.0, 3.0, 4.0, 5.0]));
    let cfg = SolverConfig::new(1, Variant::DlobpcgDchol);
    assert!(matches!(solve(&a, &cfg), Err(mplobpcg::Error::NotPositiveDefinite { .. })));
}
