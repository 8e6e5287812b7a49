use std::fs;

use mplobpcg_bench::cli::main_with;
use mplobpcg_bench::gen::{laplace2d, laplace2d_eigenvalues};
use mplobpcg_bench::mm::{format_matrix_market, parse_matrix_market, MmMatrix};
use mplobpcg::sparse::CsrMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use tempfile::tempdir;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("mplobpcg-bench").chain(args.iter().copied());
    let code = main_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn csv_rows(path: &std::path::Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

#[test]
fn laplace_run_matches_analytic_spectrum() {
    let dir = tempdir().unwrap();
    let csv_path = dir.path().join("out.csv");
    let (code, out, _) = run(&[
        "run", "--gen", "laplace2d:50x50", "--k", "10", "--variant", "mplobpcg-schol", "--seed", "7", "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("mplobpcg-schol"));
    let header = csv::Reader::from_path(&csv_path).unwrap().headers().unwrap().clone();
    assert_eq!(header.iter().collect::<Vec<_>>(), mplobpcg_bench::cli::CSV_COLUMNS.to_vec());
    let rows = csv_rows(&csv_path);
    assert_eq!(rows.len(), 10);
    let exact = laplace2d_eigenvalues(50, 50);
    for (j, row) in rows.iter().enumerate() {
        let theta: f64 = row[11].parse().unwrap();
        let resid: f64 = row[12].parse().unwrap();
        assert!((theta - exact[j]).abs() / exact[j] < 1e-10);
        assert!(resid <= 1e-12 * (8.0 + theta));
        assert_eq!(&row[9], "true");
    }
}

#[test]
fn fixture_all_variants_agree() {
    let dir = tempdir().unwrap();
    let mtx = dir.path().join("fixture.mtx");
    fs::write(&mtx, format_matrix_market(&MmMatrix::Real(laplace2d(12, 9)))).unwrap();
    let csv_path = dir.path().join("all.csv");
    let (code, _, _) = run(&[
        "run", "--matrix", mtx.to_str().unwrap(), "--k", "3", "--variant", "all", "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let rows = csv_rows(&csv_path);
    assert_eq!(rows.len(), 9);
    assert_eq!(&rows[0][0], "fixture");
    for j in 0..3 {
        let thetas: Vec<f64> = (0..3).map(|v| rows[3 * v + j][11].parse().unwrap()).collect();
        for t in &thetas[1..] {
            assert!((t - thetas[0]).abs() <= 1e-10 * thetas[0]);
        }
    }
}

#[test]
fn reruns_are_reproducible_and_jobs_do_not_change_results() {
    let dir = tempdir().unwrap();
    let cols = |p: &std::path::Path| -> Vec<Vec<String>> {
        csv_rows(p)
            .iter()
            .map(|r| r.iter().take(13).map(str::to_string).collect())
            .collect()
    };
    let mut outputs = Vec::new();
    for (i, jobs) in ["1", "1", "3"].iter().enumerate() {
        let p = dir.path().join(format!("r{i}.csv"));
        let (code, _, _) = run(&[
            "run", "--gen", "gaussian:60:2", "--gen", "laplace2d:8x8", "--k", "2", "--variant", "all", "--seed",
            "5", "--jobs", jobs, "--csv", p.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        outputs.push(cols(&p));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn history_and_bounds() {
    let dir = tempdir().unwrap();
    let hist = dir.path().join("h.json");
    let csv_path = dir.path().join("b.csv");
    let (code, _, err) = run(&[
        "run", "--gen", "poly:40:1", "--k", "2", "--variant", "pinvit", "--bounds", "--history",
        hist.to_str().unwrap(), "--csv", csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&hist).unwrap()).unwrap();
    let rec = &json[0];
    let history = rec["history"].as_array().unwrap();
    assert_eq!(history.len(), rec["iters_working"].as_u64().unwrap() as usize + 1);
    assert!(rec["bounds"]["gamma_total"].as_f64().unwrap() >= 0.0);
    let headers = csv::Reader::from_path(&csv_path).unwrap().headers().unwrap().clone();
    assert_eq!(headers.len(), 15 + mplobpcg_bench::cli::BOUND_COLUMNS.len());
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["run", "--gen", "laplace2d:10x10", "--k", "2", "--bogus"]).0, 1);
    assert_eq!(run(&["run", "--k", "2"]).0, 1);
    assert_eq!(run(&["run", "--gen", "laplace2d:4x4", "--k", "8"]).0, 1);
    assert_eq!(run(&["run", "--matrix", "/nonexistent.mtx", "--k", "1"]).0, 1);
    let (code, _, err) = run(&["run", "--gen", "laplace2d:30x30", "--k", "4", "--maxit", "2", "--variant", "dlobpcg-schol"]);
    assert_eq!(code, 2, "{err}");
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn dump_matrix_round_trips() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("k.mtx");
    let (code, _, _) = run(&["run", "--gen", "cgaussian:30:4", "--k", "1", "--dump-matrix", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let MmMatrix::Complex(a) = parse_matrix_market(&fs::read_to_string(&path).unwrap()).unwrap() else {
        panic!("complex kernel should dump as complex")
    };
    assert_eq!(a.n(), 30);
}

fn random_hermitian(n: usize, entries: Vec<(usize, usize, f64, f64)>) -> CsrMatrix<Complex64> {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, Complex64::new(1.0 + i as f64, 0.0)));
    }
    for (i, j, re, im) in entries {
        let (i, j) = (i % n, j % n);
        if i == j {
            continue;
        }
        t.push((i, j, Complex64::new(re, im)));
        t.push((j, i, Complex64::new(re, -im)));
    }
    CsrMatrix::from_triplets(n, &t).unwrap()
}

proptest! {
    #[test]
    fn laplace_nnz_formula(nx in 1usize..60, ny in 1usize..60) {
        prop_assert_eq!(laplace2d(nx, ny).nnz(), 5 * nx * ny - 2 * nx - 2 * ny);
    }

    #[test]
    fn matrix_market_round_trip_real(n in 1usize..20, entries in prop::collection::vec((0usize..20, 0usize..20, -1e3..1e3f64), 0..40)) {
        let mut t: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 10.0 + i as f64 / 7.0)).collect();
        for (i, j, v) in entries {
            let (i, j) = (i % n, j % n);
            if i != j {
                t.push((i, j, v));
                t.push((j, i, v));
            }
        }
        let a = MmMatrix::Real(CsrMatrix::from_triplets(n, &t).unwrap());
        prop_assert_eq!(parse_matrix_market(&format_matrix_market(&a)).unwrap(), a);
    }

    #[test]
    fn matrix_market_round_trip_complex(n in 1usize..12, entries in prop::collection::vec((0usize..12, 0usize..12, -5.0..5.0f64, -5.0..5.0f64), 0..20)) {
        let a = MmMatrix::Complex(random_hermitian(n, entries));
        prop_assert_eq!(parse_matrix_market(&format_matrix_market(&a)).unwrap(), a);
    }
}
