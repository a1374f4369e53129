use std::process::Command;

use crossfd::assembly::Scheme;
use crossfd::problems::{make_example, Problem};
use crossfd::study::{error_norms, run_convergence, solve_level, to_csv, StudyConfig};

#[test]
fn norms_match_a_direct_loop() {
    let p = make_example("ex44").unwrap();
    let config = StudyConfig::new(Scheme::MMatrix, 3, 3);
    let (grid, sol, _, _) = solve_level(&p, &config, 3).unwrap();
    let d = p.domain();
    let (n1, n2) = (grid.n1, grid.n2);
    let h = (d.l2 - d.l1) / n1 as f64;
    let (mut num, mut den, mut max) = (0.0, 0.0, 0.0f64);
    for j in 0..=n2 {
        for i in 0..=n1 {
            let (x, y) = (d.l1 + i as f64 * h, d.l3 + j as f64 * h);
            let q = match (x > d.xi, y > d.zeta) {
                (false, true) => 1,
                (true, true) => 2,
                (true, false) => 3,
                (false, false) => 4,
            };
            let u = p.u(q, 0, 0, x, y);
            let e = sol.at(i, j) - u;
            num += e * e;
            den += u * u;
            max = max.max(e.abs());
        }
    }
    let (l2, m) = error_norms(&p, &grid, &sol);
    assert!((l2 - (num / den).sqrt()).abs() <= 1e-12 * l2);
    assert!((m - max).abs() <= 1e-12 * m);
}

#[test]
fn csv_is_reproducible() {
    let p = make_example("ex42").unwrap();
    let config = StudyConfig::new(Scheme::HighOrder, 2, 5);
    let a = to_csv(&run_convergence(&p, &config).unwrap()).unwrap();
    let b = to_csv(&run_convergence(&p, &config).unwrap()).unwrap();
    assert_eq!(a, b);
    assert!(a.starts_with("J,h,eps_l2,order_l2,err_max,order_max,assemble_ms,solve_ms\n"));
    assert_eq!(a.lines().count(), 5);
}

#[test]
fn harmonic_is_solved_to_roundoff() {
    let p = make_example("harmonic").unwrap();
    for scheme in [Scheme::HighOrder, Scheme::MMatrix] {
        let report = run_convergence(&p, &StudyConfig::new(scheme, 2, 6)).unwrap();
        assert!(report.failure.is_none());
        for l in &report.levels {
            assert!(l.err_max <= 1e-11, "J={} {:e}", l.j, l.err_max);
        }
    }
}

fn crossfd(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_crossfd")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn cli_exit_codes() {
    let (code, text) = crossfd(&["list-problems"]);
    assert_eq!(code, 0);
    assert!(text.contains("ex41") && text.contains("ex46"));
    assert_eq!(crossfd(&["converge", "--problem", "nope"]).0, 1);
    assert_eq!(crossfd(&["converge", "--problem", "ex41", "--tol", "1e-3"]).0, 1);
    assert_eq!(crossfd(&["frobnicate"]).0, 1);
    assert_eq!(crossfd(&["mmatrix", "--problem", "ex44", "--strict"]).0, 3);
    assert_eq!(crossfd(&["mmatrix", "--problem", "ex44", "--scheme", "mmatrix", "--strict"]).0, 0);
}

#[test]
fn cli_converge_csv() {
    let (code, text) =
        crossfd(&["converge", "--problem", "ex41", "--jmin", "2", "--jmax", "4", "--out", "csv"]);
    assert_eq!(code, 0);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("J,h,eps_l2,order_l2,err_max,order_max,assemble_ms,solve_ms"));
    assert_eq!(lines.next().unwrap().split(',').next(), Some("2"));
    assert_eq!(lines.count(), 2);
}
