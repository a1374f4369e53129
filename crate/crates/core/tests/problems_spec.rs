use std::f64::consts::PI;

use crossfd::mesh::Domain;
use crossfd::problems::{make_example, make_piecewise_polynomial, verify_spec, Problem, PROBLEM_NAMES};
use crossfd::Error;

#[test]
fn shipped_examples_are_consistent() {
    for name in PROBLEM_NAMES {
        let p = make_example(name).unwrap();
        let report = verify_spec(&p, 1000).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(report.checks > 1000, "{name}: only {} checks", report.checks);
    }
    assert!(matches!(make_example("ex47"), Err(Error::UnknownProblem(_))));
}

/// Reports the flux jump with the wrong sign.
struct FlippedPsi<P>(P);

impl<P: Problem> Problem for FlippedPsi<P> {
    fn name(&self) -> &str {
        "flipped-psi"
    }
    fn domain(&self) -> Domain {
        self.0.domain()
    }
    fn coefficients(&self) -> [f64; 4] {
        self.0.coefficients()
    }
    fn u(&self, p: usize, m: usize, n: usize, x: f64, y: f64) -> f64 {
        self.0.u(p, m, n, x, y)
    }
    fn psi(&self, s: usize, n: usize, t: f64) -> f64 {
        -self.0.psi(s, n, t)
    }
}

/// Source term off by a constant factor.
struct ScaledSource<P>(P);

impl<P: Problem> Problem for ScaledSource<P> {
    fn name(&self) -> &str {
        "scaled-source"
    }
    fn domain(&self) -> Domain {
        self.0.domain()
    }
    fn coefficients(&self) -> [f64; 4] {
        self.0.coefficients()
    }
    fn u(&self, p: usize, m: usize, n: usize, x: f64, y: f64) -> f64 {
        self.0.u(p, m, n, x, y)
    }
    fn f(&self, p: usize, m: usize, n: usize, x: f64, y: f64) -> f64 {
        1.01 * self.0.f(p, m, n, x, y)
    }
}

#[test]
fn wrong_oracles_are_rejected() {
    for name in ["ex41", "ex46"] {
        let r = verify_spec(&FlippedPsi(make_example(name).unwrap()), 1000);
        assert!(matches!(r, Err(Error::InconsistentSpec(_))), "{name}: {r:?}");
        let r = verify_spec(&ScaledSource(make_example(name).unwrap()), 1000);
        assert!(matches!(r, Err(Error::InconsistentSpec(_))), "{name}: {r:?}");
    }
}

#[test]
fn printed_branches_and_coefficients() {
    type Branch = fn(f64, f64) -> f64;
    let cases: [(&str, [f64; 4], [Branch; 4]); 4] = [
        (
            "ex41",
            [1e-5, 1e5, 1e-5, 1e5],
            [
                |x, y| -(2.0 * PI * x).sin() * (-y).exp() - (2.0 * PI * (1.0 - y)).sin() * (-y).exp(),
                |x, y| -(2.0 * PI * (1.0 - x)).sin() * (-y).exp() - (2.0 * PI * (1.0 - y)).sin() * (-y).exp(),
                |x, y| -(2.0 * PI * (1.0 - x)).sin() * (-y).exp() - (2.0 * PI * y).sin() * (-y).exp(),
                |x, y| -(2.0 * PI * x).sin() * (-y).exp() - (2.0 * PI * y).sin() * (-y).exp(),
            ],
        ),
        (
            "ex42",
            [1e7, 1e-3, 1e4, 1e-6],
            [
                |x, y| (x.powi(3) + (1.0 - y).powi(3)) * (y - x).exp(),
                |x, y| ((1.0 - x).powi(3) + (1.0 - y).powi(3)) * (y - x).exp(),
                |x, y| ((1.0 - x).powi(3) + y.powi(3)) * (y - x).exp(),
                |x, y| (x.powi(3) + y.powi(3)) * (y - x).exp(),
            ],
        ),
        (
            "ex44",
            [1e4, 1e-4, 1e4, 1e-4],
            [
                |x, y| (5.0 * x).cos() * (5.0 * y).cos(),
                |x, y| (12.0 * x).cos() * (y - x).exp(),
                |x, y| (5.0 * x).sin() * (5.0 * y).cos(),
                |x, y| (12.0 * y).sin() * (x - y).exp(),
            ],
        ),
        (
            "ex45",
            [1e4, 1e-6, 1e5, 1e-5],
            [|_, y| (16.0 * y).sin(), |x, _| (16.0 * x).cos(), |_, y| (16.0 * y).sin(), |x, _| (16.0 * x).cos()],
        ),
    ];
    for (name, a, branches) in cases {
        let p = make_example(name).unwrap();
        assert_eq!(p.coefficients(), a, "{name}");
        for (k, b) in branches.iter().enumerate() {
            for &(x, y) in &[(0.1, 0.2), (0.7, 0.9), (0.33, 0.61)] {
                let (got, want) = (p.u(k + 1, 0, 0, x, y), b(x, y));
                assert!((got - want).abs() <= 1e-13 * (1.0 + want.abs()), "{name} u{}: {got} vs {want}", k + 1);
            }
        }
    }
    let ex43 = make_example("ex43").unwrap();
    assert_eq!((ex43.domain.xi, ex43.domain.zeta), (0.25, 0.125));
    assert_eq!(ex43.a[2], 2e-4);
    let ex44 = make_example("ex44").unwrap();
    assert_eq!((ex44.domain.xi, ex44.domain.zeta), (PI / 5.0, PI / 8.0));
    assert!((1..=4).any(|s| ex44.phi(s, 0, 0.3).abs() > 1e-3));
    let ex41 = make_example("ex41").unwrap();
    for s in 1..=4 {
        for n in 0..=7 {
            assert!(ex41.phi(s, n, 0.3).abs() < 1e-12);
        }
    }
}

#[test]
fn mixed_partials_commute() {
    let h = 1e-5;
    for name in ["ex42", "ex44", "ex46"] {
        let p = make_example(name).unwrap();
        for q in 1..=4 {
            let (x, y) = (0.37, 0.58);
            let exact = p.u(q, 2, 1, x, y);
            let via_x = (p.u(q, 1, 1, x + h, y) - p.u(q, 1, 1, x - h, y)) / (2.0 * h);
            let via_y = (p.u(q, 2, 0, x, y + h) - p.u(q, 2, 0, x, y - h)) / (2.0 * h);
            let scale = 1.0 + exact.abs();
            assert!((via_x - exact).abs() < 1e-5 * scale, "{name} u{q}");
            assert!((via_y - exact).abs() < 1e-5 * scale, "{name} u{q}");
        }
    }
}

#[test]
fn trivial_polynomial_cases_have_no_jumps() {
    let domain = Domain::unit_square(0.4, 0.6).unwrap();
    let constant = make_piecewise_polynomial(0, [1.0, 2.0, 3.0, 4.0], domain, std::array::from_fn(|_| vec![(0, 0, 1.5)])).unwrap();
    let global = vec![(0, 0, 0.5), (2, 1, -1.0), (3, 3, 0.25)];
    let smooth = make_piecewise_polynomial(6, [2.0; 4], domain, std::array::from_fn(|_| global.clone())).unwrap();
    for p in [&constant, &smooth] {
        for s in 1..=4 {
            for n in 0..=6 {
                for t in [0.1, 0.5, 0.9] {
                    assert!(p.phi(s, n, t).abs() < 1e-13, "phi {s} {n}");
                    assert!(p.psi(s, n, t).abs() < 1e-13, "psi {s} {n}");
                }
            }
        }
        verify_spec(p, 200).unwrap();
    }
    assert!(make_piecewise_polynomial(8, [1.0; 4], domain, std::array::from_fn(|_| vec![])).is_err());
}
