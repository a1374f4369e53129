//! Manufactured cross-interface problems with closed-form derivative oracles.
//!
//! Each branch `u_p` is a [`Field`]: a sum of separable terms whose factors are
//! `poly(t - t0) * Re[c exp(z t)]`, which covers the products of polynomials,
//! exponentials and sines/cosines used by the shipped examples and lets every
//! partial derivative be evaluated exactly (Leibniz rule).  Source terms and
//! jump data are derived from the branches:
//!
//! * `f_p^{(m,n)} = -a_p (u_p^{(m+2,n)} + u_p^{(m,n+2)})`
//! * Γ1: `φ1 = u2 - u1`, `ψ1 = a2 ∂x u2 - a1 ∂x u1` on `x = xi`, derivatives in y
//! * Γ2: `u3 - u4`, Γ3: `u2 - u3` (on `y = zeta`, derivatives in x), Γ4: `u1 - u4`

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mesh::{stored_subdomain, Domain};

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// One-dimensional factor `poly(t - shift) * Re[c exp(z t)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    pub poly: Vec<f64>,
    pub shift: f64,
    pub c: Complex64,
    pub z: Complex64,
}

impl Factor {
    pub fn constant(v: f64) -> Self {
        Self::poly(vec![v])
    }

    /// Polynomial with coefficients in increasing degree.
    pub fn poly(coef: Vec<f64>) -> Self {
        Factor { poly: coef, shift: 0.0, c: Complex64::new(1.0, 0.0), z: Complex64::new(0.0, 0.0) }
    }

    /// `(t - shift)^k`
    pub fn monomial(k: usize, shift: f64) -> Self {
        let mut coef = vec![0.0; k + 1];
        coef[k] = 1.0;
        Factor { shift, ..Self::poly(coef) }
    }

    pub fn exp(rate: f64) -> Self {
        Factor { z: Complex64::new(rate, 0.0), ..Self::constant(1.0) }
    }

    /// `exp(rate t) sin(omega t + phase)`
    pub fn sin(omega: f64, phase: f64, rate: f64) -> Self {
        Factor {
            c: Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, phase),
            z: Complex64::new(rate, omega),
            ..Self::constant(1.0)
        }
    }

    /// `exp(rate t) cos(omega t + phase)`
    pub fn cos(omega: f64, phase: f64, rate: f64) -> Self {
        Factor {
            c: Complex64::from_polar(1.0, phase),
            z: Complex64::new(rate, omega),
            ..Self::constant(1.0)
        }
    }

    pub fn with_poly(self, coef: Vec<f64>) -> Self {
        Factor { poly: coef, ..self }
    }

    fn poly_deriv(&self, j: usize, s: f64) -> f64 {
        if j >= self.poly.len() {
            return 0.0;
        }
        let mut acc = 0.0;
        for (i, c) in self.poly.iter().enumerate().skip(j).rev() {
            let fall = (0..j).fold(1.0, |p, r| p * (i - r) as f64);
            acc = acc * s + c * fall;
        }
        acc
    }

    /// k-th derivative at t.
    pub fn deriv(&self, k: usize, t: f64) -> f64 {
        let s = t - self.shift;
        let e = self.c * (self.z * t).exp();
        let top = k.min(self.poly.len().saturating_sub(1));
        (0..=top)
            .map(|j| binomial(k, j) * self.poly_deriv(j, s) * (e * self.z.powu((k - j) as u32)).re)
            .sum()
    }

    /// Mirror image `t -> 2 c - t`.
    fn reflect(&self, center: f64) -> Self {
        let n = self.poly.len();
        // poly(2c - t - shift) = poly(-(t - (2c - shift)))
        let coef: Vec<f64> =
            (0..n).map(|i| if i % 2 == 0 { self.poly[i] } else { -self.poly[i] }).collect();
        Factor {
            poly: coef,
            shift: 2.0 * center - self.shift,
            c: self.c * (self.z * 2.0 * center).exp(),
            z: -self.z,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub fx: Factor,
    pub fy: Factor,
}

/// Sum of separable terms `coef * fx(x) * fy(y)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Field {
    pub terms: Vec<Term>,
}

impl Field {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn term(mut self, coef: f64, fx: Factor, fy: Factor) -> Self {
        self.terms.push(Term { coef, fx, fy });
        self
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.terms.iter_mut().for_each(|t| t.coef *= s);
        self
    }

    pub fn deriv(&self, m: usize, n: usize, x: f64, y: f64) -> f64 {
        self.terms.iter().map(|t| t.coef * t.fx.deriv(m, x) * t.fy.deriv(n, y)).sum()
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.deriv(0, 0, x, y)
    }

    /// The field `(x, y) -> self(2 cx - x, y)`.
    pub fn reflect_x(&self, cx: f64) -> Field {
        Field {
            terms: self
                .terms
                .iter()
                .map(|t| Term { coef: t.coef, fx: t.fx.reflect(cx), fy: t.fy.clone() })
                .collect(),
        }
    }

    /// Polynomial `Σ c_{i,j} (x - x0)^i (y - y0)^j`.
    pub fn polynomial(coefs: &[(usize, usize, f64)], x0: f64, y0: f64) -> Field {
        coefs.iter().fold(Field::new(), |f, &(i, j, c)| {
            f.term(c, Factor::monomial(i, x0), Factor::monomial(j, y0))
        })
    }
}

/// Coefficients and derivative oracles of a cross-interface problem.
pub trait Problem: Sync {
    fn name(&self) -> &str;
    fn domain(&self) -> Domain;
    fn coefficients(&self) -> [f64; 4];

    /// `∂^{m+n} u_p / ∂x^m ∂y^n` of branch `p` (1..4) at (x, y).
    fn u(&self, p: usize, m: usize, n: usize, x: f64, y: f64) -> f64;

    fn f(&self, p: usize, m: usize, n: usize, x: f64, y: f64) -> f64 {
        -self.coefficients()[p - 1] * (self.u(p, m + 2, n, x, y) + self.u(p, m, n + 2, x, y))
    }

    /// n-th derivative of the solution jump on segment `s` at arc parameter `t`
    /// (y for segments 1, 2; x for segments 3, 4).
    fn phi(&self, s: usize, n: usize, t: f64) -> f64 {
        let d = self.domain();
        let (plus, minus) = segment_pair(s);
        if s <= 2 {
            self.u(plus, 0, n, d.xi, t) - self.u(minus, 0, n, d.xi, t)
        } else {
            self.u(plus, n, 0, t, d.zeta) - self.u(minus, n, 0, t, d.zeta)
        }
    }

    /// n-th derivative of the flux jump on segment `s`.
    fn psi(&self, s: usize, n: usize, t: f64) -> f64 {
        let d = self.domain();
        let a = self.coefficients();
        let (plus, minus) = segment_pair(s);
        if s <= 2 {
            a[plus - 1] * self.u(plus, 1, n, d.xi, t) - a[minus - 1] * self.u(minus, 1, n, d.xi, t)
        } else {
            a[plus - 1] * self.u(plus, n, 1, t, d.zeta) - a[minus - 1] * self.u(minus, n, 1, t, d.zeta)
        }
    }

    /// Boundary data, using the positive-side branch on interface points.
    fn g(&self, x: f64, y: f64) -> f64 {
        let d = self.domain();
        self.u(stored_subdomain(x, y, d.xi, d.zeta), 0, 0, x, y)
    }
}

/// (plus, minus) subdomains of segment `s`; jumps are `u_plus - u_minus`.
pub fn segment_pair(s: usize) -> (usize, usize) {
    match s {
        1 => (2, 1),
        2 => (3, 4),
        3 => (2, 3),
        _ => (1, 4),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub domain: Domain,
    pub a: [f64; 4],
    pub branches: [Field; 4],
}

impl Problem for ProblemSpec {
    fn name(&self) -> &str {
        &self.name
    }

    fn domain(&self) -> Domain {
        self.domain
    }

    fn coefficients(&self) -> [f64; 4] {
        self.a
    }

    fn u(&self, p: usize, m: usize, n: usize, x: f64, y: f64) -> f64 {
        self.branches[p - 1].deriv(m, n, x, y)
    }
}

impl ProblemSpec {
    /// Mirror the whole problem about `x = xi`: subdomains 1 <-> 2 and 3 <-> 4.
    pub fn reflect_x(&self) -> ProblemSpec {
        let xi = self.domain.xi;
        let b = &self.branches;
        let d = self.domain;
        ProblemSpec {
            name: format!("{}-reflected", self.name),
            domain: Domain { l1: 2.0 * xi - d.l2, l2: 2.0 * xi - d.l1, ..d },
            a: [self.a[1], self.a[0], self.a[3], self.a[2]],
            branches: [b[1].reflect_x(xi), b[0].reflect_x(xi), b[3].reflect_x(xi), b[2].reflect_x(xi)],
        }
    }
}

fn unit(xi: f64, zeta: f64) -> Domain {
    Domain { l1: 0.0, l2: 1.0, l3: 0.0, l4: 1.0, xi, zeta }
}

fn spec(name: &str, domain: Domain, a: [f64; 4], branches: [Field; 4]) -> ProblemSpec {
    ProblemSpec { name: name.to_string(), domain, a, branches }
}

fn one() -> Factor {
    Factor::constant(1.0)
}

fn ex41() -> ProblemSpec {
    let w = 2.0 * PI;
    // -sin(2 pi x) e^{-y}, -sin(2 pi (1 - x)) e^{-y}, -sin(2 pi (1 - y)) e^{-y}, -sin(2 pi y) e^{-y}
    let left = (Factor::sin(w, 0.0, 0.0), Factor::exp(-1.0));
    let right = (Factor::sin(-w, w, 0.0), Factor::exp(-1.0));
    let top = Factor::sin(-w, w, -1.0);
    let bottom = Factor::sin(w, 0.0, -1.0);
    let b = |x: &(Factor, Factor), y: &Factor| {
        Field::new().term(-1.0, x.0.clone(), x.1.clone()).term(-1.0, one(), y.clone())
    };
    spec(
        "ex41",
        unit(0.5, 0.5),
        [1e-5, 1e5, 1e-5, 1e5],
        [b(&left, &top), b(&right, &top), b(&right, &bottom), b(&left, &bottom)],
    )
}

fn ex42() -> ProblemSpec {
    let cube = vec![0.0, 0.0, 0.0, 1.0];
    let rev_cube = vec![1.0, -3.0, 3.0, -1.0];
    let ex = Factor::exp(-1.0);
    let ey = Factor::exp(1.0);
    // (X(x) + Y(y)) e^{-x+y}
    let b = |xc: &Vec<f64>, yc: &Vec<f64>| {
        Field::new()
            .term(1.0, ex.clone().with_poly(xc.clone()), ey.clone())
            .term(1.0, ex.clone(), ey.clone().with_poly(yc.clone()))
    };
    spec(
        "ex42",
        unit(0.5, 0.5),
        [1e7, 1e-3, 1e4, 1e-6],
        [b(&cube, &rev_cube), b(&rev_cube, &rev_cube), b(&rev_cube, &cube), b(&cube, &cube)],
    )
}

fn ex43() -> ProblemSpec {
    let a = [1e-4, 1e5, 2e-4, 1e6];
    let w = 8.0 * PI;
    let base = Field::new().term(1.0, Factor::sin(w, 0.0, 0.0), Factor::sin(w, 0.0, 0.0));
    spec("ex43", unit(0.25, 0.125), a, a.map(|ap| base.clone().scaled(1.0 / ap)))
}

fn ex44() -> ProblemSpec {
    let u1 = Field::new().term(1.0, Factor::cos(5.0, 0.0, 0.0), Factor::cos(5.0, 0.0, 0.0));
    let u2 = Field::new().term(1.0, Factor::cos(12.0, 0.0, -1.0), Factor::exp(1.0));
    let u3 = Field::new().term(1.0, Factor::sin(5.0, 0.0, 0.0), Factor::cos(5.0, 0.0, 0.0));
    let u4 = Field::new().term(1.0, Factor::exp(1.0), Factor::sin(12.0, 0.0, -1.0));
    spec("ex44", unit(PI / 5.0, PI / 8.0), [1e4, 1e-4, 1e4, 1e-4], [u1, u2, u3, u4])
}

fn ex45() -> ProblemSpec {
    let sy = Field::new().term(1.0, one(), Factor::sin(16.0, 0.0, 0.0));
    let cx = Field::new().term(1.0, Factor::cos(16.0, 0.0, 0.0), one());
    spec("ex45", unit(PI / 4.0, PI / 10.0), [1e4, 1e-6, 1e5, 1e-5], [sy.clone(), cx.clone(), sy, cx])
}

fn ex46() -> ProblemSpec {
    let a = [1e-4, 1e5, 1e-4, 1e6];
    let s = |w: f64| Factor::sin(w, 0.0, 0.0);
    let c = |w: f64| Factor::cos(w, 0.0, 0.0);
    // sin(4(x ± y)) = sin4x cos4y ± cos4x sin4y ; cos(2(x ∓ y)) = cos2x cos2y ± sin2x sin2y
    let u1 = Field::new().term(1.0, s(4.0), c(4.0)).term(1.0, c(4.0), s(4.0));
    let u2 = Field::new().term(1.0, c(2.0), c(2.0)).term(1.0, s(2.0), s(2.0));
    let u3 = Field::new().term(1.0, s(4.0), c(4.0)).term(-1.0, c(4.0), s(4.0));
    let u4 = Field::new().term(1.0, c(2.0), c(2.0)).term(-1.0, s(2.0), s(2.0));
    spec(
        "ex46",
        unit(PI / 6.0, PI / 8.0),
        a,
        [u1.scaled(1.0 / a[0]), u2.scaled(1.0 / a[1]), u3.scaled(1.0 / a[2]), u4.scaled(1.0 / a[3])],
    )
}

/// Smooth branches with nonzero jumps and moderate coefficients, oscillating
/// fast enough that truncation errors stay above roundoff on desk-scale grids.
fn audit_branches() -> [Field; 4] {
    [
        Field::new().term(1.0, Factor::sin(11.0, 0.3, 0.0), Factor::cos(9.0, -0.2, 0.0)),
        Field::new().term(1.0, Factor::cos(12.0, -0.5, 0.4), Factor::sin(10.0, 0.7, 0.0)),
        Field::new().term(1.0, Factor::sin(10.0, 1.1, 0.0), Factor::cos(13.0, 0.4, -0.3)),
        Field::new().term(1.0, Factor::cos(9.0, 0.9, 0.0), Factor::sin(12.0, -0.6, 0.2)),
    ]
}

const AUDIT_A: [f64; 4] = [2.0, 0.5, 3.0, 1.25];

fn audit_aligned() -> ProblemSpec {
    spec("audit-aligned", unit(0.5, 0.5), AUDIT_A, audit_branches())
}

fn audit_unaligned() -> ProblemSpec {
    spec("audit-unaligned", unit(1.0 / 3.0, 1.0 / 3.0), AUDIT_A, audit_branches())
}

fn harmonic() -> ProblemSpec {
    let u = Field::polynomial(&[(2, 0, 1.0), (0, 2, -1.0)], 0.0, 0.0);
    spec("harmonic", unit(0.5, 0.5), [1.0; 4], [u.clone(), u.clone(), u.clone(), u])
}

pub const PROBLEM_NAMES: [&str; 9] = [
    "ex41",
    "ex42",
    "ex43",
    "ex44",
    "ex45",
    "ex46",
    "audit-aligned",
    "audit-unaligned",
    "harmonic",
];

pub fn describe(name: &str) -> &'static str {
    match name {
        "ex41" => "aligned cross at (1/2, 1/2), a ratio 1e10, continuous solution",
        "ex42" => "aligned cross at (1/2, 1/2), polynomial-exponential branches",
        "ex43" => "aligned cross at (1/4, 1/8), u = sin(8 pi x) sin(8 pi y) / a",
        "ex44" => "unaligned cross at (pi/5, pi/8), discontinuous solution",
        "ex45" => "unaligned cross at (pi/4, pi/10), frequency-16 branches",
        "ex46" => "unaligned cross at (pi/6, pi/8), u scaled by 1/a",
        "audit-aligned" => "moderate coefficients, high-frequency branches, cross at (1/2, 1/2)",
        "audit-unaligned" => "moderate coefficients, high-frequency branches, cross at (1/3, 1/3)",
        "harmonic" => "a = 1, u = x^2 - y^2 on every branch",
        _ => "",
    }
}

pub fn make_example(name: &str) -> Result<ProblemSpec> {
    Ok(match name {
        "ex41" => ex41(),
        "ex42" => ex42(),
        "ex43" => ex43(),
        "ex44" => ex44(),
        "ex45" => ex45(),
        "ex46" => ex46(),
        "audit-aligned" => audit_aligned(),
        "audit-unaligned" => audit_unaligned(),
        "harmonic" => harmonic(),
        _ => return Err(Error::UnknownProblem(name.to_string())),
    })
}

/// Piecewise polynomial problem: branch `p` is `Σ c (x - xi)^i (y - zeta)^j`
/// over the listed monomials, all of total degree at most `degree`.
pub fn make_piecewise_polynomial(
    degree: usize,
    a: [f64; 4],
    domain: Domain,
    branches: [Vec<(usize, usize, f64)>; 4],
) -> Result<ProblemSpec> {
    if degree > 7 {
        return Err(Error::InvalidOption(format!("polynomial degree {degree} exceeds 7")));
    }
    if let Some(&(i, j, _)) = branches.iter().flatten().find(|(i, j, _)| i + j > degree) {
        return Err(Error::InvalidOption(format!("monomial x^{i} y^{j} exceeds degree {degree}")));
    }
    if let Some(v) = a.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::NonPositiveCoefficient(*v));
    }
    let fields = branches.map(|b| Field::polynomial(&b, domain.xi, domain.zeta));
    Ok(spec(&format!("poly{degree}"), domain, a, fields))
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub checks: usize,
    pub worst: f64,
    pub worst_label: String,
}

/// Kronecker sequence in [0, 1)^2.
fn sample(i: usize) -> (f64, f64) {
    const G1: f64 = 0.754_877_666_246_692_7;
    const G2: f64 = 0.569_840_290_998_053_3;
    let k = (i + 1) as f64;
    ((0.5 + G1 * k).fract(), (0.5 + G2 * k).fract())
}

/// Finite-difference spot-check of a problem's oracles.
///
/// Checks `f` against `-a Δu` (one extra derivative by central differences),
/// the jump oracles against differences of branch values and one-sided
/// difference quotients, and derivative orders of φ and ψ against each other.
pub fn verify_spec(problem: &dyn Problem, samples: usize) -> Result<VerifyReport> {
    const STEP: f64 = 1e-6;
    const TOL: f64 = 1e-5;
    let d = problem.domain();
    let a = problem.coefficients();
    let mut report = VerifyReport { checks: 0, worst: 0.0, worst_label: String::new() };
    let mut record = |label: String, got: f64, want: f64, scale: f64| {
        let err = (got - want).abs() / scale.max(want.abs()).max(1e-300);
        report.checks += 1;
        if err > report.worst || err.is_nan() {
            report.worst = if err.is_nan() { f64::INFINITY } else { err };
            report.worst_label = label;
        }
    };
    let cd = |g: &dyn Fn(f64) -> f64, t: f64| (g(t + STEP) - g(t - STEP)) / (2.0 * STEP);
    for i in 0..samples {
        let (sx, sy) = sample(i);
        let p = 1 + i % 4;
        let (x0, x1) = if p == 1 || p == 4 { (d.l1, d.xi) } else { (d.xi, d.l2) };
        let (y0, y1) = if p <= 2 { (d.zeta, d.l4) } else { (d.l3, d.zeta) };
        let x = x0 + (x1 - x0) * (0.02 + 0.96 * sx);
        let y = y0 + (y1 - y0) * (0.02 + 0.96 * sy);
        let m = i % 3;
        let n = (i / 3) % 3;
        let fdx = cd(&|t| problem.u(p, m + 1, n, t, y), x);
        let fdy = cd(&|t| problem.u(p, m, n + 1, x, t), y);
        let want = -a[p - 1] * (fdx + fdy);
        let scale = a[p - 1] * (problem.u(p, m + 2, n, x, y).abs() + problem.u(p, m, n + 2, x, y).abs());
        record(format!("f{p}^({m},{n}) at ({x:.4}, {y:.4})"), problem.f(p, m, n, x, y), want, scale);

        let s = 1 + (i / 4) % 4;
        let (plus, minus) = segment_pair(s);
        let t = if s == 1 {
            d.zeta + (d.l4 - d.zeta) * (0.02 + 0.96 * sy)
        } else if s == 2 {
            d.l3 + (d.zeta - d.l3) * (0.02 + 0.96 * sy)
        } else if s == 3 {
            d.xi + (d.l2 - d.xi) * (0.02 + 0.96 * sx)
        } else {
            d.l1 + (d.xi - d.l1) * (0.02 + 0.96 * sx)
        };
        let (px, py) = if s <= 2 { (d.xi, t) } else { (t, d.zeta) };
        let up = problem.u(plus, 0, 0, px, py);
        let um = problem.u(minus, 0, 0, px, py);
        record(format!("phi{s} at t = {t:.4}"), problem.phi(s, 0, t), up - um, up.abs() + um.abs());
        // One-sided difference quotients along the normal.
        let normal = |q: usize, sign: f64| {
            let step = sign * STEP;
            let v = |e: f64| {
                if s <= 2 {
                    problem.u(q, 0, 0, px + e, py)
                } else {
                    problem.u(q, 0, 0, px, py + e)
                }
            };
            (-3.0 * v(0.0) + 4.0 * v(step) - v(2.0 * step)) / (2.0 * step)
        };
        let gp = normal(plus, 1.0);
        let gm = normal(minus, -1.0);
        let want = a[plus - 1] * gp - a[minus - 1] * gm;
        record(
            format!("psi{s} at t = {t:.4}"),
            problem.psi(s, 0, t),
            want,
            // Branch values bound the roundoff of the one-sided quotients.
            a[plus - 1] * (gp.abs() + up.abs()) + a[minus - 1] * (gm.abs() + um.abs()),
        );
        let k = 1 + i % 6;
        let dphi = cd(&|r| problem.phi(s, k - 1, r), t);
        record(format!("phi{s}^({k}) at t = {t:.4}"), problem.phi(s, k, t), dphi, dphi.abs().max(1.0));
        let dpsi = cd(&|r| problem.psi(s, k - 1, r), t);
        let pscale = a[plus - 1].max(a[minus - 1]) * (problem.u(plus, 1, k, px, py).abs() + problem.u(minus, 1, k, px, py).abs() + problem.u(plus, k, 1, px, py).abs() + problem.u(minus, k, 1, px, py).abs());
        record(format!("psi{s}^({k}) at t = {t:.4}"), problem.psi(s, k, t), dpsi, pscale.max(dpsi.abs()));
    }
    if report.worst > TOL {
        return Err(Error::InconsistentSpec(format!(
            "{} (relative error {:.3e})",
            report.worst_label, report.worst
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_derivatives() {
        let f = Factor::sin(3.0, 0.4, -0.5);
        let t = 0.7;
        let v = |t: f64| (-0.5 * t).exp() * (3.0 * t + 0.4).sin();
        assert!((f.deriv(0, t) - v(t)).abs() < 1e-15);
        let h = 1e-5;
        let fd = (v(t + h) - v(t - h)) / (2.0 * h);
        assert!((f.deriv(1, t) - fd).abs() < 1e-8);
        let p = Factor::monomial(3, 0.5);
        assert!((p.deriv(0, 1.5) - 1.0).abs() < 1e-15);
        assert!((p.deriv(2, 1.5) - 6.0).abs() < 1e-15);
        assert_eq!(p.deriv(4, 1.5), 0.0);
        let q = Factor::exp(2.0).with_poly(vec![0.0, 1.0]);
        // d/dt t e^{2t} = (1 + 2t) e^{2t}
        assert!((q.deriv(1, 0.3) - 1.6 * 0.6_f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn examples_match_printed_data() {
        let e = make_example("ex41").unwrap();
        assert_eq!(e.a, [1e-5, 1e5, 1e-5, 1e5]);
        for s in 1..=4 {
            assert!(e.phi(s, 0, 0.3).abs() < 1e-14);
        }
        let e = make_example("ex43").unwrap();
        assert_eq!((e.domain.xi, e.domain.zeta, e.a[2]), (0.25, 0.125, 2e-4));
        let e = make_example("ex44").unwrap();
        assert!(e.phi(1, 0, 0.6).abs() > 1e-3);
        let (x, y) = (0.3, 0.2);
        assert!((e.u(4, 0, 0, x, y) - (12.0 * y).sin() * (x - y).exp()).abs() < 1e-15);
        assert!(make_example("nope").is_err());
    }

    #[test]
    fn reflection_maps_branches() {
        let e = make_example("ex44").unwrap();
        let r = e.reflect_x();
        let xi = e.domain.xi;
        let (x, y) = (0.9, 0.7);
        assert!((r.u(1, 0, 0, 2.0 * xi - x, y) - e.u(2, 0, 0, x, y)).abs() < 1e-13);
        assert!((r.u(1, 1, 0, 2.0 * xi - x, y) + e.u(2, 1, 0, x, y)).abs() < 1e-12);
    }
}
