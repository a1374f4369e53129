//! Convergence studies, consistency audits and report formatting.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::assembly::{assemble, row_residual, validate_m_matrix, MMatrixReport, Scheme};
use crate::error::{Error, Result};
use crate::mesh::{build_grid, Grid};
use crate::problems::Problem;
use crate::solve::{solve, Solution, SolveOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub scheme: Scheme,
    pub jmin: u32,
    pub jmax: u32,
    pub solver: SolveOptions,
    /// Free parameter of the order-3 stencils (default position in the feasible interval if None).
    pub rho: Option<f64>,
    /// Fill the timing columns; off by default so reports are byte-reproducible.
    pub record_timings: bool,
}

impl StudyConfig {
    pub fn new(scheme: Scheme, jmin: u32, jmax: u32) -> Self {
        StudyConfig {
            scheme,
            jmin,
            jmax,
            solver: SolveOptions::default(),
            rho: None,
            record_timings: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.jmin < 2 || self.jmax < self.jmin || self.jmax > 12 {
            return Err(Error::InvalidOption(format!(
                "J range {}..{} must satisfy 2 <= jmin <= jmax <= 12",
                self.jmin, self.jmax
            )));
        }
        self.solver.validate()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelResult {
    pub j: u32,
    pub h: f64,
    pub eps_l2: f64,
    pub err_max: f64,
    pub order_l2: Option<f64>,
    pub order_max: Option<f64>,
    pub assemble_ms: Option<f64>,
    pub solve_ms: Option<f64>,
    pub backward_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub problem: String,
    pub scheme: Scheme,
    pub levels: Vec<LevelResult>,
    /// Level at which the study stopped, with the error message.
    pub failure: Option<(u32, String)>,
}

impl ConvergenceReport {
    pub fn level(&self, j: u32) -> Option<&LevelResult> {
        self.levels.iter().find(|l| l.j == j)
    }
}

/// Grid with `N1 = 2^J` (and `N2 = N0 N1`).
pub fn grid_for(problem: &dyn Problem, j: u32) -> Result<Grid> {
    build_grid(problem.domain(), 1usize << j)
}

/// Exact solution at a grid node, using the stored-branch convention.
pub fn exact_at(problem: &dyn Problem, grid: &Grid, i: usize, j: usize) -> f64 {
    problem.u(grid.stored_subdomain(i, j), 0, 0, grid.x(i), grid.y(j))
}

/// Relative l2 error and max-norm error over all nodes `0 <= i <= N1`, `0 <= j <= N2`.
pub fn error_norms(problem: &dyn Problem, grid: &Grid, sol: &Solution) -> (f64, f64) {
    let h2 = grid.h * grid.h;
    let (mut num, mut den, mut max) = (0.0, 0.0, 0.0f64);
    for j in 0..=grid.n2 {
        for i in 0..=grid.n1 {
            let u = exact_at(problem, grid, i, j);
            let e = sol.at(i, j) - u;
            num += h2 * e * e;
            den += h2 * u * u;
            max = max.max(e.abs());
        }
    }
    ((num / den).sqrt(), max)
}

pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Solve one level and return the solution with its timings.
pub fn solve_level(
    problem: &dyn Problem,
    config: &StudyConfig,
    j: u32,
) -> Result<(Grid, Solution, f64, f64)> {
    let grid = grid_for(problem, j)?;
    let t0 = Instant::now();
    let sys = assemble(problem, &grid, config.scheme, config.rho)?;
    let t1 = Instant::now();
    let sol = solve(&sys, &config.solver)?;
    let t2 = Instant::now();
    let ms = |a: Instant, b: Instant| (b - a).as_secs_f64() * 1e3;
    Ok((grid, sol, ms(t0, t1), ms(t1, t2)))
}

pub fn run_convergence(problem: &dyn Problem, config: &StudyConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let mut report = ConvergenceReport {
        problem: problem.name().to_string(),
        scheme: config.scheme,
        levels: Vec::new(),
        failure: None,
    };
    for j in config.jmin..=config.jmax {
        let (grid, sol, ta, ts) = match solve_level(problem, config, j) {
            Ok(v) => v,
            Err(e) => {
                report.failure = Some((j, e.to_string()));
                break;
            }
        };
        let (eps, max) = error_norms(problem, &grid, &sol);
        let prev = report.levels.last();
        report.levels.push(LevelResult {
            j,
            h: grid.h,
            eps_l2: eps,
            err_max: max,
            order_l2: prev.map(|p| observed_order(p.eps_l2, eps)),
            order_max: prev.map(|p| observed_order(p.err_max, max)),
            assemble_ms: config.record_timings.then_some(ta),
            solve_ms: config.record_timings.then_some(ts),
            backward_error: sol.backward_error,
        });
    }
    Ok(report)
}

/// Scientific notation with four significant digits and a two-digit exponent,
/// e.g. `2.852E-09`.
pub fn fmt_sci(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.3E}");
    let (mant, exp) = s.split_once('E').expect("exponent");
    let e: i32 = exp.parse().expect("integer exponent");
    format!("{mant}E{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
}

pub fn fmt_order(v: Option<f64>) -> String {
    v.map(|o| format!("{o:.1}")).unwrap_or_default()
}

pub const CSV_HEADER: [&str; 8] =
    ["J", "h", "eps_l2", "order_l2", "err_max", "order_max", "assemble_ms", "solve_ms"];

pub fn to_csv(report: &ConvergenceReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(io)?;
    for l in &report.levels {
        let ms = |v: Option<f64>| v.map(|t| format!("{t:.1}")).unwrap_or_default();
        w.write_record([
            l.j.to_string(),
            format!("1/{}", 1u64 << l.j),
            fmt_sci(l.eps_l2),
            fmt_order(l.order_l2),
            fmt_sci(l.err_max),
            fmt_order(l.order_max),
            ms(l.assemble_ms),
            ms(l.solve_ms),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn to_text(report: &ConvergenceReport) -> String {
    let mut s = format!("problem {}  scheme {}\n", report.problem, report.scheme);
    s.push_str(&format!(
        "{:>3} {:>7} {:>11} {:>6} {:>11} {:>6}",
        "J", "h", "eps_l2", "order", "max", "order"
    ));
    let timed = report.levels.iter().any(|l| l.solve_ms.is_some());
    if timed {
        s.push_str(&format!(" {:>10} {:>10}", "asm_ms", "solve_ms"));
    }
    s.push('\n');
    for l in &report.levels {
        s.push_str(&format!(
            "{:>3} {:>7} {:>11} {:>6} {:>11} {:>6}",
            l.j,
            format!("1/{}", 1u64 << l.j),
            fmt_sci(l.eps_l2),
            fmt_order(l.order_l2),
            fmt_sci(l.err_max),
            fmt_order(l.order_max)
        ));
        if timed {
            s.push_str(&format!(
                " {:>10.1} {:>10.1}",
                l.assemble_ms.unwrap_or(0.0),
                l.solve_ms.unwrap_or(0.0)
            ));
        }
        s.push('\n');
    }
    if let Some((j, msg)) = &report.failure {
        s.push_str(&format!("stopped at J = {j}: {msg}\n"));
    }
    s
}

/// Per-class truncation errors across levels.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditClass {
    pub case: String,
    /// Stated consistency order of the class.
    pub order: usize,
    /// (J, max_row |h^{-s} (L_h u - F)|)
    pub residuals: Vec<(u32, f64)>,
    /// Least-squares slope of -log2(residual) against J.
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub problem: String,
    pub scheme: Scheme,
    pub classes: Vec<AuditClass>,
}

impl AuditReport {
    pub fn class(&self, case: &str) -> Option<&AuditClass> {
        self.classes.iter().find(|c| c.case == case)
    }
}

pub fn fit_slope(points: &[(u32, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return f64::NAN;
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| -p.1.log2()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Max row residual per stencil case and J, with fitted slopes.  `filter`
/// restricts the report to the listed case labels.
pub fn run_consistency_audit(
    problem: &dyn Problem,
    scheme: Scheme,
    jmin: u32,
    jmax: u32,
    filter: Option<&[&str]>,
) -> Result<AuditReport> {
    StudyConfig::new(scheme, jmin, jmax).validate()?;
    let mut table: BTreeMap<&'static str, (usize, Vec<(u32, f64)>)> = BTreeMap::new();
    for j in jmin..=jmax {
        let grid = grid_for(problem, j)?;
        let mut level: BTreeMap<&'static str, (usize, f64)> = BTreeMap::new();
        for jj in 1..grid.n2 {
            for ii in 1..grid.n1 {
                let r = row_residual(problem, &grid, ii, jj, scheme, None)?;
                let label = r.stencil.case.label();
                if filter.is_some_and(|f| !f.contains(&label)) {
                    continue;
                }
                let e = level.entry(label).or_insert((r.stencil.consistency_order, 0.0));
                e.1 = e.1.max(r.residual.abs());
            }
        }
        for (label, (order, res)) in level {
            table.entry(label).or_insert((order, Vec::new())).1.push((j, res));
        }
    }
    let classes = table
        .into_iter()
        .map(|(case, (order, residuals))| AuditClass {
            case: case.to_string(),
            order,
            slope: fit_slope(&residuals),
            residuals,
        })
        .collect();
    Ok(AuditReport { problem: problem.name().to_string(), scheme, classes })
}

pub fn audit_to_text(report: &AuditReport) -> String {
    let mut s = format!("problem {}  scheme {}\n", report.problem, report.scheme);
    s.push_str(&format!("{:<14} {:>5} {:>6}  residuals (J: max |h^-s (L_h u - F)|)\n", "case", "order", "slope"));
    for c in &report.classes {
        let res: Vec<String> = c.residuals.iter().map(|(j, r)| format!("{j}: {}", fmt_sci(*r))).collect();
        s.push_str(&format!("{:<14} {:>5} {:>6.2}  {}\n", c.case, c.order, c.slope, res.join("  ")));
    }
    s
}

pub fn run_mmatrix_audit(problem: &dyn Problem, scheme: Scheme, j: u32) -> Result<MMatrixReport> {
    let grid = grid_for(problem, j)?;
    let sys = assemble(problem, &grid, scheme, None)?;
    validate_m_matrix(&sys)
}

pub fn mmatrix_to_text(problem: &str, j: u32, r: &MMatrixReport) -> String {
    let mut s = format!(
        "problem {problem}  scheme {}  mode {}  J = {j}\nrows {}  sign failures {}  sum failures {}\n",
        r.scheme,
        r.mode,
        r.rows.len(),
        r.sign_failures,
        r.sum_failures
    );
    s.push_str(&format!(
        "worst positive off-centre / max|C|: {}  worst |sum C| / sum |C|: {}\n",
        fmt_sci(r.worst_sign),
        fmt_sci(r.worst_sum)
    ));
    for row in r.rows.iter().filter(|row| !(row.sign_ok && row.sum_ok)).take(20) {
        s.push_str(&format!(
            "  ({}, {}) {} [{}]: sign {} sum {}\n",
            row.i,
            row.j,
            row.class,
            row.case,
            fmt_sci(row.sign_violation),
            fmt_sci(row.sum_violation)
        ));
    }
    s.push_str(if r.verdict { "verdict: M-matrix conditions hold\n" } else { "verdict: violated\n" });
    s
}
