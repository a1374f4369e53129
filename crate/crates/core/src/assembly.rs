//! Global system assembly with Dirichlet elimination and M-matrix checks.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::{Grid, InterfaceMode, PointClass};
use crate::problems::Problem;
use crate::rhs::{expected_subdomain, row_load};
use crate::stencils::{
    cross_stencil, gamma_stencil, interior_stencil, near_cross_order2, near_cross_order4,
    near_gamma_order3, near_gamma_order4, DerivedStencil,
};
use crate::taylor::StencilWeights;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Order-6/7 stencils on aligned grids, order-4 near-interface stencils otherwise.
    HighOrder,
    /// Order-3/2 near-interface stencils satisfying the sign condition.
    MMatrix,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::HighOrder => write!(f, "high"),
            Scheme::MMatrix => write!(f, "mmatrix"),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "high" | "high-order" => Ok(Scheme::HighOrder),
            "mmatrix" | "m-matrix" => Ok(Scheme::MMatrix),
            _ => Err(Error::InvalidOption(format!("unknown scheme `{s}`"))),
        }
    }
}

/// Stencil for a non-boundary point.  Aligned grids use the same stencils
/// for both schemes; they already satisfy the sign and summation conditions.
pub fn stencil_for(
    class: &PointClass,
    scheme: Scheme,
    a: &[f64; 4],
    rho: Option<f64>,
) -> Result<DerivedStencil> {
    match *class {
        PointClass::Boundary => Err(Error::InvalidOption("boundary points carry no stencil".into())),
        PointClass::Interior(_) => Ok(interior_stencil()),
        PointClass::OnGamma(p) => gamma_stencil(p, a),
        PointClass::OnCross => cross_stencil(a),
        PointClass::NearGammaV { w, segment, .. } | PointClass::NearGammaH { w, segment, .. } => {
            let frame = class.frame();
            let (minus, plus, _, _) = frame.line_sides(segment);
            let (am, ap) = (a[minus - 1], a[plus - 1]);
            match scheme {
                Scheme::HighOrder => near_gamma_order4(frame, w, am, ap),
                Scheme::MMatrix => near_gamma_order3(frame, w, am, ap, rho),
            }
        }
        PointClass::NearCross { quadrant, w1, w2 } => match scheme {
            Scheme::HighOrder => near_cross_order4(quadrant, w1, w2, a),
            Scheme::MMatrix => near_cross_order2(quadrant, w1, w2, a),
        },
    }
}

/// Jump-data offset `u_p - u_stored` at grid point (i, j).  Nonzero only when
/// the point lies on an aligned interface line and `p` is a branch other than
/// the stored (positive-side) one.
pub fn branch_offset(problem: &dyn Problem, grid: &Grid, i: usize, j: usize, p: usize) -> f64 {
    let Some((ci, cj)) = grid.cross_index() else {
        return 0.0;
    };
    let stored = grid.stored_subdomain(i, j);
    if p == stored {
        return 0.0;
    }
    let (x, y) = (grid.x(i), grid.y(j));
    let d = problem.domain();
    // Offsets relative to the stored branch at this point.
    let mut off = [0.0; 4];
    match (i == ci, j == cj) {
        (true, true) => {
            let p1 = problem.phi(1, 0, d.zeta);
            let p3 = problem.phi(3, 0, d.xi);
            let p4 = problem.phi(4, 0, d.xi);
            off = [-p1, 0.0, -p3, -p1 - p4];
        }
        (true, false) if j > cj => off[0] = -problem.phi(1, 0, y),
        (true, false) => off[3] = -problem.phi(2, 0, y),
        (false, true) if i > ci => off[2] = -problem.phi(3, 0, x),
        (false, true) => off[3] = -problem.phi(4, 0, x),
        (false, false) => return 0.0,
    }
    off[p - 1] - off[stored - 1]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RowInfo {
    pub i: usize,
    pub j: usize,
    pub class: PointClass,
    pub stencil: DerivedStencil,
    /// Global (pre-elimination) coefficients.
    pub weights: StencilWeights,
}

/// Row-compressed system `A u = b` over the interior unknowns.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSystem {
    pub grid: Grid,
    pub scheme: Scheme,
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
    pub rhs: Vec<f64>,
    pub rows: Vec<RowInfo>,
    /// Full-grid array (index `j (n1 + 1) + i`) holding g on boundary nodes.
    pub boundary: Vec<f64>,
}

impl SparseSystem {
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|e| e.0 == c).map_or(0.0, |e| e.1)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n).map(|r| self.row(r).map(|e| e.1.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Coordinate (triplet) text export, 1-based indices.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "% {} {} {}", self.n, self.n, self.vals.len())?;
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                writeln!(out, "{} {} {:.17e}", r + 1, c + 1, v)?;
            }
        }
        Ok(())
    }
}

/// Assemble the scheme on `grid`; `rho` selects the free parameter of the
/// order-3 near-interface stencils (see `RHO_DEFAULT_FRACTION` if None).
pub fn assemble(
    problem: &dyn Problem,
    grid: &Grid,
    scheme: Scheme,
    rho: Option<f64>,
) -> Result<SparseSystem> {
    grid.mode()?;
    let a = problem.coefficients();
    let n = grid.unknowns();
    let mut sys = SparseSystem {
        grid: *grid,
        scheme,
        n,
        row_ptr: Vec::with_capacity(n + 1),
        cols: Vec::with_capacity(9 * n),
        vals: Vec::with_capacity(9 * n),
        rhs: Vec::with_capacity(n),
        rows: Vec::with_capacity(n),
        boundary: vec![0.0; (grid.n1 + 1) * (grid.n2 + 1)],
    };
    for j in 0..=grid.n2 {
        for i in 0..=grid.n1 {
            if grid.is_boundary(i, j) {
                sys.boundary[j * (grid.n1 + 1) + i] =
                    problem.u(grid.stored_subdomain(i, j), 0, 0, grid.x(i), grid.y(j));
            }
        }
    }
    sys.row_ptr.push(0);
    for j in 1..grid.n2 {
        for i in 1..grid.n1 {
            let class = grid.classify(i, j)?;
            let st = stencil_for(&class, scheme, &a, rho)?;
            let load = row_load(problem, grid, i, j, &class, &st)?;
            debug_assert_eq!(load.scale_exponent, st.scale_exponent);
            let scale = grid.h.powi(-(st.scale_exponent as i32));
            let weights = st.global_weights();
            let mut b = load.value;
            // Offsets in column order (l outer) keep each row's columns sorted.
            for gl in -1..=1i32 {
                for gk in -1..=1i32 {
                    let v = weights.get(gk, gl);
                    if v == 0.0 {
                        continue;
                    }
                    let ni = (i as i64 + gk as i64) as usize;
                    let nj = (j as i64 + gl as i64) as usize;
                    let p = expected_subdomain(&class, st.frame, gk, gl);
                    b -= scale * v * branch_offset(problem, grid, ni, nj, p);
                    match grid.index(ni, nj) {
                        Some(col) => {
                            sys.cols.push(col);
                            sys.vals.push(scale * v);
                        }
                        None => {
                            let g = sys.boundary[nj * (grid.n1 + 1) + ni];
                            b -= scale * v * g;
                        }
                    }
                }
            }
            sys.row_ptr.push(sys.cols.len());
            sys.rhs.push(b);
            sys.rows.push(RowInfo { i, j, class, stencil: st, weights });
        }
    }
    Ok(sys)
}

/// Truncation error of one row applied to the exact solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RowResidual {
    pub i: usize,
    pub j: usize,
    pub class: PointClass,
    pub stencil: DerivedStencil,
    /// `h^{-s} (Σ C u - F)` with `u` taken from the branch each expansion assumes.
    pub residual: f64,
    /// `h^{-s} Σ |C| max |u|`, the magnitude of the terms being cancelled.
    pub scale: f64,
}

pub fn row_residual(
    problem: &dyn Problem,
    grid: &Grid,
    i: usize,
    j: usize,
    scheme: Scheme,
    rho: Option<f64>,
) -> Result<RowResidual> {
    let class = grid.classify(i, j)?;
    let st = stencil_for(&class, scheme, &problem.coefficients(), rho)?;
    let load = row_load(problem, grid, i, j, &class, &st)?;
    let weights = st.global_weights();
    let mut sum = crate::taylor::Sum::new();
    let mut umax: f64 = 0.0;
    for (gk, gl, v) in weights.entries() {
        let p = expected_subdomain(&class, st.frame, gk, gl);
        let x = grid.x(i) + gk as f64 * grid.h;
        let y = grid.y(j) + gl as f64 * grid.h;
        let u = problem.u(p, 0, 0, x, y);
        umax = umax.max(u.abs());
        sum.add(v * u);
    }
    let scale = grid.h.powi(-(st.scale_exponent as i32));
    sum.add(-load.value / scale);
    Ok(RowResidual {
        i,
        j,
        class,
        stencil: st,
        residual: scale * sum.value(),
        scale: scale * weights.abs_sum() * umax.max(f64::MIN_POSITIVE),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowCheck {
    pub i: usize,
    pub j: usize,
    pub class: &'static str,
    pub case: &'static str,
    pub sign_ok: bool,
    pub sum_ok: bool,
    /// Largest positive off-centre coefficient relative to max |C| (0 if none).
    pub sign_violation: f64,
    /// |Σ C| / Σ |C|.
    pub sum_violation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MMatrixReport {
    pub mode: InterfaceMode,
    pub scheme: Scheme,
    pub rows: Vec<RowCheck>,
    pub verdict: bool,
    pub sign_failures: usize,
    pub sum_failures: usize,
    pub worst_sign: f64,
    pub worst_sum: f64,
}

pub const SIGN_TOL: f64 = 1e-12;
pub const SUM_TOL: f64 = 1e-12;

pub fn check_stencil(c: &StencilWeights) -> (bool, bool, f64, f64) {
    let max = c.max_abs();
    let off = c
        .entries()
        .filter(|e| !(e.0 == 0 && e.1 == 0))
        .map(|e| e.2)
        .fold(f64::NEG_INFINITY, f64::max);
    let sign_violation = if max > 0.0 { (off / max).max(0.0) } else { 0.0 };
    let sign = c.get(0, 0) > 0.0 && sign_violation <= SIGN_TOL;
    let sum_violation = c.sum().abs() / c.abs_sum().max(f64::MIN_POSITIVE);
    (sign, sum_violation <= SUM_TOL, sign_violation, sum_violation)
}

/// Row-wise sign and summation conditions on the unassembled stencils.
pub fn validate_m_matrix(sys: &SparseSystem) -> Result<MMatrixReport> {
    let mut report = MMatrixReport {
        mode: sys.grid.mode()?,
        scheme: sys.scheme,
        rows: Vec::with_capacity(sys.rows.len()),
        verdict: true,
        sign_failures: 0,
        sum_failures: 0,
        worst_sign: 0.0,
        worst_sum: 0.0,
    };
    for row in &sys.rows {
        let (sign_ok, sum_ok, sv, uv) = check_stencil(&row.weights);
        report.sign_failures += usize::from(!sign_ok);
        report.sum_failures += usize::from(!sum_ok);
        report.worst_sign = report.worst_sign.max(sv);
        report.worst_sum = report.worst_sum.max(uv);
        report.rows.push(RowCheck {
            i: row.i,
            j: row.j,
            class: row.class.name(),
            case: row.stencil.case.label(),
            sign_ok,
            sum_ok,
            sign_violation: sv,
            sum_violation: uv,
        });
    }
    report.verdict = report.sign_failures == 0 && report.sum_failures == 0;
    Ok(report)
}
