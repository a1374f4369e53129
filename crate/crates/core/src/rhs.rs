//! Right-hand sides of the compact schemes.
//!
//! For a stencil `C` the discrete row reads `h^{-s} Σ C_{k,l} u(x_i + k h, y_j + l h) = F h^{-s}`
//! (s = 2 for interior points and 1 elsewhere).  `F` is assembled from
//! derivatives of the source term and of the two jump functions at a base
//! point: the grid point itself, its projection on the nearby line, or the
//! cross point.  All data passed to the load functions is expressed in the
//! canonical frame of the stencil; the builders at the bottom of this module
//! pull it from a [`Problem`] and carry it through the frame.

use crate::error::{Error, Result};
use crate::mesh::{Frame, Grid, PointClass};
use crate::problems::Problem;
use crate::stencils::{DerivedStencil, StencilCase};
use crate::taylor::{agg_quadrant, agg_vertical, eval_g, eval_h, floor_half, odd, sign_pow, KernelKind, StencilWeights, Sum, Which};

/// Values `v(m, n)` for all `m + n <= order`.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivTable {
    order: usize,
    data: Vec<f64>,
}

impl DerivTable {
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity((order + 1) * (order + 2) / 2);
        for d in 0..=order {
            for m in 0..=d {
                data.push(f(m, d - m));
            }
        }
        DerivTable { order, data }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        let d = m + n;
        assert!(d <= self.order, "derivative ({m}, {n}) beyond table order {}", self.order);
        self.data[d * (d + 1) / 2 + m]
    }

    pub fn require(&self, need: usize) -> Result<()> {
        check_order(self.order, need)
    }
}

fn check_order(have: usize, need: usize) -> Result<()> {
    if have < need {
        Err(Error::TableUnderfilled { have, need })
    } else {
        Ok(())
    }
}

/// Derivatives of a one-dimensional function, index = order.
fn require_series(v: &[f64], need: usize) -> Result<()> {
    check_order(v.len().saturating_sub(1), need)
}

#[derive(Clone, Debug, PartialEq)]
pub struct InteriorData {
    pub h: f64,
    pub a: f64,
    /// Source derivatives at the grid point, order >= 4.
    pub f: DerivTable,
}

/// Data for a point on or next to a vertical line in the canonical frame.
#[derive(Clone, Debug, PartialEq)]
pub struct LineData {
    pub w: f64,
    pub h: f64,
    pub a_minus: f64,
    pub a_plus: f64,
    pub f_minus: DerivTable,
    pub f_plus: DerivTable,
    /// `φ^{(n)}` at the base point, jump `u_plus - u_minus`.
    pub phi: Vec<f64>,
    /// `ψ^{(n)}`, jump `a_plus ∂x u_plus - a_minus ∂x u_minus`.
    pub psi: Vec<f64>,
}

/// Data for a point at or near the cross in the canonical frame (centre in
/// quadrant 2, cross at `(-w1 h, -w2 h)`); arrays are indexed by local
/// quadrant / segment number minus one.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossData {
    pub w1: f64,
    pub w2: f64,
    pub h: f64,
    pub a: [f64; 4],
    pub f: [DerivTable; 4],
    pub phi: [Vec<f64>; 4],
    pub psi: [Vec<f64>; 4],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RowLoad {
    pub value: f64,
    pub scale_exponent: u32,
}

pub fn interior_load(d: &InteriorData) -> Result<RowLoad> {
    d.f.require(4)?;
    let f = &d.f;
    let h2 = d.h * d.h;
    let h4 = h2 * h2;
    let mut s = Sum::new();
    s.add(6.0 * f.get(0, 0));
    s.add(0.5 * h2 * (f.get(2, 0) + f.get(0, 2)));
    s.add(h4 / 60.0 * (f.get(4, 0) + f.get(0, 4)));
    s.add(h4 / 15.0 * f.get(2, 2));
    Ok(RowLoad { value: s.value() / d.a, scale_exponent: 2 })
}

/// Load of a line stencil consistent to order `order`.
pub fn line_load(d: &LineData, c: &StencilWeights, order: usize) -> Result<RowLoad> {
    let lo = order.checked_sub(2).ok_or(Error::TableUnderfilled { have: 0, need: 2 })?;
    d.f_minus.require(lo)?;
    d.f_plus.require(lo)?;
    require_series(&d.phi, order)?;
    require_series(&d.psi, order - 1)?;
    let (w, h) = (d.w, d.h);
    let mut s = Sum::new();
    for deg in 0..=lo {
        for m in 0..=deg {
            let n = deg - m;
            s.add(d.f_minus.get(m, n) / d.a_minus * agg_vertical(c, m, n, w, h, Which::HMinus));
            s.add(d.f_plus.get(m, n) / d.a_plus * agg_vertical(c, m, n, w, h, Which::HPlus));
        }
    }
    for n in 0..=order {
        s.add(-d.phi[n] * agg_vertical(c, 0, n, w, h, Which::G));
    }
    for n in 0..order {
        s.add(-d.psi[n] / d.a_minus * agg_vertical(c, 1, n, w, h, Which::G));
    }
    Ok(RowLoad { value: s.value() / h, scale_exponent: 1 })
}

pub fn gamma_load(d: &LineData, c: &StencilWeights) -> Result<RowLoad> {
    line_load(d, c, 7)
}

pub fn near_gamma_order4_load(d: &LineData, c: &StencilWeights) -> Result<RowLoad> {
    line_load(d, c, 4)
}

pub fn near_gamma_order3_load(d: &LineData, c: &StencilWeights) -> Result<RowLoad> {
    line_load(d, c, 3)
}

/// Load of a cross-family stencil consistent to order `order`.  With a split
/// corner, `c` must hold the full corner weight `c + c_tilde`.
pub fn cross_family_load(
    d: &CrossData,
    c: &StencilWeights,
    split: Option<crate::stencils::Split>,
    order: usize,
) -> Result<RowLoad> {
    let lo = order.checked_sub(2).ok_or(Error::TableUnderfilled { have: 0, need: 2 })?;
    for p in 0..4 {
        d.f[p].require(lo)?;
        require_series(&d.phi[p], order)?;
        require_series(&d.psi[p], order - 1)?;
    }
    let (w1, w2, h) = (d.w1, d.w2, d.h);
    let [a1, a2, a3, a4] = d.a;
    let f = |p: usize, m: usize, n: usize| d.f[p - 1].get(m, n);
    let phi = |s: usize, k: usize| d.phi[s - 1][k];
    let psi = |s: usize, k: usize| d.psi[s - 1][k];
    let mut cq = *c;
    if let Some(sp) = split {
        cq.set(-1, -1, sp.c);
    }
    let wq = |p: usize, m: usize, n: usize, kind: KernelKind| agg_quadrant(&cq, p, m, n, w1, w2, h, kind);
    let mut s = Sum::new();

    // Quadrants 3 and 4 re-expanded through segment 1 and the quadrant-2 data.
    for n in 0..=1usize {
        for m in 0..=order - n {
            let fl = floor_half(m);
            let g3 = wq(3, m, n, KernelKind::G);
            let g4 = wq(4, m, n, KernelKind::G);
            let r32 = (a2 / a3).powi(n as i32);
            let r14 = (a1 / a4).powi(n as i32);
            let mut s2 = Sum::new();
            let mut s1 = Sum::new();
            for k in 1..=fl {
                s2.add(sign_pow(k) * f(2, m - 2 * k, n + 2 * k - 2));
                s1.add(sign_pow(k) * f(1, m - 2 * k, n + 2 * k - 2));
            }
            s.add(s2.value() / a2 * r32 * g3);
            s.add(s1.value() / a1 * r14 * g4);
            if m % 2 == 0 {
                s.add(-sign_pow(fl) * phi(1, m + n) * r14 * g4);
            } else {
                s.add(-sign_pow(fl) * psi(1, m + n - 1) / a1 * r14 * g4);
            }
        }
    }
    for deg in 0..=lo {
        for m in 0..=deg {
            let n = deg - m;
            for p in 1..=4 {
                s.add(f(p, m, n) / d.a[p - 1] * wq(p, m, n, KernelKind::H));
            }
        }
    }
    for m in 0..=order {
        s.add(-phi(1, m) * wq(1, 0, m, KernelKind::G));
        s.add(-phi(3, m) * wq(3, m, 0, KernelKind::G));
        s.add(-phi(4, m) * wq(4, m, 0, KernelKind::G));
    }
    for m in 0..order {
        s.add(-psi(1, m) / a1 * wq(1, 1, m, KernelKind::G));
        s.add(-psi(3, m) / a3 * wq(3, m, 1, KernelKind::G));
        s.add(-psi(4, m) / a4 * wq(4, m, 1, KernelKind::G));
    }

    // Corner value reached through quadrant 3 and segment 2.
    if let Some(sp) = split {
        let ct = sp.c_tilde;
        let (x, y) = (w1 - 1.0, w2 - 1.0);
        for m in 0..=1usize {
            for n in 0..=order - m {
                let gt = ct * eval_g(m, n, x, y) * h.powi((m + n) as i32);
                let q = m + n - odd(n);
                let r = (a3 / a4).powi(m as i32);
                let hn = floor_half(n);
                let mut s2 = Sum::new();
                for k in 1..=floor_half(q) {
                    s2.add(sign_pow(k) * f(2, q - 2 * k, odd(n) + 2 * k - 2));
                }
                let mut s3 = Sum::new();
                for k in 1..=hn {
                    s3.add(sign_pow(k) * f(3, m + 2 * k - 2, n - 2 * k));
                }
                let r23 = (a2 / a3).powi(odd(n) as i32);
                s.add(r * (r23 * sign_pow(hn) / a2 * s2.value() + s3.value() / a3) * gt);
                if n % 2 == 0 {
                    s.add(-sign_pow(hn) * phi(3, m + n) * r * gt);
                } else {
                    s.add(-sign_pow(hn) * psi(3, m + n - 1) / a3 * r * gt);
                }
            }
        }
        for k in 0..=order {
            s.add(-phi(2, k) * ct * eval_g(0, k, x, y) * h.powi(k as i32));
        }
        for k in 0..order {
            s.add(-psi(2, k) / a4 * ct * eval_g(1, k, x, y) * h.powi(k as i32 + 1));
        }
        for deg in 0..=lo {
            for m in 0..=deg {
                let n = deg - m;
                s.add(f(4, m, n) / a4 * ct * eval_h(m, n, x, y) * h.powi(deg as i32 + 2));
            }
        }
    }
    Ok(RowLoad { value: s.value() / h, scale_exponent: 1 })
}

pub fn cross_load(d: &CrossData, c: &StencilWeights) -> Result<RowLoad> {
    cross_family_load(d, c, None, 7)
}

pub fn near_cross_order4_load(d: &CrossData, st: &DerivedStencil) -> Result<RowLoad> {
    cross_family_load(d, &st.weights, st.split, 4)
}

pub fn near_cross_order2_load(d: &CrossData, c: &StencilWeights) -> Result<RowLoad> {
    cross_family_load(d, c, None, 2)
}

// ---------------------------------------------------------------------------
// Builders from a problem.

fn local_f(problem: &dyn Problem, frame: Frame, p: usize, order: usize, x: f64, y: f64) -> DerivTable {
    DerivTable::from_fn(order, |m, n| {
        let (sg, gm, gn) = frame.deriv(m, n);
        sg * problem.f(p, gm, gn, x, y)
    })
}

/// Arc parameter of segment `s` at point (x, y).
fn arc(s: usize, x: f64, y: f64) -> f64 {
    if s <= 2 {
        y
    } else {
        x
    }
}

pub fn interior_data(problem: &dyn Problem, p: usize, h: f64, x: f64, y: f64) -> InteriorData {
    InteriorData {
        h,
        a: problem.coefficients()[p - 1],
        f: local_f(problem, Frame::IDENTITY, p, 4, x, y),
    }
}

/// Line data for global segment `seg` seen through `frame`, at base point (x, y).
#[allow(clippy::too_many_arguments)]
pub fn line_data(
    problem: &dyn Problem,
    frame: Frame,
    seg: usize,
    w: f64,
    h: f64,
    x: f64,
    y: f64,
    order: usize,
) -> LineData {
    let a = problem.coefficients();
    let (minus, plus, sigma, tau) = frame.line_sides(seg);
    let t = arc(seg, x, y);
    let lo = order.saturating_sub(2);
    LineData {
        w,
        h,
        a_minus: a[minus - 1],
        a_plus: a[plus - 1],
        f_minus: local_f(problem, frame, minus, lo, x, y),
        f_plus: local_f(problem, frame, plus, lo, x, y),
        phi: (0..=order).map(|n| sigma * tau.powi(n as i32) * problem.phi(seg, n, t)).collect(),
        psi: (0..order).map(|n| tau.powi(n as i32) * problem.psi(seg, n, t)).collect(),
    }
}

pub fn cross_data(problem: &dyn Problem, frame: Frame, w1: f64, w2: f64, h: f64, order: usize) -> CrossData {
    let d = problem.domain();
    let a = problem.coefficients();
    let (x, y) = (d.xi, d.zeta);
    let lo = order.saturating_sub(2);
    let quad = |q: usize| frame.quadrant(q);
    let seg = |s: usize| frame.segment(s);
    CrossData {
        w1,
        w2,
        h,
        a: [1, 2, 3, 4].map(|q| a[quad(q) - 1]),
        f: [1, 2, 3, 4].map(|q| local_f(problem, frame, quad(q), lo, x, y)),
        phi: [1, 2, 3, 4].map(|s| {
            let (g, sigma, tau) = seg(s);
            let t = arc(g, x, y);
            (0..=order).map(|n| sigma * tau.powi(n as i32) * problem.phi(g, n, t)).collect()
        }),
        psi: [1, 2, 3, 4].map(|s| {
            let (g, _, tau) = seg(s);
            let t = arc(g, x, y);
            (0..order).map(|n| tau.powi(n as i32) * problem.psi(g, n, t)).collect()
        }),
    }
}

/// Subdomain whose branch the load expansion assumes at global stencil offset
/// (gk, gl): column k = -1 of a line configuration is on the minus side, the
/// rest on the plus side; cross configurations split by local quadrant with
/// the centre column and row counted in quadrant 2.
pub fn expected_subdomain(class: &PointClass, frame: Frame, gk: i32, gl: i32) -> usize {
    let k = frame.ex[0] * gk + frame.ex[1] * gl;
    let l = frame.ey[0] * gk + frame.ey[1] * gl;
    match *class {
        PointClass::Interior(p) => p,
        PointClass::OnGamma(seg)
        | PointClass::NearGammaV { segment: seg, .. }
        | PointClass::NearGammaH { segment: seg, .. } => {
            let (minus, plus, _, _) = frame.line_sides(seg);
            if k < 0 {
                minus
            } else {
                plus
            }
        }
        PointClass::OnCross | PointClass::NearCross { .. } => {
            let q = match (k < 0, l < 0) {
                (true, false) => 1,
                (false, false) => 2,
                (false, true) => 3,
                (true, true) => 4,
            };
            frame.quadrant(q)
        }
        PointClass::Boundary => 0,
    }
}

/// Right-hand side of the row at grid point (i, j) for the given class and stencil.
pub fn row_load(
    problem: &dyn Problem,
    grid: &Grid,
    i: usize,
    j: usize,
    class: &PointClass,
    st: &DerivedStencil,
) -> Result<RowLoad> {
    let h = grid.h;
    let (x, y) = (grid.x(i), grid.y(j));
    let order = st.consistency_order;
    match (*class, st.case) {
        (PointClass::Interior(p), _) => interior_load(&interior_data(problem, p, h, x, y)),
        (PointClass::OnGamma(seg), _) => {
            line_load(&line_data(problem, st.frame, seg, 0.0, h, x, y, order), &st.weights, order)
        }
        (PointClass::NearGammaV { w, segment, .. }, _) | (PointClass::NearGammaH { w, segment, .. }, _) => {
            let (dx, dy) = st.frame.to_global_f(-w * h, 0.0);
            let data = line_data(problem, st.frame, segment, w, h, x + dx, y + dy, order);
            line_load(&data, &st.weights, order)
        }
        (PointClass::OnCross, _) => {
            cross_family_load(&cross_data(problem, st.frame, 0.0, 0.0, h, order), &st.weights, None, order)
        }
        (PointClass::NearCross { w1, w2, .. }, StencilCase::NearCrossOrder4 { .. })
        | (PointClass::NearCross { w1, w2, .. }, StencilCase::NearCrossOrder2 { .. }) => {
            let data = cross_data(problem, st.frame, w1, w2, h, order);
            cross_family_load(&data, &st.weights, st.split, order)
        }
        (cls, case) => Err(Error::InvalidOption(format!(
            "stencil {} does not apply to a {} point",
            case.label(),
            cls.name()
        ))),
    }
}
