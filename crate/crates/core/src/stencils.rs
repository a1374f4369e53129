//! 3x3 stencil coefficients for every point class.
//!
//! Closed forms are written for a canonical configuration and carried to the
//! grid through a [`Frame`]:
//!
//! * line cases: the interface is the vertical line `x = -w h` (w = 0 for a
//!   point on the line); column `k = -1` sits on the minus side with
//!   coefficient `a_minus`, the centre on the plus side with `a_plus`;
//! * cross cases: the cross point is at `(-w1 h, -w2 h)` and the centre lies
//!   in quadrant 2 (upper right).
//!
//! The consistency matrices used by the null-space deriver are h-free: row
//! `(m, n)` of `Λ¹_M` holds the coefficient of the reference derivative
//! `u^{(m,n)}` (plus side, or quadrant 2) in `Σ C_{k,l} u(x + k h, y + l h)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mesh::Frame;
use crate::taylor::{eval_g, floor_half, odd, sign_pow, IndexSet, StencilWeights, Sum};

/// Offsets closer than this to 0 or 1 are rejected by the order-4/3 builders.
pub const W_GUARD: f64 = 1e-8;

/// Default position of the order-3 free parameter inside its sign-feasible
/// interval, measured from the lower end.  Smaller values enlarge the
/// diagonal-dominance margin of the comparison-function bound.
pub const RHO_DEFAULT_FRACTION: f64 = 0.1;

/// Relative singular-value threshold for accepting a null direction.
pub const NULL_TOL: f64 = 1e-10;

const REFINE_STEPS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StencilCase {
    Interior,
    OnGamma(usize),
    OnCross,
    NearGammaOrder4 { w: f64 },
    NearCrossOrder4 { w1: f64, w2: f64 },
    NearGammaOrder3 { w: f64, rho: Option<f64> },
    NearCrossOrder2 { w1: f64, w2: f64 },
}

impl StencilCase {
    pub fn label(&self) -> &'static str {
        match self {
            StencilCase::Interior => "interior",
            StencilCase::OnGamma(_) => "on-gamma",
            StencilCase::OnCross => "on-cross",
            StencilCase::NearGammaOrder4 { .. } => "near-gamma-4",
            StencilCase::NearCrossOrder4 { .. } => "near-cross-4",
            StencilCase::NearGammaOrder3 { .. } => "near-gamma-3",
            StencilCase::NearCrossOrder2 { .. } => "near-cross-2",
        }
    }

    pub fn consistency_order(&self) -> usize {
        match self {
            StencilCase::Interior => 6,
            StencilCase::OnGamma(_) | StencilCase::OnCross => 7,
            StencilCase::NearGammaOrder4 { .. } | StencilCase::NearCrossOrder4 { .. } => 4,
            StencilCase::NearGammaOrder3 { .. } => 3,
            StencilCase::NearCrossOrder2 { .. } => 2,
        }
    }
}

/// Corner split of a near-cross stencil: `C_{-1,-1} = c + c_tilde`, where `c`
/// multiplies the corner value reached through quadrant 1 and `c_tilde` the
/// same value reached through quadrant 3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Split {
    pub c: f64,
    pub c_tilde: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhoChoice {
    pub rho: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedStencil {
    pub case: StencilCase,
    /// Coefficients in the canonical (local) configuration.
    pub weights: StencilWeights,
    pub frame: Frame,
    pub scale_exponent: u32,
    pub consistency_order: usize,
    pub split: Option<Split>,
    pub rho: Option<RhoChoice>,
}

impl DerivedStencil {
    fn new(case: StencilCase, weights: StencilWeights, frame: Frame) -> Self {
        DerivedStencil {
            case,
            weights,
            frame,
            scale_exponent: if case == StencilCase::Interior { 2 } else { 1 },
            consistency_order: case.consistency_order(),
            split: None,
            rho: None,
        }
    }

    /// Coefficients indexed by global grid offsets.
    pub fn global_weights(&self) -> StencilWeights {
        in_frame(&self.weights, self.frame)
    }
}

/// Re-index local coefficients to global offsets: `C'[F(k, l)] = C[k, l]`.
pub fn in_frame(c: &StencilWeights, frame: Frame) -> StencilWeights {
    let mut out = StencilWeights::zero();
    for (k, l, v) in c.entries() {
        let (gk, gl) = frame.to_global(k, l);
        out.set(gk, gl, v);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transform {
    ReflectX,
    ReflectY,
    Transpose,
}

pub fn apply_symmetry(st: &DerivedStencil, t: Transform) -> DerivedStencil {
    let frame = match t {
        Transform::ReflectX => Frame::REFLECT_X,
        Transform::ReflectY => Frame::REFLECT_Y,
        Transform::Transpose => Frame::SWAP,
    };
    DerivedStencil { weights: in_frame(&st.weights, frame), ..*st }
}

fn check_positive(a: &[f64]) -> Result<()> {
    match a.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        Some(v) => Err(Error::NonPositiveCoefficient(*v)),
        None => Ok(()),
    }
}

fn check_offset(w: f64) -> Result<()> {
    if w.is_finite() && (W_GUARD..=1.0 - W_GUARD).contains(&w) {
        Ok(())
    } else {
        Err(Error::DegenerateOffset(w))
    }
}

fn weights_from(entries: &[(i32, i32, f64)]) -> StencilWeights {
    let mut c = StencilWeights::zero();
    for &(k, l, v) in entries {
        c.set(k, l, v);
    }
    c
}

pub fn interior_stencil() -> DerivedStencil {
    let c = weights_from(&[
        (0, 0, 20.0),
        (-1, 0, -4.0),
        (1, 0, -4.0),
        (0, -1, -4.0),
        (0, 1, -4.0),
        (-1, -1, -1.0),
        (-1, 1, -1.0),
        (1, -1, -1.0),
        (1, 1, -1.0),
    ]);
    DerivedStencil::new(StencilCase::Interior, c, Frame::IDENTITY)
}

/// Canonical on-line stencil with `alpha = a_minus / a_plus`.
pub fn gamma_canonical(alpha: f64) -> StencilWeights {
    weights_from(&[
        (1, 0, -4.0),
        (1, -1, -1.0),
        (1, 1, -1.0),
        (-1, -1, -alpha),
        (-1, 1, -alpha),
        (0, -1, -2.0 * (1.0 + alpha)),
        (0, 1, -2.0 * (1.0 + alpha)),
        (-1, 0, -4.0 * alpha),
        (0, 0, 10.0 * (1.0 + alpha)),
    ])
}

/// Subdomains on the (minus, plus) side of segment `p` in its canonical frame.
pub fn gamma_sides(p: usize) -> (usize, usize) {
    match p {
        1 => (1, 2),
        2 => (4, 3),
        3 => (3, 2),
        _ => (4, 1),
    }
}

/// Stencil for a grid point on segment `p`; `a` holds a1..a4.
pub fn gamma_stencil(p: usize, a: &[f64; 4]) -> Result<DerivedStencil> {
    check_positive(a)?;
    let (minus, plus) = gamma_sides(p);
    let frame = if p <= 2 { Frame::IDENTITY } else { Frame::SWAP };
    let c = gamma_canonical(a[minus - 1] / a[plus - 1]);
    Ok(DerivedStencil::new(StencilCase::OnGamma(p), c, frame))
}

pub fn cross_stencil(a: &[f64; 4]) -> Result<DerivedStencil> {
    check_positive(a)?;
    let [a1, a2, a3, a4] = *a;
    let a22 = a2 * a2;
    let c = weights_from(&[
        (-1, 1, -a1 * a1 * (a2 + a3) / (a22 * (a1 + a4))),
        (0, 1, -2.0 * (a1 + a2) / a2),
        (1, 1, -1.0),
        (-1, 0, -2.0 * a1 * (a2 + a3) / a22),
        (0, 0, 5.0 * (a2 + a3) * (a1 + a2) / a22),
        (1, 0, -2.0 * (a2 + a3) / a2),
        (-1, -1, -a1 * a4 * (a2 + a3) / (a22 * (a1 + a4))),
        (0, -1, -2.0 * a3 * (a1 + a2) / a22),
        (1, -1, -a3 / a2),
    ]);
    Ok(DerivedStencil::new(StencilCase::OnCross, c, Frame::IDENTITY))
}

fn poly(w: f64, coef: &[f64]) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * w + c)
}

/// Canonical order-4 stencil next to a line at distance `w h`.
pub fn near_gamma4_canonical(w: f64, alpha: f64) -> StencilWeights {
    let a2 = alpha * alpha;
    // Polynomials vanishing at w = 1 carry the factor (w - 1) explicitly.
    let m = w - 1.0;
    let r1 = (2.0 * w + 1.0).powi(2) * (w + 2.0) * (w - 1.0).powi(2);
    let r2 = poly(w, &[2.0, -5.0, 6.0, 5.0, -4.0, 4.0]);
    let r3 = m * poly(w, &[-4.0, -4.0, -2.0, -8.0, -8.0]);
    let r4 = poly(w, &[1.0, 0.0, 1.0, -4.0, 4.0]);
    let r5 = m * poly(w, &[-1.0, -1.0, 0.0, -4.0]);
    let r6 = -(2.0 * w + 1.0).powi(2) * (w - 1.0).powi(3);
    let r7 = m * poly(w, &[-1.0, -1.0, 2.0, -12.0, 8.0]);
    let r8 = poly(w, &[4.0, -6.0, 10.0, 8.0, -8.0]);
    let r9 = m * poly(w, &[-4.0, -10.0, 0.0, 8.0]);
    let r10 = m * m * poly(w, &[4.0, 6.0, 0.0, 8.0]);
    let r11 = poly(w, &[0.0, 8.0, -22.0, 38.0, -24.0, 8.0]);
    let r12 = m * poly(w, &[-4.0, 2.0, -28.0, 24.0, -16.0]);
    let t1 = poly(w, &[0.0, -1.0, 8.0, -13.0, 12.0, -4.0]);
    let s1 = m * m * poly(w, &[-10.0, -30.0, -24.0, -8.0]);
    let s2 = poly(w, &[-10.0, 10.0, -18.0, -22.0, 8.0, -8.0]);
    let s3 = m * poly(w, &[20.0, 20.0, 28.0, 16.0, 16.0]);
    let beta = r1 + r2 * a2 + r3 * alpha;
    let corner_minus = -(r4 * a2 + r5 * alpha) / beta;
    let corner_plus = -(r6 + t1 * a2 + r7 * alpha) / beta;
    weights_from(&[
        (-1, 1, corner_minus),
        (-1, -1, corner_minus),
        (0, 1, -1.0),
        (0, -1, -1.0),
        (1, 1, corner_plus),
        (1, -1, corner_plus),
        (-1, 0, -(r8 * a2 + r9 * alpha) / beta),
        (0, 0, -(s1 + s2 * a2 + s3 * alpha) / beta),
        (1, 0, -(r10 + r11 * a2 + r12 * alpha) / beta),
    ])
}

pub fn near_gamma_order4(frame: Frame, w: f64, a_minus: f64, a_plus: f64) -> Result<DerivedStencil> {
    check_positive(&[a_minus, a_plus])?;
    check_offset(w)?;
    let c = near_gamma4_canonical(w, a_minus / a_plus);
    Ok(DerivedStencil::new(StencilCase::NearGammaOrder4 { w }, c, frame))
}

struct Order3Poly {
    beta: f64,
    // (rho multiplier, constant) pairs, already divided by beta
    corner_minus: (f64, f64),
    edge_y: (f64, f64),
    edge_minus: (f64, f64),
    edge_plus: (f64, f64),
}

fn order3_polys(w: f64, alpha: f64) -> Order3Poly {
    let a2 = alpha * alpha;
    // Factored so that the double root at w = 1 is resolved without cancellation.
    let (p, m) = (w + 1.0, w - 1.0);
    let m2 = m * m;
    let r1 = 12.0 * m2 * p;
    let r2 = 4.0 * w * p * (w + 2.0);
    let r3 = -4.0 * m * (4.0 * w * w + 4.0 * w + 3.0);
    let r4 = 4.0 * (2.0 * w * w * w + w + 3.0);
    let r5 = -4.0 * m * (2.0 * w * w + 2.0 * w + 3.0);
    let s1 = -6.0 * m2;
    let s2 = -6.0 * p * p;
    let s3 = 12.0 * m * p;
    let s4 = 4.0 * (-4.0 * w * w * w + w - 3.0);
    let s5 = 4.0 * m * (4.0 * w * w + 4.0 * w + 3.0);
    let s6 = -12.0 * m2 * (2.0 * w + 1.0);
    let s7 = -4.0 * w * (2.0 * w + 1.0) * p;
    let s8 = 4.0 * m * (8.0 * w * w + 2.0 * w + 3.0);
    let t1 = -2.0 * w * (2.0 * w - 1.0) * m;
    let t2 = -t1;
    let t3 = -3.0 * m2 * (2.0 * w + 1.0);
    let t4 = -w * (2.0 * w + 1.0) * p;
    let t5 = m * (8.0 * w * w + 2.0 * w + 3.0);
    let t6 = 2.0 * w * (4.0 * w * w - 6.0 * w - 1.0);
    let t7 = -2.0 * m * (4.0 * w * w - 2.0 * w - 3.0);
    let t8 = -6.0 * m2;
    let t9 = -6.0 * w * w;
    let t10 = 12.0 * w * m;
    let beta = r1 + r2 * a2 + r3 * alpha;
    Order3Poly {
        beta,
        corner_minus: ((r4 * a2 + r5 * alpha) / beta, (t1 * a2 + t2 * alpha) / beta),
        edge_y: ((s1 + s2 * a2 + s3 * alpha) / beta, (t3 + t4 * a2 + t5 * alpha) / beta),
        edge_minus: ((s4 * a2 + s5 * alpha) / beta, (t6 * a2 + t7 * alpha) / beta),
        edge_plus: ((s6 + s7 * a2 + s8 * alpha) / beta, (t8 + t9 * a2 + t10 * alpha) / beta),
    }
}

/// Exact sign-feasible interval for the free parameter of the order-3 stencil.
pub fn rho_interval(w: f64, alpha: f64) -> (f64, f64) {
    let p = order3_polys(w, alpha);
    debug_assert!(p.beta > 0.0);
    // Each entry (s rho + t) / beta <= 0.  The s-combinations are negative on
    // (0, 1) and give lower bounds; the corner combination is positive.
    let lo = [p.edge_y, p.edge_minus, p.edge_plus]
        .iter()
        .map(|(s, t)| -t / s)
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = (-p.corner_minus.1 / p.corner_minus.0).min(0.0);
    (lo, hi)
}

pub fn near_gamma3_canonical(w: f64, alpha: f64, rho: f64) -> StencilWeights {
    let p = order3_polys(w, alpha);
    let lin = |(s, t): (f64, f64)| s * rho + t;
    let cm = lin(p.corner_minus);
    let ey = lin(p.edge_y);
    weights_from(&[
        (0, 0, 1.0),
        (-1, 1, cm),
        (-1, -1, cm),
        (1, 1, rho),
        (1, -1, rho),
        (0, 1, ey),
        (0, -1, ey),
        (-1, 0, lin(p.edge_minus)),
        (1, 0, lin(p.edge_plus)),
    ])
}

pub fn near_gamma_order3(
    frame: Frame,
    w: f64,
    a_minus: f64,
    a_plus: f64,
    rho: Option<f64>,
) -> Result<DerivedStencil> {
    check_positive(&[a_minus, a_plus])?;
    check_offset(w)?;
    let alpha = a_minus / a_plus;
    let (lo, hi) = rho_interval(w, alpha);
    let slack = 1e-12 * (lo.abs() + hi.abs()).max(1e-300);
    let rho = match rho {
        Some(r) if r < lo - slack || r > hi + slack => {
            return Err(Error::RhoOutOfRange { rho: r, lo, hi })
        }
        Some(r) => r,
        None => lo + RHO_DEFAULT_FRACTION * (hi - lo),
    };
    let c = near_gamma3_canonical(w, alpha, rho);
    let mut st = DerivedStencil::new(StencilCase::NearGammaOrder3 { w, rho: Some(rho) }, c, frame);
    st.rho = Some(RhoChoice { rho, lo, hi });
    Ok(st)
}

/// Coefficients in the canonical frame of quadrant-2 from global a1..a4.
pub fn local_coefficients(frame: Frame, a: &[f64; 4]) -> [f64; 4] {
    [1, 2, 3, 4].map(|q| a[frame.quadrant(q) - 1])
}

/// Canonical order-2 near-cross stencil; `a` is in local quadrant order.
pub fn near_cross2_canonical(w1: f64, w2: f64, a: &[f64; 4]) -> StencilWeights {
    let [a1, a2, a3, _] = *a;
    let r1 = 2.0 * w2 * w2 - w2 + 1.0;
    let r2 = -2.0 * w2 * w2 + w2 + 1.0;
    let r3 = -2.0 * w1 * w1 + w1 + 1.0;
    let r4 = 2.0 * w1 * w1 - w1 + 1.0;
    let p1 = 2.0 * w1 * w1 - w1 - 1.0;
    let p2 = 2.0 * w1 * w1 - w1 + 1.0;
    let q1 = 2.0 * w2 * w2 - w2 + 1.0;
    let q2 = 2.0 * w2 * w2 - w2 - 1.0;
    let r5 = -w2 * p1;
    let r6 = (w2 - 1.0) * p1;
    let r7 = w2 * p2;
    let r8 = -(w2 - 1.0) * p2;
    let r9 = -q1 * (w1 - 1.0);
    let r10 = q2 * (w1 - 1.0);
    let r11 = q1 * w1;
    let r12 = -q2 * w1;
    let s1 = 2.0 * (w1 - 1.0) * (w1 * w2 + w2 * w2 + w1 + 1.0);
    let s2 = 2.0 * (1.0 - w2) * (w1 - 1.0) * (w1 + w2 + 1.0);
    let s3 = -2.0 * (w2 + 1.0) * w1 * w1 - 2.0 * (w2 * w2 - w2) * w1 - 2.0 * w2 * w2 - 2.0;
    let s4 = 2.0 * (w2 - 1.0) * (w1 * w1 + w1 * w2 + w2 + 1.0);
    let beta = -(a1 * a2 * s4 + a1 * a3 * s3 + a2 * a2 * s2 + a2 * a3 * s1);
    weights_from(&[
        (0, 0, 1.0),
        (-1, 0, -(a1 * a2 * r2 + a1 * a3 * r1) / beta),
        (0, -1, -(a1 * a3 * r4 + a2 * a3 * r3) / beta),
        (0, 1, -(a1 * a2 * r8 + a1 * a3 * r7 + a2 * a2 * r6 + a2 * a3 * r5) / beta),
        (1, 0, -(a1 * a2 * r12 + a1 * a3 * r11 + a2 * a2 * r10 + a2 * a3 * r9) / beta),
    ])
}

pub fn near_cross_order2(quadrant: usize, w1: f64, w2: f64, a: &[f64; 4]) -> Result<DerivedStencil> {
    check_positive(a)?;
    check_offset(w1)?;
    check_offset(w2)?;
    let frame = Frame::for_quadrant(quadrant);
    let c = near_cross2_canonical(w1, w2, &local_coefficients(frame, a));
    Ok(DerivedStencil::new(StencilCase::NearCrossOrder2 { w1, w2 }, c, frame))
}

/// Column order of consistency matrices: `(k + 1) * 3 + (l + 1)`.
pub fn column_of(k: i32, l: i32) -> usize {
    ((k + 1) * 3 + (l + 1)) as usize
}

/// h-free consistency matrix for a line configuration; `ratio = a_plus / a_minus`.
pub fn line_consistency_matrix(order: usize, w: f64, ratio: f64) -> DMatrix<f64> {
    let rows = IndexSet::low(order).members();
    let mut a = DMatrix::zeros(rows.len(), 9);
    for (r, &(m, n)) in rows.iter().enumerate() {
        for l in -1..=1 {
            a[(r, column_of(-1, l))] = ratio.powi(m as i32) * eval_g(m, n, w - 1.0, l as f64);
            for k in 0..=1 {
                a[(r, column_of(k, l))] = eval_g(m, n, w + k as f64, l as f64);
            }
        }
    }
    a
}

/// h-free consistency matrix for a cross configuration with local
/// coefficients `a`.  With `split` a tenth column holds the corner weight
/// reached through quadrant 3.
pub fn cross_consistency_matrix(order: usize, w1: f64, w2: f64, a: &[f64; 4], split: bool) -> DMatrix<f64> {
    let [a1, a2, a3, a4] = *a;
    let rows = IndexSet::low(order).members();
    let mut mat = DMatrix::zeros(rows.len(), if split { 10 } else { 9 });
    for (r, &(m, n)) in rows.iter().enumerate() {
        let on = odd(n);
        let z = n + m - on;
        let sg = sign_pow(floor_half(n));
        let rm = (a2 / a1).powi(m as i32);
        for l in 0..=1 {
            mat[(r, column_of(-1, l))] = rm * eval_g(m, n, w1 - 1.0, w2 + l as f64);
            for k in 0..=1 {
                mat[(r, column_of(k, l))] = eval_g(m, n, w1 + k as f64, w2 + l as f64);
            }
        }
        let r3 = sg * (a2 / a3).powi(on as i32);
        for k in 0..=1 {
            mat[(r, column_of(k, -1))] = r3 * eval_g(on, z, w2 - 1.0, w1 + k as f64);
        }
        mat[(r, column_of(-1, -1))] =
            sg * rm * (a1 / a4).powi(on as i32) * eval_g(on, z, w2 - 1.0, w1 - 1.0);
        if split {
            let q = z;
            mat[(r, 9)] = sg
                * sign_pow(floor_half(q))
                * (a2 / a3).powi(on as i32)
                * (a3 / a4).powi(m as i32)
                * eval_g(m, n, w1 - 1.0, w2 - 1.0);
        }
    }
    mat
}

/// Null direction of a small dense matrix.
///
/// Rows and columns are equilibrated first, the matrix is zero-padded to at
/// least as many rows as columns, and the right singular vector of the
/// smallest singular value is returned (unscaled, unit max-norm).
pub fn null_vector(mat: &DMatrix<f64>) -> Result<Vec<f64>> {
    let (nr, nc) = mat.shape();
    let mut a = mat.clone();
    let mut col_scale = vec![1.0; nc];
    for _ in 0..30 {
        for i in 0..nr {
            let m = a.row(i).amax();
            if m > 0.0 {
                a.row_mut(i).scale_mut(1.0 / m.sqrt());
            }
        }
        for j in 0..nc {
            let m = a.column(j).amax();
            if m > 0.0 {
                let s = 1.0 / m.sqrt();
                a.column_mut(j).scale_mut(s);
                col_scale[j] *= s;
            }
        }
    }
    let padded = if nr < nc {
        let mut p = DMatrix::zeros(nc, nc);
        p.view_mut((0, 0), (nr, nc)).copy_from(&a);
        p
    } else {
        a
    };
    let svd = padded.clone().svd(true, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sorted: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = sorted[0];
    let small = sorted.iter().filter(|s| **s <= NULL_TOL * smax).count();
    match small {
        0 => return Err(Error::NoSolution { singular_values: sorted }),
        1 => {}
        _ => return Err(Error::DegenerateStencil { singular_values: sorted }),
    }
    let idx = *order.last().unwrap();
    let mut y: Vec<f64> = (0..nc).map(|j| v_t[(idx, j)]).collect();
    // Refine against the equilibrated matrix with a compensated residual,
    // projecting out the null direction after each correction.
    let u = svd.u.as_ref().expect("left singular vectors requested");
    for _ in 0..REFINE_STEPS {
        let r: Vec<f64> = (0..padded.nrows())
            .map(|i| (0..nc).map(|j| padded[(i, j)] * y[j]).collect::<Sum>().value())
            .collect();
        for &s in order.iter().take(nc - 1) {
            let sv = svd.singular_values[s];
            let coef = (0..padded.nrows()).map(|i| u[(i, s)] * r[i]).collect::<Sum>().value() / sv;
            for (j, yj) in y.iter_mut().enumerate() {
                *yj -= coef * v_t[(s, j)];
            }
        }
    }
    let mut v: Vec<f64> = (0..nc).map(|j| y[j] * col_scale[j]).collect();
    let m = v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    v.iter_mut().for_each(|x| *x /= m);
    Ok(v)
}

fn weights_from_vector(v: &[f64]) -> StencilWeights {
    let mut c = StencilWeights::zero();
    for k in -1..=1 {
        for l in -1..=1 {
            c.set(k, l, v[column_of(k, l)]);
        }
    }
    c
}

/// Configurations accepted by [`derive_by_nullspace`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NullspaceCase {
    /// Line at distance `w h` (w = 0: point on the line).
    Line { w: f64, a_minus: f64, a_plus: f64 },
    /// Cross at `(-w1 h, -w2 h)` with local coefficients; `split` adds the
    /// second corner unknown.
    Cross { w1: f64, w2: f64, a: [f64; 4], split: bool },
}

/// Re-derive a stencil from the null space of its consistency matrix.
///
/// Normalization: `C_{1,1} = -1` for points on the interface, `C_{0,1} = -1`
/// for near-line points and `C_{0,0} = 1` for split near-cross stencils.
pub fn derive_by_nullspace(case: &NullspaceCase, order: usize) -> Result<DerivedStencil> {
    match *case {
        NullspaceCase::Line { w, a_minus, a_plus } => {
            check_positive(&[a_minus, a_plus])?;
            let v = null_vector(&line_consistency_matrix(order, w, a_plus / a_minus))?;
            let c = weights_from_vector(&v);
            let (norm, sc) = if w == 0.0 {
                (-c.get(1, 1), StencilCase::OnGamma(1))
            } else {
                (-c.get(0, 1), StencilCase::NearGammaOrder4 { w })
            };
            let mut st = DerivedStencil::new(sc, c.scaled(1.0 / norm), Frame::IDENTITY);
            st.consistency_order = order;
            Ok(st)
        }
        NullspaceCase::Cross { w1, w2, a, split } => {
            check_positive(&a)?;
            let v = null_vector(&cross_consistency_matrix(order, w1, w2, &a, split))?;
            let mut c = weights_from_vector(&v);
            let sc = if w1 == 0.0 && w2 == 0.0 {
                StencilCase::OnCross
            } else {
                StencilCase::NearCrossOrder4 { w1, w2 }
            };
            let mut extra = None;
            let norm = if split {
                c.set(-1, -1, v[9] + v[column_of(-1, -1)]);
                extra = Some(Split { c: v[column_of(-1, -1)], c_tilde: v[9] });
                c.get(0, 0)
            } else {
                -c.get(1, 1)
            };
            let mut st = DerivedStencil::new(sc, c.scaled(1.0 / norm), Frame::IDENTITY);
            st.split = extra.map(|s| Split { c: s.c / norm, c_tilde: s.c_tilde / norm });
            st.consistency_order = order;
            Ok(st)
        }
    }
}

/// Order-4 stencil near the cross point, from the null space of the split system.
pub fn near_cross_order4(quadrant: usize, w1: f64, w2: f64, a: &[f64; 4]) -> Result<DerivedStencil> {
    check_positive(a)?;
    check_offset(w1)?;
    check_offset(w2)?;
    let frame = Frame::for_quadrant(quadrant);
    let local = local_coefficients(frame, a);
    let mut st = derive_by_nullspace(&NullspaceCase::Cross { w1, w2, a: local, split: true }, 4)?;
    st.frame = frame;
    st.case = StencilCase::NearCrossOrder4 { w1, w2 };
    st.consistency_order = 4;
    Ok(st)
}

/// Sign condition: positive centre, non-positive neighbours (up to `tol * max|C|`).
pub fn sign_ok(c: &StencilWeights, tol: f64) -> bool {
    let slack = tol * c.max_abs();
    c.get(0, 0) > 0.0 && c.entries().all(|(k, l, v)| (k == 0 && l == 0) || v <= slack)
}

/// Summation condition relative to `Σ|C|`.
pub fn sum_ok(c: &StencilWeights, tol: f64) -> bool {
    c.sum().abs() <= tol * c.abs_sum()
}

/// Cosine similarity of two coefficient blocks.
pub fn cosine(a: &StencilWeights, b: &StencilWeights) -> f64 {
    let dot: f64 = a.entries().zip(b.entries()).map(|(x, y)| x.2 * y.2).sum();
    let na: f64 = a.entries().map(|x| x.2 * x.2).sum::<f64>().sqrt();
    let nb: f64 = b.entries().map(|x| x.2 * x.2).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// 3x3 text table, top row `l = 1`.
pub fn to_table(c: &StencilWeights) -> String {
    let mut out = String::new();
    for l in [1, 0, -1] {
        let row: Vec<String> = (-1..=1).map(|k| format!("{:>14.6e}", c.get(k, l))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// CSV rows `k,l,value`.
pub fn to_csv(c: &StencilWeights) -> String {
    let mut out = String::from("k,l,value\n");
    for (k, l, v) in c.entries() {
        out.push_str(&format!("{k},{l},{v:.17e}\n"));
    }
    out
}


#[cfg(test)]
mod nullspace_tests {
    use super::*;

    fn rel(a: &StencilWeights, b: &StencilWeights) -> f64 {
        let d: f64 = a.entries().zip(b.entries()).map(|(x, y)| (x.2 - y.2).abs()).fold(0.0, f64::max);
        d / b.max_abs()
    }

    #[test]
    fn recovers_closed_forms() {
        let g = derive_by_nullspace(&NullspaceCase::Line { w: 0.0, a_minus: 3.0, a_plus: 0.7 }, 7).unwrap();
        assert!(rel(&g.weights, &gamma_canonical(3.0 / 0.7)) < 1e-10);
        let a = [0.3, 2.0, 5.0, 0.9];
        let c = derive_by_nullspace(&NullspaceCase::Cross { w1: 0.0, w2: 0.0, a, split: false }, 7).unwrap();
        assert!(rel(&c.weights, &cross_stencil(&a).unwrap().weights) < 1e-10);
        let n = derive_by_nullspace(&NullspaceCase::Line { w: 0.37, a_minus: 2.0, a_plus: 0.5 }, 4).unwrap();
        assert!(rel(&n.weights, &near_gamma4_canonical(0.37, 4.0)) < 1e-10);
        assert!(matches!(
            derive_by_nullspace(&NullspaceCase::Line { w: 0.0, a_minus: 3.0, a_plus: 0.7 }, 8),
            Err(Error::NoSolution { .. })
        ));
        assert!(matches!(
            derive_by_nullspace(&NullspaceCase::Cross { w1: 0.3, w2: 0.6, a, split: true }, 5),
            Err(Error::NoSolution { .. })
        ));
        let s = near_cross_order4(2, 0.3, 0.6, &a).unwrap();
        assert!(s.split.is_some());
        assert!(s.weights.sum().abs() < 1e-10 * s.weights.abs_sum());
    }

    #[test]
    fn low_order_forms_are_consistent() {
        let a = [0.3, 2.0, 5.0, 0.9];
        let c = near_cross2_canonical(0.3, 0.8, &a);
        let m = cross_consistency_matrix(2, 0.3, 0.8, &a, false);
        for r in 0..m.nrows() {
            let v: f64 = (0..9).map(|j| m[(r, j)] * c.get(j as i32 / 3 - 1, j as i32 % 3 - 1)).sum();
            assert!(v.abs() < 1e-12, "row {r}: {v}");
        }
        let c = near_gamma3_canonical(0.3, 0.25, -0.05);
        let m = line_consistency_matrix(3, 0.3, 4.0);
        for r in 0..m.nrows() {
            let v: f64 = (0..9).map(|j| m[(r, j)] * c.get(j as i32 / 3 - 1, j as i32 % 3 - 1)).sum();
            assert!(v.abs() < 1e-12, "row {r}: {v}");
        }
    }
}
