//! Domain, uniform grid, interface geometry and point classification.
//!
//! Subdomains are numbered 1..4 counter-clockwise starting at the upper-left
//! quadrant around the cross point `(xi, zeta)`:
//!
//! ```text
//!        Γ1
//!   Ω1   |   Ω2
//! Γ4 ----+---- Γ3
//!   Ω4   |   Ω3
//!        Γ2
//! ```
//!
//! Jumps across vertical segments (Γ1, Γ2) are taken in the +x direction and
//! across horizontal segments (Γ3, Γ4) in the +y direction.  Grid values that
//! sit exactly on an interface belong to the branch on the positive side
//! (right of a vertical line, above a horizontal line; Ω2 at the cross).

use crate::error::{Error, Result};

/// Relative tolerance used to decide whether an interface line sits on a grid line.
pub const ALIGN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    pub xi: f64,
    pub zeta: f64,
}

impl Domain {
    pub fn new(l1: f64, l2: f64, l3: f64, l4: f64, xi: f64, zeta: f64) -> Result<Self> {
        let d = Domain { l1, l2, l3, l4, xi, zeta };
        d.validate()?;
        Ok(d)
    }

    pub fn unit_square(xi: f64, zeta: f64) -> Result<Self> {
        Self::new(0.0, 1.0, 0.0, 1.0, xi, zeta)
    }

    fn validate(&self) -> Result<()> {
        let all = [self.l1, self.l2, self.l3, self.l4, self.xi, self.zeta];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDomain("non-finite bound".into()));
        }
        if !(self.l1 < self.xi && self.xi < self.l2) {
            return Err(Error::InvalidDomain(format!(
                "xi = {} not inside ({}, {})",
                self.xi, self.l1, self.l2
            )));
        }
        if !(self.l3 < self.zeta && self.zeta < self.l4) {
            return Err(Error::InvalidDomain(format!(
                "zeta = {} not inside ({}, {})",
                self.zeta, self.l3, self.l4
            )));
        }
        self.aspect().map(|_| ())
    }

    /// The integer N0 with l4 - l3 = N0 (l2 - l1).
    pub fn aspect(&self) -> Result<usize> {
        let r = (self.l4 - self.l3) / (self.l2 - self.l1);
        let k = r.round();
        if k < 1.0 || (r - k).abs() > ALIGN_TOL * r.max(1.0) {
            return Err(Error::InvalidDomain(format!(
                "(l4-l3)/(l2-l1) = {r} is not a positive integer"
            )));
        }
        Ok(k as usize)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub domain: Domain,
    pub n1: usize,
    pub n2: usize,
    pub h: f64,
}

pub fn build_grid(domain: Domain, n1: usize) -> Result<Grid> {
    domain.validate()?;
    if n1 < 2 {
        return Err(Error::InvalidDomain(format!("n1 = {n1} must be at least 2")));
    }
    let n0 = domain.aspect()?;
    Ok(Grid {
        domain,
        n1,
        n2: n0 * n1,
        h: (domain.l2 - domain.l1) / n1 as f64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InterfaceMode {
    Aligned,
    Unaligned,
}

impl std::fmt::Display for InterfaceMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InterfaceMode::Aligned => write!(f, "aligned"),
            InterfaceMode::Unaligned => write!(f, "unaligned"),
        }
    }
}

/// Which side of the grid point the nearby interface line lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// The line has the smaller coordinate (left of / below the point).
    Negative,
    /// The line has the larger coordinate (right of / above the point).
    Positive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PointClass {
    Boundary,
    Interior(usize),
    OnGamma(usize),
    OnCross,
    /// Vertical segment `segment` (1 or 2) at distance `w h` from the point.
    NearGammaV { side: Side, w: f64, segment: usize },
    /// Horizontal segment `segment` (3 or 4) at distance `w h` from the point.
    NearGammaH { side: Side, w: f64, segment: usize },
    /// The point lies in `quadrant`; |x_i - xi| = w1 h and |y_j - zeta| = w2 h.
    NearCross { quadrant: usize, w1: f64, w2: f64 },
}

impl PointClass {
    pub fn name(&self) -> &'static str {
        match self {
            PointClass::Boundary => "boundary",
            PointClass::Interior(_) => "interior",
            PointClass::OnGamma(_) => "on-gamma",
            PointClass::OnCross => "on-cross",
            PointClass::NearGammaV { .. } | PointClass::NearGammaH { .. } => "near-gamma",
            PointClass::NearCross { .. } => "near-cross",
        }
    }

    /// Frame mapping the canonical configuration of this class onto the grid.
    pub fn frame(&self) -> Frame {
        match *self {
            PointClass::Boundary | PointClass::Interior(_) | PointClass::OnCross => Frame::IDENTITY,
            PointClass::OnGamma(p) => {
                if p <= 2 {
                    Frame::IDENTITY
                } else {
                    Frame::SWAP
                }
            }
            PointClass::NearGammaV { side, .. } => match side {
                Side::Negative => Frame::IDENTITY,
                Side::Positive => Frame::REFLECT_X,
            },
            PointClass::NearGammaH { side, .. } => match side {
                Side::Negative => Frame::SWAP,
                Side::Positive => Frame::SWAP_REFLECT,
            },
            PointClass::NearCross { quadrant, .. } => Frame::for_quadrant(quadrant),
        }
    }
}

/// A signed permutation of the axes: local unit vectors `ex`, `ey` expressed
/// in global grid directions.  Canonical stencils and derivative data are
/// written in local coordinates and mapped to the grid through a frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Frame {
    pub ex: [i32; 2],
    pub ey: [i32; 2],
}

impl Frame {
    pub const IDENTITY: Frame = Frame { ex: [1, 0], ey: [0, 1] };
    pub const REFLECT_X: Frame = Frame { ex: [-1, 0], ey: [0, 1] };
    pub const REFLECT_Y: Frame = Frame { ex: [1, 0], ey: [0, -1] };
    pub const ROTATE_HALF: Frame = Frame { ex: [-1, 0], ey: [0, -1] };
    pub const SWAP: Frame = Frame { ex: [0, 1], ey: [1, 0] };
    pub const SWAP_REFLECT: Frame = Frame { ex: [0, -1], ey: [1, 0] };

    /// Frame placing the canonical near-cross configuration (point in local
    /// quadrant 2) onto a point lying in global quadrant `q`.
    pub fn for_quadrant(q: usize) -> Frame {
        match q {
            1 => Frame::REFLECT_X,
            2 => Frame::IDENTITY,
            3 => Frame::REFLECT_Y,
            _ => Frame::ROTATE_HALF,
        }
    }

    pub fn to_global(&self, k: i32, l: i32) -> (i32, i32) {
        (
            k * self.ex[0] + l * self.ey[0],
            k * self.ex[1] + l * self.ey[1],
        )
    }

    pub fn to_global_f(&self, x: f64, y: f64) -> (f64, f64) {
        (
            x * self.ex[0] as f64 + y * self.ey[0] as f64,
            x * self.ex[1] as f64 + y * self.ey[1] as f64,
        )
    }

    /// Local derivative d^m/dx'^m d^n/dy'^n as `sign * (global derivative (gm, gn))`.
    pub fn deriv(&self, m: usize, n: usize) -> (f64, usize, usize) {
        let pw = |s: i32, e: usize| if s < 0 && e % 2 == 1 { -1.0 } else { 1.0 };
        if self.ex[1] == 0 {
            (pw(self.ex[0], m) * pw(self.ey[1], n), m, n)
        } else {
            (pw(self.ex[1], m) * pw(self.ey[0], n), n, m)
        }
    }

    /// Global subdomain occupied by local quadrant `q`.
    pub fn quadrant(&self, q: usize) -> usize {
        let (sx, sy) = quadrant_signs(q);
        let (gx, gy) = self.to_global(sx, sy);
        subdomain_at(gx, gy)
    }

    /// Global segment carrying local segment `s`, with the sign relating the
    /// local jump to the global one (sigma) and the orientation of the local
    /// tangent relative to the global one (tau).
    pub fn segment(&self, s: usize) -> (usize, f64, f64) {
        let dir = segment_direction(s);
        let (gx, gy) = self.to_global(dir[0], dir[1]);
        let g = segment_toward(gx, gy);
        let n = segment_normal(s);
        let t = segment_tangent(s);
        let gn = self.to_global(n[0], n[1]);
        let gt = self.to_global(t[0], t[1]);
        let nn = segment_normal(g);
        let tt = segment_tangent(g);
        let sigma = (gn.0 * nn[0] + gn.1 * nn[1]) as f64;
        let tau = (gt.0 * tt[0] + gt.1 * tt[1]) as f64;
        (g, sigma, tau)
    }

    /// For a line configuration: global subdomains on the local minus side and
    /// plus side of global segment `seg`, plus (sigma, tau) as in [`Frame::segment`].
    pub fn line_sides(&self, seg: usize) -> (usize, usize, f64, f64) {
        let vertical = seg <= 2;
        let (dx, dy) = (self.ex[0], self.ex[1]);
        let (minus, plus) = if vertical {
            debug_assert!(dy == 0);
            let sy = if seg == 1 { 1 } else { -1 };
            (subdomain_at(-dx, sy), subdomain_at(dx, sy))
        } else {
            debug_assert!(dx == 0);
            let sx = if seg == 3 { 1 } else { -1 };
            (subdomain_at(sx, -dy), subdomain_at(sx, dy))
        };
        let nn = segment_normal(seg);
        let tt = segment_tangent(seg);
        let sigma = (self.ex[0] * nn[0] + self.ex[1] * nn[1]) as f64;
        let tau = (self.ey[0] * tt[0] + self.ey[1] * tt[1]) as f64;
        (minus, plus, sigma, tau)
    }
}

/// Subdomain in the quadrant with the given coordinate signs relative to the cross.
pub fn subdomain_at(sx: i32, sy: i32) -> usize {
    match (sx > 0, sy > 0) {
        (false, true) => 1,
        (true, true) => 2,
        (true, false) => 3,
        (false, false) => 4,
    }
}

pub fn quadrant_signs(q: usize) -> (i32, i32) {
    match q {
        1 => (-1, 1),
        2 => (1, 1),
        3 => (1, -1),
        _ => (-1, -1),
    }
}

/// Segment leaving the cross point in direction (dx, dy).
pub fn segment_toward(dx: i32, dy: i32) -> usize {
    match (dx.signum(), dy.signum()) {
        (0, 1) => 1,
        (0, -1) => 2,
        (1, 0) => 3,
        _ => 4,
    }
}

pub fn segment_direction(s: usize) -> [i32; 2] {
    match s {
        1 => [0, 1],
        2 => [0, -1],
        3 => [1, 0],
        _ => [-1, 0],
    }
}

/// Normal used for jumps across segment `s`.
pub fn segment_normal(s: usize) -> [i32; 2] {
    if s <= 2 {
        [1, 0]
    } else {
        [0, 1]
    }
}

/// Direction of the arc-length parameter along segment `s`.
pub fn segment_tangent(s: usize) -> [i32; 2] {
    if s <= 2 {
        [0, 1]
    } else {
        [1, 0]
    }
}

/// Subdomain of a point using the positive-side convention for points on an interface.
pub fn stored_subdomain(x: f64, y: f64, xi: f64, zeta: f64) -> usize {
    subdomain_at(if x >= xi { 1 } else { -1 }, if y >= zeta { 1 } else { -1 })
}

#[derive(Clone, Copy, Debug)]
struct LinePos {
    /// (coord - origin) / h
    s: f64,
    aligned: bool,
    index: i64,
}

fn line_pos(coord: f64, origin: f64, h: f64) -> LinePos {
    let s = (coord - origin) / h;
    let frac = s - s.floor();
    let tol = ALIGN_TOL * (coord.abs() / h).max(1.0);
    LinePos { s, aligned: frac.min(1.0 - frac) < tol, index: s.round() as i64 }
}

impl Grid {
    pub fn x(&self, i: usize) -> f64 {
        self.domain.l1 + i as f64 * self.h
    }

    pub fn y(&self, j: usize) -> f64 {
        self.domain.l3 + j as f64 * self.h
    }

    /// Number of interior unknowns.
    pub fn unknowns(&self) -> usize {
        (self.n1 - 1) * (self.n2 - 1)
    }

    /// Row-major (j outer) unknown index of interior point (i, j).
    pub fn index(&self, i: usize, j: usize) -> Option<usize> {
        if i == 0 || j == 0 || i >= self.n1 || j >= self.n2 {
            None
        } else {
            Some((j - 1) * (self.n1 - 1) + (i - 1))
        }
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.n1 || j == self.n2
    }

    fn positions(&self) -> (LinePos, LinePos) {
        (
            line_pos(self.domain.xi, self.domain.l1, self.h),
            line_pos(self.domain.zeta, self.domain.l3, self.h),
        )
    }

    pub fn mode(&self) -> Result<InterfaceMode> {
        let (px, py) = self.positions();
        match (px.aligned, py.aligned) {
            (true, true) => Ok(InterfaceMode::Aligned),
            (false, false) => Ok(InterfaceMode::Unaligned),
            _ => Err(Error::MixedAlignment(format!(
                "xi aligned: {}, zeta aligned: {} at h = {}",
                px.aligned, py.aligned, self.h
            ))),
        }
    }

    /// Grid indices of the cross point in aligned mode.
    pub fn cross_index(&self) -> Option<(usize, usize)> {
        let (px, py) = self.positions();
        if px.aligned && py.aligned {
            Some((px.index as usize, py.index as usize))
        } else {
            None
        }
    }

    /// Subdomain holding the stored grid value at (i, j) (positive-side convention).
    pub fn stored_subdomain(&self, i: usize, j: usize) -> usize {
        let (px, py) = self.positions();
        let right = if px.aligned { i as i64 >= px.index } else { i as f64 > px.s };
        let up = if py.aligned { j as i64 >= py.index } else { j as f64 > py.s };
        subdomain_at(if right { 1 } else { -1 }, if up { 1 } else { -1 })
    }

    pub fn classify(&self, i: usize, j: usize) -> Result<PointClass> {
        if i > self.n1 || j > self.n2 {
            return Err(Error::IndexOutOfRange { i, j, n1: self.n1, n2: self.n2 });
        }
        let mode = self.mode()?;
        if self.is_boundary(i, j) {
            return Ok(PointClass::Boundary);
        }
        let (px, py) = self.positions();
        match mode {
            InterfaceMode::Aligned => {
                let (ci, cj) = (px.index, py.index);
                let (ii, jj) = (i as i64, j as i64);
                Ok(match (ii == ci, jj == cj) {
                    (true, true) => PointClass::OnCross,
                    (true, false) => PointClass::OnGamma(if jj > cj { 1 } else { 2 }),
                    (false, true) => PointClass::OnGamma(if ii > ci { 3 } else { 4 }),
                    (false, false) => PointClass::Interior(subdomain_at(
                        (ii - ci).signum() as i32,
                        (jj - cj).signum() as i32,
                    )),
                })
            }
            InterfaceMode::Unaligned => {
                let dx = i as f64 - px.s;
                let dy = j as f64 - py.s;
                let sx = if dx > 0.0 { 1 } else { -1 };
                let sy = if dy > 0.0 { 1 } else { -1 };
                let side = |d: f64| if d > 0.0 { Side::Negative } else { Side::Positive };
                Ok(match (dx.abs() < 1.0, dy.abs() < 1.0) {
                    (true, true) => PointClass::NearCross {
                        quadrant: subdomain_at(sx, sy),
                        w1: dx.abs(),
                        w2: dy.abs(),
                    },
                    (true, false) => PointClass::NearGammaV {
                        side: side(dx),
                        w: dx.abs(),
                        segment: if sy > 0 { 1 } else { 2 },
                    },
                    (false, true) => PointClass::NearGammaH {
                        side: side(dy),
                        w: dy.abs(),
                        segment: if sx > 0 { 3 } else { 4 },
                    },
                    (false, false) => PointClass::Interior(subdomain_at(sx, sy)),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(xi: f64, zeta: f64, n1: usize) -> Grid {
        build_grid(Domain::unit_square(xi, zeta).unwrap(), n1).unwrap()
    }

    #[test]
    fn grid_sizes() {
        let g = unit(0.5, 0.5, 8);
        assert_eq!((g.n2, g.h), (8, 0.125));
        let d = Domain::new(0.0, 1.0, 0.0, 2.0, 0.5, 0.5).unwrap();
        let g = build_grid(d, 4).unwrap();
        assert_eq!((g.n2, g.h), (8, 0.25));
        assert!(Domain::new(0.0, 1.0, 0.0, 1.5, 0.5, 0.5).is_err());
        assert!(build_grid(Domain::unit_square(0.5, 0.5).unwrap(), 1).is_err());
    }

    #[test]
    fn aligned_classes() {
        let g = unit(0.5, 0.5, 8);
        assert_eq!(g.classify(4, 4).unwrap(), PointClass::OnCross);
        assert_eq!(g.classify(4, 6).unwrap(), PointClass::OnGamma(1));
        assert_eq!(g.classify(4, 2).unwrap(), PointClass::OnGamma(2));
        assert_eq!(g.classify(6, 4).unwrap(), PointClass::OnGamma(3));
        assert_eq!(g.classify(1, 4).unwrap(), PointClass::OnGamma(4));
        assert_eq!(g.classify(3, 5).unwrap(), PointClass::Interior(1));
        assert_eq!(g.classify(0, 5).unwrap(), PointClass::Boundary);
    }

    #[test]
    fn unaligned_near_gamma() {
        let xi = std::f64::consts::PI / 5.0;
        let zeta = std::f64::consts::PI / 8.0;
        let g = unit(xi, zeta, 16);
        assert_eq!(g.mode().unwrap(), InterfaceMode::Unaligned);
        let i = (xi * 16.0).floor() as usize;
        let j = 12;
        match g.classify(i, j).unwrap() {
            PointClass::NearGammaV { side, w, segment } => {
                assert_eq!(side, Side::Positive);
                assert_eq!(segment, 1);
                assert!((w - (xi - g.x(i)) / g.h).abs() < 1e-12);
            }
            c => panic!("unexpected {c:?}"),
        }
    }

    #[test]
    fn modes() {
        assert_eq!(unit(0.5, 0.5, 32).mode().unwrap(), InterfaceMode::Aligned);
        assert!(matches!(
            unit(0.5, std::f64::consts::PI / 8.0, 32).mode(),
            Err(Error::MixedAlignment(_))
        ));
    }

    #[test]
    fn frames_map_segments() {
        // Reflecting x: local Γ1 sits on global Γ1 with the jump reversed.
        assert_eq!(Frame::REFLECT_X.segment(1), (1, -1.0, 1.0));
        // Local Γ3 (to the right) lands on global Γ4 with a reversed tangent.
        assert_eq!(Frame::REFLECT_X.segment(3), (4, 1.0, -1.0));
        assert_eq!(Frame::REFLECT_X.quadrant(2), 1);
        assert_eq!(Frame::SWAP.line_sides(3), (3, 2, 1.0, 1.0));
        assert_eq!(Frame::REFLECT_X.line_sides(1), (2, 1, -1.0, 1.0));
        assert_eq!(Frame::SWAP.deriv(2, 1), (1.0, 1, 2));
        assert_eq!(Frame::REFLECT_X.deriv(3, 1), (-1.0, 3, 1));
    }
}
