//! Index sets, the bivariate Taylor kernels G and H, and their
//! stencil-weighted aggregates.
//!
//! `G_{m,n}` multiplies the derivative `u^{(m,n)}` (m in {0,1}) and `H_{m,n}`
//! multiplies `f^{(m,n)}/a` in the interface-aware expansion
//!
//! ```text
//! u(x* + x, y* + y) = Σ_{Λ¹_M} u^{(m,n)} G_{m,n}(x,y) + (1/a) Σ_{Λ_{M-2}} f^{(m,n)} H_{m,n}(x,y) + O(h^{M+1})
//! ```
//!
//! The truncation order M only labels a kernel; its value does not depend on it.

const FACT: [f64; 21] = {
    let mut t = [1.0; 21];
    let mut i = 1;
    while i < 21 {
        t[i] = t[i - 1] * i as f64;
        i += 1;
    }
    t
};

pub fn factorial(n: usize) -> f64 {
    FACT[n]
}

pub fn odd(m: usize) -> usize {
    m & 1
}

pub fn floor_half(m: usize) -> usize {
    m / 2
}

/// (-1)^k
pub fn sign_pow(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.s + v;
        if self.s.abs() >= v.abs() {
            self.c += (self.s - t) + v;
        } else {
            self.c += (v - t) + self.s;
        }
        self.s = t;
    }

    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

impl std::iter::FromIterator<f64> for Sum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Sum::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}

pub fn sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<Sum>().value()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Λ_M: all (m, n) with m + n <= M.
    Full,
    /// Λ¹_M: the members with m in {0, 1}.
    Low,
    /// Λ²_M: the members with m >= 2.
    High,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexSet {
    pub order: usize,
    pub variant: Variant,
}

impl IndexSet {
    pub fn full(order: usize) -> Self {
        IndexSet { order, variant: Variant::Full }
    }

    pub fn low(order: usize) -> Self {
        IndexSet { order, variant: Variant::Low }
    }

    pub fn high(order: usize) -> Self {
        IndexSet { order, variant: Variant::High }
    }

    /// Members ordered by total degree, then by m.
    pub fn members(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for d in 0..=self.order {
            for m in 0..=d {
                let keep = match self.variant {
                    Variant::Full => true,
                    Variant::Low => m <= 1,
                    Variant::High => m >= 2,
                };
                if keep {
                    out.push((m, d - m));
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.members().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// G_{m,n}(x, y) = Σ_{l=0}^{⌊n/2⌋} (-1)^l x^{m+2l} y^{n-2l} / ((m+2l)! (n-2l)!)
pub fn eval_g(m: usize, n: usize, x: f64, y: f64) -> f64 {
    sum((0..=n / 2).map(|l| {
        sign_pow(l) * x.powi((m + 2 * l) as i32) * y.powi((n - 2 * l) as i32)
            / (FACT[m + 2 * l] * FACT[n - 2 * l])
    }))
}

/// H_{m,n}(x, y) = Σ_{l=1}^{1+⌊n/2⌋} (-1)^l x^{m+2l} y^{n-2l+2} / ((m+2l)! (n-2l+2)!)
pub fn eval_h(m: usize, n: usize, x: f64, y: f64) -> f64 {
    sum((1..=1 + n / 2).map(|l| {
        sign_pow(l) * x.powi((m + 2 * l) as i32) * y.powi((n + 2 - 2 * l) as i32)
            / (FACT[m + 2 * l] * FACT[n + 2 - 2 * l])
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    G,
    H,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Kernel {
    pub kind: KernelKind,
    pub order: usize,
    pub m: usize,
    pub n: usize,
}

impl Kernel {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            KernelKind::G => eval_g(self.m, self.n, x, y),
            KernelKind::H => eval_h(self.m, self.n, x, y),
        }
    }

    /// Total degree of every monomial.
    pub fn degree(&self) -> usize {
        match self.kind {
            KernelKind::G => self.m + self.n,
            KernelKind::H => self.m + self.n + 2,
        }
    }
}

/// 3x3 stencil block indexed by k, l in {-1, 0, 1}.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct StencilWeights(pub [[f64; 3]; 3]);

impl StencilWeights {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn get(&self, k: i32, l: i32) -> f64 {
        self.0[(k + 1) as usize][(l + 1) as usize]
    }

    pub fn set(&mut self, k: i32, l: i32, v: f64) {
        self.0[(k + 1) as usize][(l + 1) as usize] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = (i32, i32, f64)> + '_ {
        (-1..=1).flat_map(move |k| (-1..=1).map(move |l| (k, l, self.get(k, l))))
    }

    pub fn sum(&self) -> f64 {
        sum(self.entries().map(|e| e.2))
    }

    pub fn abs_sum(&self) -> f64 {
        self.entries().map(|e| e.2.abs()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().map(|e| e.2.abs()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    G,
    HMinus,
    HPlus,
}

fn hpow(h: f64, k: usize) -> f64 {
    h.powi(k as i32)
}

/// Aggregates for a vertical interface at distance `w h` left of the centre
/// point: column k = -1 lies on the minus side, columns k = 0, 1 on the plus side.
pub fn agg_vertical(c: &StencilWeights, m: usize, n: usize, w: f64, h: f64, which: Which) -> f64 {
    match which {
        Which::G => {
            hpow(h, m + n) * sum((-1..=1).map(|l| c.get(-1, l) * eval_g(m, n, w - 1.0, l as f64)))
        }
        Which::HMinus => {
            hpow(h, m + n + 2)
                * sum((-1..=1).map(|l| c.get(-1, l) * eval_h(m, n, w - 1.0, l as f64)))
        }
        Which::HPlus => {
            hpow(h, m + n + 2)
                * sum((0..=1).flat_map(|k| {
                    (-1..=1).map(move |l| c.get(k, l) * eval_h(m, n, w + k as f64, l as f64))
                }))
        }
    }
}

/// Horizontal counterpart: row l = -1 lies below the line, rows l = 0, 1
/// above, and kernels are evaluated with swapped indices and arguments.
pub fn agg_horizontal(
    c: &StencilWeights,
    m: usize,
    n: usize,
    w: f64,
    h: f64,
    which: Which,
) -> f64 {
    match which {
        Which::G => {
            hpow(h, m + n) * sum((-1..=1).map(|k| c.get(k, -1) * eval_g(n, m, w - 1.0, k as f64)))
        }
        Which::HMinus => {
            hpow(h, m + n + 2)
                * sum((-1..=1).map(|k| c.get(k, -1) * eval_h(n, m, w - 1.0, k as f64)))
        }
        Which::HPlus => {
            hpow(h, m + n + 2)
                * sum((-1..=1).flat_map(|k| {
                    (0..=1).map(move |l| c.get(k, l) * eval_h(n, m, w + l as f64, k as f64))
                }))
        }
    }
}

/// Quadrant-restricted aggregates around a cross point at
/// `(x_i - w1 h, y_j - w2 h)`.  Quadrant 1 is column k = -1 (rows 0, 1),
/// quadrant 2 the block k, l in {0, 1}, quadrant 3 row l = -1 (k = 0, 1) and
/// quadrant 4 the corner (-1, -1); quadrants 3 and 4 use the swapped kernel.
#[allow(clippy::too_many_arguments)]
pub fn agg_quadrant(
    c: &StencilWeights,
    p: usize,
    m: usize,
    n: usize,
    w1: f64,
    w2: f64,
    h: f64,
    kind: KernelKind,
) -> f64 {
    let (kern, deg): (fn(usize, usize, f64, f64) -> f64, usize) = match kind {
        KernelKind::G => (eval_g, m + n),
        KernelKind::H => (eval_h, m + n + 2),
    };
    let s = match p {
        1 => sum((0..=1).map(|l| c.get(-1, l) * kern(m, n, w1 - 1.0, w2 + l as f64))),
        2 => sum((0..=1).flat_map(|k| {
            (0..=1).map(move |l| c.get(k, l) * kern(m, n, w1 + k as f64, w2 + l as f64))
        })),
        3 => sum((0..=1).map(|k| c.get(k, -1) * kern(n, m, w2 - 1.0, w1 + k as f64))),
        _ => c.get(-1, -1) * kern(n, m, w2 - 1.0, w1 - 1.0),
    };
    hpow(h, deg) * s
}
