#![allow(dead_code)]

use crossfd::mesh::Domain;
use crossfd::problems::{make_piecewise_polynomial, ProblemSpec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Four independent random polynomial branches of total degree `degree`.
pub fn random_branches(rng: &mut ChaCha8Rng, degree: usize) -> [Vec<(usize, usize, f64)>; 4] {
    std::array::from_fn(|_| {
        let mut b = Vec::new();
        for d in 0..=degree {
            for i in 0..=d {
                b.push((i, d - i, rng.gen_range(-1.0..1.0)));
            }
        }
        b
    })
}

/// Coefficients log-uniform in [10^lo, 10^hi].
pub fn random_coefficients(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> [f64; 4] {
    std::array::from_fn(|_| 10f64.powf(rng.gen_range(lo..hi)))
}

pub fn random_polynomial(rng: &mut ChaCha8Rng, degree: usize, domain: Domain, lo: f64, hi: f64) -> ProblemSpec {
    let a = random_coefficients(rng, lo, hi);
    make_piecewise_polynomial(degree, a, domain, random_branches(rng, degree)).unwrap()
}

/// Cross point strictly inside a cell of the `n1` grid, at least `margin` h
/// away from every grid line.
pub fn random_unaligned(rng: &mut ChaCha8Rng, n1: usize, margin: f64) -> Domain {
    let h = 1.0 / n1 as f64;
    let mut coord = || (rng.gen_range(2..n1 - 2) as f64 + rng.gen_range(margin..1.0 - margin)) * h;
    let xi = coord();
    let zeta = coord();
    Domain::unit_square(xi, zeta).unwrap()
}

/// Cross point on a grid node of the `n1` grid, away from the boundary.
pub fn random_aligned(rng: &mut ChaCha8Rng, n1: usize) -> Domain {
    let h = 1.0 / n1 as f64;
    let xi = rng.gen_range(2..n1 - 1) as f64 * h;
    let zeta = rng.gen_range(2..n1 - 1) as f64 * h;
    Domain::unit_square(xi, zeta).unwrap()
}
