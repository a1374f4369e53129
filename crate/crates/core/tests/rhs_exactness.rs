use crossfd::assembly::{row_residual, Scheme};
use crossfd::mesh::{build_grid, Domain};
use crossfd::problems::make_piecewise_polynomial;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_branches(rng: &mut ChaCha8Rng, degree: usize) -> [Vec<(usize, usize, f64)>; 4] {
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

fn check(domain: Domain, n1: usize, scheme: Scheme, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = build_grid(domain, n1).unwrap();
    for degree in [2usize, 3, 4, 6, 7] {
        let a = std::array::from_fn(|_| 10f64.powf(rng.gen_range(-2.0..2.0)));
        let problem = make_piecewise_polynomial(degree, a, domain, random_branches(&mut rng, degree)).unwrap();
        for j in 1..grid.n2 {
            for i in 1..grid.n1 {
                let r = row_residual(&problem, &grid, i, j, scheme, None).unwrap();
                if r.stencil.consistency_order < degree {
                    continue;
                }
                let rel = r.residual.abs() / r.scale;
                assert!(
                    rel < 1e-12,
                    "degree {degree} {:?} {} at ({i},{j}): relative residual {rel:e}",
                    r.class,
                    r.stencil.case.label()
                );
            }
        }
    }
}

#[test]
fn aligned_rows_are_exact() {
    check(Domain::unit_square(0.5, 0.5).unwrap(), 8, Scheme::HighOrder, 1);
    check(Domain::unit_square(0.25, 0.625).unwrap(), 8, Scheme::HighOrder, 2);
}

#[test]
fn unaligned_high_order_rows_are_exact() {
    check(Domain::unit_square(0.37, 0.58).unwrap(), 8, Scheme::HighOrder, 3);
}

#[test]
fn unaligned_mmatrix_rows_are_exact() {
    check(Domain::unit_square(0.37, 0.58).unwrap(), 8, Scheme::MMatrix, 4);
}

