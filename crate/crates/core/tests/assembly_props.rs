mod common;

use crossfd::assembly::{assemble, validate_m_matrix, Scheme, SparseSystem};
use crossfd::mesh::{build_grid, Domain};
use crossfd::problems::{make_example, make_piecewise_polynomial};
use crossfd::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn structure_ok(sys: &SparseSystem) {
    let g = &sys.grid;
    assert_eq!(sys.n, g.unknowns());
    assert_eq!(sys.row_ptr.len(), sys.n + 1);
    for r in 0..sys.n {
        assert!(sys.get(r, r) != 0.0, "zero diagonal in row {r}");
        let (i, j) = (sys.rows[r].i, sys.rows[r].j);
        for (c, _) in sys.row(r) {
            let (ci, cj) = (c % (g.n1 - 1) + 1, c / (g.n1 - 1) + 1);
            assert!(ci.abs_diff(i) <= 1 && cj.abs_diff(j) <= 1, "row {r} couples to ({ci},{cj})");
        }
        let w = &sys.rows[r].weights;
        assert!(w.sum().abs() <= 1e-12 * w.abs_sum(), "row ({i},{j}) sums to {}", w.sum());
    }
}

#[test]
fn rows_sum_to_zero_for_every_scheme() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let aligned = common::random_aligned(&mut rng, 16);
        let unaligned = common::random_unaligned(&mut rng, 16, 1e-3);
        for (domain, schemes) in [
            (aligned, &[Scheme::HighOrder, Scheme::MMatrix][..]),
            (unaligned, &[Scheme::HighOrder, Scheme::MMatrix][..]),
        ] {
            let p = common::random_polynomial(&mut rng, 2, domain, -4.0, 4.0);
            for &scheme in schemes {
                structure_ok(&assemble(&p, &build_grid(domain, 16).unwrap(), scheme, None).unwrap());
            }
        }
    }
}

#[test]
fn assembly_is_deterministic() {
    for name in ["ex42", "ex44"] {
        let p = make_example(name).unwrap();
        let grid = build_grid(p.domain, 32).unwrap();
        let a = assemble(&p, &grid, Scheme::HighOrder, None).unwrap();
        let b = assemble(&p, &grid, Scheme::HighOrder, None).unwrap();
        assert!(a.vals.iter().zip(&b.vals).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert!(a.rhs.iter().zip(&b.rhs).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_eq!(a.cols, b.cols);
        let (mut ta, mut tb) = (Vec::new(), Vec::new());
        a.write_triplets(&mut ta).unwrap();
        b.write_triplets(&mut tb).unwrap();
        assert_eq!(ta, tb);
        assert_eq!(String::from_utf8(ta).unwrap().lines().filter(|l| !l.starts_with('%')).count(), a.vals.len());
    }
}

#[test]
fn equal_coefficients_give_the_classical_nine_point_matrix() {
    let domain = Domain::unit_square(0.5, 0.25).unwrap();
    let p = make_piecewise_polynomial(2, [3.0; 4], domain, std::array::from_fn(|_| vec![(2, 0, 1.0), (0, 2, -1.0)])).unwrap();
    let n1 = 8;
    let grid = build_grid(domain, n1).unwrap();
    let sys = assemble(&p, &grid, Scheme::HighOrder, None).unwrap();
    assert_eq!(sys.n, 49);
    let m = n1 - 1;
    for r in 0..sys.n {
        let (i, j) = (r % m, r / m);
        let d = sys.get(r, r);
        for c in 0..sys.n {
            let (ci, cj) = (c % m, c / m);
            let (di, dj) = (ci.abs_diff(i), cj.abs_diff(j));
            let want = match (di, dj) {
                (0, 0) => 20.0,
                (1, 0) | (0, 1) => -4.0,
                (1, 1) => -1.0,
                _ => 0.0,
            };
            let got = 20.0 * sys.get(r, c) / d;
            assert!((got - want).abs() < 1e-13, "({r},{c}): {got} vs {want}");
        }
    }
}

#[test]
fn m_matrix_audits() {
    let ex41 = make_example("ex41").unwrap();
    let sys = assemble(&ex41, &build_grid(ex41.domain, 16).unwrap(), Scheme::HighOrder, None).unwrap();
    assert!(validate_m_matrix(&sys).unwrap().verdict);
    let ex44 = make_example("ex44").unwrap();
    let grid = build_grid(ex44.domain, 16).unwrap();
    let high = validate_m_matrix(&assemble(&ex44, &grid, Scheme::HighOrder, None).unwrap()).unwrap();
    assert!(!high.verdict && high.sign_failures > 0 && high.sum_failures == 0);
    assert_eq!(high.verdict, high.rows.iter().all(|r| r.sign_ok && r.sum_ok));
    let low = validate_m_matrix(&assemble(&ex44, &grid, Scheme::MMatrix, None).unwrap()).unwrap();
    assert!(low.verdict);
}

#[test]
fn mixed_alignment_is_an_error() {
    let domain = Domain::unit_square(0.5, std::f64::consts::PI / 8.0).unwrap();
    let p = make_piecewise_polynomial(1, [1.0; 4], domain, std::array::from_fn(|_| vec![(1, 0, 1.0)])).unwrap();
    let r = assemble(&p, &build_grid(domain, 8).unwrap(), Scheme::HighOrder, None);
    assert!(matches!(r, Err(Error::MixedAlignment(_))));
}
