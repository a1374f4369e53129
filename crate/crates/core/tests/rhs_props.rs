use crossfd::assembly::{assemble, Scheme};
use crossfd::mesh::build_grid;
use crossfd::problems::{make_example, make_piecewise_polynomial, Problem};
use crossfd::rhs::{
    cross_family_load, interior_load, line_load, CrossData, DerivTable, InteriorData, LineData,
};
use crossfd::stencils::{
    cross_stencil, gamma_canonical, near_cross2_canonical, near_cross_order4, near_gamma3_canonical,
    near_gamma4_canonical, rho_interval,
};
use crossfd::Error;
use proptest::prelude::*;

fn table(order: usize, v: &[f64]) -> DerivTable {
    let mut it = v.iter().cycle();
    DerivTable::from_fn(order, |_, _| *it.next().unwrap())
}

fn line(w: f64, a: (f64, f64), v: &[f64], order: usize) -> LineData {
    let lo = order.saturating_sub(2);
    LineData {
        w,
        h: 0.05,
        a_minus: a.0,
        a_plus: a.1,
        f_minus: table(lo, v),
        f_plus: table(lo, &v[3..]),
        phi: v[1..=order + 1].to_vec(),
        psi: v[2..order + 2].to_vec(),
    }
}

fn cross(w1: f64, w2: f64, a: [f64; 4], v: &[f64], order: usize) -> CrossData {
    let lo = order.saturating_sub(2);
    CrossData {
        w1,
        w2,
        h: 0.05,
        a,
        f: std::array::from_fn(|p| table(lo, &v[p..])),
        phi: std::array::from_fn(|p| v[p..=p + order].to_vec()),
        psi: std::array::from_fn(|p| v[p + 4..p + 4 + order].to_vec()),
    }
}

fn combine(x: &[f64], y: &[f64], s: f64, t: f64) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| s * a + t * b).collect()
}

fn close(v: f64, w: f64, scale: f64) -> bool {
    (v - w).abs() <= 1e-12 * scale.max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn loads_are_linear(
        x in prop::collection::vec(-1.0f64..1.0, 40),
        y in prop::collection::vec(-1.0f64..1.0, 40),
        s in -3.0f64..3.0,
        t in -3.0f64..3.0,
        w in 0.05f64..0.95,
        w2 in 0.05f64..0.95,
        a in prop::array::uniform4(0.1f64..10.0),
    ) {
        let z = combine(&x, &y, s, t);
        let (lx, ly, lz) = (
            interior_load(&InteriorData { h: 0.05, a: a[0], f: table(4, &x) }).unwrap().value,
            interior_load(&InteriorData { h: 0.05, a: a[0], f: table(4, &y) }).unwrap().value,
            interior_load(&InteriorData { h: 0.05, a: a[0], f: table(4, &z) }).unwrap().value,
        );
        prop_assert!(close(lz, s * lx + t * ly, (s * lx).abs() + (t * ly).abs() + lz.abs()));

        let alpha = a[0] / a[1];
        let (lo, hi) = rho_interval(w, alpha);
        let line_cases = [
            (0.0, gamma_canonical(alpha), 7),
            (w, near_gamma4_canonical(w, alpha), 4),
            (w, near_gamma3_canonical(w, alpha, 0.5 * (lo + hi)), 3),
        ];
        for (ww, c, order) in line_cases {
            let l = |v: &[f64]| line_load(&line(ww, (a[0], a[1]), v, order), &c, order).unwrap().value;
            let (lx, ly, lz) = (l(&x), l(&y), l(&z));
            prop_assert!(close(lz, s * lx + t * ly, (s * lx).abs() + (t * ly).abs() + lz.abs()), "order {}", order);
        }

        let nc4 = near_cross_order4(2, w, w2, &a).unwrap();
        let cross_cases = [
            (0.0, 0.0, cross_stencil(&a).unwrap().weights, None, 7),
            (w, w2, nc4.weights, nc4.split, 4),
            (w, w2, near_cross2_canonical(w, w2, &a), None, 2),
        ];
        for (w1, w2, c, split, order) in cross_cases {
            let l = |v: &[f64]| cross_family_load(&cross(w1, w2, a, v, order), &c, split, order).unwrap().value;
            let (lx, ly, lz) = (l(&x), l(&y), l(&z));
            prop_assert!(close(lz, s * lx + t * ly, (s * lx).abs() + (t * ly).abs() + lz.abs()), "order {}", order);
        }
    }
}

#[test]
fn homogeneous_data_gives_zero_load() {
    let zero = vec![0.0; 40];
    let a = [0.5, 2.0, 3.0, 0.7];
    assert_eq!(interior_load(&InteriorData { h: 0.1, a: 1.0, f: table(4, &zero) }).unwrap().value, 0.0);
    let c = gamma_canonical(0.25);
    assert_eq!(line_load(&line(0.0, (0.5, 2.0), &zero, 7), &c, 7).unwrap().value, 0.0);
    let c = cross_stencil(&a).unwrap().weights;
    assert_eq!(cross_family_load(&cross(0.0, 0.0, a, &zero, 7), &c, None, 7).unwrap().value, 0.0);
}

#[test]
fn short_tables_are_rejected() {
    let v = vec![1.0; 40];
    let r = interior_load(&InteriorData { h: 0.1, a: 1.0, f: table(3, &v) });
    assert!(matches!(r, Err(Error::TableUnderfilled { have: 3, need: 4 })));
    let c = gamma_canonical(0.25);
    let r = line_load(&line(0.0, (0.5, 2.0), &v, 6), &c, 7);
    assert!(matches!(r, Err(Error::TableUnderfilled { .. })));
    let a = [0.5, 2.0, 3.0, 0.7];
    let c = cross_stencil(&a).unwrap().weights;
    let r = cross_family_load(&cross(0.0, 0.0, a, &v, 5), &c, None, 7);
    assert!(matches!(r, Err(Error::TableUnderfilled { .. })));
}

/// Mirroring the problem about x = xi must reproduce the same right-hand side
/// at the mirrored grid point, computed through the opposite orientation.
fn check_mirror(problem: &crossfd::problems::ProblemSpec, n1: usize, scheme: Scheme) {
    let mirrored = problem.reflect_x();
    let g1 = build_grid(problem.domain(), n1).unwrap();
    let g2 = build_grid(mirrored.domain(), n1).unwrap();
    let s1 = assemble(problem, &g1, scheme, None).unwrap();
    let s2 = assemble(&mirrored, &g2, scheme, None).unwrap();
    // Rows are compared after dividing by the diagonal: on-line stencils are
    // normalized on their plus side, which mirroring exchanges.
    let normalized = |s: &crossfd::assembly::SparseSystem, r: usize| s.rhs[r] / s.get(r, r);
    let rhs_max = (0..s1.n).fold(0.0f64, |m, r| m.max(normalized(&s1, r).abs()));
    for j in 1..g1.n2 {
        for i in 1..g1.n1 {
            let r1 = g1.index(i, j).unwrap();
            let r2 = g2.index(n1 - i, j).unwrap();
            let (b1, b2) = (normalized(&s1, r1), normalized(&s2, r2));
            assert!(
                (b1 - b2).abs() <= 1e-10 * (b1.abs() + b2.abs() + rhs_max),
                "{} {scheme} ({i},{j}) {:?}: {b1} vs {b2}",
                problem.name,
                s1.rows[r1].class
            );
        }
    }
}

#[test]
fn mirrored_problems_share_loads() {
    check_mirror(&make_example("audit-unaligned").unwrap(), 16, Scheme::HighOrder);
    check_mirror(&make_example("audit-unaligned").unwrap(), 16, Scheme::MMatrix);
    // Nodes on an aligned line store the plus-side branch, which mirroring
    // swaps, and the on-cross expansion moves to another quadrant.  With a
    // continuous polynomial of degree 6 every aligned load is exact, so the
    // two orientations must agree to rounding.
    let aligned = crossfd::mesh::Domain::unit_square(0.5, 0.375).unwrap();
    let global = vec![(0, 0, 1.0), (1, 1, -0.5), (3, 2, 0.7), (6, 0, 0.2), (2, 4, -0.3)];
    let smooth = make_piecewise_polynomial(6, [1e-3, 20.0, 0.4, 7.0], aligned, std::array::from_fn(|_| global.clone())).unwrap();
    check_mirror(&smooth, 16, Scheme::HighOrder);
    let domain = crossfd::mesh::Domain::unit_square(0.43, 0.61).unwrap();
    let branches = std::array::from_fn(|p| vec![(0, 0, 1.0 + p as f64), (1, 2, -0.5), (3, 1, 0.25 * p as f64), (2, 0, 0.3)]);
    let poly = make_piecewise_polynomial(4, [0.3, 4.0, 1.5, 0.02], domain, branches).unwrap();
    check_mirror(&poly, 16, Scheme::HighOrder);
}
