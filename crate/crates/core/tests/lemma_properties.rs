mod common;

use common::lemmas::{lemma_suite, quadrature_m2};
use common::{bracket, periodic_grid};
use kinetic_dlra::grid::{advection_apply, d_minus, d_plus};
use kinetic_dlra::operators::build_operators;
use nalgebra::DMatrix;
use proptest::prelude::*;

const MOMENTS: [usize; 4] = [1, 2, 5, 20];

#[test]
fn derived_identities_hold_on_random_fields() {
    for (i, &n) in MOMENTS.iter().enumerate() {
        let ops = build_operators(n).unwrap();
        let s = lemma_suite(&ops, 1000, 100 + i as u64);
        assert!(s.sbp <= 1e-12, "N={n}: {s:?}");
        assert!(s.le3a_rel <= 1e-10, "N={n}: {s:?}");
        assert!(s.le3a_min >= -1e-12, "N={n}: {s:?}");
        assert!(s.le3b_adjoint <= 1e-10, "N={n}: {s:?}");
        assert!(s.bound_quadrature <= 1.0, "N={n}: {s:?}");
        assert!(s.pn_abs <= 1e-10 && s.pn_aa <= 1e-10, "N={n}: {s:?}");
        assert!(s.pn_a2_completed <= 1e-10, "N={n}: {s:?}");
        assert!(s.derived_ok());
    }
}

#[test]
fn quadrature_square_is_a_squared_plus_coupling() {
    for n in [1, 2, 7, 30] {
        let ops = build_operators(n).unwrap();
        let lhs = quadrature_m2(&ops);
        let rhs = &ops.a * &ops.a + &ops.a_vec * ops.a_vec.transpose();
        assert!((lhs - rhs).amax() <= 1e-13, "N={n}");
    }
}

/// The two-field identity with `L` itself in the last term fails whenever
/// `g^0 = 0`: its right side is then twice the dissipation.
#[test]
fn two_field_identity_needs_the_adjoint() {
    let ops = build_operators(3).unwrap();
    let grid = periodic_grid(12);
    let g1 = DMatrix::from_fn(12, 3, |i, k| ((i * 7 + k * 3) % 5) as f64 - 2.0);
    let l1 = advection_apply(&ops, &g1, &grid).unwrap();
    let dp = d_plus(&g1, &grid).unwrap();
    let q = 0.5 * grid.dx * bracket(&dp, &(&dp * &ops.abs_a));
    assert!(q > 0.0);
    assert!((bracket(&g1, &l1) - q).abs() <= 1e-12 * q);
    // literal right side with g0 = 0 is q + <g1, L g1> = 2q, left side is 0
    assert!((q + bracket(&g1, &l1) - 2.0 * q).abs() <= 1e-12 * q);
}

/// With `N = 1` the flux matrix vanishes but the stabilization does not, so
/// a bound in terms of `A^2` alone cannot hold.
#[test]
fn boundedness_with_a_squared_fails_for_one_moment() {
    let ops = build_operators(1).unwrap();
    assert_eq!(ops.a[(0, 0)], 0.0);
    let grid = periodic_grid(8);
    let g = DMatrix::from_fn(8, 1, |i, _| if i == 3 { 1.0 } else { 0.0 });
    let lg = advection_apply(&ops, &g, &grid).unwrap();
    assert!(lg.norm_squared() > 0.0);
}

#[test]
fn literal_first_moment_identity_misses_coupling_term() {
    let ops = build_operators(4).unwrap();
    let s = lemma_suite(&ops, 50, 9);
    assert!(s.pn_a2_literal > 1e-3);
    assert!(s.pn_a2_completed <= 1e-10);
}

fn field(n: usize, nx: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-10.0f64..10.0, n * nx).prop_map(move |v| DMatrix::from_vec(nx, n, v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn summation_by_parts(k in field(3, 9), g in field(3, 9)) {
        let grid = periodic_grid(9);
        let lhs = bracket(&k, &d_plus(&g, &grid).unwrap());
        let rhs = -bracket(&d_minus(&k, &grid).unwrap(), &g);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + k.norm() * g.norm() / grid.dx));
    }

    #[test]
    fn advection_dissipates(g in field(5, 11)) {
        let ops = build_operators(5).unwrap();
        let grid = periodic_grid(11);
        let lg = advection_apply(&ops, &g, &grid).unwrap();
        prop_assert!(bracket(&g, &lg) >= -1e-12 * g.norm_squared());
    }
}
