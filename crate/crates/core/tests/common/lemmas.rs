//! Residuals of the advection-operator identities over random periodic
//! fields. Each `*_literal` entry is the identity exactly as usually stated;
//! the other entries are the forms that follow from the quadrature algebra
//! (`T^T T = I - T_0 T_0^T`, which makes `T M^2 T^T = A^2 + a a^T`, and the
//! discrete adjoint `-L^T = A^+ D^+ + A^- D^-`).

use kinetic_dlra::grid::{advection_apply, d_minus, d_plus, Grid, Boundary};
use kinetic_dlra::operators::FluxOperators;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{bracket, random_matrix, random_vector, rng};

#[derive(Debug, Default, Clone, Copy)]
pub struct LemmaStats {
    pub fields: usize,
    /// Max |sum k^T D^+ g + sum (D^- k)^T g| / (|k| |D^+ g|).
    pub sbp: f64,
    /// Max relative residual of `sum g^T L g = dx/2 sum (D^+g)^T |A| D^+g`.
    pub le3a_rel: f64,
    /// Min of `sum g^T L g / |g|^2`.
    pub le3a_min: f64,
    /// le3b with `L g^1` in the last term.
    pub le3b_literal: f64,
    /// le3b with `(A^+ D^+ + A^- D^-) g^1` in the last term.
    pub le3b_adjoint: f64,
    /// Max of `sum |L g|^2 / (2 sum (D^+g)^T A^2 D^+g + 1e-10 |g|^2)`.
    pub bound_literal: f64,
    /// Same with `T M^2 T^T` in place of `A^2`.
    pub bound_quadrature: f64,
    pub pn_abs: f64,
    pub pn_aa: f64,
    /// `g^T A^2 g = h^T M^2 h`.
    pub pn_a2_literal: f64,
    /// `g^T A^2 g + (a^T g)^2 = h^T M^2 h`.
    pub pn_a2_completed: f64,
}

impl LemmaStats {
    pub fn literal_ok(&self) -> bool {
        self.sbp <= 1e-12
            && self.le3a_rel <= 1e-10
            && self.le3a_min >= -1e-12
            && self.le3b_literal <= 1e-10
            && self.bound_literal <= 1.0
            && self.pn_abs <= 1e-10
            && self.pn_aa <= 1e-10
            && self.pn_a2_literal <= 1e-10
    }

    pub fn derived_ok(&self) -> bool {
        self.sbp <= 1e-12
            && self.le3a_rel <= 1e-10
            && self.le3a_min >= -1e-12
            && self.le3b_adjoint <= 1e-10
            && self.bound_quadrature <= 1.0
            && self.pn_abs <= 1e-10
            && self.pn_aa <= 1e-10
            && self.pn_a2_completed <= 1e-10
    }
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / scale.max(f64::MIN_POSITIVE)
    }
}

pub fn quadrature_m2(ops: &FluxOperators) -> DMatrix<f64> {
    let mut tm = ops.t.clone();
    for (k, mut col) in tm.column_iter_mut().enumerate() {
        col *= ops.quad.nodes[k] * ops.quad.nodes[k];
    }
    &tm * ops.t.transpose()
}

pub fn lemma_suite(ops: &FluxOperators, fields: usize, seed: u64) -> LemmaStats {
    let n = ops.n;
    let mut r = rng(seed);
    let a2 = &ops.a * &ops.a;
    let tm2t = quadrature_m2(ops);
    let mut s = LemmaStats {
        fields,
        le3a_min: f64::INFINITY,
        ..Default::default()
    };
    for _ in 0..fields {
        let nx = r.random_range(4..40);
        let len = r.random_range(0.5..4.0);
        let grid = Grid::new(-len / 2.0, len / 2.0, nx, Boundary::Periodic).unwrap();
        let scale = 10f64.powf(r.random_range(-2.0..2.0));
        let g0 = random_matrix(&mut r, nx, n) * scale;
        let g1 = random_matrix(&mut r, nx, n) * scale;
        let k = random_matrix(&mut r, nx, n);

        let dp1 = d_plus(&g1, &grid).unwrap();
        let dm1 = d_minus(&g1, &grid).unwrap();
        let dmk = d_minus(&k, &grid).unwrap();

        // summation by parts
        let lhs = bracket(&k, &dp1);
        let rhs = -bracket(&dmk, &g1);
        s.sbp = s.sbp.max(rel(lhs, rhs, k.norm() * dp1.norm()));

        // positivity
        let l1 = advection_apply(ops, &g1, &grid).unwrap();
        let l0 = advection_apply(ops, &g0, &grid).unwrap();
        let q = 0.5 * grid.dx * bracket(&dp1, &(&dp1 * &ops.abs_a));
        let gl = bracket(&g1, &l1);
        s.le3a_rel = s.le3a_rel.max(rel(gl, q, q.abs()));
        s.le3a_min = s.le3a_min.min(gl / g1.norm_squared());

        // identity with two fields
        let delta = &g1 - &g0;
        let adj = &dp1 * &ops.a_plus + &dm1 * &ops.a_minus;
        let lhs = bracket(&g1, &l0);
        let lit = q + bracket(&delta, &l1);
        let der = q + bracket(&delta, &adj);
        let sc = lhs.abs().max(q.abs()).max(bracket(&delta, &l1).abs());
        s.le3b_literal = s.le3b_literal.max(rel(lhs, lit, sc));
        s.le3b_adjoint = s.le3b_adjoint.max(rel(lhs, der, sc));

        // boundedness
        let slack = 1e-10 * g1.norm_squared();
        let lsq = l1.norm_squared();
        s.bound_literal = s.bound_literal.max(lsq / (2.0 * bracket(&dp1, &(&dp1 * &a2)) + slack));
        s.bound_quadrature = s.bound_quadrature.max(lsq / (2.0 * bracket(&dp1, &(&dp1 * &tm2t)) + slack));

        // P_N preservation on a single moment vector
        let g = random_vector(&mut r, n) * scale;
        let h = DVector::from_fn(n + 1, |i, _| if i == 0 { 0.0 } else { g[i - 1] });
        let hh = ops.tf.transpose() * &h;
        let mu = &ops.quad.nodes;
        let hm2: f64 = hh.iter().zip(mu).map(|(x, m)| x * x * m * m).sum();
        let habs: f64 = hh.iter().zip(mu).map(|(x, m)| x * x * m.abs()).sum();
        let tfa = ops.tf.transpose() * &ops.af;
        let haa = hh.dot(&tfa).powi(2);
        let ga2 = (g.transpose() * &a2 * &g)[0];
        let gabs = (g.transpose() * &ops.abs_a * &g)[0];
        let gaa = g.dot(&ops.a_vec).powi(2);
        s.pn_abs = s.pn_abs.max(rel(gabs, habs, gabs.abs().max(habs.abs())));
        s.pn_aa = s.pn_aa.max(rel(gaa, haa, gaa.abs().max(haa.abs()).max(1e-300)));
        s.pn_a2_literal = s.pn_a2_literal.max(rel(ga2, hm2, ga2.abs().max(hm2.abs())));
        s.pn_a2_completed = s.pn_a2_completed.max(rel(ga2 + gaa, hm2, hm2.abs()));
    }
    s
}
