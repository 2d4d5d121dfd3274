//! Fixed-rank basis-update & Galerkin (BUG) integrator for the microscopic
//! field `g ~ X S V^T`.
//!
//! A step updates the spatial basis (K-step) and the moment basis (L-step)
//! independently, each with explicit streaming, explicit coupling to
//! `D^+ rho^n` and implicit scattering. The coefficients are then projected
//! onto the new bases and advanced by a Galerkin S-step with the same IMEX
//! splitting, after which the density is updated with the new first moment.
//!
//! `X` (interfaces x r) and `V` (N x r) have Euclidean-orthonormal columns;
//! spatial brackets are plain sums over interfaces, so for constant `sigma`
//! the scattering Gram matrix `X^T diag(sigma) X` is `sigma I`.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::config::{Problem, SolverConfig};
use crate::error::{Error, Result};
use crate::grid::{d_minus, d_plus, div_to_midpoints, grad_to_interfaces, guard, Grid, SigmaField};
use crate::operators::FluxOperators;
use crate::trajectory::{integrate, Trajectory};

/// Rank-`r` factorisation `g = X S V^T`. Only the product is meaningful;
/// the factors are defined up to orthogonal rotations.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankState {
    pub x: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub v: DMatrix<f64>,
}

impl LowRankState {
    pub fn new(x: DMatrix<f64>, s: DMatrix<f64>, v: DMatrix<f64>) -> Result<Self> {
        let r = s.nrows();
        if s.ncols() != r || x.ncols() != r || v.ncols() != r {
            return Err(Error::shape(
                "low-rank factors",
                format!("rank {r} in X, S, V"),
                format!("X {:?}, S {:?}, V {:?}", x.shape(), s.shape(), v.shape()),
            ));
        }
        Ok(LowRankState { x, s, v })
    }

    pub fn rank(&self) -> usize {
        self.s.nrows()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.x * &self.s * self.v.transpose()
    }

    /// Largest entry of `|X^T X - I|` and `|V^T V - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let r = self.rank();
        let id = DMatrix::<f64>::identity(r, r);
        let dx = (self.x.transpose() * &self.x - &id).amax();
        let dv = (self.v.transpose() * &self.v - &id).amax();
        dx.max(dv)
    }

    /// `||X S V^T||_F^2`, computed from `S` alone.
    pub fn field_norm2(&self) -> f64 {
        self.s.norm_squared()
    }

    fn check(&self, grid: &Grid, n_moments: usize) -> Result<()> {
        if self.x.nrows() != grid.n_interfaces() {
            return Err(Error::shape("X rows", grid.n_interfaces(), self.x.nrows()));
        }
        if self.v.nrows() != n_moments {
            return Err(Error::shape("V rows", n_moments, self.v.nrows()));
        }
        Ok(())
    }
}

/// Thin QR factorisation with a nonnegative `R` diagonal.
#[derive(Debug, Clone)]
pub struct Orthonormalized {
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    /// Set when some column was (numerically) dependent on the previous ones
    /// and `Q` had to be completed.
    pub deficient: bool,
}

const DEFICIENCY_TOL: f64 = 1e-12;

/// Column-wise Gram-Schmidt with re-orthogonalisation.
///
/// A column whose residual falls below `1e-12` of the largest input column
/// norm is treated as dependent: its `R` diagonal is zero and its `Q` column
/// is filled, after all other columns, with the first canonical basis vector
/// that survives orthogonalisation against every accepted column.
pub fn orthonormalize(b: &DMatrix<f64>) -> Result<Orthonormalized> {
    let (m, r) = b.shape();
    if r > m {
        return Err(Error::InvalidArgument(format!(
            "cannot orthonormalize {r} columns in dimension {m}"
        )));
    }
    let scale = b.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut q = DMatrix::zeros(m, r);
    let mut rr = DMatrix::zeros(r, r);
    let mut accepted = vec![false; r];

    for j in 0..r {
        let mut v = b.column(j).into_owned();
        for _pass in 0..2 {
            for i in 0..j {
                if !accepted[i] {
                    continue;
                }
                let qi = q.column(i);
                let c = qi.dot(&v);
                v.axpy(-c, &qi, 1.0);
                rr[(i, j)] += c;
            }
        }
        let nu = v.norm();
        if scale > 0.0 && nu > DEFICIENCY_TOL * scale {
            q.set_column(j, &(v / nu));
            rr[(j, j)] = nu;
            accepted[j] = true;
        }
    }

    let deficient = accepted.iter().any(|a| !a);
    if deficient {
        let mut next_canonical = 0;
        for j in 0..r {
            if accepted[j] {
                continue;
            }
            loop {
                if next_canonical >= m {
                    return Err(Error::Internal("basis completion ran out of canonical vectors".into()));
                }
                let mut e = DVector::zeros(m);
                e[next_canonical] = 1.0;
                next_canonical += 1;
                for _pass in 0..2 {
                    for i in 0..r {
                        if accepted[i] {
                            let qi = q.column(i);
                            let c = qi.dot(&e);
                            e.axpy(-c, &qi, 1.0);
                        }
                    }
                }
                let nu = e.norm();
                if nu > 0.5 {
                    q.set_column(j, &(e / nu));
                    accepted[j] = true;
                    break;
                }
            }
        }
    }
    Ok(Orthonormalized { q, r: rr, deficient })
}

/// New basis from a K- or L-step and its projection onto the old basis.
#[derive(Debug, Clone)]
pub struct BasisUpdate {
    pub basis: DMatrix<f64>,
    /// `new^T old`, `r x r`.
    pub projection: DMatrix<f64>,
    pub deficient: bool,
}

/// `A Y` for an `N x r` matrix, using the tridiagonal structure of `A`.
fn a_times(ops: &FluxOperators, y: &DMatrix<f64>) -> DMatrix<f64> {
    ops.right_mul_a(&y.transpose()).transpose()
}

/// `(A^+ Y, A^- Y)`.
fn split_flux_times(ops: &FluxOperators, y: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let ay = a_times(ops, y);
    let abs_y = &ops.abs_a * y;
    ((&ay + &abs_y) * 0.5, (ay - abs_y) * 0.5)
}

/// Galerkin flux blocks `(V^T A^+ V, V^T A^- V)`.
fn projected_flux(ops: &FluxOperators, v: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let (apv, amv) = split_flux_times(ops, v);
    (v.transpose() * apv, v.transpose() * amv)
}

/// `X^T diag(sigma) X`.
fn sigma_gram(x: &DMatrix<f64>, sigma: &SigmaField) -> DMatrix<f64> {
    let mut sx = x.clone();
    for (i, mut row) in sx.row_iter_mut().enumerate() {
        row *= sigma.values[i];
    }
    x.transpose() * sx
}

/// Solves `(I + c W) Y = rhs` for symmetric positive definite `I + c W`.
fn spd_solve(w: &DMatrix<f64>, c: f64, rhs: &DMatrix<f64>, context: &'static str) -> Result<DMatrix<f64>> {
    let r = w.nrows();
    let mut system = w * c;
    for i in 0..r {
        system[(i, i)] += 1.0;
    }
    let diag = system.diagonal();
    let (min_diag, max_diag) = (diag.min(), diag.max());
    match Cholesky::new(system) {
        Some(ch) => Ok(ch.solve(rhs)),
        None => Err(Error::SpdSolve { context, min_diag, max_diag }),
    }
}

fn check_step_inputs(
    lr: &LowRankState,
    rho: &DVector<f64>,
    ops: &FluxOperators,
    grid: &Grid,
    sigma: &SigmaField,
    dt: f64,
) -> Result<()> {
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be non-negative, got {dt}")));
    }
    lr.check(grid, ops.n)?;
    sigma.check(grid)?;
    if rho.len() != grid.nx {
        return Err(Error::shape("rho", grid.nx, rho.len()));
    }
    Ok(())
}

/// K-step: evolves `K = X S` with the moment basis frozen, then
/// orthonormalises to obtain the new spatial basis.
pub fn k_step(
    lr: &LowRankState,
    rho: &DVector<f64>,
    ops: &FluxOperators,
    grid: &Grid,
    sigma: &SigmaField,
    eps: f64,
    dt: f64,
) -> Result<BasisUpdate> {
    let k_new = k_update(lr, rho, ops, grid, sigma, eps, dt)?;
    let qr = orthonormalize(&k_new)?;
    let projection = qr.q.transpose() * &lr.x;
    Ok(BasisUpdate {
        basis: qr.q,
        projection,
        deficient: qr.deficient,
    })
}

/// `K^{n+1}` before orthonormalisation.
pub(crate) fn k_update(
    lr: &LowRankState,
    rho: &DVector<f64>,
    ops: &FluxOperators,
    grid: &Grid,
    sigma: &SigmaField,
    eps: f64,
    dt: f64,
) -> Result<DMatrix<f64>> {
    check_step_inputs(lr, rho, ops, grid, sigma, dt)?;
    let k = &lr.x * &lr.s;
    let (vp, vm) = projected_flux(ops, &lr.v);
    let streaming = d_minus(&k, grid)? * vp + d_plus(&k, grid)? * vm;
    let drho = grad_to_interfaces(rho, grid)?;
    let av = lr.v.row(0).transpose() * ops.a0;

    let mut k_new = k;
    k_new.zip_apply(&streaming, |a, b| *a += -dt / eps * b);
    k_new.ger(-dt / (eps * eps), &drho, &av, 1.0);
    let c = dt / (eps * eps);
    for (i, mut row) in k_new.row_iter_mut().enumerate() {
        row /= 1.0 + c * sigma.values[i];
    }
    guard(k_new.as_slice(), 0, "K-step")?;
    Ok(k_new)
}

/// L-step: evolves `L = V S^T` with the spatial basis frozen, then
/// orthonormalises to obtain the new moment basis.
pub fn l_step(
    lr: &LowRankState,
    rho: &DVector<f64>,
    ops: &FluxOperators,
    grid: &Grid,
    sigma: &SigmaField,
    eps: f64,
    dt: f64,
) -> Result<BasisUpdate> {
    let l_new = l_update(lr, rho, ops, grid, sigma, eps, dt)?;
    let qr = orthonormalize(&l_new)?;
    let projection = qr.q.transpose() * &lr.v;
    Ok(BasisUpdate {
        basis: qr.q,
        projection,
        deficient: qr.deficient,
    })
}

/// `L^{n+1}` before orthonormalisation.
pub(crate) fn l_update(
    lr: &LowRankState,
    rho: &DVector<f64>,
    ops: &FluxOperators,
    grid: &Grid,
    sigma: &SigmaField,
    eps: f64,
    dt: f64,
) -> Result<DMatrix<f64>> {
    check_step_inputs(lr, rho, ops, grid, sigma, dt)?;
    let l = &lr.v * lr.s.transpose();
    let x = &lr.x;
    let cm = d_minus(x, grid)?.transpose() * x;
    let cp = d_plus(x, grid)?.transpose() * x;
    let (apl, aml) = split_flux_times(ops, &l);
    let streaming = apl * cm + aml * cp;
    let drho = grad_to_interfaces(rho, grid)?;
    let x_drho = x.transpose() * drho;

    let mut rhs = l;
    rhs.zip_apply(&streaming, |a, b| *a += -dt / eps * b);
    let coupling = -dt / (eps * eps) * ops.a0;
    for (jr, v) in x_drho.iter().enumerate() {
        rhs[(0, jr)] += coupling * v;
    }
    // L_new (I + c W) = rhs, W symmetric
    let w = sigma_gram(x, sigma);
    let l_new = spd_solve(&w, dt / (eps * eps), &rhs.transpose(), "L-step")?.transpose();
    guard(l_new.as_slice(), 0, "L-step")?;
    Ok(l_new)
}

/// Galerkin S-step on the updated bases. `m_proj = X_new^T X`,
/// `n_proj = V_new^T V`.
#[allow(clippy::too_many_arguments)]
pub fn s_step(
    lr: &LowRankState,
    x_new: &DMatrix<f64>,
    v_new: &DMatrix<f64>,
    m_proj: &DMatrix<f64>,
    n_proj: &DMatrix<f64>,
    rho: &DVector<f64>,
    ops: &FluxOperators,
    grid: &Grid,
    sigma: &SigmaField,
    eps: f64,
    dt: f64,
) -> Result<DMatrix<f64>> {
    check_step_inputs(lr, rho, ops, grid, sigma, dt)?;
    let s_tilde = m_proj * &lr.s * n_proj.transpose();
    let (vp, vm) = projected_flux(ops, v_new);
    let dhat_minus = x_new.transpose() * d_minus(x_new, grid)?;
    let dhat_plus = x_new.transpose() * d_plus(x_new, grid)?;
    let streaming = dhat_minus * &s_tilde * vp + dhat_plus * &s_tilde * vm;
    let drho = grad_to_interfaces(rho, grid)?;
    let x_drho = x_new.transpose() * drho;
    let av = v_new.row(0).transpose() * ops.a0;

    let mut rhs = s_tilde;
    rhs.zip_apply(&streaming, |a, b| *a += -dt / eps * b);
    rhs.ger(-dt / (eps * eps), &x_drho, &av, 1.0);
    let w = sigma_gram(x_new, sigma);
    let s_new = spd_solve(&w, dt / (eps * eps), &rhs, "S-step")?;
    guard(s_new.as_slice(), 0, "S-step")?;
    Ok(s_new)
}

/// One BUG step plus the macroscopic update. Returns the new factors and
/// density.
pub fn dlra_step(
    lr: &LowRankState,
    rho: &DVector<f64>,
    ops: &FluxOperators,
    grid: &Grid,
    sigma: &SigmaField,
    eps: f64,
    dt: f64,
) -> Result<(LowRankState, DVector<f64>)> {
    let (k, l) = rayon::join(
        || k_step(lr, rho, ops, grid, sigma, eps, dt),
        || l_step(lr, rho, ops, grid, sigma, eps, dt),
    );
    let (k, l) = (k?, l?);
    let s_new = s_step(
        lr,
        &k.basis,
        &l.basis,
        &k.projection,
        &l.projection,
        rho,
        ops,
        grid,
        sigma,
        eps,
        dt,
    )?;
    let next = LowRankState {
        x: k.basis,
        s: s_new,
        v: l.basis,
    };
    // first moment g_1 = X S (V^T e_1)
    let g1 = &next.x * (&next.s * next.v.row(0).transpose());
    let div = div_to_midpoints(g1.as_slice(), grid)?;
    let mut rho_new = rho.clone();
    rho_new.axpy(-dt * ops.a0, &div, 1.0);
    guard(rho_new.as_slice(), 0, "macro update")?;
    Ok((next, rho_new))
}

/// Rank-`r` factorisation of an initial field.
///
/// Uses the truncated SVD; for an all-zero field the spatial basis is the
/// first `r` discrete cosine modes on the interfaces, the moment basis the
/// first `r` canonical vectors and `S = 0`.
pub fn init_lowrank(g0: &DMatrix<f64>, r: usize) -> Result<LowRankState> {
    let (m, n) = g0.shape();
    if r == 0 || r > m.min(n) {
        return Err(Error::InvalidArgument(format!(
            "rank {r} outside 1..={}",
            m.min(n)
        )));
    }
    if g0.iter().all(|&v| v == 0.0) {
        let modes = DMatrix::from_fn(m, r, |i, k| {
            (std::f64::consts::PI * k as f64 * (i as f64 + 0.5) / m as f64).cos()
        });
        let x = orthonormalize(&modes)?.q;
        let v = DMatrix::identity(n, r);
        return LowRankState::new(x, DMatrix::zeros(r, r), v);
    }

    let svd = g0.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let vt = svd.v_t.as_ref().expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let keep = &order[..r];

    let u_r = DMatrix::from_fn(m, r, |i, j| u[(i, keep[j])]);
    let v_r = DMatrix::from_fn(n, r, |i, j| vt[(keep[j], i)]);
    let sig = DMatrix::from_fn(r, r, |i, j| if i == j { svd.singular_values[keep[i]] } else { 0.0 });
    // re-orthonormalise and fold the triangular factors into S
    let qx = orthonormalize(&u_r)?;
    let qv = orthonormalize(&v_r)?;
    let s = &qx.r * sig * qv.r.transpose();
    LowRankState::new(qx.q, s, qv.q)
}

/// Runs the low-rank scheme for a discretised problem.
pub fn run_dlra_problem(problem: &Problem) -> Result<Trajectory> {
    let Problem { grid, ops, sigma, eps, .. } = problem;
    let rank = problem
        .rank
        .ok_or_else(|| Error::Config("the dlra solver needs a rank".into()))?;
    problem.initial.check(grid, ops.n)?;
    let mut lr = init_lowrank(&problem.initial.g, rank)?;
    let mut rho = problem.initial.rho.clone();
    let energy = |rho: &DVector<f64>, lr: &LowRankState| {
        grid.norm2_midpoints(rho) + eps * eps * lr.field_norm2() * grid.dx
    };
    let e0 = energy(&rho, &lr);
    let mut traj = integrate(
        &rho.clone(),
        e0,
        problem.t_end,
        &problem.cfl,
        &problem.profile_times,
        |n, h| {
            let (next, r) = dlra_step(&lr, &rho, ops, grid, sigma, *eps, h).map_err(|e| e.at_step(n))?;
            lr = next;
            rho = r;
            Ok((rho.clone(), energy(&rho, &lr)))
        },
    )?;
    traj.final_g = Some(lr.reconstruct());
    Ok(traj)
}

pub fn run_dlra(config: &SolverConfig) -> Result<Trajectory> {
    run_dlra_problem(&config.build()?)
}
