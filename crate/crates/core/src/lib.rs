//! Solvers for the one-dimensional radiative transfer equation in diffusive
//! scaling,
//!
//! ```text
//! d_t f + (1/eps) mu d_x f = (sigma(x)/eps^2) (rho/sqrt(2) - f),
//! ```
//!
//! discretised with a modal (P_N) micro-macro decomposition on a staggered
//! grid. The crate provides
//!
//! - the full-rank IMEX micro-macro scheme ([`full`]),
//! - a fixed-rank basis-update & Galerkin (BUG) low-rank variant ([`dlra`]),
//! - the explicit diffusion scheme obtained in the limit `eps -> 0`
//!   ([`diffusion`]),
//! - the regime-aware time-step policy ([`full::cfl_dt`]),
//! - the plane-source benchmark, run orchestration and CSV output ([`bench`]).
//!
//! Both kinetic schemes dissipate the energy `||rho||^2 + eps^2 ||g||^2`
//! under the same CFL condition, which interpolates between a hyperbolic
//! (`eps dx`) and a parabolic (`sigma_0 dx^2`) restriction.

pub mod bench;
pub mod config;
pub mod diffusion;
pub mod dlra;
pub mod error;
pub mod full;
pub mod grid;
pub mod operators;
pub mod quadrature;
pub mod trajectory;

pub use error::{Error, Result};
