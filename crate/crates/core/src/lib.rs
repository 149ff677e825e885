//! Pseudospectral tools for a nonlinear Schrödinger flow written in Madelung
//! form, in which the probability current is replaced by
//! j = −(2ħ/m) ρ ∇G(λ²Δ)S.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod gfunc;
pub mod grid;
pub mod madelung;
pub mod random;
pub mod recurrence;
pub mod scenario;

pub use error::{Error, Result};
pub use gfunc::{GOperator, Policy};
pub use grid::{make_grid, Grid};
pub use madelung::{HydroState, PhysicsParams, Potential};

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}
