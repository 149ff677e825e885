//! Wave function ↔ (ρ, S) conversions and probability currents.
//!
//! The phase is stored as S = k̄·x + s_per with k̄ the winding wavevector.
//! Only ∇S = k̄ + ∇s_per and Δⁿs_per reach a transform.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfunc::GOperator;
use crate::grid::Grid;

/// Default amplitude floor for [`decompose`].
pub const NODE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Potential {
    None,
    /// ½ m ω² |x|², centred on the origin.
    Harmonic {
        omega: f64,
    },
    /// Samples on the simulation grid.
    Tabulated {
        values: Vec<f64>,
    },
}

impl Potential {
    pub fn sample(&self, grid: &Grid, mass: f64) -> Result<Vec<f64>> {
        match self {
            Potential::None => Ok(vec![0.0; grid.len()]),
            Potential::Harmonic { omega } => {
                let mut v = vec![0.0; grid.len()];
                for a in 0..grid.dim() {
                    for (vi, x) in v.iter_mut().zip(grid.coordinates(a)) {
                        *vi += 0.5 * mass * omega * omega * x * x;
                    }
                }
                Ok(v)
            }
            Potential::Tabulated { values } => {
                grid.check(values.len())?;
                Ok(values.clone())
            }
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Potential::None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicsParams {
    pub hbar: f64,
    pub mass: f64,
    pub lambda_c: f64,
    pub potential: Potential,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            lambda_c: 0.1,
            potential: Potential::None,
        }
    }
}

impl PhysicsParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("hbar", self.hbar),
            ("mass", self.mass),
            ("lambda_c", self.lambda_c),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if let Potential::Harmonic { omega } = self.potential {
            if !(omega.is_finite() && omega > 0.0) {
                return Err(Error::Validation(format!(
                    "omega must be positive, got {omega}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydroState {
    pub rho: Vec<f64>,
    /// k̄ per axis.
    pub winding: Vec<f64>,
    pub s_per: Vec<f64>,
    pub t: f64,
}

impl HydroState {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        grid.check(self.rho.len())?;
        grid.check(self.s_per.len())?;
        if self.winding.len() != grid.dim() {
            return Err(Error::Validation(format!(
                "winding has {} components on a {}D grid",
                self.winding.len(),
                grid.dim()
            )));
        }
        check_winding(grid, &self.winding)
    }

    /// Total phase k̄·x + s_per sampled on the grid (not periodic).
    pub fn phase(&self, grid: &Grid) -> Vec<f64> {
        let mut s = self.s_per.clone();
        for (a, kb) in self.winding.iter().enumerate() {
            if *kb != 0.0 {
                for (si, x) in s.iter_mut().zip(grid.coordinates(a)) {
                    *si += kb * x;
                }
            }
        }
        s
    }

    /// ∇S = k̄ + ∇s_per.
    pub fn phase_gradient(&self, grid: &Grid) -> Vec<Vec<f64>> {
        let mut g = grid.gradient(&self.s_per);
        for (comp, kb) in g.iter_mut().zip(&self.winding) {
            comp.iter_mut().for_each(|v| *v += kb);
        }
        g
    }
}

/// Checks that k̄ L / 2π is an integer on every axis.
pub fn check_winding(grid: &Grid, winding: &[f64]) -> Result<()> {
    for (a, kb) in winding.iter().enumerate() {
        let n = kb * grid.axis(a).length / (2.0 * PI);
        if (n - n.round()).abs() > 1e-6 {
            return Err(Error::Winding(format!(
                "winding {kb} on axis {a} gives {n} turns around the domain"
            )));
        }
    }
    Ok(())
}

/// Phase increments arg(ψ_{j+1} ψ_j*) along one line of samples, closing
/// the loop from the last sample back to the first.
fn line_increments(psi: &[Complex64], idx: &[usize]) -> Vec<f64> {
    let n = idx.len();
    (0..n)
        .map(|j| (psi[idx[(j + 1) % n]] * psi[idx[j]].conj()).arg())
        .collect()
}

fn line_winding(grid: &Grid, axis: usize, incs: &[f64]) -> Result<f64> {
    let total: f64 = incs.iter().sum();
    let turns = total / (2.0 * PI);
    if (turns - turns.round()).abs() > 1e-6 {
        return Err(Error::Winding(format!(
            "phase accumulates {turns} turns along axis {axis}"
        )));
    }
    Ok(turns.round() * 2.0 * PI / grid.axis(axis).length)
}

/// Splits a nodeless ψ into density, winding and periodic phase.
pub fn decompose(grid: &Grid, psi: &[Complex64], floor: f64) -> Result<HydroState> {
    grid.check(psi.len())?;
    let min = psi.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min);
    if min.is_nan() || min < floor {
        return Err(Error::Node { min, floor });
    }
    let rho: Vec<f64> = psi.iter().map(|c| c.norm_sqr()).collect();
    let phase0 = psi[0].arg();
    let mut unwrapped = vec![0.0; grid.len()];
    let mut winding = vec![0.0; grid.dim()];
    match grid.dim() {
        1 => {
            let idx: Vec<usize> = (0..grid.len()).collect();
            let incs = line_increments(psi, &idx);
            winding[0] = line_winding(grid, 0, &incs)?;
            let mut acc = phase0;
            for j in 0..grid.len() {
                unwrapped[j] = acc;
                acc += incs[j];
            }
        }
        _ => {
            let (n0, n1) = (grid.axis(0).n, grid.axis(1).n);
            let col: Vec<usize> = (0..n0).map(|i| i * n1).collect();
            let col_incs = line_increments(psi, &col);
            winding[0] = line_winding(grid, 0, &col_incs)?;
            let mut start = phase0;
            for i in 0..n0 {
                let row: Vec<usize> = (0..n1).map(|j| i * n1 + j).collect();
                let incs = line_increments(psi, &row);
                let kb = line_winding(grid, 1, &incs)?;
                if i == 0 {
                    winding[1] = kb;
                } else if kb != winding[1] {
                    return Err(Error::Winding(format!(
                        "row {i} winds differently from row 0"
                    )));
                }
                let mut acc = start;
                for j in 0..n1 {
                    unwrapped[i * n1 + j] = acc;
                    acc += incs[j];
                }
                start += col_incs[i];
            }
        }
    }
    let mut s_per = unwrapped;
    for (a, kb) in winding.iter().enumerate() {
        let x0 = grid.axis(a).coordinates()[0];
        for (s, x) in s_per.iter_mut().zip(grid.coordinates(a)) {
            *s -= kb * (x - x0);
        }
    }
    Ok(HydroState {
        rho,
        winding,
        s_per,
        t: 0.0,
    })
}

/// √ρ exp(i(k̄·x + s_per)).
pub fn reconstruct(grid: &Grid, state: &HydroState) -> Vec<Complex64> {
    state
        .rho
        .iter()
        .zip(state.phase(grid))
        .map(|(&r, s)| Complex64::from_polar(r.max(0.0).sqrt(), s))
        .collect()
}

/// j = (ħ/m) ρ ∇S.
pub fn schrodinger_current(
    grid: &Grid,
    state: &HydroState,
    params: &PhysicsParams,
) -> Vec<Vec<f64>> {
    let c = params.hbar / params.mass;
    state
        .phase_gradient(grid)
        .into_iter()
        .map(|g| g.iter().zip(&state.rho).map(|(g, r)| c * r * g).collect())
        .collect()
}

/// j_RM = −(2ħ/m) ρ (c₀ k̄ + ∇ G s_per) with c₀ = −1/2.
pub fn modified_current(
    grid: &Grid,
    state: &HydroState,
    params: &PhysicsParams,
    gop: &GOperator,
) -> Result<Vec<Vec<f64>>> {
    let gs = gop.apply(grid, &state.s_per)?;
    let c = -2.0 * params.hbar / params.mass;
    Ok(grid
        .gradient(&gs)
        .into_iter()
        .zip(&state.winding)
        .map(|(g, kb)| {
            g.iter()
                .zip(&state.rho)
                .map(|(g, r)| c * r * (-0.5 * kb + g))
                .collect()
        })
        .collect())
}

/// ∇f with f = (G + ½) s_per: the part of the phase the correction sees.
pub fn correction_gradient(grid: &Grid, s_per: &[f64], gop: &GOperator) -> Vec<Vec<f64>> {
    let f = grid.apply_multiplier(s_per, &gop.correction_symbol());
    grid.gradient(&f)
}
