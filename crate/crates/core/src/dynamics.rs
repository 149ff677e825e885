//! Time stepping for the hydrodynamic pair and a split-step baseline.
//!
//! Density: ∂ρ/∂t = −∇·j with j the modified or the Schrödinger current.
//! Phase:   ∂S/∂t = (ħ/2m)(Δ√ρ/√ρ − |∇S|²) − V/ħ.
//!
//! The Schrödinger part of both right-hand sides is evaluated pointwise from
//! ψ = √ρ e^{iS}, which is periodic even when S winds. The modified flow adds
//! (2ħ/m)∇·(ρ∇f), f = (G + ½)s_per, to the density equation; with the linear
//! operator that term is identically zero.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::gfunc::GOperator;
use crate::grid::Grid;
use crate::madelung::{reconstruct, HydroState, PhysicsParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Modified,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Rk4,
    Splitstep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_rho_floor")]
    pub rho_floor: f64,
    #[serde(default = "default_cfl")]
    pub cfl_constant: f64,
    #[serde(default = "default_save_every")]
    pub save_every: usize,
}

fn default_rho_floor() -> f64 {
    1e-12
}

fn default_cfl() -> f64 {
    0.1
}

fn default_save_every() -> usize {
    1
}

/// Largest per-step change of ∫ρ tolerated before a run is declared unstable.
pub const NORM_DEFECT_LIMIT: f64 = 1e-6;

impl IntegratorConfig {
    pub fn new(dt: f64, t_final: f64) -> Self {
        Self {
            dt,
            t_final,
            scheme: Scheme::Rk4,
            rho_floor: default_rho_floor(),
            cfl_constant: default_cfl(),
            save_every: default_save_every(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Validation(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::Validation(format!(
                "t_final must be non-negative, got {}",
                self.t_final
            )));
        }
        if !(self.rho_floor.is_finite() && self.rho_floor >= 0.0) {
            return Err(Error::Validation(format!(
                "rho_floor must be non-negative, got {}",
                self.rho_floor
            )));
        }
        if !(self.cfl_constant.is_finite() && self.cfl_constant > 0.0) {
            return Err(Error::Validation(format!(
                "cfl_constant must be positive, got {}",
                self.cfl_constant
            )));
        }
        if self.save_every == 0 {
            return Err(Error::Validation("save_every must be at least 1".into()));
        }
        Ok(())
    }

    /// dt <= C m Δx² / ħ.
    pub fn check_cfl(&self, grid: &Grid, params: &PhysicsParams) -> Result<()> {
        let dx = grid.min_spacing();
        let limit = self.cfl_constant * params.mass * dx * dx / params.hbar;
        if self.dt > limit {
            return Err(Error::Validation(format!(
                "dt = {} exceeds the stability limit {limit:.6e} (C m dx^2 / hbar)",
                self.dt
            )));
        }
        Ok(())
    }

    /// Number of steps and the step actually taken so that t_final is hit exactly.
    pub fn steps(&self) -> (usize, f64) {
        if self.t_final == 0.0 {
            return (0, self.dt);
        }
        let n = (self.t_final / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_final / n as f64)
    }
}

/// Everything the right-hand side needs besides the state.
#[derive(Debug, Clone)]
pub struct Flow<'a> {
    pub grid: &'a Grid,
    pub params: &'a PhysicsParams,
    pub gop: &'a GOperator,
    pub mode: Mode,
    pub rho_floor: f64,
    potential: Vec<f64>,
    correction: Vec<f64>,
}

impl<'a> Flow<'a> {
    pub fn new(
        grid: &'a Grid,
        params: &'a PhysicsParams,
        gop: &'a GOperator,
        mode: Mode,
        rho_floor: f64,
    ) -> Result<Self> {
        grid.check(gop.symbol().len())?;
        let potential = params.potential.sample(grid, params.mass)?;
        let correction = match mode {
            Mode::Modified => gop.correction_symbol(),
            Mode::Linear => GOperator::linear(grid).correction_symbol(),
        };
        Ok(Self {
            grid,
            params,
            gop,
            mode,
            rho_floor,
            potential,
            correction,
        })
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// (∂ρ/∂t, ∂s_per/∂t).
    pub fn rhs(&self, state: &HydroState) -> Result<(Vec<f64>, Vec<f64>)> {
        let grid = self.grid;
        let (hbar, m) = (self.params.hbar, self.params.mass);
        let phase = state.phase(grid);

        let psi: Vec<Complex64> = state
            .rho
            .iter()
            .zip(&phase)
            .map(|(&r, &s)| Complex64::from_polar(r.max(0.0).sqrt(), s))
            .collect();
        let lap_psi = grid.laplacian_complex(&psi);
        let mut drho: Vec<f64> = psi
            .iter()
            .zip(&lap_psi)
            .map(|(p, l)| -hbar / m * (p.conj() * l).im)
            .collect();

        let f = grid.apply_multiplier(&state.s_per, &self.correction);
        for (d, c) in drho
            .iter_mut()
            .zip(weighted_divergence(grid, &state.rho, &f))
        {
            *d += 2.0 * hbar / m * c;
        }

        let q: Vec<Complex64> = state
            .rho
            .iter()
            .zip(&phase)
            .map(|(&r, &s)| Complex64::from_polar(r.max(self.rho_floor).sqrt(), s))
            .collect();
        let lap_q = grid.laplacian_complex(&q);
        let ds: Vec<f64> = q
            .iter()
            .zip(&lap_q)
            .zip(&self.potential)
            .map(|((q, l), v)| hbar / (2.0 * m) * (l / q).re - v / hbar)
            .collect();

        if drho.iter().chain(&ds).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "right-hand side at t = {}",
                state.t
            )));
        }
        Ok((drho, ds))
    }

    fn stage(&self, base: &HydroState, k: &(Vec<f64>, Vec<f64>), h: f64) -> HydroState {
        HydroState {
            rho: base.rho.iter().zip(&k.0).map(|(r, d)| r + h * d).collect(),
            winding: base.winding.clone(),
            s_per: base
                .s_per
                .iter()
                .zip(&k.1)
                .map(|(s, d)| s + h * d)
                .collect(),
            t: base.t + h,
        }
    }

    /// One classical RK4 step; ρ is clamped at the floor afterwards.
    pub fn step_rk4(&self, state: &HydroState, dt: f64) -> Result<HydroState> {
        let k1 = self.rhs(state)?;
        let k2 = self.rhs(&self.stage(state, &k1, 0.5 * dt))?;
        let k3 = self.rhs(&self.stage(state, &k2, 0.5 * dt))?;
        let k4 = self.rhs(&self.stage(state, &k3, dt))?;
        let combine = |y: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
            (0..y.len())
                .map(|i| y[i] + dt / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]))
                .collect()
        };
        let mut rho = combine(&state.rho, &k1.0, &k2.0, &k3.0, &k4.0);
        let s_per = combine(&state.s_per, &k1.1, &k2.1, &k3.1, &k4.1);
        rho.iter_mut().for_each(|r| *r = r.max(self.rho_floor));
        if rho.iter().chain(&s_per).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "state after step at t = {}",
                state.t
            )));
        }
        let before = self.grid.integrate(&state.rho);
        let after = self.grid.integrate(&rho);
        if (after - before).abs() > NORM_DEFECT_LIMIT {
            return Err(Error::Stability(format!(
                "norm changed by {:.3e} in one step at t = {}",
                after - before,
                state.t
            )));
        }
        Ok(HydroState {
            rho,
            winding: state.winding.clone(),
            s_per,
            t: state.t + dt,
        })
    }
}

/// ∇·(ρ∇f) expanded as ρ D·Df + Dρ·Df with D the spectral first derivative.
///
/// D is skew-symmetric on the grid, so the sum over samples vanishes exactly
/// and the result carries a factor of ρ or ∇ρ wherever the density is tiny.
pub fn weighted_divergence(grid: &Grid, rho: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    for a in 0..grid.dim() {
        let df = grid.derivative(f, a, 1);
        let ddf = grid.derivative(&df, a, 1);
        let dr = grid.derivative(rho, a, 1);
        for i in 0..out.len() {
            out[i] += rho[i] * ddf[i] + dr[i] * df[i];
        }
    }
    out
}

/// Convenience wrapper around [`Flow::rhs`].
pub fn rhs_hydro(
    grid: &Grid,
    state: &HydroState,
    params: &PhysicsParams,
    gop: &GOperator,
    mode: Mode,
    rho_floor: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    Flow::new(grid, params, gop, mode, rho_floor)?.rhs(state)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<HydroState>,
    pub records: Vec<DiagnosticsRecord>,
    pub complete: bool,
    pub error: Option<Error>,
}

impl Trajectory {
    pub fn last(&self) -> &HydroState {
        self.snapshots
            .last()
            .expect("trajectory holds the initial state")
    }
}

/// Evolves with RK4, saving every `save_every` steps and at t_final.
pub fn evolve(
    grid: &Grid,
    initial: &HydroState,
    params: &PhysicsParams,
    gop: &GOperator,
    mode: Mode,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    config.validate()?;
    params.validate()?;
    initial.validate(grid)?;
    config.check_cfl(grid, params)?;
    let flow = Flow::new(grid, params, gop, mode, config.rho_floor)?;
    let (n, dt) = config.steps();

    let mut state = initial.clone();
    let mut traj = Trajectory {
        times: vec![state.t],
        snapshots: vec![state.clone()],
        records: vec![diagnostics::record(grid, &state, params, gop, mode)?],
        complete: true,
        error: None,
    };
    for step in 1..=n {
        match flow.step_rk4(&state, dt) {
            Ok(next) => state = next,
            Err(e) => {
                traj.complete = false;
                traj.error = Some(e);
                return Ok(traj);
            }
        }
        if step % config.save_every == 0 || step == n {
            traj.times.push(state.t);
            traj.records
                .push(diagnostics::record(grid, &state, params, gop, mode)?);
            traj.snapshots.push(state.clone());
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveTrajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<Complex64>>,
    pub records: Vec<DiagnosticsRecord>,
    pub complete: bool,
    pub error: Option<Error>,
}

/// Strang splitting for iħ∂ψ/∂t = −(ħ²/2m)Δψ + Vψ.
pub fn evolve_splitstep_linear(
    grid: &Grid,
    psi0: &[Complex64],
    t0: f64,
    params: &PhysicsParams,
    config: &IntegratorConfig,
) -> Result<WaveTrajectory> {
    config.validate()?;
    params.validate()?;
    grid.check(psi0.len())?;
    let (hbar, m) = (params.hbar, params.mass);
    let (n, dt) = config.steps();
    let v = params.potential.sample(grid, m)?;
    let kick: Vec<Complex64> = v
        .iter()
        .map(|v| Complex64::from_polar(1.0, -v * dt / (2.0 * hbar)))
        .collect();
    let drift: Vec<Complex64> = grid
        .k_squared()
        .iter()
        .map(|k2| Complex64::from_polar(1.0, -hbar * k2 * dt / (2.0 * m)))
        .collect();

    let mut psi = psi0.to_vec();
    let mut t = t0;
    let mut traj = WaveTrajectory {
        times: vec![t],
        snapshots: vec![psi.clone()],
        records: vec![diagnostics::record_wave(grid, &psi, t, params, &v)],
        complete: true,
        error: None,
    };
    for step in 1..=n {
        psi.iter_mut().zip(&kick).for_each(|(p, k)| *p *= k);
        let mut spec = grid.forward_complex(&psi);
        spec.iter_mut().zip(&drift).for_each(|(s, d)| *s *= d);
        psi = grid.inverse_complex(spec);
        psi.iter_mut().zip(&kick).for_each(|(p, k)| *p *= k);
        t = t0 + step as f64 * dt;
        if psi.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            traj.complete = false;
            traj.error = Some(Error::NonFinite(format!("wave function at t = {t}")));
            return Ok(traj);
        }
        if step % config.save_every == 0 || step == n {
            traj.times.push(t);
            traj.records
                .push(diagnostics::record_wave(grid, &psi, t, params, &v));
            traj.snapshots.push(psi.clone());
        }
    }
    Ok(traj)
}

/// ψ(t) for a hydro snapshot, for comparisons with the split-step baseline.
pub fn to_wave(grid: &Grid, state: &HydroState) -> Vec<Complex64> {
    reconstruct(grid, state)
}
