//! Observables, Ehrenfest corrections, Galilean boosts and the separability
//! harness.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve, weighted_divergence, IntegratorConfig, Mode};
use crate::error::{Error, Result};
use crate::gfunc::{GOperator, Policy};
use crate::grid::Grid;
use crate::madelung::{
    check_winding, modified_current, reconstruct, HydroState, PhysicsParams, Potential,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub norm: f64,
    pub mean_x: Vec<f64>,
    pub mean_p: Vec<f64>,
    pub energy: f64,
    pub i1_paper: Vec<f64>,
    pub i1_cc: Vec<f64>,
    pub i2_paper: Vec<f64>,
    pub i2_cc: Vec<f64>,
    pub hi_norm: f64,
}

impl DiagnosticsRecord {
    pub fn is_finite(&self) -> bool {
        let scalars = [self.t, self.norm, self.energy, self.hi_norm];
        scalars
            .iter()
            .chain(&self.mean_x)
            .chain(&self.mean_p)
            .chain(&self.i1_paper)
            .chain(&self.i1_cc)
            .chain(&self.i2_paper)
            .chain(&self.i2_cc)
            .all(|v| v.is_finite())
    }
}

/// Norm, ⟨x⟩, ⟨p⟩ and energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Observables {
    pub norm: f64,
    pub mean_x: Vec<f64>,
    pub mean_p: Vec<f64>,
    pub energy: f64,
}

fn weighted_means(grid: &Grid, rho: &[f64]) -> Vec<f64> {
    (0..grid.dim())
        .map(|a| {
            let xr: Vec<f64> = grid
                .coordinates(a)
                .iter()
                .zip(rho)
                .map(|(x, r)| x * r)
                .collect();
            grid.integrate(&xr)
        })
        .collect()
}

fn kinetic_energy(grid: &Grid, psi: &[Complex64], params: &PhysicsParams) -> f64 {
    let mut dens = vec![0.0; grid.len()];
    for a in 0..grid.dim() {
        for (d, g) in dens.iter_mut().zip(grid.derivative_complex(psi, a, 1)) {
            *d += g.norm_sqr();
        }
    }
    params.hbar * params.hbar / (2.0 * params.mass) * grid.integrate(&dens)
}

fn potential_energy(grid: &Grid, rho: &[f64], v: &[f64]) -> f64 {
    let rv: Vec<f64> = rho.iter().zip(v).map(|(r, v)| r * v).collect();
    grid.integrate(&rv)
}

pub fn observables(grid: &Grid, state: &HydroState, params: &PhysicsParams) -> Result<Observables> {
    state.validate(grid)?;
    let v = params.potential.sample(grid, params.mass)?;
    let psi = reconstruct(grid, state);
    let mean_p = state
        .phase_gradient(grid)
        .iter()
        .map(|g| {
            let rg: Vec<f64> = g.iter().zip(&state.rho).map(|(g, r)| r * g).collect();
            params.hbar * grid.integrate(&rg)
        })
        .collect();
    Ok(Observables {
        norm: grid.integrate(&state.rho),
        mean_x: weighted_means(grid, &state.rho),
        mean_p,
        energy: kinetic_energy(grid, &psi, params) + potential_energy(grid, &state.rho, &v),
    })
}

/// ∇·(ρ∇f) with f = (G + ½)s_per.
fn correction_divergence(grid: &Grid, state: &HydroState, gop: &GOperator) -> Vec<f64> {
    let f = grid.apply_multiplier(&state.s_per, &gop.correction_symbol());
    weighted_divergence(grid, &state.rho, &f)
}

/// H_I = (ħ/2ρ)∇·(j_Sch − j_RM) = (ħ²/mρ)∇·(ρ∇(G + ½)s_per), with ρ clamped
/// at `rho_floor` in the denominator. The real part of the nonlinear
/// Hamiltonian vanishes identically for this flow.
pub fn h_imag(
    grid: &Grid,
    state: &HydroState,
    params: &PhysicsParams,
    gop: &GOperator,
    rho_floor: f64,
) -> Result<Vec<f64>> {
    state.validate(grid)?;
    let c = params.hbar * params.hbar / params.mass;
    Ok(correction_divergence(grid, state, gop)
        .into_iter()
        .zip(&state.rho)
        .map(|(d, r)| c * d / r.max(rho_floor))
        .collect())
}

/// Both readings of the Ehrenfest corrections, one entry per axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EhrenfestIntegrals {
    /// −ħ ∫ x ∇·[ρ∇(2G − 1)S]
    pub i1_paper: Vec<f64>,
    /// −(ħ²/m) ∫ ∇·[ρ∇(2G − 1)S] ∇S
    pub i2_paper: Vec<f64>,
    /// m ∫ j_RM − ⟨p⟩
    pub i1_cc: Vec<f64>,
    /// ∫ 2ρ H_I ∇S
    pub i2_cc: Vec<f64>,
}

pub fn ehrenfest_integrals(
    grid: &Grid,
    state: &HydroState,
    params: &PhysicsParams,
    gop: &GOperator,
) -> Result<EhrenfestIntegrals> {
    state.validate(grid)?;
    let (hbar, m) = (params.hbar, params.mass);
    let grad_s = state.phase_gradient(grid);

    // (2G − 1) acts on k̄·x through G(0) = −1/2, giving −2k̄.
    let symbol: Vec<f64> = gop.symbol().iter().map(|g| 2.0 * g - 1.0).collect();
    let h = grid.apply_multiplier(&state.s_per, &symbol);
    let flux: Vec<Vec<f64>> = grid
        .gradient(&h)
        .into_iter()
        .zip(&state.winding)
        .map(|(g, kb)| {
            g.iter()
                .zip(&state.rho)
                .map(|(g, r)| r * (g - 2.0 * kb))
                .collect()
        })
        .collect();
    let div_f = grid.divergence(&flux);

    let div_c = correction_divergence(grid, state, gop);
    let f = grid.apply_multiplier(&state.s_per, &gop.correction_symbol());
    let grad_f = grid.gradient(&f);

    let mut out = EhrenfestIntegrals {
        i1_paper: Vec::new(),
        i2_paper: Vec::new(),
        i1_cc: Vec::new(),
        i2_cc: Vec::new(),
    };
    for a in 0..grid.dim() {
        let x = grid.coordinates(a);
        let t: Vec<f64> = x.iter().zip(&div_f).map(|(x, d)| x * d).collect();
        out.i1_paper.push(-hbar * grid.integrate(&t));
        let t: Vec<f64> = div_f.iter().zip(&grad_s[a]).map(|(d, g)| d * g).collect();
        out.i2_paper.push(-hbar * hbar / m * grid.integrate(&t));
        let t: Vec<f64> = state
            .rho
            .iter()
            .zip(&grad_f[a])
            .map(|(r, g)| r * g)
            .collect();
        out.i1_cc.push(-2.0 * hbar * grid.integrate(&t));
        let t: Vec<f64> = div_c.iter().zip(&grad_s[a]).map(|(d, g)| d * g).collect();
        out.i2_cc.push(2.0 * hbar * hbar / m * grid.integrate(&t));
    }
    Ok(out)
}

/// ∫ j_RM dV per axis: the flux prediction for d⟨x⟩/dt.
pub fn flux_velocity(
    grid: &Grid,
    state: &HydroState,
    params: &PhysicsParams,
    gop: &GOperator,
) -> Result<Vec<f64>> {
    Ok(modified_current(grid, state, params, gop)?
        .iter()
        .map(|j| grid.integrate(j))
        .collect())
}

/// Full diagnostics row. In linear mode every correction is evaluated with
/// G ≡ −1/2 and therefore vanishes.
pub fn record(
    grid: &Grid,
    state: &HydroState,
    params: &PhysicsParams,
    gop: &GOperator,
    mode: Mode,
) -> Result<DiagnosticsRecord> {
    let linear;
    let gop = match mode {
        Mode::Modified => gop,
        Mode::Linear => {
            linear = GOperator::linear(grid);
            &linear
        }
    };
    let obs = observables(grid, state, params)?;
    let e = ehrenfest_integrals(grid, state, params, gop)?;
    let c = params.hbar * params.hbar / params.mass;
    let hi: Vec<f64> = correction_divergence(grid, state, gop)
        .iter()
        .map(|d| (c * d).abs())
        .collect();
    Ok(DiagnosticsRecord {
        t: state.t,
        norm: obs.norm,
        mean_x: obs.mean_x,
        mean_p: obs.mean_p,
        energy: obs.energy,
        i1_paper: e.i1_paper,
        i1_cc: e.i1_cc,
        i2_paper: e.i2_paper,
        i2_cc: e.i2_cc,
        hi_norm: grid.integrate(&hi),
    })
}

/// Diagnostics row for a linear wave function; corrections are zero.
pub fn record_wave(
    grid: &Grid,
    psi: &[Complex64],
    t: f64,
    params: &PhysicsParams,
    v: &[f64],
) -> DiagnosticsRecord {
    let rho: Vec<f64> = psi.iter().map(|p| p.norm_sqr()).collect();
    let mean_p = (0..grid.dim())
        .map(|a| {
            let d = grid.derivative_complex(psi, a, 1);
            let j: Vec<f64> = psi.iter().zip(&d).map(|(p, d)| (p.conj() * d).im).collect();
            params.hbar * grid.integrate(&j)
        })
        .collect();
    let zeros = vec![0.0; grid.dim()];
    DiagnosticsRecord {
        t,
        norm: grid.integrate(&rho),
        mean_x: weighted_means(grid, &rho),
        mean_p,
        energy: kinetic_energy(grid, psi, params) + potential_energy(grid, &rho, v),
        i1_paper: zeros.clone(),
        i1_cc: zeros.clone(),
        i2_paper: zeros.clone(),
        i2_cc: zeros,
        hi_norm: 0.0,
    }
}

/// State seen from a frame moving with velocity `v`, at time `t`:
/// ρ'(x) = ρ(x + vt), k̄' = k̄ − mv/ħ, and
/// s_per'(x) = s_per(x + vt) + k̄·vt − m|v|²t/2ħ.
pub fn galilean_boost(
    grid: &Grid,
    state: &HydroState,
    params: &PhysicsParams,
    v: &[f64],
    t: f64,
) -> Result<HydroState> {
    state.validate(grid)?;
    if v.len() != grid.dim() {
        return Err(Error::Validation(format!(
            "velocity has {} components on a {}D grid",
            v.len(),
            grid.dim()
        )));
    }
    if !params.potential.is_none() {
        return Err(Error::Validation(
            "boosts need a free particle (no potential)".into(),
        ));
    }
    let (hbar, m) = (params.hbar, params.mass);
    for (a, va) in v.iter().enumerate() {
        let turns = m * va * grid.axis(a).length / (2.0 * PI * hbar);
        if (turns - turns.round()).abs() > 1e-9 {
            return Err(Error::Winding(format!(
                "velocity {va} on axis {a} gives m v L / 2 pi hbar = {turns}, not an integer"
            )));
        }
    }
    let d: Vec<f64> = v.iter().map(|va| va * t).collect();
    let winding: Vec<f64> = state
        .winding
        .iter()
        .zip(v)
        .map(|(k, va)| k - m * va / hbar)
        .collect();
    check_winding(grid, &winding)?;
    let v2: f64 = v.iter().map(|x| x * x).sum();
    let offset: f64 = state
        .winding
        .iter()
        .zip(&d)
        .map(|(k, d)| k * d)
        .sum::<f64>()
        - m * v2 * t / (2.0 * hbar);
    let s_per = grid
        .shift(&state.s_per, &d)
        .into_iter()
        .map(|s| s + offset)
        .collect();
    Ok(HydroState {
        rho: grid.shift(&state.rho, &d),
        winding,
        s_per,
        t: state.t,
    })
}

/// Wraps into (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// One factor of a product state.
#[derive(Debug, Clone)]
pub struct Subsystem {
    pub grid: Grid,
    pub state: HydroState,
    pub potential: Potential,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparabilityReport {
    /// sup over grid and save times of |Δρ| + |wrap ΔS|.
    pub error: f64,
    pub rho_error: f64,
    pub phase_error: f64,
    /// The same measure restricted to points where ρ_a⊗ρ_b exceeds 1e−8 of its peak.
    pub interior_error: f64,
    pub times: Vec<f64>,
}

/// Evolves the product of two 1D states on the 2D grid and compares with the
/// tensor product of the separately evolved factors.
pub fn separability_error(
    a: &Subsystem,
    b: &Subsystem,
    params: &PhysicsParams,
    policy: Policy,
    mode: Mode,
    config: &IntegratorConfig,
) -> Result<SeparabilityReport> {
    if a.grid.dim() != 1 || b.grid.dim() != 1 {
        return Err(Error::Validation(
            "subsystems must be one-dimensional".into(),
        ));
    }
    let grid2 = Grid::new(
        &[a.grid.axis(0).n, b.grid.axis(0).n],
        &[a.grid.axis(0).length, b.grid.axis(0).length],
    )?;
    let (na, nb) = (a.grid.len(), b.grid.len());
    let va = a.potential.sample(&a.grid, params.mass)?;
    let vb = b.potential.sample(&b.grid, params.mass)?;
    let mut v2 = vec![0.0; na * nb];
    let mut rho = vec![0.0; na * nb];
    let mut s_per = vec![0.0; na * nb];
    for i in 0..na {
        for j in 0..nb {
            v2[i * nb + j] = va[i] + vb[j];
            rho[i * nb + j] = a.state.rho[i] * b.state.rho[j];
            s_per[i * nb + j] = a.state.s_per[i] + b.state.s_per[j];
        }
    }
    let product = HydroState {
        rho,
        winding: vec![a.state.winding[0], b.state.winding[0]],
        s_per,
        t: a.state.t,
    };
    let p_of = |pot: Potential| PhysicsParams {
        potential: pot,
        ..params.clone()
    };
    let (pa, pb, p2) = (
        p_of(a.potential.clone()),
        p_of(b.potential.clone()),
        p_of(Potential::Tabulated { values: v2 }),
    );
    let ga = GOperator::new(&a.grid, params.lambda_c, policy)?;
    let gb = GOperator::new(&b.grid, params.lambda_c, policy)?;
    let g2 = GOperator::new(&grid2, params.lambda_c, policy)?;

    let ta = evolve(&a.grid, &a.state, &pa, &ga, mode, config)?;
    let tb = evolve(&b.grid, &b.state, &pb, &gb, mode, config)?;
    let t2 = evolve(&grid2, &product, &p2, &g2, mode, config)?;
    for tr in [&ta, &tb, &t2] {
        if let Some(e) = &tr.error {
            return Err(e.clone());
        }
    }

    let mut rep = SeparabilityReport {
        error: 0.0,
        rho_error: 0.0,
        phase_error: 0.0,
        interior_error: 0.0,
        times: t2.times.clone(),
    };
    for ((sa, sb), s2) in ta.snapshots.iter().zip(&tb.snapshots).zip(&t2.snapshots) {
        let peak_a = sa.rho.iter().copied().fold(0.0, f64::max);
        let peak_b = sb.rho.iter().copied().fold(0.0, f64::max);
        for i in 0..na {
            for j in 0..nb {
                let k = i * nb + j;
                let dr = (s2.rho[k] - sa.rho[i] * sb.rho[j]).abs();
                let ds = wrap_phase(s2.s_per[k] - sa.s_per[i] - sb.s_per[j]).abs();
                rep.rho_error = rep.rho_error.max(dr);
                rep.phase_error = rep.phase_error.max(ds);
                rep.error = rep.error.max(dr + ds);
                if sa.rho[i] * sb.rho[j] >= 1e-8 * peak_a * peak_b {
                    rep.interior_error = rep.interior_error.max(dr + ds);
                }
            }
        }
    }
    Ok(rep)
}
