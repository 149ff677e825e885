//! Initial conditions.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::madelung::{check_winding, decompose, HydroState, PhysicsParams};

/// |ψ| at the domain edge above which a localized state is flagged.
pub const EDGE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    PlaneWave {
        winding: Vec<f64>,
    },
    /// Free packet with density variance σ² at age 0, sampled at `age`.
    Gaussian {
        #[serde(default)]
        center: f64,
        sigma: f64,
        #[serde(default)]
        winding: f64,
        #[serde(default)]
        age: f64,
    },
    HarmonicGround {
        omega: f64,
    },
    /// Ground state displaced by `displacement`, released at rest.
    Coherent {
        omega: f64,
        displacement: f64,
    },
    Custom {
        rho: Vec<f64>,
        s_per: Vec<f64>,
        winding: Vec<f64>,
    },
    Product {
        a: Box<InitialCondition>,
        b: Box<InitialCondition>,
    },
}

/// A built initial condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub state: HydroState,
    pub localized: bool,
    pub warnings: Vec<String>,
}

/// Free Gaussian packet on the real line.
pub fn gaussian_packet(
    x: f64,
    t: f64,
    center: f64,
    sigma: f64,
    k: f64,
    params: &PhysicsParams,
) -> Complex64 {
    let (hbar, m) = (params.hbar, params.mass);
    let alpha = Complex64::new(sigma * sigma, hbar * t / (2.0 * m));
    let v = hbar * k / m;
    let y = x - center - v * t;
    let norm = (2.0 * PI).powf(-0.25) * sigma.sqrt() / alpha.sqrt();
    let arg =
        -y * y / (4.0 * alpha) + Complex64::i() * (k * (x - center) - hbar * k * k * t / (2.0 * m));
    norm * arg.exp()
}

/// Density standard deviation of a free packet: σ√(1 + (t/t₀)²), t₀ = 2mσ²/ħ.
pub fn packet_width(t: f64, sigma: f64, params: &PhysicsParams) -> f64 {
    let t0 = 2.0 * params.mass * sigma * sigma / params.hbar;
    sigma * (1.0 + (t / t0).powi(2)).sqrt()
}

fn gaussian_1d(
    grid: &Grid,
    center: f64,
    sigma: f64,
    k: f64,
    age: f64,
    params: &PhysicsParams,
) -> Result<HydroState> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Validation(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    check_winding(grid, &[k])?;
    let l = grid.axis(0).length;
    let psi: Vec<Complex64> = grid
        .coordinates(0)
        .iter()
        .map(|&x| {
            (-3..=3)
                .map(|n| gaussian_packet(x + n as f64 * l, age, center, sigma, k, params))
                .sum()
        })
        .collect();
    let mut st = decompose(grid, &psi, 0.0)?;
    st.t = age;
    Ok(st)
}

fn ground_1d(grid: &Grid, omega: f64, shift: f64, params: &PhysicsParams) -> Result<HydroState> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::Validation(format!(
            "omega must be positive, got {omega}"
        )));
    }
    let a = params.mass * omega / params.hbar;
    let c = (a / PI).sqrt();
    Ok(HydroState {
        rho: grid
            .coordinates(0)
            .iter()
            .map(|x| c * (-a * (x - shift).powi(2)).exp())
            .collect(),
        winding: vec![0.0],
        s_per: vec![0.0; grid.len()],
        t: 0.0,
    })
}

/// The 1D grid along one axis of `grid`.
pub fn axis_grid(grid: &Grid, axis: usize) -> Result<Grid> {
    Grid::new(&[grid.axis(axis).n], &[grid.axis(axis).length])
}

impl InitialCondition {
    pub fn is_localized(&self) -> bool {
        match self {
            InitialCondition::PlaneWave { .. } | InitialCondition::Custom { .. } => false,
            InitialCondition::Product { a, b } => a.is_localized() || b.is_localized(),
            _ => true,
        }
    }

    pub fn build(&self, grid: &Grid, params: &PhysicsParams) -> Result<Prepared> {
        let state = self.build_state(grid, params)?;
        state.validate(grid)?;
        let localized = self.is_localized();
        let mut warnings = Vec::new();
        if localized {
            let amp: Vec<f64> = state.rho.iter().map(|r| r.max(0.0).sqrt()).collect();
            let edge = grid.edge_max(&amp);
            if edge >= EDGE_TOLERANCE {
                warnings.push(format!(
                    "localized state has |psi| = {edge:.3e} at the domain edge (tolerance {EDGE_TOLERANCE:.0e})"
                ));
            }
        }
        Ok(Prepared {
            state,
            localized,
            warnings,
        })
    }

    fn build_state(&self, grid: &Grid, params: &PhysicsParams) -> Result<HydroState> {
        let needs_1d = |name: &str| -> Result<()> {
            if grid.dim() != 1 {
                return Err(Error::Validation(format!(
                    "{name} initial data is one-dimensional; use a product for 2D grids"
                )));
            }
            Ok(())
        };
        match self {
            InitialCondition::PlaneWave { winding } => {
                if winding.len() != grid.dim() {
                    return Err(Error::Validation(format!(
                        "plane wave needs {} winding components",
                        grid.dim()
                    )));
                }
                check_winding(grid, winding)?;
                Ok(HydroState {
                    rho: vec![1.0 / grid.volume(); grid.len()],
                    winding: winding.clone(),
                    s_per: vec![0.0; grid.len()],
                    t: 0.0,
                })
            }
            InitialCondition::Gaussian {
                center,
                sigma,
                winding,
                age,
            } => {
                needs_1d("gaussian")?;
                gaussian_1d(grid, *center, *sigma, *winding, *age, params)
            }
            InitialCondition::HarmonicGround { omega } => {
                needs_1d("harmonic_ground")?;
                ground_1d(grid, *omega, 0.0, params)
            }
            InitialCondition::Coherent {
                omega,
                displacement,
            } => {
                needs_1d("coherent")?;
                ground_1d(grid, *omega, *displacement, params)
            }
            InitialCondition::Custom {
                rho,
                s_per,
                winding,
            } => {
                grid.check(rho.len())?;
                grid.check(s_per.len())?;
                if rho.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
                    return Err(Error::Validation(
                        "custom rho must be finite and non-negative".into(),
                    ));
                }
                Ok(HydroState {
                    rho: rho.clone(),
                    winding: winding.clone(),
                    s_per: s_per.clone(),
                    t: 0.0,
                })
            }
            InitialCondition::Product { a, b } => {
                if grid.dim() != 2 {
                    return Err(Error::Validation(
                        "product initial data needs a 2D grid".into(),
                    ));
                }
                let sa = a.build_state(&axis_grid(grid, 0)?, params)?;
                let sb = b.build_state(&axis_grid(grid, 1)?, params)?;
                Ok(product_state(&sa, &sb))
            }
        }
    }
}

/// ρ_a⊗ρ_b with phases added.
pub fn product_state(a: &HydroState, b: &HydroState) -> HydroState {
    let (na, nb) = (a.rho.len(), b.rho.len());
    let mut rho = Vec::with_capacity(na * nb);
    let mut s_per = Vec::with_capacity(na * nb);
    for i in 0..na {
        for j in 0..nb {
            rho.push(a.rho[i] * b.rho[j]);
            s_per.push(a.s_per[i] + b.s_per[j]);
        }
    }
    HydroState {
        rho,
        winding: vec![a.winding[0], b.winding[0]],
        s_per,
        t: a.t,
    }
}
