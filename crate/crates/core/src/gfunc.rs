//! The nonlocal phase operator G(λ²Δ) with G(x) = (√(1−x²) − 1)/x².

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Below this |x| the closed forms lose digits to cancellation.
const SERIES_SWITCH: f64 = 1e-4;

fn check_domain(x: f64) -> Result<()> {
    if x.is_finite() && x.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("G(x) needs |x| <= 1, got x = {x}")))
    }
}

fn g_series(x: f64) -> f64 {
    let u = x * x;
    -0.5 - u / 8.0 - u * u / 16.0
}

/// (√(1−x²) − 1)/x².
pub fn g_closed(x: f64) -> Result<f64> {
    check_domain(x)?;
    if x.abs() < SERIES_SWITCH {
        return Ok(g_series(x));
    }
    let u = x * x;
    Ok(((1.0 - u).sqrt() - 1.0) / u)
}

/// −2 sin²(asin(x)/2)/x².
pub fn g_trig(x: f64) -> Result<f64> {
    check_domain(x)?;
    if x.abs() < SERIES_SWITCH {
        return Ok(g_series(x));
    }
    let h = (x.asin() / 2.0).sin();
    Ok(-2.0 * h * h / (x * x))
}

/// Taylor coefficients c_0..=c_order of G about 0.
///
/// Odd coefficients vanish; c_{2(m-1)} = (−1)^m binom(1/2, m).
pub fn g_coefficients(order: usize) -> Vec<f64> {
    let mut c = vec![0.0; order + 1];
    // b = (-1)^m binom(1/2, m), starting at m = 1 where it is -1/2.
    let mut b = -0.5;
    let mut m = 1usize;
    while 2 * (m - 1) <= order {
        c[2 * (m - 1)] = b;
        b *= (m as f64 - 0.5) / (m as f64 + 1.0);
        m += 1;
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Every mode on the grid must satisfy λ|k| < 1.
    #[default]
    Strict,
    /// Modes with λ²|k|² >= 1 get a zero symbol.
    Projected,
}

/// Precomputed symbol g_j = G(−λ²|k_j|²) on a grid.
#[derive(Debug, Clone)]
pub struct GOperator {
    lambda_c: f64,
    policy: Policy,
    symbol: Vec<f64>,
    projected_modes: usize,
}

impl GOperator {
    pub fn new(grid: &Grid, lambda_c: f64, policy: Policy) -> Result<Self> {
        if !(lambda_c.is_finite() && lambda_c > 0.0) {
            return Err(Error::Domain(format!(
                "lambda_c must be positive, got {lambda_c}"
            )));
        }
        let reach = lambda_c * grid.k_max();
        if policy == Policy::Strict && reach >= 1.0 {
            return Err(Error::Domain(format!(
                "strict policy needs lambda_c * k_max < 1, got {lambda_c} * {:.6} = {reach:.6}",
                grid.k_max()
            )));
        }
        let mut projected_modes = 0;
        let symbol = grid
            .k_squared()
            .into_iter()
            .map(|k2| {
                let x = lambda_c * lambda_c * k2;
                if x >= 1.0 {
                    projected_modes += 1;
                    0.0
                } else {
                    g_closed(-x).expect("admissible mode")
                }
            })
            .collect();
        Ok(Self {
            lambda_c,
            policy,
            symbol,
            projected_modes,
        })
    }

    /// The λ → 0 operator, G ≡ −1/2, under which the flow is linear.
    pub fn linear(grid: &Grid) -> Self {
        Self {
            lambda_c: 0.0,
            policy: Policy::Strict,
            symbol: vec![-0.5; grid.len()],
            projected_modes: 0,
        }
    }

    pub fn lambda_c(&self) -> f64 {
        self.lambda_c
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    pub fn projected_modes(&self) -> usize {
        self.projected_modes
    }

    /// Whether mode `j` was zeroed by the projected policy.
    pub fn is_projected(&self, grid: &Grid, j: usize) -> bool {
        self.lambda_c > 0.0 && self.lambda_c * self.lambda_c * grid.k_squared()[j] >= 1.0
    }

    /// Symbol of G + 1/2, the part that differs from the linear flow.
    pub fn correction_symbol(&self) -> Vec<f64> {
        self.symbol.iter().map(|g| g + 0.5).collect()
    }

    pub fn is_linear(&self) -> bool {
        self.symbol.iter().all(|&g| g == -0.5)
    }

    pub fn apply(&self, grid: &Grid, s: &[f64]) -> Result<Vec<f64>> {
        grid.check(s.len())?;
        Ok(grid.apply_multiplier(s, &self.symbol))
    }
}

/// Σ_{n=0}^{order} c_n λ^{2n} Δⁿ s.
///
/// Modes with λ²|k|² >= 1 lie outside the radius of convergence and are
/// dropped, as under the projected policy.
pub fn apply_g_truncated(grid: &Grid, s: &[f64], lambda_c: f64, order: usize) -> Result<Vec<f64>> {
    grid.check(s.len())?;
    let c = g_coefficients(order);
    let symbol: Vec<f64> = grid
        .k_squared()
        .into_iter()
        .map(|k2| {
            let x = -lambda_c * lambda_c * k2;
            if x <= -1.0 {
                return 0.0;
            }
            // Horner in x = λ²(−k²).
            c.iter().rev().fold(0.0, |acc, &cn| acc * x + cn)
        })
        .collect();
    Ok(grid.apply_multiplier(s, &symbol))
}
