//! The Δⁿψ recurrence in amplitude/phase form.
//!
//! With ψ = R e^{iS}, Δⁿψ = (Aₙ + iBₙ) e^{iS} where
//!   Aₙ = L Aₙ₋₁ − M Bₙ₋₁,  Bₙ = L Bₙ₋₁ + M Aₙ₋₁,
//!   L = Δ − |∇S|²,  M = ΔS + 2∇S·∇,
//! starting from A₀ = R, B₀ = 0.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::{max_abs, max_abs_diff};

/// S = k̄·x + a|x|² + s_per. The linear and quadratic parts are differentiated
/// analytically so they never pass through a transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    pub winding: Vec<f64>,
    pub quadratic: f64,
    pub s_per: Vec<f64>,
}

impl Phase {
    pub fn periodic(grid: &Grid, winding: Vec<f64>, s_per: Vec<f64>) -> Self {
        debug_assert_eq!(winding.len(), grid.dim());
        Self {
            winding,
            quadratic: 0.0,
            s_per,
        }
    }

    pub fn values(&self, grid: &Grid) -> Vec<f64> {
        let mut s = self.s_per.clone();
        for a in 0..grid.dim() {
            for (si, x) in s.iter_mut().zip(grid.coordinates(a)) {
                *si += self.winding[a] * x + self.quadratic * x * x;
            }
        }
        s
    }

    pub fn gradient(&self, grid: &Grid) -> Vec<Vec<f64>> {
        let mut g = grid.gradient(&self.s_per);
        for (a, comp) in g.iter_mut().enumerate() {
            for (c, x) in comp.iter_mut().zip(grid.coordinates(a)) {
                *c += self.winding[a] + 2.0 * self.quadratic * x;
            }
        }
        g
    }

    pub fn laplacian(&self, grid: &Grid) -> Vec<f64> {
        let shift = 2.0 * self.quadratic * grid.dim() as f64;
        grid.laplacian(&self.s_per)
            .into_iter()
            .map(|v| v + shift)
            .collect()
    }
}

/// Precomputed ∇S, |∇S|² and ΔS.
struct PhaseParts {
    grad: Vec<Vec<f64>>,
    grad_sq: Vec<f64>,
    lap: Vec<f64>,
}

impl PhaseParts {
    fn new(grid: &Grid, phase: &Phase) -> Self {
        let grad = phase.gradient(grid);
        let mut grad_sq = vec![0.0; grid.len()];
        for comp in &grad {
            for (q, g) in grad_sq.iter_mut().zip(comp) {
                *q += g * g;
            }
        }
        Self {
            grad,
            grad_sq,
            lap: phase.laplacian(grid),
        }
    }

    /// (Δ − |∇S|²) f
    fn l(&self, grid: &Grid, f: &[f64]) -> Vec<f64> {
        grid.laplacian(f)
            .into_iter()
            .zip(&self.grad_sq)
            .zip(f)
            .map(|((d, q), v)| d - q * v)
            .collect()
    }

    /// (ΔS + 2∇S·∇) f
    fn m(&self, grid: &Grid, f: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.lap.iter().zip(f).map(|(l, v)| l * v).collect();
        for (comp, df) in self.grad.iter().zip(grid.gradient(f)) {
            for ((o, g), d) in out.iter_mut().zip(comp).zip(df) {
                *o += 2.0 * g * d;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrencePair {
    pub order: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

pub fn recurrence_step(
    grid: &Grid,
    a_prev: &[f64],
    b_prev: &[f64],
    phase: &Phase,
) -> (Vec<f64>, Vec<f64>) {
    step(grid, a_prev, b_prev, &PhaseParts::new(grid, phase))
}

fn step(grid: &Grid, a_prev: &[f64], b_prev: &[f64], p: &PhaseParts) -> (Vec<f64>, Vec<f64>) {
    let a: Vec<f64> = p
        .l(grid, a_prev)
        .into_iter()
        .zip(p.m(grid, b_prev))
        .map(|(x, y)| x - y)
        .collect();
    let b: Vec<f64> = p
        .l(grid, b_prev)
        .into_iter()
        .zip(p.m(grid, a_prev))
        .map(|(x, y)| x + y)
        .collect();
    (a, b)
}

/// Pairs for orders 0..=n.
pub fn recurrence(grid: &Grid, r: &[f64], phase: &Phase, n: usize) -> Result<Vec<RecurrencePair>> {
    grid.check(r.len())?;
    grid.check(phase.s_per.len())?;
    let parts = PhaseParts::new(grid, phase);
    let mut out = vec![RecurrencePair {
        order: 0,
        a: r.to_vec(),
        b: vec![0.0; r.len()],
    }];
    for order in 1..=n {
        let last = out.last().expect("non-empty");
        let (a, b) = step(grid, &last.a, &last.b, &parts);
        out.push(RecurrencePair { order, a, b });
    }
    Ok(out)
}

/// Δⁿψ by repeated spectral Laplacians.
pub fn laplacian_power(grid: &Grid, psi: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut spec = grid.forward_complex(psi);
    for (s, k2) in spec.iter_mut().zip(grid.k_squared()) {
        *s *= (-k2).powi(n as i32);
    }
    grid.inverse_complex(spec)
}

/// ‖(Aₙ + iBₙ)e^{iS} − Δⁿψ‖∞ / ‖Δⁿψ‖∞ for a periodic phase.
pub fn recurrence_error(grid: &Grid, r: &[f64], phase: &Phase, n: usize) -> Result<f64> {
    if phase.quadratic != 0.0 {
        return Err(Error::Validation(
            "direct comparison needs a periodic wave function".into(),
        ));
    }
    let pairs = recurrence(grid, r, phase, n)?;
    let s = phase.values(grid);
    let psi: Vec<Complex64> = r
        .iter()
        .zip(&s)
        .map(|(&a, &p)| Complex64::from_polar(a, p))
        .collect();
    let direct = laplacian_power(grid, &psi, n);
    let last = &pairs[n];
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for i in 0..grid.len() {
        let via = Complex64::new(last.a[i], last.b[i]) * Complex64::from_polar(1.0, s[i]);
        num = num.max((via - direct[i]).norm());
        den = den.max(direct[i].norm());
    }
    Ok(if den > 0.0 { num / den } else { num })
}

fn check_nodeless(r: &[f64], floor: f64) -> Result<()> {
    let min = r.iter().copied().fold(f64::INFINITY, f64::min);
    if min < floor {
        return Err(Error::Node { min, floor });
    }
    Ok(())
}

/// ∇·(R²∇S) / R.
fn divergence_form(grid: &Grid, r: &[f64], parts: &PhaseParts) -> Vec<f64> {
    let flux: Vec<Vec<f64>> = parts
        .grad
        .iter()
        .map(|g| g.iter().zip(r).map(|(g, r)| r * r * g).collect())
        .collect();
    grid.divergence(&flux)
        .into_iter()
        .zip(r)
        .map(|(d, r)| d / r)
        .collect()
}

/// sup |(ΔS + 2∇S·∇)R − ∇·(R²∇S)/R|.
pub fn b1_identity_residual(grid: &Grid, r: &[f64], phase: &Phase, floor: f64) -> Result<f64> {
    grid.check(r.len())?;
    check_nodeless(r, floor)?;
    let parts = PhaseParts::new(grid, phase);
    Ok(max_abs_diff(
        &parts.m(grid, r),
        &divergence_form(grid, r, &parts),
    ))
}

/// α = RΔS + 2∇S·∇R.
pub fn alpha(grid: &Grid, r: &[f64], phase: &Phase) -> Vec<f64> {
    PhaseParts::new(grid, phase).m(grid, r)
}

/// sup |R α − ∇·(R²∇S)|.
pub fn alpha_divergence_residual(grid: &Grid, r: &[f64], phase: &Phase) -> f64 {
    let parts = PhaseParts::new(grid, phase);
    let a = parts.m(grid, r);
    let flux: Vec<Vec<f64>> = parts
        .grad
        .iter()
        .map(|g| g.iter().zip(r).map(|(g, r)| r * r * g).collect())
        .collect();
    let div = grid.divergence(&flux);
    a.iter()
        .zip(r)
        .zip(&div)
        .map(|((a, r), d)| (r * a - d).abs())
        .fold(0.0, f64::max)
}

/// Residuals of the second-order closed forms against two recurrence steps,
/// relative to the size of the recurrence result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondOrderResiduals {
    pub a2: f64,
    pub b2: f64,
    /// B₂ with ∇ in the second term acting on ΔR and ∇R only, never on |∇S|².
    pub b2_alternative: f64,
}

pub fn a2_b2_check(
    grid: &Grid,
    r: &[f64],
    phase: &Phase,
    floor: f64,
) -> Result<SecondOrderResiduals> {
    grid.check(r.len())?;
    check_nodeless(r, floor)?;
    let parts = PhaseParts::new(grid, phase);
    let pairs = recurrence(grid, r, phase, 2)?;
    let (a2, b2) = (&pairs[2].a, &pairs[2].b);

    let b1 = divergence_form(grid, r, &parts);
    let lr = parts.l(grid, r);
    let a2_closed: Vec<f64> = parts
        .l(grid, &lr)
        .into_iter()
        .zip(parts.m(grid, &b1))
        .map(|(x, y)| x - y)
        .collect();
    let lb1 = parts.l(grid, &b1);
    let b2_closed: Vec<f64> = lb1
        .iter()
        .zip(parts.m(grid, &lr))
        .map(|(x, y)| x + y)
        .collect();

    // ΔS·(LR) + 2∇S·∇ΔR − |∇S|²·2∇S·∇R
    let lap_r = grid.laplacian(r);
    let mut alt: Vec<f64> = parts.lap.iter().zip(&lr).map(|(a, b)| a * b).collect();
    for ((g, d_lap), d_r) in parts
        .grad
        .iter()
        .zip(grid.gradient(&lap_r))
        .zip(grid.gradient(r))
    {
        for i in 0..alt.len() {
            alt[i] += 2.0 * g[i] * d_lap[i] - parts.grad_sq[i] * 2.0 * g[i] * d_r[i];
        }
    }
    let b2_alt: Vec<f64> = lb1.iter().zip(&alt).map(|(x, y)| x + y).collect();

    let scale_a = max_abs(a2).max(f64::MIN_POSITIVE);
    let scale_b = max_abs(b2).max(f64::MIN_POSITIVE);
    Ok(SecondOrderResiduals {
        a2: max_abs_diff(a2, &a2_closed) / scale_a,
        b2: max_abs_diff(b2, &b2_closed) / scale_b,
        b2_alternative: max_abs_diff(b2, &b2_alt) / scale_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn first_step_matches_closed_forms() {
        let g = make_grid(1, 32, 2.0 * PI).unwrap();
        let x = g.coordinates(0);
        let r: Vec<f64> = x.iter().map(|x| 1.0 + 0.2 * x.cos()).collect();
        let phase = Phase::periodic(&g, vec![1.0], x.iter().map(|x| 0.3 * x.sin()).collect());
        let (a1, b1) = recurrence_step(&g, &r, &vec![0.0; 32], &phase);
        for i in 0..32 {
            let dr = -0.2 * x[i].sin();
            let ddr = -0.2 * x[i].cos();
            let ds = 1.0 + 0.3 * x[i].cos();
            let dds = -0.3 * x[i].sin();
            assert!((a1[i] - (ddr - ds * ds * r[i])).abs() < 1e-12);
            assert!((b1[i] - (dds * r[i] + 2.0 * ds * dr)).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_phase_gives_plain_laplacians() {
        let g = make_grid(1, 32, 2.0 * PI).unwrap();
        let x = g.coordinates(0);
        let r: Vec<f64> = x.iter().map(|x| 2.0 + (2.0 * x).cos()).collect();
        let phase = Phase::periodic(&g, vec![0.0], vec![0.7; 32]);
        let pairs = recurrence(&g, &r, &phase, 3).unwrap();
        let mut want = r.clone();
        for p in &pairs[1..] {
            want = g.laplacian(&want);
            assert!(max_abs_diff(&p.a, &want) < 1e-9);
            assert!(max_abs(&p.b) < 1e-12);
        }
    }

    #[test]
    fn b1_identity_and_alpha() {
        let g = make_grid(1, 32, 2.0 * PI).unwrap();
        let x = g.coordinates(0);
        let phase = Phase::periodic(&g, vec![0.0], x.iter().map(|x| x.sin()).collect());
        let one = vec![1.0; 32];
        assert!(b1_identity_residual(&g, &one, &phase, 1e-10).unwrap() < 1e-12);
        let a = alpha(&g, &vec![2.0; 32], &phase);
        assert!(a
            .iter()
            .zip(&x)
            .all(|(a, x)| (a + 2.0 * x.sin()).abs() < 1e-12));
        let node: Vec<f64> = x.iter().map(|x| x.sin()).collect();
        assert!(matches!(
            b1_identity_residual(&g, &node, &phase, 1e-10),
            Err(Error::Node { .. })
        ));
    }

    #[test]
    fn folded_quadratic_phase_on_a_gaussian() {
        let g = make_grid(1, 256, 40.0).unwrap();
        let x = g.coordinates(0);
        let r: Vec<f64> = x.iter().map(|x| (-x * x / 4.0).exp() + 1e-300).collect();
        let phase = Phase {
            winding: vec![0.0],
            quadratic: 1.0,
            s_per: vec![0.0; 256],
        };
        let parts = PhaseParts::new(&g, &phase);
        let lhs = parts.m(&g, &r);
        let flux: Vec<f64> = parts.grad[0]
            .iter()
            .zip(&r)
            .map(|(g, r)| r * r * g)
            .collect();
        let div = g.derivative(&flux, 0, 1);
        let res = lhs
            .iter()
            .zip(&r)
            .zip(&div)
            .map(|((l, r), d)| (l * r - d).abs())
            .fold(0.0, f64::max);
        assert!(res < 1e-9, "{res}");
    }
}
