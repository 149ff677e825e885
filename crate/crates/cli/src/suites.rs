//! Fixed-seed property suites behind `rse-lab check`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rse_core::diagnostics::{galilean_boost, h_imag, observables, record};
use rse_core::dynamics::{evolve, evolve_splitstep_linear, rhs_hydro, IntegratorConfig, Mode};
use rse_core::gfunc::{apply_g_truncated, g_closed, g_coefficients, g_trig};
use rse_core::madelung::{decompose, reconstruct};
use rse_core::random::{band_limited, rng};
use rse_core::recurrence::{
    a2_b2_check, alpha_divergence_residual, b1_identity_residual, recurrence_error, Phase,
};
use rse_core::scenario::{gaussian_packet, packet_width};
use rse_core::{make_grid, GOperator, Grid, HydroState, PhysicsParams, Policy};
use serde::Serialize;

type Outcome = std::result::Result<String, String>;

pub struct Check {
    pub name: &'static str,
    run: fn() -> Outcome,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub const SUITES: [&str; 5] = ["grid", "gfunc", "recurrence", "dynamics", "diagnostics"];

fn within(what: &str, value: f64, tol: f64) -> Outcome {
    if value.is_finite() && value < tol {
        Ok(format!("{what} = {value:.3e} < {tol:.0e}"))
    } else {
        Err(format!("{what} = {value:.3e}, tolerance {tol:.0e}"))
    }
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn ok<T, E: std::fmt::Display>(r: std::result::Result<T, E>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Nodeless band-limited state with unit mass.
pub fn random_state(grid: &Grid, seed: u64, winding: f64) -> HydroState {
    let mut r = rng(seed);
    let mut rho: Vec<f64> = band_limited(grid, 3, 0.4, &mut r)
        .iter()
        .map(|v| 1.0 + v)
        .collect();
    let norm = grid.integrate(&rho);
    rho.iter_mut().for_each(|v| *v /= norm);
    HydroState {
        rho,
        winding: vec![winding; grid.dim()],
        s_per: band_limited(grid, 3, 0.3, &mut r),
        t: 0.0,
    }
}

fn grid_parseval() -> Outcome {
    let g = ok(make_grid(2, 32, 5.0))?;
    let f = band_limited(&g, 10, 1.0, &mut rng(1));
    let z: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let sq: Vec<f64> = f.iter().map(|v| v * v).collect();
    within(
        "Parseval defect",
        (g.integrate(&sq) - g.parseval(&z)).abs(),
        1e-12,
    )
}

fn grid_derivatives() -> Outcome {
    let g = ok(make_grid(1, 64, 2.0 * PI))?;
    let x = g.coordinates(0);
    let f: Vec<f64> = x.iter().map(|x| (3.0 * x).sin()).collect();
    let want: Vec<f64> = x.iter().map(|x| 3.0 * (3.0 * x).cos()).collect();
    within(
        "d/dx sin 3x error",
        sup(&g.derivative(&f, 0, 1), &want),
        1e-12,
    )
}

fn grid_commutation() -> Outcome {
    let g = ok(Grid::new(&[16, 32], &[2.0 * PI, 5.0]))?;
    let f = band_limited(&g, 5, 1.0, &mut rng(2));
    let xy = g.derivative(&g.derivative(&f, 0, 1), 1, 1);
    let yx = g.derivative(&g.derivative(&f, 1, 1), 0, 1);
    within("mixed derivative mismatch", sup(&xy, &yx), 1e-10)
}

fn grid_product_rule() -> Outcome {
    let g = ok(make_grid(1, 64, 2.0 * PI))?;
    let mut r = rng(3);
    let a = band_limited(&g, 10, 1.0, &mut r);
    let b = band_limited(&g, 10, 1.0, &mut r);
    let lhs = g.derivative(&g.dealiased_product(&a, &b), 0, 1);
    let rhs: Vec<f64> = g
        .dealiased_product(&g.derivative(&a, 0, 1), &b)
        .iter()
        .zip(g.dealiased_product(&a, &g.derivative(&b, 0, 1)))
        .map(|(x, y)| x + y)
        .collect();
    within("product rule defect", sup(&lhs, &rhs), 1e-10)
}

fn grid_gaussian_integral() -> Outcome {
    let g = ok(make_grid(1, 256, 40.0))?;
    let f: Vec<f64> = g
        .coordinates(0)
        .iter()
        .map(|x| (-x * x / 2.0).exp() / (2.0 * PI).sqrt())
        .collect();
    within("Gaussian mass defect", (g.integrate(&f) - 1.0).abs(), 1e-8)
}

fn gfunc_coefficients() -> Outcome {
    let c = g_coefficients(4);
    if c == [-0.5, 0.0, -0.125, 0.0, -0.0625] {
        Ok("c_0..c_4 = -1/2, 0, -1/8, 0, -1/16".into())
    } else {
        Err(format!("c_0..c_4 = {c:?}"))
    }
}

fn gfunc_trig_sweep() -> Outcome {
    let worst = (-99..=99)
        .map(|i| {
            let x = i as f64 / 100.0;
            (g_trig(x).unwrap() - g_closed(x).unwrap()).abs()
        })
        .fold(0.0, f64::max);
    within("max |g_trig - g_closed|", worst, 1e-12)
}

fn gfunc_series() -> Outcome {
    let g = ok(make_grid(1, 64, 2.0 * PI))?;
    let lambda = 0.05;
    let s = band_limited(&g, 10, 1.0, &mut rng(4));
    let op = ok(GOperator::new(&g, lambda, Policy::Projected))?;
    let exact = ok(op.apply(&g, &s))?;
    let series = ok(apply_g_truncated(&g, &s, lambda, 12))?;
    within("series vs symbol", sup(&exact, &series), 1e-8)
}

fn gfunc_policies() -> Outcome {
    let g = ok(make_grid(1, 64, 2.0 * PI))?;
    if GOperator::new(&g, 0.1, Policy::Strict).is_ok() {
        return Err("strict policy accepted lambda_c k_max = 3.2".into());
    }
    let op = ok(GOperator::new(&g, 0.1, Policy::Projected))?;
    if op.projected_modes() != 45 || op.symbol()[0] != -0.5 {
        return Err(format!(
            "projected {} modes, g(0) = {}",
            op.projected_modes(),
            op.symbol()[0]
        ));
    }
    Ok("strict rejects, projected zeroes 45 modes".into())
}

fn recurrence_direct() -> Outcome {
    let g = ok(make_grid(1, 64, 2.0 * PI))?;
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let mut r = rng(100 + seed);
        let amp: Vec<f64> = band_limited(&g, 3, 0.4, &mut r)
            .iter()
            .map(|v| 1.0 + v)
            .collect();
        let phase = Phase::periodic(&g, vec![1.0], band_limited(&g, 3, 0.5, &mut r));
        for n in 1..=4 {
            worst = worst.max(ok(recurrence_error(&g, &amp, &phase, n))?);
        }
    }
    within("relative recurrence error, n <= 4", worst, 1e-8)
}

fn recurrence_b1() -> Outcome {
    let g = ok(make_grid(1, 64, 2.0 * PI))?;
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let mut r = rng(200 + seed);
        let amp: Vec<f64> = band_limited(&g, 3, 0.4, &mut r)
            .iter()
            .map(|v| 1.0 + v)
            .collect();
        let phase = Phase::periodic(&g, vec![1.0], band_limited(&g, 3, 0.5, &mut r));
        worst = worst.max(ok(b1_identity_residual(&g, &amp, &phase, 1e-10))?);
    }
    within("B1 divergence-form residual", worst, 1e-9)
}

fn recurrence_second_order() -> Outcome {
    let g = ok(make_grid(1, 32, 2.0 * PI))?;
    let mut r = rng(21);
    let amp: Vec<f64> = band_limited(&g, 3, 0.3, &mut r)
        .iter()
        .map(|v| 1.0 + v)
        .collect();
    let phase = Phase::periodic(&g, vec![1.0], band_limited(&g, 3, 0.5, &mut r));
    let res = ok(a2_b2_check(&g, &amp, &phase, 1e-10))?;
    within("A2/B2 closed-form residual", res.a2.max(res.b2), 1e-8)
        .map(|d| format!("{d}; alternative B2 grouping {:.3e}", res.b2_alternative))
}

fn recurrence_alpha() -> Outcome {
    let g = ok(make_grid(1, 32, 2.0 * PI))?;
    let mut r = rng(22);
    let amp: Vec<f64> = band_limited(&g, 3, 0.3, &mut r)
        .iter()
        .map(|v| 1.0 + v)
        .collect();
    let phase = Phase::periodic(&g, vec![2.0], band_limited(&g, 3, 0.5, &mut r));
    within(
        "R alpha - div(R^2 grad S)",
        alpha_divergence_residual(&g, &amp, &phase),
        1e-9,
    )
}

fn smooth_setup() -> (Grid, PhysicsParams, HydroState) {
    let g = make_grid(1, 32, 4.0 * PI).expect("valid grid");
    let x = g.coordinates(0);
    let mut rho: Vec<f64> = x.iter().map(|x| 1.0 + 0.3 * (x / 2.0).cos()).collect();
    let norm = g.integrate(&rho);
    rho.iter_mut().for_each(|r| *r /= norm);
    let st = HydroState {
        rho,
        winding: vec![0.0],
        s_per: x.iter().map(|x| 0.2 * (x / 2.0).sin()).collect(),
        t: 0.0,
    };
    (g, PhysicsParams::default(), st)
}

fn dynamics_plane_wave() -> Outcome {
    let g = ok(make_grid(1, 32, 2.0 * PI))?;
    let p = PhysicsParams::default();
    let op = ok(GOperator::new(&g, 0.02, Policy::Strict))?;
    let st = HydroState {
        rho: vec![1.0 / (2.0 * PI); 32],
        winding: vec![3.0],
        s_per: vec![0.0; 32],
        t: 0.0,
    };
    let cfg = IntegratorConfig::new(0.001, 0.5);
    let a = ok(evolve(&g, &st, &p, &op, Mode::Modified, &cfg))?;
    let b = ok(evolve(&g, &st, &p, &op, Mode::Linear, &cfg))?;
    let (sa, sb) = (a.last(), b.last());
    let err = sup(&sa.rho, &sb.rho).max(sup(&sa.s_per, &sb.s_per));
    let exact = -4.5 * sa.t;
    let phase_err = sa
        .s_per
        .iter()
        .map(|s| (s - exact).abs())
        .fold(0.0, f64::max);
    within("plane wave modified vs linear", err.max(phase_err), 1e-12)
}

fn dynamics_conservation() -> Outcome {
    let (g, p, st) = smooth_setup();
    let op = ok(GOperator::new(&g, 0.1, Policy::Strict))?;
    let cfg = IntegratorConfig::new(0.005, 1.0);
    let tr = ok(evolve(&g, &st, &p, &op, Mode::Modified, &cfg))?;
    if let Some(e) = tr.error {
        return Err(e.to_string());
    }
    let worst = tr
        .records
        .iter()
        .map(|r| (r.norm - 1.0).abs())
        .fold(0.0, f64::max);
    within("norm defect", worst, 1e-12)
}

fn dynamics_rk4_order() -> Outcome {
    let (g, p, st) = smooth_setup();
    let op = ok(GOperator::new(&g, 0.1, Policy::Strict))?;
    let run = |dt: f64| -> std::result::Result<HydroState, String> {
        let mut cfg = IntegratorConfig::new(dt, 0.4);
        cfg.save_every = usize::MAX;
        let tr = ok(evolve(&g, &st, &p, &op, Mode::Modified, &cfg))?;
        Ok(tr.last().clone())
    };
    let (a, b, c) = (run(0.01)?, run(0.005)?, run(0.0025)?);
    let slope = (sup(&a.rho, &b.rho) / sup(&b.rho, &c.rho)).log2();
    if (slope - 4.0).abs() < 0.3 {
        Ok(format!("self-convergence slope {slope:.3}"))
    } else {
        Err(format!("self-convergence slope {slope:.3}"))
    }
}

fn dynamics_splitstep_spreading() -> Outcome {
    let p = PhysicsParams::default();
    let g = ok(make_grid(1, 256, 40.0))?;
    let x = g.coordinates(0);
    let psi0: Vec<Complex64> = x
        .iter()
        .map(|&x| gaussian_packet(x, 0.0, 0.0, 1.0, 0.0, &p))
        .collect();
    let mut cfg = IntegratorConfig::new(0.01, 2.0);
    cfg.save_every = 20;
    let tr = ok(evolve_splitstep_linear(&g, &psi0, 0.0, &p, &cfg))?;
    let mut worst: f64 = 0.0;
    for (t, psi) in tr.times.iter().zip(&tr.snapshots) {
        let var: Vec<f64> = x
            .iter()
            .zip(psi)
            .map(|(x, c)| x * x * c.norm_sqr())
            .collect();
        worst = worst.max((g.integrate(&var).sqrt() - packet_width(*t, 1.0, &p)).abs());
    }
    within("width vs analytic", worst, 1e-8)
}

fn dynamics_linear_limit() -> Outcome {
    let (g, p, st) = smooth_setup();
    let lin = GOperator::linear(&g);
    let (d0, s0) = ok(rhs_hydro(&g, &st, &p, &lin, Mode::Linear, 1e-12))?;
    let (d1, s1) = ok(rhs_hydro(&g, &st, &p, &lin, Mode::Modified, 1e-12))?;
    within(
        "linear operator vs linear mode",
        sup(&d0, &d1).max(sup(&s0, &s1)),
        1e-15,
    )
}

fn diagnostics_boost() -> Outcome {
    let g = ok(make_grid(1, 64, 2.0 * PI))?;
    let p = PhysicsParams::default();
    let st = random_state(&g, 7, 2.0);
    let before = ok(observables(&g, &st, &p))?;
    let boosted = ok(galilean_boost(&g, &st, &p, &[3.0], 0.0))?;
    let after = ok(observables(&g, &boosted, &p))?;
    within(
        "momentum shift defect",
        (after.mean_p[0] - before.mean_p[0] + 3.0).abs(),
        1e-10,
    )
}

fn diagnostics_zero_cases() -> Outcome {
    let p = PhysicsParams::default();
    let g = ok(make_grid(1, 32, 2.0 * PI))?;
    let op = ok(GOperator::new(&g, 0.05, Policy::Strict))?;
    let plane = HydroState {
        rho: vec![1.0 / (2.0 * PI); 32],
        winding: vec![2.0],
        s_per: vec![0.0; 32],
        t: 0.0,
    };
    let r = ok(record(&g, &plane, &p, &op, Mode::Modified))?;
    let hi = ok(h_imag(&g, &plane, &p, &op, 1e-12))?;
    let worst = [
        r.i1_paper[0],
        r.i1_cc[0],
        r.i2_paper[0],
        r.i2_cc[0],
        r.hi_norm,
    ]
    .iter()
    .chain(&hi)
    .fold(0.0f64, |m, v| m.max(v.abs()));
    within("plane-wave corrections", worst, 1e-8)
}

fn diagnostics_round_trip() -> Outcome {
    let g = ok(make_grid(1, 64, 4.0))?;
    let st = random_state(&g, 9, 2.0 * PI * 3.0 / 4.0);
    let back = ok(decompose(&g, &reconstruct(&g, &st), 1e-10))?;
    if (back.winding[0] - st.winding[0]).abs() > 1e-12 {
        return Err(format!(
            "winding {} became {}",
            st.winding[0], back.winding[0]
        ));
    }
    within("density round trip", sup(&back.rho, &st.rho), 1e-12)
}

pub fn checks(suite: &str) -> Option<Vec<Check>> {
    let c = |name, run| Check { name, run };
    Some(match suite {
        "grid" => vec![
            c("parseval", grid_parseval as fn() -> Outcome),
            c("spectral_derivative", grid_derivatives),
            c("mixed_derivatives_commute", grid_commutation),
            c("dealiased_product_rule", grid_product_rule),
            c("gaussian_integral", grid_gaussian_integral),
        ],
        "gfunc" => vec![
            c("coefficient_table", gfunc_coefficients as fn() -> Outcome),
            c("trig_identity_sweep", gfunc_trig_sweep),
            c("truncated_series", gfunc_series),
            c("domain_policies", gfunc_policies),
        ],
        "recurrence" => vec![
            c("direct_laplacians", recurrence_direct as fn() -> Outcome),
            c("b1_divergence_form", recurrence_b1),
            c("second_order_closed_forms", recurrence_second_order),
            c("alpha_divergence", recurrence_alpha),
        ],
        "dynamics" => vec![
            c("plane_wave_exact", dynamics_plane_wave as fn() -> Outcome),
            c("mass_conservation", dynamics_conservation),
            c("rk4_order", dynamics_rk4_order),
            c("splitstep_spreading", dynamics_splitstep_spreading),
            c("linear_limit", dynamics_linear_limit),
        ],
        "diagnostics" => vec![
            c("boost_momentum", diagnostics_boost as fn() -> Outcome),
            c("plane_wave_corrections", diagnostics_zero_cases),
            c("decompose_round_trip", diagnostics_round_trip),
        ],
        _ => return None,
    })
}

/// Runs one suite, or all of them for "all".
pub fn run_suite(name: &str) -> Option<Vec<CheckResult>> {
    let names: Vec<&'static str> = if name == "all" {
        SUITES.to_vec()
    } else {
        vec![*SUITES.iter().find(|s| **s == name)?]
    };
    let mut out = Vec::new();
    for suite in names {
        for check in checks(suite)? {
            let (passed, detail) = match (check.run)() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            out.push(CheckResult {
                suite,
                name: check.name,
                passed,
                detail,
            });
        }
    }
    Some(out)
}
