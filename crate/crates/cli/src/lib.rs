//! Scenario files, runs, verification suites and tables for the `rse-lab`
//! command-line tool.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod suites;

use std::fmt::Write as _;

use rse_core::gfunc::g_coefficients;
use rse_core::Grid;

pub use config::{load_config, ScenarioConfig};
pub use error::{CliError, Result};

/// Largest order accepted by [`coeffs_csv`].
pub const MAX_COEFF_ORDER: usize = 64;

pub fn coeffs_csv(order: usize) -> Result<String> {
    if order > MAX_COEFF_ORDER {
        return Err(CliError::Config(format!(
            "coefficient order {order} exceeds {MAX_COEFF_ORDER}"
        )));
    }
    let mut out = String::from("n,c_n\n");
    for (n, c) in g_coefficients(order).iter().enumerate() {
        writeln!(out, "{n},{c}").expect("writing to a string");
    }
    Ok(out)
}

/// One row per grid mode in FFT order: wavevector, symbol, projected flag.
pub fn symbol_csv(cfg: &ScenarioConfig) -> Result<String> {
    let grid: Grid = cfg.grid.build()?;
    let op = cfg.operator(&grid)?;
    let dim = grid.dim();
    let mut out = if dim == 1 {
        String::from("k,g,projected\n")
    } else {
        String::from("kx,ky,g,projected\n")
    };
    let ks: Vec<Vec<f64>> = (0..dim).map(|a| grid.wavenumbers(a)).collect();
    for (j, g) in op.symbol().iter().enumerate() {
        for k in &ks {
            write!(out, "{},", k[j]).expect("writing to a string");
        }
        writeln!(out, "{g},{}", u8::from(op.is_projected(&grid, j))).expect("writing to a string");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_table() {
        let t = coeffs_csv(4).unwrap();
        assert_eq!(t, "n,c_n\n0,-0.5\n1,0\n2,-0.125\n3,0\n4,-0.0625\n");
        assert!(coeffs_csv(65).is_err());
        assert_eq!(coeffs_csv(64).unwrap().lines().count(), 66);
    }

    #[test]
    fn symbol_table() {
        let cfg = ScenarioConfig::from_json(
            r#"{
                "grid": {"dim": 1, "n_points": 64, "lengths": [6.283185307179586]},
                "physics": {"lambda_c": 0.01},
                "initial": {"type": "plane_wave", "winding": [1.0]},
                "integrator": {"dt": 0.0001, "t_final": 0.0}
            }"#,
        )
        .unwrap();
        let t = symbol_csv(&cfg).unwrap();
        let rows: Vec<&str> = t.lines().collect();
        assert_eq!(rows.len(), 65);
        assert_eq!(rows[1], "0,-0.5,0");

        let mut cfg = cfg;
        cfg.physics.lambda_c = 0.1;
        cfg.g_policy = rse_core::Policy::Projected;
        let t = symbol_csv(&cfg).unwrap();
        let flagged = t.lines().skip(1).filter(|l| l.ends_with(",1")).count();
        assert_eq!(flagged, 45);
        assert!(t
            .lines()
            .skip(1)
            .filter(|l| l.ends_with(",1"))
            .all(|l| l.contains(",0,1")));
    }
}
