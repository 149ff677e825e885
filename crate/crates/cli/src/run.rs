//! Executes a scenario and writes its outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rse_core::diagnostics::{separability_error, DiagnosticsRecord, SeparabilityReport, Subsystem};
use rse_core::dynamics::{evolve, evolve_splitstep_linear, Mode};
use rse_core::madelung::{decompose, reconstruct};
use rse_core::scenario::{axis_grid, InitialCondition};
use rse_core::{Grid, HydroState, Potential};
use serde::Serialize;

use crate::config::{RunMode, ScenarioConfig};
use crate::error::{CliError, Result};
use crate::output::{csv_table, sha256_bytes, sha256_f64, Snapshot};

pub fn version() -> String {
    match option_env!("RSE_LAB_GIT_REV") {
        Some(rev) => format!("rse-lab {} ({rev})", env!("CARGO_PKG_VERSION")),
        None => format!("rse-lab {}", env!("CARGO_PKG_VERSION")),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Checksums {
    pub rho: String,
    pub s_per: String,
    pub winding: String,
    pub series: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: ScenarioConfig,
    pub version: String,
    pub wall_time_s: f64,
    pub complete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub projected_modes: usize,
    pub steps_saved: usize,
    pub records: Vec<DiagnosticsRecord>,
    pub checksums: Checksums,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separability: Option<SeparabilityReport>,
    pub files: Vec<String>,
}

struct Evolved {
    states: Vec<HydroState>,
    records: Vec<DiagnosticsRecord>,
    error: Option<rse_core::Error>,
}

fn evolve_config(
    cfg: &ScenarioConfig,
    grid: &Grid,
    initial: &HydroState,
    warnings: &mut Vec<String>,
) -> Result<Evolved> {
    let params = cfg.physics.params();
    let gop = cfg.operator(grid)?;
    let ic = cfg.integrator.config();
    match cfg.mode {
        RunMode::Modified | RunMode::Linear => {
            let mode = if cfg.mode == RunMode::Modified {
                Mode::Modified
            } else {
                Mode::Linear
            };
            let tr = evolve(grid, initial, &params, &gop, mode, &ic)?;
            Ok(Evolved {
                states: tr.snapshots,
                records: tr.records,
                error: tr.error,
            })
        }
        RunMode::Splitstep => {
            let psi0 = reconstruct(grid, initial);
            let tr = evolve_splitstep_linear(grid, &psi0, initial.t, &params, &ic)?;
            let mut states = Vec::with_capacity(tr.snapshots.len());
            let mut lost = 0;
            for (psi, t) in tr.snapshots.iter().zip(&tr.times) {
                match decompose(grid, psi, 0.0) {
                    Ok(mut s) => {
                        s.t = *t;
                        states.push(s);
                    }
                    Err(_) => lost += 1,
                }
            }
            if lost > 0 {
                warnings.push(format!(
                    "{lost} split-step snapshots could not be split into density and phase"
                ));
            }
            Ok(Evolved {
                states,
                records: tr.records,
                error: tr.error,
            })
        }
    }
}

fn subsystem(
    ic: &InitialCondition,
    grid: &Grid,
    cfg: &ScenarioConfig,
    axis: usize,
) -> Result<Subsystem> {
    let g = axis_grid(grid, axis)?;
    let potential = match &cfg.physics.potential {
        Potential::None => Potential::None,
        Potential::Harmonic { omega } => Potential::Harmonic { omega: *omega },
        Potential::Tabulated { .. } => {
            return Err(CliError::Config(
                "tabulated potentials are not separable".into(),
            ))
        }
    };
    let state = ic.build(&g, &cfg.physics.params())?.state;
    Ok(Subsystem {
        grid: g,
        state,
        potential,
    })
}

fn separability(
    cfg: &ScenarioConfig,
    grid: &Grid,
    warnings: &mut Vec<String>,
) -> Option<SeparabilityReport> {
    let InitialCondition::Product { a, b } = &cfg.initial else {
        return None;
    };
    let mode = match cfg.mode {
        RunMode::Modified => Mode::Modified,
        RunMode::Linear => Mode::Linear,
        RunMode::Splitstep => return None,
    };
    let result = subsystem(a, grid, cfg, 0).and_then(|sa| {
        let sb = subsystem(b, grid, cfg, 1)?;
        Ok(separability_error(
            &sa,
            &sb,
            &cfg.physics.params(),
            cfg.g_policy,
            mode,
            &cfg.integrator.config(),
        )?)
    });
    match result {
        Ok(rep) => Some(rep),
        Err(e) => {
            warnings.push(format!("separability check skipped: {e}"));
            None
        }
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Runs `cfg` and writes series.csv, snapshots/ and report.json into `out`.
///
/// Input errors are returned as `Err`. A numeric failure during the run still
/// writes everything produced so far and comes back with `complete == false`.
pub fn run(cfg: &ScenarioConfig, out: &Path) -> Result<RunReport> {
    let start = Instant::now();
    cfg.validate()?;
    let grid = cfg.grid.build()?;
    let params = cfg.physics.params();
    let gop = cfg.operator(&grid)?;
    let prepared = cfg.initial.build(&grid, &params)?;
    let mut warnings = prepared.warnings.clone();
    if gop.projected_modes() > 0 {
        warnings.push(format!(
            "projected policy zeroed the G symbol on {} modes with lambda_c^2 k^2 >= 1",
            gop.projected_modes()
        ));
    }
    let floor = cfg.integrator.rho_floor;
    let clamped = prepared.state.rho.iter().filter(|&&r| r < floor).count();

    let evolved = evolve_config(cfg, &grid, &prepared.state, &mut warnings)?;
    let last = evolved.states.last().unwrap_or(&prepared.state);
    let clamped_end = last.rho.iter().filter(|&&r| r <= floor).count();
    if clamped > 0 || clamped_end > 0 {
        warnings.push(format!(
            "density held at rho_floor = {floor:e} on {} of {} points (initial {clamped})",
            clamped_end,
            grid.len()
        ));
    }
    let separability = separability(cfg, &grid, &mut warnings);

    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut files = Vec::new();
    let series = csv_table(grid.dim(), &evolved.records);
    write(&out.join("series.csv"), series.as_bytes())?;
    files.push("series.csv".to_string());
    if cfg.output.snapshots {
        let dir = out.join("snapshots");
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let mode = if cfg.mode == RunMode::Modified {
            Mode::Modified
        } else {
            Mode::Linear
        };
        for (i, st) in evolved.states.iter().enumerate() {
            let name = format!("snapshot_{i:05}.json");
            Snapshot::new(&grid, &cfg.physics, cfg.g_policy, mode, st).write(&dir.join(&name))?;
            files.push(format!("snapshots/{name}"));
        }
    }

    let report = RunReport {
        config: cfg.clone(),
        version: version(),
        wall_time_s: start.elapsed().as_secs_f64(),
        complete: evolved.error.is_none(),
        error: evolved.error.as_ref().map(|e| e.to_string()),
        projected_modes: gop.projected_modes(),
        steps_saved: evolved.records.len(),
        records: evolved.records,
        checksums: Checksums {
            rho: sha256_f64(&last.rho),
            s_per: sha256_f64(&last.s_per),
            winding: sha256_f64(&last.winding),
            series: sha256_bytes(series.as_bytes()),
        },
        warnings,
        separability,
        files,
    };
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    write(&out.join("report.json"), text.as_bytes())?;
    Ok(report)
}

/// Output directory for one of several configs run together.
pub fn batch_dir(base: &Path, cfg: &ScenarioConfig, index: usize) -> PathBuf {
    let name = cfg
        .name
        .clone()
        .unwrap_or_else(|| format!("run_{index:03}"));
    base.join(name)
}
