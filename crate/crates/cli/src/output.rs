//! Snapshots, CSV series and checksums.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rse_core::diagnostics::DiagnosticsRecord;
use rse_core::dynamics::Mode;
use rse_core::{Grid, HydroState, Policy};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{GridSpec, PhysicsSpec};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub grid: GridSpec,
    pub physics: PhysicsSpec,
    pub g_policy: Policy,
    pub mode: Mode,
    pub t: f64,
    pub winding: Vec<f64>,
    pub rho: Vec<f64>,
    pub s_per: Vec<f64>,
}

impl Snapshot {
    pub fn new(
        grid: &Grid,
        physics: &PhysicsSpec,
        g_policy: Policy,
        mode: Mode,
        state: &HydroState,
    ) -> Self {
        Self {
            grid: GridSpec::of(grid),
            physics: physics.clone(),
            g_policy,
            mode,
            t: state.t,
            winding: state.winding.clone(),
            rho: state.rho.clone(),
            s_per: state.s_per.clone(),
        }
    }

    pub fn state(&self) -> HydroState {
        HydroState {
            rho: self.rho.clone(),
            winding: self.winding.clone(),
            s_per: self.s_per.clone(),
            t: self.t,
        }
    }

    /// serde_json prints the shortest decimal that parses back to the same
    /// f64, so a written snapshot reloads bit for bit.
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).expect("snapshot serializes");
        fs::write(path, text).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: bad snapshot: {e}", path.display())))
    }
}

fn axis_names(dim: usize) -> &'static [&'static str] {
    if dim == 1 {
        &["x"]
    } else {
        &["x", "y"]
    }
}

pub fn csv_header(dim: usize) -> String {
    let names = axis_names(dim);
    let mut cols = vec!["t".to_string(), "norm".to_string()];
    cols.extend(names.iter().map(|a| format!("mean_{a}")));
    if dim == 1 {
        cols.push("mean_p".into());
    } else {
        cols.extend(names.iter().map(|a| format!("mean_p{a}")));
    }
    cols.push("energy".into());
    for base in ["I1_paper", "I1_cc", "I2_paper", "I2_cc"] {
        if dim == 1 {
            cols.push(base.into());
        } else {
            cols.extend(names.iter().map(|a| format!("{base}_{a}")));
        }
    }
    cols.push("hi_norm".into());
    cols.join(",")
}

fn push(line: &mut String, v: f64) {
    if !line.is_empty() {
        line.push(',');
    }
    // 17 significant digits.
    write!(line, "{v:.16e}").expect("writing to a string");
}

pub fn csv_row(r: &DiagnosticsRecord) -> String {
    let mut line = String::new();
    push(&mut line, r.t);
    push(&mut line, r.norm);
    for v in r.mean_x.iter().chain(&r.mean_p) {
        push(&mut line, *v);
    }
    push(&mut line, r.energy);
    for v in r
        .i1_paper
        .iter()
        .chain(&r.i1_cc)
        .chain(&r.i2_paper)
        .chain(&r.i2_cc)
    {
        push(&mut line, *v);
    }
    push(&mut line, r.hi_norm);
    line
}

pub fn csv_table(dim: usize, records: &[DiagnosticsRecord]) -> String {
    let mut out = csv_header(dim);
    out.push('\n');
    for r in records {
        out.push_str(&csv_row(r));
        out.push('\n');
    }
    out
}

pub fn sha256_f64(values: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_le_bytes());
    }
    hex(&h.finalize())
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        write!(s, "{b:02x}").expect("writing to a string");
        s
    })
}
