//! File output: atomic writes, JSON reports, and plot-ready CSV/OBJ.
//!
//! Every float in CSV and OBJ output is printed with 17 significant digits
//! (`{:.16e}`), which round-trips an `f64` exactly. JSON goes through
//! `serde_json`, whose shortest round-trip representation has the same
//! property.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::curve::CurveSpec;
use crate::energy::{EnergyValue, NodeRow};
use crate::error::{Result, RibbonError};
use crate::gamma_lab::{ConvergenceReport, LscReport, SolveOutcome, SweepReport};
use crate::solver::HistoryEntry;
use crate::surface::RibbonMesh;

fn io_err(path: &Path, source: std::io::Error) -> RibbonError {
    RibbonError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// 17 significant digits; non-finite values print as `inf`, `-inf`, `nan`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| RibbonError::domain(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp: PathBuf = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_err(path, e)
    })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

pub fn read_curve(path: &Path) -> Result<CurveSpec> {
    CurveSpec::from_json(&read_to_string(path)?)
}

pub fn write_curve(path: &Path, curve: &CurveSpec) -> Result<()> {
    let mut s = curve.to_json()?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

/// `t,s,kappa,tau,eta,eta_prime,sadowsky_integrand,wunderlich_integrand`
pub fn nodes_csv(rows: &[NodeRow]) -> String {
    csv(
        "t,s,kappa,tau,eta,eta_prime,sadowsky_integrand,wunderlich_integrand",
        rows.iter().map(|r| {
            [
                r.t,
                r.s,
                r.kappa,
                r.tau,
                r.eta,
                r.eta_prime,
                r.sadowsky_integrand,
                r.wunderlich_integrand,
            ]
            .map(fmt_f64)
            .to_vec()
        }),
    )
}

/// Wavefront OBJ with 1-based face indices.
pub fn mesh_obj(mesh: &RibbonMesh) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", fmt_f64(v.x), fmt_f64(v.y), fmt_f64(v.z));
    }
    for f in &mesh.faces {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}

/// Sidecar to [`mesh_obj`]: `vertex,kappa1` with 0-based vertex indices.
pub fn kappa1_csv(mesh: &RibbonMesh) -> String {
    csv(
        "vertex,kappa1",
        mesh.per_vertex_kappa1
            .iter()
            .enumerate()
            .map(|(i, k)| vec![i.to_string(), fmt_f64(*k)]),
    )
}

pub fn history_csv(history: &[HistoryEntry]) -> String {
    csv(
        "iteration,objective,grad_norm",
        history
            .iter()
            .map(|h| vec![h.iteration.to_string(), fmt_f64(h.energy), fmt_f64(h.grad_norm)]),
    )
}

fn energy_cell(e: &EnergyValue) -> String {
    fmt_f64(e.value())
}

/// One row per `ε`: energy (`inf` past blowup), gap, blowup measure.
pub fn sweep_csv(r: &SweepReport) -> String {
    csv(
        "eps,F_eps,F_limit,gap,blowup_measure",
        r.eps_grid.iter().zip(&r.f_eps).zip(&r.gaps).map(|((e, f), g)| {
            vec![
                fmt_f64(*e),
                energy_cell(f),
                fmt_f64(r.f_limit),
                fmt_opt(*g),
                fmt_opt(f.blowup().map(|b| b.measure_estimate)),
            ]
        }),
    )
}

/// One row per `ε`, then a final row with empty `eps` for the Sadowsky solve.
pub fn convergence_csv(r: &ConvergenceReport) -> String {
    let row = |eps: Option<f64>, o: &SolveOutcome, gap: Option<f64>| match o {
        SolveOutcome::Solved {
            objective,
            energy,
            iterations,
            grad_norm,
            ..
        } => vec![
            fmt_opt(eps),
            fmt_f64(*objective),
            energy_cell(energy),
            fmt_opt(gap),
            iterations.to_string(),
            fmt_f64(*grad_norm),
            "solved".into(),
        ],
        SolveOutcome::Failed { error_kind, .. } => {
            let mut v = vec![fmt_opt(eps)];
            v.extend(std::iter::repeat_n(String::new(), 5));
            v.push(error_kind.clone());
            v
        }
    };
    let mut rows: Vec<Vec<String>> = r
        .eps_grid
        .iter()
        .zip(&r.minima)
        .zip(&r.gaps)
        .map(|((e, o), g)| row(Some(*e), o, *g))
        .collect();
    rows.push(row(None, &r.sadowsky, Some(0.0)));
    csv("eps,objective,energy,gap,iterations,grad_norm,status", rows)
}

pub fn lsc_csv(r: &LscReport) -> String {
    csv(
        "index,frequency,amplitude,energy,excess",
        r.members.iter().map(|m| {
            vec![
                m.index.to_string(),
                m.frequency.to_string(),
                fmt_f64(m.amplitude),
                fmt_f64(m.energy),
                fmt_f64(m.energy - r.base_energy),
            ]
        }),
    )
}
