//! The `ribbonlim` command line.
//!
//! Every subcommand reads its options from flags and, optionally, from a
//! TOML or JSON file given with `--config`. Flags win over file values and
//! unknown file keys are rejected. The resolved [`RunConfig`] is echoed to
//! `run_config.json` in the output directory before any work starts.
//!
//! Exit status: 0 on success, 1 when the mathematics fails (inflection
//! points, edges of regression, stalled minimization), 2 for usage and
//! input errors. Failures also leave `error.json` with
//! `{error_kind, location, message}` in the output directory.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curve::{CurveSpec, MIN_COEFFICIENTS};
use crate::energy::{
    gamma_gap_prediction, node_dump, regularized_sadowsky_energy, sadowsky_energy, wunderlich_energy,
    EnergyReport,
};
use crate::error::RibbonError;
use crate::gamma_lab::{
    eps_sweep, inflection_test_curve, lsc_probe, minimizer_convergence, InflectionKind, PerturbationKind,
    ProbeConfig, ProbeSequence,
};
use crate::io;
use crate::quadrature::QuadratureScheme;
use crate::shapes::{self, TorsionModulated};
use crate::solver::{minimize, EnergyKind, ObjectiveConfig, SolveOptions};
use crate::surface::{build_mesh, surface_energy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MATH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ribbonlim", version, about = "Sadowsky and Wunderlich ribbon energies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Sadowsky and Wunderlich energies of a curve, plus a per-node CSV.
    Eval(Options),
    /// Ribbon mesh (OBJ + kappa1 CSV) and the 2D energy integral.
    Surface(Options),
    /// Minimize an energy over curves with the start's length and end data.
    Minimize(Options),
    /// F_eps on a decreasing eps grid with the fitted rate of F_eps - F.
    GammaSweep(Options),
    /// Minima of F_eps by continuation in eps, then the Sadowsky minimum.
    MinimizerConvergence(Options),
    /// Energies along an oscillating sequence converging to a base curve.
    LscProbe(Options),
    /// Write one of the built-in curves as curve JSON.
    MakeCurve(Options),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Eval,
    Surface,
    Minimize,
    GammaSweep,
    MinimizerConvergence,
    LscProbe,
    MakeCurve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EnergyName {
    Sadowsky,
    Wunderlich,
    Regularized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ShapeKind {
    Circle,
    Ellipse,
    Segment,
    Helix,
    TorsionModulated,
    EtaSinusoid,
    Random,
    SingleZero,
    MobiusLike,
}

impl ShapeKind {
    /// Parameter names and defaults.
    pub fn defaults(self) -> &'static [(&'static str, f64)] {
        match self {
            ShapeKind::Circle => &[("length", 1.0)],
            ShapeKind::Ellipse => &[("axis_ratio", 1.5)],
            ShapeKind::Segment => &[("length", 1.0)],
            ShapeKind::Helix => &[("a", 0.5), ("b", 0.5), ("length", 1.0)],
            ShapeKind::TorsionModulated => &[
                ("radius", 0.12),
                ("pitch", 0.06),
                ("turns", 1.0),
                ("modulation", 0.01),
                ("modulation_waves", 1.0),
            ],
            ShapeKind::EtaSinusoid => &[("kappa0", 6.0), ("eta0", 0.3), ("amplitude", 0.2)],
            ShapeKind::Random => &[],
            ShapeKind::SingleZero => &[("k", 1.0), ("delta", 0.5), ("t_star", 0.5)],
            ShapeKind::MobiusLike => &[("beta", 0.0), ("gamma", 0.3)],
        }
    }
}

/// Flags shared by all subcommands. The same keys, in snake_case, are
/// accepted in a `--config` file.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// TOML or JSON file with default values for the flags below.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Input curve JSON.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Output directory [default: out].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Aspect ratio of the ribbon.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Strictly decreasing comma-separated eps values.
    #[arg(long, value_delimiter = ',')]
    pub eps_grid: Option<Vec<f64>>,
    /// Curvature floor of the regularized energy.
    #[arg(long)]
    pub kappa_m: Option<f64>,
    /// Energy to minimize [default: inferred from --eps / --kappa-m].
    #[arg(long, value_enum)]
    pub energy: Option<EnergyName>,
    #[arg(long)]
    pub quad_panels: Option<usize>,
    /// Gauss-Legendre nodes per panel.
    #[arg(long)]
    pub quad_order: Option<usize>,
    #[arg(long)]
    pub tol_grad: Option<f64>,
    #[arg(long)]
    pub tol_rel_energy: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub penalty_speed: Option<f64>,
    #[arg(long)]
    pub penalty_length: Option<f64>,
    /// Seed for randomized curves [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Mesh samples along the ribbon [default: 128].
    #[arg(long)]
    pub mesh_ns: Option<usize>,
    /// Mesh samples across the ribbon [default: 9].
    #[arg(long)]
    pub mesh_nv: Option<usize>,
    #[arg(long, value_enum)]
    pub perturbation: Option<PerturbationName>,
    /// Base amplitude A; member n has amplitude A / f_n^3.
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub frequencies: Option<Vec<u32>>,
    #[arg(long, value_enum)]
    pub shape: Option<ShapeKind>,
    /// Shape parameter as KEY=VALUE; repeatable.
    #[arg(long = "param")]
    pub params: Option<Vec<String>>,
    /// Number of coefficients for fitted shapes [default: 32].
    #[arg(long)]
    pub n_coeff: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum PerturbationName {
    TorsionOscillation,
    CoefficientOscillation,
}

impl From<PerturbationName> for PerturbationKind {
    fn from(p: PerturbationName) -> Self {
        match p {
            PerturbationName::TorsionOscillation => PerturbationKind::TorsionOscillation,
            PerturbationName::CoefficientOscillation => PerturbationKind::CoefficientOscillation,
        }
    }
}

macro_rules! overlay {
    ($hi:expr, $lo:expr; $($f:ident),*) => {
        Options { config: $hi.config.clone(), $($f: $hi.$f.clone().or($lo.$f.clone()),)* }
    };
}

impl Options {
    /// Flag values where given, file values otherwise.
    pub fn over(&self, file: &Options) -> Options {
        overlay!(self, file; curve, out, eps, eps_grid, kappa_m, energy, quad_panels, quad_order,
            tol_grad, tol_rel_energy, max_iter, penalty_speed, penalty_length, seed, mesh_ns,
            mesh_nv, perturbation, amplitude, frequencies, shape, params, n_coeff)
    }

    fn set_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        macro_rules! chk {
            ($($f:ident),*) => { $( if self.$f.is_some() { keys.push(stringify!($f)); } )* };
        }
        chk!(curve, eps, eps_grid, kappa_m, energy, tol_grad, tol_rel_energy, max_iter, penalty_speed,
            penalty_length, mesh_ns, mesh_nv, perturbation, amplitude, frequencies, shape, params, n_coeff);
        keys
    }
}

/// Shape selection for `make-curve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeConfig {
    pub kind: ShapeKind,
    pub params: BTreeMap<String, f64>,
    pub n_coeff: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSettings {
    pub perturbation: PerturbationKind,
    pub amplitude: f64,
    pub frequencies: Vec<u32>,
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub curve: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub eps: Option<f64>,
    pub eps_grid: Option<Vec<f64>>,
    pub kappa_m: Option<f64>,
    pub quad: QuadratureScheme,
    pub objective: Option<ObjectiveConfig>,
    pub solve: Option<SolveOptions>,
    pub seed: u64,
    pub mesh: Option<(usize, usize)>,
    pub probe: Option<ProbeSettings>,
    pub shape: Option<ShapeConfig>,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad, missing, conflicting or out-of-range option.
    Usage { key: String, message: String },
    Run(RibbonError),
}

impl From<RibbonError> for CliError {
    fn from(e: RibbonError) -> Self {
        CliError::Run(e)
    }
}

impl CliError {
    fn usage(key: &str, message: impl Into<String>) -> Self {
        CliError::Usage {
            key: key.to_string(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Run(e) if e.is_mathematical() => EXIT_MATH,
            _ => EXIT_USAGE,
        }
    }

    pub fn kind(&self) -> &str {
        match self {
            CliError::Usage { .. } => "Usage",
            CliError::Run(e) => e.kind(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (location, message) = match self {
            CliError::Usage { key, message } => (Some(serde_json::json!({ "key": key })), message.clone()),
            CliError::Run(e) => (e.location(), e.to_string()),
        };
        serde_json::json!({
            "error_kind": self.kind(),
            "location": location,
            "message": message,
        })
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage { key, message } => write!(f, "usage error ({key}): {message}"),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn load_file(path: &Path) -> CliResult<Options> {
    let text = io::read_to_string(path)?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(&text).map_err(|e| CliError::usage("config", format!("{}: {e}", path.display())))
    } else {
        toml::from_str(&text).map_err(|e| CliError::usage("config", format!("{}: {e}", path.display())))
    }
}

fn keys_for(cmd: Command) -> &'static [&'static str] {
    match cmd {
        Command::Eval => &["curve", "eps", "kappa_m"],
        Command::Surface => &["curve", "eps", "mesh_ns", "mesh_nv"],
        Command::Minimize => &[
            "curve",
            "energy",
            "eps",
            "kappa_m",
            "tol_grad",
            "tol_rel_energy",
            "max_iter",
            "penalty_speed",
            "penalty_length",
        ],
        Command::GammaSweep => &["curve", "eps_grid"],
        Command::MinimizerConvergence => &[
            "curve",
            "eps_grid",
            "tol_grad",
            "tol_rel_energy",
            "max_iter",
            "penalty_speed",
            "penalty_length",
        ],
        Command::LscProbe => &["curve", "kappa_m", "perturbation", "amplitude", "frequencies"],
        Command::MakeCurve => &["shape", "params", "n_coeff"],
    }
}

fn positive(key: &str, x: f64) -> CliResult<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(CliError::usage(key, format!("must be positive and finite, got {x}")))
    }
}

fn nonnegative(key: &str, x: f64) -> CliResult<f64> {
    if x.is_finite() && x >= 0.0 {
        Ok(x)
    } else {
        Err(CliError::usage(key, format!("must be finite and >= 0, got {x}")))
    }
}

fn in_range(key: &str, x: usize, lo: usize, hi: usize) -> CliResult<usize> {
    if (lo..=hi).contains(&x) {
        Ok(x)
    } else {
        Err(CliError::usage(key, format!("must lie in [{lo}, {hi}], got {x}")))
    }
}

fn require<T: Clone>(key: &str, v: &Option<T>) -> CliResult<T> {
    v.clone()
        .ok_or_else(|| CliError::usage(key, format!("--{} is required", key.replace('_', "-"))))
}

fn parse_params(kind: ShapeKind, raw: &[String]) -> CliResult<BTreeMap<String, f64>> {
    let mut out: BTreeMap<String, f64> = kind.defaults().iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for item in raw {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::usage("params", format!("expected KEY=VALUE, got {item:?}")))?;
        let k = k.trim();
        if !out.contains_key(k) {
            let known: Vec<&str> = kind.defaults().iter().map(|(k, _)| *k).collect();
            return Err(CliError::usage(
                "params",
                format!("unknown parameter {k:?} for this shape; known: {known:?}"),
            ));
        }
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| CliError::usage("params", format!("{k}: not a number: {v:?}")))?;
        if !v.is_finite() {
            return Err(CliError::usage("params", format!("{k} must be finite")));
        }
        out.insert(k.to_string(), v);
    }
    Ok(out)
}

fn default_grid(cmd: Command) -> Vec<f64> {
    match cmd {
        Command::MinimizerConvergence => vec![0.02, 0.01, 0.005, 0.0025],
        _ => vec![0.04, 0.03, 0.02, 0.015, 0.01, 0.0075, 0.005],
    }
}

/// Resolves flags over the optional config file and validates every value.
pub fn resolve(command: Command, flags: &Options) -> CliResult<RunConfig> {
    let file = match &flags.config {
        Some(p) => {
            if !p.exists() {
                return Err(CliError::usage("config", format!("config file not found: {}", p.display())));
            }
            load_file(p)?
        }
        None => Options::default(),
    };
    let o = flags.over(&file);
    let allowed = keys_for(command);
    if let Some(k) = o.set_keys().into_iter().find(|k| !allowed.contains(k)) {
        return Err(CliError::usage(k, format!("option does not apply to this command; allowed: {allowed:?}")));
    }

    let curve = if command == Command::MakeCurve {
        None
    } else {
        let p = require("curve", &o.curve)?;
        if !p.is_file() {
            return Err(CliError::usage("curve", format!("curve file not found: {}", p.display())));
        }
        Some(p)
    };
    let eps = o.eps.map(|e| positive("eps", e)).transpose()?;
    let kappa_m = o.kappa_m.map(|k| positive("kappa_m", k)).transpose()?;
    let eps_grid = match command {
        Command::GammaSweep | Command::MinimizerConvergence => {
            let g = o.eps_grid.clone().unwrap_or_else(|| default_grid(command));
            if g.is_empty() {
                return Err(CliError::usage("eps_grid", "must not be empty"));
            }
            for e in &g {
                positive("eps_grid", *e)?;
            }
            if g.windows(2).any(|w| !(w[0] > w[1])) {
                return Err(CliError::usage("eps_grid", "must be strictly decreasing"));
            }
            Some(g)
        }
        _ => None,
    };

    let solver_cmd = matches!(command, Command::Minimize | Command::MinimizerConvergence);
    let default_quad = if solver_cmd {
        ObjectiveConfig::new(EnergyKind::Sadowsky).quad
    } else {
        QuadratureScheme::default()
    };
    let panels = in_range("quad_panels", o.quad_panels.unwrap_or(default_quad.panels), 1, 65536)?;
    let order = in_range("quad_order", o.quad_order.unwrap_or(default_quad.nodes_per_panel), 1, 64)?;
    let quad = QuadratureScheme::new(panels, order).map_err(|e| CliError::usage("quad_order", e.to_string()))?;

    let (objective, solve) = if solver_cmd {
        let energy = match (o.energy, eps, kappa_m) {
            (_, Some(_), Some(_)) => return Err(CliError::usage("kappa_m", "conflicts with --eps")),
            (None | Some(EnergyName::Sadowsky), None, None) => EnergyKind::Sadowsky,
            (None | Some(EnergyName::Wunderlich), Some(e), None) => EnergyKind::Wunderlich { eps: e },
            (None | Some(EnergyName::Regularized), None, Some(k)) => EnergyKind::Regularized { kappa_m: k },
            (Some(EnergyName::Wunderlich), None, _) => {
                return Err(CliError::usage("eps", "--energy wunderlich needs --eps"))
            }
            (Some(EnergyName::Regularized), _, None) => {
                return Err(CliError::usage("kappa_m", "--energy regularized needs --kappa-m"))
            }
            (Some(_), Some(_), None) => return Err(CliError::usage("eps", "conflicts with --energy")),
            (Some(_), None, Some(_)) => return Err(CliError::usage("kappa_m", "conflicts with --energy")),
        };
        let mut cfg = ObjectiveConfig::new(energy).with_quad(quad);
        if let Some(p) = o.penalty_speed {
            cfg.penalty_speed = nonnegative("penalty_speed", p)?;
        }
        if let Some(p) = o.penalty_length {
            cfg.penalty_length = nonnegative("penalty_length", p)?;
        }
        let d = SolveOptions::default();
        let solve = SolveOptions {
            max_iter: in_range("max_iter", o.max_iter.unwrap_or(d.max_iter), 1, 1_000_000)?,
            tol_grad: positive("tol_grad", o.tol_grad.unwrap_or(d.tol_grad))?,
            tol_rel_energy: positive("tol_rel_energy", o.tol_rel_energy.unwrap_or(d.tol_rel_energy))?,
        };
        (Some(cfg), Some(solve))
    } else {
        (None, None)
    };

    let mesh = if command == Command::Surface {
        require("eps", &eps)?;
        Some((
            in_range("mesh_ns", o.mesh_ns.unwrap_or(128), 16, 1 << 16)?,
            in_range("mesh_nv", o.mesh_nv.unwrap_or(9), 3, 1 << 12)?,
        ))
    } else {
        None
    };

    let probe = if command == Command::LscProbe {
        let frequencies = o.frequencies.clone().unwrap_or_else(|| vec![2, 3, 5, 8, 13, 21]);
        if frequencies.len() < 4 || frequencies[0] == 0 || frequencies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::usage(
                "frequencies",
                "need at least 4 positive, strictly increasing frequencies",
            ));
        }
        Some(ProbeSettings {
            perturbation: o.perturbation.unwrap_or(PerturbationName::TorsionOscillation).into(),
            amplitude: nonnegative("amplitude", o.amplitude.unwrap_or(0.05))?,
            frequencies,
        })
    } else {
        None
    };

    let shape = if command == Command::MakeCurve {
        let kind = require("shape", &o.shape)?;
        Some(ShapeConfig {
            kind,
            params: parse_params(kind, o.params.as_deref().unwrap_or(&[]))?,
            n_coeff: in_range("n_coeff", o.n_coeff.unwrap_or(32), MIN_COEFFICIENTS, 512)?,
        })
    } else {
        None
    };

    Ok(RunConfig {
        command,
        curve,
        out_dir: o.out.clone().unwrap_or_else(|| PathBuf::from("out")),
        eps,
        eps_grid,
        kappa_m,
        quad,
        objective,
        solve,
        seed: o.seed.unwrap_or(0),
        mesh,
        probe,
        shape,
    })
}

/// Builds the curve described by a [`ShapeConfig`].
pub fn make_shape(shape: &ShapeConfig, seed: u64) -> crate::Result<CurveSpec> {
    let p = |k: &str| shape.params[k];
    let n = shape.n_coeff;
    match shape.kind {
        ShapeKind::Circle => shapes::circle(p("length") / (2.0 * std::f64::consts::PI)),
        ShapeKind::Ellipse => shapes::ellipse(p("axis_ratio"), 1.0),
        ShapeKind::Segment => shapes::segment(nalgebra::Vector3::zeros(), nalgebra::Vector3::x() * p("length")),
        ShapeKind::Helix => shapes::helix_unit_speed(p("a"), p("b"), p("length"), n),
        ShapeKind::TorsionModulated => shapes::torsion_modulated(
            &TorsionModulated {
                radius: p("radius"),
                pitch: p("pitch"),
                turns: p("turns"),
                modulation: p("modulation"),
                modulation_waves: p("modulation_waves"),
            },
            n,
        ),
        ShapeKind::EtaSinusoid => shapes::eta_sinusoid(p("kappa0"), p("eta0"), p("amplitude"), n),
        ShapeKind::Random => shapes::random_admissible(&mut ChaCha8Rng::seed_from_u64(seed), n),
        ShapeKind::SingleZero => inflection_test_curve(InflectionKind::SingleZero {
            k: p("k"),
            delta: p("delta"),
            t_star: p("t_star"),
        })
        .map(|c| c.curve),
        ShapeKind::MobiusLike => inflection_test_curve(InflectionKind::MobiusLike {
            beta: p("beta"),
            gamma: p("gamma"),
        })
        .map(|c| c.curve),
    }
}

#[derive(Serialize)]
struct EvalOutput {
    length: f64,
    sadowsky: EnergyReport,
    wunderlich: Option<WunderlichOutput>,
    regularized: Option<RegularizedOutput>,
    gap_prediction: f64,
}

#[derive(Serialize)]
struct WunderlichOutput {
    eps: f64,
    #[serde(flatten)]
    report: EnergyReport,
}

#[derive(Serialize)]
struct RegularizedOutput {
    kappa_m: f64,
    #[serde(flatten)]
    report: EnergyReport,
}

#[derive(Serialize)]
struct SurfaceOutput {
    eps: f64,
    surface_energy: EnergyReport,
    wunderlich_energy: EnergyReport,
    max_angle_defect: f64,
    vertices: usize,
    faces: usize,
}

/// Width rule used by `surface`.
const WIDTH_QUAD: (usize, usize) = (2, 16);

/// Executes a resolved configuration, writing its outputs.
pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let out = &cfg.out_dir;
    let path = |name: &str| out.join(name);
    let quad = cfg.quad;
    let load = || -> CliResult<CurveSpec> { Ok(io::read_curve(cfg.curve.as_deref().expect("resolved"))?) };
    match cfg.command {
        Command::Eval => {
            let c = load()?;
            let f = sadowsky_energy(&c, &quad)?;
            let w = cfg
                .eps
                .map(|eps| {
                    wunderlich_energy(&c, eps, &quad).map(|e| WunderlichOutput {
                        eps,
                        report: EnergyReport { energy: e, quad },
                    })
                })
                .transpose()?;
            let r = cfg
                .kappa_m
                .map(|kappa_m| {
                    regularized_sadowsky_energy(&c, kappa_m, &quad).map(|e| RegularizedOutput {
                        kappa_m,
                        report: EnergyReport { energy: e, quad },
                    })
                })
                .transpose()?;
            let report = EvalOutput {
                length: c.length(),
                sadowsky: EnergyReport { energy: f, quad },
                wunderlich: w,
                regularized: r,
                gap_prediction: gamma_gap_prediction(&c, &quad)?,
            };
            io::write_json(&path("energy.json"), &report)?;
            let rows = node_dump(&c, cfg.eps.unwrap_or(0.0), &quad)?;
            io::write_atomic(&path("nodes.csv"), io::nodes_csv(&rows).as_bytes())?;
        }
        Command::Surface => {
            let c = load()?;
            let eps = cfg.eps.expect("resolved");
            let (ns, nv) = cfg.mesh.expect("resolved");
            let mesh = build_mesh(&c, eps, ns, nv)?;
            let wq = QuadratureScheme::new(WIDTH_QUAD.0, WIDTH_QUAD.1)?;
            let s = surface_energy(&c, eps, &(quad, wq))?;
            let w = wunderlich_energy(&c, eps, &quad)?;
            io::write_atomic(&path("ribbon.obj"), io::mesh_obj(&mesh).as_bytes())?;
            io::write_atomic(&path("kappa1.csv"), io::kappa1_csv(&mesh).as_bytes())?;
            io::write_json(
                &path("surface.json"),
                &SurfaceOutput {
                    eps,
                    surface_energy: EnergyReport { energy: s, quad },
                    wunderlich_energy: EnergyReport { energy: w, quad },
                    max_angle_defect: mesh.max_angle_defect(),
                    vertices: mesh.vertices.len(),
                    faces: mesh.faces.len(),
                },
            )?;
        }
        Command::Minimize => {
            let c = load()?;
            let obj = cfg.objective.expect("resolved");
            match minimize(&c, &obj, &cfg.solve.expect("resolved")) {
                Ok((best, report)) => {
                    io::write_curve(&path("curve_min.json"), &best)?;
                    io::write_json(&path("solve_report.json"), &report)?;
                    io::write_atomic(&path("history.csv"), io::history_csv(&report.history).as_bytes())?;
                }
                Err(RibbonError::NoDescent { attempts, report }) => {
                    io::write_json(&path("solve_report.json"), &report)?;
                    io::write_atomic(&path("history.csv"), io::history_csv(&report.history).as_bytes())?;
                    return Err(RibbonError::NoDescent { attempts, report }.into());
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::GammaSweep => {
            let c = load()?;
            let r = eps_sweep(&c, cfg.eps_grid.as_deref().expect("resolved"), &quad)?;
            io::write_json(&path("sweep_report.json"), &r)?;
            io::write_atomic(&path("sweep.csv"), io::sweep_csv(&r).as_bytes())?;
        }
        Command::MinimizerConvergence => {
            let c = load()?;
            let r = minimizer_convergence(
                &c,
                cfg.eps_grid.as_deref().expect("resolved"),
                &cfg.objective.expect("resolved"),
                &cfg.solve.expect("resolved"),
            )?;
            io::write_json(&path("convergence_report.json"), &r)?;
            io::write_atomic(&path("convergence.csv"), io::convergence_csv(&r).as_bytes())?;
        }
        Command::LscProbe => {
            let c = load()?;
            let p = cfg.probe.clone().expect("resolved");
            let seq = ProbeSequence::cubic_decay(c, p.perturbation, p.amplitude, p.frequencies)?;
            let r = lsc_probe(
                &seq,
                &ProbeConfig {
                    kappa_m: cfg.kappa_m,
                    quad,
                },
            )?;
            io::write_json(&path("lsc_report.json"), &r)?;
            io::write_atomic(&path("lsc.csv"), io::lsc_csv(&r).as_bytes())?;
        }
        Command::MakeCurve => {
            let c = make_shape(cfg.shape.as_ref().expect("resolved"), cfg.seed)?;
            io::write_curve(&path("curve.json"), &c)?;
        }
    }
    Ok(())
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("RIBBONLIM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::usage("RIBBONLIM_THREADS", format!("expected a positive integer, got {v:?}")))?;
    // A second call in the same process finds the pool already built.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn report_error(out: Option<&Path>, err: &CliError) {
    eprintln!("ribbonlim: {err}");
    if let Some(dir) = out {
        if std::fs::create_dir_all(dir).is_ok() {
            let _ = io::write_json(&dir.join("error.json"), &err.to_json());
        }
    }
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (command, flags) = match cli.command {
        CommandArgs::Eval(o) => (Command::Eval, o),
        CommandArgs::Surface(o) => (Command::Surface, o),
        CommandArgs::Minimize(o) => (Command::Minimize, o),
        CommandArgs::GammaSweep(o) => (Command::GammaSweep, o),
        CommandArgs::MinimizerConvergence(o) => (Command::MinimizerConvergence, o),
        CommandArgs::LscProbe(o) => (Command::LscProbe, o),
        CommandArgs::MakeCurve(o) => (Command::MakeCurve, o),
    };
    let fallback_out = flags.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    if let Err(e) = configure_threads() {
        report_error(Some(&fallback_out), &e);
        return e.exit_code();
    }
    let cfg = match resolve(command, &flags) {
        Ok(c) => c,
        Err(e) => {
            report_error(Some(&fallback_out), &e);
            return e.exit_code();
        }
    };
    let result = std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| {
            CliError::usage(
                "out",
                format!("cannot create output directory {}: {e}", cfg.out_dir.display()),
            )
        })
        .and_then(|_| {
            io::write_json(&cfg.out_dir.join("run_config.json"), &cfg)
                .map_err(|e| CliError::usage("out", format!("output directory not writable: {e}")))
        })
        .and_then(|_| run(&cfg));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            report_error(Some(&cfg.out_dir), &e);
            e.exit_code()
        }
    }
}
