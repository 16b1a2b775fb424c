//! Numerical experiments on the `ε → 0` limit of the Wunderlich family.
//!
//! * [`eps_sweep`]: `F_ε` on a decreasing grid, monotonicity, and the
//!   log-log rate of `F_ε - F`.
//! * [`minimizer_convergence`]: minima `m(ε)` by continuation in `ε`,
//!   compared with the Sadowsky minimum.
//! * [`lsc_probe`]: energies along oscillating sequences that converge
//!   uniformly in `C²` but not in `C³`, and the resulting semicontinuity
//!   margin.
//! * [`inflection_test_curve`]: analytic curves with isolated curvature
//!   zeros.

use std::f64::consts::PI;

use nalgebra::{DVector, Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{BasisKind, CurveSpec, FrenetGeometry};
use crate::energy::{
    gamma_gap_prediction, regularized_sadowsky_energy_split, sadowsky_energy, wunderlich_energy, EnergyValue,
};
use crate::error::{Result, RibbonError};
use crate::quadrature::QuadratureScheme;
use crate::solver::{minimize, objective, EnergyKind, ObjectiveConfig, SolveOptions, SolveReport};

/// Largest `ε` used by the rate fit when enough small-`ε` entries exist.
pub const FIT_EPS_MAX: f64 = 0.04;
/// Minimum number of points in a rate fit.
pub const MIN_FIT_POINTS: usize = 4;
/// Gaps below this fraction of `F` count as zero.
const DEGENERATE_GAP: f64 = 1e-12;

fn check_decreasing_grid(eps_grid: &[f64]) -> Result<()> {
    if eps_grid.is_empty() {
        return Err(RibbonError::domain("eps grid is empty"));
    }
    if eps_grid.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(RibbonError::domain("eps grid entries must be positive and finite"));
    }
    if eps_grid.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(RibbonError::domain("eps grid must be strictly decreasing"));
    }
    Ok(())
}

/// Least-squares fit of `ln y = ln C + p ln x`; returns `(p, C)`.
pub fn loglog_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 2 || points.iter().any(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return None;
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let p = sxy / sxx;
    Some((p, (my - p * mx).exp()))
}

// -------------------------------------------------------------------
// ε-sweep
// -------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub eps_grid: Vec<f64>,
    #[serde(rename = "F_eps")]
    pub f_eps: Vec<EnergyValue>,
    #[serde(rename = "F_limit")]
    pub f_limit: f64,
    /// `F_ε - F` for finite entries.
    pub gaps: Vec<Option<f64>>,
    /// `F_ε` is nonincreasing along the grid in extended reals, and no
    /// finite entry lies below `F`.
    pub monotone: bool,
    /// All finite gaps vanish (to rounding), so no rate can be fitted.
    pub degenerate: bool,
    pub fitted_rate: Option<f64>,
    pub fitted_prefactor: Option<f64>,
    /// `ε` values entering the fit.
    pub fit_eps: Vec<f64>,
    /// `(1/12) ∫ κ²(1+η²)² η'² ds`, the predicted `ε²` coefficient.
    pub predicted_prefactor: f64,
}

pub fn eps_sweep(curve: &CurveSpec, eps_grid: &[f64], quad: &QuadratureScheme) -> Result<SweepReport> {
    check_decreasing_grid(eps_grid)?;
    quad.validate()?;
    let f_limit = sadowsky_energy(curve, quad)?.value();
    let f_eps = eps_grid
        .par_iter()
        .map(|&e| wunderlich_energy(curve, e, quad))
        .collect::<Result<Vec<_>>>()?;
    let predicted_prefactor = gamma_gap_prediction(curve, quad)?;

    let monotone = f_eps.windows(2).all(|w| w[0].value() >= w[1].value())
        && f_eps.iter().all(|f| f.value() >= f_limit);
    let gaps: Vec<Option<f64>> = f_eps.iter().map(|f| f.finite_value().map(|v| v - f_limit)).collect();
    let threshold = DEGENERATE_GAP * f_limit.abs().max(f64::MIN_POSITIVE);
    let positive: Vec<(f64, f64)> = eps_grid
        .iter()
        .zip(&gaps)
        .filter_map(|(&e, g)| g.filter(|g| *g > threshold).map(|g| (e, g)))
        .collect();
    let degenerate = positive.is_empty() && gaps.iter().any(Option::is_some);

    let small: Vec<(f64, f64)> = positive.iter().copied().filter(|(e, _)| *e <= FIT_EPS_MAX).collect();
    let fit_points = if small.len() >= MIN_FIT_POINTS {
        small
    } else if positive.len() >= MIN_FIT_POINTS {
        positive[positive.len() - MIN_FIT_POINTS..].to_vec()
    } else {
        Vec::new()
    };
    let fit = loglog_fit(&fit_points);
    Ok(SweepReport {
        eps_grid: eps_grid.to_vec(),
        f_eps,
        f_limit,
        gaps,
        monotone,
        degenerate,
        fitted_rate: fit.map(|f| f.0),
        fitted_prefactor: fit.map(|f| f.1),
        fit_eps: if fit.is_some() { fit_points.iter().map(|p| p.0).collect() } else { Vec::new() },
        predicted_prefactor,
    })
}

// -------------------------------------------------------------------
// Minimizer convergence
// -------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SolveOutcome {
    Solved {
        /// Final objective (energy plus penalties): `m(ε)`.
        objective: f64,
        energy: EnergyValue,
        iterations: usize,
        converged: bool,
        grad_norm: f64,
        /// Euclidean distance of the coefficients to the Sadowsky minimizer.
        distance_to_limit: Option<f64>,
    },
    Failed {
        error_kind: String,
        message: String,
    },
}

impl SolveOutcome {
    pub fn objective(&self) -> Option<f64> {
        match self {
            SolveOutcome::Solved { objective, .. } => Some(*objective),
            SolveOutcome::Failed { .. } => None,
        }
    }

    fn failed(e: &RibbonError) -> Self {
        SolveOutcome::Failed {
            error_kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }

    fn solved(r: &SolveReport) -> Self {
        SolveOutcome::Solved {
            objective: r.final_objective,
            energy: r.final_energy.clone(),
            iterations: r.iterations,
            converged: r.converged,
            grad_norm: r.grad_norm,
            distance_to_limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub eps_grid: Vec<f64>,
    pub minima: Vec<SolveOutcome>,
    pub sadowsky: SolveOutcome,
    /// `m(ε) - m₀` where both solves succeeded.
    pub gaps: Vec<Option<f64>>,
    /// `m(ε)` nonincreasing as `ε` decreases, over the solved entries.
    pub monotone: bool,
    /// Every solved `m(ε)` is at least `m₀`.
    pub bounded_below: bool,
    pub fitted_rate: Option<f64>,
}

impl ConvergenceReport {
    pub fn all_solved(&self) -> bool {
        self.minima.iter().chain([&self.sadowsky]).all(|o| o.objective().is_some())
    }
}

/// Minimizes `F_ε` for each `ε` of a decreasing grid and then `F`, each
/// solve starting from the previous minimizer. An `ε` whose start has
/// infinite energy, or whose solve fails, gets a failure marker and the
/// next solve restarts from the last successful minimizer.
pub fn minimizer_convergence(
    curve0: &CurveSpec,
    eps_grid: &[f64],
    cfg: &ObjectiveConfig,
    opts: &SolveOptions,
) -> Result<ConvergenceReport> {
    check_decreasing_grid(eps_grid)?;
    cfg.validate()?;
    let mut start = curve0.clone();
    let mut minima = Vec::with_capacity(eps_grid.len());
    let mut minimizers: Vec<Option<CurveSpec>> = Vec::with_capacity(eps_grid.len());

    let solve = |kind: EnergyKind, start: &mut CurveSpec| -> (SolveOutcome, Option<CurveSpec>) {
        let cfg_k = ObjectiveConfig { energy: kind, ..*cfg };
        match objective(start, &cfg_k) {
            Ok(v) if v.is_finite() => {}
            Ok(_) => {
                let e = RibbonError::domain("objective is infinite at the starting curve");
                return (SolveOutcome::failed(&e), None);
            }
            Err(e) => return (SolveOutcome::failed(&e), None),
        }
        match minimize(start, &cfg_k, opts) {
            Ok((c, rep)) => {
                *start = c.clone();
                (SolveOutcome::solved(&rep), Some(c))
            }
            Err(e) => (SolveOutcome::failed(&e), None),
        }
    };

    for &eps in eps_grid {
        let (o, c) = solve(EnergyKind::Wunderlich { eps }, &mut start);
        minima.push(o);
        minimizers.push(c);
    }
    let (mut sadowsky, limit_curve) = solve(EnergyKind::Sadowsky, &mut start);

    if let Some(lc) = &limit_curve {
        let x0 = DVector::from_vec(lc.coefficients_flat());
        for (o, c) in minima.iter_mut().zip(&minimizers) {
            if let (SolveOutcome::Solved { distance_to_limit, .. }, Some(c)) = (o, c) {
                *distance_to_limit = Some((DVector::from_vec(c.coefficients_flat()) - &x0).norm());
            }
        }
        if let SolveOutcome::Solved { distance_to_limit, .. } = &mut sadowsky {
            *distance_to_limit = Some(0.0);
        }
    }

    let m0 = sadowsky.objective();
    let values: Vec<Option<f64>> = minima.iter().map(SolveOutcome::objective).collect();
    let solved: Vec<f64> = values.iter().flatten().copied().collect();
    let monotone = solved.windows(2).all(|w| w[0] >= w[1]);
    let bounded_below = m0.is_none_or(|m0| solved.iter().all(|&m| m >= m0));
    let gaps: Vec<Option<f64>> = values.iter().map(|v| v.zip(m0).map(|(m, m0)| m - m0)).collect();
    let fit_points: Vec<(f64, f64)> = eps_grid
        .iter()
        .zip(&gaps)
        .filter_map(|(&e, g)| g.filter(|g| *g > DEGENERATE_GAP * m0.unwrap_or(1.0)).map(|g| (e, g)))
        .collect();
    let fitted_rate = if fit_points.len() >= 3 { loglog_fit(&fit_points).map(|f| f.0) } else { None };
    Ok(ConvergenceReport {
        eps_grid: eps_grid.to_vec(),
        minima,
        sadowsky,
        gaps,
        monotone,
        bounded_below,
        fitted_rate,
    })
}

// -------------------------------------------------------------------
// Lower-semicontinuity probes
// -------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    /// `a sin(2π f t)` along the normal of the best-fit plane of the base.
    TorsionOscillation,
    /// `a cos(2π f t)` added to every component (for closed curves this is
    /// a single Fourier coefficient per component).
    CoefficientOscillation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSequence {
    pub base_curve: CurveSpec,
    pub perturbation_kind: PerturbationKind,
    pub amplitude_schedule: Vec<f64>,
    pub frequency_schedule: Vec<u32>,
}

impl ProbeSequence {
    /// Amplitudes `a_n = A / f_n³`: `u_n → base` in `C²` while the third
    /// derivatives keep oscillating with bounded size.
    pub fn cubic_decay(
        base_curve: CurveSpec,
        perturbation_kind: PerturbationKind,
        amplitude: f64,
        frequencies: Vec<u32>,
    ) -> Result<Self> {
        let seq = Self {
            amplitude_schedule: frequencies.iter().map(|&f| amplitude / (f as f64).powi(3)).collect(),
            frequency_schedule: frequencies,
            base_curve,
            perturbation_kind,
        };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.amplitude_schedule.len();
        if n < 4 || self.frequency_schedule.len() != n {
            return Err(RibbonError::domain(
                "probe schedules must have equal length of at least 4",
            ));
        }
        if self.amplitude_schedule.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(RibbonError::domain("amplitudes must be finite and >= 0"));
        }
        if self.amplitude_schedule.windows(2).any(|w| w[1] > w[0]) {
            return Err(RibbonError::domain("amplitudes must be nonincreasing"));
        }
        if self.frequency_schedule[0] == 0 || self.frequency_schedule.windows(2).any(|w| w[1] <= w[0]) {
            return Err(RibbonError::domain("frequencies must be positive and increasing"));
        }
        Ok(())
    }

    /// Sequence member `n`.
    pub fn member(&self, n: usize) -> Result<CurveSpec> {
        let a = self.amplitude_schedule[n];
        let f = self.frequency_schedule[n] as f64;
        let base = &self.base_curve;
        let dir = match self.perturbation_kind {
            PerturbationKind::TorsionOscillation => best_fit_plane_normal(base),
            PerturbationKind::CoefficientOscillation => Vector3::new(1.0, 1.0, 1.0) / 3f64.sqrt(),
        };
        if a == 0.0 {
            return Ok(base.clone());
        }
        let wave = |t: f64| match self.perturbation_kind {
            PerturbationKind::TorsionOscillation => (2.0 * PI * f * t).sin(),
            PerturbationKind::CoefficientOscillation => (2.0 * PI * f * t).cos(),
        };
        match base.basis() {
            BasisKind::FourierClosed => {
                let k = f as usize;
                let n_needed = (2 * k + 1).max(base.n_coefficients());
                let mut rows = base.coefficients().clone().map(|mut r| {
                    r.resize(n_needed, 0.0);
                    r
                });
                let slot = match self.perturbation_kind {
                    PerturbationKind::TorsionOscillation => 2 * k,
                    PerturbationKind::CoefficientOscillation => 2 * k - 1,
                };
                for i in 0..3 {
                    rows[i][slot] += a * dir[i];
                }
                CurveSpec::new(BasisKind::FourierClosed, rows, base.target_length())
            }
            BasisKind::ChebyshevOpen => {
                let n = base.n_coefficients().max((4.0 * f) as usize + 40);
                CurveSpec::fit_chebyshev(|t| base.position(t) + dir * (a * wave(t)), n, base.target_length())
            }
        }
    }
}

/// Unit normal of the least-squares plane through 256 curve samples.
pub fn best_fit_plane_normal(curve: &CurveSpec) -> Vector3<f64> {
    let pts: Vec<Vector3<f64>> = (0..256).map(|i| curve.position(i as f64 / 255.0)).collect();
    let mean = pts.iter().sum::<Vector3<f64>>() / pts.len() as f64;
    let mut cov = Matrix3::zeros();
    for p in &pts {
        let d = p - mean;
        cov += d * d.transpose();
    }
    let eig = cov.symmetric_eigen();
    let i = eig.eigenvalues.imin();
    eig.eigenvectors.column(i).into_owned()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Curvature floor of the regularized energy; `None` evaluates the plain
    /// Sadowsky functional and rejects members with inflection points.
    pub kappa_m: Option<f64>,
    pub quad: QuadratureScheme,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeMember {
    pub index: usize,
    pub amplitude: f64,
    pub frequency: u32,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LscReport {
    pub base_energy: f64,
    pub members: Vec<ProbeMember>,
    /// Minimum energy over the last half of the sequence.
    pub liminf_estimate: f64,
    /// `liminf_estimate - base_energy`.
    pub margin: f64,
    /// `margin >= -1e-6 (1 + base_energy)`.
    pub lsc_holds: bool,
    /// Curvature zeros of the base where quadrature panels were split.
    pub split_points: Vec<f64>,
}

pub const LSC_TOLERANCE: f64 = 1e-6;

pub fn lsc_probe(seq: &ProbeSequence, cfg: &ProbeConfig) -> Result<LscReport> {
    seq.validate()?;
    cfg.quad.validate()?;
    let split_points = match cfg.kappa_m {
        Some(_) => curvature_zeros(&seq.base_curve, 2048),
        None => Vec::new(),
    };
    let energy_of = |c: &CurveSpec, label: &str| -> Result<f64> {
        match cfg.kappa_m {
            Some(km) => Ok(regularized_sadowsky_energy_split(c, km, &cfg.quad, &split_points)?.value()),
            None => match sadowsky_energy(c, &cfg.quad) {
                Ok(e) => Ok(e.value()),
                Err(e @ RibbonError::InflectionPoint { .. }) => {
                    Err(RibbonError::Rejected(format!("{label} is not admissible without regularization: {e}")))
                }
                Err(e) => Err(e),
            },
        }
    };
    let base_energy = energy_of(&seq.base_curve, "base curve")?;
    let members = (0..seq.amplitude_schedule.len())
        .into_par_iter()
        .map(|i| {
            let c = seq.member(i)?;
            Ok(ProbeMember {
                index: i,
                amplitude: seq.amplitude_schedule[i],
                frequency: seq.frequency_schedule[i],
                energy: energy_of(&c, &format!("member {i}"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tail = &members[members.len() / 2..];
    let liminf_estimate = tail.iter().map(|m| m.energy).fold(f64::INFINITY, f64::min);
    let margin = liminf_estimate - base_energy;
    Ok(LscReport {
        base_energy,
        lsc_holds: margin >= -LSC_TOLERANCE * (1.0 + base_energy),
        members,
        liminf_estimate,
        margin,
        split_points,
    })
}

// -------------------------------------------------------------------
// Curves with inflection points
// -------------------------------------------------------------------

/// Local minima of `κ` on a uniform grid, refined by golden-section search,
/// that fall below `1e-8 · max κ`.
pub fn curvature_zeros(curve: &CurveSpec, grid: usize) -> Vec<f64> {
    let grid = grid.max(8);
    let closed = curve.is_closed();
    let kappa = |t: f64| {
        let t = if closed { t.rem_euclid(1.0) } else { t.clamp(0.0, 1.0) };
        FrenetGeometry::from_jet(&curve.jet(t)).kappa
    };
    let vals: Vec<f64> = (0..=grid).map(|i| kappa(i as f64 / grid as f64)).collect();
    let kmax = vals.iter().copied().fold(0.0, f64::max);
    let h = 1.0 / grid as f64;
    // closed curves: t = 1 is t = 0
    let last = if closed { grid - 1 } else { grid };
    let mut zeros = Vec::new();
    for i in 0..=last {
        let left = match (i, closed) {
            (0, true) => vals[grid - 1],
            (0, false) => f64::INFINITY,
            _ => vals[i - 1],
        };
        let right = if i < grid { vals[i + 1] } else { f64::INFINITY };
        if !(vals[i] <= left && vals[i] < right) {
            continue;
        }
        let (mut lo, mut hi) = ((i as f64 - 1.0) * h, (i as f64 + 1.0) * h);
        if !closed {
            lo = lo.max(0.0);
            hi = hi.min(1.0);
        }
        let t = golden_min(&kappa, lo, hi);
        if kappa(t) <= 1e-8 * kmax {
            zeros.push(if closed { t.rem_euclid(1.0) } else { t });
        }
    }
    zeros
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InflectionKind {
    /// `(t, k (t - t*)³, δ (t - t*)⁵)`, scaled to unit length: a single
    /// simple curvature zero at `t*`.
    SingleZero { k: f64, delta: f64, t_star: f64 },
    /// `(cos θ - cos 2θ / 4, sin θ + β sin 2θ, γ sin 2θ)`, `θ = 2πt`, scaled
    /// to unit length. `c''` vanishes at `θ = 0` and changes sign there,
    /// so the Frenet normal flips once around the loop.
    MobiusLike { beta: f64, gamma: f64 },
}

impl InflectionKind {
    pub fn single_zero() -> Self {
        InflectionKind::SingleZero {
            k: 1.0,
            delta: 0.5,
            t_star: 0.5,
        }
    }

    pub fn mobius_like() -> Self {
        InflectionKind::MobiusLike { beta: 0.0, gamma: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflectionCurve {
    pub curve: CurveSpec,
    pub zeros: Vec<f64>,
    /// Number of curvature zeros across which the principal normal reverses.
    pub normal_flips: usize,
}

impl InflectionCurve {
    pub fn odd_framing(&self) -> bool {
        self.normal_flips % 2 == 1
    }
}

pub fn inflection_test_curve(kind: InflectionKind) -> Result<InflectionCurve> {
    let curve = match kind {
        InflectionKind::SingleZero { k, delta, t_star } => {
            if !(k.is_finite() && delta.is_finite() && t_star.is_finite()) {
                return Err(RibbonError::domain("single_zero parameters must be finite"));
            }
            if !(t_star > 0.0 && t_star < 1.0) {
                return Err(RibbonError::domain("t_star must lie in (0, 1)"));
            }
            if k == 0.0 {
                return Err(RibbonError::Rejected(
                    "single_zero needs k != 0; k = 0 flattens the curve to higher order".into(),
                ));
            }
            CurveSpec::fit_chebyshev(
                |t| {
                    let s = t - t_star;
                    Vector3::new(t, k * s.powi(3), delta * s.powi(5))
                },
                12,
                1.0,
            )?
            .normalized_to_unit_length()?
        }
        InflectionKind::MobiusLike { beta, gamma } => {
            if !(beta.is_finite() && gamma.is_finite()) {
                return Err(RibbonError::domain("mobius_like parameters must be finite"));
            }
            let n = 9;
            let mut rows = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
            rows[0][1] = 1.0;
            rows[0][3] = -0.25;
            rows[1][2] = 1.0;
            rows[1][4] = beta;
            rows[2][4] = gamma;
            CurveSpec::new(BasisKind::FourierClosed, rows, 1.0)?.normalized_to_unit_length()?
        }
    };
    reject_flat_intervals(&curve)?;
    let zeros = curvature_zeros(&curve, 4096);
    if zeros.is_empty() {
        return Err(RibbonError::Rejected("no curvature zero found".into()));
    }
    let normal_flips = zeros.iter().filter(|&&t| normal_flips_at(&curve, t)).count();
    Ok(InflectionCurve {
        curve,
        zeros,
        normal_flips,
    })
}

fn reject_flat_intervals(curve: &CurveSpec) -> Result<()> {
    let grid = 4096;
    let kappa: Vec<f64> = (0..=grid)
        .map(|i| FrenetGeometry::from_jet(&curve.jet(i as f64 / grid as f64)).kappa)
        .collect();
    let kmax = kappa.iter().copied().fold(0.0, f64::max);
    let flat = |k: f64| k <= 1e-10 * kmax.max(f64::MIN_POSITIVE);
    if kappa.windows(2).any(|w| flat(w[0]) && flat(w[1])) {
        return Err(RibbonError::Rejected("curvature vanishes on an interval".into()));
    }
    Ok(())
}

fn normal_flips_at(curve: &CurveSpec, t0: f64) -> bool {
    let normal = |t: f64| {
        let j = curve.jet(t.rem_euclid(1.0));
        let tan = j.d1.normalize();
        (j.d2 - tan * tan.dot(&j.d2)).normalize()
    };
    let h = 1e-4;
    let (a, b) = if curve.is_closed() {
        (t0 - h, t0 + h)
    } else {
        ((t0 - h).max(0.0), (t0 + h).min(1.0))
    };
    normal(a).dot(&normal(b)) < 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn loglog_fit_recovers_power_law() {
        let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.02, 0.01].iter().map(|&e| (e, 3.0 * e * e)).collect();
        let (p, c) = loglog_fit(&pts).unwrap();
        assert!((p - 2.0).abs() < 1e-12);
        assert!((c - 3.0).abs() < 1e-10);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let c = shapes::unit_circle();
        let q = QuadratureScheme::default();
        assert!(eps_sweep(&c, &[], &q).is_err());
        assert!(eps_sweep(&c, &[0.1, 0.2], &q).is_err());
        assert!(eps_sweep(&c, &[0.1, -0.2], &q).is_err());
    }

    #[test]
    fn helix_sweep_is_degenerate() {
        let h = shapes::helix_unit_speed(0.3, 0.2, 1.0, 32).unwrap();
        let r = eps_sweep(&h, &[0.4, 0.2, 0.1, 0.05, 0.02], &QuadratureScheme::default()).unwrap();
        assert!(r.monotone && r.degenerate);
        assert!(r.fitted_rate.is_none());
        assert!(r.gaps.iter().all(|g| g.unwrap().abs() <= 1e-12 * r.f_limit));
    }

    #[test]
    fn single_zero_curve_has_its_zero_at_t_star() {
        let ic = inflection_test_curve(InflectionKind::single_zero()).unwrap();
        assert_eq!(ic.zeros.len(), 1);
        assert!((ic.zeros[0] - 0.5).abs() < 1e-6);
        assert_eq!(ic.normal_flips, 1);
        let ic = inflection_test_curve(InflectionKind::SingleZero {
            k: 2.0,
            delta: 0.1,
            t_star: 0.3,
        })
        .unwrap();
        assert!((ic.zeros[0] - 0.3).abs() < 1e-6);
    }

    #[test]
    fn mobius_like_curve_has_odd_framing() {
        let ic = inflection_test_curve(InflectionKind::mobius_like()).unwrap();
        assert!(ic.curve.is_closed());
        assert!((ic.curve.length() - 1.0).abs() < 1e-12);
        assert!(!ic.zeros.is_empty());
        assert!(ic.odd_framing());
    }

    #[test]
    fn degenerate_parameters_are_rejected() {
        let flat = InflectionKind::SingleZero {
            k: 0.0,
            delta: 0.0,
            t_star: 0.5,
        };
        assert!(matches!(inflection_test_curve(flat), Err(RibbonError::Rejected(_))));
        let outside = InflectionKind::SingleZero {
            k: 1.0,
            delta: 0.0,
            t_star: 1.0,
        };
        assert!(inflection_test_curve(outside).is_err());
    }

    #[test]
    fn zero_amplitude_probe_has_zero_margin() {
        let seq = ProbeSequence {
            base_curve: shapes::unit_circle(),
            perturbation_kind: PerturbationKind::CoefficientOscillation,
            amplitude_schedule: vec![0.0; 5],
            frequency_schedule: vec![2, 3, 4, 5, 6],
        };
        let cfg = ProbeConfig {
            kappa_m: None,
            quad: QuadratureScheme::default(),
        };
        let r = lsc_probe(&seq, &cfg).unwrap();
        assert_eq!(r.margin, 0.0);
        assert!(r.lsc_holds);
    }

    #[test]
    fn probe_schedules_are_validated() {
        let mut seq = ProbeSequence {
            base_curve: shapes::unit_circle(),
            perturbation_kind: PerturbationKind::TorsionOscillation,
            amplitude_schedule: vec![1e-3, 1e-4, 1e-5],
            frequency_schedule: vec![2, 3, 4],
        };
        assert!(seq.validate().is_err());
        seq.amplitude_schedule.push(1e-2);
        seq.frequency_schedule.push(5);
        assert!(seq.validate().is_err());
    }

    #[test]
    fn fourier_member_adds_one_mode() {
        let seq = ProbeSequence::cubic_decay(
            shapes::unit_circle(),
            PerturbationKind::TorsionOscillation,
            1e-2,
            vec![2, 3, 5, 8],
        )
        .unwrap();
        let m = seq.member(3).unwrap();
        assert_eq!(m.n_coefficients(), 17);
        let t = 0.37;
        let expected = seq.base_curve.position(t) + Vector3::z() * (1e-2 / 512.0) * (2.0 * PI * 8.0 * t).sin();
        let n = best_fit_plane_normal(&seq.base_curve);
        assert!((n.z.abs() - 1.0).abs() < 1e-12);
        let got = m.position(t);
        assert!((got - expected).norm() < 1e-15 || (got - (2.0 * seq.base_curve.position(t) - expected)).norm() < 1e-15);
    }
}
