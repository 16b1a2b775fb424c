//! Penalized minimization of ribbon energies over curve coefficients.
//!
//! The objective adds to the energy quadratic penalties for speed
//! uniformity and length and an optional log barrier for `κ ≥ κ_m`.
//! [`minimize`] also holds the length and any clamped Chebyshev ends
//! exactly: search directions are projected onto the tangent space of those
//! constraints and trial points are pulled back to the target length.
//! Gradients are central finite differences; the iteration is BFGS with
//! Armijo backtracking.

use nalgebra::{DMatrix, DVector, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{BasisKind, CurveSpec, FrenetGeometry, KAPPA_FLOOR_EVAL};
use crate::energy::{regularized_density, sadowsky_density, wunderlich_from_nodes, EnergyValue, Node};
use crate::error::{Result, RibbonError};
use crate::quadrature::{CompensatedSum, QuadratureScheme};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnergyKind {
    Sadowsky,
    Wunderlich { eps: f64 },
    Regularized { kappa_m: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub energy: EnergyKind,
    /// Weight of `∫ (|c'|/L - 1)² dt`.
    pub penalty_speed: f64,
    /// Weight of `(L - target_length)²`.
    pub penalty_length: f64,
    /// Weight of the log barrier keeping `κ > kappa_min`; 0 disables it.
    pub barrier_kappa: f64,
    #[serde(default)]
    pub kappa_min: f64,
    pub quad: QuadratureScheme,
}

impl ObjectiveConfig {
    pub const DEFAULT_PENALTY_SPEED: f64 = 1e4;
    pub const DEFAULT_PENALTY_LENGTH: f64 = 1e6;

    pub fn new(energy: EnergyKind) -> Self {
        Self {
            energy,
            penalty_speed: Self::DEFAULT_PENALTY_SPEED,
            penalty_length: Self::DEFAULT_PENALTY_LENGTH,
            barrier_kappa: 0.0,
            kappa_min: 0.0,
            quad: QuadratureScheme::new(16, 8).expect("valid scheme"),
        }
    }

    pub fn with_quad(mut self, quad: QuadratureScheme) -> Self {
        self.quad = quad;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.quad.validate()?;
        for (name, w) in [
            ("penalty_speed", self.penalty_speed),
            ("penalty_length", self.penalty_length),
            ("barrier_kappa", self.barrier_kappa),
            ("kappa_min", self.kappa_min),
        ] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(RibbonError::domain(format!("{name} must be finite and >= 0")));
            }
        }
        match self.energy {
            EnergyKind::Wunderlich { eps } if !(eps >= 0.0 && eps.is_finite()) => {
                Err(RibbonError::domain("eps must be finite and >= 0"))
            }
            EnergyKind::Regularized { kappa_m } if !(kappa_m > 0.0 && kappa_m.is_finite()) => {
                Err(RibbonError::domain("kappa_m must be positive"))
            }
            _ => Ok(()),
        }
    }
}

/// Objective split into its parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveTerms {
    pub energy: EnergyValue,
    pub speed_penalty: f64,
    pub length_penalty: f64,
    pub barrier: f64,
    pub length: f64,
}

impl ObjectiveTerms {
    pub fn total(&self) -> f64 {
        self.energy.value() + self.speed_penalty + self.length_penalty + self.barrier
    }
}

pub fn objective_terms(curve: &CurveSpec, cfg: &ObjectiveConfig) -> Result<ObjectiveTerms> {
    cfg.validate()?;
    let rule = cfg.quad.rule();
    let geoms: Vec<(f64, f64, FrenetGeometry)> = rule
        .iter()
        .map(|&(t, w)| (t, w, FrenetGeometry::from_jet(&curve.jet(t))))
        .collect();
    let length = CompensatedSum::from_iter(geoms.iter().map(|(_, w, g)| w * g.speed)).value();
    if !(length > 0.0) {
        return Err(RibbonError::DegenerateCurve("zero length".into()));
    }
    let speed_penalty = cfg.penalty_speed
        * CompensatedSum::from_iter(geoms.iter().map(|(_, w, g)| {
            let d = g.speed / length - 1.0;
            w * d * d
        }))
        .value();
    let dl = length - curve.target_length();
    let length_penalty = cfg.penalty_length * dl * dl;

    let barrier = if cfg.barrier_kappa > 0.0 && cfg.kappa_min > 0.0 {
        let mut b = CompensatedSum::new();
        let mut blocked = false;
        for (_, w, g) in &geoms {
            let x = (g.kappa - cfg.kappa_min) / cfg.kappa_min;
            if !(x > 0.0) {
                blocked = true;
                break;
            }
            b.add(-w * g.speed * x.ln());
        }
        if blocked {
            f64::INFINITY
        } else {
            cfg.barrier_kappa * b.value()
        }
    } else {
        0.0
    };

    let energy = match cfg.energy {
        EnergyKind::Regularized { kappa_m } => EnergyValue::finite(
            CompensatedSum::from_iter(geoms.iter().map(|(_, w, g)| {
                w * g.speed * regularized_density(g.kappa, g.arclength_triple(), kappa_m)
            }))
            .value(),
        ),
        EnergyKind::Sadowsky | EnergyKind::Wunderlich { .. } => {
            let mut nodes = Vec::with_capacity(geoms.len());
            for (t, w, g) in &geoms {
                if !(g.kappa >= KAPPA_FLOOR_EVAL) {
                    return Err(RibbonError::InflectionPoint { t: *t, kappa: g.kappa });
                }
                nodes.push(Node {
                    t: *t,
                    ds: w * g.speed,
                    kappa: g.kappa,
                    eta: g.eta(),
                    eta_prime: g.eta_prime(),
                });
            }
            match cfg.energy {
                EnergyKind::Wunderlich { eps } => wunderlich_from_nodes(curve, eps, &nodes)?,
                _ => EnergyValue::finite(
                    CompensatedSum::from_iter(nodes.iter().map(|n| n.ds * sadowsky_density(n.kappa, n.eta)))
                        .value(),
                ),
            }
        }
    };
    Ok(ObjectiveTerms {
        energy,
        speed_penalty,
        length_penalty,
        barrier,
        length,
    })
}

/// Energy plus penalty and barrier terms; `+∞` when the energy is.
pub fn objective(curve: &CurveSpec, cfg: &ObjectiveConfig) -> Result<f64> {
    Ok(objective_terms(curve, cfg)?.total())
}

/// Relative finite-difference step of [`gradient`].
pub const FD_REL_STEP: f64 = 1e-6;

/// Central-difference gradient over the flattened coefficients with steps
/// `h = 1e-6 (1 + |c_i|)`.
pub fn gradient(curve: &CurveSpec, cfg: &ObjectiveConfig) -> Result<Vec<f64>> {
    gradient_with_step(curve, cfg, FD_REL_STEP)
}

pub fn gradient_with_step(curve: &CurveSpec, cfg: &ObjectiveConfig, rel_step: f64) -> Result<Vec<f64>> {
    let x = curve.coefficients_flat();
    let probe = |i: usize, delta: f64| -> Result<f64> {
        let mut xp = x.clone();
        xp[i] += delta;
        let c = curve.with_coefficients_flat(&xp)?;
        match objective(&c, cfg) {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(RibbonError::BlockedGradient { coordinate: i }),
        }
    };
    (0..x.len())
        .into_par_iter()
        .map(|i| {
            let h = rel_step * (1.0 + x[i].abs());
            let fp = probe(i, h)?;
            let fm = probe(i, -h)?;
            Ok((fp - fm) / (2.0 * h))
        })
        .collect()
}

/// Orthogonal projector onto directions that keep the clamped end data of a
/// Chebyshev curve: fixed end positions and end tangents along the given
/// directions. Identity for curves without boundary data.
pub struct ConstraintProjector {
    matrix: Option<DMatrix<f64>>,
}

impl ConstraintProjector {
    pub fn for_curve(curve: &CurveSpec) -> Result<Self> {
        let (Some(bd), BasisKind::ChebyshevOpen) = (curve.boundary_data(), curve.basis()) else {
            return Ok(Self { matrix: None });
        };
        let n = curve.n_coefficients();
        let rows = CurveSpec::chebyshev_endpoint_rows(n);
        let mut a = DMatrix::zeros(10, 3 * n);
        let mut r = 0;
        for end in 0..2 {
            for i in 0..3 {
                for k in 0..n {
                    a[(r, i * n + k)] = rows[end][k];
                }
                r += 1;
            }
        }
        for (end, tangent) in [(2, bd.start.tangent()), (3, bd.end.tangent())] {
            for p in orthonormal_complement(&tangent) {
                for i in 0..3 {
                    for k in 0..n {
                        a[(r, i * n + k)] = p[i] * rows[end][k];
                    }
                }
                r += 1;
            }
        }
        let gram = &a * a.transpose();
        let inv = gram
            .try_inverse()
            .ok_or_else(|| RibbonError::InvalidCurve("singular boundary constraint system".into()))?;
        let proj = DMatrix::identity(3 * n, 3 * n) - a.transpose() * inv * &a;
        Ok(Self { matrix: Some(proj) })
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        match &self.matrix {
            Some(p) => p * v,
            None => v.clone(),
        }
    }
}

fn orthonormal_complement(t: &Vector3<f64>) -> [Vector3<f64>; 2] {
    let helper = if t.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let p = t.cross(&helper).normalize();
    let q = t.cross(&p).normalize();
    [p, q]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveOptions {
    pub max_iter: usize,
    pub tol_grad: f64,
    pub tol_rel_energy: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol_grad: 1e-5,
            tol_rel_energy: 1e-14,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    /// Objective value (energy plus penalties).
    pub energy: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintResiduals {
    /// `max |(|c'| / L) - 1|` on a dense grid.
    pub speed: f64,
    /// `|L - target_length|`.
    pub length: f64,
    /// Largest clamped-end residual (0 without boundary data).
    pub bc: f64,
    /// Smallest curvature on the grid.
    pub kappa_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    EnergyStagnation,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub final_energy: EnergyValue,
    pub final_objective: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub constraint_residuals: ConstraintResiduals,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub history: Vec<HistoryEntry>,
}

pub fn constraint_residuals(curve: &CurveSpec) -> ConstraintResiduals {
    let length = curve.length();
    let grid = 512;
    let mut speed: f64 = 0.0;
    let mut kappa_min = f64::INFINITY;
    for i in 0..=grid {
        let g = FrenetGeometry::from_jet(&curve.jet(i as f64 / grid as f64));
        speed = speed.max((g.speed / length - 1.0).abs());
        kappa_min = kappa_min.min(g.kappa);
    }
    ConstraintResiduals {
        speed,
        length: (length - curve.target_length()).abs(),
        bc: curve.boundary_residuals().map_or(0.0, |r| r.max()),
        kappa_min,
    }
}

const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;
const STAGNATION_WINDOW: usize = 5;

fn eval_or_inf(curve: &CurveSpec, cfg: &ObjectiveConfig) -> f64 {
    match objective(curve, cfg) {
        Ok(v) if !v.is_nan() => v,
        _ => f64::INFINITY,
    }
}

/// Linear end constraints plus the nonlinear length constraint
/// `L(c) = target_length`. Search directions are projected onto the
/// tangent space; trial points are pulled back onto `L = target` by a
/// one-dimensional Newton iteration along the projected length gradient.
struct FeasibleSet {
    proj: ConstraintProjector,
    target: f64,
}

const LENGTH_TOL: f64 = 1e-14;

impl FeasibleSet {
    fn new(curve: &CurveSpec) -> Result<Self> {
        Ok(Self {
            proj: ConstraintProjector::for_curve(curve)?,
            target: curve.target_length(),
        })
    }

    /// `P ∇L`, the length gradient restricted to directions keeping the ends.
    fn normal(&self, curve: &CurveSpec) -> Result<DVector<f64>> {
        let x = curve.coefficients_flat();
        let grad: Result<Vec<f64>> = (0..x.len())
            .into_par_iter()
            .map(|i| {
                let h = 1e-7 * (1.0 + x[i].abs());
                let mut xp = x.clone();
                xp[i] += h;
                let lp = curve.with_coefficients_flat(&xp)?.length();
                xp[i] -= 2.0 * h;
                let lm = curve.with_coefficients_flat(&xp)?.length();
                Ok((lp - lm) / (2.0 * h))
            })
            .collect();
        Ok(self.proj.apply(&DVector::from_vec(grad?)))
    }

    fn tangent(&self, v: &DVector<f64>, normal: &DVector<f64>) -> DVector<f64> {
        let pv = self.proj.apply(v);
        let nn = normal.norm_squared();
        if nn > 0.0 {
            &pv - normal * (pv.dot(normal) / nn)
        } else {
            pv
        }
    }

    fn retract(&self, curve: &CurveSpec, normal: &DVector<f64>) -> Option<CurveSpec> {
        let nn = normal.norm_squared();
        let mut c = curve.clone();
        for _ in 0..30 {
            let r = c.length() - self.target;
            if !r.is_finite() {
                return None;
            }
            if r.abs() <= LENGTH_TOL * self.target {
                return Some(c);
            }
            if nn == 0.0 {
                return None;
            }
            let x = DVector::from_vec(c.coefficients_flat()) - normal * (r / nn);
            c = c.with_coefficients_flat(x.as_slice()).ok()?;
        }
        None
    }
}

/// BFGS with backtracking line search on the feasible set.
///
/// Every accepted step satisfies the Armijo condition, so the recorded
/// objective history is nonincreasing. An infinite objective at a trial
/// point counts as a failed decrease.
pub fn minimize(
    curve0: &CurveSpec,
    cfg: &ObjectiveConfig,
    opts: &SolveOptions,
) -> Result<(CurveSpec, SolveReport)> {
    cfg.validate()?;
    let set = FeasibleSet::new(curve0)?;
    let mut curve = curve0.enforce_boundary()?;
    let mut normal = set.normal(&curve)?;
    curve = set
        .retract(&curve, &normal)
        .ok_or_else(|| RibbonError::domain("cannot bring the starting curve to its target length"))?;
    let f0 = objective(&curve, cfg)?;
    if !f0.is_finite() {
        return Err(RibbonError::domain("objective is infinite at the starting curve"));
    }
    normal = set.normal(&curve)?;

    let mut x = DVector::from_vec(curve.coefficients_flat());
    let mut f = f0;
    let mut g = set.tangent(&DVector::from_vec(gradient(&curve, cfg)?), &normal);
    let precond = mode_weights(&curve);
    let mut h_inv = DMatrix::from_diagonal(&precond);
    let mut scaled = false;
    let mut history = vec![HistoryEntry {
        iteration: 0,
        energy: f,
        grad_norm: g.norm(),
    }];

    let mut iter = 0;
    let stop = loop {
        if g.norm() <= opts.tol_grad {
            break StopReason::GradientTolerance;
        }
        if history.len() > STAGNATION_WINDOW {
            let old = history[history.len() - 1 - STAGNATION_WINDOW].energy;
            if (old - f).abs() <= opts.tol_rel_energy * f.abs().max(f64::MIN_POSITIVE) {
                break StopReason::EnergyStagnation;
            }
        }
        if iter >= opts.max_iter {
            break StopReason::MaxIterations;
        }
        iter += 1;

        let mut accepted = None;
        for attempt in 0..2 {
            if attempt == 1 {
                h_inv = DMatrix::from_diagonal(&precond);
                scaled = false;
            }
            let mut d = set.tangent(&(-(&h_inv * &g)), &normal);
            let mut slope = g.dot(&d);
            if !(slope < 0.0) {
                d = set.tangent(&(-precond.component_mul(&g)), &normal);
                slope = g.dot(&d);
            }
            let mut alpha = if scaled { 1.0 } else { (1.0 / d.norm()).min(1.0) * 1e-2 };
            for _ in 0..MAX_BACKTRACKS {
                let xt = &x + alpha * &d;
                let trial = curve
                    .with_coefficients_flat(xt.as_slice())
                    .ok()
                    .and_then(|c| set.retract(&c, &normal));
                if let Some(ct) = trial {
                    let ft = eval_or_inf(&ct, cfg);
                    if ft <= f + ARMIJO_C1 * alpha * slope {
                        accepted = Some((ct, ft));
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
        }
        let Some((c_new, f_new)) = accepted else {
            let report = build_report(&curve, cfg, f, g.norm(), iter, false, StopReason::MaxIterations, history)?;
            return Err(RibbonError::NoDescent {
                attempts: MAX_BACKTRACKS,
                report: Box::new(report),
            });
        };
        let x_new = DVector::from_vec(c_new.coefficients_flat());
        normal = set.normal(&c_new)?;
        let g_new = set.tangent(&DVector::from_vec(gradient(&c_new, cfg)?), &normal);
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() && sy > 0.0 {
            if !scaled {
                let dy = precond.component_mul(&y);
                h_inv = DMatrix::from_diagonal(&precond) * (sy / y.dot(&dy));
                scaled = true;
            }
            let rho = 1.0 / sy;
            let hy = &h_inv * &y;
            let yhy = y.dot(&hy);
            // H+ = H - rho (s hyᵀ + hy sᵀ) + (rho² yHy + rho) s sᵀ
            h_inv -= rho * (&s * hy.transpose() + &hy * s.transpose());
            h_inv += (rho * rho * yhy + rho) * (&s * s.transpose());
        }
        x = x_new;
        curve = c_new;
        f = f_new;
        g = g_new;
        history.push(HistoryEntry {
            iteration: iter,
            energy: f,
            grad_norm: g.norm(),
        });
    };
    let converged = stop != StopReason::MaxIterations;
    let report = build_report(&curve, cfg, f, g.norm(), iter, converged, stop, history)?;
    Ok((curve, report))
}

// Diagonal H^2-like metric: mode k is damped by (1 + k^2)^-2, which roughly
// undoes the growth of second derivatives with the mode index.
fn mode_weights(curve: &CurveSpec) -> DVector<f64> {
    let m = curve.n_coefficients();
    let closed = curve.basis() == BasisKind::FourierClosed;
    DVector::from_fn(3 * m, |i, _| {
        let j = i % m;
        let k = if closed { j.div_ceil(2) } else { j } as f64;
        (1.0 + k * k).powi(-2)
    })
}

#[allow(clippy::too_many_arguments)]
fn build_report(
    curve: &CurveSpec,
    cfg: &ObjectiveConfig,
    f: f64,
    grad_norm: f64,
    iterations: usize,
    converged: bool,
    stop_reason: StopReason,
    history: Vec<HistoryEntry>,
) -> Result<SolveReport> {
    let terms = objective_terms(curve, cfg)?;
    Ok(SolveReport {
        final_energy: terms.energy,
        final_objective: f,
        iterations,
        grad_norm,
        constraint_residuals: constraint_residuals(curve),
        converged,
        stop_reason,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{BoundaryData, EndCondition};
    use crate::shapes;
    use nalgebra::Matrix3;
    use std::f64::consts::PI;

    fn sadowsky_cfg() -> ObjectiveConfig {
        ObjectiveConfig::new(EnergyKind::Sadowsky)
    }

    #[test]
    fn circle_objective_without_penalties() {
        let mut cfg = sadowsky_cfg();
        cfg.penalty_speed = 0.0;
        cfg.penalty_length = 0.0;
        let v = objective(&shapes::unit_circle(), &cfg).unwrap();
        assert!((v - 4.0 * PI * PI).abs() < 1e-10);
        // exact unit speed: penalties contribute nothing
        let t = objective_terms(&shapes::unit_circle(), &sadowsky_cfg()).unwrap();
        assert!(t.speed_penalty < 1e-24 && t.length_penalty < 1e-16);
    }

    #[test]
    fn stretched_circle_pays_speed_penalty() {
        // circle traversed with phase t + 0.05 sin 2πt: same geometry
        let c = CurveSpec::fit_fourier(
            |t| {
                let phi = 2.0 * PI * (t + 0.05 * (2.0 * PI * t).sin());
                Vector3::new(phi.cos(), phi.sin(), 0.0) / (2.0 * PI)
            },
            24,
            1.0,
        )
        .unwrap();
        let cfg = sadowsky_cfg();
        let terms = objective_terms(&c, &cfg).unwrap();
        // oracle: speed / L = 1 + 0.1π cos 2πt, so ∫(..-1)² = (0.1π)²/2
        let expected = cfg.penalty_speed * (0.1 * PI).powi(2) / 2.0;
        assert!((terms.speed_penalty - expected).abs() < 1e-6 * expected);
        assert!((terms.energy.value() - 4.0 * PI * PI).abs() < 1e-8);
        assert!(terms.total() > 4.0 * PI * PI);
    }

    #[test]
    fn translation_components_of_gradient_vanish() {
        let c = shapes::ellipse(1.0, 0.7).unwrap();
        let g = gradient(&c, &sadowsky_cfg()).unwrap();
        let n = c.n_coefficients();
        for i in 0..3 {
            assert!(g[i * n].abs() < 1e-8);
        }
    }

    #[test]
    fn circle_is_stationary_at_fixed_length() {
        // F·L is scale invariant and minimal at the circle, so ∇F is parallel
        // to ∇L, which for a circle points along the coefficients themselves.
        let c = shapes::unit_circle();
        let g = DVector::from_vec(gradient(&c, &sadowsky_cfg()).unwrap());
        let x = DVector::from_vec(c.coefficients_flat()).normalize();
        let perp = &g - &x * g.dot(&x);
        assert!(g.norm() > 1.0);
        assert!(perp.norm() < 1e-4, "{}", perp.norm());
    }

    #[test]
    fn stationary_start_converges_immediately() {
        let c = shapes::unit_circle();
        let (out, rep) = minimize(&c, &sadowsky_cfg(), &SolveOptions::default()).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 2);
        assert!((rep.final_energy.value() - 4.0 * PI * PI).abs() < 1e-10);
        assert_eq!(out.coefficients_flat().len(), c.coefficients_flat().len());
    }

    #[test]
    fn projector_keeps_clamped_ends() {
        let bd = BoundaryData {
            start: EndCondition::new(Vector3::zeros(), Vector3::x()),
            end: EndCondition::new(Vector3::new(0.5, 0.3, 0.2), Vector3::y()),
        };
        let c = shapes::hermite_clamped(bd, 12).unwrap();
        let p = ConstraintProjector::for_curve(&c).unwrap();
        let raw = DVector::from_fn(36, |i, _| ((i * 37) % 11) as f64 - 5.0);
        let d = p.apply(&raw);
        let moved = DVector::from_vec(c.coefficients_flat()) + 1e-5 * d;
        let m = c.with_coefficients_flat(moved.as_slice()).unwrap();
        assert!(m.boundary_residuals().unwrap().max() < 1e-12);
    }

    #[test]
    fn objective_is_rotation_invariant() {
        let c = shapes::torsion_modulated(&Default::default(), 24).unwrap();
        let rot = nalgebra::Rotation3::from_euler_angles(0.3, -0.8, 1.1);
        let r = c.transformed(rot.matrix(), &Vector3::new(1.0, 2.0, 3.0)).unwrap();
        let cfg = ObjectiveConfig::new(EnergyKind::Wunderlich { eps: 0.1 });
        let a = objective(&c, &cfg).unwrap();
        let b = objective(&r, &cfg).unwrap();
        assert!((a - b).abs() < 1e-9 * a);
        let _ = Matrix3::<f64>::identity();
    }

    #[test]
    fn barrier_blocks_low_curvature() {
        let mut cfg = sadowsky_cfg();
        cfg.barrier_kappa = 1e-3;
        cfg.kappa_min = 10.0;
        assert_eq!(objective(&shapes::unit_circle(), &cfg).unwrap(), f64::INFINITY);
        cfg.kappa_min = 1.0;
        assert!(objective(&shapes::unit_circle(), &cfg).unwrap().is_finite());
    }

    #[test]
    fn rejects_invalid_config() {
        let mut cfg = sadowsky_cfg();
        cfg.penalty_speed = -1.0;
        assert!(objective(&shapes::unit_circle(), &cfg).is_err());
        let cfg = ObjectiveConfig::new(EnergyKind::Regularized { kappa_m: 0.0 });
        assert!(objective(&shapes::unit_circle(), &cfg).is_err());
    }
}
