//! Kernel `g`, Sadowsky and Wunderlich integrands, and the energies built
//! from them.
//!
//! All energies are geometric integrals `∫ (..) ds = ∫ (..) |c'| dt` over the
//! curve as given. The nondimensional setting expects centerlines of unit
//! length; use [`CurveSpec::normalized_to_unit_length`] first otherwise.

use std::cmp::Ordering;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::curve::{CurveSpec, FrenetGeometry, FrenetSample, KAPPA_FLOOR_EVAL};
use crate::error::{Result, RibbonError};
use crate::quadrature::{CompensatedSum, QuadratureScheme};

/// Points in the dense grid used to estimate the measure of blowup sets.
pub const BLOWUP_GRID: usize = 4096;

const SERIES_SWITCH: f64 = 1e-3;

/// Width kernel
/// `g(x) = ln((2 + x) / (2 - x)) / x` for `0 < |x| < 2`, `g(0) = 1`,
/// `g(x) = +∞` for `|x| ≥ 2`.
pub fn eval_g(x: f64) -> f64 {
    let a = x.abs();
    if a >= 2.0 {
        f64::INFINITY
    } else if a < SERIES_SWITCH {
        let x2 = a * a;
        1.0 + x2 * (1.0 / 12.0 + x2 * (1.0 / 80.0 + x2 / 448.0))
    } else {
        // ln((2+a)/(2-a)) = 2 atanh(a/2)
        2.0 * (0.5 * a).atanh() / a
    }
}

/// Blowup diagnostic of an infinite energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Blowup {
    /// Estimated measure (as a fraction of `[0, 1]`) of `{|ε η'| ≥ 2}`.
    pub measure_estimate: f64,
    /// First parameter value where `|ε η'| ≥ 2` was observed.
    pub first_t: f64,
}

/// Energy in `[0, +∞]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnergyValue {
    Finite {
        value: f64,
        /// Parameter values of measure-zero hits of `|ε η'| ≥ 2`.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        warnings: Vec<f64>,
    },
    Infinite {
        blowup: Blowup,
    },
}

impl EnergyValue {
    pub fn finite(value: f64) -> Self {
        EnergyValue::Finite {
            value,
            warnings: Vec::new(),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, EnergyValue::Finite { .. })
    }

    /// Value as an `f64`, `+∞` when infinite.
    pub fn value(&self) -> f64 {
        match self {
            EnergyValue::Finite { value, .. } => *value,
            EnergyValue::Infinite { .. } => f64::INFINITY,
        }
    }

    pub fn finite_value(&self) -> Option<f64> {
        match self {
            EnergyValue::Finite { value, .. } => Some(*value),
            EnergyValue::Infinite { .. } => None,
        }
    }

    pub fn blowup(&self) -> Option<&Blowup> {
        match self {
            EnergyValue::Infinite { blowup } => Some(blowup),
            EnergyValue::Finite { .. } => None,
        }
    }

    pub fn warnings(&self) -> &[f64] {
        match self {
            EnergyValue::Finite { warnings, .. } => warnings,
            EnergyValue::Infinite { .. } => &[],
        }
    }
}

impl Add for EnergyValue {
    type Output = EnergyValue;

    fn add(self, rhs: EnergyValue) -> EnergyValue {
        match (self, rhs) {
            (
                EnergyValue::Finite { value: a, warnings: mut wa },
                EnergyValue::Finite { value: b, warnings: wb },
            ) => {
                wa.extend(wb);
                EnergyValue::Finite {
                    value: a + b,
                    warnings: wa,
                }
            }
            (EnergyValue::Infinite { blowup: a }, EnergyValue::Infinite { blowup: b }) => {
                EnergyValue::Infinite {
                    blowup: Blowup {
                        measure_estimate: (a.measure_estimate + b.measure_estimate).min(1.0),
                        first_t: a.first_t.min(b.first_t),
                    },
                }
            }
            (inf @ EnergyValue::Infinite { .. }, _) | (_, inf @ EnergyValue::Infinite { .. }) => inf,
        }
    }
}

/// Finite values compare numerically and lie below every infinite value;
/// two infinite values compare by their measure estimates.
impl PartialOrd for EnergyValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (EnergyValue::Finite { value: a, .. }, EnergyValue::Finite { value: b, .. }) => {
                a.partial_cmp(b)
            }
            (EnergyValue::Finite { .. }, EnergyValue::Infinite { .. }) => Some(Ordering::Less),
            (EnergyValue::Infinite { .. }, EnergyValue::Finite { .. }) => Some(Ordering::Greater),
            (EnergyValue::Infinite { blowup: a }, EnergyValue::Infinite { blowup: b }) => {
                a.measure_estimate.partial_cmp(&b.measure_estimate)
            }
        }
    }
}

/// Energy plus the quadrature that produced it; the JSON report format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    #[serde(flatten)]
    pub energy: EnergyValue,
    pub quad: QuadratureScheme,
}

// -------------------------------------------------------------------
// Integrands
// -------------------------------------------------------------------

/// `κ²(1+η²)²`.
pub fn sadowsky_integrand(sample: &FrenetSample) -> Result<f64> {
    check_kappa(sample)?;
    Ok(sadowsky_density(sample.kappa, sample.eta))
}

/// `κ²(1+η²)² g(ε η')`; `+∞` exactly when `|ε η'| ≥ 2`.
pub fn wunderlich_integrand(sample: &FrenetSample, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    check_kappa(sample)?;
    Ok(sadowsky_density(sample.kappa, sample.eta) * eval_g(eps * sample.eta_prime))
}

fn check_kappa(sample: &FrenetSample) -> Result<()> {
    if !(sample.kappa >= KAPPA_FLOOR_EVAL) {
        return Err(RibbonError::InflectionPoint {
            t: sample.t_param,
            kappa: sample.kappa,
        });
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(RibbonError::domain(format!("eps must be finite and >= 0, got {eps}")));
    }
    Ok(())
}

#[inline]
pub(crate) fn sadowsky_density(kappa: f64, eta: f64) -> f64 {
    let q = 1.0 + eta * eta;
    kappa * kappa * q * q
}

/// Curvature-floor regularized integrand on arclength derivatives:
/// `|y|²(1 + [x·(y×z)]²/|y|⁶)²` for `|y| ≥ κ_m`, with `|y|` replaced by
/// `κ_m` below the floor.
#[inline]
pub(crate) fn regularized_density(kappa: f64, arclength_triple: f64, kappa_m: f64) -> f64 {
    let k = kappa.max(kappa_m);
    let q = 1.0 + arclength_triple * arclength_triple / k.powi(6);
    k * k * q * q
}

// -------------------------------------------------------------------
// Node geometry
// -------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub(crate) struct Node {
    pub t: f64,
    /// Quadrature weight times speed: the `ds` of this node.
    pub ds: f64,
    pub kappa: f64,
    pub eta: f64,
    pub eta_prime: f64,
}

impl Node {
    pub fn density(&self) -> f64 {
        sadowsky_density(self.kappa, self.eta)
    }
}

pub(crate) fn admissible_nodes(curve: &CurveSpec, quad: &QuadratureScheme) -> Result<Vec<Node>> {
    quad.validate()?;
    quad.rule()
        .into_iter()
        .map(|(t, w)| {
            let g = curve.geometry_checked(t, KAPPA_FLOOR_EVAL)?;
            Ok(Node {
                t,
                ds: w * g.speed,
                kappa: g.kappa,
                eta: g.eta(),
                eta_prime: g.eta_prime(),
            })
        })
        .collect()
}

// -------------------------------------------------------------------
// Energies
// -------------------------------------------------------------------

/// Sadowsky functional `∫ κ²(1+η²)² ds`.
pub fn sadowsky_energy(curve: &CurveSpec, quad: &QuadratureScheme) -> Result<EnergyValue> {
    let nodes = admissible_nodes(curve, quad)?;
    let mut sum = CompensatedSum::new();
    for n in &nodes {
        sum.add(n.density() * n.ds);
    }
    Ok(EnergyValue::finite(sum.value()))
}

/// Wunderlich functional `∫ κ²(1+η²)² g(ε η') ds`.
///
/// When some node has `|ε η'| ≥ 2` the blowup set is measured on a dense
/// grid. A set of positive measure makes the energy infinite; isolated hits
/// are skipped in the sum and reported as warnings.
pub fn wunderlich_energy(curve: &CurveSpec, eps: f64, quad: &QuadratureScheme) -> Result<EnergyValue> {
    check_eps(eps)?;
    let nodes = admissible_nodes(curve, quad)?;
    wunderlich_from_nodes(curve, eps, &nodes)
}

pub(crate) fn wunderlich_from_nodes(curve: &CurveSpec, eps: f64, nodes: &[Node]) -> Result<EnergyValue> {
    let hits: Vec<f64> = nodes
        .iter()
        .filter(|n| (eps * n.eta_prime).abs() >= 2.0)
        .map(|n| n.t)
        .collect();
    let mut warnings = Vec::new();
    if !hits.is_empty() {
        let scan = blowup_scan(curve, eps, BLOWUP_GRID)?;
        if scan.measure_estimate > 0.0 {
            return Ok(EnergyValue::Infinite {
                blowup: Blowup {
                    measure_estimate: scan.measure_estimate,
                    first_t: scan.first_t.unwrap_or(hits[0]).min(hits[0]),
                },
            });
        }
        warnings = hits;
        warnings.extend(scan.isolated);
        warnings.sort_by(f64::total_cmp);
        warnings.dedup();
    }
    let mut sum = CompensatedSum::new();
    for n in nodes {
        let g = eval_g(eps * n.eta_prime);
        if g.is_finite() {
            sum.add(n.density() * g * n.ds);
        }
    }
    Ok(EnergyValue::Finite {
        value: sum.value(),
        warnings,
    })
}

/// Result of scanning a dense uniform grid for `|ε η'| ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowupScan {
    /// Total length of runs of at least two consecutive hits, as a fraction
    /// of `[0, 1]`.
    pub measure_estimate: f64,
    pub first_t: Option<f64>,
    /// Hits whose neighbours are both below threshold.
    pub isolated: Vec<f64>,
}

pub fn blowup_scan(curve: &CurveSpec, eps: f64, grid: usize) -> Result<BlowupScan> {
    check_eps(eps)?;
    let grid = grid.max(2);
    let h = 1.0 / (grid - 1) as f64;
    let mut hit = Vec::with_capacity(grid);
    for i in 0..grid {
        let t = i as f64 * h;
        let g = curve.geometry_checked(t, KAPPA_FLOOR_EVAL)?;
        hit.push((eps * g.eta_prime()).abs() >= 2.0);
    }
    let mut measure = 0.0;
    let mut isolated = Vec::new();
    let mut first_t = None;
    let mut i = 0;
    while i < grid {
        if !hit[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < grid && hit[i] {
            i += 1;
        }
        let run = i - start;
        first_t.get_or_insert(start as f64 * h);
        if run == 1 {
            isolated.push(start as f64 * h);
        } else {
            measure += (run - 1) as f64 * h;
        }
    }
    Ok(BlowupScan {
        measure_estimate: measure,
        first_t,
        isolated,
    })
}

/// Sadowsky functional with the curvature floor `κ_m`: the integrand is
/// evaluated at `max(|u''|, κ_m)`, so it stays finite through inflection
/// points.
pub fn regularized_sadowsky_energy(
    curve: &CurveSpec,
    kappa_m: f64,
    quad: &QuadratureScheme,
) -> Result<EnergyValue> {
    regularized_sadowsky_energy_split(curve, kappa_m, quad, &[])
}

/// [`regularized_sadowsky_energy`] with quadrature panels additionally split
/// at the given parameter values (typically located curvature zeros).
pub fn regularized_sadowsky_energy_split(
    curve: &CurveSpec,
    kappa_m: f64,
    quad: &QuadratureScheme,
    cuts: &[f64],
) -> Result<EnergyValue> {
    if !(kappa_m > 0.0 && kappa_m.is_finite()) {
        return Err(RibbonError::domain(format!("kappa_m must be positive, got {kappa_m}")));
    }
    quad.validate()?;
    let mut sum = CompensatedSum::new();
    for (t, w) in quad.rule_split_at(cuts) {
        let g = FrenetGeometry::from_jet(&curve.jet(t));
        if g.speed <= 0.0 {
            return Err(RibbonError::DegenerateCurve(format!("zero speed at t = {t}")));
        }
        sum.add(regularized_density(g.kappa, g.arclength_triple(), kappa_m) * w * g.speed);
    }
    Ok(EnergyValue::finite(sum.value()))
}

/// `E = D w F_ε / ℓ`: the dimensional bending energy of a ribbon of length
/// `ℓ`, half-width `w` and flexural rigidity `D`, given the nondimensional
/// energy at `ε = 2w/ℓ`.
pub fn dimensional_energy(f_eps: f64, rigidity: f64, half_width: f64, length: f64) -> Result<f64> {
    if !(rigidity > 0.0 && half_width > 0.0 && length > 0.0) {
        return Err(RibbonError::domain(
            "rigidity, half-width and length must be positive",
        ));
    }
    if !(f_eps >= 0.0) {
        return Err(RibbonError::domain(format!("energy must be >= 0, got {f_eps}")));
    }
    Ok(rigidity * half_width * f_eps / length)
}

/// Coefficient `P` in `F_ε - F = P ε² + O(ε⁴)`:
/// `P = (1/12) ∫ κ²(1+η²)² η'² ds`.
pub fn gamma_gap_prediction(curve: &CurveSpec, quad: &QuadratureScheme) -> Result<f64> {
    let nodes = admissible_nodes(curve, quad)?;
    let mut sum = CompensatedSum::new();
    for n in &nodes {
        sum.add(n.density() * n.eta_prime * n.eta_prime * n.ds);
    }
    Ok(sum.value() / 12.0)
}

/// One row of the per-node CSV dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeRow {
    pub t: f64,
    pub s: f64,
    pub kappa: f64,
    pub tau: f64,
    pub eta: f64,
    pub eta_prime: f64,
    pub sadowsky_integrand: f64,
    pub wunderlich_integrand: f64,
}

/// Per-node quantities at the quadrature nodes, with cumulative arclength.
pub fn node_dump(curve: &CurveSpec, eps: f64, quad: &QuadratureScheme) -> Result<Vec<NodeRow>> {
    check_eps(eps)?;
    quad.validate()?;
    let mut rows = Vec::with_capacity(quad.total_nodes());
    let mut s_prev = 0.0;
    let mut t_prev = 0.0;
    for (t, _) in quad.rule() {
        let g = curve.geometry_checked(t, KAPPA_FLOOR_EVAL)?;
        s_prev += curve.arclength_between(t_prev, t);
        t_prev = t;
        let dens = sadowsky_density(g.kappa, g.eta());
        rows.push(NodeRow {
            t,
            s: s_prev,
            kappa: g.kappa,
            tau: g.tau(),
            eta: g.eta(),
            eta_prime: g.eta_prime(),
            sadowsky_integrand: dens,
            wunderlich_integrand: dens * eval_g(eps * g.eta_prime()),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use nalgebra::Vector3;
    use std::f64::consts::PI;

    /// ln((2+x)/(2-x))/x via a straightforward ln, accurate away from 0.
    fn g_direct(x: f64) -> f64 {
        ((2.0 + x) / (2.0 - x)).ln() / x
    }

    #[test]
    fn kernel_special_values() {
        assert_eq!(eval_g(0.0), 1.0);
        assert_eq!(eval_g(2.5), f64::INFINITY);
        assert_eq!(eval_g(2.0), f64::INFINITY);
        assert_eq!(eval_g(-2.0), f64::INFINITY);
        assert!((eval_g(1.0) - 3f64.ln()).abs() < 1e-15);
        assert_eq!(eval_g(-1.0), eval_g(1.0));
    }

    #[test]
    fn kernel_matches_closed_form_away_from_zero() {
        for i in 1..200 {
            let x = -1.99 + 3.98 * i as f64 / 200.0;
            if x.abs() < 0.05 {
                continue;
            }
            assert!((eval_g(x) - g_direct(x)).abs() < 1e-13 * g_direct(x), "x = {x}");
        }
    }

    #[test]
    fn kernel_series_branch_is_continuous() {
        let below = eval_g(SERIES_SWITCH * (1.0 - 1e-9));
        let above = eval_g(SERIES_SWITCH * (1.0 + 1e-9));
        assert!((above - below).abs() < 1e-15);
    }

    #[test]
    fn integrands_on_simple_samples() {
        let c = shapes::unit_circle();
        let s = c.frenet_sample(0.2).unwrap();
        let v = sadowsky_integrand(&s).unwrap();
        assert!((v - 4.0 * PI * PI).abs() < 1e-10);
        assert_eq!(wunderlich_integrand(&s, 0.0).unwrap(), v);
        assert_eq!(wunderlich_integrand(&s, 1.7).unwrap(), v);

        let mut fake = s;
        fake.kappa = 1.0;
        fake.eta = 1.0;
        fake.eta_prime = 3.0;
        assert_eq!(sadowsky_integrand(&fake).unwrap(), 4.0);
        assert_eq!(wunderlich_integrand(&fake, 1.0).unwrap(), f64::INFINITY);
        assert!(wunderlich_integrand(&fake, -0.1).is_err());
        fake.kappa = 0.0;
        assert!(matches!(
            sadowsky_integrand(&fake),
            Err(RibbonError::InflectionPoint { .. })
        ));
    }

    #[test]
    fn circle_energy_is_four_pi_squared() {
        let q = QuadratureScheme::default();
        let f = sadowsky_energy(&shapes::unit_circle(), &q).unwrap();
        assert!((f.value() - 4.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn helix_energy_closed_form() {
        // kappa²(1+eta²)² = 1/a² on a helix
        let c = shapes::helix_unit_speed(0.5, 0.5, 1.0, 32).unwrap();
        let q = QuadratureScheme::default();
        let f = sadowsky_energy(&c, &q).unwrap().value();
        assert!((f - 4.0).abs() < 1e-8, "{f}");
        let fe = wunderlich_energy(&c, 1.7, &q).unwrap().value();
        assert!((fe - f).abs() < 1e-10);
    }

    #[test]
    fn straight_segment_is_inadmissible_but_regularizable() {
        let c = shapes::segment(Vector3::zeros(), Vector3::x()).unwrap();
        let q = QuadratureScheme::new(8, 8).unwrap();
        assert!(matches!(
            sadowsky_energy(&c, &q),
            Err(RibbonError::InflectionPoint { .. })
        ));
        let r = regularized_sadowsky_energy(&c, 1.0, &q).unwrap();
        assert!((r.value() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn regularized_matches_sadowsky_above_floor() {
        let q = QuadratureScheme::default();
        let c = shapes::unit_circle();
        let r = regularized_sadowsky_energy(&c, 1.0, &q).unwrap().value();
        assert!((r - 4.0 * PI * PI).abs() < 1e-10);
        let h = shapes::torsion_modulated(&Default::default(), 32).unwrap();
        let a = regularized_sadowsky_energy(&h, 0.5, &q).unwrap().value();
        let b = sadowsky_energy(&h, &q).unwrap().value();
        assert!((a - b).abs() < 1e-10 * b);
    }

    #[test]
    fn dimensional_energy_substitution() {
        assert!((dimensional_energy(4.0, 1.0, 0.05, 2.0).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(dimensional_energy(0.0, 1.0, 0.05, 2.0).unwrap(), 0.0);
        let e1 = dimensional_energy(3.0, 1.5, 0.1, 1.0).unwrap();
        let e2 = dimensional_energy(3.0, 3.0, 0.1, 1.0).unwrap();
        assert!((e2 - 2.0 * e1).abs() < 1e-15);
        assert!(dimensional_energy(1.0, 0.0, 0.1, 1.0).is_err());
        assert!(dimensional_energy(1.0, 1.0, -0.1, 1.0).is_err());
        assert!(dimensional_energy(1.0, 1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn gap_prediction_vanishes_without_eta_prime() {
        let q = QuadratureScheme::default();
        let h = shapes::helix_unit_speed(0.3, 0.2, 1.0, 32).unwrap();
        assert!(gamma_gap_prediction(&h, &q).unwrap().abs() < 1e-15);
        let c = shapes::unit_circle();
        assert_eq!(gamma_gap_prediction(&c, &q).unwrap(), 0.0);
    }

    #[test]
    fn extended_arithmetic() {
        let a = EnergyValue::finite(1.0);
        let b = EnergyValue::finite(2.0);
        let inf = EnergyValue::Infinite {
            blowup: Blowup {
                measure_estimate: 0.1,
                first_t: 0.3,
            },
        };
        assert_eq!((a.clone() + b.clone()).value(), 3.0);
        assert!(!(a.clone() + inf.clone()).is_finite());
        assert!(a < b && b < inf);
        let bigger = EnergyValue::Infinite {
            blowup: Blowup {
                measure_estimate: 0.2,
                first_t: 0.5,
            },
        };
        assert!(inf < bigger);
    }

    #[test]
    fn energy_report_json_shape() {
        let rep = EnergyReport {
            energy: EnergyValue::finite(1.5),
            quad: QuadratureScheme::new(4, 8).unwrap(),
        };
        let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["kind"], "finite");
        assert_eq!(v["value"], 1.5);
        assert_eq!(v["quad"]["panels"], 4);
        let inf = EnergyReport {
            energy: EnergyValue::Infinite {
                blowup: Blowup {
                    measure_estimate: 0.25,
                    first_t: 0.1,
                },
            },
            quad: QuadratureScheme::default(),
        };
        let v: serde_json::Value = serde_json::to_value(&inf).unwrap();
        assert_eq!(v["kind"], "infinite");
        assert_eq!(v["blowup"]["measure_estimate"], 0.25);
        assert!(v.get("value").is_none());
    }
}
