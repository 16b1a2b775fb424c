//! Ready-made centerlines: circles, helices, ellipses, clamped Hermite
//! arcs, torsion-modulated helices and seeded random perturbations.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curve::{BasisKind, BoundaryData, CurveSpec, EndCondition};
use crate::error::{Result, RibbonError};

/// Planar circle of the given radius in the xy-plane, one turn over `[0, 1]`.
pub fn circle(radius: f64) -> Result<CurveSpec> {
    let n = 9;
    let mut rows = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    rows[0][1] = radius;
    rows[1][2] = radius;
    CurveSpec::new(BasisKind::FourierClosed, rows, 2.0 * PI * radius.abs())
}

/// Circle of length one.
pub fn unit_circle() -> CurveSpec {
    circle(1.0 / (2.0 * PI)).expect("unit circle is valid")
}

/// Closed ellipse with semi-axes `a` (x) and `b` (y), scaled to unit length.
pub fn ellipse(a: f64, b: f64) -> Result<CurveSpec> {
    let n = 9;
    let mut rows = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    rows[0][1] = a;
    rows[1][2] = b;
    CurveSpec::new(BasisKind::FourierClosed, rows, 1.0)?.normalized_to_unit_length()
}

/// Straight segment from `a` to `b` (Chebyshev, eight coefficients).
pub fn segment(a: Vector3<f64>, b: Vector3<f64>) -> Result<CurveSpec> {
    let n = 8;
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut rows = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..3 {
        rows[i][0] = mid[i];
        rows[i][1] = half[i];
    }
    let len = (b - a).norm();
    CurveSpec::new(BasisKind::ChebyshevOpen, rows, if len > 0.0 { len } else { 1.0 })
}

/// Circular helix of radius `a` and pitch parameter `b`, parameterized
/// proportionally to arclength with total length `length`.
pub fn helix_unit_speed(a: f64, b: f64, length: f64, n: usize) -> Result<CurveSpec> {
    let c = (a * a + b * b).sqrt();
    CurveSpec::fit_chebyshev(
        |t| {
            let s = length * t;
            Vector3::new(a * (s / c).cos(), a * (s / c).sin(), b * s / c)
        },
        n,
        length,
    )
}

/// `t -> (a cos ωt, a sin ωt, b ω t)`.
pub fn helix_general(a: f64, b: f64, omega: f64, n: usize) -> Result<CurveSpec> {
    CurveSpec::fit_chebyshev(
        |t| Vector3::new(a * (omega * t).cos(), a * (omega * t).sin(), b * omega * t),
        n,
        1.0,
    )
}

/// Parameters of a helix whose height carries an extra sinusoid, which makes
/// `eta'` vary along the curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorsionModulated {
    pub radius: f64,
    pub pitch: f64,
    pub turns: f64,
    pub modulation: f64,
    pub modulation_waves: f64,
}

impl Default for TorsionModulated {
    fn default() -> Self {
        Self {
            radius: 0.12,
            pitch: 0.06,
            turns: 1.0,
            modulation: 0.01,
            modulation_waves: 1.0,
        }
    }
}

/// Torsion-modulated helix, normalized to unit length and reparameterized
/// by arclength.
pub fn torsion_modulated(p: &TorsionModulated, n: usize) -> Result<CurveSpec> {
    let om = 2.0 * PI * p.turns;
    let nu = 2.0 * PI * p.modulation_waves;
    let raw = CurveSpec::fit_chebyshev(
        |t| {
            Vector3::new(
                p.radius * (om * t).cos(),
                p.radius * (om * t).sin(),
                p.pitch * om * t + p.modulation * (nu * t).sin(),
            )
        },
        n,
        1.0,
    )?;
    raw.normalized_to_unit_length()?.reparameterize_arclength(n)
}

/// Cubic Hermite arc matching clamped end data, tangents scaled to the
/// chord length, resampled into `n` Chebyshev coefficients with the end
/// conditions enforced exactly. Target length 1.
pub fn hermite_clamped(bd: BoundaryData, n: usize) -> Result<CurveSpec> {
    let p0 = bd.start.position();
    let p1 = bd.end.position();
    let chord = (p1 - p0).norm().max(1e-3);
    let m0 = bd.start.tangent() * chord.max(1.0);
    let m1 = bd.end.tangent() * chord.max(1.0);
    let c = CurveSpec::fit_chebyshev(
        |t| {
            let t2 = t * t;
            let t3 = t2 * t;
            p0 * (2.0 * t3 - 3.0 * t2 + 1.0)
                + m0 * (t3 - 2.0 * t2 + t)
                + p1 * (-2.0 * t3 + 3.0 * t2)
                + m1 * (t3 - t2)
        },
        n,
        1.0,
    )?;
    c.with_boundary_data(bd)?.enforce_boundary()
}

/// Unit-length helix (radius 0.15, pitch 0.08) pushed off itself by
/// `bump · t²(1-t)²`, clamped to the helix end positions and tangents, and
/// reparameterized by arclength. A nonplanar start for clamped minimization.
///
/// Keep `n` small (about 8 to 12): the coefficient Hessian of the energy
/// grows roughly like `n¹²`.
pub fn bumped_clamped_helix(bump: Vector3<f64>, n: usize) -> Result<CurveSpec> {
    let h = helix_unit_speed(0.15, 0.08, 1.0, n)?;
    let j0 = h.evaluate_derivatives(0.0)?;
    let j1 = h.evaluate_derivatives(1.0)?;
    let bd = BoundaryData {
        start: EndCondition::new(j0.position, j0.d1),
        end: EndCondition::new(j1.position, j1.d1),
    };
    CurveSpec::fit_chebyshev(|t| h.position(t) + bump * (t * t * (1.0 - t) * (1.0 - t)), n, 1.0)?
        .with_boundary_data(bd)?
        .enforce_boundary()?
        .reparameterize_arclength(n)
}

/// Random smooth perturbation of a torsion-modulated helix. Amplitudes are
/// small enough that curvature stays well away from zero.
pub fn random_admissible<R: Rng>(rng: &mut R, n: usize) -> Result<CurveSpec> {
    let p = TorsionModulated {
        radius: rng.gen_range(0.10..0.16),
        pitch: rng.gen_range(0.02..0.08),
        turns: rng.gen_range(0.8..1.3),
        modulation: rng.gen_range(0.002..0.012),
        modulation_waves: rng.gen_range(0.5..1.5),
    };
    let base = torsion_modulated(&p, n)?;
    let mut flat = base.coefficients_flat();
    let m = base.n_coefficients();
    for i in 0..3 {
        for k in 2..6 {
            flat[i * m + k] += rng.gen_range(-1.0..1.0) * 2e-3 / (k * k) as f64;
        }
    }
    let c = base.with_coefficients_flat(&flat)?;
    let min_kappa = (0..=512)
        .map(|i| crate::curve::FrenetGeometry::from_jet(&c.jet(i as f64 / 512.0)).kappa)
        .fold(f64::INFINITY, f64::min);
    if min_kappa < 1.0 {
        return Err(RibbonError::DegenerateCurve(format!(
            "random curve too flat (min kappa {min_kappa})"
        )));
    }
    c.normalized_to_unit_length()
}

/// Unit-speed curve of length one with prescribed curvature `kappa(s)` and
/// torsion `tau(s)`, obtained by integrating the Frenet equations from the
/// standard frame at the origin (RK4) and interpolating with `n` Chebyshev
/// coefficients.
pub fn frenet_integrated<K, T>(kappa: K, tau: T, n: usize) -> Result<CurveSpec>
where
    K: Fn(f64) -> f64,
    T: Fn(f64) -> f64,
{
    if n < crate::curve::MIN_COEFFICIENTS {
        return Err(RibbonError::InvalidCurve(format!("need at least 8 coefficients, got {n}")));
    }
    let m = n - 1;
    let mut nodes: Vec<f64> = (0..n)
        .map(|j| 0.5 * ((PI * j as f64 / m as f64).cos() + 1.0))
        .collect();
    nodes.sort_by(f64::total_cmp);

    // state: r, T, N, B
    type State = [Vector3<f64>; 4];
    let rhs = |s: f64, y: &State| -> State {
        let (k, t) = (kappa(s), tau(s));
        [y[1], y[2] * k, -y[1] * k + y[3] * t, -y[2] * t]
    };
    let axpy = |y: &State, h: f64, k: &State| -> State {
        [y[0] + k[0] * h, y[1] + k[1] * h, y[2] + k[2] * h, y[3] + k[3] * h]
    };
    let mut y: State = [Vector3::zeros(), Vector3::x(), Vector3::y(), Vector3::z()];
    let mut s = 0.0;
    let mut samples = Vec::with_capacity(n);
    const H_MAX: f64 = 1.0 / 8192.0;
    for &target in &nodes {
        let steps = ((target - s) / H_MAX).ceil() as usize;
        let h = if steps > 0 { (target - s) / steps as f64 } else { 0.0 };
        for _ in 0..steps {
            let k1 = rhs(s, &y);
            let k2 = rhs(s + 0.5 * h, &axpy(&y, 0.5 * h, &k1));
            let k3 = rhs(s + 0.5 * h, &axpy(&y, 0.5 * h, &k2));
            let k4 = rhs(s + h, &axpy(&y, h, &k3));
            for i in 0..4 {
                y[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
            }
            s += h;
        }
        s = target;
        samples.push((target, y[0]));
    }
    let lookup = |t: f64| {
        samples
            .iter()
            .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
            .map(|p| p.1)
            .unwrap_or_else(Vector3::zeros)
    };
    CurveSpec::fit_chebyshev(lookup, n, 1.0)
}

/// Curve of constant curvature `kappa0` with `eta(s) = eta0 + amplitude
/// sin 2πs`, so that `max |eta'| = 2π |amplitude|`, attained at `s = 0`,
/// `1/2` and `1`.
pub fn eta_sinusoid(kappa0: f64, eta0: f64, amplitude: f64, n: usize) -> Result<CurveSpec> {
    if !(kappa0 > 0.0 && kappa0.is_finite() && eta0.is_finite() && amplitude.is_finite()) {
        return Err(RibbonError::domain("eta_sinusoid needs kappa0 > 0 and finite parameters"));
    }
    frenet_integrated(
        |_| kappa0,
        |s| kappa0 * (eta0 + amplitude * (2.0 * PI * s).sin()),
        n,
    )
}
