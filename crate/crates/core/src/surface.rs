//! The rectifying developable `x(s, v) = r(s) + v (b + η t)` of a centerline:
//! surface points, the nonvanishing principal curvature, the full two
//! dimensional bending energy and triangle meshes.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::curve::{CurveSpec, FrenetGeometry, FrenetSample, KAPPA_FLOOR_EVAL};
use crate::energy::{
    admissible_nodes, blowup_scan, sadowsky_energy, Blowup, EnergyValue, BLOWUP_GRID,
};
use crate::error::{Result, RibbonError};
use crate::quadrature::{CompensatedSum, QuadratureScheme};

const EDGE_TOL: f64 = 1e-12;

/// Point of the rectifying developable at parameter `t` and width
/// coordinate `v`, `|v| ≤ half_width`.
pub fn ruled_surface_point(curve: &CurveSpec, t: f64, v: f64, half_width: f64) -> Result<Vector3<f64>> {
    if !(v.abs() <= half_width) {
        return Err(RibbonError::domain(format!(
            "width coordinate {v} outside [-{half_width}, {half_width}]"
        )));
    }
    let (tangent, binormal, eta) = frame(curve, t)?;
    Ok(curve.position(t) + v * (binormal + eta * tangent))
}

/// Unit tangent, unit binormal and `eta` at `t`.
pub fn frame(curve: &CurveSpec, t: f64) -> Result<(Vector3<f64>, Vector3<f64>, f64)> {
    let (tangent, binormal) = curve.tangent_binormal(t)?;
    let g = curve.geometry_checked(t, KAPPA_FLOOR_EVAL)?;
    Ok((tangent, binormal, g.eta()))
}

/// Direction of the ruling through `r(t)`: `b + η t`, of length `sqrt(1+η²)`.
pub fn ruling_direction(curve: &CurveSpec, t: f64) -> Result<Vector3<f64>> {
    let (tangent, binormal, eta) = frame(curve, t)?;
    Ok(binormal + eta * tangent)
}

/// `κ₁ = κ(1+η²) / |1 + v η'|`.
pub fn principal_curvature(sample: &FrenetSample, v: f64) -> Result<f64> {
    if !(sample.kappa >= KAPPA_FLOOR_EVAL) {
        return Err(RibbonError::InflectionPoint {
            t: sample.t_param,
            kappa: sample.kappa,
        });
    }
    kappa1(sample.kappa, sample.eta, sample.eta_prime, v).ok_or(RibbonError::EdgeOfRegression {
        t: sample.t_param,
        v,
    })
}

fn kappa1(kappa: f64, eta: f64, eta_prime: f64, v: f64) -> Option<f64> {
    let denom = (1.0 + v * eta_prime).abs();
    if denom < EDGE_TOL {
        None
    } else {
        Some(kappa * (1.0 + eta * eta) / denom)
    }
}

/// Width-averaged bending energy of the ribbon of aspect ratio `eps`:
/// `(1/ε) ∫₀¹ ∫_{-ε/2}^{ε/2} κ₁² |1 + v η'| dv ds`, which is `2E / (εD)`.
///
/// Infinite, with a blowup diagnostic, when the edge of regression enters
/// the strip on a set of positive measure. `eps = 0` returns the Sadowsky
/// value, the limit of the width average.
pub fn surface_energy(
    curve: &CurveSpec,
    eps: f64,
    quad: &(QuadratureScheme, QuadratureScheme),
) -> Result<EnergyValue> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(RibbonError::domain(format!("eps must be finite and >= 0, got {eps}")));
    }
    let (quad_s, quad_v) = quad;
    quad_v.validate()?;
    if eps == 0.0 {
        return sadowsky_energy(curve, quad_s);
    }
    let nodes = admissible_nodes(curve, quad_s)?;
    let half = 0.5 * eps;
    let hits: Vec<f64> = nodes
        .iter()
        .filter(|n| (half * n.eta_prime).abs() >= 1.0)
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
    }
    // width rule on [-eps/2, eps/2]
    let v_rule: Vec<(f64, f64)> = quad_v
        .rule()
        .into_iter()
        .map(|(u, w)| (eps * (u - 0.5), eps * w))
        .collect();
    let mut total = CompensatedSum::new();
    for n in &nodes {
        if (half * n.eta_prime).abs() >= 1.0 {
            continue;
        }
        let mut across = CompensatedSum::new();
        for &(v, w) in &v_rule {
            let area = (1.0 + v * n.eta_prime).abs();
            let k1 = kappa1(n.kappa, n.eta, n.eta_prime, v)
                .ok_or(RibbonError::EdgeOfRegression { t: n.t, v })?;
            across.add(w * k1 * k1 * area);
        }
        total.add(n.ds * across.value() / eps);
    }
    Ok(EnergyValue::Finite {
        value: total.value(),
        warnings,
    })
}

/// Triangulated ribbon on an `n_s × n_v` grid of `(t, v)` samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RibbonMesh {
    pub vertices: Vec<Vector3<f64>>,
    pub faces: Vec<[usize; 3]>,
    pub per_vertex_kappa1: Vec<f64>,
    pub grid_shape: (usize, usize),
    /// Whether the length direction wraps around (closed centerline).
    pub closed: bool,
}

impl RibbonMesh {
    pub fn vertex_index(&self, i: usize, j: usize) -> usize {
        i * self.grid_shape.1 + j
    }

    /// Angle defect `2π - Σ angles` at every interior vertex, as
    /// `(vertex index, defect)`.
    pub fn angle_defects(&self) -> Vec<(usize, f64)> {
        let mut sums = vec![0.0; self.vertices.len()];
        for f in &self.faces {
            for c in 0..3 {
                let p = self.vertices[f[c]];
                let a = self.vertices[f[(c + 1) % 3]] - p;
                let b = self.vertices[f[(c + 2) % 3]] - p;
                sums[f[c]] += a.angle(&b);
            }
        }
        let (ns, nv) = self.grid_shape;
        let rows: Box<dyn Iterator<Item = usize>> = if self.closed {
            Box::new(0..ns)
        } else {
            Box::new(1..ns.saturating_sub(1))
        };
        let mut out = Vec::new();
        for i in rows {
            for j in 1..nv - 1 {
                let k = self.vertex_index(i, j);
                out.push((k, 2.0 * PI - sums[k]));
            }
        }
        out
    }

    pub fn max_angle_defect(&self) -> f64 {
        self.angle_defects()
            .into_iter()
            .map(|(_, d)| d.abs())
            .fold(0.0, f64::max)
    }
}

/// Samples the ribbon of aspect ratio `eps` (half-width `eps / 2`).
///
/// Faces are two triangles per grid cell split along the lower-left to
/// upper-right diagonal; closed centerlines wrap in the length direction.
pub fn build_mesh(curve: &CurveSpec, eps: f64, n_s: usize, n_v: usize) -> Result<RibbonMesh> {
    if n_s < 16 || n_v < 3 {
        return Err(RibbonError::domain(format!(
            "mesh needs n_s >= 16 and n_v >= 3, got ({n_s}, {n_v})"
        )));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(RibbonError::domain(format!("eps must be positive, got {eps}")));
    }
    let closed = curve.is_closed();
    let half = 0.5 * eps;
    let t_of = |i: usize| {
        if closed {
            i as f64 / n_s as f64
        } else {
            i as f64 / (n_s - 1) as f64
        }
    };
    let mut vertices = Vec::with_capacity(n_s * n_v);
    let mut k1 = Vec::with_capacity(n_s * n_v);
    for i in 0..n_s {
        let t = t_of(i);
        let (tangent, binormal) = curve.tangent_binormal(t)?;
        let g = FrenetGeometry::from_jet(&curve.jet(t));
        let (eta, eta_prime) = (g.eta(), g.eta_prime());
        let ruling = binormal + eta * tangent;
        let r = curve.position(t);
        for j in 0..n_v {
            let v = -half + eps * j as f64 / (n_v - 1) as f64;
            vertices.push(r + v * ruling);
            k1.push(kappa1(g.kappa, eta, eta_prime, v).ok_or(RibbonError::EdgeOfRegression { t, v })?);
        }
    }
    let cells_s = if closed { n_s } else { n_s - 1 };
    let mut faces = Vec::with_capacity(2 * cells_s * (n_v - 1));
    for i in 0..cells_s {
        let i2 = (i + 1) % n_s;
        for j in 0..n_v - 1 {
            let ll = i * n_v + j;
            let lr = i2 * n_v + j;
            let ul = i * n_v + j + 1;
            let ur = i2 * n_v + j + 1;
            faces.push([ll, lr, ur]);
            faces.push([ll, ur, ul]);
        }
    }
    Ok(RibbonMesh {
        vertices,
        faces,
        per_vertex_kappa1: k1,
        grid_shape: (n_s, n_v),
        closed,
    })
}
