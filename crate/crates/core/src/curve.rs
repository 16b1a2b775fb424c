//! Smooth parametric centerlines on `t ∈ [0, 1]` in a global analytic basis,
//! with exact derivatives up to order four and the Frenet-level quantities
//! (`kappa`, `tau`, `eta = tau / kappa` and the arclength derivative `eta'`).
//!
//! Open curves use a Chebyshev series in `x = 2t - 1`; closed curves use a
//! real Fourier series in `2πt`. Frenet quantities are computed with the
//! general-parameter formulas so a curve need not be parameterized by
//! arclength; [`CurveSpec::reparameterize_arclength`] produces one that is.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RibbonError};
use crate::quadrature::{compensated_sum, gauss_legendre};

/// Curvature below which a sample is treated as an inflection point.
pub const KAPPA_FLOOR_EVAL: f64 = 1e-10;

/// Minimum number of coefficients per spatial component.
pub const MIN_COEFFICIENTS: usize = 8;

const UNIT_TANGENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    ChebyshevOpen,
    FourierClosed,
}

/// Position plus unit tangent direction at one end of a clamped curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndCondition {
    pub position: [f64; 3],
    pub tangent: [f64; 3],
}

impl EndCondition {
    pub fn new(position: Vector3<f64>, tangent: Vector3<f64>) -> Self {
        Self {
            position: position.into(),
            tangent: tangent.normalize().into(),
        }
    }

    pub fn position(&self) -> Vector3<f64> {
        Vector3::from(self.position)
    }

    pub fn tangent(&self) -> Vector3<f64> {
        Vector3::from(self.tangent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryData {
    pub start: EndCondition,
    pub end: EndCondition,
}

/// Curve point and its first four parametric derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub position: Vector3<f64>,
    pub d1: Vector3<f64>,
    pub d2: Vector3<f64>,
    pub d3: Vector3<f64>,
    pub d4: Vector3<f64>,
}

/// On-disk form of a curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    pub basis_kind: BasisKind,
    pub closure: bool,
    pub coefficients: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_data: Option<BoundaryData>,
    pub target_length: f64,
}

/// A smooth space curve `c: [0, 1] -> R³`.
///
/// Coefficient layout per component: Chebyshev `a_0 .. a_{N-1}` of
/// `Σ a_k T_k(2t - 1)`; Fourier `[a_0, a_1, b_1, .., a_M, b_M]` of
/// `a_0 + Σ a_k cos 2πkt + b_k sin 2πkt` (so `N = 2M + 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveFile", into = "CurveFile")]
pub struct CurveSpec {
    basis: BasisKind,
    coefficients: [Vec<f64>; 3],
    boundary: Option<BoundaryData>,
    target_length: f64,
    // Chebyshev derivative series in t, orders 1..=4.
    derived: Vec<[Vec<f64>; 3]>,
}

impl TryFrom<CurveFile> for CurveSpec {
    type Error = RibbonError;

    fn try_from(f: CurveFile) -> Result<Self> {
        if f.closure != (f.basis_kind == BasisKind::FourierClosed) {
            return Err(RibbonError::InvalidCurve(
                "closure must be true exactly for fourier_closed curves".into(),
            ));
        }
        let rows: [Vec<f64>; 3] = f.coefficients.try_into().map_err(|v: Vec<Vec<f64>>| {
            RibbonError::InvalidCurve(format!("expected 3 coefficient rows, got {}", v.len()))
        })?;
        let mut c = CurveSpec::new(f.basis_kind, rows, f.target_length)?;
        if let Some(bd) = f.boundary_data {
            c = c.with_boundary_data(bd)?;
        }
        Ok(c)
    }
}

impl From<CurveSpec> for CurveFile {
    fn from(c: CurveSpec) -> Self {
        CurveFile {
            basis_kind: c.basis,
            closure: c.is_closed(),
            coefficients: c.coefficients.to_vec(),
            boundary_data: c.boundary,
            target_length: c.target_length,
        }
    }
}

impl CurveSpec {
    pub fn new(basis: BasisKind, coefficients: [Vec<f64>; 3], target_length: f64) -> Result<Self> {
        let n = coefficients[0].len();
        if coefficients.iter().any(|r| r.len() != n) {
            return Err(RibbonError::InvalidCurve(
                "coefficient rows must have equal length".into(),
            ));
        }
        if n < MIN_COEFFICIENTS {
            return Err(RibbonError::InvalidCurve(format!(
                "need at least {MIN_COEFFICIENTS} coefficients per component, got {n}"
            )));
        }
        if basis == BasisKind::FourierClosed && n.is_multiple_of(2) {
            return Err(RibbonError::InvalidCurve(
                "fourier_closed curves need an odd coefficient count 2M + 1".into(),
            ));
        }
        if coefficients.iter().flatten().any(|c| !c.is_finite()) {
            return Err(RibbonError::InvalidCurve("non-finite coefficient".into()));
        }
        if !(target_length.is_finite() && target_length > 0.0) {
            return Err(RibbonError::InvalidCurve(format!(
                "target_length must be positive, got {target_length}"
            )));
        }
        let derived = match basis {
            BasisKind::ChebyshevOpen => chebyshev_derivative_tables(&coefficients),
            BasisKind::FourierClosed => Vec::new(),
        };
        Ok(Self {
            basis,
            coefficients,
            boundary: None,
            target_length,
            derived,
        })
    }

    pub fn with_boundary_data(mut self, bd: BoundaryData) -> Result<Self> {
        if self.is_closed() {
            return Err(RibbonError::InvalidCurve(
                "boundary data only applies to open curves".into(),
            ));
        }
        for end in [bd.start, bd.end] {
            let n = end.tangent().norm();
            if (n - 1.0).abs() > UNIT_TANGENT_TOL {
                return Err(RibbonError::InvalidCurve(format!(
                    "boundary tangent must have unit norm, got {n}"
                )));
            }
            if end.position.iter().any(|x| !x.is_finite()) {
                return Err(RibbonError::InvalidCurve("non-finite boundary position".into()));
            }
        }
        self.boundary = Some(bd);
        Ok(self)
    }

    pub fn basis(&self) -> BasisKind {
        self.basis
    }

    pub fn is_closed(&self) -> bool {
        self.basis == BasisKind::FourierClosed
    }

    pub fn coefficients(&self) -> &[Vec<f64>; 3] {
        &self.coefficients
    }

    pub fn n_coefficients(&self) -> usize {
        self.coefficients[0].len()
    }

    pub fn boundary_data(&self) -> Option<&BoundaryData> {
        self.boundary.as_ref()
    }

    pub fn target_length(&self) -> f64 {
        self.target_length
    }

    /// Coefficients flattened as `[x.., y.., z..]`.
    pub fn coefficients_flat(&self) -> Vec<f64> {
        self.coefficients.concat()
    }

    /// Same basis and metadata with new flattened coefficients.
    pub fn with_coefficients_flat(&self, flat: &[f64]) -> Result<Self> {
        let n = self.n_coefficients();
        if flat.len() != 3 * n {
            return Err(RibbonError::InvalidCurve(format!(
                "expected {} coefficients, got {}",
                3 * n,
                flat.len()
            )));
        }
        let rows = [
            flat[..n].to_vec(),
            flat[n..2 * n].to_vec(),
            flat[2 * n..].to_vec(),
        ];
        let mut c = Self::new(self.basis, rows, self.target_length)?;
        c.boundary = self.boundary;
        Ok(c)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    // ---------------------------------------------------------------
    // Construction by interpolation
    // ---------------------------------------------------------------

    /// Chebyshev interpolant of `f` at `n` Chebyshev–Lobatto points.
    pub fn fit_chebyshev<F>(f: F, n: usize, target_length: f64) -> Result<Self>
    where
        F: Fn(f64) -> Vector3<f64>,
    {
        if n < MIN_COEFFICIENTS {
            return Err(RibbonError::InvalidCurve(format!(
                "need at least {MIN_COEFFICIENTS} coefficients, got {n}"
            )));
        }
        let m = n - 1;
        let values: Vec<Vector3<f64>> = (0..n)
            .map(|j| {
                let x = (PI * j as f64 / m as f64).cos();
                f(0.5 * (x + 1.0))
            })
            .collect();
        let mut rows = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for k in 0..n {
            let mut acc = [0.0; 3];
            for (j, v) in values.iter().enumerate() {
                let w = if j == 0 || j == m { 0.5 } else { 1.0 };
                let ck = w * (PI * ((j * k) % (2 * m)) as f64 / m as f64).cos();
                for i in 0..3 {
                    acc[i] += ck * v[i];
                }
            }
            let scale = if k == 0 || k == m { 1.0 / m as f64 } else { 2.0 / m as f64 };
            for i in 0..3 {
                rows[i][k] = scale * acc[i];
            }
        }
        chop_noise_tail(&mut rows);
        Self::new(BasisKind::ChebyshevOpen, rows, target_length)
    }

    /// Truncated Fourier series with `modes` harmonics of a 1-periodic `f`,
    /// from an oversampled equispaced DFT.
    pub fn fit_fourier<F>(f: F, modes: usize, target_length: f64) -> Result<Self>
    where
        F: Fn(f64) -> Vector3<f64>,
    {
        let n = 2 * modes + 1;
        if n < MIN_COEFFICIENTS {
            return Err(RibbonError::InvalidCurve(format!(
                "need at least {MIN_COEFFICIENTS} coefficients, got {n}"
            )));
        }
        let samples = (8 * modes + 8).max(64);
        let values: Vec<Vector3<f64>> =
            (0..samples).map(|j| f(j as f64 / samples as f64)).collect();
        let mut rows = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..3 {
            rows[i][0] = compensated_sum(values.iter().map(|v| v[i])) / samples as f64;
        }
        for k in 1..=modes {
            for i in 0..3 {
                let (mut a, mut b) = (0.0, 0.0);
                for (j, v) in values.iter().enumerate() {
                    let ang = 2.0 * PI * ((k * j) % samples) as f64 / samples as f64;
                    let (s, c) = ang.sin_cos();
                    a += v[i] * c;
                    b += v[i] * s;
                }
                rows[i][2 * k - 1] = 2.0 * a / samples as f64;
                rows[i][2 * k] = 2.0 * b / samples as f64;
            }
        }
        Self::new(BasisKind::FourierClosed, rows, target_length)
    }

    // ---------------------------------------------------------------
    // Evaluation
    // ---------------------------------------------------------------

    /// Point and parametric derivatives of orders 1–4 at `t ∈ [0, 1]`.
    pub fn evaluate_derivatives(&self, t: f64) -> Result<Jet> {
        if !(0.0..=1.0).contains(&t) {
            return Err(RibbonError::domain(format!("parameter t = {t} outside [0, 1]")));
        }
        Ok(self.jet(t))
    }

    /// Unchecked evaluation used on quadrature nodes.
    pub(crate) fn jet(&self, t: f64) -> Jet {
        match self.basis {
            BasisKind::ChebyshevOpen => {
                let x = 2.0 * t - 1.0;
                let ev = |rows: &[Vec<f64>; 3]| {
                    Vector3::new(clenshaw(&rows[0], x), clenshaw(&rows[1], x), clenshaw(&rows[2], x))
                };
                Jet {
                    position: ev(&self.coefficients),
                    d1: ev(&self.derived[0]),
                    d2: ev(&self.derived[1]),
                    d3: ev(&self.derived[2]),
                    d4: ev(&self.derived[3]),
                }
            }
            BasisKind::FourierClosed => fourier_jet(&self.coefficients, t),
        }
    }

    pub fn position(&self, t: f64) -> Vector3<f64> {
        self.jet(t).position
    }

    /// Speed `|c'(t)|`.
    pub fn speed(&self, t: f64) -> f64 {
        self.jet(t).d1.norm()
    }

    /// Total length `∫ |c'| dt`.
    pub fn length(&self) -> f64 {
        self.arclength_between(0.0, 1.0)
    }

    /// `∫_a^b |c'| dt` with a fixed composite 16-point rule.
    pub fn arclength_between(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let panels = (((b - a) * 64.0).ceil() as usize).max(1);
        let (x, w) = gauss_legendre(16);
        let h = (b - a) / panels as f64;
        compensated_sum((0..panels).flat_map(|p| {
            let lo = a + p as f64 * h;
            x.iter().zip(&w).map(move |(xi, wi)| {
                let t = lo + 0.5 * h * (xi + 1.0);
                0.5 * h * wi * self.speed(t)
            })
        }))
    }

    /// Full Frenet-level sample at `t` with the default curvature floor.
    pub fn frenet_sample(&self, t: f64) -> Result<FrenetSample> {
        self.frenet_sample_with_floor(t, KAPPA_FLOOR_EVAL)
    }

    pub fn frenet_sample_with_floor(&self, t: f64, kappa_floor: f64) -> Result<FrenetSample> {
        let jet = self.evaluate_derivatives(t)?;
        let g = FrenetGeometry::from_jet(&jet);
        if g.speed <= 0.0 {
            return Err(RibbonError::DegenerateCurve(format!("zero speed at t = {t}")));
        }
        if !(g.kappa >= kappa_floor) {
            return Err(RibbonError::InflectionPoint { t, kappa: g.kappa });
        }
        Ok(FrenetSample {
            t_param: t,
            arclength_s: self.arclength_between(0.0, t),
            position: jet.position,
            d1: jet.d1,
            d2: jet.d2,
            d3: jet.d3,
            d4: jet.d4,
            speed: g.speed,
            kappa: g.kappa,
            tau: g.tau(),
            eta: g.eta(),
            eta_prime: g.eta_prime(),
        })
    }

    /// Frenet geometry at `t`, failing at inflection points. Skips the
    /// arclength integral of [`CurveSpec::frenet_sample`].
    pub(crate) fn geometry_checked(&self, t: f64, kappa_floor: f64) -> Result<FrenetGeometry> {
        let g = FrenetGeometry::from_jet(&self.jet(t));
        if !(g.kappa >= kappa_floor) {
            return Err(RibbonError::InflectionPoint { t, kappa: g.kappa });
        }
        Ok(g)
    }

    /// Unit tangent and unit binormal at `t`.
    pub fn tangent_binormal(&self, t: f64) -> Result<(Vector3<f64>, Vector3<f64>)> {
        let jet = self.evaluate_derivatives(t)?;
        let w = jet.d1.cross(&jet.d2);
        let g = FrenetGeometry::from_jet(&jet);
        if !(g.kappa >= KAPPA_FLOOR_EVAL) {
            return Err(RibbonError::InflectionPoint { t, kappa: g.kappa });
        }
        Ok((jet.d1 / g.speed, w / w.norm()))
    }

    // ---------------------------------------------------------------
    // Transformations
    // ---------------------------------------------------------------

    /// Applies `x -> R x + shift` to the curve (and to boundary data).
    pub fn transformed(&self, rotation: &Matrix3<f64>, shift: &Vector3<f64>) -> Result<Self> {
        let n = self.n_coefficients();
        let mut rows = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for k in 0..n {
            let v = Vector3::new(
                self.coefficients[0][k],
                self.coefficients[1][k],
                self.coefficients[2][k],
            );
            let mut r = rotation * v;
            if self.is_constant_mode(k) {
                r += shift;
            }
            for i in 0..3 {
                rows[i][k] = r[i];
            }
        }
        let mut c = Self::new(self.basis, rows, self.target_length)?;
        if let Some(bd) = self.boundary {
            let map = |e: EndCondition| EndCondition {
                position: (rotation * e.position() + shift).into(),
                tangent: (rotation * e.tangent()).into(),
            };
            c.boundary = Some(BoundaryData {
                start: map(bd.start),
                end: map(bd.end),
            });
        }
        Ok(c)
    }

    /// Uniform scaling about the origin. Target length is scaled too.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let rows = self
            .coefficients
            .clone()
            .map(|r| r.into_iter().map(|c| c * factor).collect());
        let mut c = Self::new(self.basis, rows, self.target_length * factor.abs())?;
        if let Some(bd) = self.boundary {
            let map = |e: EndCondition| EndCondition {
                position: (e.position() * factor).into(),
                tangent: (e.tangent() * factor.signum()).into(),
            };
            c.boundary = Some(BoundaryData {
                start: map(bd.start),
                end: map(bd.end),
            });
        }
        Ok(c)
    }

    /// Rescaled so that its length is one (target length set to 1).
    pub fn normalized_to_unit_length(&self) -> Result<Self> {
        let len = self.length();
        if !(len > 0.0) {
            return Err(RibbonError::DegenerateCurve("zero length".into()));
        }
        let mut c = self.scaled(1.0 / len)?;
        c.target_length = 1.0;
        Ok(c)
    }

    fn is_constant_mode(&self, k: usize) -> bool {
        k == 0
    }

    /// Chebyshev curve with the given coefficient count holding `self`
    /// exactly (zero padding) or truncated.
    pub fn resized(&self, n: usize) -> Result<Self> {
        let rows = self.coefficients.clone().map(|mut r| {
            r.resize(n, 0.0);
            r
        });
        let mut c = Self::new(self.basis, rows, self.target_length)?;
        c.boundary = self.boundary;
        Ok(c)
    }

    // ---------------------------------------------------------------
    // Boundary conditions
    // ---------------------------------------------------------------

    /// Endpoint values of each coefficient's basis function and first
    /// derivative: rows `T_k(0), T_k(1), T_k'(0), T_k'(1)` in `t`.
    pub(crate) fn chebyshev_endpoint_rows(n: usize) -> [Vec<f64>; 4] {
        let mut r = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for k in 0..n {
            let kf = k as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            r[0][k] = sign;
            r[1][k] = 1.0;
            r[2][k] = -sign * 2.0 * kf * kf;
            r[3][k] = 2.0 * kf * kf;
        }
        r
    }

    /// Smallest (high-mode weighted) coefficient correction making the
    /// clamped end data hold exactly: `c(0) = a`, `c(1) = b` and
    /// `c'(0) ∥ t₀`, `c'(1) ∥ t₁` at the current end speeds.
    pub fn enforce_boundary(&self) -> Result<Self> {
        let Some(bd) = self.boundary else {
            return Ok(self.clone());
        };
        if self.is_closed() {
            return Ok(self.clone());
        }
        let n = self.n_coefficients();
        let rows = Self::chebyshev_endpoint_rows(n);
        let j0 = self.jet(0.0);
        let j1 = self.jet(1.0);
        let lam = |d: Vector3<f64>, t: Vector3<f64>| {
            let p = d.dot(&t);
            if p > 0.0 {
                p
            } else {
                d.norm().max(1e-12)
            }
        };
        let l0 = lam(j0.d1, bd.start.tangent());
        let l1 = lam(j1.d1, bd.end.tangent());
        let weight = |k: usize| (1.0 + (k * k) as f64).powi(4);
        let cmat = DMatrix::from_fn(4, n, |r, k| rows[r][k]);
        let winv = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 / weight(i) } else { 0.0 });
        let gram = &cmat * &winv * cmat.transpose();
        let gram_inv = gram
            .try_inverse()
            .ok_or_else(|| RibbonError::InvalidCurve("singular boundary system".into()))?;
        let mut out = self.coefficients.clone();
        for i in 0..3 {
            let target = DVector::from_vec(vec![
                bd.start.position[i],
                bd.end.position[i],
                l0 * bd.start.tangent[i],
                l1 * bd.end.tangent[i],
            ]);
            let row = DVector::from_column_slice(&out[i]);
            let resid = target - &cmat * &row;
            let delta = &winv * cmat.transpose() * (&gram_inv * resid);
            for k in 0..n {
                out[i][k] += delta[k];
            }
        }
        let mut c = Self::new(self.basis, out, self.target_length)?;
        c.boundary = self.boundary;
        Ok(c)
    }

    // ---------------------------------------------------------------
    // Arclength reparameterization
    // ---------------------------------------------------------------

    /// Refit in the same basis, with `samples` coefficients per component,
    /// so that the new parameter is proportional to arclength.
    pub fn reparameterize_arclength(&self, samples: usize) -> Result<Self> {
        let table = ArclengthTable::build(self)?;
        let total = table.total();
        let inv = |sigma: f64| self.position(table.invert(self, sigma * total));
        let mut out = match self.basis {
            BasisKind::ChebyshevOpen => Self::fit_chebyshev(inv, samples, self.target_length)?,
            BasisKind::FourierClosed => {
                let modes = samples.saturating_sub(1) / 2;
                Self::fit_fourier(inv, modes, self.target_length)?
            }
        };
        if let Some(bd) = self.boundary {
            out = out.with_boundary_data(bd)?.enforce_boundary()?;
        }
        Ok(out)
    }

    /// Parameter value at which the arclength from 0 equals `s`.
    pub fn parameter_at_arclength(&self, s: f64) -> Result<f64> {
        let table = ArclengthTable::build(self)?;
        Ok(table.invert(self, s))
    }

    // ---------------------------------------------------------------
    // Constraint diagnostics
    // ---------------------------------------------------------------

    pub fn constraint_report(&self, constraints: &ConstraintSet, grid: usize) -> Result<ConstraintReport> {
        constraints.validate()?;
        if grid < 16 {
            return Err(RibbonError::domain(format!("constraint grid must be >= 16, got {grid}")));
        }
        let mut max_dev: f64 = 0.0;
        let mut min_kappa = f64::INFINITY;
        let mut min_kappa_t = 0.0;
        for i in 0..=grid {
            let t = i as f64 / grid as f64;
            let jet = self.jet(t);
            let g = FrenetGeometry::from_jet(&jet);
            max_dev = max_dev.max((g.speed / self.target_length - 1.0).abs());
            if g.kappa < min_kappa {
                min_kappa = g.kappa;
                min_kappa_t = t;
            }
        }
        let bc = match constraints.bc_mode {
            BcMode::Free => None,
            BcMode::Clamped => Some(self.boundary_residuals().ok_or_else(|| {
                RibbonError::domain("clamped constraint check requires boundary data")
            })?),
            BcMode::Periodic => {
                let (a, b) = (self.jet(0.0), self.jet(1.0));
                Some(BoundaryResiduals {
                    start_position: (a.position - b.position).norm(),
                    start_tangent: (a.d1 - b.d1).norm(),
                    end_position: (a.d2 - b.d2).norm(),
                    end_tangent: (a.d3 - b.d3).norm(),
                })
            }
        };
        let speed_ok = max_dev <= constraints.unit_speed_tol;
        let kappa_ok = min_kappa >= constraints.kappa_min;
        let bc_ok = bc.is_none_or(|r| r.max() <= BC_TOL);
        Ok(ConstraintReport {
            max_speed_deviation: max_dev,
            length: self.length(),
            min_kappa,
            min_kappa_t,
            boundary_residuals: bc,
            speed_ok,
            kappa_ok,
            bc_ok,
        })
    }

    /// Residuals of the clamped end data, if the curve carries any.
    pub fn boundary_residuals(&self) -> Option<BoundaryResiduals> {
        let bd = self.boundary?;
        let (a, b) = (self.jet(0.0), self.jet(1.0));
        let unit = |v: Vector3<f64>| {
            let n = v.norm();
            if n > 0.0 {
                v / n
            } else {
                v
            }
        };
        Some(BoundaryResiduals {
            start_position: (a.position - bd.start.position()).norm(),
            start_tangent: (unit(a.d1) - bd.start.tangent()).norm(),
            end_position: (b.position - bd.end.position()).norm(),
            end_tangent: (unit(b.d1) - bd.end.tangent()).norm(),
        })
    }
}

/// Residual threshold for the boundary-condition check.
pub const BC_TOL: f64 = 1e-10;

// -------------------------------------------------------------------
// Frenet quantities
// -------------------------------------------------------------------

/// Pointwise geometry of the centerline at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrenetSample {
    pub t_param: f64,
    pub arclength_s: f64,
    pub position: Vector3<f64>,
    pub d1: Vector3<f64>,
    pub d2: Vector3<f64>,
    pub d3: Vector3<f64>,
    pub d4: Vector3<f64>,
    pub speed: f64,
    pub kappa: f64,
    pub tau: f64,
    pub eta: f64,
    /// Derivative of `eta` with respect to arclength.
    pub eta_prime: f64,
}

/// Intermediate products shared by the Frenet formulas.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FrenetGeometry {
    pub speed: f64,
    pub kappa: f64,
    /// `|c' × c''|`
    cross_norm: f64,
    /// `c' · (c'' × c''')`
    triple: f64,
    /// `c' · (c'' × c'''')`
    triple_dot: f64,
    /// `(c' · c'') / |c'|`
    speed_dot: f64,
    /// `(c' × c'') · (c' × c''')`
    cross_dot: f64,
}

impl FrenetGeometry {
    pub fn from_jet(j: &Jet) -> Self {
        let speed = j.d1.norm();
        let w = j.d1.cross(&j.d2);
        let cross_norm = w.norm();
        let triple = j.d1.dot(&j.d2.cross(&j.d3));
        let triple_dot = j.d1.dot(&j.d2.cross(&j.d4));
        let speed_dot = if speed > 0.0 { j.d1.dot(&j.d2) / speed } else { 0.0 };
        let cross_dot = w.dot(&j.d1.cross(&j.d3));
        Self {
            speed,
            kappa: if speed > 0.0 { cross_norm / speed.powi(3) } else { 0.0 },
            cross_norm,
            triple,
            triple_dot,
            speed_dot,
            cross_dot,
        }
    }

    pub fn tau(&self) -> f64 {
        self.triple / (self.cross_norm * self.cross_norm)
    }

    pub fn eta(&self) -> f64 {
        self.triple * self.speed.powi(3) / self.cross_norm.powi(3)
    }

    /// `d eta / ds`, by differentiating `T S³ / |w|³` in `t` and dividing by
    /// the speed.
    pub fn eta_prime(&self) -> f64 {
        let s = self.speed;
        let w = self.cross_norm;
        let w3 = w.powi(3);
        let deta_dt = (self.triple_dot * s.powi(3) + 3.0 * self.triple * s * s * self.speed_dot) / w3
            - 3.0 * self.triple * s.powi(3) * self.cross_dot / (w3 * w * w);
        deta_dt / s
    }

    /// Arclength triple product `u' · (u'' × u''') = kappa² tau`, defined
    /// even where `kappa = 0`.
    pub fn arclength_triple(&self) -> f64 {
        self.triple / self.speed.powi(6)
    }
}

// -------------------------------------------------------------------
// Constraints
// -------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcMode {
    Clamped,
    Free,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSet {
    /// Curvature floor; 0 disables the check.
    pub kappa_min: f64,
    /// Allowed sup-norm deviation of `|c'| / target_length` from 1.
    pub unit_speed_tol: f64,
    pub bc_mode: BcMode,
}

impl ConstraintSet {
    pub fn new(kappa_min: f64, unit_speed_tol: f64, bc_mode: BcMode) -> Result<Self> {
        let c = Self {
            kappa_min,
            unit_speed_tol,
            bc_mode,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_min >= 0.0) {
            return Err(RibbonError::domain("kappa_min must be >= 0"));
        }
        if !(self.unit_speed_tol > 0.0 && self.unit_speed_tol <= 1e-3) {
            return Err(RibbonError::domain("unit_speed_tol must lie in (0, 1e-3]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryResiduals {
    pub start_position: f64,
    pub start_tangent: f64,
    pub end_position: f64,
    pub end_tangent: f64,
}

impl BoundaryResiduals {
    pub fn max(&self) -> f64 {
        self.start_position
            .max(self.start_tangent)
            .max(self.end_position)
            .max(self.end_tangent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub max_speed_deviation: f64,
    pub length: f64,
    pub min_kappa: f64,
    pub min_kappa_t: f64,
    pub boundary_residuals: Option<BoundaryResiduals>,
    pub speed_ok: bool,
    pub kappa_ok: bool,
    pub bc_ok: bool,
}

impl ConstraintReport {
    pub fn all_ok(&self) -> bool {
        self.speed_ok && self.kappa_ok && self.bc_ok
    }
}

// -------------------------------------------------------------------
// Basis kernels
// -------------------------------------------------------------------

/// Clenshaw evaluation of `Σ a_k T_k(x)`.
pub(crate) fn clenshaw(a: &[f64], x: f64) -> f64 {
    let two_x = 2.0 * x;
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ak in a.iter().skip(1).rev() {
        let b0 = two_x * b1 - b2 + ak;
        b2 = b1;
        b1 = b0;
    }
    a.first().copied().unwrap_or(0.0) + x * b1 - b2
}

/// Coefficients of `d/dx Σ a_k T_k(x)`.
fn chebyshev_derivative(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut b = vec![0.0; n + 1];
    for k in (1..n).rev() {
        b[k - 1] = b[k + 1] + 2.0 * k as f64 * a[k];
    }
    b[0] *= 0.5;
    b.truncate(n);
    b
}

/// Zeroes the trailing coefficients that sit at interpolation roundoff
/// level. Left in place they dominate the fourth derivative near the ends.
fn chop_noise_tail(rows: &mut [Vec<f64>; 3]) {
    let n = rows[0].len();
    let scale = rows.iter().flatten().fold(0.0f64, |m, c| m.max(c.abs()));
    let tol = 2.0 * f64::EPSILON * scale;
    let keep = (0..n)
        .rev()
        .find(|&k| rows.iter().any(|r| r[k].abs() > tol))
        .map_or(1, |k| k + 1);
    for r in rows.iter_mut() {
        for c in &mut r[keep..] {
            *c = 0.0;
        }
    }
}

fn chebyshev_derivative_tables(rows: &[Vec<f64>; 3]) -> Vec<[Vec<f64>; 3]> {
    let mut out = Vec::with_capacity(4);
    let mut cur = rows.clone();
    for _ in 0..4 {
        // d/dt = 2 d/dx for x = 2t - 1
        cur = cur.map(|r| chebyshev_derivative(&r).into_iter().map(|c| 2.0 * c).collect());
        out.push(cur.clone());
    }
    out
}

fn fourier_jet(rows: &[Vec<f64>; 3], t: f64) -> Jet {
    let modes = (rows[0].len() - 1) / 2;
    let mut d = [Vector3::zeros(); 5];
    d[0] = Vector3::new(rows[0][0], rows[1][0], rows[2][0]);
    for k in 1..=modes {
        let om = 2.0 * PI * k as f64;
        let (s, c) = (om * t).sin_cos();
        let a = Vector3::new(rows[0][2 * k - 1], rows[1][2 * k - 1], rows[2][2 * k - 1]);
        let b = Vector3::new(rows[0][2 * k], rows[1][2 * k], rows[2][2 * k]);
        let even = a * c + b * s;
        let odd = b * c - a * s;
        let (o2, o3, o4) = (om * om, om * om * om, om * om * om * om);
        d[0] += even;
        d[1] += odd * om;
        d[2] -= even * o2;
        d[3] -= odd * o3;
        d[4] += even * o4;
    }
    Jet {
        position: d[0],
        d1: d[1],
        d2: d[2],
        d3: d[3],
        d4: d[4],
    }
}

// -------------------------------------------------------------------
// Arclength table
// -------------------------------------------------------------------

struct ArclengthTable {
    breaks: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ArclengthTable {
    const PANELS: usize = 128;

    fn build(curve: &CurveSpec) -> Result<Self> {
        let breaks: Vec<f64> = (0..=Self::PANELS).map(|i| i as f64 / Self::PANELS as f64).collect();
        for i in 0..=4 * Self::PANELS {
            let t = i as f64 / (4 * Self::PANELS) as f64;
            if !(curve.speed(t) > 0.0) {
                return Err(RibbonError::DegenerateCurve(format!("speed vanishes at t = {t}")));
            }
        }
        let mut cumulative = vec![0.0; breaks.len()];
        for p in 0..Self::PANELS {
            cumulative[p + 1] = cumulative[p] + panel_length(curve, breaks[p], breaks[p + 1]);
        }
        Ok(Self { breaks, cumulative })
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn arclength(&self, curve: &CurveSpec, t: f64) -> f64 {
        let p = ((t * Self::PANELS as f64).floor() as usize).min(Self::PANELS - 1);
        self.cumulative[p] + panel_length(curve, self.breaks[p], t)
    }

    /// Newton iteration on `s(t) = target` safeguarded by bisection.
    fn invert(&self, curve: &CurveSpec, target: f64) -> f64 {
        let total = self.total();
        if target <= 0.0 {
            return 0.0;
        }
        if target >= total {
            return 1.0;
        }
        let p = self.cumulative.partition_point(|&c| c <= target).saturating_sub(1);
        let (mut lo, mut hi) = (self.breaks[p], self.breaks[(p + 1).min(Self::PANELS)]);
        let mut t = lo + (hi - lo) * (target - self.cumulative[p])
            / (self.cumulative[(p + 1).min(Self::PANELS)] - self.cumulative[p]).max(f64::MIN_POSITIVE);
        for _ in 0..60 {
            let f = self.arclength(curve, t) - target;
            if f.abs() <= 1e-15 * total.max(1.0) {
                break;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let mut next = t - f / curve.speed(t);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() < 1e-17 {
                t = next;
                break;
            }
            t = next;
        }
        t
    }
}

fn panel_length(curve: &CurveSpec, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (x, w) = gauss_legendre(20);
    let h = 0.5 * (b - a);
    compensated_sum(
        x.iter()
            .zip(&w)
            .map(|(xi, wi)| h * wi * curve.speed(a + h * (xi + 1.0))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn circle_derivatives_are_trigonometric() {
        let c = shapes::circle(1.0).unwrap();
        let j = c.evaluate_derivatives(0.0).unwrap();
        let tp = 2.0 * PI;
        assert!((j.d1 - Vector3::new(0.0, tp, 0.0)).norm() < 1e-12);
        assert!((j.d2 - Vector3::new(-tp * tp, 0.0, 0.0)).norm() < 1e-11);
    }

    #[test]
    fn straight_segment_has_vanishing_higher_derivatives() {
        let c = shapes::segment(Vector3::zeros(), Vector3::x()).unwrap();
        for i in 0..=10 {
            let j = c.evaluate_derivatives(i as f64 / 10.0).unwrap();
            assert_eq!(j.d2, Vector3::zeros());
            assert_eq!(j.d3, Vector3::zeros());
            assert_eq!(j.d4, Vector3::zeros());
            assert!((j.d1 - Vector3::x()).norm() < 1e-15);
        }
    }

    #[test]
    fn parameter_outside_unit_interval_is_rejected() {
        let c = shapes::circle(1.0).unwrap();
        assert!(matches!(c.evaluate_derivatives(1.5), Err(RibbonError::Domain(_))));
        assert!(matches!(c.evaluate_derivatives(-1e-9), Err(RibbonError::Domain(_))));
        assert!(c.evaluate_derivatives(f64::NAN).is_err());
    }

    #[test]
    fn helix_derivatives_match_symbolic_forms() {
        // c(t) = (a cos wt, a sin wt, b w t), derivatives by hand.
        let (a, b, w) = (0.7, 0.4, 3.0);
        let c = CurveSpec::fit_chebyshev(
            |t| Vector3::new(a * (w * t).cos(), a * (w * t).sin(), b * w * t),
            40,
            1.0,
        )
        .unwrap();
        for i in 0..100 {
            let t = i as f64 / 99.0;
            let j = c.jet(t);
            let (s, co) = (w * t).sin_cos();
            let d1 = Vector3::new(-a * w * s, a * w * co, b * w);
            let d2 = Vector3::new(-a * w * w * co, -a * w * w * s, 0.0);
            let d3 = Vector3::new(a * w.powi(3) * s, -a * w.powi(3) * co, 0.0);
            let d4 = Vector3::new(a * w.powi(4) * co, a * w.powi(4) * s, 0.0);
            assert!((j.d1 - d1).norm() < 1e-11);
            assert!((j.d2 - d2).norm() < 1e-9);
            assert!((j.d3 - d3).norm() < 1e-7);
            assert!((j.d4 - d4).norm() < 1e-5);
            assert!((j.d1.norm() - w * (a * a + b * b).sqrt()).abs() < 1e-11);
        }
    }

    #[test]
    fn unit_speed_helix_closed_forms() {
        let c = shapes::helix_unit_speed(1.0, 1.0, 1.0, 40).unwrap();
        for t in [0.1, 0.5, 0.9] {
            let s = c.frenet_sample(t).unwrap();
            assert!(close(s.kappa, 0.5, 1e-12), "{}", s.kappa);
            assert!(close(s.tau, 0.5, 1e-10), "{}", s.tau);
            assert!(close(s.eta, 1.0, 1e-10));
            assert!(s.eta_prime.abs() < 1e-8, "{}", s.eta_prime);
            assert!((s.speed - 1.0).abs() < 1e-13);
            assert!(close(s.kappa, s.d2.norm(), 1e-12));
        }
    }

    #[test]
    fn planar_circle_has_zero_torsion() {
        let r = 0.3;
        let c = shapes::circle(r).unwrap();
        let s = c.frenet_sample(0.37).unwrap();
        assert!(close(s.kappa, 1.0 / r, 1e-12));
        assert_eq!(s.tau, 0.0);
        assert_eq!(s.eta, 0.0);
    }

    #[test]
    fn straight_line_is_an_inflection() {
        let c = shapes::segment(Vector3::zeros(), Vector3::new(1.0, 2.0, 0.5)).unwrap();
        assert!(matches!(
            c.frenet_sample(0.5),
            Err(RibbonError::InflectionPoint { .. })
        ));
    }

    #[test]
    fn arclength_reparameterization_is_identity_on_unit_speed_curves() {
        let c = shapes::helix_unit_speed(0.5, 0.5, 1.0, 30).unwrap();
        let r = c.reparameterize_arclength(30).unwrap();
        for i in 0..=50 {
            let t = i as f64 / 50.0;
            assert!((r.speed(t) - c.speed(t)).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn stretched_circle_becomes_constant_speed() {
        // quadratic stretch, phase phi(t) = (t + t²) / 2
        let c = CurveSpec::fit_chebyshev(
            |t| {
                let phi = PI * (t + t * t);
                Vector3::new(phi.cos(), phi.sin(), 0.0)
            },
            48,
            1.0,
        )
        .unwrap();
        let len = c.length();
        assert!((len - 2.0 * PI).abs() < 1e-12);
        let r = c.reparameterize_arclength(48).unwrap();
        let mut dev: f64 = 0.0;
        for i in 0..=1000 {
            dev = dev.max((r.speed(i as f64 / 1000.0) / len - 1.0).abs());
        }
        assert!(dev < 1e-6, "speed deviation {dev}");
        assert!((r.length() - len).abs() < 1e-10 * len);
    }

    #[test]
    fn reparameterized_helix_preserves_length() {
        let c = shapes::helix_general(0.7, 0.3, 2.5, 36).unwrap();
        // independent length: 256-point Gauss rule over the whole interval
        let (x, w) = gauss_legendre(32);
        let mut oracle = 0.0;
        for p in 0..8 {
            for (xi, wi) in x.iter().zip(&w) {
                let t = (p as f64 + 0.5 * (xi + 1.0)) / 8.0;
                oracle += wi / 16.0 * c.speed(t);
            }
        }
        let r = c.reparameterize_arclength(40).unwrap();
        assert!((r.length() - oracle).abs() < 1e-10 * oracle);
    }

    #[test]
    fn constraint_report_on_unit_circle() {
        let c = shapes::unit_circle();
        let ok = c
            .constraint_report(&ConstraintSet::new(0.5, 1e-6, BcMode::Periodic).unwrap(), 64)
            .unwrap();
        assert!(close(ok.min_kappa, 2.0 * PI, 1e-12));
        assert!(ok.kappa_ok && ok.speed_ok && ok.bc_ok);
        let bad = c
            .constraint_report(&ConstraintSet::new(10.0, 1e-6, BcMode::Periodic).unwrap(), 64)
            .unwrap();
        assert!(!bad.kappa_ok);
        assert!(close(bad.min_kappa, 2.0 * PI, 1e-12));
    }

    #[test]
    fn constraint_report_rejects_coarse_grid_and_bad_tolerance() {
        let c = shapes::unit_circle();
        let cs = ConstraintSet::new(0.0, 1e-4, BcMode::Free).unwrap();
        assert!(c.constraint_report(&cs, 8).is_err());
        assert!(ConstraintSet::new(0.0, 1e-2, BcMode::Free).is_err());
        assert!(ConstraintSet::new(-1.0, 1e-4, BcMode::Free).is_err());
    }

    #[test]
    fn clamped_interpolant_meets_end_data() {
        let bd = BoundaryData {
            start: EndCondition::new(Vector3::zeros(), Vector3::x()),
            end: EndCondition::new(Vector3::new(0.5, 0.3, 0.2), Vector3::y()),
        };
        let c = shapes::hermite_clamped(bd, 12).unwrap();
        let r = c.boundary_residuals().unwrap();
        assert!(r.max() < 1e-10, "{r:?}");
        let rep = c
            .constraint_report(&ConstraintSet::new(0.0, 1e-3, BcMode::Clamped).unwrap(), 32)
            .unwrap();
        assert!(rep.bc_ok);
    }

    #[test]
    fn enforce_boundary_repairs_perturbed_coefficients() {
        let bd = BoundaryData {
            start: EndCondition::new(Vector3::zeros(), Vector3::x()),
            end: EndCondition::new(Vector3::new(0.6, 0.2, 0.1), Vector3::z()),
        };
        let c = shapes::hermite_clamped(bd, 12).unwrap();
        let mut flat = c.coefficients_flat();
        for (i, x) in flat.iter_mut().enumerate() {
            *x += 1e-3 * ((i * 7919) % 13) as f64;
        }
        let broken = c.with_coefficients_flat(&flat).unwrap();
        assert!(broken.boundary_residuals().unwrap().max() > 1e-4);
        let fixed = broken.enforce_boundary().unwrap();
        assert!(fixed.boundary_residuals().unwrap().max() < 1e-12);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let c = shapes::helix_general(0.31, 0.17, 4.2, 25).unwrap();
        let back = CurveSpec::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn json_rejects_inconsistent_closure_and_short_series() {
        let bad = r#"{"basis_kind":"chebyshev_open","closure":true,
            "coefficients":[[0,0,0,0,0,0,0,0],[0,0,0,0,0,0,0,0],[0,0,0,0,0,0,0,0]],"target_length":1}"#;
        assert!(CurveSpec::from_json(bad).is_err());
        let short = r#"{"basis_kind":"chebyshev_open","closure":false,
            "coefficients":[[0,1],[0,0],[0,0]],"target_length":1}"#;
        assert!(CurveSpec::from_json(short).is_err());
        let extra = r#"{"basis_kind":"chebyshev_open","closure":false,"bogus":1,
            "coefficients":[[0,0,0,0,0,0,0,0],[0,0,0,0,0,0,0,0],[0,0,0,0,0,0,0,0]],"target_length":1}"#;
        assert!(CurveSpec::from_json(extra).is_err());
    }

    #[test]
    fn boundary_tangent_must_be_unit() {
        let c = shapes::segment(Vector3::zeros(), Vector3::x()).unwrap();
        let bd = BoundaryData {
            start: EndCondition {
                position: [0.0; 3],
                tangent: [1.0, 1e-4, 0.0],
            },
            end: EndCondition::new(Vector3::x(), Vector3::x()),
        };
        assert!(c.with_boundary_data(bd).is_err());
    }

    #[test]
    fn fourier_fit_reproduces_trigonometric_polynomial() {
        let f = |t: f64| {
            let a = 2.0 * PI * t;
            Vector3::new(a.cos() + 0.2 * (3.0 * a).sin(), a.sin(), 0.1 * (2.0 * a).cos())
        };
        let c = CurveSpec::fit_fourier(f, 5, 1.0).unwrap();
        for i in 0..20 {
            let t = i as f64 / 20.0;
            assert!((c.position(t) - f(t)).norm() < 1e-14);
        }
    }
}
