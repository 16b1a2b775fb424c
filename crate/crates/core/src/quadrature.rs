//! Composite Gauss–Legendre rules on `[0, 1]` and a compensated summation
//! helper used by every energy integral.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RibbonError};

/// Composite Gauss–Legendre rule: `panels` equal sub-intervals of `[0, 1]`
/// with `nodes_per_panel` nodes each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureScheme {
    pub panels: usize,
    pub nodes_per_panel: usize,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        Self {
            panels: 32,
            nodes_per_panel: 16,
        }
    }
}

impl QuadratureScheme {
    pub fn new(panels: usize, nodes_per_panel: usize) -> Result<Self> {
        let q = Self {
            panels,
            nodes_per_panel,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.panels < 1 {
            return Err(RibbonError::domain("quadrature panels must be >= 1"));
        }
        if !(4..=32).contains(&self.nodes_per_panel) {
            return Err(RibbonError::domain(format!(
                "nodes_per_panel must lie in 4..=32, got {}",
                self.nodes_per_panel
            )));
        }
        Ok(())
    }

    pub fn total_nodes(&self) -> usize {
        self.panels * self.nodes_per_panel
    }

    /// Same rule with twice as many panels.
    pub fn refined(&self) -> Self {
        Self {
            panels: 2 * self.panels,
            nodes_per_panel: self.nodes_per_panel,
        }
    }

    /// Nodes and weights on `[0, 1]`, in increasing node order.
    pub fn rule(&self) -> Vec<(f64, f64)> {
        self.rule_on(&uniform_breaks(self.panels))
    }

    /// Nodes and weights of the rule applied panel-wise on the given sorted
    /// breakpoints.
    pub fn rule_on(&self, breaks: &[f64]) -> Vec<(f64, f64)> {
        let (x, w) = gauss_legendre(self.nodes_per_panel);
        let mut out = Vec::with_capacity((breaks.len().saturating_sub(1)) * x.len());
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (xi, wi) in x.iter().zip(&w) {
                out.push((mid + half * xi, half * wi));
            }
        }
        out
    }

    /// Rule whose panels are additionally split at the given interior points.
    pub fn rule_split_at(&self, cuts: &[f64]) -> Vec<(f64, f64)> {
        let mut breaks = uniform_breaks(self.panels);
        for &c in cuts {
            if c > 0.0 && c < 1.0 {
                breaks.push(c);
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        self.rule_on(&breaks)
    }
}

fn uniform_breaks(panels: usize) -> Vec<f64> {
    (0..=panels).map(|i| i as f64 / panels as f64).collect()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// the Legendre three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let pn = if n == 0 { 1.0 } else { p1 };
    let pnm1 = if n == 0 { 0.0 } else { p0 };
    let d = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
    (pn, d)
}

/// Neumaier-compensated running sum. Reduction order is the insertion
/// order, so results are reproducible bit for bit.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}
