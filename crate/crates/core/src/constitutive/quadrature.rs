//! Composite Gauss-Legendre quadrature over the bond-length interval `(0, H]`.
//!
//! Coefficient functions may blow up like `xi^-s` at the origin (with
//! `s <= singularity_exponent`), so the first segment is subdivided
//! geometrically toward `0` with ratio `1/2`; the grading depth grows with the
//! declared exponent. Remaining segments, delimited by the model's declared
//! breakpoints, are covered by uniform cells. Cells never straddle a
//! breakpoint, and all nodes are strictly inside `(0, H)`.
//!
//! One instance is shared by every operator built on top of it, so the
//! discrete operator algebra (e.g. `L = B - M`) holds with a single node set.

use std::f64::consts::PI;

use crate::constitutive::law::ConstitutiveLaw;
use crate::error::{Error, Result};

/// Gauss-Legendre rule on `(-1, 1)`: Newton iteration on the Legendre
/// polynomial from the classical cosine initial guess.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Value and derivative of the Legendre polynomial `P_n` at `z`.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Fixed node/weight set over `(0, H]` adapted to one constitutive law.
#[derive(Clone, Debug)]
pub struct XiQuadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    horizon: f64,
    levels: usize,
    order: usize,
}

const UNIFORM_CELLS: usize = 8;
const SELF_TEST_POWERS: [f64; 6] = [2.0, 2.5, 3.0, 4.0, 5.0, 6.0];
const SELF_TEST_TOL: f64 = 1e-10;

fn grading_levels(singularity_exponent: f64) -> usize {
    let margin = (3.0 - singularity_exponent).max(0.5);
    ((34.0 / margin).ceil() as usize).clamp(22, 140)
}

impl XiQuadrature {
    /// Build with defaults sized from the law's singularity exponent, then
    /// verify the power-moment self test, refining a few times if needed.
    pub fn for_law(law: &dyn ConstitutiveLaw) -> Result<XiQuadrature> {
        let mut levels = grading_levels(law.singularity_exponent());
        let mut order = 12;
        for _ in 0..4 {
            let q = XiQuadrature::with_resolution(law, levels, order)?;
            if q.self_test_error() <= SELF_TEST_TOL {
                return Ok(q);
            }
            levels += 8;
            order += 6;
        }
        Err(Error::QuadratureInsufficient(format!(
            "power self test not met at levels {levels}, order {order}"
        )))
    }

    pub fn with_resolution(
        law: &dyn ConstitutiveLaw,
        levels: usize,
        order: usize,
    ) -> Result<XiQuadrature> {
        let horizon = law.horizon();
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::AssumptionViolated(format!(
                "horizon must be finite and positive, got {horizon}"
            )));
        }
        let mut edges: Vec<f64> = law
            .interior_breakpoints()
            .into_iter()
            .filter(|&b| b > 0.0 && b < horizon)
            .collect();
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup();

        let first_end = edges.first().copied().unwrap_or(horizon);
        let mut cells: Vec<(f64, f64)> = Vec::new();
        let mut hi = first_end;
        for _ in 0..levels {
            let lo = 0.5 * hi;
            cells.push((lo, hi));
            hi = lo;
        }
        cells.push((0.0, hi));
        let mut segment_edges = edges;
        segment_edges.push(horizon);
        let mut left = first_end;
        for &right in &segment_edges {
            if right <= left {
                continue;
            }
            let width = (right - left) / UNIFORM_CELLS as f64;
            for c in 0..UNIFORM_CELLS {
                cells.push((left + c as f64 * width, left + (c + 1) as f64 * width));
            }
            left = right;
        }
        cells.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        let (gx, gw) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(cells.len() * order);
        let mut weights = Vec::with_capacity(cells.len() * order);
        for (lo, hi) in cells {
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            for i in 0..order {
                nodes.push(mid + half * gx[i]);
                weights.push(half * gw[i]);
            }
        }
        Ok(XiQuadrature {
            nodes,
            weights,
            horizon,
            levels,
            order,
        })
    }

    /// Same cell structure with doubled per-cell order.
    pub fn refined(&self, law: &dyn ConstitutiveLaw) -> Result<XiQuadrature> {
        XiQuadrature::with_resolution(law, self.levels, self.order * 2)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Worst relative error over the reference powers `xi^p`.
    pub fn self_test_error(&self) -> f64 {
        SELF_TEST_POWERS
            .iter()
            .map(|&p| {
                let exact = self.horizon.powf(p + 1.0) / (p + 1.0);
                let got = self.integrate(|xi| xi.powf(p));
                ((got - exact) / exact).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Composite Gauss-Legendre integral of `f` over `[a, b]`, honoring the law's
/// breakpoints. Used for window integrals away from the origin (no grading).
pub fn integrate_window(law: &dyn ConstitutiveLaw, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let mut edges: Vec<f64> = vec![a];
    for bp in law.interior_breakpoints() {
        if bp > a && bp < b {
            edges.push(bp);
        }
    }
    edges.push(b);
    edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (gx, gw) = gauss_legendre(12);
    let mut total = 0.0;
    for pair in edges.windows(2) {
        let cells = 16;
        let width = (pair[1] - pair[0]) / cells as f64;
        for c in 0..cells {
            let lo = pair[0] + c as f64 * width;
            let mid = lo + 0.5 * width;
            let half = 0.5 * width;
            for i in 0..gx.len() {
                total += half * gw[i] * f(mid + half * gx[i]);
            }
        }
    }
    total
}
