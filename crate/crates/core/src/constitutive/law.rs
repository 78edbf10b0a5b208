//! Constitutive laws: bond force coefficients as runtime strategies.
//!
//! The microscopic force between material points at distance `xi` under
//! relative displacement `r` is
//!
//! ```text
//!     f(r, xi) = alpha(xi) * r + beta(xi) * r^2 + dpsi(r, xi)
//! ```
//!
//! where `dpsi` is the cubic-and-higher remainder, controlled by the envelope
//! `|dpsi(r, xi)| <= gamma(xi) * |r|^3 / 3` for `|r| <= 1` and `dpsi(0, xi) = 0`.
//! Interactions vanish beyond the horizon `H`.
//!
//! Each family implements [`ConstitutiveLaw`]; instances are produced by name
//! through the [`registry`](crate::constitutive::registry) from config
//! parameters, so new families plug in without touching the solvers.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

pub trait ConstitutiveLaw: Send + Sync {
    fn family(&self) -> &'static str;

    /// Linear bond stiffness density; may blow up like `xi^-s` at the origin.
    fn alpha(&self, xi: f64) -> f64;

    /// Quadratic bond coefficient.
    fn beta(&self, xi: f64) -> f64;

    /// Cubic envelope for the remainder force.
    fn gamma(&self, xi: f64) -> f64;

    /// Remainder force; zero at `r = 0` and bounded by `gamma * |r|^3 / 3`.
    fn dpsi(&self, r: f64, xi: f64) -> f64 {
        let _ = (r, xi);
        0.0
    }

    /// Remainder potential `psi(r) = int_0^r dpsi(s) ds`. The default
    /// integrates `dpsi` with a fixed Gauss rule; families with a closed
    /// form should override.
    fn psi(&self, r: f64, xi: f64) -> f64 {
        if r == 0.0 || !self.has_remainder() {
            return 0.0;
        }
        let (nodes, weights) = psi_quadrature();
        let half = 0.5 * r;
        nodes
            .iter()
            .zip(weights)
            .map(|(&x, &w)| w * self.dpsi(half * (x + 1.0), xi))
            .sum::<f64>()
            * half
    }

    /// Interaction range; coefficients vanish for `xi > H`.
    fn horizon(&self) -> f64;

    /// Smallest `s >= 0` such that `alpha(xi) * xi^s` and `beta(xi) * xi^s`
    /// stay bounded near the origin.
    fn singularity_exponent(&self) -> f64 {
        0.0
    }

    /// Interior points of `(0, H)` where coefficients lose smoothness;
    /// quadrature cells never straddle these.
    fn interior_breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Left end of a window `[h, H]` on which `alpha` is positive; feeds the
    /// symbol lower-bound construction.
    fn positivity_onset(&self) -> f64 {
        self.horizon() / 100.0
    }

    /// Exact average of `alpha` over a cell `[lo, hi]`, when the family has a
    /// closed form (used by the lattice force near the singular origin).
    fn alpha_cell_average(&self, lo: f64, hi: f64) -> Option<f64> {
        let _ = (lo, hi);
        None
    }

    /// Whether `dpsi` is not identically zero.
    fn has_remainder(&self) -> bool {
        false
    }
}

fn psi_quadrature() -> &'static (Vec<f64>, Vec<f64>) {
    use std::sync::OnceLock;
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| super::quadrature::gauss_legendre(8))
}

/// Shared, cheaply clonable handle to a law.
#[derive(Clone)]
pub struct ConstitutiveModel {
    law: Arc<dyn ConstitutiveLaw>,
}

impl ConstitutiveModel {
    pub fn new(law: Arc<dyn ConstitutiveLaw>) -> Self {
        ConstitutiveModel { law }
    }

    pub fn from_law(law: impl ConstitutiveLaw + 'static) -> Self {
        ConstitutiveModel { law: Arc::new(law) }
    }

    pub fn family(&self) -> &'static str {
        self.law.family()
    }

    pub fn alpha(&self, xi: f64) -> f64 {
        self.law.alpha(xi)
    }

    pub fn beta(&self, xi: f64) -> f64 {
        self.law.beta(xi)
    }

    pub fn gamma(&self, xi: f64) -> f64 {
        self.law.gamma(xi)
    }

    pub fn dpsi(&self, r: f64, xi: f64) -> f64 {
        self.law.dpsi(r, xi)
    }

    pub fn psi(&self, r: f64, xi: f64) -> f64 {
        self.law.psi(r, xi)
    }

    /// Full bond force `alpha r + beta r^2 + dpsi(r)`.
    pub fn bond_force(&self, r: f64, xi: f64) -> f64 {
        self.law.alpha(xi) * r + self.law.beta(xi) * r * r + self.law.dpsi(r, xi)
    }

    pub fn horizon(&self) -> f64 {
        self.law.horizon()
    }

    pub fn singularity_exponent(&self) -> f64 {
        self.law.singularity_exponent()
    }

    pub fn interior_breakpoints(&self) -> Vec<f64> {
        self.law.interior_breakpoints()
    }

    pub fn positivity_onset(&self) -> f64 {
        self.law.positivity_onset()
    }

    pub fn alpha_cell_average(&self, lo: f64, hi: f64) -> Option<f64> {
        self.law.alpha_cell_average(lo, hi)
    }

    pub fn has_remainder(&self) -> bool {
        self.law.has_remainder()
    }

    pub fn law(&self) -> &dyn ConstitutiveLaw {
        self.law.as_ref()
    }
}

impl std::fmt::Debug for ConstitutiveModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConstitutiveModel")
            .field("family", &self.family())
            .field("horizon", &self.horizon())
            .finish()
    }
}

/// `alpha = C2/xi`, `beta = C3/xi^2`, cubic remainder `g r^3`, all supported
/// on `(0, H]`.
#[derive(Clone, Debug)]
pub struct PowerLawLaw {
    pub c2: f64,
    pub c3: f64,
    pub g: f64,
    pub h: f64,
}

impl PowerLawLaw {
    pub fn new(c2: f64, c3: f64, g: f64, h: f64) -> Self {
        PowerLawLaw { c2, c3, g, h }
    }

    fn supported(&self, xi: f64) -> bool {
        xi > 0.0 && xi <= self.h
    }
}

impl ConstitutiveLaw for PowerLawLaw {
    fn family(&self) -> &'static str {
        "power_law"
    }

    fn alpha(&self, xi: f64) -> f64 {
        if self.supported(xi) {
            self.c2 / xi
        } else {
            0.0
        }
    }

    fn beta(&self, xi: f64) -> f64 {
        if self.supported(xi) {
            self.c3 / (xi * xi)
        } else {
            0.0
        }
    }

    fn gamma(&self, xi: f64) -> f64 {
        if self.supported(xi) {
            3.0 * self.g
        } else {
            0.0
        }
    }

    fn dpsi(&self, r: f64, xi: f64) -> f64 {
        if self.supported(xi) {
            self.g * r * r * r
        } else {
            0.0
        }
    }

    fn psi(&self, r: f64, xi: f64) -> f64 {
        if self.supported(xi) {
            0.25 * self.g * r * r * r * r
        } else {
            0.0
        }
    }

    fn horizon(&self) -> f64 {
        self.h
    }

    fn singularity_exponent(&self) -> f64 {
        2.0
    }

    fn alpha_cell_average(&self, lo: f64, hi: f64) -> Option<f64> {
        if !(hi > lo && lo > 0.0) {
            return None;
        }
        let top = hi.min(self.h);
        if top <= lo {
            return Some(0.0);
        }
        Some(self.c2 * (top / lo).ln() / (hi - lo))
    }

    fn has_remainder(&self) -> bool {
        self.g != 0.0
    }
}

/// Smooth Gaussian-decaying coefficients truncated at `H`:
/// `alpha = C2 exp(-xi^2)`, `beta = C3 exp(-xi^2)`, remainder
/// `g exp(-xi^2) r^3`.
#[derive(Clone, Debug)]
pub struct GaussianDecayLaw {
    pub c2: f64,
    pub c3: f64,
    pub g: f64,
    pub h: f64,
}

impl GaussianDecayLaw {
    pub fn new(c2: f64, c3: f64, g: f64, h: f64) -> Self {
        GaussianDecayLaw { c2, c3, g, h }
    }

    fn envelope(&self, xi: f64) -> f64 {
        if xi > 0.0 && xi <= self.h {
            (-xi * xi).exp()
        } else {
            0.0
        }
    }
}

impl ConstitutiveLaw for GaussianDecayLaw {
    fn family(&self) -> &'static str {
        "gaussian_decay"
    }

    fn alpha(&self, xi: f64) -> f64 {
        self.c2 * self.envelope(xi)
    }

    fn beta(&self, xi: f64) -> f64 {
        self.c3 * self.envelope(xi)
    }

    fn gamma(&self, xi: f64) -> f64 {
        3.0 * self.g * self.envelope(xi)
    }

    fn dpsi(&self, r: f64, xi: f64) -> f64 {
        self.g * self.envelope(xi) * r * r * r
    }

    fn psi(&self, r: f64, xi: f64) -> f64 {
        0.25 * self.g * self.envelope(xi) * r * r * r * r
    }

    fn horizon(&self) -> f64 {
        self.h
    }

    fn has_remainder(&self) -> bool {
        self.g != 0.0
    }
}

/// Coefficients linearly interpolated from `(xi, value)` tables; constant
/// below the first node, zero beyond the last. No remainder force.
#[derive(Clone, Debug)]
pub struct TabulatedLaw {
    alpha_pts: Vec<(f64, f64)>,
    beta_pts: Vec<(f64, f64)>,
    gamma_pts: Option<Vec<(f64, f64)>>,
    h: f64,
}

impl TabulatedLaw {
    pub fn new(
        alpha_pts: Vec<(f64, f64)>,
        beta_pts: Vec<(f64, f64)>,
        gamma_pts: Option<Vec<(f64, f64)>>,
    ) -> Result<Self> {
        for (name, pts) in [("alpha", &alpha_pts), ("beta", &beta_pts)] {
            check_table(name, pts)?;
        }
        if let Some(pts) = &gamma_pts {
            check_table("gamma", pts)?;
        }
        let h = alpha_pts
            .last()
            .unwrap()
            .0
            .min(beta_pts.last().unwrap().0);
        Ok(TabulatedLaw {
            alpha_pts,
            beta_pts,
            gamma_pts,
            h,
        })
    }

    pub fn from_csv_files(
        alpha_path: &Path,
        beta_path: &Path,
        gamma_path: Option<&Path>,
    ) -> Result<Self> {
        let gamma_pts = match gamma_path {
            Some(p) => Some(read_table(p)?),
            None => None,
        };
        TabulatedLaw::new(read_table(alpha_path)?, read_table(beta_path)?, gamma_pts)
    }
}

fn check_table(name: &str, pts: &[(f64, f64)]) -> Result<()> {
    if pts.len() < 2 {
        return Err(Error::AssumptionViolated(format!(
            "{name} table needs at least two rows"
        )));
    }
    for w in pts.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::AssumptionViolated(format!(
                "{name} table abscissae must increase strictly ({} then {})",
                w[0].0, w[1].0
            )));
        }
    }
    if pts.last().unwrap().0 <= 0.0 {
        return Err(Error::AssumptionViolated(format!(
            "{name} table must extend to positive xi"
        )));
    }
    Ok(())
}

/// Parse a two-column CSV `(xi, value)`; `#` comments and an optional header
/// row are skipped, separators are commas or whitespace.
fn read_table(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path)?;
    let mut pts = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if fields.len() != 2 {
            if idx == 0 {
                continue; // header row
            }
            return Err(Error::config(
                idx + 1,
                format!("{}: expected two columns, got {}", path.display(), fields.len()),
            ));
        }
        match (fields[0].parse::<f64>(), fields[1].parse::<f64>()) {
            (Ok(x), Ok(v)) => pts.push((x, v)),
            _ if idx == 0 => continue, // header row
            _ => {
                return Err(Error::config(
                    idx + 1,
                    format!("{}: non-numeric row '{line}'", path.display()),
                ))
            }
        }
    }
    if pts.is_empty() {
        return Err(Error::config(0, format!("{}: no data rows", path.display())));
    }
    Ok(pts)
}

fn interp(pts: &[(f64, f64)], xi: f64) -> f64 {
    if xi <= pts[0].0 {
        return pts[0].1;
    }
    if xi >= pts[pts.len() - 1].0 {
        return 0.0;
    }
    let idx = pts.partition_point(|&(x, _)| x <= xi);
    let (x0, v0) = pts[idx - 1];
    let (x1, v1) = pts[idx];
    v0 + (v1 - v0) * (xi - x0) / (x1 - x0)
}

impl ConstitutiveLaw for TabulatedLaw {
    fn family(&self) -> &'static str {
        "tabulated"
    }

    fn alpha(&self, xi: f64) -> f64 {
        if xi > 0.0 && xi <= self.h {
            interp(&self.alpha_pts, xi)
        } else {
            0.0
        }
    }

    fn beta(&self, xi: f64) -> f64 {
        if xi > 0.0 && xi <= self.h {
            interp(&self.beta_pts, xi)
        } else {
            0.0
        }
    }

    fn gamma(&self, xi: f64) -> f64 {
        match &self.gamma_pts {
            Some(pts) if xi > 0.0 && xi <= self.h => interp(pts, xi),
            _ => 0.0,
        }
    }

    fn horizon(&self) -> f64 {
        self.h
    }

    fn interior_breakpoints(&self) -> Vec<f64> {
        let mut bps: Vec<f64> = self
            .alpha_pts
            .iter()
            .chain(&self.beta_pts)
            .chain(self.gamma_pts.iter().flatten())
            .map(|&(x, _)| x)
            .filter(|&x| x > 0.0 && x < self.h)
            .collect();
        bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        bps.dedup();
        bps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_values() {
        let law = PowerLawLaw::new(2.0, 3.0, 0.5, 1.0);
        assert_eq!(law.alpha(0.5), 4.0);
        assert_eq!(law.beta(0.5), 12.0);
        assert_eq!(law.gamma(0.5), 1.5);
        assert!((law.dpsi(0.2, 0.5) - 0.004).abs() < 1e-15);
        assert_eq!(law.alpha(1.5), 0.0);
        assert_eq!(law.beta(-0.1), 0.0);
        assert!(law.has_remainder());
        assert!(!PowerLawLaw::new(1.0, 1.0, 0.0, 1.0).has_remainder());
    }

    #[test]
    fn power_law_cell_average_is_log_mean() {
        let law = PowerLawLaw::new(1.5, 1.0, 0.0, 1.0);
        let avg = law.alpha_cell_average(0.1, 0.3).unwrap();
        let exact = 1.5 * (3.0_f64).ln() / 0.2;
        assert!((avg - exact).abs() < 1e-14);
        // clipped at the horizon
        let avg = law.alpha_cell_average(0.9, 1.1).unwrap();
        let exact = 1.5 * (1.0 / 0.9_f64).ln() / 0.2;
        assert!((avg - exact).abs() < 1e-14);
    }

    #[test]
    fn gaussian_decay_values() {
        let law = GaussianDecayLaw::new(2.0, 1.0, 0.0, 4.0);
        assert!((law.alpha(1.0) - 2.0 * (-1.0_f64).exp()).abs() < 1e-15);
        assert_eq!(law.alpha(4.5), 0.0);
        assert_eq!(law.singularity_exponent(), 0.0);
    }

    #[test]
    fn tabulated_interpolates_linearly() {
        let law = TabulatedLaw::new(
            vec![(0.0, 1.0), (0.5, 2.0), (1.0, 0.0)],
            vec![(0.0, 1.0), (1.0, 1.0)],
            None,
        )
        .unwrap();
        assert_eq!(law.horizon(), 1.0);
        assert!((law.alpha(0.25) - 1.5).abs() < 1e-15);
        assert!((law.alpha(0.75) - 1.0).abs() < 1e-15);
        assert_eq!(law.gamma(0.3), 0.0);
        assert_eq!(law.interior_breakpoints(), vec![0.5]);
    }

    #[test]
    fn tabulated_rejects_unsorted() {
        let r = TabulatedLaw::new(
            vec![(0.0, 1.0), (0.5, 2.0), (0.4, 0.0)],
            vec![(0.0, 1.0), (1.0, 1.0)],
            None,
        );
        assert!(r.is_err());
    }

    #[test]
    fn psi_default_integral_matches_closed_form() {
        struct Cubic;
        impl ConstitutiveLaw for Cubic {
            fn family(&self) -> &'static str {
                "cubic-test"
            }
            fn alpha(&self, _xi: f64) -> f64 {
                1.0
            }
            fn beta(&self, _xi: f64) -> f64 {
                0.0
            }
            fn gamma(&self, _xi: f64) -> f64 {
                3.0
            }
            fn dpsi(&self, r: f64, _xi: f64) -> f64 {
                r * r * r
            }
            fn horizon(&self) -> f64 {
                1.0
            }
            fn has_remainder(&self) -> bool {
                true
            }
        }
        for &r in &[-0.9, -0.3, 0.0, 0.2, 0.7, 1.0] {
            let got = Cubic.psi(r, 0.5);
            let exact = 0.25 * r * r * r * r;
            assert!((got - exact).abs() < 1e-12, "r={r}: {got} vs {exact}");
        }

        let law = PowerLawLaw::new(1.0, 1.0, 0.8, 1.0);
        for &r in &[-0.5, 0.4] {
            assert!((law.psi(r, 0.3) - 0.25 * 0.8 * r.powi(4)).abs() < 1e-15);
        }
        assert_eq!(law.psi(0.4, 1.2), 0.0);
    }
}
