//! Constitutive models: bond-force coefficients, their structural
//! assumptions, the graded bond-length quadrature and coefficient moments.

pub mod law;
pub mod moments;
pub mod quadrature;
pub mod registry;

pub use law::{ConstitutiveLaw, ConstitutiveModel, GaussianDecayLaw, PowerLawLaw, TabulatedLaw};
pub use moments::{build_moment_table, moment, Coefficient, MomentTable};
pub use quadrature::{gauss_legendre, integrate_window, XiQuadrature};
pub use registry::{LawParams, LawRegistry};

use crate::error::{Error, Result};

/// Outcome of probing a model against the standing structural assumptions.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub passed: bool,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn into_result(self) -> Result<()> {
        if self.passed {
            Ok(())
        } else {
            Err(Error::AssumptionViolated(self.violations.join("; ")))
        }
    }
}

const PROBE_RS: [f64; 12] = [
    -1.0, -0.75, -0.5, -0.25, -0.1, -0.01, 0.01, 0.1, 0.25, 0.5, 0.75, 1.0,
];

/// Probe the structural assumptions at the quadrature nodes:
/// `alpha >= 0` with a positive run, `beta > 0` on a subinterval,
/// `dpsi(0, .) = 0`, and the cubic remainder envelope
/// `|dpsi(r, .)| <= gamma * |r|^3 / 3` on `|r| <= 1`.
pub fn validate_assumption1(model: &ConstitutiveModel) -> Result<ValidationReport> {
    let quad = XiQuadrature::for_law(model.law())?;
    let mut violations = Vec::new();

    let mut alpha_run = 0usize;
    let mut best_alpha_run = 0usize;
    let mut beta_run = 0usize;
    let mut best_beta_run = 0usize;
    for &xi in quad.nodes() {
        let a = model.alpha(xi);
        let b = model.beta(xi);
        if !a.is_finite() || !b.is_finite() {
            violations.push(format!("non-finite coefficient at xi = {xi:.6e}"));
            continue;
        }
        if a < 0.0 {
            violations.push(format!("alpha({xi:.6e}) = {a:.6e} < 0"));
        }
        alpha_run = if a > 0.0 { alpha_run + 1 } else { 0 };
        beta_run = if b > 0.0 { beta_run + 1 } else { 0 };
        best_alpha_run = best_alpha_run.max(alpha_run);
        best_beta_run = best_beta_run.max(beta_run);
    }
    if best_alpha_run < 8 {
        violations.push("alpha is not positive on any probed subinterval".into());
    }
    if best_beta_run < 8 {
        violations.push("beta is not positive on any probed subinterval".into());
    }

    let onset = model.positivity_onset();
    if !(onset > 0.0 && onset < model.horizon()) {
        violations.push(format!(
            "positivity onset {onset:.6e} outside (0, {:.6e})",
            model.horizon()
        ));
    }

    // probe the remainder on a thinned node set; envelope checks are pointwise
    for &xi in quad.nodes().iter().step_by(7) {
        let g = model.gamma(xi);
        if g < 0.0 {
            violations.push(format!("gamma({xi:.6e}) = {g:.6e} < 0"));
            continue;
        }
        let at_zero = model.dpsi(0.0, xi);
        if at_zero.abs() > 1e-14 * (1.0 + g) {
            violations.push(format!("dpsi(0, {xi:.6e}) = {at_zero:.6e} != 0"));
        }
        for &r in &PROBE_RS {
            let v = model.dpsi(r, xi);
            let bound = g * r.abs().powi(3) / 3.0;
            if v.abs() > bound * (1.0 + 1e-9) + 1e-15 * (1.0 + g) {
                violations.push(format!(
                    "|dpsi({r}, {xi:.6e})| = {:.6e} exceeds gamma |r|^3 / 3 = {bound:.6e}",
                    v.abs()
                ));
            }
        }
    }

    let passed = violations.is_empty();
    violations.truncate(12);
    Ok(ValidationReport { passed, violations })
}

/// [`validate_assumption1`] promoted to an error.
pub fn ensure_assumption1(model: &ConstitutiveModel) -> Result<()> {
    validate_assumption1(model)?.into_result()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn compliant_power_law_passes() {
        let model = ConstitutiveModel::from_law(PowerLawLaw::new(1.0, 1.0, 0.5, 1.0));
        let report = validate_assumption1(&model).unwrap();
        assert!(report.passed, "violations: {:?}", report.violations);
    }

    #[test]
    fn linear_leak_in_remainder_is_flagged() {
        struct Leaky(PowerLawLaw);
        impl ConstitutiveLaw for Leaky {
            fn family(&self) -> &'static str {
                "leaky"
            }
            fn alpha(&self, xi: f64) -> f64 {
                self.0.alpha(xi)
            }
            fn beta(&self, xi: f64) -> f64 {
                self.0.beta(xi)
            }
            fn gamma(&self, xi: f64) -> f64 {
                self.0.gamma(xi)
            }
            fn dpsi(&self, r: f64, xi: f64) -> f64 {
                if xi > 0.0 && xi <= self.0.h {
                    r // linear term hiding in the remainder
                } else {
                    0.0
                }
            }
            fn horizon(&self) -> f64 {
                self.0.h
            }
            fn singularity_exponent(&self) -> f64 {
                2.0
            }
            fn has_remainder(&self) -> bool {
                true
            }
        }
        let model = ConstitutiveModel::new(Arc::new(Leaky(PowerLawLaw::new(1.0, 1.0, 1.0, 1.0))));
        let report = validate_assumption1(&model).unwrap();
        assert!(!report.passed);
        assert!(report.violations.iter().any(|v| v.contains("dpsi")));
        assert!(ensure_assumption1(&model).is_err());
    }

    #[test]
    fn negative_alpha_is_flagged() {
        struct NegAlpha;
        impl ConstitutiveLaw for NegAlpha {
            fn family(&self) -> &'static str {
                "neg"
            }
            fn alpha(&self, xi: f64) -> f64 {
                if xi > 0.0 && xi <= 1.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            fn beta(&self, xi: f64) -> f64 {
                if xi > 0.0 && xi <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            fn gamma(&self, _: f64) -> f64 {
                0.0
            }
            fn horizon(&self) -> f64 {
                1.0
            }
        }
        let model = ConstitutiveModel::new(Arc::new(NegAlpha));
        let report = validate_assumption1(&model).unwrap();
        assert!(!report.passed);
        assert!(report.violations.iter().any(|v| v.contains("alpha")));
    }

    #[test]
    fn zero_remainder_with_positive_gamma_passes() {
        struct GammaOnly(PowerLawLaw);
        impl ConstitutiveLaw for GammaOnly {
            fn family(&self) -> &'static str {
                "gamma_only"
            }
            fn alpha(&self, xi: f64) -> f64 {
                self.0.alpha(xi)
            }
            fn beta(&self, xi: f64) -> f64 {
                self.0.beta(xi)
            }
            fn gamma(&self, xi: f64) -> f64 {
                if xi > 0.0 && xi <= self.0.h {
                    2.0
                } else {
                    0.0
                }
            }
            fn horizon(&self) -> f64 {
                self.0.h
            }
            fn singularity_exponent(&self) -> f64 {
                2.0
            }
        }
        let model =
            ConstitutiveModel::new(Arc::new(GammaOnly(PowerLawLaw::new(1.0, 1.0, 0.0, 1.0))));
        assert!(validate_assumption1(&model).unwrap().passed);
    }
}
