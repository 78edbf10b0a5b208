//! The solitary-wave predictor `W0` and its defining ODE.
//!
//! In the long-wave limit the profile equation collapses to
//! `W'' = d1 W - d2 W^2` with `d1 = 12 / I_a4` and `d2 = 12 I_b3 / I_a4`,
//! solved in closed form by `W0(x) = A sech^2(sqrt(d1) x / 2)` with
//! amplitude `A = 3 d1 / (2 d2)`. Everything downstream perturbs around
//! this profile, so it is built once and shared.

use crate::constitutive::MomentTable;
use crate::error::{Error, Result};
use crate::grid::{Grid, Profile};
use crate::operators::OperatorContext;

#[derive(Clone, Copy, Debug)]
pub struct KdvProfileSpec {
    pub d1: f64,
    pub d2: f64,
    /// Peak height `3 d1 / (2 d2)`.
    pub amplitude: f64,
    /// Exponential decay rate `sqrt(d1)` of the tails.
    pub decay_rate: f64,
}

impl KdvProfileSpec {
    pub fn from_moments(moments: &MomentTable) -> Self {
        let d1 = moments.d1;
        let d2 = moments.d2;
        KdvProfileSpec {
            d1,
            d2,
            amplitude: 1.5 * d1 / d2,
            decay_rate: d1.sqrt(),
        }
    }

    /// Half-length at which the tails reach ~1e-13 of the peak.
    pub fn suggested_half_length(&self) -> f64 {
        30.0 / self.decay_rate
    }
}

/// `sech^2(z)`, overflow-free for any `z`.
pub fn sech2(z: f64) -> f64 {
    let t = (-z.abs()).exp();
    let s = 2.0 * t / (1.0 + t * t);
    s * s
}

/// Sample `W0` on the grid. Errors if the domain truncates the tails above
/// one part in 1e12 of the peak; the discretization is spectral, so visible
/// tails poison every estimate downstream.
pub fn kdv_profile(spec: &KdvProfileSpec, grid: &Grid) -> Result<Profile> {
    let tail = sech2(0.5 * spec.decay_rate * grid.half_length());
    if tail >= 1e-12 {
        return Err(Error::DomainTooSmall {
            tail: spec.amplitude * tail,
            limit: 1e-12 * spec.amplitude,
        });
    }
    let n = grid.len();
    let mut vals = vec![0.0; n];
    for (i, v) in vals.iter_mut().enumerate().take(n / 2 + 1) {
        *v = spec.amplitude * sech2(0.5 * spec.decay_rate * grid.node(i));
    }
    // mirror so evenness is bitwise, not just up to rounding
    for i in 1..n / 2 {
        vals[n - i] = vals[i];
    }
    Profile::from_values(grid, vals)
}

/// `|| W'' - d1 W + d2 W^2 ||_2` with a spectral second derivative.
pub fn kdv_ode_residual(p: &Profile, d1: f64, d2: f64) -> f64 {
    let sq = p.mul_pointwise(p);
    p.derivative(2).axpy(-d1, p).axpy(d2, &sq).l2_norm()
}

/// Norms of the two consistency defects of `W0` at finite `eps`: the linear
/// defect `K = (Q[W0] - B W0) / eps^2` and the cubic remainder `E = P[W0]`.
/// Both stay bounded as `eps -> 0`.
#[derive(Clone, Copy, Debug)]
pub struct ConsistencyReport {
    pub epsilon: f64,
    pub norm_k: f64,
    pub norm_e: f64,
}

pub fn consistency_residual(ctx: &OperatorContext) -> Result<ConsistencyReport> {
    let w0 = ctx.kdv_predictor();
    let eps = ctx.epsilon();
    let k = ctx
        .quadratic(w0)
        .sub(&ctx.dispersive(w0))
        .scale(1.0 / (eps * eps));
    let e = ctx.remainder(w0)?;
    Ok(ConsistencyReport {
        epsilon: eps,
        norm_k: k.l2_norm(),
        norm_e: e.l2_norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{build_moment_table, ConstitutiveModel, PowerLawLaw};

    fn reference_spec() -> KdvProfileSpec {
        let model = ConstitutiveModel::from_law(PowerLawLaw::new(1.0, 1.0, 0.0, 1.0));
        KdvProfileSpec::from_moments(&build_moment_table(&model).unwrap())
    }

    #[test]
    fn reference_amplitude_and_rate() {
        let spec = reference_spec();
        assert!((spec.d1 - 48.0).abs() < 1e-10);
        assert!((spec.d2 - 24.0).abs() < 1e-10);
        assert!((spec.amplitude - 3.0).abs() < 1e-10);
        assert!((spec.decay_rate - 48.0_f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn sech2_matches_cosh_and_never_overflows() {
        for &z in &[0.0_f64, 0.3, -0.3, 2.0, 10.0] {
            let direct = 1.0 / (z.cosh() * z.cosh());
            assert!((sech2(z) - direct).abs() < 1e-15);
        }
        assert_eq!(sech2(800.0), 0.0); // cosh would overflow here
        assert_eq!(sech2(-5.0), sech2(5.0));
    }

    #[test]
    fn profile_peaks_at_center_and_is_even() {
        let spec = reference_spec();
        let grid = Grid::new(spec.suggested_half_length(), 256).unwrap();
        let w0 = kdv_profile(&spec, &grid).unwrap();
        let n = grid.len();
        assert_eq!(w0.values()[n / 2], spec.amplitude);
        for i in 1..n / 2 {
            assert_eq!(w0.values()[i], w0.values()[n - i]);
        }
        assert!(w0.values()[0] < 1e-12 * spec.amplitude);
    }

    #[test]
    fn rejects_domain_that_truncates_tails() {
        let spec = reference_spec();
        let grid = Grid::new(1.0, 64).unwrap();
        match kdv_profile(&spec, &grid) {
            Err(Error::DomainTooSmall { tail, limit }) => assert!(tail >= limit),
            other => panic!("expected DomainTooSmall, got {other:?}"),
        }
    }

    #[test]
    fn closed_form_satisfies_the_ode() {
        let spec = reference_spec();
        let grid = Grid::new(spec.suggested_half_length(), 512).unwrap();
        let w0 = kdv_profile(&spec, &grid).unwrap();
        let res = kdv_ode_residual(&w0, spec.d1, spec.d2);
        assert!(res < 1e-7 * w0.l2_norm(), "residual {res}");
    }

    #[test]
    fn ode_residual_detects_wrong_coefficients() {
        let spec = reference_spec();
        let grid = Grid::new(spec.suggested_half_length(), 512).unwrap();
        let w0 = kdv_profile(&spec, &grid).unwrap();
        assert!(kdv_ode_residual(&w0, spec.d1 * 1.1, spec.d2) > 1e-2);
    }
}
