//! Coefficient moments `int_0^H coeff(xi) * xi^p dxi` and the derived
//! long-wave constants.
//!
//! Moments are evaluated by the graded quadrature at successively refined
//! resolutions until two consecutive values agree to `1e-10` relative. The
//! derived constants are
//!
//! ```text
//!     c0^2 = I_a2                (squared long-wave sound speed)
//!     d1   = 12 / I_a4           (linear coefficient of the limit ODE)
//!     d2   = 12 * I_b3 / I_a4    (quadratic coefficient of the limit ODE)
//! ```

use serde::Serialize;

use crate::constitutive::law::ConstitutiveModel;
use crate::constitutive::quadrature::XiQuadrature;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coefficient {
    Alpha,
    Beta,
    Gamma,
}

impl Coefficient {
    pub fn name(self) -> &'static str {
        match self {
            Coefficient::Alpha => "alpha",
            Coefficient::Beta => "beta",
            Coefficient::Gamma => "gamma",
        }
    }

    fn eval(self, model: &ConstitutiveModel, xi: f64) -> f64 {
        match self {
            Coefficient::Alpha => model.alpha(xi),
            Coefficient::Beta => model.beta(xi),
            Coefficient::Gamma => model.gamma(xi),
        }
    }
}

const MOMENT_REL_TOL: f64 = 1e-10;
const MOMENT_ABS_FLOOR: f64 = 1e-13;

/// `int_0^H coeff(xi) * xi^power dxi`, refined until stable to `1e-10`
/// relative.
pub fn moment(model: &ConstitutiveModel, coeff: Coefficient, power: f64) -> Result<f64> {
    let law = model.law();
    let base = XiQuadrature::for_law(law)?;
    let mut levels = base.levels();
    let mut order = base.order();
    let mut prev: Option<f64> = None;
    for _ in 0..6 {
        let quad = XiQuadrature::with_resolution(law, levels, order)?;
        let value = quad.integrate(|xi| coeff.eval(model, xi) * xi.powf(power));
        if !value.is_finite() {
            return Err(Error::NonIntegrable {
                coeff: coeff.name(),
                power,
                detail: "integrand produced a non-finite sum".into(),
            });
        }
        if let Some(p) = prev {
            let tol = f64::max(MOMENT_REL_TOL * value.abs(), MOMENT_ABS_FLOOR);
            if (value - p).abs() <= tol {
                return Ok(value);
            }
        }
        prev = Some(value);
        levels += 8;
        order += 6;
    }
    Err(Error::NonIntegrable {
        coeff: coeff.name(),
        power,
        detail: format!("no convergence up to levels {levels}, order {order}"),
    })
}

/// The eight standing moments plus derived long-wave constants.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MomentTable {
    #[serde(rename = "I_a2")]
    pub i_a2: f64,
    #[serde(rename = "I_a4")]
    pub i_a4: f64,
    #[serde(rename = "I_a6")]
    pub i_a6: f64,
    #[serde(rename = "I_b3")]
    pub i_b3: f64,
    #[serde(rename = "I_b52")]
    pub i_b52: f64,
    #[serde(rename = "I_b5")]
    pub i_b5: f64,
    #[serde(rename = "I_g3")]
    pub i_g3: f64,
    #[serde(rename = "I_g4")]
    pub i_g4: f64,
    pub c0_sq: f64,
    pub d1: f64,
    pub d2: f64,
}

pub fn build_moment_table(model: &ConstitutiveModel) -> Result<MomentTable> {
    use Coefficient::*;
    let i_a2 = moment(model, Alpha, 2.0)?;
    let i_a4 = moment(model, Alpha, 4.0)?;
    let i_a6 = moment(model, Alpha, 6.0)?;
    let i_b3 = moment(model, Beta, 3.0)?;
    let i_b52 = moment(model, Beta, 2.5)?;
    let i_b5 = moment(model, Beta, 5.0)?;
    let i_g3 = moment(model, Gamma, 3.0)?;
    let i_g4 = moment(model, Gamma, 4.0)?;

    for (coeff, power, value) in [
        ("alpha", 2.0, i_a2),
        ("alpha", 4.0, i_a4),
        ("beta", 3.0, i_b3),
    ] {
        if value <= 0.0 {
            return Err(Error::NegativeMoment {
                coeff,
                power,
                value,
            });
        }
    }

    Ok(MomentTable {
        i_a2,
        i_a4,
        i_a6,
        i_b3,
        i_b52,
        i_b5,
        i_g3,
        i_g4,
        c0_sq: i_a2,
        d1: 12.0 / i_a4,
        d2: 12.0 * i_b3 / i_a4,
    })
}
