//! Fourier symbols of the linear operators at wave parameter `eps`.
//!
//! The sliding window average of width `eta` has symbol `sinc(k eta / 2)`,
//! so the linear part of the traveling-wave operator is diagonalized by
//!
//! ```text
//!     b_eps(k) = 1 + int alpha(xi) xi^2 (1 - sinc^2(eps xi k / 2)) dxi / eps^2
//! ```
//!
//! with long-wave limit `b0(k) = 1 + (I_a4 / 12) k^2` and high-`k` plateau
//! `1 + c0^2 / eps^2`. A window `[h, H]` where `alpha` stays positive yields
//! the certified lower bound
//!
//! ```text
//!     b_eps(k) >= C0 * min(1 + k^2, 1 + 1/eps^2),
//!     C0 = min(1, h^2 J / 24, 2 J / 3),   J = int_h^H alpha xi^2 dxi,
//! ```
//!
//! valid because `1 - sinc^2(z y)` is at least `min(z^2 y^2 / 6, 2/3)`; the
//! matching pass band ends at `C1 / eps` with `C1 = 4 / h`.

use crate::constitutive::{integrate_window, ConstitutiveModel, MomentTable, XiQuadrature};
use crate::error::{Error, Result};
use crate::grid::Grid;

/// `sin(z)/z` with a series branch near zero.
pub fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// Per-mode symbol values plus the certified bound constants.
#[derive(Clone, Debug)]
pub struct SymbolTable {
    /// `b_eps(k_j)` per FFT slot.
    pub b_eps: Vec<f64>,
    /// `b0(k_j)` per FFT slot.
    pub b0: Vec<f64>,
    /// `1 / b_eps(k_j)` per FFT slot.
    pub b_eps_inv: Vec<f64>,
    /// Pass-band mask: `1` where `|k_j| <= C1/eps`, else `0`.
    pub pi_eps: Vec<f64>,
    /// Plateau value `1 + c0^2 / eps^2` (quadrature `c0^2`).
    pub b_eps_infty: f64,
    /// Certified lower-bound constant `C0`.
    pub c0_lower: f64,
    /// Pass-band constant `C1 = 4 / h`.
    pub c1_cutoff: f64,
    /// `sum_m w_m alpha(xi_m) xi_m^2` over the shared quadrature.
    pub c0_sq_quad: f64,
}

/// `b_eps` at every grid mode for one quadrature rule.
pub fn b_eps_values(grid: &Grid, model: &ConstitutiveModel, quad: &XiQuadrature, eps: f64) -> Vec<f64> {
    let n = grid.len();
    let inv_eps_sq = 1.0 / (eps * eps);
    let mut out = vec![1.0; n];
    for (&xi, &w) in quad.nodes().iter().zip(quad.weights()) {
        let c = w * model.alpha(xi) * xi * xi;
        if c == 0.0 {
            continue;
        }
        for (j, slot) in out.iter_mut().enumerate() {
            let s = sinc(0.5 * eps * xi * grid.wavenumber(j));
            *slot += c * (1.0 - s * s) * inv_eps_sq;
        }
    }
    out
}

pub fn build_symbols(
    grid: &Grid,
    model: &ConstitutiveModel,
    moments: &MomentTable,
    quad: &XiQuadrature,
    eps: f64,
) -> Result<SymbolTable> {
    let b_eps = b_eps_values(grid, model, quad, eps);
    let b_eps_inv = b_eps.iter().map(|&b| 1.0 / b).collect();
    let b0 = (0..grid.len())
        .map(|j| {
            let k = grid.wavenumber(j);
            1.0 + moments.i_a4 / 12.0 * k * k
        })
        .collect();

    let h = model.positivity_onset();
    let horizon = model.horizon();
    let window = integrate_window(model.law(), h, horizon, |xi| model.alpha(xi) * xi * xi);
    if !(window > 0.0) {
        return Err(Error::AssumptionViolated(format!(
            "alpha has no mass on the positivity window [{h:.3e}, {horizon:.3e}]"
        )));
    }
    let c0_lower = 1.0_f64.min(h * h * window / 24.0).min(2.0 * window / 3.0);
    let c1_cutoff = 4.0 / h;

    let threshold = c1_cutoff / eps;
    let pi_eps = (0..grid.len())
        .map(|j| {
            if grid.wavenumber(j).abs() <= threshold {
                1.0
            } else {
                0.0
            }
        })
        .collect();

    let c0_sq_quad = quad.integrate(|xi| model.alpha(xi) * xi * xi);

    Ok(SymbolTable {
        b_eps,
        b0,
        b_eps_inv,
        pi_eps,
        b_eps_infty: 1.0 + c0_sq_quad / (eps * eps),
        c0_lower,
        c1_cutoff,
        c0_sq_quad,
    })
}

impl SymbolTable {
    /// Lower bound `C0 * min(1 + k^2, 1 + 1/eps^2)` at mode `j`.
    pub fn lower_bound(&self, grid: &Grid, eps: f64, j: usize) -> f64 {
        let k = grid.wavenumber(j);
        self.c0_lower * (1.0 + k * k).min(1.0 + 1.0 / (eps * eps))
    }

    /// Smallest observed ratio `b_eps / min(1 + k^2, 1 + 1/eps^2)` over all
    /// modes; reported next to the certified `C0` for diagnosis.
    pub fn empirical_lower_ratio(&self, grid: &Grid, eps: f64) -> f64 {
        (0..grid.len())
            .map(|j| {
                let k = grid.wavenumber(j);
                self.b_eps[j] / (1.0 + k * k).min(1.0 + 1.0 / (eps * eps))
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `k, b_eps, b0, pi_eps` rows in ascending `k`, preceded by comments.
    pub fn write_csv(
        &self,
        grid: &Grid,
        w: &mut impl std::io::Write,
        comments: &[String],
    ) -> Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "k,b_eps,b0,pi_eps")?;
        let n = grid.len();
        for idx in 0..n {
            let j = (idx + n / 2) % n; // slot order for ascending k
            writeln!(
                w,
                "{},{},{},{}",
                grid.wavenumber(j),
                self.b_eps[j],
                self.b0[j],
                self.pi_eps[j]
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{build_moment_table, PowerLawLaw};
    use crate::testutil::log_slope;

    fn reference() -> (ConstitutiveModel, MomentTable, XiQuadrature) {
        let model = ConstitutiveModel::from_law(PowerLawLaw::new(1.0, 1.0, 0.0, 1.0));
        let moments = build_moment_table(&model).unwrap();
        let quad = XiQuadrature::for_law(model.law()).unwrap();
        (model, moments, quad)
    }

    #[test]
    fn sinc_series_matches_ratio_at_crossover() {
        for &z in &[1e-5, 5e-5, 9.9e-5, 1.1e-4, 1e-3] {
            let series = {
                let z2: f64 = z * z;
                1.0 - z2 / 6.0 + z2 * z2 / 120.0
            };
            let ratio = z.sin() / z;
            assert!((series - ratio).abs() < 1e-15);
            assert!((sinc(z) - sinc(-z)).abs() < 1e-16);
        }
        assert_eq!(sinc(0.0), 1.0);
    }

    #[test]
    fn zero_mode_is_exactly_one() {
        let (model, moments, quad) = reference();
        let grid = Grid::new(std::f64::consts::PI, 64).unwrap();
        let t = build_symbols(&grid, &model, &moments, &quad, 0.5).unwrap();
        assert_eq!(t.b_eps[0], 1.0);
        assert_eq!(t.b0[0], 1.0);
        assert_eq!(t.b_eps_inv[0], 1.0);
    }

    #[test]
    fn limit_symbol_at_reference_mode() {
        let (model, moments, quad) = reference();
        let grid = Grid::new(std::f64::consts::PI, 64).unwrap();
        let t = build_symbols(&grid, &model, &moments, &quad, 0.5).unwrap();
        // k_2 = 2 on this grid; b0 = 1 + (I_a4/12) k^2 = 1 + 4*0.25/12
        assert!((t.b0[2] - (1.0 + 1.0 / 12.0)).abs() < 1e-12);
    }

    #[test]
    fn plateau_matches_moment_ratio() {
        let (model, moments, quad) = reference();
        let grid = Grid::new(std::f64::consts::PI, 64).unwrap();
        let t = build_symbols(&grid, &model, &moments, &quad, 0.5).unwrap();
        assert!((t.b_eps_infty - 3.0).abs() < 1e-10);
        assert!((t.c0_sq_quad - moments.c0_sq).abs() < 1e-12);
    }

    #[test]
    fn symbol_stays_within_bounds() {
        let (model, moments, quad) = reference();
        let grid = Grid::new(4.33, 512).unwrap();
        for &eps in &[0.4, 0.1] {
            let t = build_symbols(&grid, &model, &moments, &quad, eps).unwrap();
            for j in 0..grid.len() {
                assert!(t.b_eps[j] >= 1.0);
                assert!(t.b_eps[j] <= t.b_eps_infty * (1.0 + 1e-12));
                assert!(t.b_eps[j] >= t.lower_bound(&grid, eps, j));
                assert!((t.b_eps[j] * t.b_eps_inv[j] - 1.0).abs() < 1e-14);
            }
            assert!(t.empirical_lower_ratio(&grid, eps) >= t.c0_lower);
        }
    }

    #[test]
    fn symbol_converges_to_limit_quadratically() {
        let (model, moments, quad) = reference();
        let grid = Grid::new(4.33, 512).unwrap();
        let epses = [0.4, 0.2, 0.1, 0.05];
        let mut errs = Vec::new();
        for &eps in &epses {
            let t = build_symbols(&grid, &model, &moments, &quad, eps).unwrap();
            let err = (0..grid.len())
                .filter(|&j| grid.wavenumber(j).abs() <= 5.0)
                .map(|j| (t.b_eps[j] - t.b0[j]).abs())
                .fold(0.0, f64::max);
            errs.push(err);
        }
        let slope = log_slope(&epses, &errs);
        assert!((slope - 2.0).abs() < 0.2, "slope {slope}, errs {errs:?}");
    }

    #[test]
    fn cutoff_mask_is_identity_for_small_eps_on_this_grid() {
        let (model, moments, quad) = reference();
        let grid = Grid::new(4.33, 512).unwrap();
        let t = build_symbols(&grid, &model, &moments, &quad, 0.2).unwrap();
        // C1/eps = 400/0.2 = 2000 far beyond k_max ~ 185
        assert!(t.pi_eps.iter().all(|&m| m == 1.0));
        assert!((t.c1_cutoff - 400.0).abs() < 1e-12);
    }

    #[test]
    fn csv_export_is_sorted_by_wavenumber() {
        let (model, moments, quad) = reference();
        let grid = Grid::new(2.0, 16).unwrap();
        let t = build_symbols(&grid, &model, &moments, &quad, 0.5).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&grid, &mut buf, &["config_hash=x".into()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let ks: Vec<f64> = text
            .lines()
            .skip(2)
            .map(|l| l.split(',').next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(ks.len(), 16);
        assert!(ks.windows(2).all(|w| w[1] > w[0]));
    }
}
