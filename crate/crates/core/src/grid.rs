//! Periodic pseudospectral grid, real profiles and their Fourier transforms.
//!
//! The computational domain is `[-L, L)` sampled at `N` evenly spaced nodes
//! `x_i = -L + i*h`, `h = 2L/N`, with `N` even so the nodes contain `0` and
//! come in `±x` pairs. Wavenumbers follow the usual FFT layout
//! `k_j = pi*j/L` for signed `j in {-N/2, ..., N/2-1}`.
//!
//! Conventions fixed here and relied on elsewhere:
//! * the forward transform is the plain unnormalized FFT, the inverse carries
//!   the `1/N` factor, so `l2_norm(p)^2 = (2L/N^2) * sum |coeff|^2`;
//! * `derivative` multiplies by `(i k)^order` and zeroes the Nyquist mode for
//!   odd orders;
//! * `project_even` reflects indices (`i <-> N-i`), which is an exact
//!   orthogonal projection and bitwise idempotent.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Deserialize;

use crate::error::{Error, Result};

/// Periodic grid on `[-L, L)` with precomputed FFT plans.
#[derive(Clone)]
pub struct Grid {
    l_dom: f64,
    n: usize,
    h: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Grid {
    pub fn new(l_dom: f64, n: usize) -> Result<Grid> {
        if !(l_dom > 0.0) || !l_dom.is_finite() {
            return Err(Error::Grid(format!("half-length must be positive, got {l_dom}")));
        }
        if n < 4 || n % 2 != 0 {
            return Err(Error::Grid(format!("size must be even and at least 4, got {n}")));
        }
        let mut planner = FftPlanner::new();
        Ok(Grid {
            l_dom,
            n,
            h: 2.0 * l_dom / n as f64,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        })
    }

    pub fn half_length(&self) -> f64 {
        self.l_dom
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.l_dom + i as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Signed mode index for FFT slot `j` (Nyquist maps to `-N/2`).
    pub fn mode_index(&self, j: usize) -> i64 {
        let j = j as i64;
        let n = self.n as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Wavenumber of FFT slot `j`: `pi * signed_index / L`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        std::f64::consts::PI * self.mode_index(j) as f64 / self.l_dom
    }

    /// Largest resolved wavenumber magnitude `pi*(N/2)/L`.
    pub fn max_wavenumber(&self) -> f64 {
        std::f64::consts::PI * (self.n as f64 / 2.0) / self.l_dom
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.l_dom == other.l_dom
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("l_dom", &self.l_dom)
            .field("n", &self.n)
            .field("h", &self.h)
            .finish()
    }
}

/// Real-valued samples on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    grid: Grid,
    values: Vec<f64>,
}

impl Profile {
    pub fn zeros(grid: &Grid) -> Profile {
        Profile {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Profile {
        Profile {
            grid: grid.clone(),
            values: (0..grid.len()).map(|i| f(grid.node(i))).collect(),
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Profile> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "profile length {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Profile {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Forward FFT (unnormalized).
    pub fn transform(&self) -> Spectrum {
        let mut buf: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.grid.fwd.process(&mut buf);
        Spectrum {
            grid: self.grid.clone(),
            coeffs: buf,
        }
    }

    /// Spectral derivative of the given order (1, 2 or 4 are the supported
    /// uses; any positive order works). Odd orders zero the Nyquist mode.
    pub fn derivative(&self, order: u32) -> Profile {
        let mut spec = self.transform();
        let n = self.grid.len();
        for j in 0..n {
            if order % 2 == 1 && self.grid.mode_index(j) == -(n as i64) / 2 {
                spec.coeffs[j] = Complex64::new(0.0, 0.0);
                continue;
            }
            let ik = Complex64::new(0.0, self.grid.wavenumber(j));
            spec.coeffs[j] *= ik.powu(order);
        }
        spec.inverse_transform()
    }

    /// Even part `(p(x) + p(-x)) / 2` via exact index reflection.
    pub fn project_even(&self) -> Profile {
        let n = self.grid.len();
        let v = &self.values;
        let mut out = vec![0.0; n];
        out[0] = v[0];
        for i in 1..n {
            out[i] = 0.5 * (v[i] + v[n - i]);
        }
        Profile {
            grid: self.grid.clone(),
            values: out,
        }
    }

    /// Discrete L2 norm `sqrt(h * sum p_i^2)`.
    pub fn l2_norm(&self) -> f64 {
        (self.h_dot(self)).sqrt()
    }

    /// Sobolev W^{2,2} norm via spectral derivatives.
    pub fn w22_norm(&self) -> f64 {
        let d1 = self.derivative(1);
        let d2 = self.derivative(2);
        (self.h_dot(self) + d1.h_dot(&d1) + d2.h_dot(&d2)).sqrt()
    }

    /// Weighted inner product `h * sum u_i v_i`.
    pub fn h_dot(&self, other: &Profile) -> f64 {
        self.grid.spacing()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.grid.len() as f64
    }

    pub fn scale(&self, c: f64) -> Profile {
        self.map(|v| c * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Profile {
        Profile {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn add(&self, other: &Profile) -> Profile {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Profile) -> Profile {
        self.zip(other, |a, b| a - b)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &Profile) -> Profile {
        self.zip(other, |a, b| a + c * b)
    }

    pub fn mul_pointwise(&self, other: &Profile) -> Profile {
        self.zip(other, |a, b| a * b)
    }

    fn zip(&self, other: &Profile, f: impl Fn(f64, f64) -> f64) -> Profile {
        assert_eq!(self.grid, other.grid, "profiles live on different grids");
        Profile {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Write `x,value` rows preceded by `#`-prefixed comment lines.
    pub fn write_csv(&self, w: &mut impl Write, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "x,value")?;
        for i in 0..self.grid.len() {
            writeln!(w, "{},{}", self.grid.node(i), self.values[i])?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "grid": { "L_dom": self.grid.half_length(), "N": self.grid.len() },
            "values": self.values,
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Profile> {
        #[derive(Deserialize)]
        struct GridRepr {
            #[serde(rename = "L_dom")]
            l_dom: f64,
            #[serde(rename = "N")]
            n: usize,
        }
        #[derive(Deserialize)]
        struct ProfileRepr {
            grid: GridRepr,
            values: Vec<f64>,
        }
        let repr: ProfileRepr = serde_json::from_value(value.clone())?;
        let grid = Grid::new(repr.grid.l_dom, repr.grid.n)?;
        Profile::from_values(&grid, repr.values)
    }
}

/// Complex Fourier coefficients of a [`Profile`] in FFT slot order.
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    /// Wrap raw FFT-slot coefficients produced by operator assembly.
    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Spectrum> {
        if coeffs.len() != grid.len() {
            return Err(Error::Grid(format!(
                "coefficient length {} does not match grid size {}",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(Spectrum {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Inverse FFT with the `1/N` normalization; imaginary parts are dropped
    /// (inputs represent real profiles).
    pub fn inverse_transform(&self) -> Profile {
        let mut buf = self.coeffs.clone();
        self.grid.inv.process(&mut buf);
        let scale = 1.0 / self.grid.len() as f64;
        Profile {
            grid: self.grid.clone(),
            values: buf.iter().map(|c| c.re * scale).collect(),
        }
    }

    /// Multiply slot `j` by `symbol(k_j)`.
    pub fn multiply_symbol(&self, symbol: impl Fn(f64) -> f64) -> Spectrum {
        let mut out = self.clone();
        for j in 0..out.coeffs.len() {
            out.coeffs[j] *= symbol(self.grid.wavenumber(j));
        }
        out
    }

    /// Largest deviation from Hermitian symmetry, relative to the coefficient
    /// scale; zero (to rounding) whenever the spectrum represents real data.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.len();
        let scale = self
            .coeffs
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.norm()))
            .max(1e-300);
        let mut worst: f64 = self.coeffs[0].im.abs();
        for j in 1..n {
            let d = (self.coeffs[j] - self.coeffs[n - j].conj()).norm();
            worst = worst.max(d);
        }
        worst / scale
    }

    /// Parseval sum `(2L/N^2) * sum |c_j|^2`, equal to `l2_norm^2`.
    pub fn parseval_l2_sq(&self) -> f64 {
        let n = self.grid.len() as f64;
        2.0 * self.grid.half_length() / (n * n)
            * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Evaluate the real trigonometric interpolant at an arbitrary point.
    /// The Nyquist mode contributes a pure cosine.
    pub fn eval_at(&self, x: f64) -> f64 {
        let n = self.grid.len();
        let l = self.grid.half_length();
        let phase0 = std::f64::consts::PI * (x + l) / l;
        let mut acc = self.coeffs[0].re;
        for j in 1..n / 2 {
            let (s, c) = (phase0 * j as f64).sin_cos();
            let cj = self.coeffs[j];
            acc += 2.0 * (cj.re * c - cj.im * s);
        }
        acc += self.coeffs[n / 2].re * (phase0 * (n as f64 / 2.0)).cos();
        acc / n as f64
    }

    /// Resample onto a finer grid over the same domain by zero padding.
    /// Exact for the trigonometric interpolant; the Nyquist coefficient is
    /// split between `+-N/2` to keep the result real.
    pub fn resample(&self, n_new: usize) -> Result<Profile> {
        let n = self.grid.len();
        if n_new < n {
            return Err(Error::Grid(format!(
                "resample target {n_new} is below source size {n}"
            )));
        }
        let target = Grid::new(self.grid.half_length(), n_new)?;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n_new];
        let ratio = n_new as f64 / n as f64;
        for j in 0..n {
            let m = self.grid.mode_index(j);
            let c = self.coeffs[j] * ratio;
            if m.unsigned_abs() as usize == n / 2 {
                let half = 0.5 * c;
                coeffs[n / 2] += half;
                coeffs[n_new - n / 2] += half;
            } else {
                let slot = if m >= 0 { m as usize } else { n_new - m.unsigned_abs() as usize };
                coeffs[slot] = c;
            }
        }
        Spectrum::from_coeffs(&target, coeffs).map(|s| s.inverse_transform())
    }

    /// Spectrum of the profile translated by `delta`, i.e. `p(x - delta)`.
    /// The Nyquist mode keeps only its cosine part.
    pub fn translated(&self, delta: f64) -> Spectrum {
        let n = self.grid.len();
        let mut out = self.clone();
        for j in 0..n {
            let k = self.grid.wavenumber(j);
            if self.grid.mode_index(j).unsigned_abs() as usize == n / 2 {
                out.coeffs[j] *= (k * delta).cos();
            } else {
                out.coeffs[j] *= Complex64::new(0.0, -k * delta).exp();
            }
        }
        out
    }

    /// Spectral antiderivative: slot `j != 0` divided by `i k_j`, mean slot
    /// zeroed (zero-mean convention), Nyquist zeroed.
    pub fn antiderivative(&self) -> Spectrum {
        let n = self.grid.len();
        let mut out = self.clone();
        out.coeffs[0] = Complex64::new(0.0, 0.0);
        out.coeffs[n / 2] = Complex64::new(0.0, 0.0);
        for j in 1..n {
            if j == n / 2 {
                continue;
            }
            let ik = Complex64::new(0.0, self.grid.wavenumber(j));
            out.coeffs[j] /= ik;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sech2(x: f64) -> f64 {
        let t = (-x.abs()).exp();
        let s = 2.0 * t / (1.0 + t * t);
        s * s
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Grid::new(0.0, 64).is_err());
        assert!(Grid::new(10.0, 63).is_err());
        assert!(Grid::new(10.0, 2).is_err());
        assert!(Grid::new(-3.0, 64).is_err());
    }

    #[test]
    fn nodes_are_symmetric_and_contain_zero() {
        let g = Grid::new(5.0, 16).unwrap();
        assert_eq!(g.node(0), -5.0);
        assert_eq!(g.node(8), 0.0);
        for i in 1..16 {
            assert_eq!(g.node(i), -g.node(16 - i));
        }
    }

    #[test]
    fn wavenumbers_follow_fft_layout() {
        let g = Grid::new(std::f64::consts::PI, 8).unwrap();
        let ks: Vec<f64> = (0..8).map(|j| g.wavenumber(j)).collect();
        let expect = [0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0];
        for (a, b) in ks.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn round_trip_is_tight() {
        let g = Grid::new(7.0, 128).unwrap();
        let p = Profile::from_fn(&g, |x| (0.3 * x).sin() + 0.2 * (1.1 * x).cos() + x.tanh());
        let q = p.transform().inverse_transform();
        let err = p
            .values()
            .iter()
            .zip(q.values())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-12, "round trip error {err}");
    }

    #[test]
    fn single_cosine_occupies_one_mode_pair() {
        let g = Grid::new(std::f64::consts::PI, 32).unwrap();
        let p = Profile::from_fn(&g, |x| (3.0 * x).cos());
        let s = p.transform();
        for j in 0..32 {
            let mag = s.coeffs()[j].norm();
            if g.mode_index(j).unsigned_abs() == 3 {
                assert!((mag - 16.0).abs() < 1e-10, "slot {j} magnitude {mag}");
            } else {
                assert!(mag < 1e-10, "slot {j} magnitude {mag}");
            }
        }
    }

    #[test]
    fn hermitian_defect_small_for_real_data() {
        let g = Grid::new(4.0, 64).unwrap();
        let p = Profile::from_fn(&g, |x| sech2(x) + 0.1 * (2.0 * x).sin());
        assert!(p.transform().hermitian_defect() < 1e-12);
    }

    #[test]
    fn derivative_of_sine_is_k_cosine() {
        let g = Grid::new(std::f64::consts::PI, 64).unwrap();
        let p = Profile::from_fn(&g, |x| (5.0 * x).sin());
        let d = p.derivative(1);
        let expect = Profile::from_fn(&g, |x| 5.0 * (5.0 * x).cos());
        assert!(d.sub(&expect).max_abs() < 1e-10);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = Grid::new(3.0, 32).unwrap();
        let p = Profile::from_fn(&g, |_| 2.5);
        for order in [1, 2, 4] {
            assert!(p.derivative(order).max_abs() < 1e-12);
        }
    }

    #[test]
    fn second_derivative_of_sech2_matches_analytic() {
        let g = Grid::new(40.0, 1024).unwrap();
        let p = Profile::from_fn(&g, |x| sech2(x / 2.0));
        let d2 = p.derivative(2);
        // closed form: (sech^2(ax))'' = 2 a^2 f (2 - 3 f) with f = sech^2(ax)
        let expect = Profile::from_fn(&g, |x| {
            let f = sech2(x / 2.0);
            0.5 * f * (2.0 - 3.0 * f)
        });
        assert!(d2.sub(&expect).max_abs() < 1e-8);
    }

    #[test]
    fn fourth_derivative_consistent_with_twice_second() {
        let g = Grid::new(20.0, 256).unwrap();
        let p = Profile::from_fn(&g, |x| sech2(x));
        let a = p.derivative(4);
        let b = p.derivative(2).derivative(2);
        assert!(a.sub(&b).max_abs() < 1e-7);
    }

    #[test]
    fn project_even_examples() {
        let g = Grid::new(2.0, 16).unwrap();
        let even = Profile::from_fn(&g, |x| (std::f64::consts::PI * x).cos());
        assert!(even.sub(&even.project_even()).max_abs() < 1e-15);
        // odd and 2L-periodic, so the self-paired boundary node samples zero
        let odd = Profile::from_fn(&g, |x| (std::f64::consts::PI * x / 2.0).sin());
        assert!(odd.project_even().max_abs() < 1e-15);
    }

    #[test]
    fn project_even_is_bitwise_idempotent_and_self_adjoint() {
        let g = Grid::new(3.0, 64).unwrap();
        let p = Profile::from_fn(&g, |x| (x * 0.7).sin() + (x * 1.9).cos() + 0.01 * x);
        let q = Profile::from_fn(&g, |x| x.tanh() + 0.3 * (2.0 * x).cos());
        let pp = p.project_even();
        assert_eq!(pp.values(), pp.project_even().values());
        let lhs = pp.h_dot(&q);
        let rhs = p.h_dot(&q.project_even());
        assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn second_derivative_of_even_profile_is_even() {
        let g = Grid::new(10.0, 128).unwrap();
        let p = Profile::from_fn(&g, |x| sech2(x) + 0.2 * (0.9 * x).cos());
        let d2 = p.derivative(2);
        let n = g.len();
        let scale = d2.max_abs();
        for i in 1..n {
            assert!(
                (d2.values()[i] - d2.values()[n - i]).abs() <= 1e-12 * scale,
                "asymmetry at index {i}"
            );
        }
    }

    #[test]
    fn l2_norm_examples() {
        let g = Grid::new(20.0, 512).unwrap();
        assert_eq!(Profile::zeros(&g).l2_norm(), 0.0);
        let gauss = Profile::from_fn(&g, |x| (-x * x / 2.0).exp());
        let expect = std::f64::consts::PI.powf(0.25);
        assert!((gauss.l2_norm() - expect).abs() < 1e-10);
        assert!(gauss.w22_norm() >= gauss.l2_norm());
    }

    #[test]
    fn parseval_matches_l2() {
        let g = Grid::new(6.0, 128).unwrap();
        let p = Profile::from_fn(&g, |x| (1.3 * x).sin() + sech2(x));
        let direct = p.l2_norm().powi(2);
        let spectral = p.transform().parseval_l2_sq();
        assert!((direct - spectral).abs() < 1e-10 * direct.max(1.0));
    }

    #[test]
    fn trig_interpolation_reproduces_nodes_and_midpoints() {
        let g = Grid::new(12.0, 256).unwrap();
        let k0 = std::f64::consts::PI / 4.0;
        let f = move |x: f64| sech2(x) + 0.3 * (k0 * x).cos();
        let p = Profile::from_fn(&g, f);
        let s = p.transform();
        for i in (0..256).step_by(23) {
            let x = g.node(i);
            assert!((s.eval_at(x) - f(x)).abs() < 1e-11);
        }
        // off-node accuracy is spectral for this smooth, well decayed profile
        for &x in &[0.13, -1.77, 2.5001, -10.9] {
            assert!((s.eval_at(x) - f(x)).abs() < 1e-7, "x = {x}");
        }
    }

    #[test]
    fn antiderivative_inverts_derivative_on_zero_mean_data() {
        let g = Grid::new(std::f64::consts::PI, 64).unwrap();
        let p = Profile::from_fn(&g, |x| (2.0 * x).sin() + 0.5 * (3.0 * x).cos());
        let anti = p.transform().antiderivative().inverse_transform();
        assert!(anti.derivative(1).sub(&p).max_abs() < 1e-11);
        assert!(anti.mean().abs() < 1e-13);
    }

    #[test]
    fn resample_reproduces_interpolant_on_finer_grid() {
        let g = Grid::new(10.0, 64).unwrap();
        let p = Profile::from_fn(&g, |x| sech2(0.8 * x) + 0.1 * (std::f64::consts::PI * x / 10.0).cos());
        let s = p.transform();
        let fine = s.resample(160).unwrap();
        let fg = fine.grid().clone();
        assert_eq!(fg.len(), 160);
        assert_eq!(fg.half_length(), 10.0);
        for i in 0..fg.len() {
            assert!((fine.values()[i] - s.eval_at(fg.node(i))).abs() < 1e-11);
        }
        // same size round-trips
        let same = s.resample(64).unwrap();
        assert!(same.sub(&p).max_abs() < 1e-12);
        assert!(s.resample(32).is_err());
    }

    #[test]
    fn translation_shifts_the_profile() {
        let g = Grid::new(8.0, 128).unwrap();
        // band limited, so the fractional shift is exact
        let f = |x: f64| {
            0.2 * (std::f64::consts::PI * x / 4.0).sin() + 0.7 * (std::f64::consts::PI * x / 8.0).cos()
        };
        let p = Profile::from_fn(&g, f);
        let delta = 0.731;
        let moved = p.transform().translated(delta).inverse_transform();
        for i in 0..g.len() {
            assert!((moved.values()[i] - f(g.node(i) - delta)).abs() < 1e-12, "node {i}");
        }
        let back = moved.transform().translated(-delta).inverse_transform();
        assert!(back.sub(&p).max_abs() < 1e-12);
    }

    #[test]
    fn csv_and_json_round_trip() {
        let g = Grid::new(2.0, 16).unwrap();
        let p = Profile::from_fn(&g, |x| x * x);
        let mut buf = Vec::new();
        p.write_csv(&mut buf, &["config_hash=deadbeef".into()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# config_hash=deadbeef\nx,value\n"));
        assert_eq!(text.lines().count(), 2 + 16);

        let back = Profile::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
    }
}
