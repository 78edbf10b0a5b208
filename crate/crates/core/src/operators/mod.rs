//! The nonlocal operators of the traveling-wave problem, realized spectrally.
//!
//! All of them are built from one primitive: the sliding window average
//! `(A_eta p)(x) = (1/eta) int_{-eta/2}^{eta/2} p(x + s) ds`, applied at
//! width `eta = eps xi` for every bond length `xi` of a shared quadrature
//! rule. The linear part `B` diagonalizes in Fourier space; the quadratic
//! part `Q`, its linearization `M` at the solitary-wave predictor, and the
//! cubic remainder `P` are assembled nodewise with two FFTs per node.
//!
//! `Q` and `M` share one dealiasing convention (2/3 rule, applied to the
//! averaged inputs and again to the product) so that the exact algebraic
//! identity `Q[w + s v] = Q[w] + s M v + s^2 Q[v]` survives discretization
//! to rounding. `P` is deliberately left un-dealiased: it is a pointwise
//! composition with the constitutive remainder, not a polynomial, and the
//! identity does not extend to it.

pub mod symbols;

pub use symbols::{sinc, SymbolTable};

use crate::constitutive::{
    build_moment_table, ensure_assumption1, ConstitutiveModel, MomentTable, XiQuadrature,
};
use crate::error::{Error, Result};
use crate::grid::{Grid, Profile, Spectrum};
use crate::kdv::{kdv_profile, KdvProfileSpec};
use num_complex::Complex64;

/// Window average `A_eta` of a grid profile via its Fourier symbol
/// `sinc(k eta / 2)`. `eta = 0` is the identity.
pub fn window_average(p: &Profile, eta: f64) -> Profile {
    if eta == 0.0 {
        return p.clone();
    }
    p.transform()
        .multiply_symbol(|k| sinc(0.5 * k * eta))
        .inverse_transform()
}

struct BondNode {
    xi: f64,
    weight: f64,
    /// `w alpha(xi) xi^2`
    alpha_c: f64,
    /// `w beta(xi) xi^3`
    beta_c: f64,
    /// `sinc(eps xi k_j / 2)` per FFT slot.
    factors: Vec<f64>,
}

/// Everything fixed for one `(model, grid, eps)` triple: the quadrature rule
/// certified for the dispersion symbol, the symbol table, the solitary-wave
/// predictor `W0`, and the cached averages `A_{eps xi} W0` that the
/// linearization reuses on every application.
pub struct OperatorContext {
    grid: Grid,
    model: ConstitutiveModel,
    moments: MomentTable,
    profile_spec: KdvProfileSpec,
    quad: XiQuadrature,
    epsilon: f64,
    symbols: SymbolTable,
    nodes: Vec<BondNode>,
    /// 2/3-rule mask per FFT slot.
    keep: Vec<bool>,
    w0: Profile,
    /// Dealiased `A_{eps xi_m} W0` per quadrature node.
    w0_nodes: Vec<Profile>,
}

fn zero_masked(spec: &mut Spectrum, keep: &[bool]) {
    for (c, &k) in spec.coeffs_mut().iter_mut().zip(keep) {
        if !k {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

impl OperatorContext {
    pub fn new(grid: &Grid, model: &ConstitutiveModel, epsilon: f64) -> Result<OperatorContext> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::AssumptionViolated(format!(
                "wave parameter eps = {epsilon} outside (0, 1]"
            )));
        }
        ensure_assumption1(model)?;
        let moments = build_moment_table(model)?;
        let profile_spec = KdvProfileSpec::from_moments(&moments);
        let w0 = kdv_profile(&profile_spec, grid)?;

        // Certify the quadrature against the dispersion symbol: refining the
        // rule must not move any mode by more than 1e-9 relative.
        let mut quad = XiQuadrature::for_law(model.law())?;
        let mut certified = false;
        for _ in 0..4 {
            let coarse = symbols::b_eps_values(grid, model, &quad, epsilon);
            let fine_rule = quad.refined(model.law())?;
            let fine = symbols::b_eps_values(grid, model, &fine_rule, epsilon);
            let defect = coarse
                .iter()
                .zip(&fine)
                .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
                .fold(0.0, f64::max);
            if defect <= 1e-9 {
                certified = true;
                break;
            }
            quad = fine_rule;
        }
        if !certified {
            return Err(Error::QuadratureInsufficient(
                "dispersion symbol did not stabilize under quadrature refinement".into(),
            ));
        }

        let symbols = symbols::build_symbols(grid, model, &moments, &quad, epsilon)?;

        let n = grid.len();
        let nodes: Vec<BondNode> = quad
            .nodes()
            .iter()
            .zip(quad.weights())
            .map(|(&xi, &w)| BondNode {
                xi,
                weight: w,
                alpha_c: w * model.alpha(xi) * xi * xi,
                beta_c: w * model.beta(xi) * xi * xi * xi,
                factors: (0..n)
                    .map(|j| sinc(0.5 * epsilon * xi * grid.wavenumber(j)))
                    .collect(),
            })
            .collect();

        let keep: Vec<bool> = (0..n)
            .map(|j| 3 * grid.mode_index(j).unsigned_abs() as usize <= n)
            .collect();

        let mut w0_hat = w0.transform();
        zero_masked(&mut w0_hat, &keep);
        let w0_nodes = nodes
            .iter()
            .map(|node| node_average(&w0_hat, node))
            .collect();

        Ok(OperatorContext {
            grid: grid.clone(),
            model: model.clone(),
            moments,
            profile_spec,
            quad,
            epsilon,
            symbols,
            nodes,
            keep,
            w0,
            w0_nodes,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn model(&self) -> &ConstitutiveModel {
        &self.model
    }

    pub fn moments(&self) -> &MomentTable {
        &self.moments
    }

    pub fn profile_spec(&self) -> &KdvProfileSpec {
        &self.profile_spec
    }

    pub fn quadrature(&self) -> &XiQuadrature {
        &self.quad
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    /// The solitary-wave predictor `W0` sampled on this grid.
    pub fn kdv_predictor(&self) -> &Profile {
        &self.w0
    }

    fn apply_slots(&self, p: &Profile, sym: &[f64]) -> Profile {
        let mut s = p.transform();
        for (c, &v) in s.coeffs_mut().iter_mut().zip(sym) {
            *c *= v;
        }
        s.inverse_transform()
    }

    /// Linear operator `B`: multiplication by the dispersion symbol.
    pub fn dispersive(&self, p: &Profile) -> Profile {
        self.apply_slots(p, &self.symbols.b_eps)
    }

    /// `B^{-1}`, exact since `B` is diagonal.
    pub fn dispersive_inv(&self, p: &Profile) -> Profile {
        self.apply_slots(p, &self.symbols.b_eps_inv)
    }

    /// Long-wave limit `B0 = Id - (I_a4 / 12) d^2/dx^2`.
    pub fn dispersive_limit(&self, p: &Profile) -> Profile {
        self.apply_slots(p, &self.symbols.b0)
    }

    /// Sharp cutoff to the pass band `|k| <= C1 / eps`.
    pub fn low_pass(&self, p: &Profile) -> Profile {
        self.apply_slots(p, &self.symbols.pi_eps)
    }

    /// `B` assembled nodewise as `p + sum w alpha xi^2 (p - A^2 p) / eps^2`.
    /// Same quadrature as the symbol route but summed in the opposite order;
    /// kept as a structural cross-check of the symbol table.
    pub fn dispersive_nodewise(&self, p: &Profile) -> Profile {
        let hat = p.transform();
        let inv_eps_sq = 1.0 / (self.epsilon * self.epsilon);
        let mut acc: Vec<Complex64> = hat.coeffs().to_vec();
        for node in &self.nodes {
            if node.alpha_c == 0.0 {
                continue;
            }
            for (j, c) in acc.iter_mut().enumerate() {
                let f = node.factors[j];
                *c += node.alpha_c * (1.0 - f * f) * inv_eps_sq * hat.coeffs()[j];
            }
        }
        Spectrum::from_coeffs(&self.grid, acc)
            .expect("accumulator sized by grid")
            .inverse_transform()
    }

    /// Quadratic form `Q[p] = sum w beta xi^3 A (A p)^2` over the bond rule.
    pub fn quadratic(&self, p: &Profile) -> Profile {
        let mut hat = p.transform();
        zero_masked(&mut hat, &self.keep);
        let mut acc = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for node in &self.nodes {
            if node.beta_c == 0.0 {
                continue;
            }
            let avg = node_average(&hat, node);
            let sq = avg.mul_pointwise(&avg).transform();
            for (j, c) in acc.iter_mut().enumerate() {
                if self.keep[j] {
                    *c += node.beta_c * node.factors[j] * sq.coeffs()[j];
                }
            }
        }
        Spectrum::from_coeffs(&self.grid, acc)
            .expect("accumulator sized by grid")
            .inverse_transform()
    }

    /// Long-wave limit of `Q`: plain pointwise `I_b3 p^2`.
    pub fn quadratic_limit(&self, p: &Profile) -> Profile {
        p.mul_pointwise(p).scale(self.moments.i_b3)
    }

    /// Derivative of `Q` at `W0`: `M v = 2 sum w beta xi^3 A ((A W0)(A v))`.
    pub fn linearized_quadratic(&self, v: &Profile) -> Profile {
        let mut hat = v.transform();
        zero_masked(&mut hat, &self.keep);
        let mut acc = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for (node, w0n) in self.nodes.iter().zip(&self.w0_nodes) {
            if node.beta_c == 0.0 {
                continue;
            }
            let avg = node_average(&hat, node);
            let prod = avg.mul_pointwise(w0n).transform();
            for (j, c) in acc.iter_mut().enumerate() {
                if self.keep[j] {
                    *c += 2.0 * node.beta_c * node.factors[j] * prod.coeffs()[j];
                }
            }
        }
        Spectrum::from_coeffs(&self.grid, acc)
            .expect("accumulator sized by grid")
            .inverse_transform()
    }

    /// `L = B - M`, the linearization of the full profile map at `W0`.
    pub fn linearized(&self, v: &Profile) -> Profile {
        self.dispersive(v).sub(&self.linearized_quadratic(v))
    }

    /// Long-wave limit `L0 v = B0 v - 2 I_b3 W0 v`; annihilates `W0'`.
    pub fn linearized_limit(&self, v: &Profile) -> Profile {
        self.dispersive_limit(v)
            .axpy(-2.0 * self.moments.i_b3, &v.mul_pointwise(&self.w0))
    }

    /// The raw bond-force sum `sum w xi A f(eps^2 xi A p)` with the complete
    /// force `f(r) = alpha r + beta r^2 + dpsi(r)` evaluated pointwise, no
    /// dealiasing and no splitting. This is the other face of the profile
    /// equation (`= eps^2 c_eps^2 p` at a true wave) and is assembled without
    /// touching `dispersive`/`quadratic`/`remainder`, so it cross-checks them.
    pub fn bond_force_sum(&self, p: &Profile) -> Profile {
        let hat = p.transform();
        let eps2 = self.epsilon * self.epsilon;
        let mut acc = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for node in &self.nodes {
            let avg = node_average(&hat, node);
            let vals: Vec<f64> = avg
                .values()
                .iter()
                .map(|&t| self.model.bond_force(eps2 * node.xi * t, node.xi))
                .collect();
            let fhat = Profile::from_values(&self.grid, vals)
                .expect("values sized by grid")
                .transform();
            let c = node.weight * node.xi;
            for (j, a) in acc.iter_mut().enumerate() {
                *a += c * node.factors[j] * fhat.coeffs()[j];
            }
        }
        Spectrum::from_coeffs(&self.grid, acc)
            .expect("accumulator sized by grid")
            .inverse_transform()
    }

    /// Cubic remainder `P[p] = eps^{-6} sum w xi A dpsi(eps^2 xi A p)`.
    /// Pointwise composition, so no dealiasing applies. Errors if any bond
    /// strain `eps^2 xi (A p)(x)` leaves the certified interval `[-1, 1]`.
    pub fn remainder(&self, p: &Profile) -> Result<Profile> {
        if !self.model.has_remainder() {
            return Ok(Profile::zeros(&self.grid));
        }
        let hat = p.transform();
        let eps2 = self.epsilon * self.epsilon;
        let inv_eps6 = 1.0 / (eps2 * eps2 * eps2);
        let mut acc = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        let mut max_r = 0.0_f64;
        for node in &self.nodes {
            let avg = node_average(&hat, node);
            let mut vals = Vec::with_capacity(self.grid.len());
            for &t in avg.values() {
                let r = eps2 * node.xi * t;
                max_r = max_r.max(r.abs());
                vals.push(self.model.dpsi(r, node.xi));
            }
            let fhat = Profile::from_values(&self.grid, vals)?.transform();
            let c = node.weight * node.xi * inv_eps6;
            for (j, a) in acc.iter_mut().enumerate() {
                *a += c * node.factors[j] * fhat.coeffs()[j];
            }
        }
        if max_r > 1.0 {
            return Err(Error::RemainderBoundExceeded { max_abs_r: max_r });
        }
        Spectrum::from_coeffs(&self.grid, acc).map(|s| s.inverse_transform())
    }
}

fn node_average(hat: &Spectrum, node: &BondNode) -> Profile {
    let mut t = hat.clone();
    for (c, &f) in t.coeffs_mut().iter_mut().zip(&node.factors) {
        *c *= f;
    }
    t.inverse_transform()
}
