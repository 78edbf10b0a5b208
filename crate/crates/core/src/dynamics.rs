//! Direct time integration of the lattice equation of motion.
//!
//! Everything here lives in unscaled physical coordinates: a periodic chain
//! of `Ny` nodes with spacing `dy`, bonds reaching out to the horizon, and a
//! velocity-Verlet loop on `u_tt = force(u)`. The solver's waves are injected
//! through [`init_from_wave`] and judged by whether they translate rigidly at
//! their predicted speed, which [`measure_wave_speed`] extracts from the
//! velocity field via subcell cross-correlation.
//!
//! The bond quadrature deliberately reuses the lattice offsets (`xi_j = j dy`,
//! trapezoid) instead of the Gauss nodes used elsewhere, so no off-grid
//! interpolation of `u` ever happens; the two discretizations meet only in
//! integrated observables.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::constitutive::ConstitutiveModel;
use crate::error::{Error, Result};
use crate::grid::{Grid, Profile};
use crate::solver::WaveSolution;
use std::io::Write;

#[derive(Clone, Copy, Debug)]
struct Bond {
    /// Offset in cells; the bond connects `i` to `i + cells`.
    cells: usize,
    xi: f64,
    weight: f64,
    /// Effective linear stiffness; cell-averaged on the first node when the
    /// model is singular at the origin.
    a_eff: f64,
    beta: f64,
}

/// Trapezoid quadrature of the bond integral on lattice-commensurate nodes.
#[derive(Clone, Debug)]
pub struct BondTable {
    dy: f64,
    bonds: Vec<Bond>,
}

impl BondTable {
    /// Build the table for a lattice of spacing `dy`. At least four bonds
    /// must fit under the horizon or the quadrature is meaningless.
    pub fn new(model: &ConstitutiveModel, dy: f64) -> Result<BondTable> {
        if !(dy > 0.0) || !dy.is_finite() {
            return Err(Error::Grid(format!("lattice spacing must be positive, got {dy}")));
        }
        let h = model.horizon();
        let m = (h / dy - 1e-9).ceil() as usize;
        if m < 4 {
            return Err(Error::ResolutionTooCoarse { dy, limit: h / 4.0 });
        }
        let mut bonds = Vec::with_capacity(m);
        for j in 1..=m {
            let xi = j as f64 * dy;
            let weight = if j == m { 0.5 * dy } else { dy };
            let a_eff = if j == 1 {
                model
                    .alpha_cell_average(0.5 * dy, 1.5 * dy)
                    .unwrap_or_else(|| model.alpha(dy))
            } else {
                model.alpha(xi)
            };
            bonds.push(Bond {
                cells: j,
                xi,
                weight,
                a_eff,
                beta: model.beta(xi),
            });
        }
        Ok(BondTable { dy, bonds })
    }

    pub fn spacing(&self) -> f64 {
        self.dy
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    /// `sum w a_eff xi^2`, the quadrature's view of the second moment. Should
    /// land on the sound-speed moment up to O(dy^2).
    pub fn second_moment(&self) -> f64 {
        self.bonds
            .iter()
            .map(|b| b.weight * b.a_eff * b.xi * b.xi)
            .sum()
    }

    /// Discrete dispersion relation of the linearized chain:
    /// `omega^2(k) = sum w a_eff 2(1 - cos(k xi))`.
    pub fn dispersion(&self, k: f64) -> f64 {
        self.bonds
            .iter()
            .map(|b| b.weight * b.a_eff * 2.0 * (1.0 - (k * b.xi).cos()))
            .sum()
    }
}

/// Acceleration of every node. `winding` is the displacement jump across the
/// periodic seam: bonds that wrap read `u + winding` on the right copy (and
/// `u - winding` on the left), so a quasi-periodic field with uniform strain
/// carries no force.
///
/// Gather form: each node sums its own outgoing and incoming bond forces, so
/// the map is embarrassingly parallel and the total force cancels pairwise.
pub fn lattice_force(
    model: &ConstitutiveModel,
    table: &BondTable,
    u: &[f64],
    winding: f64,
) -> Vec<f64> {
    let n = u.len();
    let span = table.bonds.last().map_or(0, |b| b.cells);
    assert!(span < n, "bond span {span} does not fit in a lattice of {n} nodes");
    let has_psi = model.has_remainder();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for b in &table.bonds {
                let j = b.cells;
                let (ip, wrap_p) = if i + j >= n { (i + j - n, winding) } else { (i + j, 0.0) };
                let (im, wrap_m) = if i < j { (i + n - j, winding) } else { (i - j, 0.0) };
                let rp = u[ip] + wrap_p - u[i];
                let rm = u[i] - (u[im] - wrap_m);
                let mut fp = b.a_eff * rp + b.beta * rp * rp;
                let mut fm = b.a_eff * rm + b.beta * rm * rm;
                if has_psi {
                    fp += model.dpsi(rp, b.xi);
                    fm += model.dpsi(rm, b.xi);
                }
                acc += b.weight * (fp - fm);
            }
            acc
        })
        .collect()
}

/// Displacement and velocity of the chain at one instant.
#[derive(Clone, Debug)]
pub struct SimState {
    pub time: f64,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// Jump of `u` across the periodic seam (zero for a truly periodic field).
    pub winding: f64,
    accel: Option<Vec<f64>>,
}

impl SimState {
    pub fn new(u: Vec<f64>, du: Vec<f64>, winding: f64) -> SimState {
        assert_eq!(u.len(), du.len());
        SimState {
            time: 0.0,
            u,
            du,
            winding,
            accel: None,
        }
    }

    /// One velocity-Verlet step. The acceleration at the new positions is
    /// cached, so a trajectory costs one force evaluation per step and
    /// reversing `dt` retraces it exactly.
    pub fn step(&mut self, model: &ConstitutiveModel, table: &BondTable, dt: f64) -> Result<()> {
        let a0 = match self.accel.take() {
            Some(a) => a,
            None => lattice_force(model, table, &self.u, self.winding),
        };
        let half = 0.5 * dt;
        for (du, a) in self.du.iter_mut().zip(&a0) {
            *du += half * a;
        }
        for (u, du) in self.u.iter_mut().zip(&self.du) {
            *u += dt * du;
        }
        let a1 = lattice_force(model, table, &self.u, self.winding);
        for (du, a) in self.du.iter_mut().zip(&a1) {
            *du += half * a;
        }
        self.accel = Some(a1);
        self.time += dt;
        let max_u = self.u.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        if !max_u.is_finite() || max_u > 1e6 {
            return Err(Error::BlowUp {
                time: self.time,
                max_abs_u: max_u,
            });
        }
        Ok(())
    }

    /// `sum du dy`, conserved by the antisymmetry of the bond forces.
    pub fn momentum(&self, dy: f64) -> f64 {
        dy * self.du.iter().sum::<f64>()
    }

    /// Kinetic plus bond potential energy, each bond counted once. Uses the
    /// same effective stiffness as the force, so Verlet conserves it up to
    /// the usual bounded O(dt^2) oscillation.
    pub fn energy(&self, model: &ConstitutiveModel, table: &BondTable) -> f64 {
        let n = self.u.len();
        let has_psi = model.has_remainder();
        let mut e = 0.0;
        for i in 0..n {
            let mut site = 0.5 * self.du[i] * self.du[i];
            for b in &table.bonds {
                let j = b.cells;
                let (ip, wrap) = if i + j >= n { (i + j - n, self.winding) } else { (i + j, 0.0) };
                let r = self.u[ip] + wrap - self.u[i];
                let mut phi = 0.5 * b.a_eff * r * r + b.beta * r * r * r / 3.0;
                if has_psi {
                    phi += model.psi(r, b.xi);
                }
                site += b.weight * phi;
            }
            e += site;
        }
        table.dy * e
    }

    /// Freeze the velocity field for the measurement pipeline.
    pub fn snapshot(&self, grid: &Grid) -> Result<Snapshot> {
        Ok(Snapshot {
            time: self.time,
            du: Profile::from_values(grid, self.du.clone())?,
        })
    }

    pub fn write_snapshot_csv(&self, grid: &Grid, w: &mut impl Write, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "y,u,du")?;
        for i in 0..self.u.len() {
            writeln!(w, "{:.12e},{:.12e},{:.12e}", grid.node(i), self.u[i], self.du[i])?;
        }
        Ok(())
    }
}

/// Sample the traveling-wave ansatz `u(y) = eps U(eps y)`,
/// `du(y) = -eps^2 c_eps W(eps y)` on the lattice, where `U` is the
/// antiderivative of `W`. The mean of `W` makes `U` a kink, so `u` picks up a
/// winding across the seam; the force evaluation is told about it.
pub fn init_from_wave(sol: &WaveSolution, grid: &Grid) -> Result<SimState> {
    let eps = sol.epsilon;
    let wave_grid = sol.w_eps.grid().clone();
    let l_dom = wave_grid.half_length();
    let dy = grid.spacing();
    let limit = 0.2 / (eps * sol.decay_rate);
    if dy > limit {
        return Err(Error::ResolutionTooCoarse { dy, limit });
    }
    let scaled = eps * grid.half_length();
    if scaled < l_dom * (1.0 - 1e-9) {
        return Err(Error::DomainMismatch {
            scaled,
            required: l_dom,
        });
    }
    let c = sol.c_eps();
    let mu = sol.w_eps.mean();
    let winding = eps * eps * mu * 2.0 * grid.half_length();
    let ny = grid.len();
    let w_hat = sol.w_eps.transform();
    let u_per_hat = w_hat.antiderivative();

    let aligned = (scaled - l_dom).abs() <= 1e-9 * l_dom && ny >= wave_grid.len();
    let (u, du) = if aligned {
        // the scaled lattice coincides with a refinement of the wave grid, so
        // zero-padding resamples both fields exactly
        let u_per = u_per_hat.resample(ny)?;
        let w_fine = w_hat.resample(ny)?;
        let u = (0..ny)
            .map(|i| {
                let x = -l_dom + i as f64 * 2.0 * l_dom / ny as f64;
                eps * (mu * x + u_per.values()[i])
            })
            .collect();
        let du = w_fine.values().iter().map(|&wv| -eps * eps * c * wv).collect();
        (u, du)
    } else {
        let mut u = Vec::with_capacity(ny);
        let mut du = Vec::with_capacity(ny);
        for i in 0..ny {
            let x = eps * grid.node(i);
            u.push(eps * (mu * x + u_per_hat.eval_at(x)));
            du.push(-eps * eps * c * w_hat.eval_at(x));
        }
        (u, du)
    };
    Ok(SimState::new(u, du, winding))
}

/// Velocity field at one recorded instant.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub time: f64,
    pub du: Profile,
}

/// Advance `steps` Verlet steps, recording every `stride`-th state (and the
/// initial one).
pub fn record_evolution(
    state: &mut SimState,
    model: &ConstitutiveModel,
    table: &BondTable,
    grid: &Grid,
    dt: f64,
    steps: usize,
    stride: usize,
) -> Result<Vec<Snapshot>> {
    let stride = stride.max(1);
    let mut snaps = vec![state.snapshot(grid)?];
    for s in 1..=steps {
        state.step(model, table, dt)?;
        if s % stride == 0 || s == steps {
            snaps.push(state.snapshot(grid)?);
        }
    }
    Ok(snaps)
}

/// Speed and rigidity of a recorded evolution.
#[derive(Clone, Debug)]
pub struct SpeedMeasurement {
    /// Least-squares slope of the tracked translation against time.
    pub speed: f64,
    /// Relative L2 mismatch between the last snapshot, shifted back, and the
    /// first.
    pub shape_drift: f64,
    pub times: Vec<f64>,
    /// Accumulated translation of each snapshot relative to the first,
    /// unwrapped across the periodic seam.
    pub shifts: Vec<f64>,
}

/// Lag (in cells, signed, subcell-refined) at which `s` best matches `r`
/// shifted right, from the peak of their circular cross-correlation.
fn correlation_lag(r: &Profile, s: &Profile) -> f64 {
    let n = r.grid().len();
    let rh = r.transform();
    let sh = s.transform();
    let prod: Vec<Complex64> = rh
        .coeffs()
        .iter()
        .zip(sh.coeffs())
        .map(|(a, b)| a.conj() * b)
        .collect();
    let corr = crate::grid::Spectrum::from_coeffs(r.grid(), prod)
        .expect("correlation spectrum has grid length")
        .inverse_transform();
    // values()[m] is the correlation at lag m cells, not a spatial sample
    let c = corr.values();
    let mut best = 0;
    for (m, &v) in c.iter().enumerate() {
        if v > c[best] {
            best = m;
        }
    }
    let cm = c[(best + n - 1) % n];
    let c0 = c[best];
    let cp = c[(best + 1) % n];
    let denom = cm - 2.0 * c0 + cp;
    let delta = if denom < 0.0 { 0.5 * (cm - cp) / denom } else { 0.0 };
    let signed = if best > n / 2 { best as f64 - n as f64 } else { best as f64 };
    signed + delta
}

/// Extract the translation speed of the velocity field from at least five
/// snapshots. The wave must have moved at least ten cells overall (a genuinely
/// static history is also accepted and reports speed zero).
pub fn measure_wave_speed(snaps: &[Snapshot]) -> Result<SpeedMeasurement> {
    if snaps.len() < 5 {
        return Err(Error::InsufficientTranslation(format!(
            "need at least 5 snapshots, got {}",
            snaps.len()
        )));
    }
    let grid = snaps[0].du.grid().clone();
    for s in snaps {
        if s.du.grid().len() != grid.len() {
            return Err(Error::Grid("snapshots live on different lattices".into()));
        }
    }
    let dy = grid.spacing();
    let half = grid.half_length();

    let mut shifts = Vec::with_capacity(snaps.len());
    shifts.push(0.0);
    for s in &snaps[1..] {
        shifts.push(correlation_lag(&snaps[0].du, &s.du) * dy);
    }
    // unwrap: consecutive snapshots must not jump by more than half a domain
    for k in 1..shifts.len() {
        while shifts[k] - shifts[k - 1] > half {
            shifts[k] -= 2.0 * half;
        }
        while shifts[k] - shifts[k - 1] < -half {
            shifts[k] += 2.0 * half;
        }
    }

    let span = shifts.iter().fold(0.0f64, |m, &s| m.max(s.abs()));
    let static_history = span <= 0.25 * dy;
    if !static_history && span < 10.0 * dy {
        return Err(Error::InsufficientTranslation(format!(
            "wave moved {:.2} cells, need at least 10",
            span / dy
        )));
    }

    let times: Vec<f64> = snaps.iter().map(|s| s.time).collect();
    let tbar = times.iter().sum::<f64>() / times.len() as f64;
    let sbar = shifts.iter().sum::<f64>() / shifts.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, s) in times.iter().zip(&shifts) {
        num += (t - tbar) * (s - sbar);
        den += (t - tbar) * (t - tbar);
    }
    let speed = if den > 0.0 { num / den } else { 0.0 };

    let norm0 = snaps[0].du.l2_norm();
    let total = *shifts.last().expect("nonempty");
    let shape_drift = if norm0 > 0.0 {
        let last_hat = snaps.last().expect("nonempty").du.transform();
        // squared mismatch is nearly parabolic in the shift near its minimum
        let mismatch_sq = |sigma: f64| {
            let d = last_hat
                .translated(-sigma)
                .inverse_transform()
                .sub(&snaps[0].du)
                .l2_norm();
            d * d
        };
        // the correlation peak has subcell bias; polish the shift against the
        // actual mismatch before judging rigidity
        let h = 0.25 * dy;
        let (gm, g0, gp) = (mismatch_sq(total - h), mismatch_sq(total), mismatch_sq(total + h));
        let denom = gm - 2.0 * g0 + gp;
        let refined = if denom > 0.0 {
            total + 0.5 * h * (gm - gp) / denom
        } else {
            total
        };
        g0.min(mismatch_sq(refined)).sqrt() / norm0
    } else {
        0.0
    };

    Ok(SpeedMeasurement {
        speed,
        shape_drift,
        times,
        shifts,
    })
}
