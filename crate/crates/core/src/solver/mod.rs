//! Fixed-point corrector for the traveling-wave profile.
//!
//! The wave is sought as `W = W0 + eps^2 V` and the correction `V` obeys
//!
//! ```text
//!     L V = K + eps^2 Q[V] + P[W0 + eps^2 V],    L = B - M,
//! ```
//!
//! iterated by solving the linear system afresh with the current right-hand
//! side. `L` is self-adjoint but indefinite (one negative even eigenvalue),
//! so each linear solve runs MINRES on the symmetrically preconditioned
//! operator `Id - S M S` with `S = B^{-1/2}`, which clusters the spectrum
//! at 1 and leaves a handful of outliers.
//!
//! Safeguards: the iteration must contract (three consecutive step ratios
//! above 0.95 abort it, with one retry seeded by the solution at `1.5 eps`),
//! and iterates may not leave a ball of twice the first correction's norm.

mod minres;

pub use minres::{minres, MinresOutcome};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::{Grid, Profile};
use crate::kdv::consistency_residual;
use crate::operators::OperatorContext;
use rayon::prelude::*;
use serde_json::json;
use std::io::Write;

#[derive(Clone, Copy, Debug)]
pub struct SolverConfig {
    /// Outer iteration stops when the step norm drops below this.
    pub outer_tol: f64,
    pub max_outer: usize,
    /// Relative linear-solve tolerance, enforced in unpreconditioned norm.
    pub inner_tol: f64,
    pub max_inner: usize,
    /// Trust-ball radius as a multiple of the first correction's norm.
    pub trust_factor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            outer_tol: 1e-10,
            max_outer: 60,
            inner_tol: 1e-12,
            max_inner: 2000,
            trust_factor: 2.0,
        }
    }
}

impl SolverConfig {
    pub fn from_run_config(cfg: &RunConfig) -> Self {
        SolverConfig {
            outer_tol: cfg.outer_tol(),
            max_outer: cfg.max_outer(),
            inner_tol: cfg.inner_tol(),
            max_inner: cfg.max_inner(),
            trust_factor: cfg.trust_factor(),
        }
    }
}

/// A converged traveling-wave profile `W = W0 + eps^2 V` and the evidence
/// gathered on the way there.
#[derive(Clone, Debug)]
pub struct WaveSolution {
    pub epsilon: f64,
    /// `c0^2` summed with the operator quadrature (so speed identities close
    /// to rounding, not to quadrature error).
    pub c0_sq: f64,
    pub decay_rate: f64,
    pub v_eps: Profile,
    pub w_eps: Profile,
    /// Step norms per outer iteration.
    pub outer_history: Vec<f64>,
    /// MINRES iteration counts per outer iteration.
    pub inner_iterations: Vec<usize>,
    /// `|| B W - Q[W] - eps^2 P[W] ||_2` at the accepted profile.
    pub final_residual: f64,
}

impl WaveSolution {
    pub fn c_eps(&self) -> f64 {
        (self.c0_sq + self.epsilon * self.epsilon).sqrt()
    }

    /// The predictor this solution corrects: `W0 = W - eps^2 V`.
    pub fn predictor(&self) -> Profile {
        self.w_eps.axpy(-self.epsilon * self.epsilon, &self.v_eps)
    }

    pub fn to_json(&self, config_hash: &str) -> serde_json::Value {
        json!({
            "config_hash": config_hash,
            "epsilon": self.epsilon,
            "c0_sq": self.c0_sq,
            "c_eps": self.c_eps(),
            "decay_rate": self.decay_rate,
            "v_norm": self.v_eps.l2_norm(),
            "w_norm": self.w_eps.l2_norm(),
            "final_residual": self.final_residual,
            "outer_history": self.outer_history,
            "inner_iterations": self.inner_iterations,
            "v_eps": self.v_eps.to_json(),
            "w_eps": self.w_eps.to_json(),
        })
    }

    /// `x,W0,W_eps,V_eps` rows preceded by `#` comment lines.
    pub fn write_profile_csv(&self, w: &mut impl Write, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "x,W0,W_eps,V_eps")?;
        let grid = self.w_eps.grid().clone();
        let w0 = self.predictor();
        for i in 0..grid.len() {
            writeln!(
                w,
                "{},{},{},{}",
                grid.node(i),
                w0.values()[i],
                self.w_eps.values()[i],
                self.v_eps.values()[i]
            )?;
        }
        Ok(())
    }
}

fn apply_slots(p: &Profile, sym: &[f64]) -> Profile {
    let mut s = p.transform();
    for (c, &v) in s.coeffs_mut().iter_mut().zip(sym) {
        *c *= v;
    }
    s.inverse_transform()
}

pub struct LinearizedSolve {
    pub v: Profile,
    pub iterations: usize,
    /// True unpreconditioned residual `|| L v - g ||_2`.
    pub residual: f64,
}

/// Solve `L v = g` on the even subspace by split-preconditioned MINRES.
pub fn solve_linearized(
    ctx: &OperatorContext,
    g: &Profile,
    inner_tol: f64,
    max_inner: usize,
) -> Result<LinearizedSolve> {
    let g_norm = g.l2_norm();
    if g_norm == 0.0 {
        return Ok(LinearizedSolve {
            v: Profile::zeros(g.grid()),
            iterations: 0,
            residual: 0.0,
        });
    }
    let s_vals: Vec<f64> = ctx.symbols().b_eps.iter().map(|b| b.powf(-0.5)).collect();
    let b_max = ctx.symbols().b_eps.iter().fold(1.0_f64, |m, &b| m.max(b));
    // residual transforms back with at most a factor sqrt(b_max)
    let tol_abs = inner_tol * g_norm / b_max.sqrt();

    let rhs = apply_slots(g, &s_vals).project_even();
    let apply = |p: &Profile| {
        let sp = apply_slots(p, &s_vals);
        let msp = ctx.linearized_quadratic(&sp);
        p.sub(&apply_slots(&msp, &s_vals)).project_even()
    };
    let out = minres(apply, &rhs, tol_abs, max_inner);
    let v = apply_slots(&out.solution, &s_vals).project_even();
    let residual = ctx.linearized(&v).sub(g).l2_norm();
    if !out.converged || residual > 100.0 * inner_tol * g_norm {
        return Err(Error::InnerSolveStalled {
            iterations: out.iterations,
            residual,
            min_ritz: out.min_ritz,
        });
    }
    Ok(LinearizedSolve {
        v,
        iterations: out.iterations,
        residual,
    })
}

/// Run the fixed-point iteration from an explicit starting correction.
pub fn fixed_point_solve_from(
    ctx: &OperatorContext,
    cfg: &SolverConfig,
    v_init: Profile,
) -> Result<WaveSolution> {
    let eps = ctx.epsilon();
    let eps2 = eps * eps;
    let w0 = ctx.kdv_predictor();
    let k_term = ctx
        .quadratic(w0)
        .sub(&ctx.dispersive(w0))
        .scale(1.0 / eps2);

    let mut v = v_init.project_even();
    let mut prev_step = f64::INFINITY;
    let mut last_ratio = f64::NAN;
    let mut stall = 0;
    let mut radius: Option<f64> = None;
    let mut outer_history = Vec::new();
    let mut inner_iterations = Vec::new();
    let mut converged = false;

    for n in 0..cfg.max_outer {
        // E + eps^2 N[V] telescopes to P[W0 + eps^2 V]
        let w = w0.axpy(eps2, &v);
        let rhs = k_term.axpy(eps2, &ctx.quadratic(&v)).add(&ctx.remainder(&w)?);
        let solve = solve_linearized(ctx, &rhs, cfg.inner_tol, cfg.max_inner)?;
        let v_next = solve.v;
        inner_iterations.push(solve.iterations);

        let step = v_next.sub(&v).l2_norm();
        outer_history.push(step);

        let ball = *radius.get_or_insert(cfg.trust_factor * v_next.l2_norm());
        if n > 0 && v_next.l2_norm() > ball {
            return Err(Error::LeftTrustRegion {
                norm: v_next.l2_norm(),
                radius: ball,
            });
        }

        if n > 0 {
            last_ratio = step / prev_step;
            if last_ratio > 0.95 {
                stall += 1;
                if stall >= 3 {
                    return Err(Error::NotContracting {
                        ratio: last_ratio,
                        iteration: n,
                    });
                }
            } else {
                stall = 0;
            }
        }

        v = v_next;
        prev_step = step;
        if step <= cfg.outer_tol {
            converged = true;
            break;
        }
    }

    if !converged {
        return Err(Error::NotContracting {
            ratio: last_ratio,
            iteration: cfg.max_outer,
        });
    }

    let w_eps = w0.axpy(eps2, &v);
    let final_residual = ctx
        .dispersive(&w_eps)
        .sub(&ctx.quadratic(&w_eps))
        .sub(&ctx.remainder(&w_eps)?.scale(eps2))
        .l2_norm();

    Ok(WaveSolution {
        epsilon: eps,
        c0_sq: ctx.symbols().c0_sq_quad,
        decay_rate: ctx.profile_spec().decay_rate,
        v_eps: v,
        w_eps,
        outer_history,
        inner_iterations,
        final_residual,
    })
}

/// Solve from `V = 0`; on a failed contraction, retry once seeded with the
/// correction computed at `1.5 eps` (a better-conditioned problem).
pub fn fixed_point_solve(ctx: &OperatorContext, cfg: &SolverConfig) -> Result<WaveSolution> {
    let first = fixed_point_solve_from(ctx, cfg, Profile::zeros(ctx.grid()));
    let err = match first {
        Err(e @ Error::NotContracting { .. }) => e,
        other => return other,
    };
    let eps_coarse = 1.5 * ctx.epsilon();
    if eps_coarse > 1.0 {
        return Err(err);
    }
    let coarse_ctx = OperatorContext::new(ctx.grid(), ctx.model(), eps_coarse)?;
    let coarse = fixed_point_solve_from(&coarse_ctx, cfg, Profile::zeros(ctx.grid()))?;
    fixed_point_solve_from(ctx, cfg, coarse.v_eps)
}

/// Residuals of the profile equation in both of its faces.
#[derive(Clone, Copy, Debug)]
pub struct VerificationReport {
    pub epsilon: f64,
    /// `|| B W - Q[W] - eps^2 P[W] ||_2`.
    pub operator_residual: f64,
    /// `|| bond-force sum - eps^2 c_eps^2 W ||_2`, assembled independently.
    pub eigenvalue_residual: f64,
    /// `max` of the two, the number to quote.
    pub residual: f64,
}

/// Check one profile in both formulations. The two residuals are linked by
/// the exact algebraic factor `eps^4`; a mismatch beyond rounding slack
/// means the operator assembly and the bond-force route disagree, which is
/// an implementation fault, never a property of the profile.
pub fn verify_solution(ctx: &OperatorContext, solution: &WaveSolution) -> Result<VerificationReport> {
    let w = &solution.w_eps;
    let eps = ctx.epsilon();
    let eps2 = eps * eps;
    let r_op = ctx
        .dispersive(w)
        .sub(&ctx.quadratic(w))
        .sub(&ctx.remainder(w)?.scale(eps2))
        .l2_norm();
    let c_eps_sq = ctx.symbols().c0_sq_quad + eps2;
    let r_eig = ctx.bond_force_sum(w).axpy(-eps2 * c_eps_sq, w).l2_norm();

    let linked = eps2 * eps2 * r_op;
    if (r_eig - linked).abs() > 1e-6 * r_eig.max(linked) + 1e-12 * w.l2_norm() * eps2 {
        return Err(Error::FormMismatch {
            operator: r_op,
            eigenvalue: r_eig,
        });
    }
    Ok(VerificationReport {
        epsilon: eps,
        operator_residual: r_op,
        eigenvalue_residual: r_eig,
        residual: r_op.max(r_eig),
    })
}

/// One row of the small-`eps` convergence study.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub epsilon: f64,
    /// `|| W_eps - W0 ||_2`.
    pub err_l2: f64,
    pub v_norm: f64,
    pub final_residual: f64,
    pub outer_iters: usize,
    pub norm_k: f64,
    pub norm_e: f64,
    /// `"ok"` or the error token of the failure.
    pub status: String,
}

#[derive(Clone, Debug)]
pub struct ConvergenceTable {
    pub rows: Vec<SweepRow>,
    /// Log-log slope of `err_l2` against `eps` over the `ok` rows; `None`
    /// with fewer than three usable rows.
    pub slope: Option<f64>,
}

impl ConvergenceTable {
    pub fn write_csv(&self, w: &mut impl Write, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        if let Some(s) = self.slope {
            writeln!(w, "# slope={s}")?;
        }
        writeln!(w, "epsilon,err_l2,v_norm,final_residual,outer_iters,norm_K,norm_E,status")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.epsilon, r.err_l2, r.v_norm, r.final_residual, r.outer_iters, r.norm_k, r.norm_e, r.status
            )?;
        }
        Ok(())
    }
}

fn sweep_one(
    grid: &Grid,
    model: &crate::constitutive::ConstitutiveModel,
    eps: f64,
    cfg: &SolverConfig,
) -> Result<SweepRow> {
    let ctx = OperatorContext::new(grid, model, eps)?;
    let sol = fixed_point_solve(&ctx, cfg)?;
    verify_solution(&ctx, &sol)?;
    let cons = consistency_residual(&ctx)?;
    Ok(SweepRow {
        epsilon: eps,
        err_l2: sol.w_eps.sub(ctx.kdv_predictor()).l2_norm(),
        v_norm: sol.v_eps.l2_norm(),
        final_residual: sol.final_residual,
        outer_iters: sol.outer_history.len(),
        norm_k: cons.norm_k,
        norm_e: cons.norm_e,
        status: "ok".into(),
    })
}

/// Solve the wave problem at each `eps`, in parallel, and fit the deviation
/// order. Failed values of `eps` produce an error-marked row instead of
/// aborting the sweep.
pub fn epsilon_sweep(
    grid: &Grid,
    model: &crate::constitutive::ConstitutiveModel,
    eps_list: &[f64],
    cfg: &SolverConfig,
) -> ConvergenceTable {
    let rows: Vec<SweepRow> = eps_list
        .par_iter()
        .map(|&eps| {
            sweep_one(grid, model, eps, cfg).unwrap_or_else(|e| SweepRow {
                epsilon: eps,
                err_l2: f64::NAN,
                v_norm: f64::NAN,
                final_residual: f64::NAN,
                outer_iters: 0,
                norm_k: f64::NAN,
                norm_e: f64::NAN,
                status: e.token().into(),
            })
        })
        .collect();

    let good: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| r.status == "ok" && r.err_l2 > 0.0)
        .collect();
    let slope = if good.len() >= 3 {
        let xs: Vec<f64> = good.iter().map(|r| r.epsilon.ln()).collect();
        let ys: Vec<f64> = good.iter().map(|r| r.err_l2.ln()).collect();
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        Some(num / den)
    } else {
        None
    };

    ConvergenceTable { rows, slope }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{ConstitutiveModel, PowerLawLaw};
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reference_model() -> ConstitutiveModel {
        ConstitutiveModel::from_law(PowerLawLaw::new(1.0, 1.0, 0.0, 1.0))
    }

    /// Wide-profile model (`d1 = 4`) that fits honestly on a 64-point grid.
    fn wide_model() -> ConstitutiveModel {
        ConstitutiveModel::from_law(PowerLawLaw::new(0.75, 0.5, 0.0, 2.0))
    }

    fn random_even_profile(grid: &Grid, rng: &mut ChaCha8Rng) -> Profile {
        let vals: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Profile::from_values(grid, vals).unwrap().project_even()
    }

    #[test]
    fn krylov_matches_dense_factorization() {
        let model = wide_model();
        let grid = Grid::new(16.0, 64).unwrap();
        let ctx = OperatorContext::new(&grid, &model, 0.3).unwrap();
        let n = grid.len();

        let mut cols = Vec::with_capacity(n);
        for i in 0..n {
            let mut e = Profile::zeros(&grid);
            e.values_mut()[i] = 1.0;
            cols.push(DVector::from_column_slice(ctx.linearized(&e).values()));
        }
        let a = DMatrix::from_columns(&cols);
        let asym = (&a - a.transpose()).norm() / a.norm();
        assert!(asym < 1e-12, "dense operator asymmetry {asym}");

        let lu = a.clone().lu();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5 {
            let g = random_even_profile(&grid, &mut rng);
            let dense = lu
                .solve(&DVector::from_column_slice(g.values()))
                .expect("dense solve");
            let kry = solve_linearized(&ctx, &g, 1e-12, 2000).unwrap();
            let dense_p =
                Profile::from_values(&grid, dense.iter().copied().collect()).unwrap();
            let diff = kry.v.sub(&dense_p).l2_norm();
            let scale = dense_p.l2_norm().max(1e-300);
            assert!(diff / scale < 1e-8, "relative gap {}", diff / scale);
        }
    }

    #[test]
    fn computes_reference_wave() {
        let model = reference_model();
        let grid = Grid::new(4.4, 256).unwrap();
        let ctx = OperatorContext::new(&grid, &model, 0.4).unwrap();
        let cfg = SolverConfig::default();
        let sol = fixed_point_solve(&ctx, &cfg).unwrap();

        assert!(sol.final_residual <= 10.0 * cfg.outer_tol, "residual {}", sol.final_residual);
        assert!(sol.c_eps() > sol.c0_sq.sqrt());
        let v = &sol.v_eps;
        for i in 1..grid.len() {
            assert!((v.values()[i] - v.values()[(grid.len() - i) % grid.len()]).abs() < 1e-12);
        }
        let report = verify_solution(&ctx, &sol).unwrap();
        assert!(report.residual <= 10.0 * cfg.outer_tol);
        // fixed point is genuine: residual for the plain predictor is much worse
        let predictor_res = ctx
            .dispersive(ctx.kdv_predictor())
            .sub(&ctx.quadratic(ctx.kdv_predictor()))
            .l2_norm();
        assert!(predictor_res > 1e3 * sol.final_residual);
    }

    #[test]
    fn residual_identity_links_both_forms_for_any_profile() {
        let model = reference_model();
        let grid = Grid::new(4.4, 256).unwrap();
        let ctx = OperatorContext::new(&grid, &model, 0.35).unwrap();
        // deliberately not a solution
        let bogus = WaveSolution {
            epsilon: 0.35,
            c0_sq: ctx.symbols().c0_sq_quad,
            decay_rate: ctx.profile_spec().decay_rate,
            v_eps: Profile::zeros(&grid),
            w_eps: ctx.kdv_predictor().clone(),
            outer_history: vec![],
            inner_iterations: vec![],
            final_residual: f64::NAN,
        };
        let report = verify_solution(&ctx, &bogus).unwrap();
        let eps4 = 0.35_f64.powi(4);
        assert!(report.operator_residual > 1e-3); // W0 alone is far from solving
        assert!(
            (report.eigenvalue_residual - eps4 * report.operator_residual).abs()
                < 1e-8 * report.eigenvalue_residual
        );
    }

    #[test]
    fn exhausted_outer_budget_reports_no_contraction() {
        let model = reference_model();
        let grid = Grid::new(4.4, 256).unwrap();
        let ctx = OperatorContext::new(&grid, &model, 0.4).unwrap();
        let cfg = SolverConfig {
            max_outer: 1,
            outer_tol: 1e-14,
            ..SolverConfig::default()
        };
        match fixed_point_solve_from(&ctx, &cfg, Profile::zeros(&grid)) {
            Err(Error::NotContracting { iteration, .. }) => assert_eq!(iteration, 1),
            other => panic!("expected NotContracting, got {other:?}"),
        }
    }

    #[test]
    fn starved_inner_solver_reports_stall() {
        let model = reference_model();
        let grid = Grid::new(4.4, 256).unwrap();
        let ctx = OperatorContext::new(&grid, &model, 0.4).unwrap();
        let cfg = SolverConfig {
            max_inner: 3,
            ..SolverConfig::default()
        };
        match fixed_point_solve_from(&ctx, &cfg, Profile::zeros(&grid)) {
            Err(Error::InnerSolveStalled { iterations, .. }) => assert_eq!(iterations, 3),
            other => panic!("expected InnerSolveStalled, got {other:?}"),
        }
    }

    #[test]
    fn restart_from_perturbed_solution_returns_to_it() {
        let model = reference_model();
        let grid = Grid::new(4.4, 256).unwrap();
        let ctx = OperatorContext::new(&grid, &model, 0.4).unwrap();
        let cfg = SolverConfig::default();
        let sol = fixed_point_solve(&ctx, &cfg).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noise = random_even_profile(&grid, &mut rng);
        let start = sol.v_eps.axpy(1e-3 / noise.l2_norm().max(1.0), &noise);
        let again = fixed_point_solve_from(&ctx, &cfg, start).unwrap();
        let gap = again.v_eps.sub(&sol.v_eps).l2_norm();
        assert!(gap < 1e-8, "restart gap {gap}");
    }

    #[test]
    fn sweep_reports_rows_in_input_order() {
        let model = reference_model();
        let grid = Grid::new(4.4, 256).unwrap();
        let cfg = SolverConfig {
            outer_tol: 1e-9,
            ..SolverConfig::default()
        };
        let table = epsilon_sweep(&grid, &model, &[0.4, 0.3], &cfg);
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.rows[0].epsilon, 0.4);
        assert_eq!(table.rows[1].epsilon, 0.3);
        assert!(table.rows.iter().all(|r| r.status == "ok"));
        assert!(table.slope.is_none()); // two points fit no slope
        assert!(table.rows[0].err_l2 > table.rows[1].err_l2);

        let mut buf = Vec::new();
        table.write_csv(&mut buf, &["config_hash=t".into()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# config_hash=t\nepsilon,"));
    }

    #[test]
    fn solution_serializes_with_profile_columns() {
        let model = reference_model();
        let grid = Grid::new(4.4, 128).unwrap();
        let ctx = OperatorContext::new(&grid, &model, 0.5).unwrap();
        let cfg = SolverConfig {
            outer_tol: 1e-8,
            ..SolverConfig::default()
        };
        let sol = fixed_point_solve(&ctx, &cfg).unwrap();
        let js = sol.to_json("deadbeef");
        assert_eq!(js["config_hash"], "deadbeef");
        assert!(js["final_residual"].as_f64().unwrap() < 1e-6);
        let mut buf = Vec::new();
        sol.write_profile_csv(&mut buf, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,W0,W_eps,V_eps\n"));
        assert_eq!(text.lines().count(), 129);
    }
}
