//! Self-contained invariant suites behind the `check` subcommand.
//!
//! Each suite exercises one structural property of the configured model on
//! the configured grid and reports a pass/fail verdict with the measured
//! numbers. The suites overlap the unit tests on purpose: they run against
//! whatever model the user configured, not just the fixtures baked into the
//! test code.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::constitutive::{
    build_moment_table, validate_assumption1, ConstitutiveModel, LawRegistry,
};
use crate::dynamics::BondTable;
use crate::error::Result;
use crate::grid::{Grid, Profile};
use crate::kdv::{consistency_residual, kdv_ode_residual, kdv_profile, KdvProfileSpec};
use crate::operators::{window_average, OperatorContext};

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name,
        passed,
        detail,
    }
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        num += (a - mx) * (b - my);
        den += (a - mx) * (a - mx);
    }
    num / den
}

fn random_even_profile(grid: &Grid, rng: &mut ChaCha8Rng) -> Profile {
    let l = grid.half_length();
    let coeffs: Vec<f64> = (1..=8).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Profile::from_fn(grid, |x| {
        let mut v = 0.0;
        for (j, c) in coeffs.iter().enumerate() {
            let k = (j + 1) as f64 * std::f64::consts::PI / l;
            v += c * (k * x).cos() / (j + 1) as f64;
        }
        v
    })
    .project_even()
}

/// Run every suite against the configured model. Construction failures
/// (bad model, bad grid) surface as errors; individual suite failures are
/// reported in the outcomes.
pub fn run_all(cfg: &RunConfig) -> Result<Vec<CheckOutcome>> {
    let model = cfg.build_model(&LawRegistry::builtin())?;
    let moments = build_moment_table(&model)?;
    let spec = KdvProfileSpec::from_moments(&moments);
    let l_dom = cfg.grid_l_dom.unwrap_or_else(|| spec.suggested_half_length());
    let grid = Grid::new(l_dom, cfg.grid_n())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    let mut out = Vec::new();

    out.push(check_moment_definitions(&moments));
    out.push(check_assumption_structure(&model));

    let eps_set = [0.4, 0.2, 0.1, 0.05];
    let mut ctxs = Vec::new();
    for &eps in &eps_set {
        ctxs.push(OperatorContext::new(&grid, &model, eps)?);
    }
    let coarse = &ctxs[0];

    out.push(check_averaging_contraction(&grid, &mut rng));
    out.push(check_averaging_shape(coarse));
    out.push(check_averaging_expansion(coarse));
    out.push(check_symbol_normalization(&ctxs));
    out.push(check_symbol_lower_bound(&grid, &ctxs));
    out.push(check_symbol_bochner(&ctxs, &mut rng));
    out.push(check_cutoff_projection(&ctxs, &mut rng));
    out.push(check_limit_convergence(&ctxs));
    out.push(check_consistency_band(&ctxs));
    out.push(check_operator_symmetry(coarse, &mut rng));
    out.push(check_l0_kernel(coarse));
    out.push(check_evenness(&ctxs, &mut rng));
    out.push(check_parseval(&grid, &mut rng));
    out.push(check_kdv_profile(&grid, &spec, &moments));
    out.push(check_dispersion_quadrature(&model, &moments));

    Ok(out)
}

fn check_moment_definitions(m: &crate::constitutive::MomentTable) -> CheckOutcome {
    let e1 = (m.d1 * m.i_a4 - 12.0).abs() / 12.0;
    let e2 = (m.d2 * m.i_a4 - 12.0 * m.i_b3).abs() / (12.0 * m.i_b3.abs()).max(1e-300);
    let e3 = (m.c0_sq - m.i_a2).abs() / m.i_a2;
    let worst = e1.max(e2).max(e3);
    outcome(
        "moment-definitions",
        worst < 1e-12,
        format!("d1*I_a4, d2*I_a4, c0_sq defects {e1:.2e}, {e2:.2e}, {e3:.2e}"),
    )
}

fn check_assumption_structure(model: &ConstitutiveModel) -> CheckOutcome {
    match validate_assumption1(model) {
        Ok(report) => match report.into_result() {
            Ok(()) => outcome("assumption-structure", true, "moments positive, remainder bounded".into()),
            Err(e) => outcome("assumption-structure", false, e.to_string()),
        },
        Err(e) => outcome("assumption-structure", false, e.to_string()),
    }
}

fn check_averaging_contraction(grid: &Grid, rng: &mut ChaCha8Rng) -> CheckOutcome {
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let p = random_even_profile(grid, rng);
        let norm = p.l2_norm();
        for eta in [0.5, 0.1, 0.02] {
            let ratio = window_average(&p, eta).l2_norm() / norm;
            worst = worst.max(ratio);
        }
    }
    outcome(
        "averaging-contraction",
        worst <= 1.0 + 1e-12,
        format!("max ||A_eta p|| / ||p|| = {worst:.12}"),
    )
}

fn check_averaging_shape(ctx: &OperatorContext) -> CheckOutcome {
    let w0 = ctx.kdv_predictor();
    let a = window_average(w0, 0.3);
    let vals = a.values();
    let n = vals.len();
    let mut even_defect = 0.0f64;
    for i in 1..n / 2 {
        even_defect = even_defect.max((vals[i] - vals[n - i]).abs());
    }
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = a.max_abs();
    let passed = even_defect < 1e-12 * scale && min > -1e-12 * scale;
    outcome(
        "averaging-shape",
        passed,
        format!("evenness defect {even_defect:.2e}, min value {min:.2e}"),
    )
}

fn check_averaging_expansion(ctx: &OperatorContext) -> CheckOutcome {
    let w0 = ctx.kdv_predictor();
    let w2 = w0.derivative(2);
    let etas = [0.4, 0.2, 0.1, 0.05];
    let mut first = Vec::new();
    let mut second = Vec::new();
    for &eta in &etas {
        let a = window_average(w0, eta);
        first.push(a.sub(w0).l2_norm());
        second.push(a.sub(w0).axpy(-eta * eta / 24.0, &w2).l2_norm());
    }
    let s1 = log_slope(&etas, &first);
    let s2 = log_slope(&etas, &second);
    let passed = (s1 - 2.0).abs() < 0.1 && (s2 - 4.0).abs() < 0.1;
    outcome(
        "averaging-expansion",
        passed,
        format!("slopes {s1:.3} (want 2), {s2:.3} (want 4)"),
    )
}

fn check_symbol_normalization(ctxs: &[OperatorContext]) -> CheckOutcome {
    let mut detail = String::new();
    let mut passed = true;
    for ctx in ctxs {
        let s = ctx.symbols();
        let eps = ctx.epsilon();
        let zero_ok = s.b_eps[0] == 1.0;
        let plateau_expected = 1.0 + ctx.moments().c0_sq / (eps * eps);
        let plateau_err = (s.b_eps_infty - plateau_expected).abs() / plateau_expected;
        let mut range_ok = true;
        for &b in &s.b_eps {
            if !(b >= 1.0 - 1e-14 && b <= s.b_eps_infty * (1.0 + 1e-14)) {
                range_ok = false;
            }
        }
        passed &= zero_ok && plateau_err < 1e-10 && range_ok;
        detail.push_str(&format!("eps={eps}: plateau defect {plateau_err:.2e}; "));
    }
    outcome("symbol-normalization", passed, detail)
}

fn check_symbol_lower_bound(grid: &Grid, ctxs: &[OperatorContext]) -> CheckOutcome {
    let mut worst = f64::INFINITY;
    for ctx in ctxs {
        let s = ctx.symbols();
        let slack = s.empirical_lower_ratio(grid, ctx.epsilon()) / s.c0_lower;
        worst = worst.min(slack);
    }
    outcome(
        "symbol-lower-bound",
        worst >= 1.0 - 1e-12,
        format!("min b_eps(k) / (C0 min(1+k^2, 1+eps^-2)) = {worst:.4}"),
    )
}

fn check_symbol_bochner(ctxs: &[OperatorContext], rng: &mut ChaCha8Rng) -> CheckOutcome {
    let mut worst = 0.0f64;
    for ctx in [&ctxs[0], &ctxs[2]] {
        for _ in 0..10 {
            let p = random_even_profile(ctx.grid(), rng);
            let defect = ctx
                .dispersive(&p)
                .sub(&ctx.dispersive_nodewise(&p))
                .l2_norm()
                / p.l2_norm().max(1e-300);
            worst = worst.max(defect);
        }
    }
    outcome(
        "symbol-bochner",
        worst < 1e-9,
        format!("max symbol-vs-sum defect {worst:.2e}"),
    )
}

fn check_cutoff_projection(ctxs: &[OperatorContext], rng: &mut ChaCha8Rng) -> CheckOutcome {
    let ctx = &ctxs[0];
    let p = random_even_profile(ctx.grid(), rng);
    let once = ctx.low_pass(&p);
    let twice = ctx.low_pass(&once);
    let idem = twice.sub(&once).l2_norm() / once.l2_norm().max(1e-300);
    let contract = once.l2_norm() <= p.l2_norm() * (1.0 + 1e-12);
    // Parseval on both sides of the projection
    let hat = once.transform();
    let parseval = (hat.parseval_l2_sq() - once.l2_norm().powi(2)).abs()
        / once.l2_norm().powi(2).max(1e-300);
    let passed = idem < 1e-12 && contract && parseval < 1e-11;
    outcome(
        "cutoff-projection",
        passed,
        format!("idempotency {idem:.2e}, parseval {parseval:.2e}"),
    )
}

fn check_limit_convergence(ctxs: &[OperatorContext]) -> CheckOutcome {
    let mut eps_list = Vec::new();
    let mut b_err = Vec::new();
    let mut q_err = Vec::new();
    for ctx in ctxs {
        let w0 = ctx.kdv_predictor();
        eps_list.push(ctx.epsilon());
        b_err.push(ctx.dispersive(w0).sub(&ctx.dispersive_limit(w0)).l2_norm());
        q_err.push(ctx.quadratic(w0).sub(&ctx.quadratic_limit(w0)).l2_norm());
    }
    let sb = log_slope(&eps_list, &b_err);
    let sq = log_slope(&eps_list, &q_err);
    let passed = (sb - 2.0).abs() < 0.2 && (sq - 2.0).abs() < 0.2;
    outcome(
        "limit-convergence",
        passed,
        format!("B slope {sb:.3}, Q slope {sq:.3} (want 2 +/- 0.2)"),
    )
}

fn check_consistency_band(ctxs: &[OperatorContext]) -> CheckOutcome {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for ctx in ctxs {
        let r = match consistency_residual(ctx) {
            Ok(r) => r,
            Err(e) => return outcome("consistency-band", false, e.to_string()),
        };
        let total = r.norm_k + r.norm_e;
        lo = lo.min(total);
        hi = hi.max(total);
    }
    let band = hi / lo.max(1e-300);
    outcome(
        "consistency-band",
        band < 10.0,
        format!("(||K|| + ||E||) spread factor {band:.2} over eps sweep"),
    )
}

fn check_operator_symmetry(ctx: &OperatorContext, rng: &mut ChaCha8Rng) -> CheckOutcome {
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let u = random_even_profile(ctx.grid(), rng);
        let v = random_even_profile(ctx.grid(), rng);
        let scale = u.l2_norm() * v.l2_norm();
        let m_defect =
            (ctx.linearized_quadratic(&u).h_dot(&v) - u.h_dot(&ctx.linearized_quadratic(&v))).abs();
        let l_defect = (ctx.linearized(&u).h_dot(&v) - u.h_dot(&ctx.linearized(&v))).abs();
        worst = worst.max(m_defect / scale).max(l_defect / scale);
    }
    outcome(
        "operator-symmetry",
        worst < 1e-10,
        format!("max self-adjointness defect {worst:.2e}"),
    )
}

fn check_l0_kernel(ctx: &OperatorContext) -> CheckOutcome {
    let w0p = ctx.kdv_predictor().derivative(1);
    let defect = ctx.linearized_limit(&w0p).l2_norm() / w0p.l2_norm();
    outcome(
        "l0-kernel",
        defect < 1e-7,
        format!("||L0 W0'|| / ||W0'|| = {defect:.2e}"),
    )
}

fn check_evenness(ctxs: &[OperatorContext], rng: &mut ChaCha8Rng) -> CheckOutcome {
    let ctx = &ctxs[1];
    let p = random_even_profile(ctx.grid(), rng);
    let mut worst = 0.0f64;
    for q in [
        ctx.dispersive(&p),
        ctx.dispersive_inv(&p),
        ctx.quadratic(&p),
        ctx.linearized_quadratic(&p),
        ctx.low_pass(&p),
    ] {
        let defect = q.sub(&q.project_even()).l2_norm() / q.l2_norm().max(1e-300);
        worst = worst.max(defect);
    }
    outcome(
        "evenness-preservation",
        worst < 1e-11,
        format!("max odd component {worst:.2e}"),
    )
}

fn check_parseval(grid: &Grid, rng: &mut ChaCha8Rng) -> CheckOutcome {
    let p = random_even_profile(grid, rng);
    let hat = p.transform();
    let parseval =
        (hat.parseval_l2_sq() - p.l2_norm().powi(2)).abs() / p.l2_norm().powi(2);
    let round_trip = hat.inverse_transform().sub(&p).l2_norm() / p.l2_norm();
    let herm = hat.hermitian_defect();
    let passed = parseval < 1e-12 && round_trip < 1e-12 && herm < 1e-12 * p.max_abs();
    outcome(
        "parseval-roundtrip",
        passed,
        format!("parseval {parseval:.2e}, fft roundtrip {round_trip:.2e}, hermitian {herm:.2e}"),
    )
}

fn check_kdv_profile(
    grid: &Grid,
    spec: &KdvProfileSpec,
    moments: &crate::constitutive::MomentTable,
) -> CheckOutcome {
    let w0 = match kdv_profile(spec, grid) {
        Ok(p) => p,
        Err(e) => return outcome("kdv-profile", false, e.to_string()),
    };
    let res = kdv_ode_residual(&w0, moments.d1, moments.d2) / w0.l2_norm();
    let peak = w0.values()[grid.len() / 2];
    let amp_err = (peak - spec.amplitude).abs() / spec.amplitude;
    let passed = res < 1e-6 && amp_err < 1e-14;
    outcome(
        "kdv-profile",
        passed,
        format!("ODE residual {res:.2e}, amplitude defect {amp_err:.2e}"),
    )
}

fn check_dispersion_quadrature(
    model: &ConstitutiveModel,
    moments: &crate::constitutive::MomentTable,
) -> CheckOutcome {
    let dy = model.horizon() / 50.0;
    let table = match BondTable::new(model, dy) {
        Ok(t) => t,
        Err(e) => return outcome("dispersion-quadrature", false, e.to_string()),
    };
    let moment_err = (table.second_moment() - moments.i_a2).abs() / moments.i_a2;
    let c0 = moments.c0_sq.sqrt();
    let k = 0.05 / model.horizon();
    let phase = table.dispersion(k).sqrt() / k;
    let phase_err = (phase - c0).abs() / c0;
    let passed = moment_err < 1e-2 && phase_err < 1e-2;
    outcome(
        "dispersion-quadrature",
        passed,
        format!("second moment defect {moment_err:.2e}, long-wave phase defect {phase_err:.2e}"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_power_law_config_passes_every_suite() {
        let cfg = RunConfig::parse_str(
            "model.family = power_law\nmodel.C2 = 1.0\nmodel.C3 = 1.0\nmodel.H = 1.0\ngrid.N = 512\n",
        )
        .unwrap();
        let outcomes = run_all(&cfg).unwrap();
        assert!(outcomes.len() >= 15);
        for o in &outcomes {
            assert!(o.passed, "{} failed: {}", o.name, o.detail);
        }
    }

    #[test]
    fn gaussian_family_passes_every_suite() {
        let cfg = RunConfig::parse_str(
            "model.family = gaussian_decay\nmodel.C2 = 1.0\nmodel.C3 = 2.0\nmodel.g = 0.5\nmodel.H = 3.0\ngrid.N = 512\n",
        )
        .unwrap();
        let outcomes = run_all(&cfg).unwrap();
        for o in &outcomes {
            assert!(o.passed, "{} failed: {}", o.name, o.detail);
        }
    }

    #[test]
    fn bad_model_surfaces_as_error() {
        let cfg = RunConfig::parse_str("model.family = power_law\nmodel.C2 = -1.0\nmodel.H = 1.0\n")
            .unwrap();
        assert!(run_all(&cfg).is_err());
    }
}
