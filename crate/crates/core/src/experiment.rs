//! Experiment orchestration: build the configured initial data, run the
//! solver / iteration / toolbox battery, evaluate every check record and
//! write the artifacts (diagnostics CSV, verification JSON, checkpoints).

use crate::bounds::{self, InitialNorms};
use crate::checkpoint::write_checkpoint;
use crate::config::{DataKind, ExperimentConfig, ExperimentKind};
use crate::data;
use crate::error::{Error, Result};
use crate::field::{
    dealias, divergence, gradient, leray_project, Field, TensorField, VectorField,
};
use crate::grid::Grid;
use crate::lorentz::{weak_lp_norm, weak_lp_norm_tensor};
use crate::lp::{
    self, besov_norm, besov_norm_tensor, besov_norm_vector, chemin_lerner_norm, BesovParams,
    DyadicPartition, TrajectoryNorms,
};
use crate::picard;
use crate::quad::integrate;
use crate::report::{CheckRecord, Environment, VerificationReport};
use crate::semigroup::{
    duhamel_div_tensor, fit_block_decay, heat_propagate, verify_grad_kernel_bound,
};
use crate::solver::{self, Diagnostics, Params, RunSettings, SimState};
use std::sync::Arc;

/// Run the configured experiment, write artifacts under `cfg.output` and
/// return the report. Sweeps expand into sub-runs whose records are
/// prefixed by the swept value.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    crate::threads::ensure_init();
    std::fs::create_dir_all(&cfg.output).map_err(|e| Error::io(&cfg.output, e))?;

    let report = if let Some((key, values)) = &cfg.sweep {
        let mut combined = VerificationReport::new(cfg.experiment.name(), environment(cfg, 0.0));
        let mut predicted_bounds = Vec::new();
        for v in values {
            let mut sub = cfg.clone();
            sub.sweep = None;
            match key.as_str() {
                "params.mu" => sub.mu = *v,
                "params.b" => sub.b = *v,
                "initial_data.seed" => sub.seed = *v as u64,
                _ => return Err(Error::config(format!("unsupported sweep key {key}"))),
            }
            sub.output = cfg.output.join(format!("{key}={v}"));
            std::fs::create_dir_all(&sub.output).map_err(|e| Error::io(&sub.output, e))?;
            let rep = run_single(&sub)?;
            for mut c in rep.checks {
                c.name = format!("{key}={v}/{}", c.name);
                if c.name.contains("lifespan-lower-bound") {
                    predicted_bounds.push(c.lhs);
                }
                combined.checks.push(c);
            }
            combined.environment.dt = rep.environment.dt;
        }
        if cfg.experiment == ExperimentKind::Noncorot && predicted_bounds.len() >= 2 {
            let monotone = predicted_bounds.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
            combined.checks.push(CheckRecord {
                name: "lifespan-bound-monotone-in-mu".into(),
                anchor: "main_thm0".into(),
                lhs: if monotone { 0.0 } else { 1.0 },
                rhs: 0.0,
                constant: None,
                tolerance: 0.0,
                pass: monotone,
            });
        }
        combined
    } else {
        run_single(cfg)?
    };

    crate::report::emit_report(&report, &cfg.output.join("verification.json"))?;
    Ok(report)
}

fn run_single(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    match cfg.experiment {
        ExperimentKind::Decay => decay_experiment(cfg),
        ExperimentKind::Energy => energy_experiment(cfg),
        ExperimentKind::Lipschitz => lipschitz_experiment(cfg),
        ExperimentKind::Picard => picard_experiment(cfg),
        ExperimentKind::Lorentz3d => lorentz3d_experiment(cfg),
        ExperimentKind::Noncorot => noncorot_experiment(cfg),
        ExperimentKind::Lifespan => lifespan_experiment(cfg),
        ExperimentKind::Toolbox => toolbox_experiment(cfg),
    }
}

fn environment(cfg: &ExperimentConfig, dt: f64) -> Environment {
    Environment {
        d: cfg.d,
        n: cfg.n,
        l: cfg.l,
        seed: cfg.seed,
        dt,
    }
}

/// Build the configured initial data on a grid.
pub fn make_data(cfg: &ExperimentConfig, grid: &Arc<Grid>, seed: u64) -> (VectorField, TensorField) {
    match cfg.data_kind {
        DataKind::TaylorGreen => {
            let u = data::taylor_green(grid, cfg.amplitude);
            let tau = data::random_band_tensor(
                grid,
                seed.wrapping_add(500),
                cfg.tau_amplitude(),
                cfg.q0,
                cfg.q1,
            );
            (u, tau)
        }
        DataKind::RandomBand => (
            data::random_band_velocity(grid, seed, cfg.amplitude, cfg.q0, cfg.q1),
            data::random_band_tensor(
                grid,
                seed.wrapping_add(500),
                cfg.tau_amplitude(),
                cfg.q0,
                cfg.q1,
            ),
        ),
        DataKind::SingleBlock => {
            let raw = VectorField::new(
                (0..grid.dim())
                    .map(|c| data::single_block_scalar(grid, seed.wrapping_add(c as u64), cfg.q0))
                    .collect(),
            );
            let mut u = leray_project(&raw);
            let peak = u.max_abs();
            if peak > 0.0 {
                u = u.scale(cfg.amplitude / peak);
            }
            u.divergence_free = true;
            let entries = (0..grid.dim() * grid.dim())
                .map(|e| data::single_block_scalar(grid, seed.wrapping_add(100 + e as u64), cfg.q0))
                .collect();
            let t = TensorField::new(entries, false).symmetrize();
            let peak = t.max_abs();
            let tau = t.scale(if peak > 0.0 { cfg.tau_amplitude() / peak } else { 0.0 });
            (u, tau)
        }
    }
}

struct SolverRun {
    diagnostics: Diagnostics,
    final_state: Option<SimState>,
    blowup_time: Option<f64>,
    dt: f64,
    norms: InitialNorms,
}

/// Run the solver for an experiment, tolerating blow-up (recorded, not
/// propagated) and writing the diagnostics CSV + final checkpoint.
fn solver_run(cfg: &ExperimentConfig, seed: u64, write_artifacts: bool) -> Result<SolverRun> {
    let grid = Grid::new(cfg.d, cfg.n, cfg.l)?;
    let part = DyadicPartition::new(grid.clone())?;
    let (u0, tau0) = make_data(cfg, &grid, seed);
    let params = Params {
        nu: cfg.nu,
        a: cfg.a,
        mu: cfg.mu,
        b: cfg.b,
        friedrichs_n: None,
    };
    let state = SimState::new(&u0, &tau0, params)?;
    let norms = InitialNorms::measure(&state.u, &state.tau, cfg.lp_exponent, &part);
    let dt = cfg.resolve_dt(state.u.max_abs());
    let settings = RunSettings {
        dt,
        t_end: cfg.t_end,
        sample_every: cfg.sample_every,
        lp_exponent: cfg.lp_exponent,
    };
    let (diagnostics, final_state, blowup_time) = match solver::run(state, settings) {
        Ok(out) => (out.diagnostics, Some(out.final_state), None),
        Err(Error::BlowUp { t, state }) => {
            let mut d = Diagnostics::default();
            d.lp_exponent = cfg.lp_exponent;
            drop(state);
            (d, None, Some(t))
        }
        Err(e) => return Err(e),
    };
    if write_artifacts {
        std::fs::write(cfg.output.join("diagnostics.csv"), diagnostics.to_csv())
            .map_err(|e| Error::io(&cfg.output, e))?;
        if let Some(ref st) = final_state {
            write_checkpoint(st, &cfg.output.join("final.oldb"))?;
        }
    }
    Ok(SolverRun {
        diagnostics,
        final_state,
        blowup_time,
        dt,
        norms,
    })
}

// ---------------------------------------------------------------------------
// decay / energy
// ---------------------------------------------------------------------------

fn decay_experiment(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    let run = solver_run(cfg, cfg.seed, true)?;
    let mut rep = VerificationReport::new("decay", environment(cfg, run.dt));
    if let Some(t) = run.blowup_time {
        rep.checks
            .push(CheckRecord::small("completed-without-blowup", "main_thm0", t, 0.0));
        return Ok(rep);
    }
    let rows = &run.diagnostics.rows;
    let tau0_l2 = rows[0].tau_l2;
    let tau0_lp = rows[0].tau_lp;
    let mut worst_l2 = 0.0f64;
    let mut worst_lp = 0.0f64;
    for r in rows {
        let decay = (-cfg.a * r.time).exp();
        worst_l2 = worst_l2.max((r.tau_l2 / tau0_l2 - decay).abs() / decay);
        worst_lp = worst_lp.max((r.tau_lp / tau0_lp - decay).abs() / decay);
    }
    rep.checks.push(CheckRecord::small(
        "tau-l2-decay-equality",
        "energy-estimate",
        worst_l2,
        1e-6,
    ));
    rep.checks.push(CheckRecord::small(
        "tau-lp-decay-equality",
        "lemma:L^pbound_of_tau",
        worst_lp,
        1e-4,
    ));
    rep.checks.extend(structural_checks(run.final_state.as_ref().unwrap()));
    Ok(rep)
}

fn structural_checks(state: &SimState) -> Vec<CheckRecord> {
    let tau_scale = state.tau.max_abs().max(1e-30);
    let grad = state.u.grad_l2_norm_sq().sqrt().max(1e-30);
    vec![
        CheckRecord::small(
            "tau-symmetry",
            "main_system",
            state.tau.max_asymmetry() / tau_scale,
            1e-10,
        ),
        CheckRecord::small(
            "div-u",
            "main_system",
            divergence(&state.u).l2_norm() / grad,
            1e-10,
        ),
        CheckRecord::small(
            "skew-cancellation",
            "lemma:L^pbound_of_tau",
            solver::skew_cancellation_residual(state),
            1e-10,
        ),
    ]
}

fn energy_experiment(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    let run = solver_run(cfg, cfg.seed, true)?;
    let mut rep = VerificationReport::new("energy", environment(cfg, run.dt));
    if let Some(t) = run.blowup_time {
        rep.checks
            .push(CheckRecord::small("completed-without-blowup", "main_thm0", t, 0.0));
        return Ok(rep);
    }
    let rows = &run.diagnostics.rows;
    if cfg.mu == 0.0 {
        // pointwise in time (the valid reading of the display):
        // ||u(t)||^2 + nu int_0^t ||grad u||^2 <= ||u0||^2 + ||tau0||^2 Gamma(t)^2
        let u0_sq = rows[0].u_l2_sq;
        let tau0_sq = rows[0].tau_l2 * rows[0].tau_l2;
        let mut worst_ratio = 0.0f64;
        for r in rows {
            let lhs = r.u_l2_sq + r.nu_int_grad_u_sq;
            let rhs = u0_sq + tau0_sq * bounds::gamma(cfg.a, cfg.nu, r.time).powi(2);
            worst_ratio = worst_ratio.max(lhs / rhs);
        }
        rep.checks.push(CheckRecord::bound(
            "energy-inequality",
            "energy-estimate",
            worst_ratio,
            1.0,
            0.01,
        ));
    } else {
        // mu ||u||^2_sup + ||tau||^2_sup + 2a int ||tau||^2 + 2 nu mu int
        // ||grad u||^2 <= mu ||u0||^2 + ||tau0||^2
        let budget = cfg.mu * rows[0].u_l2_sq + rows[0].tau_l2 * rows[0].tau_l2;
        let mut int_tau_sq = 0.0f64;
        let mut worst_ratio = 0.0f64;
        for (i, r) in rows.iter().enumerate() {
            if i > 0 {
                let dt = r.time - rows[i - 1].time;
                int_tau_sq += 0.5
                    * dt
                    * (rows[i - 1].tau_l2 * rows[i - 1].tau_l2 + r.tau_l2 * r.tau_l2);
            }
            let lhs = cfg.mu * r.u_l2_sq
                + r.tau_l2 * r.tau_l2
                + 2.0 * cfg.a * int_tau_sq
                + 2.0 * cfg.mu * r.nu_int_grad_u_sq;
            worst_ratio = worst_ratio.max(lhs / budget);
        }
        rep.checks.push(CheckRecord::bound(
            "mixed-energy-inequality",
            "energy-estimate_mu",
            worst_ratio,
            1.0,
            0.01,
        ));
    }
    rep.checks.extend(structural_checks(run.final_state.as_ref().unwrap()));
    Ok(rep)
}

// ---------------------------------------------------------------------------
// lipschitz
// ---------------------------------------------------------------------------

/// Smallest `C >= lo` with `value(C) >= lhs`, by bisection (the bound is
/// monotone in `C`).
fn required_constant(lhs: f64, lo: f64, hi: f64, value: impl Fn(f64) -> f64) -> f64 {
    if value(lo) >= lhs {
        return lo;
    }
    if value(hi) < lhs {
        return hi;
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if value(mid) >= lhs {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo) < 1e-6 * hi {
            break;
        }
    }
    hi
}

fn lipschitz_one_run(cfg: &ExperimentConfig, seed: u64) -> Result<(f64, f64, f64, InitialNorms, f64)> {
    let mut sub = cfg.clone();
    sub.seed = seed;
    let run = solver_run(&sub, seed, false)?;
    if let Some(t) = run.blowup_time {
        return Err(Error::StepSize(format!(
            "unexpected blow-up at t = {t} in a mu = 0 run"
        )));
    }
    let last = run.diagnostics.rows.last().unwrap();
    let lip_lhs = cfg.nu * last.int_u_b1_inf1;
    let tau_lhs = last.tau_b_dp_p1;
    let tau0_bp = run.diagnostics.rows[0].tau_b_dp_p1;
    Ok((lip_lhs, tau_lhs, tau0_bp, run.norms, run.dt))
}

fn lipschitz_experiment(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    let params = Params::new(cfg.nu, cfg.a, cfg.mu, cfg.b)?;
    let t = cfg.t_end;

    // calibrate the single family constant on a held-out seed corpus
    let mut c_req: f64 = 0.05;
    for cal_seed in [cfg.seed + 100, cfg.seed + 101, cfg.seed + 102] {
        let (lip_lhs, tau_lhs, tau0_bp, norms, _) = lipschitz_one_run(cfg, cal_seed)?;
        let cu = required_constant(lip_lhs, 0.05, 1e5, |c| {
            bounds::upsilon1(t, &params, &norms, c).unwrap_or(f64::INFINITY)
        });
        let ct = required_constant(tau_lhs, 0.05, 1e5, |c| {
            let u1 = bounds::upsilon1(t, &params, &norms, c).unwrap_or(f64::INFINITY);
            tau0_bp * (c / cfg.nu * u1).exp()
        });
        c_req = c_req.max(cu).max(ct);
    }
    let c_cal = c_req * 1.1;

    let mut rep = VerificationReport::new("lipschitz", environment(cfg, 0.0));
    let mut last_dt = 0.0;
    for (i, seed) in (0..5).map(|i| (i, cfg.seed + i as u64)) {
        let (lip_lhs, tau_lhs, tau0_bp, norms, dt) = lipschitz_one_run(cfg, seed)?;
        last_dt = dt;
        let u1 = bounds::upsilon1(t, &params, &norms, c_cal)?;
        rep.checks.push(
            CheckRecord::bound(
                &format!("lipschitz-budget-seed{i}"),
                "thm:Lipschitz-prop-u^n",
                lip_lhs,
                u1,
                0.0,
            )
            .with_constant(c_cal),
        );
        let tau_rhs = tau0_bp * (c_cal / cfg.nu * u1).exp();
        rep.checks.push(
            CheckRecord::bound(
                &format!("tau-regularity-seed{i}"),
                "ineq-tauBp",
                tau_lhs,
                tau_rhs,
                0.0,
            )
            .with_constant(c_cal),
        );
    }
    rep.environment.dt = last_dt;
    Ok(rep)
}

// ---------------------------------------------------------------------------
// picard
// ---------------------------------------------------------------------------

fn picard_experiment(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    let grid = Grid::new(cfg.d, cfg.n, cfg.l)?;
    let part = DyadicPartition::new(grid.clone())?;
    let params = Params::new(cfg.nu, cfg.a, 0.0, 0.0)?;
    let p = cfg.d as f64; // the grid-meaningful index p = d
    let n_max = 8;
    let dt = cfg.dt.unwrap_or(1e-3);
    let mut rep = VerificationReport::new("picard", environment(cfg, dt));
    let mut csv_blob = String::new();

    // calibrate the transport-bound constant on a held-out seed
    let c_transport = {
        let seed = cfg.seed + 100;
        let (u0, tau0) = make_data(cfg, &grid, seed);
        let horizon = picard::smallness_horizon(
            &u0, &tau0, params, cfg.epsilon, bounds::DEFAULT_C, dt, cfg.t_end, p, &part,
        )?;
        let run = picard::picard_solve(&u0, &tau0, params, horizon, dt, n_max, p, &part)?;
        let tau0_bp = besov_norm_tensor(
            &run.tau_last[0],
            BesovParams::new(cfg.d as f64 / p, p, 1.0),
            &part,
        );
        let mut req: f64 = 0.05;
        for it in &run.iterates {
            if it.drift_lip_integral > 0.0 && tau0_bp > 0.0 {
                req = req.max((it.tau_sup_norm / tau0_bp).ln() / it.drift_lip_integral);
            }
        }
        req * 1.1
    };

    for i in 0..5u64 {
        let seed = cfg.seed + i;
        let (u0, tau0) = make_data(cfg, &grid, seed);
        let horizon = picard::smallness_horizon(
            &u0,
            &tau0,
            params,
            cfg.epsilon,
            bounds::DEFAULT_C,
            dt,
            cfg.t_end,
            p,
            &part,
        )?;
        let run = picard::picard_solve(&u0, &tau0, params, horizon, dt, n_max, p, &part)?;
        let ratios = run.contraction_ratios();
        let worst = ratios.iter().skip(1).cloned().fold(0.0f64, f64::max);
        rep.checks.push(
            CheckRecord::bound(
                &format!("contraction-seed{i}"),
                "iperiper",
                worst,
                0.55,
                0.0,
            )
            .with_constant(bounds::DEFAULT_C),
        );

        // cross-validate against the direct solver at the same nodes
        let state = SimState::new(&u0, &tau0, params)?;
        let settings = RunSettings {
            dt,
            t_end: horizon,
            sample_every: usize::MAX,
            lp_exponent: p,
        };
        let direct = solver::run(state, settings)?;
        let diff = run
            .final_velocity()
            .sub(&direct.final_state.u)
            .l2_norm();
        let delta_last = run.iterates.last().unwrap().delta_norm.unwrap_or(0.0);
        let budget = 10.0 * (dt * dt + delta_last);
        rep.checks.push(CheckRecord::bound(
            &format!("fixed-point-vs-solver-seed{i}"),
            "main_system_appx",
            diff,
            budget,
            0.0,
        ));
        // every iterate obeys the exponential transport bound with the
        // calibrated constant
        let tau0_bp = besov_norm_tensor(
            &run.tau_last[0],
            BesovParams::new(cfg.d as f64 / p, p, 1.0),
            &part,
        );
        let worst_excess = run
            .iterates
            .iter()
            .map(|it| it.tau_sup_norm / (tau0_bp * (c_transport * it.drift_lip_integral).exp()))
            .fold(0.0f64, f64::max);
        rep.checks.push(
            CheckRecord::bound(
                &format!("tau-transport-bound-seed{i}"),
                "lemma:bound_of_tau-exp_on_nablau",
                worst_excess,
                1.0,
                0.0,
            )
            .with_constant(c_transport),
        );
        csv_blob.push_str(&format!("# seed {seed}, horizon {horizon}\n"));
        csv_blob.push_str(&run.to_csv());
    }
    std::fs::write(cfg.output.join("picard.csv"), csv_blob)
        .map_err(|e| Error::io(&cfg.output, e))?;
    Ok(rep)
}

// ---------------------------------------------------------------------------
// lorentz3d
// ---------------------------------------------------------------------------

fn lorentz3d_experiment(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    // calibration run on a shifted seed fixes the propagation constant
    let c_cal = lorentz3d_required_c(cfg, cfg.seed + 100)? * 1.1;
    let (mut rep, _) = lorentz3d_checked(cfg, cfg.seed, c_cal, true)?;
    rep.checks.insert(
        0,
        CheckRecord::bound(
            "small-data-condition",
            "small-cond-lorentz-u",
            lorentz3d_small_lhs(cfg, cfg.seed)?,
            cfg.epsilon / cfg.nu,
            0.0,
        ),
    );
    Ok(rep)
}

fn lorentz3d_data(cfg: &ExperimentConfig, seed: u64) -> Result<(Arc<Grid>, VectorField, TensorField)> {
    let grid = Grid::new(3, cfg.n, cfg.l)?;
    let (u0, tau0) = make_data(cfg, &grid, seed);
    // rescale jointly onto the smallness condition with 1% headroom
    let u_w = crate::lorentz::weak_lp_norm_vector(&u0, 3.0).value;
    let tau_w = weak_lp_norm_tensor(&tau0, 1.5).value;
    let current = u_w + tau_w / cfg.nu;
    let target = 0.99 * cfg.epsilon / cfg.nu;
    let s = if current > 0.0 { target / current } else { 0.0 };
    Ok((grid, u0.scale(s), tau0.scale(s)))
}

fn lorentz3d_small_lhs(cfg: &ExperimentConfig, seed: u64) -> Result<f64> {
    let (_, u0, tau0) = lorentz3d_data(cfg, seed)?;
    Ok(crate::lorentz::weak_lp_norm_vector(&u0, 3.0).value
        + weak_lp_norm_tensor(&tau0, 1.5).value / cfg.nu)
}

fn lorentz3d_required_c(cfg: &ExperimentConfig, seed: u64) -> Result<f64> {
    lorentz3d_checked(cfg, seed, 1.0, false).map(|(_, required)| required)
}

fn lorentz3d_checked(
    cfg: &ExperimentConfig,
    seed: u64,
    c: f64,
    write: bool,
) -> Result<(VerificationReport, f64)> {
    let (_grid, u0, tau0) = lorentz3d_data(cfg, seed)?;
    let params = Params::new(cfg.nu, cfg.a, 0.0, 0.0)?;
    let state = SimState::new(&u0, &tau0, params)?;
    let u0_w = crate::lorentz::weak_lp_norm_vector(&state.u, 3.0).value;
    let tau0_w = weak_lp_norm_tensor(&state.tau, 1.5).value;
    let dt = cfg.dt.unwrap_or(5e-3);
    let settings = RunSettings {
        dt,
        t_end: cfg.t_end,
        sample_every: cfg.sample_every,
        lp_exponent: cfg.lp_exponent,
    };
    let mut rep = VerificationReport::new("lorentz3d", environment(cfg, dt));
    let out = match solver::run(state, settings) {
        Ok(out) => out,
        Err(Error::BlowUp { t, .. }) => {
            rep.checks
                .push(CheckRecord::small("completed-without-blowup", "main_thm2", t, 0.0));
            return Ok((rep, f64::INFINITY));
        }
        Err(e) => return Err(e),
    };
    if write {
        std::fs::write(cfg.output.join("diagnostics.csv"), out.diagnostics.to_csv())
            .map_err(|e| Error::io(&cfg.output, e))?;
        write_checkpoint(&out.final_state, &cfg.output.join("final.oldb"))?;
    }
    let sup_u = out
        .diagnostics
        .rows
        .iter()
        .map(|r| r.u_weak_d)
        .fold(0.0f64, f64::max);
    let sup_tau = out
        .diagnostics
        .rows
        .iter()
        .map(|r| r.tau_weak_d2)
        .fold(0.0f64, f64::max);
    let budget = u0_w + tau0_w / cfg.nu;
    let required = sup_u / budget;
    rep.checks.push(
        CheckRecord::bound(
            "u-weak-norm-propagation",
            "small-cond-lorentz-u",
            sup_u,
            c * budget,
            0.0,
        )
        .with_constant(c),
    );
    rep.checks.push(CheckRecord::bound(
        "tau-weak-norm-conservation",
        "main_thm2",
        sup_tau,
        tau0_w,
        1e-4,
    ));
    rep.checks.extend(structural_checks(&out.final_state));
    Ok((rep, required))
}

// ---------------------------------------------------------------------------
// noncorot / lifespan
// ---------------------------------------------------------------------------

fn noncorot_experiment(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    let params = Params::new(cfg.nu, cfg.a, cfg.mu, cfg.b)?;
    let run = solver_run(cfg, cfg.seed, true)?;
    let mut rep = VerificationReport::new("noncorot", environment(cfg, run.dt));
    let observed = run.blowup_time.unwrap_or(cfg.t_end);
    let predicted = bounds::lifespan_lower_bound(&params, &run.norms, bounds::DEFAULT_C);
    rep.checks.push(
        CheckRecord::bound(
            "lifespan-lower-bound",
            "main_thm0",
            predicted.min(1e300),
            observed,
            0.0,
        )
        .with_constant(bounds::DEFAULT_C),
    );
    // smallness regime: when |b| + mu is below the data-dependent threshold
    // (reference constant 1), the run must reach the horizon.
    let norm_sum = run.norms.tau0_l2 + run.norms.tau0_bp + run.norms.u0_l2 + run.norms.u0_bp;
    let threshold = 1.0 / (1.0 + norm_sum.exp());
    if cfg.a > 0.0 && cfg.b.abs() + cfg.mu <= threshold {
        rep.checks.push(CheckRecord::bound(
            "smallness-regime-global",
            "main_thm0b",
            cfg.t_end,
            observed,
            0.0,
        ));
    }
    if let Some(ref st) = run.final_state {
        rep.checks.extend(structural_checks(st));
    }
    Ok(rep)
}

fn lifespan_experiment(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("lifespan", environment(cfg, 0.0));
    // closed form: g2 = 0, g3 = c constant gives T_max = sqrt(2/c)
    for c in [0.25, 0.37, 4.0] {
        let g = bounds::gronwall_lifespan(
            bounds::Poly(vec![0.0, 1.0]),
            bounds::Poly(vec![]),
            bounds::Poly(vec![c]),
        )?;
        rep.checks.push(CheckRecord::close(
            &format!("gronwall-closed-form-c{c}"),
            "ineq-lemma:lifespan",
            g.t_max,
            (2.0 / c).sqrt(),
            1e-8,
        ));
    }
    // oracle domination over seeded polynomial triples
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    for trial in 0..10 {
        let mut coef = |lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
        let g1 = bounds::Poly(vec![0.0, coef(0.05, 0.5), coef(0.0, 0.2)]);
        let g2 = bounds::Poly(vec![coef(0.0, 0.5), coef(0.0, 0.3)]);
        let g3 = bounds::Poly(vec![coef(0.1, 1.0)]);
        let margin = gronwall_oracle_margin(&g1, &g2, &g3)?;
        rep.checks.push(CheckRecord::small(
            &format!("gronwall-oracle-domination-{trial}"),
            "ineq-lemma:lifespan",
            margin.max(0.0),
            1e-6,
        ));
    }
    Ok(rep)
}

/// Worst relative excess of the Volterra equality solution over the lemma's
/// envelope (zero when the envelope dominates everywhere).
fn gronwall_oracle_margin(
    g1: &bounds::Poly,
    g2: &bounds::Poly,
    g3: &bounds::Poly,
) -> Result<f64> {
    let bound = bounds::gronwall_lifespan(g1.clone(), g2.clone(), g3.clone())?;
    let t_end = (0.8 * bound.t_max).min(3.0);
    let n = 4000;
    let dt = t_end / n as f64;
    let mut y = vec![0.0f64; n + 1];
    let mut int_g2y = 0.0;
    let mut int_y2 = 0.0;
    let mut worst = 0.0f64;
    for k in 1..=n {
        let t = k as f64 * dt;
        let t_prev = t - dt;
        let mut guess = y[k - 1];
        for _ in 0..4 {
            let ig = int_g2y + 0.5 * dt * (g2.eval(t_prev) * y[k - 1] + g2.eval(t) * guess);
            let iy2 = int_y2 + 0.5 * dt * (y[k - 1].powi(2) + guess * guess);
            guess = g1.eval(t) + ig + g3.eval(t) * iy2;
        }
        int_g2y += 0.5 * dt * (g2.eval(t_prev) * y[k - 1] + g2.eval(t) * guess);
        int_y2 += 0.5 * dt * (y[k - 1].powi(2) + guess * guess);
        y[k] = guess;
        if k % 100 == 0 {
            let env = bound.bound_at(t);
            if env > 0.0 && env.is_finite() {
                worst = worst.max(y[k] / env - 1.0);
            }
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// toolbox
// ---------------------------------------------------------------------------

fn toolbox_experiment(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    let grid = Grid::new(2, cfg.n, cfg.l)?; // the toolbox battery runs in 2D
    let part = DyadicPartition::new(grid.clone())?;
    let mut rep = VerificationReport::new("toolbox", environment(cfg, 0.0));
    let checks = &mut rep.checks;

    // 1. partition of unity on covered shells
    let lo = 4.0 / 3.0 * (2.0f64).powi(part.q_min());
    let hi = 0.75 * (2.0f64).powi(part.q_max() + 1);
    let mut worst = 0.0f64;
    for i in 1..grid.modes() {
        let r = grid.wavenumber_norm_sq(i).sqrt();
        if r >= lo && r <= hi {
            let sum: f64 = part.q_range().map(|q| lp::phi((2.0f64).powi(-q) * r)).sum();
            worst = worst.max((sum - 1.0).abs());
        }
    }
    checks.push(CheckRecord::small("partition-identity", "LP-identiy1", worst, 1e-12));

    // 2. exact block orthogonality
    let f = data::band_scalar(&grid, cfg.seed, part.q_min(), part.q_max());
    let mut worst = 0.0f64;
    for q in part.q_range() {
        let bq = part.block(&f, q)?;
        for j in part.q_range() {
            if (q - j).abs() >= 2 {
                let bjq = part.block(&bq, j)?;
                worst = worst.max(bjq.spectral().iter().map(|c| c.norm()).fold(0.0, f64::max));
            }
        }
    }
    checks.push(CheckRecord::small("block-orthogonality", "sec:Besov", worst, 0.0));

    // 3. five-block separation of low-high products
    let u = data::band_scalar(&grid, cfg.seed + 1, part.q_min(), part.q_max());
    let v = data::band_scalar(&grid, cfg.seed + 2, part.q_min(), part.q_max());
    let mut worst = 0.0f64;
    for q in part.q_range().skip(1) {
        let piece = part.low_freq(&u, q - 1)?.mul_pointwise(&part.block(&v, q)?);
        for k in part.q_range() {
            if (q - k).abs() >= 5 {
                let b = part.block(&piece, k)?;
                worst = worst.max(b.spectral().iter().map(|c| c.norm()).fold(0.0, f64::max));
            }
        }
    }
    checks.push(CheckRecord::small("five-block-separation", "sec:Besov", worst, 0.0));

    // 4. Bony reconstruction on band-limited pairs
    let mut worst = 0.0f64;
    for s in 0..3 {
        let f = data::band_scalar(&grid, cfg.seed + 10 + s, part.q_min() + 1, part.q_max() - 1);
        let g = data::band_scalar(&grid, cfg.seed + 20 + s, part.q_min() + 1, part.q_max() - 1);
        let (tfg, tgf, r) = lp::bony_decompose(&f, &g, &part)?;
        let product = dealias(&f).mul_pointwise(&dealias(&g));
        let resid = product.sub(&tfg.add(&tgf).add(&r)).max_abs();
        worst = worst.max(resid / product.max_abs().max(1e-30));
    }
    checks.push(CheckRecord::small("bony-reconstruction", "Bony-dec", worst, 1e-10));

    // 5. heat block decay fit
    let probes: Vec<Field> = (0..4)
        .map(|s| data::band_scalar(&grid, cfg.seed + 30 + s, part.q_min(), part.q_max()))
        .collect();
    let ts: Vec<f64> = (0..8).map(|i| 0.005 * (1.6f64).powi(i)).collect();
    let qs: Vec<i32> = part.q_range().filter(|&q| q >= 0).collect();
    let (rate, prefactor) = fit_block_decay(&part, &probes, 1.0, &ts, &qs)?;
    checks.push(
        CheckRecord::bound("block-decay-rate", "heat-block-decay", 0.9 * 0.5625, rate, 0.0)
            .with_constant(prefactor),
    );
    checks.push(CheckRecord::bound(
        "block-decay-prefactor",
        "heat-block-decay",
        prefactor,
        1.1,
        0.0,
    ));

    // 6. Bernstein ratios: rescaled family is q-independent, random blocks bounded
    let profile = |x: [f64; 3]| (x[0]).sin() * (x[1]).cos();
    let mut ratios = Vec::new();
    for q in 0..3 {
        let scale = (2.0f64).powi(q);
        let f = Field::from_fn(grid.clone(), move |x| profile([x[0] * scale, x[1] * scale, 0.0]));
        let (_, r) = lp::check_bernstein(&f, q, 2.0, 2.0, &part)?;
        ratios.push(r);
    }
    let spread = ratios.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| {
        (lo.min(r), hi.max(r))
    });
    checks.push(CheckRecord::small(
        "bernstein-rescaled-family",
        "bernstein",
        spread.1 - spread.0,
        1e-8,
    ));
    let (embed_lo, embed_hi) = bernstein_window(&grid, &part, cfg.seed + 40, 30)?;
    let (fresh_lo, fresh_hi) = bernstein_window(&grid, &part, cfg.seed + 41, 30)?;
    let ok = fresh_lo >= embed_lo / 1.1 && fresh_hi <= embed_hi * 1.1;
    checks.push(CheckRecord {
        name: "bernstein-embedding-window".into(),
        anchor: "bernstein".into(),
        lhs: fresh_hi,
        rhs: embed_hi * 1.1,
        constant: Some(embed_hi),
        tolerance: 0.1,
        pass: ok,
    });

    // 7. heat Chemin-Lerner estimate with calibrated constant
    let c_heat = heat_cl_required(&grid, &part, cfg.nu, cfg.seed + 50, 6)? * 1.1;
    let required_fresh = heat_cl_required(&grid, &part, cfg.nu, cfg.seed + 51, 6)?;
    checks.push(
        CheckRecord::bound("heat-chemin-lerner", "prop-heat-eq", required_fresh, c_heat, 0.0)
            .with_constant(c_heat),
    );

    // 8. f^2 product estimate with calibrated constant
    let c_sq = f_squared_required(&grid, &part, cfg.seed + 60, 100)? * 1.1;
    let fresh = f_squared_required(&grid, &part, cfg.seed + 61, 100)?;
    checks.push(
        CheckRecord::bound("f-squared-estimate", "lemma-product-f^2", fresh, c_sq, 0.0)
            .with_constant(c_sq),
    );

    // 9. gradient norm equivalence window
    let (glo, ghi) = grad_equivalence_window(&grid, &part, cfg.seed + 70, 50)?;
    let (flo, fhi) = grad_equivalence_window(&grid, &part, cfg.seed + 71, 50)?;
    let ok = flo >= glo / 1.1 && fhi <= ghi * 1.1;
    checks.push(CheckRecord {
        name: "grad-besov-equivalence".into(),
        anchor: "sec:Besov".into(),
        lhs: fhi,
        rhs: ghi * 1.1,
        constant: Some(ghi / glo),
        tolerance: 0.1,
        pass: ok,
    });

    // 10. Lorentz -> Besov embedding with calibrated constant
    let c_emb = lorentz_embedding_required(&grid, &part, cfg.seed + 80, 50)? * 1.1;
    let fresh = lorentz_embedding_required(&grid, &part, cfg.seed + 81, 50)?;
    checks.push(
        CheckRecord::bound("lorentz-besov-embedding", "lorentz-embedding", fresh, c_emb, 0.0)
            .with_constant(c_emb),
    );

    // 11. Chebyshev: weak norm below the strong norm
    let mut worst = 0.0f64;
    for s in 0..50 {
        let f = data::normal_field(&grid, cfg.seed + 200 + s);
        for p in [1.5, 2.0, 3.0] {
            worst = worst.max(weak_lp_norm(&f, p).value / f.lp_norm(p));
        }
    }
    checks.push(CheckRecord::bound("weak-below-strong", "weak-lebesgue", worst, 1.0, 1e-12));

    // 12. Minkowski exchange between tilde and plain norms (r = 1, rho = inf)
    let params = BesovParams::new(0.0, 2.0, 1.0);
    let times: Vec<f64> = (0..6).map(|i| i as f64 * 0.1).collect();
    let fields: Vec<Field> = (0..6)
        .map(|i| data::band_scalar(&grid, cfg.seed + 300 + i, part.q_min(), part.q_max()))
        .collect();
    let tn = TrajectoryNorms::from_scalar_trajectory(&part, &times, &fields, params.p);
    let tilde = chemin_lerner_norm(&tn, f64::INFINITY, params)?;
    let plain = fields
        .iter()
        .map(|f| besov_norm(f, params, &part).value)
        .fold(0.0f64, f64::max);
    checks.push(CheckRecord::bound(
        "minkowski-exchange",
        "chemin-lerner",
        plain,
        tilde,
        1e-12,
    ));

    // 13. Leray projection identities
    let u = VectorField::new(vec![
        data::band_scalar(&grid, cfg.seed + 400, part.q_min(), part.q_max()),
        data::band_scalar(&grid, cfg.seed + 401, part.q_min(), part.q_max()),
    ]);
    let p1 = leray_project(&u);
    let p2 = leray_project(&p1);
    let idem = p2.sub(&p1).l2_norm() / p1.l2_norm().max(1e-30);
    checks.push(CheckRecord::small("leray-idempotent", "rmk:Stokes-bound", idem, 1e-12));
    let div_ratio = divergence(&p1).l2_norm() / p1.grad_l2_norm_sq().sqrt().max(1e-30);
    checks.push(CheckRecord::small("leray-divergence-free", "rmk:Stokes-bound", div_ratio, 1e-10));
    let a = leray_project(&u.map(|f| crate::field::friedrichs_project(f, 2).unwrap()));
    let b = leray_project(&u).map(|f| crate::field::friedrichs_project(f, 2).unwrap());
    let comm = a.sub(&b).max_abs();
    checks.push(CheckRecord::small(
        "friedrichs-leray-commute",
        "main_system_appx1",
        comm,
        1e-12,
    ));

    // 14. Parseval
    let f = data::normal_field(&grid, cfg.seed + 500);
    let phys = f.l2_norm().powi(2);
    let spec: f64 = f.spectral().iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.volume();
    checks.push(CheckRecord::close("parseval", "sec:Besov", phys, spec, 1e-12));

    // 15. gradient kernel scaled-norm stability across a tau decade; the
    // probe corpus pairs dyadic blocks with random band fields so each tau
    // can pick a probe concentrated near its optimal frequency
    let mut probes: Vec<Field> = (0..3)
        .map(|s| data::band_scalar(&grid, cfg.seed + 600 + s, part.q_min(), part.q_max()))
        .collect();
    for q in part.q_range() {
        let b = part.block(&probes[0], q)?;
        if b.l2_norm() > 1e-12 {
            probes.push(b);
        }
    }
    let taus: Vec<f64> = (0..6).map(|i| 0.02 * (10.0f64).powf(i as f64 / 5.0)).collect();
    let scaled = verify_grad_kernel_bound(&probes, 2.0, 2.0, &taus)?;
    let hi = scaled.iter().fold(0.0f64, |m, &v| m.max(v));
    let lo_v = scaled.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    checks.push(CheckRecord::bound(
        "grad-kernel-stability",
        "lemma_Lorentz_bound",
        hi / lo_v,
        1.5,
        0.0,
    ));

    // 16. Duhamel weak-norm forcing bound in 3D
    let c_duh = duhamel_weak_required(cfg.seed + 700)? * 1.1;
    let fresh = duhamel_weak_required(cfg.seed + 701)?;
    checks.push(
        CheckRecord::bound("duhamel-weak-forcing", "lemma_Lorentz_bound", fresh, c_duh, 0.0)
            .with_constant(c_duh),
    );

    // 17. log interpolation with calibrated constant
    let c_log = log_interp_required(&grid, &part, cfg.seed + 800, 100)? * 1.1;
    let mut worst_gap = 0.0f64;
    for s in 0..100 {
        let f = data::band_scalar(&grid, cfg.seed + 900 + s, part.q_min(), part.q_max());
        let big = besov_norm(&f, BesovParams::new(1.5, 4.0, 1.0), &part).value;
        let small = besov_norm(&f, BesovParams::new(-0.5, 4.0, f64::INFINITY), &part).value;
        let gap = lp::log_interpolation_gap(&f, big, small, c_log, &part)?;
        worst_gap = worst_gap.max(-gap);
    }
    checks.push(
        CheckRecord::small("log-interpolation", "log-interpolation", worst_gap, 1e-10)
            .with_constant(c_log),
    );

    // 18. transport growth bounds against shear drifts (linear vs exponential)
    let (lin_req, exp_req) = transport_growth_required(cfg.seed + 1000)?;
    let c_lin = lin_req * 1.1;
    let (lin_fresh, exp_fresh) = transport_growth_required(cfg.seed + 1001)?;
    checks.push(
        CheckRecord::bound(
            "transport-linear-growth",
            "lemma:bound_of_tau-linear_on_nablau",
            lin_fresh,
            c_lin,
            0.0,
        )
        .with_constant(c_lin),
    );
    let c_exp = exp_req * 1.1;
    checks.push(
        CheckRecord::bound(
            "transport-exponential-growth",
            "lemma:bound_of_tau-exp_on_nablau",
            exp_fresh,
            c_exp,
            0.0,
        )
        .with_constant(c_exp),
    );

    Ok(rep)
}

fn bernstein_window(
    grid: &Arc<Grid>,
    part: &DyadicPartition,
    seed: u64,
    count: u64,
) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for s in 0..count {
        let f = data::band_scalar(grid, seed * 1000 + s, part.q_min(), part.q_max());
        for q in part.q_range() {
            match lp::check_bernstein(&f, q, 2.0, f64::INFINITY, part) {
                Ok((embed, grad)) => {
                    lo = lo.min(embed).min(grad);
                    hi = hi.max(embed).max(grad);
                }
                Err(_) => continue, // empty block
            }
        }
    }
    Ok((lo, hi))
}

fn heat_cl_required(
    grid: &Arc<Grid>,
    part: &DyadicPartition,
    nu: f64,
    seed: u64,
    count: u64,
) -> Result<f64> {
    let mut worst = 0.0f64;
    let s = 0.0;
    let params_low = BesovParams::new(s, 2.0, 1.0);
    let params_high = BesovParams::new(s + 2.0, 2.0, 1.0);
    let t_end = 0.4;
    let nodes = 40;
    let times: Vec<f64> = (0..=nodes).map(|k| k as f64 * t_end / nodes as f64).collect();
    for i in 0..count {
        let u0 = data::band_scalar(grid, seed * 100 + i, part.q_min() + 1, part.q_max() - 1);
        let forcing = data::band_scalar(grid, seed * 100 + 50 + i, part.q_min() + 1, part.q_max() - 1);
        // mild scalar heat solve with constant forcing
        let mut states = Vec::with_capacity(times.len());
        states.push(u0.clone());
        let mut cur = u0.clone();
        let dt = t_end / nodes as f64;
        for _ in 0..nodes {
            let half = cur.add(&forcing.scale(0.5 * dt));
            cur = heat_propagate(&half, dt, nu)?.add(&forcing.scale(0.5 * dt));
            states.push(cur.clone());
        }
        let tn = TrajectoryNorms::from_scalar_trajectory(part, &times, &states, 2.0);
        // rho = 1: nu ||u||_{L~1 B^{s+2}} <= C (||u0||_{B^s} + ||f||_{L~1 B^s})
        let lhs = nu * chemin_lerner_norm(&tn, 1.0, params_high)?;
        let rhs_core = besov_norm(&u0, params_low, part).value
            + t_end * besov_norm(&forcing, params_low, part).value;
        worst = worst.max(lhs / rhs_core);
        // rho = inf: sup-in-time at the same regularity
        let lhs = chemin_lerner_norm(&tn, f64::INFINITY, params_low)?;
        worst = worst.max(lhs / rhs_core);
    }
    Ok(worst)
}

fn f_squared_required(
    grid: &Arc<Grid>,
    part: &DyadicPartition,
    seed: u64,
    count: u64,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for s in 0..count {
        let f = data::band_scalar(grid, seed * 1000 + s, part.q_min() + 1, part.q_max() - 1);
        let sq = dealias(&f.mul_pointwise(&f));
        let lhs = besov_norm(&sq, BesovParams::new(0.0, f64::INFINITY, 1.0), part).value;
        let rhs = f.l2_norm() * besov_norm(&f, BesovParams::new(1.0, f64::INFINITY, 1.0), part).value;
        if rhs > 0.0 {
            worst = worst.max(lhs / rhs);
        }
    }
    Ok(worst)
}

fn grad_equivalence_window(
    grid: &Arc<Grid>,
    part: &DyadicPartition,
    seed: u64,
    count: u64,
) -> Result<(f64, f64)> {
    let s = 0.5;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..count {
        let f = data::band_scalar(grid, seed * 1000 + i, part.q_min() + 1, part.q_max() - 1);
        let grad = gradient(&f);
        let num = besov_norm_vector(&grad, BesovParams::new(s - 1.0, 2.0, 1.0), part);
        let den = besov_norm(&f, BesovParams::new(s, 2.0, 1.0), part).value;
        if den > 0.0 {
            let r = num / den;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    Ok((lo, hi))
}

fn lorentz_embedding_required(
    grid: &Arc<Grid>,
    part: &DyadicPartition,
    seed: u64,
    count: u64,
) -> Result<f64> {
    // L^{2,inf} -> B^{-1/2}_{4,inf} in 2D
    let mut worst = 0.0f64;
    for i in 0..count {
        let f = data::normal_field(grid, seed * 1000 + i);
        let weak = weak_lp_norm(&f, 2.0).value;
        let besov = besov_norm(&f, BesovParams::new(-0.5, 4.0, f64::INFINITY), part).value;
        if weak > 0.0 {
            worst = worst.max(besov / weak);
        }
    }
    Ok(worst)
}

fn log_interp_required(
    grid: &Arc<Grid>,
    part: &DyadicPartition,
    seed: u64,
    count: u64,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for s in 0..count {
        let f = data::band_scalar(grid, seed * 1000 + s, part.q_min(), part.q_max());
        let strong = besov_norm(&f, BesovParams::new(0.5, 4.0, 1.0), part).value;
        let weak = besov_norm(&f, BesovParams::new(0.5, 4.0, f64::INFINITY), part).value;
        let big = besov_norm(&f, BesovParams::new(1.5, 4.0, 1.0), part).value;
        let small = besov_norm(&f, BesovParams::new(-0.5, 4.0, f64::INFINITY), part).value;
        if weak > 0.0 {
            let denom = weak * (std::f64::consts::E + (small + big) / weak).ln();
            worst = worst.max(strong / denom);
        }
    }
    Ok(worst)
}

fn duhamel_weak_required(seed: u64) -> Result<f64> {
    let grid = Grid::new(3, 16, 2.0 * std::f64::consts::PI)?;
    let nodes = 20;
    let t_end = 0.3;
    let times: Vec<f64> = (0..=nodes).map(|k| k as f64 * t_end / nodes as f64).collect();
    let mut worst = 0.0f64;
    for i in 0..3u64 {
        let sigma: Vec<TensorField> = times
            .iter()
            .enumerate()
            .map(|(k, _)| {
                data::random_band_tensor(&grid, seed * 100 + i * 10 + k as u64 % 3, 1.0, 0, 1)
            })
            .collect();
        let result = duhamel_div_tensor(&sigma, 1.0, &times)?;
        let lhs = crate::lorentz::weak_lp_norm_vector(&result, 3.0).value;
        let rhs = sigma
            .iter()
            .map(|s| weak_lp_norm_tensor(s, 1.5).value)
            .fold(0.0f64, f64::max);
        if rhs > 0.0 {
            worst = worst.max(lhs / rhs);
        }
    }
    Ok(worst)
}

/// Measured growth factors for the frozen-shear transport: returns the
/// required constants for the linear bound
/// `||tau(T)||_{B^0} <= C ||tau0||_{B^0} (1 + int ||grad u||_{B^0})` and the
/// exponential bound `<= ||tau0|| exp(C int ||grad u||_{B^0})`.
fn transport_growth_required(seed: u64) -> Result<(f64, f64)> {
    let grid = Grid::new(2, 64, 2.0 * std::f64::consts::PI)?;
    let part = DyadicPartition::new(grid.clone())?;
    let mut lin = 0.0f64;
    let mut expo = 0.0f64;
    let t_end = 0.25;
    for (i, m) in [1.0, 2.0].iter().enumerate() {
        let tau0 = data::random_band_tensor(&grid, seed + i as u64, 1.0, 0, 1);
        let (ratio, grad_int) = shear_transport_ratio(&grid, &part, &tau0, *m, t_end)?;
        if grad_int > 0.0 {
            lin = lin.max(ratio / (1.0 + grad_int));
            expo = expo.max(ratio.ln().max(0.0) / grad_int);
        }
    }
    Ok((lin, expo))
}

/// Transport `tau0` along the steady shear of magnitude `m` and return
/// `(||tau(T)||_{B^0_inf1} / ||tau0||, int_0^T ||grad u||_{B^0_inf1})`.
pub fn shear_transport_ratio(
    grid: &Arc<Grid>,
    part: &DyadicPartition,
    tau0: &TensorField,
    m: f64,
    t_end: f64,
) -> Result<(f64, f64)> {
    let drift_field = data::shear_velocity(grid, m);
    let omega = crate::field::vorticity_tensor(&drift_field);
    let h = grid.box_size() / grid.points_per_axis() as f64;
    let dt = (0.4 * h / m.max(1e-12)).min(2e-3);
    let nodes = (t_end / dt).ceil() as usize;
    let times: Vec<f64> = (0..=nodes).map(|k| k as f64 * t_end / nodes as f64).collect();
    let drift: Vec<VectorField> = times.iter().map(|_| drift_field.clone()).collect();
    let omegas: Vec<TensorField> = times.iter().map(|_| omega.clone()).collect();
    let traj = picard::transport_tau(tau0, &drift, &omegas, 0.0, &times)?;
    let b0 = BesovParams::new(0.0, f64::INFINITY, 1.0);
    let n0 = besov_norm_tensor(&traj[0], b0, part);
    let n1 = besov_norm_tensor(traj.last().unwrap(), b0, part);
    let grad_b0 = besov_norm_tensor(&crate::field::velocity_gradient(&drift_field), b0, part);
    Ok((n1 / n0, grad_b0 * t_end))
}

/// Trapezoid-in-time integral of `Upsilon^1` is available through
/// [`bounds::upsilon2`]; this helper exposes the plain quadrature for
/// experiment code that wants the integral alone.
pub fn upsilon1_integral(
    t: f64,
    params: &Params,
    norms: &InitialNorms,
    c: f64,
) -> f64 {
    integrate(
        |s| bounds::upsilon1(s, params, norms, c).unwrap_or(f64::INFINITY),
        0.0,
        t,
        128,
    )
}

/// Toolbox fast path used by `oldb verify`.
pub fn verify_toolbox(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    let mut sub = cfg.clone();
    sub.experiment = ExperimentKind::Toolbox;
    run_experiment(&sub)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config_str;

    #[test]
    fn decay_experiment_passes_on_small_grid() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_text = format!(
            "experiment = decay\ngrid.N = 32\nparams.a = 1.0\ntime.T = 0.2\ntime.dt = 1e-3\noutput = {}\ninitial_data.amplitude = 0.2\n",
            dir.path().display()
        );
        let cfg = parse_config_str(&cfg_text).unwrap();
        let rep = run_experiment(&cfg).unwrap();
        assert!(rep.all_pass(), "{}", rep.summary());
        assert!(dir.path().join("diagnostics.csv").exists());
        assert!(dir.path().join("final.oldb").exists());
        assert!(dir.path().join("verification.json").exists());
    }

    #[test]
    fn energy_experiment_mu_zero() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_text = format!(
            "experiment = energy\ngrid.N = 32\ntime.T = 0.2\ntime.dt = 1e-3\noutput = {}\ninitial_data.amplitude = 0.3\n",
            dir.path().display()
        );
        let cfg = parse_config_str(&cfg_text).unwrap();
        let rep = run_experiment(&cfg).unwrap();
        assert!(rep.all_pass(), "{}", rep.summary());
    }

    #[test]
    fn noncorot_smallness_regime_completes() {
        // tiny mu, b with a > 0 and small data: the smallness-regime check
        // activates and the run must reach the horizon.
        let dir = tempfile::tempdir().unwrap();
        let cfg_text = format!(
            "experiment = noncorot\ngrid.N = 32\nparams.a = 1.0\nparams.mu = 0.003\n\
             params.b = 0.002\ntime.T = 0.2\ntime.dt = 1e-3\ninitial_data.amplitude = 0.1\n\
             output = {}\n",
            dir.path().display()
        );
        let cfg = parse_config_str(&cfg_text).unwrap();
        let rep = run_experiment(&cfg).unwrap();
        let regime = rep
            .checks
            .iter()
            .find(|c| c.name == "smallness-regime-global")
            .expect("regime check must activate for small mu + |b|");
        assert!(regime.pass);
        assert!(rep.all_pass(), "{}", rep.summary());
    }

    #[test]
    fn gronwall_margin_zero_for_classical_case() {
        let m = gronwall_oracle_margin(
            &bounds::Poly(vec![0.0, 0.3]),
            &bounds::Poly(vec![0.2]),
            &bounds::Poly(vec![]),
        )
        .unwrap();
        assert!(m <= 1e-6, "margin {m}");
    }
}
