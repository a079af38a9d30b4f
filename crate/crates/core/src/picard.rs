//! Local-existence iteration: linear transport of the tensor along a frozen
//! drift, a linear Stokes solve for the velocity correction, and the Cauchy
//! contraction measurement that certifies convergence at a small horizon.

use crate::error::{Error, Result};
use crate::field::{
    dealias, leray_project, vorticity_tensor, TensorField, VectorField,
};
use crate::lp::{chemin_lerner_norm, BesovParams, DyadicPartition, TrajectoryNorms};
use crate::semigroup::{heat_propagate_vector, stokes_mild_solve};
use crate::solver::{advection_term, corotation_term, Params};

/// Linear Stokes flow `u_L(t) = e^{nu t lap} u0` sampled at the nodes.
pub fn linear_stokes_u_l(u0: &VectorField, nu: f64, times: &[f64]) -> Result<Vec<VectorField>> {
    times
        .iter()
        .map(|&t| heat_propagate_vector(u0, t, nu))
        .collect()
}

/// Transport the tensor along a frozen drift:
/// `dt tau + u.grad tau - w tau + tau w + a tau = 0` with `(u, w)` sampled
/// at the nodes and interpolated linearly in time (the Heun stages land on
/// nodes, so the interpolation is exact there).
pub fn transport_tau(
    tau0: &TensorField,
    drift: &[VectorField],
    omega: &[TensorField],
    a: f64,
    times: &[f64],
) -> Result<Vec<TensorField>> {
    if drift.len() != times.len() || omega.len() != times.len() || times.len() < 2 {
        return Err(Error::range("drift must be sampled at every node"));
    }
    let grid = tau0.grid().clone();
    let h = grid.box_size() / grid.points_per_axis() as f64;
    let mut tau = tau0.map(|f| dealias(f)).symmetrize();
    let mut out = Vec::with_capacity(times.len());
    out.push(tau.clone());
    for k in 1..times.len() {
        let dt = times[k] - times[k - 1];
        let max_u = drift[k - 1].max_abs().max(drift[k].max_abs());
        if max_u > 0.0 && dt > 0.5 * h / max_u {
            return Err(Error::StepSize(format!(
                "frozen-drift CFL violated at node {k}: dt = {dt:.3e}"
            )));
        }
        let e = (-a * dt).exp();
        let g1 = transport_rhs(&drift[k - 1], &omega[k - 1], &tau);
        let pred = tau.add(&g1.scale(dt)).scale(e);
        let g2 = transport_rhs(&drift[k], &omega[k], &pred);
        tau = tau
            .add(&g1.scale(0.5 * dt))
            .scale(e)
            .add(&g2.scale(0.5 * dt))
            .map(|f| dealias(f))
            .symmetrize();
        out.push(tau.clone());
    }
    Ok(out)
}

/// `-u.grad tau + w tau - tau w` (the damping is handled by the caller's
/// exponential factor).
fn transport_rhs(u: &VectorField, omega: &TensorField, tau: &TensorField) -> TensorField {
    crate::solver::advect_tensor(u, tau)
        .add(&corotation_term(omega, tau))
        .scale(-1.0)
}

/// One iterate of the scheme: index, final-time fields and the recorded
/// norms (trajectories of every iterate are not retained; the run keeps the
/// last one for cross-validation).
pub struct PicardIterate {
    pub n: usize,
    pub u_bar_final: VectorField,
    pub tau_final: TensorField,
    /// `sup_t ||ubar||_{B^{d/p-1}} + nu ||ubar||_{L^1 B^{d/p+1}}` (tilde norms).
    pub u_bar_norm: f64,
    /// `delta U^{n-1}`: Cauchy increment from the previous iterate.
    pub delta_norm: Option<f64>,
    /// `sup_t ||tau^n(t)||_{B^{d/p}}` for the transport-bound invariant.
    pub tau_sup_norm: f64,
    /// `int_0^T ||u^{n-1}||_{B^1_{inf,1}}` of the frozen drift, the growth
    /// budget in the exponential transport bound.
    pub drift_lip_integral: f64,
}

pub struct PicardRun {
    pub times: Vec<f64>,
    pub iterates: Vec<PicardIterate>,
    /// Trajectories of the final iterate: `u = u_L + u_bar`.
    pub u_l: Vec<VectorField>,
    pub u_bar_last: Vec<VectorField>,
    pub tau_last: Vec<TensorField>,
}

impl PicardRun {
    /// Velocity of the final iterate at the horizon.
    pub fn final_velocity(&self) -> VectorField {
        self.u_l
            .last()
            .unwrap()
            .add(self.u_bar_last.last().unwrap())
    }

    /// Contraction ratios `delta U^n / delta U^{n-1}` for n >= 2. Once the
    /// increments fall to the roundoff floor of the converged fixed point
    /// (ten orders below the first increment) the sequence has converged
    /// and further quotients are noise, so they are excluded.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        let deltas: Vec<f64> = self
            .iterates
            .iter()
            .filter_map(|it| it.delta_norm)
            .collect();
        let floor = deltas.first().copied().unwrap_or(0.0) * 1e-10;
        deltas
            .windows(2)
            .filter(|w| w[0] > floor)
            .map(|w| w[1] / w[0])
            .collect()
    }

    /// Per-iterate CSV: `n, ubar_norm, delta, ratio`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,u_bar_norm,delta,ratio\n");
        let mut prev_delta: Option<f64> = None;
        for it in &self.iterates {
            let delta = it.delta_norm;
            let ratio = match (prev_delta, delta) {
                (Some(p), Some(d)) if p > 0.0 => format!("{}", d / p),
                _ => String::new(),
            };
            out.push_str(&format!(
                "{},{},{},{}\n",
                it.n,
                crate::solver::fmt_f64(it.u_bar_norm),
                delta.map(crate::solver::fmt_f64).unwrap_or_default(),
                ratio
            ));
            prev_delta = delta;
        }
        out
    }
}

/// Run the alternating transport/Stokes iteration to `n_max` at horizon `T`
/// with node spacing `dt`. `p` is the Besov integrability index of the
/// working space (meaningful choices on the truncated grid are `p = d` and
/// `p = d/2`; others are accepted).
#[allow(clippy::too_many_arguments)]
pub fn picard_solve(
    u0: &VectorField,
    tau0: &TensorField,
    params: Params,
    t_end: f64,
    dt: f64,
    n_max: usize,
    p: f64,
    part: &DyadicPartition,
) -> Result<PicardRun> {
    let n_nodes = (t_end / dt).round().max(1.0) as usize;
    let times: Vec<f64> = (0..=n_nodes).map(|k| k as f64 * dt).collect();
    let grid = u0.grid().clone();
    let d = grid.dim() as f64;
    let u0 = leray_project(&u0.map(|f| dealias(f)));
    let u_l = linear_stokes_u_l(&u0, params.nu, &times)?;

    let low = BesovParams::new(d / p - 1.0, p, 1.0);
    let high = BesovParams::new(d / p + 1.0, p, 1.0);
    let dlow = BesovParams::new(d / p - 2.0, p, 1.0);
    let dhigh = BesovParams::new(d / p, p, 1.0);

    let mut u_bar_prev: Vec<VectorField> =
        times.iter().map(|_| VectorField::zeros(grid.clone())).collect();
    let mut tau_prev: Vec<TensorField> = times
        .iter()
        .map(|_| tau0.map(|f| dealias(f)).symmetrize())
        .collect();
    let mut iterates = Vec::with_capacity(n_max);
    let mut growth_streak = 0usize;
    let mut last_delta: Option<f64> = None;

    for n in 1..=n_max {
        // drift u^{n-1} = u_L + ubar^{n-1}
        let drift: Vec<VectorField> = u_l
            .iter()
            .zip(&u_bar_prev)
            .map(|(l, b)| {
                let mut v = l.add(b);
                v.divergence_free = true;
                v
            })
            .collect();
        let omegas: Vec<TensorField> = drift.iter().map(vorticity_tensor).collect();
        let lip = BesovParams::new(1.0, f64::INFINITY, 1.0);
        let lip_norms: Vec<f64> = drift
            .iter()
            .map(|u| crate::lp::besov_norm_vector(u, lip, part))
            .collect();
        let drift_lip_integral = crate::lp::trapezoid(&times, &lip_norms);
        let tau_new = transport_tau(tau0, &drift, &omegas, params.a, &times)?;
        // forcing -u.grad u + div tau^{n+1}
        let forcing: Vec<VectorField> = drift
            .iter()
            .zip(&tau_new)
            .map(|(u, tau)| tau.divergence().sub(&advection_term(u, u)))
            .collect();
        let zero = VectorField::zeros(grid.clone());
        let traj = stokes_mild_solve(&zero, &forcing, params.nu, &times)?;
        let u_bar_new = traj.states;

        // norms of the new iterate
        let tn = TrajectoryNorms::from_vector_trajectory(part, &times, &u_bar_new, p);
        let u_bar_norm = chemin_lerner_norm(&tn, f64::INFINITY, low)?
            + params.nu * chemin_lerner_norm(&tn, 1.0, high)?;
        let delta_traj: Vec<VectorField> = u_bar_new
            .iter()
            .zip(&u_bar_prev)
            .map(|(a, b)| a.sub(b))
            .collect();
        let dn = TrajectoryNorms::from_vector_trajectory(part, &times, &delta_traj, p);
        let delta = chemin_lerner_norm(&dn, f64::INFINITY, dlow)?
            + params.nu * chemin_lerner_norm(&dn, 1.0, dhigh)?;
        let tau_sup = tau_new
            .iter()
            .map(|t| crate::lp::besov_norm_tensor(t, dhigh, part))
            .fold(0.0f64, f64::max);

        if let Some(prev) = last_delta {
            if delta > prev {
                growth_streak += 1;
                if growth_streak >= 3 {
                    return Err(Error::HorizonTooLarge(format!(
                        "Cauchy increments grew {growth_streak} times in a row at T = {t_end}"
                    )));
                }
            } else {
                growth_streak = 0;
            }
        }
        last_delta = Some(delta);

        iterates.push(PicardIterate {
            n,
            u_bar_final: u_bar_new.last().unwrap().clone(),
            tau_final: tau_new.last().unwrap().clone(),
            u_bar_norm,
            delta_norm: Some(delta),
            tau_sup_norm: tau_sup,
            drift_lip_integral,
        });
        u_bar_prev = u_bar_new;
        tau_prev = tau_new;
    }
    Ok(PicardRun {
        times,
        iterates,
        u_l,
        u_bar_last: u_bar_prev,
        tau_last: tau_prev,
    })
}

/// Largest horizon satisfying the smallness condition
/// `C ||u_L||^2_{L^2(0,T;B^{d/p})} + C T ||tau0||_{B^{d/p}} e^{nu/2}
///  <= nu eps / (100 C)`,
/// found by bisection and floored to the node grid.
#[allow(clippy::too_many_arguments)]
pub fn smallness_horizon(
    u0: &VectorField,
    tau0: &TensorField,
    params: Params,
    epsilon: f64,
    c: f64,
    dt: f64,
    t_cap: f64,
    p: f64,
    part: &DyadicPartition,
) -> Result<f64> {
    let d = u0.grid().dim() as f64;
    let mid = BesovParams::new(d / p, p, 1.0);
    let tau_norm = crate::lp::besov_norm_tensor(&tau0.map(|f| dealias(f)).symmetrize(), mid, part);
    let u0 = leray_project(&u0.map(|f| dealias(f)));
    let n_nodes = (t_cap / dt).round().max(1.0) as usize;
    let budget = params.nu * epsilon / (100.0 * c);
    let tau_rate = c * tau_norm * (params.nu / 2.0).exp();
    // walk the nodes lazily: exact heat propagation per step, cumulative
    // trapezoid of the squared Besov norm, stop once the budget is spent
    let mut state = u0.clone();
    let mut besov_sq_prev = crate::lp::besov_norm_vector(&state, mid, part).powi(2);
    let mut acc = 0.0;
    let mut best: Option<f64> = None;
    for k in 1..=n_nodes {
        state = heat_propagate_vector(&state, dt, params.nu)?;
        let besov_sq = crate::lp::besov_norm_vector(&state, mid, part).powi(2);
        acc += 0.5 * dt * (besov_sq_prev + besov_sq);
        besov_sq_prev = besov_sq;
        let t = k as f64 * dt;
        let lhs = c * acc + tau_rate * t;
        if lhs <= budget {
            best = Some(t);
        } else {
            break;
        }
    }
    best.ok_or_else(|| {
        Error::HorizonTooLarge(format!(
            "no admissible horizon above dt = {dt} (budget {budget:.3e})"
        ))
    })
}
