//! Time integration of the (generalised) Oldroyd-B system with parameters
//! `(nu, a, mu, b)` and optional Friedrichs truncation. One step is a Heun
//! (RK2) update with exact exponential factors for the viscous and damping
//! parts, so pure-decay regimes are integrated exactly.

use crate::error::{Error, Result};
use crate::field::{
    dealias, deformation_tensor, leray_project, vorticity_tensor, Field, TensorField, VectorField,
};
use crate::grid::Grid;
use crate::lorentz::{weak_lp_norm_tensor, weak_lp_norm_vector};
use crate::lp::{besov_norm_tensor, besov_norm_vector, BesovParams, DyadicPartition};
use num_complex::Complex64;
use std::sync::Arc;

/// Model parameters. `b` only acts when nonzero (the non-corotational
/// stretching `b (D tau + tau D)`); `friedrichs_n` switches on the sharp
/// annulus projector `J_n` in the approximate system.
#[derive(Clone, Copy, Debug)]
pub struct Params {
    pub nu: f64,
    pub a: f64,
    pub mu: f64,
    pub b: f64,
    pub friedrichs_n: Option<u32>,
}

impl Params {
    pub fn new(nu: f64, a: f64, mu: f64, b: f64) -> Result<Params> {
        if !(nu > 0.0) {
            return Err(Error::config("viscosity nu must be positive"));
        }
        if a < 0.0 || mu < 0.0 {
            return Err(Error::config("damping a and coupling mu must be >= 0"));
        }
        if !(-1.0..=1.0).contains(&b) {
            return Err(Error::config("slip parameter b must lie in [-1, 1]"));
        }
        Ok(Params {
            nu,
            a,
            mu,
            b,
            friedrichs_n: None,
        })
    }

    pub fn with_friedrichs(mut self, n: u32) -> Self {
        self.friedrichs_n = Some(n);
        self
    }
}

/// The solver's single evolving object: `(u, tau, t)` plus parameters.
#[derive(Clone)]
pub struct SimState {
    pub t: f64,
    pub u: VectorField,
    pub tau: TensorField,
    pub params: Params,
}

impl std::fmt::Debug for SimState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "SimState(t = {:.6}, max|u| = {:.3e}, max|tau| = {:.3e})",
            self.t,
            self.u.max_abs(),
            self.tau.max_abs()
        )
    }
}

impl SimState {
    /// Assemble an initial state: dealias, project and symmetrise the data,
    /// applying `J_n` when the Friedrichs option is on.
    pub fn new(u0: &VectorField, tau0: &TensorField, params: Params) -> Result<SimState> {
        let mut u = leray_project(&u0.map(|f| dealias(f)));
        let mut tau = tau0.map(|f| dealias(f)).symmetrize();
        if let Some(n) = params.friedrichs_n {
            u = u.map(|f| crate::field::friedrichs_project(f, n).unwrap());
            u.divergence_free = true;
            tau = tau.map(|f| crate::field::friedrichs_project(f, n).unwrap());
        }
        // hold the Galilean frame: zero mean velocity
        u = zero_mean(&u);
        u.divergence_free = true;
        Ok(SimState {
            t: 0.0,
            u,
            tau,
            params,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }
}

fn zero_mean(u: &VectorField) -> VectorField {
    let mut out = u.map(|f| {
        let mut spec = f.spectral().to_vec();
        spec[0] = Complex64::default();
        Field::from_spectral(f.grid().clone(), spec)
    });
    out.divergence_free = u.divergence_free;
    out
}

/// Advection term `(u . grad) v` assembled pointwise from dealiased factors.
pub fn advection_term(u: &VectorField, v: &VectorField) -> VectorField {
    let d = u.dim();
    let grid = u.grid().clone();
    let u_vals: Vec<&[f64]> = (0..d).map(|k| u.component(k).values()).collect();
    let mut comps = Vec::with_capacity(d);
    for i in 0..d {
        let derivs: Vec<Field> = (0..d).map(|k| v.component(i).derivative(k)).collect();
        let deriv_vals: Vec<&[f64]> = derivs.iter().map(|f| f.values()).collect();
        let vals: Vec<f64> = (0..grid.modes())
            .map(|j| (0..d).map(|k| u_vals[k][j] * deriv_vals[k][j]).sum())
            .collect();
        comps.push(dealias(&Field::from_values(grid.clone(), vals)));
    }
    VectorField::new(comps)
}

/// Advection of a tensor: `(u . grad) tau`, entrywise.
pub(crate) fn advect_tensor(u: &VectorField, tau: &TensorField) -> TensorField {
    let d = u.dim();
    let grid = u.grid().clone();
    let u_vals: Vec<&[f64]> = (0..d).map(|k| u.component(k).values()).collect();
    let mut entries = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let derivs: Vec<Field> = (0..d).map(|k| tau.entry(i, j).derivative(k)).collect();
            let deriv_vals: Vec<&[f64]> = derivs.iter().map(|f| f.values()).collect();
            let vals: Vec<f64> = (0..grid.modes())
                .map(|m| (0..d).map(|k| u_vals[k][m] * deriv_vals[k][m]).sum())
                .collect();
            entries.push(dealias(&Field::from_values(grid.clone(), vals)));
        }
    }
    TensorField::new(entries, tau.symmetric)
}

/// Matrix product of two tensor fields, pointwise.
fn tensor_mul(a: &TensorField, b: &TensorField) -> TensorField {
    let d = a.dim();
    let grid = a.grid().clone();
    let av: Vec<&[f64]> = a.entries().iter().map(|f| f.values()).collect();
    let bv: Vec<&[f64]> = b.entries().iter().map(|f| f.values()).collect();
    let mut entries = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let vals: Vec<f64> = (0..grid.modes())
                .map(|m| (0..d).map(|k| av[i * d + k][m] * bv[k * d + j][m]).sum())
                .collect();
            entries.push(Field::from_values(grid.clone(), vals));
        }
    }
    TensorField::new(entries, false)
}

/// Corotational commutator `tau w - w tau` (symmetric for symmetric tau).
pub fn corotation_term(omega: &TensorField, tau: &TensorField) -> TensorField {
    let mut t = tensor_mul(tau, omega).sub(&tensor_mul(omega, tau));
    t.symmetric = tau.symmetric;
    t.map(|f| dealias(f))
}

/// Stretching term `D tau + tau D`.
pub fn stretching_term(dd: &TensorField, tau: &TensorField) -> TensorField {
    let mut t = tensor_mul(dd, tau).add(&tensor_mul(tau, dd));
    t.symmetric = tau.symmetric;
    t.map(|f| dealias(f))
}

/// Right-hand side of the conformation equation:
/// `-u.grad tau - a tau - (tau w - w tau) - b (D tau + tau D) + mu D`,
/// with `J_n w` in place of `w` under the Friedrichs option.
pub fn rhs_tau(state: &SimState) -> TensorField {
    rhs_tau_inner(state, true)
}

fn rhs_tau_inner(state: &SimState, include_damping: bool) -> TensorField {
    let p = &state.params;
    let mut omega = vorticity_tensor(&state.u);
    if let Some(n) = p.friedrichs_n {
        omega = omega.map(|f| crate::field::friedrichs_project(f, n).unwrap());
    }
    let mut rhs = advect_tensor(&state.u, &state.tau)
        .add(&corotation_term(&omega, &state.tau))
        .scale(-1.0);
    if p.b != 0.0 || p.mu != 0.0 {
        let dd = deformation_tensor(&state.u);
        if p.b != 0.0 {
            rhs = rhs.sub(&stretching_term(&dd, &state.tau).scale(p.b));
        }
        if p.mu != 0.0 {
            rhs = rhs.add(&dd.scale(p.mu));
        }
    }
    if include_damping && p.a != 0.0 {
        rhs = rhs.sub(&state.tau.scale(p.a));
    }
    rhs.symmetric = state.tau.symmetric;
    rhs
}

/// Right-hand side of the velocity equation with the viscous part left to
/// the integrator: `P(-u.grad u + div tau)`, with `J_n` applied to both
/// nonlinear contributions under the Friedrichs option.
pub fn rhs_u(state: &SimState) -> VectorField {
    let p = &state.params;
    let mut advec = advection_term(&state.u, &state.u);
    let mut tau = state.tau.clone();
    if let Some(n) = p.friedrichs_n {
        advec = advec.map(|f| crate::field::friedrichs_project(f, n).unwrap());
        tau = tau.map(|f| crate::field::friedrichs_project(f, n).unwrap());
    }
    let force = tau.divergence().sub(&advec);
    let mut out = zero_mean(&leray_project(&force.map(|f| dealias(f))));
    out.divergence_free = true;
    out
}

/// Normalised discrete skew-cancellation residual
/// `|<tau w - w tau, tau>| / (||grad u|| ||tau||^2)`.
pub fn skew_cancellation_residual(state: &SimState) -> f64 {
    let omega = vorticity_tensor(&state.u);
    let commutator = corotation_term(&omega, &state.tau);
    let d = state.grid().dim();
    let cv: Vec<&[f64]> = commutator.entries().iter().map(|f| f.values()).collect();
    let tv: Vec<&[f64]> = state.tau.entries().iter().map(|f| f.values()).collect();
    let mut inner = 0.0;
    for m in 0..state.grid().modes() {
        for e in 0..d * d {
            inner += cv[e][m] * tv[e][m];
        }
    }
    inner *= state.grid().cell_volume();
    let scale = state.u.grad_l2_norm_sq().sqrt() * state.tau.l2_norm().powi(2);
    if scale == 0.0 {
        inner.abs()
    } else {
        inner.abs() / scale
    }
}

/// One Heun step with exact integrating factors `exp(-nu dt |xi|^2)` on the
/// velocity and `exp(-a dt)` on the tensor. The result is re-projected,
/// re-symmetrised and dealiased.
pub fn step(state: &SimState, dt: f64) -> Result<SimState> {
    if !(dt > 0.0) {
        return Err(Error::StepSize("dt must be positive".into()));
    }
    let grid = state.grid().clone();
    let max_u = state.u.max_abs();
    let h = grid.box_size() / grid.points_per_axis() as f64;
    if max_u > 0.0 && dt > 0.5 * h / max_u {
        return Err(Error::StepSize(format!(
            "advective CFL violated: dt = {dt:.3e} > {:.3e}",
            0.5 * h / max_u
        )));
    }
    let p = state.params;

    let f1 = rhs_u(state);
    let g1 = rhs_tau_inner(state, false);

    // predictor
    let u_pred = propagate_add(&state.u, &f1, dt, dt, p.nu, &grid);
    let tau_pred = lawson_tau(&state.tau, &g1, None, dt, dt, p.a);
    let pred = SimState {
        t: state.t + dt,
        u: u_pred,
        tau: tau_pred,
        params: p,
    };

    let f2 = rhs_u(&pred);
    let g2 = rhs_tau_inner(&pred, false);

    // corrector: E(u + dt/2 f1) + dt/2 f2, likewise for tau
    let u_new = {
        let half = propagate_add(&state.u, &f1, 0.5 * dt, dt, p.nu, &grid);
        add_scaled_vec(&half, &f2, 0.5 * dt)
    };
    let tau_new = lawson_tau(&state.tau, &g1, Some(&g2), 0.5 * dt, dt, p.a);

    let mut u_new = zero_mean(&leray_project(&u_new.map(|f| dealias(f))));
    u_new.divergence_free = true;
    let tau_new = tau_new.map(|f| dealias(f)).symmetrize();

    if !u_new.is_finite() || !tau_new.is_finite() {
        return Err(Error::BlowUp {
            t: state.t,
            state: Box::new(state.clone()),
        });
    }
    Ok(SimState {
        t: state.t + dt,
        u: u_new,
        tau: tau_new,
        params: p,
    })
}

/// `E_dt (u + w f)` with `E_dt = exp(-nu dt |xi|^2)`, spectrally.
fn propagate_add(u: &VectorField, f: &VectorField, w: f64, dt: f64, nu: f64, grid: &Arc<Grid>) -> VectorField {
    let comps = (0..u.dim())
        .map(|i| {
            let us = u.component(i).spectral();
            let fs = f.component(i).spectral();
            let out: Vec<Complex64> = (0..us.len())
                .map(|m| {
                    let e = (-nu * dt * grid.wavenumber_norm_sq(m)).exp();
                    (us[m] + fs[m] * w) * e
                })
                .collect();
            Field::from_spectral(grid.clone(), out)
        })
        .collect();
    VectorField::new(comps)
}

fn add_scaled_vec(u: &VectorField, f: &VectorField, w: f64) -> VectorField {
    let grid = u.grid().clone();
    let comps = (0..u.dim())
        .map(|i| {
            let us = u.component(i).spectral();
            let fs = f.component(i).spectral();
            let out: Vec<Complex64> = (0..us.len()).map(|m| us[m] + fs[m] * w).collect();
            Field::from_spectral(grid.clone(), out)
        })
        .collect();
    VectorField::new(comps)
}

/// `exp(-a dt) (tau + w g1) [+ w g2]`: the Lawson update for the tensor.
fn lawson_tau(
    tau: &TensorField,
    g1: &TensorField,
    g2: Option<&TensorField>,
    w: f64,
    dt: f64,
    a: f64,
) -> TensorField {
    let grid = tau.grid().clone();
    let e = (-a * dt).exp();
    let d2 = tau.dim() * tau.dim();
    let mut entries = Vec::with_capacity(d2);
    for idx in 0..d2 {
        let ts = tau.entries()[idx].spectral();
        let g1s = g1.entries()[idx].spectral();
        let out: Vec<Complex64> = match g2 {
            None => (0..ts.len()).map(|m| (ts[m] + g1s[m] * w) * e).collect(),
            Some(g2) => {
                let g2s = g2.entries()[idx].spectral();
                (0..ts.len())
                    .map(|m| (ts[m] + g1s[m] * w) * e + g2s[m] * w)
                    .collect()
            }
        };
        entries.push(Field::from_spectral(grid.clone(), out));
    }
    TensorField::new(entries, tau.symmetric && g1.symmetric)
}

// ---------------------------------------------------------------------------
// Diagnostics and the integration driver
// ---------------------------------------------------------------------------

/// One sampled diagnostics row; `time` plus the tracked norms in the order
/// they are serialised to CSV.
#[derive(Clone, Copy, Debug)]
pub struct DiagnosticsRow {
    pub time: f64,
    pub u_l2_sq: f64,
    pub nu_int_grad_u_sq: f64,
    pub tau_l2: f64,
    pub tau_lp: f64,
    pub u_b_neg1_inf1: f64,
    pub int_u_b1_inf1: f64,
    pub tau_b0_inf1: f64,
    pub tau_b_dp_p1: f64,
    pub u_weak_d: f64,
    pub tau_weak_d2: f64,
}

pub const DIAGNOSTICS_HEADER: &str = "time,u_l2_sq,nu_int_grad_u_sq,tau_l2,tau_lp,u_b_neg1_inf1,int_u_b1_inf1,tau_b0_inf1,tau_b_dp_p1,u_weak_d,tau_weak_d2";

#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    pub rows: Vec<DiagnosticsRow>,
    /// The L^p exponent used for the `tau_lp` and `tau_b_dp_p1` columns.
    pub lp_exponent: f64,
}

impl Diagnostics {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(DIAGNOSTICS_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                fmt_f64(r.time),
                fmt_f64(r.u_l2_sq),
                fmt_f64(r.nu_int_grad_u_sq),
                fmt_f64(r.tau_l2),
                fmt_f64(r.tau_lp),
                fmt_f64(r.u_b_neg1_inf1),
                fmt_f64(r.int_u_b1_inf1),
                fmt_f64(r.tau_b0_inf1),
                fmt_f64(r.tau_b_dp_p1),
                fmt_f64(r.u_weak_d),
                fmt_f64(r.tau_weak_d2)
            ));
        }
        out
    }
}

/// Shortest-roundtrip float formatting: deterministic for identical bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Integration settings for [`run`].
#[derive(Clone, Copy, Debug)]
pub struct RunSettings {
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: usize,
    pub lp_exponent: f64,
}

pub struct RunOutput {
    pub diagnostics: Diagnostics,
    pub final_state: SimState,
}

/// Integrate to the horizon, sampling diagnostics every `sample_every`
/// steps. Cumulative integrals use per-step trapezoid sums for the
/// dissipation and per-sample sums for the block norms. A runaway
/// amplitude (1e6 x initial) or NaN raises the blow-up signal.
pub fn run(initial: SimState, settings: RunSettings) -> Result<RunOutput> {
    if !(settings.t_end >= 0.0) || !(settings.dt > 0.0) {
        return Err(Error::config("horizon and dt must be positive"));
    }
    let part = DyadicPartition::new(initial.grid().clone())?;
    let n_steps = (settings.t_end / settings.dt).round() as usize;
    let blowup_scale = 1e6 * initial.u.max_abs().max(initial.tau.max_abs()).max(1e-6);

    let mut diag = Diagnostics {
        rows: Vec::new(),
        lp_exponent: settings.lp_exponent,
    };
    let mut state = initial;
    let mut grad_sq_prev = state.u.grad_l2_norm_sq();
    let mut diss_acc = 0.0f64;
    let mut lip_prev = besov_norm_vector(&state.u, BesovParams::new(1.0, f64::INFINITY, 1.0), &part);
    let mut lip_acc = 0.0f64;
    let mut last_sample_t = state.t;
    diag.rows
        .push(sample_row(&state, &part, settings.lp_exponent, diss_acc, lip_acc));

    for k in 1..=n_steps {
        state = step(&state, settings.dt)?;
        let grad_sq = state.u.grad_l2_norm_sq();
        diss_acc += 0.5 * settings.dt * (grad_sq_prev + grad_sq) * state.params.nu;
        grad_sq_prev = grad_sq;
        if state.u.max_abs() > blowup_scale || state.tau.max_abs() > blowup_scale {
            return Err(Error::BlowUp {
                t: state.t,
                state: Box::new(state),
            });
        }
        if k % settings.sample_every == 0 || k == n_steps {
            let lip_now = besov_norm_vector(&state.u, BesovParams::new(1.0, f64::INFINITY, 1.0), &part);
            lip_acc += 0.5 * (state.t - last_sample_t) * (lip_prev + lip_now);
            lip_prev = lip_now;
            last_sample_t = state.t;
            diag.rows
                .push(sample_row(&state, &part, settings.lp_exponent, diss_acc, lip_acc));
        }
    }
    Ok(RunOutput {
        diagnostics: diag,
        final_state: state,
    })
}

fn sample_row(
    state: &SimState,
    part: &DyadicPartition,
    p: f64,
    diss_acc: f64,
    lip_acc: f64,
) -> DiagnosticsRow {
    let d = state.grid().dim() as f64;
    DiagnosticsRow {
        time: state.t,
        u_l2_sq: state.u.l2_norm().powi(2),
        nu_int_grad_u_sq: diss_acc,
        tau_l2: state.tau.l2_norm(),
        tau_lp: state.tau.lp_norm(p),
        u_b_neg1_inf1: besov_norm_vector(&state.u, BesovParams::new(-1.0, f64::INFINITY, 1.0), part),
        int_u_b1_inf1: lip_acc,
        tau_b0_inf1: besov_norm_tensor(&state.tau, BesovParams::new(0.0, f64::INFINITY, 1.0), part),
        tau_b_dp_p1: besov_norm_tensor(&state.tau, BesovParams::new(d / p, p, 1.0), part),
        u_weak_d: weak_lp_norm_vector(&state.u, d).value,
        tau_weak_d2: weak_lp_norm_tensor(&state.tau, d / 2.0).value,
    }
}
