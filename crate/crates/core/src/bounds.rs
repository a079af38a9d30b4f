//! Closed-form evaluation of the a-priori bound functionals: the energy
//! weight `Gamma`, the damping weight `Theta_a`, the nested functionals
//! `Phi`, `Psi_1`, `Psi_2`, the Lipschitz budgets `Upsilon^1` / `Upsilon^2`,
//! the small-data weight `Theta_nu`, the lifespan lower bound and the
//! quadratic Gronwall lifespan lemma. Every formula is a literal
//! transcription; the constant `C` is the caller's calibration knob.

use crate::error::{Error, Result};
use crate::field::{TensorField, VectorField};
use crate::lorentz::{weak_lp_norm_tensor, weak_lp_norm_vector};
use crate::lp::{besov_norm_tensor, besov_norm_vector, BesovParams, DyadicPartition};
use crate::quad::integrate;
use crate::solver::Params;

/// Default calibration constant before an experiment fits its own.
pub const DEFAULT_C: f64 = 8.0;

/// Initial-data norms feeding the bound functionals.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct InitialNorms {
    pub u0_l2: f64,
    pub tau0_l2: f64,
    /// `||u0||` in the -1-index sup-block space.
    pub u0_binf_m1: f64,
    /// `||tau0||` in the 0-index sup-block space.
    pub tau0_binf_0: f64,
    /// `||u0||` at regularity d/p - 1, integrability p.
    pub u0_bp: f64,
    /// `||tau0||` at regularity d/p, integrability p.
    pub tau0_bp: f64,
    pub u0_weak_d: f64,
    pub tau0_weak_d2: f64,
}

impl InitialNorms {
    /// Measure every tracked norm of a data pair on the given partition.
    pub fn measure(
        u0: &VectorField,
        tau0: &TensorField,
        p: f64,
        part: &DyadicPartition,
    ) -> InitialNorms {
        let d = u0.grid().dim() as f64;
        InitialNorms {
            u0_l2: u0.l2_norm(),
            tau0_l2: tau0.l2_norm(),
            u0_binf_m1: besov_norm_vector(u0, BesovParams::new(-1.0, f64::INFINITY, 1.0), part),
            tau0_binf_0: besov_norm_tensor(tau0, BesovParams::new(0.0, f64::INFINITY, 1.0), part),
            u0_bp: besov_norm_vector(u0, BesovParams::new(d / p - 1.0, p, 1.0), part),
            tau0_bp: besov_norm_tensor(tau0, BesovParams::new(d / p, p, 1.0), part),
            u0_weak_d: weak_lp_norm_vector(u0, d).value,
            tau0_weak_d2: weak_lp_norm_tensor(tau0, d / 2.0).value,
        }
    }
}

/// `Gamma_{a,nu}(T)`: `sqrt((1 - e^{-2aT})/(2 a nu))` for `a > 0`,
/// `sqrt(T/nu)` for `a = 0`.
pub fn gamma(a: f64, nu: f64, t: f64) -> f64 {
    debug_assert!(nu > 0.0 && a >= 0.0 && t >= 0.0);
    if a == 0.0 {
        (t / nu).sqrt()
    } else {
        ((1.0 - (-2.0 * a * t).exp()) / (2.0 * a * nu)).sqrt()
    }
}

/// `Theta_a(t)`: `t` for `a = 0`, `(1 - e^{-at})/a` otherwise.
pub fn theta_a(a: f64, t: f64) -> f64 {
    if a == 0.0 {
        t
    } else {
        (1.0 - (-a * t).exp()) / a
    }
}

/// `Phi_{nu,mu,a}(T)`: the squared energy envelope, with separate branches
/// for `mu = 0` and `mu > 0`.
pub fn phi(t: f64, params: &Params, norms: &InitialNorms) -> f64 {
    let g = gamma(params.a, params.nu, t);
    let a_n = norms.u0_l2;
    let b_n = norms.tau0_l2;
    let nu = params.nu;
    if params.mu == 0.0 {
        let base = a_n + a_n * a_n / nu + b_n * g + b_n * b_n * g * g / nu;
        base * base
    } else {
        let mu = params.mu;
        let base = (1.0 + g * mu.sqrt()) * a_n
            + a_n * a_n / nu
            + (1.0 / mu.sqrt() + g) * b_n
            + b_n * b_n * g * g / nu;
        base * base
    }
}

/// `Psi_1 = C (nu^{-3/2} Phi^2 + nu^{-5/4} Phi ||u0||_{L^2})`.
pub fn psi1(t: f64, params: &Params, norms: &InitialNorms, c: f64) -> f64 {
    let p = phi(t, params, norms);
    c * (params.nu.powf(-1.5) * p * p + params.nu.powf(-1.25) * p * norms.u0_l2)
}

/// `Psi_2 = C (Gamma (mu ||u0||^2 + ||tau0||^2)^{1/2} + nu^{-5/4} Phi +
/// nu^{-1} ||u0||)`.
pub fn psi2(t: f64, params: &Params, norms: &InitialNorms, c: f64) -> f64 {
    let g = gamma(params.a, params.nu, t);
    let p = phi(t, params, norms);
    c * (g * (params.mu * norms.u0_l2.powi(2) + norms.tau0_l2.powi(2)).sqrt()
        + params.nu.powf(-1.25) * p
        + norms.u0_l2 / params.nu)
}

/// Lifespan denominator for `mu > 0`:
/// `1 - C (mu/nu^2) T^2 Psi_2 exp(2 (C/nu) Psi_2 Theta_a ||tau0||_B +
/// 2 C (mu/nu) Psi_2 T)`.
fn lifespan_denominator(t: f64, params: &Params, norms: &InitialNorms, c: f64) -> f64 {
    let p2 = psi2(t, params, norms, c);
    let th = theta_a(params.a, t);
    let nu = params.nu;
    let expo = 2.0 * c / nu * p2 * th * norms.tau0_binf_0 + 2.0 * c * params.mu / nu * p2 * t;
    1.0 - c * params.mu / (nu * nu) * t * t * p2 * expo.exp()
}

/// `Upsilon^1_{nu,mu,a}(T)`: the Lipschitz budget
/// `nu ||u||_{L^1_T B^1}`-side bound. For `mu > 0` it carries the lifespan
/// denominator and errors once `T` passes its root.
pub fn upsilon1(t: f64, params: &Params, norms: &InitialNorms, c: f64) -> Result<f64> {
    let nu = params.nu;
    let th = theta_a(params.a, t);
    let p1 = psi1(t, params, norms, c);
    let p2 = psi2(t, params, norms, c);
    let numerator =
        (norms.u0_binf_m1 + p1 + c * (p2 + c) * norms.tau0_binf_0 * th) / nu;
    if params.mu == 0.0 {
        Ok(numerator * (c / nu * th * p2).exp())
    } else {
        let denom = lifespan_denominator(t, params, norms, c);
        if denom <= 0.0 {
            return Err(Error::range(format!(
                "T = {t} is beyond the lifespan denominator root"
            )));
        }
        let expo = c / nu * p2 * th * norms.tau0_binf_0 + 2.0 * c * params.mu / nu * p2 * t;
        Ok(numerator / denom * expo.exp())
    }
}

/// `Upsilon^2_{nu,mu}(T)`, with `int_0^T Upsilon^1` evaluated by 128-node
/// Gauss-Legendre quadrature.
pub fn upsilon2(t: f64, params: &Params, norms: &InitialNorms, c: f64) -> Result<f64> {
    let p1 = psi1(t, params, norms, c);
    let p2 = psi2(t, params, norms, c);
    // fail early if the quadrature would cross the lifespan root
    if params.mu > 0.0 {
        upsilon1(t, params, norms, c)?;
    }
    let int_u1 = integrate(
        |s| upsilon1(s, params, norms, c).unwrap_or(f64::INFINITY),
        0.0,
        t,
        128,
    );
    Ok(norms.u0_binf_m1
        + p1
        + c * (p2 + 1.0) * norms.tau0_binf_0 * t
        + c * params.nu * norms.tau0_binf_0 * (p2 + 1.0) * int_u1
        + c * params.mu * params.nu * p2 * int_u1)
}

/// Lifespan lower bound for `mu > 0`: the supremum of `T` with
/// `C (mu/nu^2) T^2 Psi_2(T) e^{...} < 1`; `+inf` for `mu = 0`.
pub fn lifespan_lower_bound(params: &Params, norms: &InitialNorms, c: f64) -> f64 {
    if params.mu == 0.0 {
        return f64::INFINITY;
    }
    // bracket the root of the denominator
    let mut hi = 1e-6;
    while lifespan_denominator(hi, params, norms, c) > 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    while (hi - lo) > 1e-8 * hi.max(1e-12) {
        let mid = 0.5 * (lo + hi);
        if lifespan_denominator(mid, params, norms, c) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `Theta_nu(u0, tau0, T) = C U e^{C T nu^{-1} Tb} + nu (e^{C T nu^{-1} Tb}
/// - 1)` with `U`, `Tb` the sup-block norms of the data.
pub fn theta_nu(u0_binf_m1: f64, tau0_binf_0: f64, nu: f64, t: f64, c: f64) -> f64 {
    let e = (c * t / nu * tau0_binf_0).exp();
    c * u0_binf_m1 * e + nu * (e - 1.0)
}

/// Every analytic functional evaluated at one configuration: the horizon
/// `t`, the data norms and the calibration constant `c` fix them all.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct BoundEvaluation {
    pub gamma: f64,
    pub theta_a: f64,
    pub phi: f64,
    pub psi1: f64,
    pub psi2: f64,
    pub upsilon1: f64,
    pub upsilon2: f64,
    pub theta_nu: f64,
    pub t_max_lower: f64,
    pub c: f64,
}

impl BoundEvaluation {
    /// Evaluate the whole family. For `mu > 0` the horizon must sit below
    /// the lifespan lower bound or the Upsilon evaluations error out.
    pub fn evaluate(t: f64, params: &Params, norms: &InitialNorms, c: f64) -> Result<Self> {
        Ok(BoundEvaluation {
            gamma: gamma(params.a, params.nu, t),
            theta_a: theta_a(params.a, t),
            phi: phi(t, params, norms),
            psi1: psi1(t, params, norms, c),
            psi2: psi2(t, params, norms, c),
            upsilon1: upsilon1(t, params, norms, c)?,
            upsilon2: upsilon2(t, params, norms, c)?,
            theta_nu: theta_nu(norms.u0_binf_m1, norms.tau0_binf_0, params.nu, t, c),
            t_max_lower: lifespan_lower_bound(params, norms, c),
            c,
        })
    }
}

// ---------------------------------------------------------------------------
// Quadratic Gronwall lifespan lemma
// ---------------------------------------------------------------------------

/// Polynomial with non-negative coefficients, ascending order.
#[derive(Clone, Debug)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }
    /// Antiderivative vanishing at 0.
    pub fn integral_at(&self, t: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &c)| c * t.powi(i as i32 + 1) / (i as f64 + 1.0))
            .sum()
    }
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }
}

/// Solution of the lifespan lemma for
/// `f(t) <= g1(t) + int_0^t g2 f + g3(t) int_0^t f^2`:
/// `T_max` is where `int_0^T s g3(s) exp(2 int_0^s g2) ds` reaches 1, and
/// `bound(t) = g1(t) exp(int_0^t g2) / (1 - int_0^t s g3(s) e^{2 int g2} ds)`.
pub struct GronwallBound {
    pub t_max: f64,
    g1: Poly,
    g2: Poly,
    g3: Poly,
}

impl GronwallBound {
    fn kernel_integral(&self, t: f64) -> f64 {
        integrate(
            |s| s * self.g3.eval(s) * (2.0 * self.g2.integral_at(s)).exp(),
            0.0,
            t,
            128,
        )
    }

    /// The lemma's envelope at time `t < t_max`.
    pub fn bound_at(&self, t: f64) -> f64 {
        let denom = 1.0 - self.kernel_integral(t);
        if denom <= 0.0 {
            return f64::INFINITY;
        }
        self.g1.eval(t) * self.g2.integral_at(t).exp() / denom
    }
}

pub fn gronwall_lifespan(g1: Poly, g2: Poly, g3: Poly) -> Result<GronwallBound> {
    for (name, p) in [("g1", &g1), ("g2", &g2), ("g3", &g3)] {
        if p.0.iter().any(|&c| c < 0.0) {
            return Err(Error::range(format!("{name} must have non-negative coefficients")));
        }
    }
    let mut result = GronwallBound {
        t_max: f64::INFINITY,
        g1,
        g2,
        g3,
    };
    if result.g3.is_zero() {
        return Ok(result);
    }
    let mut hi = 1e-6;
    while result.kernel_integral(hi) < 1.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Ok(result);
        }
    }
    let mut lo = 0.0;
    while (hi - lo) > 1e-9 * hi.max(1e-12) {
        let mid = 0.5 * (lo + hi);
        if result.kernel_integral(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    result.t_max = 0.5 * (lo + hi);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p0(nu: f64, a: f64, mu: f64) -> Params {
        Params::new(nu, a, mu, 0.0).unwrap()
    }

    fn sample_norms(rng: &mut ChaCha8Rng) -> InitialNorms {
        let mut r = || rng.random::<f64>() * 2.0 + 0.1;
        InitialNorms {
            u0_l2: r(),
            tau0_l2: r(),
            u0_binf_m1: r(),
            tau0_binf_0: r(),
            u0_bp: r(),
            tau0_bp: r(),
            u0_weak_d: r(),
            tau0_weak_d2: r(),
        }
    }

    #[test]
    fn gamma_branches_and_limits() {
        assert!((gamma(0.0, 1.0, 4.0) - 2.0).abs() < 1e-15);
        // a -> 0 continuity
        let eps = gamma(1e-9, 1.0, 3.0);
        assert!((eps - gamma(0.0, 1.0, 3.0)).abs() < 1e-8);
        // a = 1, nu = 1, T -> inf: 1/sqrt(2)
        assert!((gamma(1.0, 1.0, 100.0) - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn theta_a_values() {
        assert_eq!(theta_a(0.0, 7.0), 7.0);
        assert!((theta_a(1.0, std::f64::consts::LN_2) - 0.5).abs() < 1e-15);
        assert_eq!(theta_a(2.0, 0.0), 0.0);
        assert!((theta_a(1e-9, 5.0) - 5.0).abs() < 1e-7);
    }

    #[test]
    fn phi_spot_value() {
        // mu = 0, A = B = nu = 1, a = 0, T = 1: (1 + 1 + 1 + 1)^2 = 16
        let mut norms = sample_norms(&mut ChaCha8Rng::seed_from_u64(0));
        norms.u0_l2 = 1.0;
        norms.tau0_l2 = 1.0;
        let v = phi(1.0, &p0(1.0, 0.0, 0.0), &norms);
        assert!((v - 16.0).abs() < 1e-12);
    }

    #[test]
    fn zero_data_kills_everything() {
        let norms = InitialNorms {
            u0_l2: 0.0,
            tau0_l2: 0.0,
            u0_binf_m1: 0.0,
            tau0_binf_0: 0.0,
            u0_bp: 0.0,
            tau0_bp: 0.0,
            u0_weak_d: 0.0,
            tau0_weak_d2: 0.0,
        };
        let pr = p0(1.0, 0.0, 0.0);
        assert_eq!(phi(1.0, &pr, &norms), 0.0);
        assert_eq!(psi1(1.0, &pr, &norms, 3.0), 0.0);
        assert_eq!(psi2(1.0, &pr, &norms, 3.0), 0.0);
        assert_eq!(upsilon1(1.0, &pr, &norms, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn psi2_without_tensor_norm() {
        // tau0 = 0, mu = 0: Psi_2 = C (nu^{-5/4} Phi + nu^{-1} ||u0||)
        let mut norms = sample_norms(&mut ChaCha8Rng::seed_from_u64(1));
        norms.tau0_l2 = 0.0;
        let pr = p0(1.3, 0.4, 0.0);
        let c = 2.0;
        let expected = c * (1.3f64.powf(-1.25) * phi(0.7, &pr, &norms) + norms.u0_l2 / 1.3);
        assert!((psi2(0.7, &pr, &norms, c) - expected).abs() < 1e-13 * expected);
    }

    #[test]
    fn upsilon1_at_zero_drops_theta_weighted_parts() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let norms = sample_norms(&mut rng);
        let pr = p0(2.0, 0.5, 0.0);
        let c = 3.0;
        let v = upsilon1(0.0, &pr, &norms, c).unwrap();
        let expected = (norms.u0_binf_m1 + psi1(0.0, &pr, &norms, c)) / 2.0;
        assert!((v - expected).abs() < 1e-13 * expected.max(1.0));
    }

    #[test]
    fn upsilon1_monotone_for_mu_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let norms = sample_norms(&mut rng);
        let pr = p0(1.0, 0.3, 0.0);
        let mut prev = 0.0;
        for i in 0..20 {
            let t = i as f64 * 0.25;
            let v = upsilon1(t, &pr, &norms, 2.0).unwrap();
            assert!(v >= prev - 1e-12, "Upsilon1 must be non-decreasing");
            prev = v;
        }
    }

    #[test]
    fn upsilon1_blows_up_at_denominator_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let norms = sample_norms(&mut rng);
        let pr = p0(1.0, 0.2, 0.6);
        let c = 2.0;
        let t_star = lifespan_lower_bound(&pr, &norms, c);
        assert!(t_star.is_finite());
        // below the root: finite and growing; above: error
        let just_below = upsilon1(0.999 * t_star, &pr, &norms, c).unwrap();
        assert!(just_below.is_finite());
        assert!(upsilon1(1.2 * t_star, &pr, &norms, c).is_err());
        // approaching the root the value explodes
        let nearer = upsilon1(0.999999 * t_star, &pr, &norms, c).unwrap();
        assert!(nearer > just_below);
    }

    #[test]
    fn upsilon2_vanishing_parts_at_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let norms = sample_norms(&mut rng);
        let pr = p0(1.0, 0.0, 0.0);
        let c = 2.0;
        let v = upsilon2(0.0, &pr, &norms, c).unwrap();
        let expected = norms.u0_binf_m1 + psi1(0.0, &pr, &norms, c);
        assert!((v - expected).abs() < 1e-12 * expected.max(1.0));
    }

    #[test]
    fn lifespan_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let norms = sample_norms(&mut rng);
        assert!(lifespan_lower_bound(&p0(1.0, 0.1, 0.0), &norms, 2.0).is_infinite());
        // monotone decreasing in mu for tensor-free data (with tau0 != 0 the
        // mu^{-1/2} term in Phi makes the printed bound non-monotone)
        let mut tensor_free = norms;
        tensor_free.tau0_l2 = 0.0;
        tensor_free.tau0_binf_0 = 0.0;
        let mut prev = f64::INFINITY;
        for mu in [0.25, 0.5, 1.0, 2.0] {
            let t = lifespan_lower_bound(&p0(1.0, 0.1, mu), &tensor_free, 2.0);
            assert!(t < prev, "bound must decrease as mu grows");
            prev = t;
        }
        // data -> 0: bound grows without limit
        let tiny = InitialNorms {
            u0_l2: 1e-9,
            tau0_l2: 1e-9,
            u0_binf_m1: 1e-9,
            tau0_binf_0: 1e-9,
            u0_bp: 1e-9,
            tau0_bp: 1e-9,
            u0_weak_d: 1e-9,
            tau0_weak_d2: 1e-9,
        };
        let t = lifespan_lower_bound(&p0(1.0, 0.1, 0.5), &tiny, 2.0);
        assert!(t > 1e3);
    }

    #[test]
    fn theta_nu_values() {
        assert!((theta_nu(1.0, 0.0, 1.0, 5.0, 2.0) - 2.0).abs() < 1e-15);
        assert!((theta_nu(1.5, 3.0, 1.0, 0.0, 2.0) - 3.0).abs() < 1e-15);
        // C = nu = 1, both norms 1, T = 1: e + (e - 1)
        let v = theta_nu(1.0, 1.0, 1.0, 1.0, 1.0);
        let e = std::f64::consts::E;
        assert!((v - (2.0 * e - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn bound_evaluation_finite_below_the_lifespan() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let norms = sample_norms(&mut rng);
        let pr = p0(1.0, 0.3, 0.4);
        let c = 2.0;
        let t_star = lifespan_lower_bound(&pr, &norms, c);
        let eval = BoundEvaluation::evaluate(0.9 * t_star, &pr, &norms, c).unwrap();
        for v in [
            eval.gamma,
            eval.theta_a,
            eval.phi,
            eval.psi1,
            eval.psi2,
            eval.upsilon1,
            eval.upsilon2,
            eval.theta_nu,
            eval.t_max_lower,
        ] {
            assert!(v.is_finite() && v >= 0.0);
        }
        assert!(BoundEvaluation::evaluate(1.1 * t_star, &pr, &norms, c).is_err());
    }

    #[test]
    fn gronwall_closed_form_and_classical_limit() {
        // g2 = 0, g3 = c: T_max = sqrt(2/c)
        let c = 0.37;
        let g = gronwall_lifespan(Poly(vec![0.0, 1.0]), Poly(vec![]), Poly(vec![c])).unwrap();
        let expected = (2.0 / c).sqrt();
        assert!(
            (g.t_max - expected).abs() <= 1e-8 * expected,
            "{} vs {expected}",
            g.t_max
        );

        // g3 = 0: classical Gronwall, infinite lifespan, bound g1 e^{int g2}
        let g = gronwall_lifespan(
            Poly(vec![0.0, 0.5]),
            Poly(vec![1.0, 2.0]),
            Poly(vec![]),
        )
        .unwrap();
        assert!(g.t_max.is_infinite());
        let t: f64 = 1.3;
        let expected = 0.5 * t * ((t + t * t) as f64).exp();
        assert!((g.bound_at(t) - expected).abs() < 1e-12 * expected);

        // negative coefficients rejected
        assert!(gronwall_lifespan(Poly(vec![-1.0]), Poly(vec![]), Poly(vec![])).is_err());
    }

    /// Second, independently arranged transcription of the functionals used
    /// to guard against transcription slips (two-path rule).
    mod second_path {
        use super::super::*;
        pub fn gamma2(a: f64, nu: f64, t: f64) -> f64 {
            let energy = if a == 0.0 {
                t
            } else {
                (1.0 - (-2.0 * a * t).exp()) / (2.0 * a)
            };
            (energy / nu).sqrt()
        }
        pub fn phi2(t: f64, pr: &Params, n: &InitialNorms) -> f64 {
            let g = gamma2(pr.a, pr.nu, t);
            let terms: Vec<f64> = if pr.mu == 0.0 {
                vec![
                    n.u0_l2,
                    n.u0_l2.powi(2) / pr.nu,
                    n.tau0_l2 * g,
                    n.tau0_l2.powi(2) * g.powi(2) / pr.nu,
                ]
            } else {
                vec![
                    n.u0_l2,
                    g * pr.mu.sqrt() * n.u0_l2,
                    n.u0_l2.powi(2) / pr.nu,
                    n.tau0_l2 / pr.mu.sqrt(),
                    g * n.tau0_l2,
                    n.tau0_l2.powi(2) * g.powi(2) / pr.nu,
                ]
            };
            terms.iter().sum::<f64>().powi(2)
        }
        pub fn psi1_2(t: f64, pr: &Params, n: &InitialNorms, c: f64) -> f64 {
            let p = phi2(t, pr, n);
            c * p * (p / pr.nu.powf(1.5) + n.u0_l2 / pr.nu.powf(1.25))
        }
        pub fn psi2_2(t: f64, pr: &Params, n: &InitialNorms, c: f64) -> f64 {
            let g = gamma2(pr.a, pr.nu, t);
            c * ((pr.mu * n.u0_l2 * n.u0_l2 + n.tau0_l2 * n.tau0_l2).sqrt() * g
                + phi2(t, pr, n) / pr.nu.powf(1.25)
                + n.u0_l2 / pr.nu)
        }
        pub fn upsilon1_2(t: f64, pr: &Params, n: &InitialNorms, c: f64) -> f64 {
            let th = theta_a(pr.a, t);
            let p1 = psi1_2(t, pr, n, c);
            let p2 = psi2_2(t, pr, n, c);
            let num = (n.u0_binf_m1 + p1 + c * (p2 + c) * n.tau0_binf_0 * th) / pr.nu;
            if pr.mu == 0.0 {
                num * (c * th * p2 / pr.nu).exp()
            } else {
                let exp2 = (2.0 * c / pr.nu * p2 * th * n.tau0_binf_0
                    + 2.0 * c * pr.mu / pr.nu * p2 * t)
                    .exp();
                let den = 1.0 - c * pr.mu / pr.nu.powi(2) * t * t * p2 * exp2;
                num / den
                    * (c / pr.nu * p2 * th * n.tau0_binf_0 + 2.0 * c * pr.mu / pr.nu * p2 * t)
                        .exp()
            }
        }
    }

    #[test]
    fn two_path_transcription_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..5 {
            let norms = sample_norms(&mut rng);
            let a = if trial % 2 == 0 { 0.0 } else { rng.random::<f64>() };
            let mu = if trial < 2 { 0.0 } else { 0.3 * rng.random::<f64>() };
            let nu = 0.5 + rng.random::<f64>();
            let pr = Params::new(nu, a, mu, 0.0).unwrap();
            let c = 1.0 + rng.random::<f64>();
            let mut t = 0.5 * rng.random::<f64>();
            if mu > 0.0 {
                t = t.min(0.5 * lifespan_lower_bound(&pr, &norms, c));
            }
            let pairs = [
                (gamma(a, nu, t), second_path::gamma2(a, nu, t)),
                (phi(t, &pr, &norms), second_path::phi2(t, &pr, &norms)),
                (psi1(t, &pr, &norms, c), second_path::psi1_2(t, &pr, &norms, c)),
                (psi2(t, &pr, &norms, c), second_path::psi2_2(t, &pr, &norms, c)),
                (
                    upsilon1(t, &pr, &norms, c).unwrap(),
                    second_path::upsilon1_2(t, &pr, &norms, c),
                ),
            ];
            for (i, (x, y)) in pairs.iter().enumerate() {
                assert!(
                    (x - y).abs() <= 1e-12 * x.abs().max(1.0),
                    "trial {trial}, functional {i}: {x} vs {y}"
                );
            }
        }
    }

    #[test]
    fn gronwall_ode_oracle_domination() {
        // The Volterra equality solution y = g1 + int g2 y + g3 int y^2 is
        // the maximal function satisfying the inequality with f(0) = 0; the
        // lemma's envelope must dominate it on the small-coefficient corpus
        // matching how the bound is used (g1 vanishing at 0, modest slopes).
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..10 {
            let coef = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
            let g1 = Poly(vec![0.0, coef(&mut rng, 0.05, 0.5), coef(&mut rng, 0.0, 0.2)]);
            let g2 = Poly(vec![coef(&mut rng, 0.0, 0.5), coef(&mut rng, 0.0, 0.3)]);
            let g3 = Poly(vec![coef(&mut rng, 0.1, 1.0)]);
            let bound = gronwall_lifespan(g1.clone(), g2.clone(), g3.clone()).unwrap();
            let t_end = (0.8 * bound.t_max).min(3.0);
            // implicit-trapezoid Volterra march for the equality solution
            let n = 4000;
            let dt = t_end / n as f64;
            let mut y = vec![0.0f64; n + 1];
            let mut int_g2y = 0.0; // integral up to t_{k-1}
            let mut int_y2 = 0.0;
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
            }
            for k in (0..=n).step_by(200) {
                let t = k as f64 * dt;
                let env = bound.bound_at(t);
                assert!(
                    y[k] <= env * (1.0 + 1e-6) + 1e-12,
                    "trial {trial}: oracle {} exceeds envelope {env} at t = {t}",
                    y[k]
                );
            }
        }
    }
}
