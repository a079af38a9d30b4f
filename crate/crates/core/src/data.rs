//! Seeded initial-data generators: Taylor-Green cells, band-limited random
//! fields (Leray-projected / symmetrised) and single-block probes.

use crate::field::{leray_project, Field, TensorField, VectorField};
use crate::grid::Grid;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Mean-free scalar whose spectrum sits in `2^{q0} <= |xi| <= 1.5 * 2^{q1}`,
/// i.e. entirely inside dyadic blocks `[q0, q1]` (the bump plateau region).
pub fn band_scalar(grid: &Arc<Grid>, seed: u64, q0: i32, q1: i32) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = (2.0f64).powi(q0);
    let hi = 1.5 * (2.0f64).powi(q1);
    let modes = grid.modes();
    let mut spec = vec![Complex64::default(); modes];
    for (i, s) in spec.iter_mut().enumerate() {
        let r = grid.wavenumber_norm_sq(i).sqrt();
        if r >= lo && r <= hi {
            *s = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
    }
    // Taking real samples Hermitian-symmetrises the spectrum; the radial
    // band is mirror-invariant so the support is unchanged.
    let vals = Field::from_spectral(grid.clone(), spec).values().to_vec();
    Field::from_values(grid.clone(), vals)
}

/// Random field living in a single dyadic block `q`.
pub fn single_block_scalar(grid: &Arc<Grid>, seed: u64, q: i32) -> Field {
    band_scalar(grid, seed, q, q)
}

/// Divergence-free, mean-free velocity with band-limited spectrum, scaled
/// so that `max |u| = amplitude`.
pub fn random_band_velocity(
    grid: &Arc<Grid>,
    seed: u64,
    amplitude: f64,
    q0: i32,
    q1: i32,
) -> VectorField {
    let comps: Vec<Field> = (0..grid.dim())
        .map(|c| band_scalar(grid, seed.wrapping_mul(1000).wrapping_add(c as u64), q0, q1))
        .collect();
    let u = leray_project(&VectorField::new(comps));
    let peak = u.max_abs();
    let mut u = u.scale(if peak > 0.0 { amplitude / peak } else { 0.0 });
    u.divergence_free = true;
    u
}

/// Symmetric, band-limited random conformation tensor with `max |tau| =
/// amplitude` (Frobenius pointwise).
pub fn random_band_tensor(
    grid: &Arc<Grid>,
    seed: u64,
    amplitude: f64,
    q0: i32,
    q1: i32,
) -> TensorField {
    let d = grid.dim();
    let entries: Vec<Field> = (0..d * d)
        .map(|e| band_scalar(grid, seed.wrapping_mul(2000).wrapping_add(e as u64), q0, q1))
        .collect();
    let t = TensorField::new(entries, false).symmetrize();
    let peak = t.max_abs();
    t.scale(if peak > 0.0 { amplitude / peak } else { 0.0 })
}

/// Classical Taylor-Green velocity cell (divergence-free in closed form).
pub fn taylor_green(grid: &Arc<Grid>, amplitude: f64) -> VectorField {
    let k = 2.0 * std::f64::consts::PI / grid.box_size();
    let mut u = if grid.dim() == 2 {
        VectorField::new(vec![
            Field::from_fn(grid.clone(), move |x| {
                amplitude * (k * x[0]).sin() * (k * x[1]).cos()
            }),
            Field::from_fn(grid.clone(), move |x| {
                -amplitude * (k * x[0]).cos() * (k * x[1]).sin()
            }),
        ])
    } else {
        VectorField::new(vec![
            Field::from_fn(grid.clone(), move |x| {
                amplitude * (k * x[0]).sin() * (k * x[1]).cos() * (k * x[2]).cos()
            }),
            Field::from_fn(grid.clone(), move |x| {
                -amplitude * (k * x[0]).cos() * (k * x[1]).sin() * (k * x[2]).cos()
            }),
            Field::zeros(grid.clone()),
        ])
    };
    u.divergence_free = true;
    u
}

/// Steady periodic shear `u = (m sin(k x2), 0, ...)`, the drift used by the
/// linear-vs-exponential growth experiments.
pub fn shear_velocity(grid: &Arc<Grid>, magnitude: f64) -> VectorField {
    let k = 2.0 * std::f64::consts::PI / grid.box_size();
    let mut comps = vec![Field::from_fn(grid.clone(), move |x| {
        magnitude * (k * x[1]).sin()
    })];
    for _ in 1..grid.dim() {
        comps.push(Field::zeros(grid.clone()));
    }
    let mut u = VectorField::new(comps);
    u.divergence_free = true;
    u
}

/// Symmetric tensor with pointwise-constant Frobenius magnitude: a fixed
/// diagonal rotated by a smooth angle field. Its L^p norms are insensitive
/// to where the grid samples the profile, which makes it the reference data
/// for decay-equality checks at p > 2.
pub fn rotating_frame_tensor(grid: &Arc<Grid>, amplitude: f64) -> TensorField {
    let k = 2.0 * std::f64::consts::PI / grid.box_size();
    let theta = move |x: [f64; 3]| 0.2 * (k * x[0]).sin() * (k * x[1]).cos();
    // diag(a1, a2) rotated: |tau|_F = sqrt(a1^2 + a2^2) everywhere
    let (a1, a2) = (1.0f64, -0.5f64);
    let scale = amplitude / (a1 * a1 + a2 * a2).sqrt();
    let d = grid.dim();
    let e11 = Field::from_fn(grid.clone(), move |x| {
        let t = theta(x);
        scale * (a1 * t.cos() * t.cos() + a2 * t.sin() * t.sin())
    });
    let e12 = Field::from_fn(grid.clone(), move |x| {
        let t = theta(x);
        scale * (a1 - a2) * t.cos() * t.sin()
    });
    let e22 = Field::from_fn(grid.clone(), move |x| {
        let t = theta(x);
        scale * (a1 * t.sin() * t.sin() + a2 * t.cos() * t.cos())
    });
    if d == 2 {
        TensorField::new(vec![e11.clone(), e12.clone(), e12, e22], true)
    } else {
        let z = || Field::zeros(grid.clone());
        TensorField::new(
            vec![e11.clone(), e12.clone(), z(), e12, e22, z(), z(), z(), z()],
            true,
        )
    }
}

/// Deterministic normal sample helper for corpus builders.
pub fn normal_field(grid: &Arc<Grid>, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vals: Vec<f64> = (0..grid.modes())
        .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect();
    let f = Field::from_values(grid.clone(), vals);
    let m = f.mean();
    f.sub(&Field::constant(grid.clone(), m))
}
