//! Scalar, vector and tensor fields on a [`Grid`] with lazily cached
//! spectral coefficients. All operations are pure: they take snapshots and
//! return new fields, so values and spectra never disagree.

use crate::error::{Error, Result};
use crate::grid::Grid;
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::{Arc, OnceLock};

/// Real scalar samples plus an on-demand spectral representation.
pub struct Field {
    grid: Arc<Grid>,
    values: OnceLock<Vec<f64>>,
    spectral: OnceLock<Vec<Complex64>>,
}

impl Clone for Field {
    fn clone(&self) -> Self {
        let f = Field::empty(self.grid.clone());
        if let Some(v) = self.values.get() {
            let _ = f.values.set(v.clone());
        }
        if let Some(s) = self.spectral.get() {
            let _ = f.spectral.set(s.clone());
        }
        f
    }
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Field({:?}, max|f| = {:.3e})", self.grid, self.max_abs())
    }
}

impl Field {
    fn empty(grid: Arc<Grid>) -> Self {
        Field {
            grid,
            values: OnceLock::new(),
            spectral: OnceLock::new(),
        }
    }

    pub fn from_values(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.modes(), "sample count mismatch");
        let f = Field::empty(grid);
        f.values.set(values).unwrap();
        f
    }

    pub fn from_spectral(grid: Arc<Grid>, spectral: Vec<Complex64>) -> Self {
        assert_eq!(spectral.len(), grid.modes(), "coefficient count mismatch");
        let f = Field::empty(grid);
        f.spectral.set(spectral).unwrap();
        f
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let len = grid.modes();
        Field::from_values(grid, vec![0.0; len])
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        let len = grid.modes();
        Field::from_values(grid, vec![c; len])
    }

    /// Sample a function of the physical coordinates.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn([f64; 3]) -> f64 + Sync) -> Self {
        let vals: Vec<f64> = (0..grid.modes())
            .into_par_iter()
            .map(|i| f(grid.point(i)))
            .collect();
        Field::from_values(grid, vals)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Real samples (inverse transform on first access).
    pub fn values(&self) -> &[f64] {
        self.values.get_or_init(|| {
            let mut data = self
                .spectral
                .get()
                .expect("field holds neither values nor spectrum")
                .clone();
            self.grid.plans().inverse(&mut data);
            data.iter().map(|c| c.re).collect()
        })
    }

    /// Spectral coefficients (forward transform on first access).
    pub fn spectral(&self) -> &[Complex64] {
        self.spectral.get_or_init(|| {
            let mut data: Vec<Complex64> = self
                .values
                .get()
                .expect("field holds neither values nor spectrum")
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect();
            self.grid.plans().forward(&mut data);
            data
        })
    }

    /// New field with coefficients `m(xi) * f_hat(xi)` for a real multiplier.
    pub fn apply_multiplier(&self, m: impl Fn([f64; 3]) -> f64 + Sync) -> Field {
        let grid = self.grid.clone();
        let spec = self.spectral();
        let out: Vec<Complex64> = (0..spec.len())
            .into_par_iter()
            .map(|i| spec[i] * m(grid.wavenumber(i)))
            .collect();
        Field::from_spectral(grid, out)
    }

    /// Exact spectral derivative along `axis` (multiplication by `i xi_axis`).
    pub fn derivative(&self, axis: usize) -> Field {
        assert!(axis < self.grid.dim());
        let grid = self.grid.clone();
        let spec = self.spectral();
        let out: Vec<Complex64> = (0..spec.len())
            .into_par_iter()
            .map(|i| {
                let xi = grid.wavenumber(i)[axis];
                Complex64::new(0.0, xi) * spec[i]
            })
            .collect();
        Field::from_spectral(grid, out)
    }

    pub fn add(&self, other: &Field) -> Field {
        self.zip_values(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.zip_values(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Field {
        let vals = self.values().iter().map(|v| c * v).collect();
        Field::from_values(self.grid.clone(), vals)
    }

    /// Raw pointwise product; callers are responsible for dealiasing.
    pub fn mul_pointwise(&self, other: &Field) -> Field {
        self.zip_values(other, |a, b| a * b)
    }

    fn zip_values(&self, other: &Field, op: impl Fn(f64, f64) -> f64 + Sync) -> Field {
        assert!(self.grid.same_grid(other.grid()), "grid mismatch");
        let a = self.values();
        let b = other.values();
        let vals: Vec<f64> = a
            .par_iter()
            .zip(b.par_iter())
            .map(|(&x, &y)| op(x, y))
            .collect();
        Field::from_values(self.grid.clone(), vals)
    }

    pub fn mean(&self) -> f64 {
        self.spectral()[0].re
    }

    pub fn max_abs(&self) -> f64 {
        self.values().iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }

    /// Quadrature L^p norm: `(sum |f|^p (L/n)^d)^(1/p)`, max for p = inf.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_of_samples(self.values().iter().map(|v| v.abs()), p, self.grid.cell_volume())
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm(2.0)
    }
}

pub(crate) fn lp_of_samples(mag: impl Iterator<Item = f64>, p: f64, cell: f64) -> f64 {
    assert!(p >= 1.0, "L^p exponent must be >= 1");
    if p.is_infinite() {
        return mag.fold(0.0f64, f64::max);
    }
    // Fixed-order summation keeps reports byte-identical across pool sizes.
    let sum: f64 = mag.map(|m| m.powf(p)).sum();
    (sum * cell).powf(1.0 / p)
}

// ---------------------------------------------------------------------------
// Differential operators and projectors (exact Fourier multipliers)
// ---------------------------------------------------------------------------

pub fn gradient(f: &Field) -> VectorField {
    let comps = (0..f.grid().dim()).map(|ax| f.derivative(ax)).collect();
    VectorField::new(comps)
}

pub fn divergence(v: &VectorField) -> Field {
    let mut acc = v.component(0).derivative(0);
    for ax in 1..v.dim() {
        acc = acc.add(&v.component(ax).derivative(ax));
    }
    acc
}

pub fn laplacian(f: &Field) -> Field {
    let grid = f.grid().clone();
    let spec = f.spectral();
    let out: Vec<Complex64> = (0..spec.len())
        .into_par_iter()
        .map(|i| spec[i] * (-grid.wavenumber_norm_sq(i)))
        .collect();
    Field::from_spectral(grid, out)
}

/// Leray projection onto divergence-free fields:
/// `v_hat -> (I - xi xi^T / |xi|^2) v_hat`, mean mode passed through.
pub fn leray_project(v: &VectorField) -> VectorField {
    let grid = v.component(0).grid().clone();
    let d = grid.dim();
    let specs: Vec<&[Complex64]> = (0..d).map(|i| v.component(i).spectral()).collect();
    let modes = grid.modes();
    let mut out: Vec<Vec<Complex64>> = vec![vec![Complex64::default(); modes]; d];
    for flat in 0..modes {
        let xi = grid.wavenumber(flat);
        let nsq = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        if nsq == 0.0 {
            for i in 0..d {
                out[i][flat] = specs[i][flat];
            }
            continue;
        }
        let mut dot = Complex64::default();
        for i in 0..d {
            dot += specs[i][flat] * xi[i];
        }
        dot /= nsq;
        for i in 0..d {
            out[i][flat] = specs[i][flat] - dot * xi[i];
        }
    }
    let mut v = VectorField::new(
        out.into_iter()
            .map(|s| Field::from_spectral(grid.clone(), s))
            .collect(),
    );
    v.divergence_free = true;
    v
}

/// Sharp annulus cutoff `1/n <= |xi| <= n`. The mean mode is always outside
/// the annulus and is zeroed.
pub fn friedrichs_project(f: &Field, n: u32) -> Result<Field> {
    if n < 1 {
        return Err(Error::range("annulus index must be >= 1"));
    }
    let lo = 1.0 / n as f64;
    let hi = n as f64;
    Ok(f.apply_multiplier(move |xi| {
        let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        if r >= lo && r <= hi {
            1.0
        } else {
            0.0
        }
    }))
}

/// Skew part of the velocity gradient: `w = (grad u - grad u^T)/2`.
pub fn vorticity_tensor(u: &VectorField) -> TensorField {
    gradient_split(u, -1.0)
}

/// Symmetric part of the velocity gradient: `D = (grad u + grad u^T)/2`.
pub fn deformation_tensor(u: &VectorField) -> TensorField {
    gradient_split(u, 1.0)
}

fn gradient_split(u: &VectorField, sign: f64) -> TensorField {
    let d = u.dim();
    let mut entries = Vec::with_capacity(d * d);
    // entry (i, j) = (d_j u_i + sign d_i u_j)/2
    for i in 0..d {
        for j in 0..d {
            let a = u.component(i).derivative(j);
            let b = u.component(j).derivative(i);
            entries.push(a.add(&b.scale(sign)).scale(0.5));
        }
    }
    TensorField {
        entries,
        symmetric: sign > 0.0,
    }
}

/// Full velocity gradient as a tensor, entry `(i, j) = d_j u_i`.
pub fn velocity_gradient(u: &VectorField) -> TensorField {
    let d = u.dim();
    let mut entries = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            entries.push(u.component(i).derivative(j));
        }
    }
    TensorField {
        entries,
        symmetric: false,
    }
}

/// 2/3-rule: zero every mode with any `|k_i| > n/3`. Idempotent.
pub fn dealias(f: &Field) -> Field {
    let grid = f.grid().clone();
    let cut = grid.dealias_cut() as i64;
    let spec = f.spectral();
    let out: Vec<Complex64> = (0..spec.len())
        .into_par_iter()
        .map(|i| {
            let k = grid.mode_indices(i);
            if k[0].abs() > cut || k[1].abs() > cut || k[2].abs() > cut {
                Complex64::default()
            } else {
                spec[i]
            }
        })
        .collect();
    Field::from_spectral(grid, out)
}

/// Pointwise product of the dealiased factors, re-truncated to the 2/3 band
/// so the retained coefficients are alias-free.
pub fn dealiased_product(a: &Field, b: &Field) -> Field {
    dealias(&dealias(a).mul_pointwise(&dealias(b)))
}

// ---------------------------------------------------------------------------
// Vector and tensor wrappers
// ---------------------------------------------------------------------------

/// `d` scalar components.
#[derive(Clone, Debug)]
pub struct VectorField {
    components: Vec<Field>,
    pub divergence_free: bool,
}

impl VectorField {
    pub fn new(components: Vec<Field>) -> Self {
        assert_eq!(components.len(), components[0].grid().dim());
        VectorField {
            components,
            divergence_free: false,
        }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let d = grid.dim();
        VectorField::new((0..d).map(|_| Field::zeros(grid.clone())).collect())
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }
    pub fn grid(&self) -> &Arc<Grid> {
        self.components[0].grid()
    }
    pub fn component(&self, i: usize) -> &Field {
        &self.components[i]
    }
    pub fn components(&self) -> &[Field] {
        &self.components
    }

    pub fn map(&self, f: impl Fn(&Field) -> Field) -> VectorField {
        VectorField::new(self.components.iter().map(f).collect())
    }

    pub fn add(&self, o: &VectorField) -> VectorField {
        VectorField::new(
            self.components
                .iter()
                .zip(&o.components)
                .map(|(a, b)| a.add(b))
                .collect(),
        )
    }

    pub fn sub(&self, o: &VectorField) -> VectorField {
        VectorField::new(
            self.components
                .iter()
                .zip(&o.components)
                .map(|(a, b)| a.sub(b))
                .collect(),
        )
    }

    pub fn scale(&self, c: f64) -> VectorField {
        self.map(|f| f.scale(c))
    }

    /// Pointwise Euclidean magnitude samples.
    pub fn magnitude(&self) -> Vec<f64> {
        let vals: Vec<&[f64]> = self.components.iter().map(|f| f.values()).collect();
        (0..vals[0].len())
            .map(|i| vals.iter().map(|v| v[i] * v[i]).sum::<f64>().sqrt())
            .collect()
    }

    /// L^p norm of the pointwise magnitude.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_of_samples(self.magnitude().into_iter(), p, self.grid().cell_volume())
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm(2.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.magnitude().into_iter().fold(0.0f64, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|f| f.is_finite())
    }

    /// `sum_i |grad u_i|^2` integrated: the L^2 norm of the full gradient,
    /// evaluated spectrally.
    pub fn grad_l2_norm_sq(&self) -> f64 {
        let grid = self.grid();
        let vol = grid.volume();
        let mut total = 0.0;
        for comp in &self.components {
            let spec = comp.spectral();
            let mut s = 0.0;
            for (i, c) in spec.iter().enumerate() {
                s += grid.wavenumber_norm_sq(i) * c.norm_sqr();
            }
            total += s;
        }
        total * vol
    }
}

/// `d x d` scalar entries, row-major.
#[derive(Clone, Debug)]
pub struct TensorField {
    entries: Vec<Field>,
    pub symmetric: bool,
}

impl TensorField {
    pub fn new(entries: Vec<Field>, symmetric: bool) -> Self {
        let d = entries[0].grid().dim();
        assert_eq!(entries.len(), d * d);
        TensorField { entries, symmetric }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let d = grid.dim();
        TensorField {
            entries: (0..d * d).map(|_| Field::zeros(grid.clone())).collect(),
            symmetric: true,
        }
    }

    /// Constant-in-space tensor from a row-major matrix.
    pub fn constant(grid: Arc<Grid>, m: &[f64]) -> Self {
        let d = grid.dim();
        assert_eq!(m.len(), d * d);
        let entries = m.iter().map(|&c| Field::constant(grid.clone(), c)).collect();
        let sym = (0..d).all(|i| (0..d).all(|j| (m[i * d + j] - m[j * d + i]).abs() == 0.0));
        TensorField { entries, symmetric: sym }
    }

    pub fn dim(&self) -> usize {
        self.entries[0].grid().dim()
    }
    pub fn grid(&self) -> &Arc<Grid> {
        self.entries[0].grid()
    }
    pub fn entry(&self, i: usize, j: usize) -> &Field {
        &self.entries[i * self.dim() + j]
    }
    pub fn entries(&self) -> &[Field] {
        &self.entries
    }

    pub fn map(&self, f: impl Fn(&Field) -> Field) -> TensorField {
        TensorField {
            entries: self.entries.iter().map(f).collect(),
            symmetric: self.symmetric,
        }
    }

    pub fn add(&self, o: &TensorField) -> TensorField {
        TensorField {
            entries: self
                .entries
                .iter()
                .zip(&o.entries)
                .map(|(a, b)| a.add(b))
                .collect(),
            symmetric: self.symmetric && o.symmetric,
        }
    }

    pub fn sub(&self, o: &TensorField) -> TensorField {
        TensorField {
            entries: self
                .entries
                .iter()
                .zip(&o.entries)
                .map(|(a, b)| a.sub(b))
                .collect(),
            symmetric: self.symmetric && o.symmetric,
        }
    }

    pub fn scale(&self, c: f64) -> TensorField {
        self.map(|f| f.scale(c))
    }

    pub fn transpose(&self) -> TensorField {
        let d = self.dim();
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                entries.push(self.entry(j, i).clone());
            }
        }
        TensorField {
            entries,
            symmetric: self.symmetric,
        }
    }

    pub fn symmetrize(&self) -> TensorField {
        let mut t = self.add(&self.transpose()).scale(0.5);
        t.symmetric = true;
        t
    }

    /// Largest pointwise asymmetry `max |t_ij - t_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in (i + 1)..d {
                let a = self.entry(i, j).values();
                let b = self.entry(j, i).values();
                for (x, y) in a.iter().zip(b) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
        worst
    }

    /// Pointwise Frobenius magnitude samples.
    pub fn magnitude(&self) -> Vec<f64> {
        let vals: Vec<&[f64]> = self.entries.iter().map(|f| f.values()).collect();
        (0..vals[0].len())
            .map(|i| vals.iter().map(|v| v[i] * v[i]).sum::<f64>().sqrt())
            .collect()
    }

    /// L^p norm of the pointwise Frobenius magnitude.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_of_samples(self.magnitude().into_iter(), p, self.grid().cell_volume())
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm(2.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.magnitude().into_iter().fold(0.0f64, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|f| f.is_finite())
    }

    /// Row divergence `(div t)_i = sum_j d_j t_ij`, exact in spectral space.
    pub fn divergence(&self) -> VectorField {
        let d = self.dim();
        let mut comps = Vec::with_capacity(d);
        for i in 0..d {
            let mut acc = self.entry(i, 0).derivative(0);
            for j in 1..d {
                acc = acc.add(&self.entry(i, j).derivative(j));
            }
            comps.push(acc);
        }
        VectorField::new(comps)
    }
}
