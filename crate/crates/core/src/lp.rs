//! Littlewood-Paley machinery: dyadic partition of unity, frequency blocks
//! `Delta_q` / `S_q`, homogeneous Besov and Chemin-Lerner norms, the Bony
//! paraproduct/remainder split and Bernstein-ratio probes.

use crate::error::{Error, Result};
use crate::field::{dealias, Field, TensorField, VectorField};
use crate::grid::Grid;
use std::sync::Arc;

/// `h(t) = exp(-1/t)` for `t > 0`, else 0: the standard smooth-transition
/// ingredient.
fn smooth_h(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Radial low-frequency cutoff: identically 1 for `r <= 3/4`, identically 0
/// for `r >= 1`, smooth and decreasing in between. The support constraints
/// (`chi = 1` on the 3/4-ball, `supp chi` inside the 4/3-ball) hold with
/// room to spare; ending the ramp at `r = 1` makes a pure mode at `|xi| =
/// 2^q` land entirely in block `q` since `phi(1) = chi(1/2) - chi(1) = 1`.
pub fn chi(r: f64) -> f64 {
    const A: f64 = 0.75;
    const B: f64 = 1.0;
    if r <= A {
        1.0
    } else if r >= B {
        0.0
    } else {
        let hb = smooth_h(B - r);
        let ha = smooth_h(r - A);
        hb / (hb + ha)
    }
}

/// Annulus bump `phi(xi) = chi(xi/2) - chi(xi)`, supported in
/// `3/4 <= |xi| <= 2` and summing to 1 over dyadic rescalings.
pub fn phi(r: f64) -> f64 {
    chi(r / 2.0) - chi(r)
}

/// Besov indices `(s, p, r)`; `p` and `r` may be `f64::INFINITY`.
#[derive(Clone, Copy, Debug)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, r: f64) -> Self {
        assert!(p >= 1.0 && r >= 1.0);
        BesovParams { s, p, r }
    }
}

/// Besov norm value plus a flag recording that the field carried a mean
/// mode, which the truncated homogeneous norm cannot represent.
#[derive(Clone, Copy, Debug)]
pub struct BesovNorm {
    pub value: f64,
    pub nonzero_mean: bool,
}

/// Dyadic partition evaluated on a grid's wavenumbers for the block range
/// `[q_min, q_max]`.
pub struct DyadicPartition {
    grid: Arc<Grid>,
    q_min: i32,
    q_max: i32,
    /// chi(xi) per mode (the q = 0 low-pass).
    pub chi0: Vec<f64>,
    /// phi(2^-q xi) per block, indexed q - q_min.
    phi_q: Vec<Vec<f64>>,
}

impl std::fmt::Debug for DyadicPartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "DyadicPartition(q in [{}, {}] on {:?})",
            self.q_min, self.q_max, self.grid
        )
    }
}

impl DyadicPartition {
    /// Construct the partition for a grid. `q_min` is the smallest block
    /// whose annulus `[3/4 2^q, 8/3 2^q]` meets a resolved nonzero
    /// wavenumber, `q_max` the largest whose annulus stays inside the
    /// dealias band.
    pub fn new(grid: Arc<Grid>) -> Result<DyadicPartition> {
        let xi_min = grid.min_wavenumber();
        let xi_da = grid.dealias_wavenumber();
        // smallest q with (8/3) 2^q >= xi_min
        let q_min = (xi_min * 3.0 / 8.0).log2().ceil() as i32;
        // largest q with (8/3) 2^q <= xi_da
        let q_max = (xi_da * 3.0 / 8.0).log2().floor() as i32;
        if q_max - q_min + 1 < 3 {
            return Err(Error::config(format!(
                "grid too small to host 3 dyadic blocks (q range [{q_min}, {q_max}])"
            )));
        }
        let modes = grid.modes();
        let chi0 = (0..modes)
            .map(|i| chi(grid.wavenumber_norm_sq(i).sqrt()))
            .collect();
        let phi_q = (q_min..=q_max)
            .map(|q| {
                let scale = (2.0f64).powi(-q);
                (0..modes)
                    .map(|i| phi(scale * grid.wavenumber_norm_sq(i).sqrt()))
                    .collect()
            })
            .collect();
        Ok(DyadicPartition {
            grid,
            q_min,
            q_max,
            chi0,
            phi_q,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
    pub fn q_min(&self) -> i32 {
        self.q_min
    }
    pub fn q_max(&self) -> i32 {
        self.q_max
    }
    pub fn q_range(&self) -> impl Iterator<Item = i32> {
        self.q_min..=self.q_max
    }
    pub fn n_blocks(&self) -> usize {
        (self.q_max - self.q_min + 1) as usize
    }

    fn phi_multiplier(&self, q: i32) -> Result<&[f64]> {
        if q < self.q_min || q > self.q_max {
            return Err(Error::range(format!(
                "block index {q} outside [{}, {}]",
                self.q_min, self.q_max
            )));
        }
        Ok(&self.phi_q[(q - self.q_min) as usize])
    }

    /// Homogeneous dyadic block `Delta_q f`.
    pub fn block(&self, f: &Field, q: i32) -> Result<Field> {
        let m = self.phi_multiplier(q)?;
        let spec = f.spectral();
        let out = spec.iter().zip(m).map(|(c, &w)| c * w).collect();
        Ok(Field::from_spectral(self.grid.clone(), out))
    }

    /// Low-frequency cutoff `S_q f` (multiplier `chi(2^-q xi)`).
    pub fn low_freq(&self, f: &Field, q: i32) -> Result<Field> {
        if q < self.q_min || q > self.q_max + 1 {
            return Err(Error::range(format!(
                "low-pass index {q} outside [{}, {}]",
                self.q_min,
                self.q_max + 1
            )));
        }
        Ok(self.low_freq_unchecked(f, q))
    }

    /// `S_q` without the range guard: below `q_min` the multiplier vanishes
    /// on every covered mode, which is exactly what the Bony sums need.
    fn low_freq_unchecked(&self, f: &Field, q: i32) -> Field {
        let scale = (2.0f64).powi(-q);
        f.apply_multiplier(move |xi| {
            chi(scale * (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt())
        })
    }

    /// `||Delta_q f||_{L^p}` for every block in range.
    pub fn block_lp_norms(&self, f: &Field, p: f64) -> Vec<f64> {
        self.q_range()
            .map(|q| self.block(f, q).unwrap().lp_norm(p))
            .collect()
    }

    /// Per-block norms of a vector field (L^p of the pointwise magnitude of
    /// the componentwise blocks).
    pub fn block_lp_norms_vector(&self, u: &VectorField, p: f64) -> Vec<f64> {
        self.q_range()
            .map(|q| {
                let blocks: Vec<Field> = u
                    .components()
                    .iter()
                    .map(|c| self.block(c, q).unwrap())
                    .collect();
                VectorField::new(blocks).lp_norm(p)
            })
            .collect()
    }

    pub fn block_lp_norms_tensor(&self, t: &TensorField, p: f64) -> Vec<f64> {
        self.q_range()
            .map(|q| {
                let blocks: Vec<Field> = t
                    .entries()
                    .iter()
                    .map(|e| self.block(e, q).unwrap())
                    .collect();
                TensorField::new(blocks, t.symmetric).lp_norm(p)
            })
            .collect()
    }

    /// Fraction of spectral energy outside the shells the partition covers.
    fn uncovered_energy_fraction(&self, f: &Field) -> f64 {
        let lo = 4.0 / 3.0 * (2.0f64).powi(self.q_min);
        let hi = 0.75 * (2.0f64).powi(self.q_max + 1);
        let mut inside = 0.0;
        let mut outside = 0.0;
        for (i, c) in f.spectral().iter().enumerate() {
            if i == 0 {
                continue; // mean handled separately
            }
            let r = self.grid.wavenumber_norm_sq(i).sqrt();
            if r >= lo && r <= hi {
                inside += c.norm_sqr();
            } else {
                outside += c.norm_sqr();
            }
        }
        if inside + outside == 0.0 {
            0.0
        } else {
            outside / (inside + outside)
        }
    }
}

/// Homogeneous Besov norm over the partition's block range. A nonzero mean
/// is flagged rather than rejected: the truncated homogeneous norm simply
/// cannot see it.
pub fn besov_norm(f: &Field, params: BesovParams, part: &DyadicPartition) -> BesovNorm {
    let norms = part.block_lp_norms(f, params.p);
    let value = ell_r_weighted(&norms, part.q_min(), params.s, params.r);
    let nonzero_mean = f.mean().abs() > 1e-10 * (1.0 + f.max_abs());
    BesovNorm { value, nonzero_mean }
}

pub fn besov_norm_vector(u: &VectorField, params: BesovParams, part: &DyadicPartition) -> f64 {
    let norms = part.block_lp_norms_vector(u, params.p);
    ell_r_weighted(&norms, part.q_min(), params.s, params.r)
}

pub fn besov_norm_tensor(t: &TensorField, params: BesovParams, part: &DyadicPartition) -> f64 {
    let norms = part.block_lp_norms_tensor(t, params.p);
    ell_r_weighted(&norms, part.q_min(), params.s, params.r)
}

/// `ell^r` sum of `2^{qs} a_q`, supremum for `r = inf`.
pub fn ell_r_weighted(block_norms: &[f64], q_min: i32, s: f64, r: f64) -> f64 {
    let weighted = block_norms
        .iter()
        .enumerate()
        .map(|(i, a)| (2.0f64).powi(q_min + i as i32).powf(s) * a);
    if r.is_infinite() {
        weighted.fold(0.0f64, f64::max)
    } else {
        weighted.map(|w| w.powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// Sampled per-block `L^p` norms along a trajectory, the raw material of
/// Chemin-Lerner norms.
#[derive(Clone, Debug)]
pub struct TrajectoryNorms {
    pub times: Vec<f64>,
    pub q_min: i32,
    /// `per_block_lp[qi][ti]` = `||Delta_q f(t_i)||_{L^p}`.
    pub per_block_lp: Vec<Vec<f64>>,
}

impl TrajectoryNorms {
    pub fn new(q_min: i32, n_blocks: usize) -> Self {
        TrajectoryNorms {
            times: Vec::new(),
            q_min,
            per_block_lp: vec![Vec::new(); n_blocks],
        }
    }

    pub fn push(&mut self, t: f64, block_norms: &[f64]) {
        assert_eq!(block_norms.len(), self.per_block_lp.len());
        if let Some(&last) = self.times.last() {
            assert!(t > last, "times must be strictly increasing");
        }
        self.times.push(t);
        for (row, &v) in self.per_block_lp.iter_mut().zip(block_norms) {
            debug_assert!(v >= 0.0);
            row.push(v);
        }
    }

    pub fn from_scalar_trajectory(
        part: &DyadicPartition,
        times: &[f64],
        fields: &[Field],
        p: f64,
    ) -> Self {
        let mut tn = TrajectoryNorms::new(part.q_min(), part.n_blocks());
        for (t, f) in times.iter().zip(fields) {
            tn.push(*t, &part.block_lp_norms(f, p));
        }
        tn
    }

    pub fn from_vector_trajectory(
        part: &DyadicPartition,
        times: &[f64],
        fields: &[VectorField],
        p: f64,
    ) -> Self {
        let mut tn = TrajectoryNorms::new(part.q_min(), part.n_blocks());
        for (t, f) in times.iter().zip(fields) {
            tn.push(*t, &part.block_lp_norms_vector(f, p));
        }
        tn
    }
}

/// Chemin-Lerner norm: per-block `L^rho` in time (trapezoid quadrature),
/// then the weighted `ell^r` sum over blocks. A single-sample trajectory
/// degenerates to the instantaneous Besov norm for any `rho`.
pub fn chemin_lerner_norm(traj: &TrajectoryNorms, rho: f64, params: BesovParams) -> Result<f64> {
    if traj.times.is_empty() {
        return Err(Error::range("empty trajectory"));
    }
    let per_block: Vec<f64> = traj
        .per_block_lp
        .iter()
        .map(|row| time_lr_norm(&traj.times, row, rho))
        .collect();
    Ok(ell_r_weighted(&per_block, traj.q_min, params.s, params.r))
}

fn time_lr_norm(times: &[f64], vals: &[f64], rho: f64) -> f64 {
    if rho.is_infinite() || times.len() == 1 {
        return vals.iter().fold(0.0f64, |m, &v| m.max(v));
    }
    let mut acc = 0.0;
    for i in 1..times.len() {
        let dt = times[i] - times[i - 1];
        acc += 0.5 * dt * (vals[i - 1].powf(rho) + vals[i].powf(rho));
    }
    acc.powf(1.0 / rho)
}

/// Trapezoid integral of sampled scalars (used for `L^1`-in-time factors).
pub fn trapezoid(times: &[f64], vals: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..times.len() {
        acc += 0.5 * (times[i] - times[i - 1]) * (vals[i - 1] + vals[i]);
    }
    acc
}

/// Bony split `f g = T_f g + T_g f + R(f, g)` with the paraproduct
/// convention `T_f g = sum_q S_{q-1} g  Delta_q f`. Exact (pointwise) for
/// mean-free fields whose spectrum sits inside the covered shells.
pub fn bony_decompose(
    f: &Field,
    g: &Field,
    part: &DyadicPartition,
) -> Result<(Field, Field, Field)> {
    for (name, h) in [("f", f), ("g", g)] {
        if part.uncovered_energy_fraction(h) > 1e-20 {
            return Err(Error::range(format!(
                "spectrum of {name} exceeds the partition's covered shells"
            )));
        }
        if h.mean().abs() > 1e-12 * (1.0 + h.max_abs()) {
            return Err(Error::range(format!("{name} must be mean-free")));
        }
    }
    let grid = part.grid().clone();
    let f = dealias(f);
    let g = dealias(g);
    let blocks_f: Vec<Field> = part.q_range().map(|q| part.block(&f, q).unwrap()).collect();
    let blocks_g: Vec<Field> = part.q_range().map(|q| part.block(&g, q).unwrap()).collect();

    let mut tfg = Field::zeros(grid.clone());
    let mut tgf = Field::zeros(grid.clone());
    let mut rem = Field::zeros(grid.clone());
    for (qi, q) in part.q_range().enumerate() {
        let s_g = part.low_freq_unchecked(&g, q - 1);
        let s_f = part.low_freq_unchecked(&f, q - 1);
        tfg = tfg.add(&blocks_f[qi].mul_pointwise(&s_g));
        tgf = tgf.add(&blocks_g[qi].mul_pointwise(&s_f));
        // remainder: Delta_q f * sum_{|j-q|<=1} Delta_j g
        let mut near = Field::zeros(grid.clone());
        for j in (q - 1)..=(q + 1) {
            if j >= part.q_min() && j <= part.q_max() {
                near = near.add(&blocks_g[(j - part.q_min()) as usize]);
            }
        }
        rem = rem.add(&blocks_f[qi].mul_pointwise(&near));
    }
    Ok((tfg, tgf, rem))
}

/// Bernstein probe: returns
/// `(||Delta_q f||_{L^l} / (2^{q(d/p - d/l)} ||Delta_q f||_{L^p}),
///   ||grad Delta_q f||_{L^p} / (2^q ||Delta_q f||_{L^p}))`.
pub fn check_bernstein(
    f: &Field,
    q: i32,
    p: f64,
    l: f64,
    part: &DyadicPartition,
) -> Result<(f64, f64)> {
    assert!(l >= p, "second exponent must dominate");
    let block = part.block(f, q)?;
    let np = block.lp_norm(p);
    if np <= 1e-13 * f.lp_norm(p) {
        return Err(Error::range(format!("block {q} of the probe field is zero")));
    }
    let d = f.grid().dim() as f64;
    let dl = if l.is_infinite() { 0.0 } else { d / l };
    let dp = if p.is_infinite() { 0.0 } else { d / p };
    let ratio_embed = block.lp_norm(l) / ((2.0f64).powi(q).powf(dp - dl) * np);
    let grad = crate::field::gradient(&block);
    let ratio_grad = grad.lp_norm(p) / ((2.0f64).powi(q) * np);
    Ok((ratio_embed, ratio_grad))
}

/// Log-interpolation gap for the `B^{1/2}_{4,1}` estimate: returns
/// `C ||f||_{B^{1/2}_{4,inf}} ln(e + (small + big)/||f||_{B^{1/2}_{4,inf}})
///  - ||f||_{B^{1/2}_{4,1}}`.
/// `big`/`small` are the caller's higher/lower regularity norms.
pub fn log_interpolation_gap(
    f: &Field,
    big_norm: f64,
    small_norm: f64,
    c: f64,
    part: &DyadicPartition,
) -> Result<f64> {
    let weak = besov_norm(f, BesovParams::new(0.5, 4.0, f64::INFINITY), part).value;
    if weak == 0.0 {
        return Err(Error::range("zero denominator in log interpolation"));
    }
    let strong = besov_norm(f, BesovParams::new(0.5, 4.0, 1.0), part).value;
    let rhs = c * weak * (std::f64::consts::E + (small_norm + big_norm) / weak).ln();
    Ok(rhs - strong)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{band_scalar, single_block_scalar};
    use crate::field::Field;

    fn grid2(n: usize) -> Arc<Grid> {
        Grid::new(2, n, 2.0 * std::f64::consts::PI).unwrap()
    }

    fn part(n: usize) -> (Arc<Grid>, DyadicPartition) {
        let g = grid2(n);
        let p = DyadicPartition::new(g.clone()).unwrap();
        (g, p)
    }

    #[test]
    fn partition_range_for_128() {
        let (_, p) = part(128);
        assert_eq!(p.q_min(), -1);
        assert_eq!(p.q_max(), 3);
        assert!(p.n_blocks() >= 3);
    }

    #[test]
    fn too_small_grid_rejected() {
        let g = Grid::new(2, 8, 2.0 * std::f64::consts::PI).unwrap();
        assert!(DyadicPartition::new(g).is_err());
    }

    #[test]
    fn chi_support_values() {
        assert_eq!(chi(0.5), 1.0);
        assert_eq!(chi(1.4), 0.0);
        assert_eq!(chi(0.75), 1.0);
        assert_eq!(chi(1.0), 0.0);
        // decreasing on the ramp
        assert!(chi(0.8) > chi(0.9));
    }

    #[test]
    fn partition_sums_to_one_on_covered_shells() {
        let (g, p) = part(64);
        let lo = 4.0 / 3.0 * (2.0f64).powi(p.q_min());
        let hi = 0.75 * (2.0f64).powi(p.q_max() + 1);
        let mut checked = 0usize;
        for i in 1..g.modes() {
            let r = g.wavenumber_norm_sq(i).sqrt();
            if r >= lo && r <= hi {
                let sum: f64 = (0..p.n_blocks()).map(|qi| p.phi_q[qi][i]).sum();
                assert!((sum - 1.0).abs() <= 1e-12, "shell r = {r}: sum = {sum}");
                checked += 1;
            }
        }
        assert!(checked > 100);
        // spot check on the |xi| = 4 mid-band shell
        let sum: f64 = p.q_range().map(|q| phi((2.0f64).powi(-q) * 4.0)).sum();
        assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn single_mode_reproduced_by_its_block() {
        let (g, p) = part(64);
        // |xi| = 4 = 2^2 sits entirely in block q = 2 because phi(1) = 1.
        let f = Field::from_fn(g, |x| (4.0 * x[0]).sin());
        let b = p.block(&f, 2).unwrap();
        assert!(b.sub(&f).max_abs() < 1e-12);
        for q in p.q_range() {
            if q != 2 {
                assert!(p.block(&f, q).unwrap().max_abs() < 1e-13);
            }
        }
    }

    #[test]
    fn blocks_two_apart_are_exactly_orthogonal() {
        let (g, p) = part(64);
        let f = band_scalar(&g, 7, p.q_min(), p.q_max());
        for q in p.q_range() {
            for j in p.q_range() {
                if (q - j).abs() >= 2 {
                    let b = p.block(&p.block(&f, q).unwrap(), j).unwrap();
                    let exact_zero = b.spectral().iter().all(|c| c.norm() == 0.0);
                    assert!(exact_zero, "Delta_{j} Delta_{q} f must vanish exactly");
                }
            }
        }
    }

    #[test]
    fn paraproduct_pieces_are_five_blocks_wide() {
        let (g, p) = part(64);
        let u = band_scalar(&g, 3, p.q_min(), p.q_max());
        let v = band_scalar(&g, 4, p.q_min(), p.q_max());
        for q in p.q_range().skip(1) {
            let piece = p
                .low_freq(&u, q - 1)
                .unwrap()
                .mul_pointwise(&p.block(&v, q).unwrap());
            for k in p.q_range() {
                if (q - k).abs() >= 5 {
                    let b = p.block(&piece, k).unwrap();
                    assert!(
                        b.spectral().iter().all(|c| c.norm() == 0.0),
                        "Delta_{k}(S_{}u Delta_{q}v) must vanish exactly",
                        q - 1
                    );
                }
            }
        }
    }

    #[test]
    fn block_sum_reconstructs_band_limited_fields() {
        let (g, p) = part(64);
        let f = band_scalar(&g, 11, p.q_min() + 1, p.q_max() - 1);
        let mut sum = Field::zeros(g.clone());
        for q in p.q_range() {
            sum = sum.add(&p.block(&f, q).unwrap());
        }
        assert!(sum.sub(&f).max_abs() <= 1e-10 * (1.0 + f.max_abs()));
    }

    #[test]
    fn besov_single_block_value() {
        let (g, p) = part(128);
        // single mode |xi| = 8 in block q = 3, rescaled to L^p norm 2
        let f = Field::from_fn(g, |x| (8.0 * x[0]).sin());
        let f = f.scale(2.0 / f.lp_norm(4.0));
        for r in [1.0, 2.0, f64::INFINITY] {
            let s = 0.7;
            let b = besov_norm(&f, BesovParams::new(s, 4.0, r), &p);
            let expected = (2.0f64).powi(3).powf(s) * 2.0;
            assert!(
                (b.value - expected).abs() < 1e-10 * expected,
                "r = {r}: {} vs {expected}",
                b.value
            );
            assert!(!b.nonzero_mean);
        }
    }

    #[test]
    fn besov_l2_equivalence_window() {
        let (g, p) = part(64);
        for seed in 0..5 {
            let f = band_scalar(&g, 100 + seed, p.q_min() + 1, p.q_max() - 1);
            let b = besov_norm(&f, BesovParams::new(0.0, 2.0, 2.0), &p).value;
            let l2 = f.l2_norm();
            let ratio = b / l2;
            assert!(
                (1.0 / 2.0f64.sqrt() - 1e-9..=2.0f64.sqrt() + 1e-9).contains(&ratio),
                "ratio {ratio}"
            );
        }
    }

    #[test]
    fn besov_linf_below_l1_index() {
        let (g, p) = part(64);
        let f = band_scalar(&g, 5, p.q_min(), p.q_max());
        let s = 0.3;
        let inf = besov_norm(&f, BesovParams::new(s, 3.0, f64::INFINITY), &p).value;
        let one = besov_norm(&f, BesovParams::new(s, 3.0, 1.0), &p).value;
        assert!(inf <= one + 1e-12);
    }

    #[test]
    fn besov_octave_shift_scales_by_2_to_s() {
        let (g, p) = part(64);
        // one mode per block keeps the shift exact
        let f1 = Field::from_fn(g.clone(), |x| (2.0 * x[0]).sin());
        let f2 = Field::from_fn(g.clone(), |x| (4.0 * x[0]).sin());
        for s in [-1.0, 0.5, 1.0] {
            let b1 = besov_norm(&f1, BesovParams::new(s, 2.0, 1.0), &p).value;
            let b2 = besov_norm(&f2, BesovParams::new(s, 2.0, 1.0), &p).value;
            let ratio = b2 / b1;
            assert!(
                (ratio - (2.0f64).powf(s)).abs() < 1e-6,
                "s = {s}: ratio {ratio}"
            );
        }
    }

    #[test]
    fn nonzero_mean_flagged() {
        let (g, p) = part(64);
        let f = Field::from_fn(g, |x| 1.0 + x[0].sin());
        let b = besov_norm(&f, BesovParams::new(0.0, 2.0, 1.0), &p);
        assert!(b.nonzero_mean);
    }

    #[test]
    fn chemin_lerner_reductions() {
        let (g, p) = part(64);
        let f = band_scalar(&g, 42, p.q_min() + 1, p.q_max() - 1);
        let params = BesovParams::new(0.5, 2.0, 1.0);

        // single sample: any rho gives the instantaneous Besov norm
        let tn = TrajectoryNorms::from_scalar_trajectory(&p, &[0.3], &[f.clone()], params.p);
        let cl = chemin_lerner_norm(&tn, 1.0, params).unwrap();
        let b = besov_norm(&f, params, &p).value;
        assert!((cl - b).abs() < 1e-12 * b);

        // constant trajectory, rho = 1, horizon T: T * besov
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.2).collect();
        let fields: Vec<Field> = times.iter().map(|_| f.clone()).collect();
        let tn = TrajectoryNorms::from_scalar_trajectory(&p, &times, &fields, params.p);
        let cl = chemin_lerner_norm(&tn, 1.0, params).unwrap();
        assert!((cl - 2.0 * b).abs() < 1e-10 * b);

        // empty trajectory errors
        let empty = TrajectoryNorms::new(p.q_min(), p.n_blocks());
        assert!(chemin_lerner_norm(&empty, 1.0, params).is_err());
    }

    #[test]
    fn minkowski_exchange_between_tilde_and_plain_norms() {
        // For r = 1 <= rho = inf the time norm outside the block sum is the
        // smaller one: sup_t sum_q <= sum_q sup_t, with constant 1.
        let (g, p) = part(64);
        let params = BesovParams::new(0.0, 2.0, 1.0);
        let times: Vec<f64> = (0..6).map(|i| i as f64 * 0.1).collect();
        let fields: Vec<Field> = (0..6)
            .map(|i| band_scalar(&g, 60 + i, p.q_min(), p.q_max()))
            .collect();
        let tn = TrajectoryNorms::from_scalar_trajectory(&p, &times, &fields, params.p);
        let tilde = chemin_lerner_norm(&tn, f64::INFINITY, params).unwrap();
        let plain = fields
            .iter()
            .map(|f| besov_norm(f, params, &p).value)
            .fold(0.0f64, f64::max);
        assert!(plain <= tilde + 1e-12);
    }

    #[test]
    fn bony_reconstruction_and_split_structure() {
        let (g, p) = part(64);
        let f = band_scalar(&g, 1, p.q_min() + 1, p.q_max() - 1);
        let gg = band_scalar(&g, 2, p.q_min() + 1, p.q_max() - 1);
        let (tfg, tgf, r) = bony_decompose(&f, &gg, &p).unwrap();
        let product = dealias(&f).mul_pointwise(&dealias(&gg));
        let resid = product
            .sub(&tfg.add(&tgf).add(&r))
            .max_abs();
        assert!(resid <= 1e-10 * (1.0 + product.max_abs()), "residual {resid}");
    }

    #[test]
    fn bony_single_block_goes_to_remainder() {
        let (g, p) = part(64);
        let f = Field::from_fn(g, |x| (4.0 * x[0]).sin()); // block q = 2 only
        let (tff, tff2, r) = bony_decompose(&f, &f, &p).unwrap();
        // S_{q-1} f vanishes on f's own block range
        assert!(tff.max_abs() < 1e-12);
        assert!(tff2.max_abs() < 1e-12);
        let sq = dealias(&f).mul_pointwise(&dealias(&f));
        assert!(r.sub(&sq).max_abs() < 1e-10);
    }

    #[test]
    fn bony_separated_blocks_dominated_by_low_high_term() {
        let (g, p) = part(128);
        // low field in block 0, high field in block 3: >= 3-octave separation
        let low = single_block_scalar(&g, 9, 0);
        let high = single_block_scalar(&g, 10, p.q_max());
        let (t_high_low, t_low_high, r) = bony_decompose(&high, &low, &p).unwrap();
        let product = dealias(&high).mul_pointwise(&dealias(&low));
        // T_{high} low: S_{q-1} low paired with Delta_q high == the product
        assert!(
            t_high_low.sub(&product).l2_norm() <= 1e-8 * product.l2_norm(),
            "low-high paraproduct should carry the separated product"
        );
        assert!(t_low_high.l2_norm() <= 1e-10 * product.l2_norm());
        assert!(r.l2_norm() <= 1e-10 * product.l2_norm());
    }

    #[test]
    fn bony_rejects_wide_spectrum() {
        let (g, p) = part(64);
        let f = Field::from_fn(g.clone(), |x| (20.0 * x[0]).sin()); // |xi| = 20 > covered
        let ok = band_scalar(&g, 3, p.q_min(), p.q_max());
        assert!(bony_decompose(&f, &ok, &p).is_err());
    }

    #[test]
    fn bernstein_ratios() {
        let (g, p) = part(64);
        // single mode at |xi| = 2^q: gradient ratio exactly 1
        let f = Field::from_fn(g.clone(), |x| (4.0 * x[0]).sin());
        let (_, grad_ratio) = check_bernstein(&f, 2, 2.0, 2.0, &p).unwrap();
        assert!((grad_ratio - 1.0).abs() < 1e-12);

        // p = l: embedding ratio is exactly 1 (no exponent factor)
        let (embed, _) = check_bernstein(&f, 2, 2.0, 2.0, &p).unwrap();
        assert!((embed - 1.0).abs() < 1e-12);

        // zero block errors
        assert!(check_bernstein(&f, 0, 2.0, 2.0, &p).is_err());
    }

    #[test]
    fn bernstein_rescaled_family_is_scale_invariant() {
        // f_q(x) = f(2^q x) for a block-0 profile: gradient ratio q-independent.
        let (g, p) = part(128);
        let profile = |x: [f64; 3]| (x[0]).sin() * (x[1]).cos();
        let mut ratios = Vec::new();
        for q in 0..3 {
            let scale = (2.0f64).powi(q);
            let f = Field::from_fn(g.clone(), move |x| profile([x[0] * scale, x[1] * scale, 0.0]));
            let (_, r) = check_bernstein(&f, q, 2.0, 2.0, &p).unwrap();
            ratios.push(r);
        }
        for r in &ratios[1..] {
            assert!(
                (r - ratios[0]).abs() < 1e-8,
                "gradient ratios {ratios:?} should be q-independent"
            );
        }
    }

    #[test]
    fn log_interpolation_gap_cases() {
        let (g, p) = part(64);
        // single-block field: LHS equals the weak norm, log factor >= 1
        let f = Field::from_fn(g.clone(), |x| (4.0 * (x[0] + x[1])).sin());
        let strong = besov_norm(&f, BesovParams::new(1.5, 4.0, 1.0), &p).value;
        let small = besov_norm(&f, BesovParams::new(-0.5, 4.0, f64::INFINITY), &p).value;
        let gap = log_interpolation_gap(&f, strong, small, 1.0, &p).unwrap();
        assert!(gap >= -1e-12);

        // zero field errors out
        let z = Field::zeros(g);
        assert!(log_interpolation_gap(&z, 1.0, 1.0, 1.0, &p).is_err());
    }

    #[test]
    fn log_interpolation_two_equal_blocks() {
        let (g, p) = part(128);
        // blocks 0 and 3, equal weighted norms m: B_{4,1} = 2m, B_{4,inf} = m.
        let a = Field::from_fn(g.clone(), |x| x[0].sin());
        let b = Field::from_fn(g.clone(), |x| (8.0 * x[1]).sin());
        let wa = (2.0f64).powf(0.5 * 0.0) * a.lp_norm(4.0);
        let wb = (2.0f64).powf(0.5 * 3.0) * b.lp_norm(4.0);
        let f = a.scale(1.0 / wa).add(&b.scale(1.0 / wb));
        let strong = besov_norm(&f, BesovParams::new(0.5, 4.0, 1.0), &p).value;
        let weak = besov_norm(&f, BesovParams::new(0.5, 4.0, f64::INFINITY), &p).value;
        assert!((strong - 2.0 * weak).abs() < 1e-9 * strong);
        let big = besov_norm(&f, BesovParams::new(1.5, 4.0, 1.0), &p).value;
        let small = besov_norm(&f, BesovParams::new(-0.5, 4.0, f64::INFINITY), &p).value;
        // the log factor must reach 2: (big + small)/weak >= e^2 - e
        let gap = log_interpolation_gap(&f, big, small, 1.0, &p).unwrap();
        assert!(gap >= -1e-10, "gap {gap}");
    }
}
