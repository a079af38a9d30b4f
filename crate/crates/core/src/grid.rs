//! Periodic torus discretisation: `n` points per axis on `[0, L)^d` with
//! wavenumbers `xi = (2 pi / L) k`, `k` in `[-n/2, n/2)` per axis.

use crate::error::{Error, Result};
use crate::fft::FftPlans;
use std::sync::Arc;

pub struct Grid {
    d: usize,
    n: usize,
    l: f64,
    /// Per-axis wavenumber table in FFT storage order.
    freq: Vec<f64>,
    plans: FftPlans,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Grid(d={}, n={}, l={})", self.d, self.n, self.l)
    }
}

impl Grid {
    /// Build a grid. `n` must be a power of two >= 8, `d` in {2, 3}, `l > 0`.
    pub fn new(d: usize, n: usize, l: f64) -> Result<Arc<Grid>> {
        if d != 2 && d != 3 {
            return Err(Error::config(format!("dimension must be 2 or 3, got {d}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::config(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::config(format!("box size must be positive, got {l}")));
        }
        let step = 2.0 * std::f64::consts::PI / l;
        let freq = (0..n)
            .map(|i| {
                let k = if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
                step * k as f64
            })
            .collect();
        Ok(Arc::new(Grid {
            d,
            n,
            l,
            freq,
            plans: FftPlans::new(n, d),
        }))
    }

    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn points_per_axis(&self) -> usize {
        self.n
    }
    pub fn box_size(&self) -> f64 {
        self.l
    }
    /// Total number of grid points / Fourier modes.
    pub fn modes(&self) -> usize {
        self.n.pow(self.d as u32)
    }
    pub fn cell_volume(&self) -> f64 {
        (self.l / self.n as f64).powi(self.d as i32)
    }
    pub fn volume(&self) -> f64 {
        self.l.powi(self.d as i32)
    }
    /// Smallest nonzero wavenumber magnitude, `2 pi / L`.
    pub fn min_wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.l
    }
    /// 2/3-rule cutoff: modes with any `|k_i| > n/3` are discarded.
    pub fn dealias_cut(&self) -> usize {
        self.n / 3
    }
    /// Largest wavenumber magnitude on the inscribed sphere of the kept band.
    pub fn dealias_wavenumber(&self) -> f64 {
        self.min_wavenumber() * self.dealias_cut() as f64
    }
    pub(crate) fn plans(&self) -> &FftPlans {
        &self.plans
    }

    /// Integer mode indices of the flat index, each in `[-n/2, n/2)`.
    #[inline]
    pub fn mode_indices(&self, flat: usize) -> [i64; 3] {
        let n = self.n;
        let to_signed = |i: usize| if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
        match self.d {
            2 => [to_signed(flat / n), to_signed(flat % n), 0],
            _ => [
                to_signed(flat / (n * n)),
                to_signed((flat / n) % n),
                to_signed(flat % n),
            ],
        }
    }

    /// Wavenumber vector of the flat index (third component 0 when d = 2).
    #[inline]
    pub fn wavenumber(&self, flat: usize) -> [f64; 3] {
        let n = self.n;
        match self.d {
            2 => [self.freq[flat / n], self.freq[flat % n], 0.0],
            _ => [
                self.freq[flat / (n * n)],
                self.freq[(flat / n) % n],
                self.freq[flat % n],
            ],
        }
    }

    #[inline]
    pub fn wavenumber_norm_sq(&self, flat: usize) -> f64 {
        let xi = self.wavenumber(flat);
        xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]
    }

    /// Physical coordinates of a flat grid index.
    #[inline]
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let n = self.n;
        let h = self.l / n as f64;
        match self.d {
            2 => [(flat / n) as f64 * h, (flat % n) as f64 * h, 0.0],
            _ => [
                (flat / (n * n)) as f64 * h,
                ((flat / n) % n) as f64 * h,
                (flat % n) as f64 * h,
            ],
        }
    }

    pub fn same_grid(&self, other: &Grid) -> bool {
        self.d == other.d && self.n == other.n && self.l == other.l
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumbers_are_integers_for_2pi_box() {
        // (2, 8, 2pi): xi components run over {-4,...,3}.
        let g = Grid::new(2, 8, 2.0 * std::f64::consts::PI).unwrap();
        let mut seen: Vec<i64> = (0..8).map(|i| g.wavenumber(i * 8)[0].round() as i64).collect();
        seen.sort_unstable();
        assert_eq!(seen, vec![-4, -3, -2, -1, 0, 1, 2, 3]);
        for flat in 0..g.modes() {
            let xi = g.wavenumber(flat);
            let k = g.mode_indices(flat);
            assert!((xi[0] - k[0] as f64).abs() < 1e-14);
            assert!((xi[1] - k[1] as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn wavenumber_step_is_2pi_over_l() {
        let g = Grid::new(3, 16, 1.0).unwrap();
        let step = g.wavenumber(1)[2];
        assert!((step - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(Grid::new(2, 7, 1.0).is_err());
        assert!(Grid::new(4, 16, 1.0).is_err());
        assert!(Grid::new(2, 4, 1.0).is_err());
        assert!(Grid::new(2, 16, -1.0).is_err());
    }
}
