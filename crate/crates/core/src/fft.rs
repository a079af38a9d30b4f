//! Thin multi-dimensional wrapper around `rustfft`. Forward transforms are
//! normalised by `1/n^d` so that coefficient `k = 0` is the mean and a pure
//! mode `exp(i<xi_k, x>)` has coefficient exactly 1.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub struct FftPlans {
    n: usize,
    d: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftPlans {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FftPlans(n={}, d={})", self.n, self.d)
    }
}

impl FftPlans {
    pub fn new(n: usize, d: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPlans {
            n,
            d,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    /// In-place forward transform of a full `n^d` array, 1/n^d normalised.
    pub fn forward(&self, data: &mut [Complex64]) {
        crate::threads::ensure_init();
        debug_assert_eq!(data.len(), self.n.pow(self.d as u32));
        for axis in 0..self.d {
            self.transform_axis(data, axis, &self.fwd);
        }
        let scale = 1.0 / data.len() as f64;
        data.par_iter_mut().for_each(|c| *c *= scale);
    }

    /// In-place inverse transform (no scaling; forward carries it all).
    pub fn inverse(&self, data: &mut [Complex64]) {
        crate::threads::ensure_init();
        debug_assert_eq!(data.len(), self.n.pow(self.d as u32));
        for axis in 0..self.d {
            self.transform_axis(data, axis, &self.inv);
        }
    }

    /// Apply the 1D plan along `axis` of the row-major `n^d` array. The last
    /// axis is contiguous and processed in parallel chunks; other axes go
    /// through a gather/scatter line buffer.
    fn transform_axis(&self, data: &mut [Complex64], axis: usize, plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        if axis == self.d - 1 {
            let scratch_len = plan.get_inplace_scratch_len();
            data.par_chunks_exact_mut(n).for_each(|line| {
                let mut scratch = vec![Complex64::default(); scratch_len];
                plan.process_with_scratch(line, &mut scratch);
            });
            return;
        }
        // Strided axis: stride between consecutive entries of a line.
        let stride = n.pow((self.d - 1 - axis) as u32);
        let lines = data.len() / n;
        let mut line = vec![Complex64::default(); n];
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        for li in 0..lines {
            // Decompose the line index into (block before axis, offset after).
            let base = (li / stride) * stride * n + (li % stride);
            for j in 0..n {
                line[j] = data[base + j * stride];
            }
            plan.process_with_scratch(&mut line, &mut scratch);
            for j in 0..n {
                data[base + j * stride] = line[j];
            }
        }
    }
}
