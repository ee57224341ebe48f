//! Cyclic 2-D convolution on n × n grids (row-major, index k·n + j).

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::spectral::C64;

#[derive(Clone)]
pub struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn transform(&self, data: &mut [C64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        assert_eq!(data.len(), n * n);
        let mut scratch = vec![C64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        transpose(data, n);
        plan.process_with_scratch(data, &mut scratch);
        transpose(data, n);
    }

    /// Unnormalised forward transform.
    pub fn forward(&self, data: &mut [C64]) {
        self.transform(data, &self.forward);
    }

    /// Inverse transform including the 1/n² factor.
    pub fn inverse(&self, data: &mut [C64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / (self.n * self.n) as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    /// (k ∗ f)_i = Σ_j k_{i−j} f_j cyclically, given k̂ = forward(k).
    pub fn convolve(&self, kernel_hat: &[C64], field: &[C64]) -> Vec<C64> {
        let mut buf = field.to_vec();
        self.forward(&mut buf);
        for (b, k) in buf.iter_mut().zip(kernel_hat) {
            *b *= k;
        }
        self.inverse(&mut buf);
        buf
    }
}

fn transpose(data: &mut [C64], n: usize) {
    for k in 0..n {
        for j in (k + 1)..n {
            data.swap(k * n + j, j * n + k);
        }
    }
}
