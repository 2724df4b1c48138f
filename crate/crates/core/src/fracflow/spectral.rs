use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Fourier multiplier |m|^{2s} on an M-point periodic grid, with integer
/// frequency index m and the mean mode annihilated.
#[derive(Clone)]
pub struct SpectralOperator {
    s: f64,
    multipliers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralOperator").field("s", &self.s).field("len", &self.multipliers.len()).finish()
    }
}

/// |m| for DFT index k of an M-point transform.
pub(crate) fn frequency(k: usize, m: usize) -> f64 {
    if k <= m / 2 {
        k as f64
    } else {
        (m - k) as f64
    }
}

impl SpectralOperator {
    pub fn new(s: f64, len: usize) -> Self {
        let mut planner = FftPlanner::new();
        let multipliers = (0..len)
            .map(|k| if k == 0 { 0.0 } else { frequency(k, len).powf(2.0 * s) })
            .collect();
        SpectralOperator { s, multipliers, forward: planner.plan_fft_forward(len), inverse: planner.plan_fft_inverse(len) }
    }

    pub fn order(&self) -> f64 {
        self.s
    }

    pub fn len(&self) -> usize {
        self.multipliers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multipliers.is_empty()
    }

    pub fn multipliers(&self) -> &[f64] {
        &self.multipliers
    }

    fn spectrum(&self, x: &[f64]) -> Vec<Complex<f64>> {
        let mut buf: Vec<Complex<f64>> = x.iter().map(|v| Complex::new(*v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    fn multiply(&self, x: &[f64], weight: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut buf = self.spectrum(x);
        for (k, c) in buf.iter_mut().enumerate() {
            *c *= weight(k);
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / x.len() as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// (−Δ)^s x.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.multiply(x, |k| self.multipliers[k])
    }

    /// (−Δ)^{−s} x on the mean-free part.
    pub fn apply_inverse(&self, x: &[f64]) -> Vec<f64> {
        self.multiply(x, |k| if k == 0 { 0.0 } else { 1.0 / self.multipliers[k] })
    }

    /// Metric |m|^{−2s} with the mean mode kept at weight 1.
    pub(crate) fn metric(&self, x: &[f64]) -> Vec<f64> {
        self.multiply(x, |k| if k == 0 { 1.0 } else { 1.0 / self.multipliers[k] })
    }

    /// Inverse of [`Self::metric`].
    pub(crate) fn metric_inverse(&self, x: &[f64]) -> Vec<f64> {
        self.multiply(x, |k| if k == 0 { 1.0 } else { self.multipliers[k] })
    }

    /// Σ_m w(|m|)|x̂_m|² / M.
    pub(crate) fn weighted_energy(&self, x: &[f64], exponent: f64) -> f64 {
        let m = x.len();
        self.spectrum(x)
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| frequency(k, m).powf(exponent) * c.norm_sqr())
            .sum::<f64>()
            / m as f64
    }
}
