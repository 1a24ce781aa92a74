//! Real-field spectral operations on a uniform periodic grid.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Cached forward/inverse transforms for `n` points on a period `length`.
#[derive(Clone)]
pub struct Fourier {
    n: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("n", &self.n).field("length", &self.length).finish()
    }
}

impl Fourier {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter {
                field: "n",
                message: format!("must be a power of two >= 4, got {n}"),
            });
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter { field: "l_dom", message: format!("must be positive, got {length}") });
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let base = 2.0 * std::f64::consts::PI / length;
        let wavenumbers =
            (0..n).map(|j| if j <= n / 2 { j as f64 * base } else { (j as f64 - n as f64) * base }).collect();
        Ok(Self { n, length, forward, inverse, wavenumbers })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Angular wavenumbers in FFT order; the Nyquist entry is positive.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn forward(&self, f: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(f.len(), self.n);
        let mut buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse transform including the `1/n` normalization; returns the real part.
    pub fn inverse(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.inverse.process(&mut spec);
        let scale = 1.0 / self.n as f64;
        spec.iter().map(|z| z.re * scale).collect()
    }

    /// In-place inverse transform without normalization or projection.
    pub fn inverse_unnormalized(&self, spec: &mut [Complex64]) {
        self.inverse.process(spec);
    }

    /// Multiplies by `i kappa_j` with the Nyquist mode removed.
    pub fn differentiate_spectrum(&self, spec: &mut [Complex64]) {
        for (z, &kj) in spec.iter_mut().zip(&self.wavenumbers) {
            *z *= Complex64::new(0.0, kj);
        }
        spec[self.n / 2] = Complex64::new(0.0, 0.0);
    }

    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        let mut spec = self.forward(f);
        self.differentiate_spectrum(&mut spec);
        self.inverse(spec)
    }

    /// `(1 - d^2/dx^2)^{-1} f`.
    pub fn helmholtz_inverse(&self, f: &[f64]) -> Vec<f64> {
        let mut spec = self.forward(f);
        for (z, &kj) in spec.iter_mut().zip(&self.wavenumbers) {
            *z /= 1.0 + kj * kj;
        }
        self.inverse(spec)
    }

    /// Cyclic shift by an arbitrary distance: returns `f(x - s)`.
    pub fn shift(&self, f: &[f64], s: f64) -> Vec<f64> {
        let mut spec = self.forward(f);
        self.shift_spectrum(&mut spec, s);
        self.inverse(spec)
    }

    pub fn shift_spectrum(&self, spec: &mut [Complex64], s: f64) {
        for (z, &kj) in spec.iter_mut().zip(&self.wavenumbers) {
            *z *= Complex64::from_polar(1.0, -kj * s);
        }
        // Keep the Nyquist coefficient real so the shifted field stays real.
        let nyq = self.n / 2;
        spec[nyq] = Complex64::new(spec[nyq].re, 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_single_mode() {
        let n = 64;
        let l = 10.0;
        let f = Fourier::new(n, l).unwrap();
        let kk = 2.0 * std::f64::consts::PI * 3.0 / l;
        let x: Vec<f64> = (0..n).map(|i| i as f64 * l / n as f64).collect();
        let s: Vec<f64> = x.iter().map(|x| (kk * x).sin()).collect();
        let d = f.derivative(&s);
        for (xi, di) in x.iter().zip(&d) {
            assert!((di - kk * (kk * xi).cos()).abs() < 1e-12);
        }
        let u = f.helmholtz_inverse(&s);
        for (xi, ui) in x.iter().zip(&u) {
            assert!((ui - (kk * xi).sin() / (1.0 + kk * kk)).abs() < 1e-14);
        }
    }

    #[test]
    fn grid_shift_is_exact_roll() {
        let n = 32;
        let f = Fourier::new(n, 8.0).unwrap();
        let v: Vec<f64> = (0..n).map(|i| (-((i as f64 - 10.0) / 3.0).powi(2)).exp()).collect();
        let w = f.shift(&v, 3.0 * f.dx());
        for i in 0..n {
            assert!((w[(i + 3) % n] - v[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Fourier::new(100, 1.0).is_err());
        assert!(Fourier::new(64, 0.0).is_err());
    }
}
