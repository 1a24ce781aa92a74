use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::Fourier;
use crate::params::WaveParameters;
use crate::profile::{construct_profile, default_half_length, GridSpec};

/// Refinement factor of the profile grid relative to the periodic grid.
const PROFILE_REFINEMENT: usize = 8;

/// Momentum `m` on the periodic grid `x_j = -L_dom/2 + j dx`, `j = 0..N`.
#[derive(Debug, Clone)]
pub struct MomentumField {
    fourier: Fourier,
    m: Vec<f64>,
    k: f64,
}

impl MomentumField {
    /// Checks `N = 2^p`, `k > 0`, finiteness and `m > 0`.
    pub fn new(m: Vec<f64>, l_dom: f64, k: f64) -> Result<Self> {
        let fourier = Fourier::new(m.len(), l_dom)?;
        Self::with_fourier(fourier, m, k)
    }

    pub(crate) fn with_fourier(fourier: Fourier, m: Vec<f64>, k: f64) -> Result<Self> {
        if m.len() != fourier.len() {
            return Err(Error::InvalidInput(format!("field has {} samples, grid has {}", m.len(), fourier.len())));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "k",
                message: format!("background must be positive, got {k}"),
            });
        }
        if let Some(v) = m.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample {v}")));
        }
        let min_m = m.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min_m > 0.0) {
            return Err(Error::PositivityLoss { t: 0.0, min_m });
        }
        Ok(Self { fourier, m, k })
    }

    /// `m = k` everywhere.
    pub fn constant(n: usize, l_dom: f64, k: f64) -> Result<Self> {
        Self::new(vec![k; n], l_dom, k)
    }

    pub fn m(&self) -> &[f64] {
        &self.m
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    pub fn l_dom(&self) -> f64 {
        self.fourier.length()
    }

    pub fn dx(&self) -> f64 {
        self.fourier.dx()
    }

    pub fn fourier(&self) -> &Fourier {
        &self.fourier
    }

    pub fn x(&self) -> Vec<f64> {
        grid_points(&self.fourier)
    }

    pub fn min_m(&self) -> f64 {
        self.m.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `u = (1 - d^2)^{-1} m`.
    pub fn u(&self) -> Vec<f64> {
        helmholtz_inverse(self)
    }

    /// Cyclic translate `m(x - s)`.
    pub fn shifted(&self, s: f64) -> Result<Self> {
        Self::with_fourier(self.fourier.clone(), self.fourier.shift(&self.m, s), self.k)
    }

    pub(crate) fn set_unchecked(&mut self, m: Vec<f64>) {
        self.m = m;
    }
}

pub(crate) fn grid_points(f: &Fourier) -> Vec<f64> {
    let dx = f.dx();
    let half = 0.5 * f.length();
    (0..f.len()).map(|j| -half + j as f64 * dx).collect()
}

/// `u = (1 - d^2/dx^2)^{-1} m`, dividing each coefficient by `1 + kappa_j^2`.
pub fn helmholtz_inverse(field: &MomentumField) -> Vec<f64> {
    field.fourier.helmholtz_inverse(&field.m)
}

/// Solitary wave sampled on a periodic grid, with its spectrum cached for
/// the orbital distance.
#[derive(Debug, Clone)]
pub struct WrappedProfile {
    params: WaveParameters,
    fourier: Fourier,
    phi: Vec<f64>,
    mu: Vec<f64>,
    mu_hat: Vec<Complex64>,
    seam_error: f64,
}

impl WrappedProfile {
    /// Samples the wave with crest at `x = 0` on `N` points of a period
    /// `l_dom` (default `4 L` with `L` the default profile half-length).
    ///
    /// The profile is integrated on a grid eight times finer and subsampled.
    pub fn new(params: &WaveParameters, n: usize, l_dom: Option<f64>) -> Result<Self> {
        let l_dom = l_dom.unwrap_or_else(|| default_l_dom(params));
        let fourier = Fourier::new(n, l_dom)?;
        let dx_fine = fourier.dx() / PROFILE_REFINEMENT as f64;
        let profile = construct_profile(params, &GridSpec::new(dx_fine, 0.5 * l_dom))?;
        let centre = profile.half_points();
        if centre != n / 2 * PROFILE_REFINEMENT {
            return Err(Error::InvalidInput(format!(
                "profile grid does not align with the periodic grid ({centre} half points)"
            )));
        }
        let pick = |v: &[f64]| -> Vec<f64> { (0..n).map(|j| v[j * PROFILE_REFINEMENT]).collect() };
        let phi = pick(profile.phi());
        let mu = pick(profile.mu());
        let seam_error = profile.tail_error();
        let mu_hat = fourier.forward(&mu);
        Ok(Self { params: *params, fourier, phi, mu, mu_hat, seam_error })
    }

    pub fn params(&self) -> &WaveParameters {
        &self.params
    }

    pub fn fourier(&self) -> &Fourier {
        &self.fourier
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub(crate) fn mu_hat(&self) -> &[Complex64] {
        &self.mu_hat
    }

    /// `|phi - k|` at the seam `x = -L_dom/2`.
    pub fn seam_error(&self) -> f64 {
        self.seam_error
    }

    pub fn x(&self) -> Vec<f64> {
        grid_points(&self.fourier)
    }

    pub fn dx(&self) -> f64 {
        self.fourier.dx()
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// The wave as a momentum field.
    pub fn field(&self) -> MomentumField {
        MomentumField { fourier: self.fourier.clone(), m: self.mu.clone(), k: self.params.k }
    }

    /// `||mu - k||_{H^1}`.
    pub fn h1_excess(&self) -> f64 {
        let k = self.params.k;
        let d: Vec<f64> = self.mu.iter().map(|v| v - k).collect();
        h1_norm(&self.fourier, &d)
    }
}

/// `4 L` with `L` the default profile half-length.
pub fn default_l_dom(params: &WaveParameters) -> f64 {
    4.0 * default_half_length(params)
}

/// `||f||_{H^1}^2 = (L/N^2) sum (1 + kappa_j^2) |f_j|^2`.
pub(crate) fn h1_norm_sq_spectrum(f: &Fourier, spec: &[Complex64]) -> f64 {
    let scale = f.length() / (f.len() as f64 * f.len() as f64);
    spec.iter().zip(f.wavenumbers()).map(|(z, kj)| (1.0 + kj * kj) * z.norm_sqr()).sum::<f64>() * scale
}

/// `||f||_{H^1}` by Parseval.
pub fn h1_norm(f: &Fourier, values: &[f64]) -> f64 {
    h1_norm_sq_spectrum(f, &f.forward(values)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceReport {
    /// `int (m - k)^2 + m_x^2`.
    pub h1_side: f64,
    /// `int (u - k)^2 + 3 u_x^2 + 3 u_xx^2 + u_xxx^2`.
    pub h3_side: f64,
    pub relative_mismatch: f64,
    /// `|m_{N/2}| / max|m_j - k delta_j0|`, the discarded Nyquist coefficient.
    pub nyquist_fraction: f64,
}

/// Compares `||m - k||_{H^1}^2` with the `H^3`-type form of `u - k`,
/// both evaluated in physical space with spectral derivatives.
///
/// The Nyquist mode carries no derivative and is removed first.
pub fn h1_h3_equivalence_check(field: &MomentumField) -> EquivalenceReport {
    let f = &field.fourier;
    let n = f.len();
    let k = field.k;
    let mut spec = f.forward(&field.m.iter().map(|v| v - k).collect::<Vec<_>>());
    let peak = spec.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let nyquist_fraction = if peak > 0.0 { spec[n / 2].norm() / peak } else { 0.0 };
    spec[n / 2] = Complex64::new(0.0, 0.0);

    let derive = |s: &[Complex64], order: u32| -> Vec<f64> {
        let mut out = s.to_vec();
        for (z, &kj) in out.iter_mut().zip(f.wavenumbers()) {
            *z *= Complex64::new(0.0, kj).powu(order);
        }
        f.inverse(out)
    };
    let u_spec: Vec<Complex64> = spec.iter().zip(f.wavenumbers()).map(|(z, kj)| z / (1.0 + kj * kj)).collect();
    let sum_sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>() * f.dx();

    let h1_side = sum_sq(&derive(&spec, 0)) + sum_sq(&derive(&spec, 1));
    let h3_side = sum_sq(&derive(&u_spec, 0))
        + 3.0 * sum_sq(&derive(&u_spec, 1))
        + 3.0 * sum_sq(&derive(&u_spec, 2))
        + sum_sq(&derive(&u_spec, 3));
    let relative_mismatch = if h1_side > 0.0 { (h1_side - h3_side).abs() / h1_side } else { h3_side.abs() };
    EquivalenceReport { h1_side, h3_side, relative_mismatch, nyquist_fraction }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_are_fixed_points() {
        let f = MomentumField::constant(64, 10.0, 0.4).unwrap();
        assert!(f.u().iter().all(|v| (v - 0.4).abs() < 1e-15));
    }

    #[test]
    fn single_mode_inverse() {
        let (n, l, k) = (64, 10.0, 0.4);
        let q = 2.0 * std::f64::consts::PI / l;
        let x: Vec<f64> = (0..n).map(|j| -0.5 * l + j as f64 * l / n as f64).collect();
        let m: Vec<f64> = x.iter().map(|x| k + (q * x).cos() * 0.1).collect();
        let f = MomentumField::new(m, l, k).unwrap();
        for (u, x) in f.u().iter().zip(&x) {
            assert!((u - (k + 0.1 * (q * x).cos() / (1.0 + q * q))).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_fields() {
        assert!(MomentumField::new(vec![1.0; 100], 10.0, 1.0).is_err());
        assert!(matches!(MomentumField::new(vec![-1.0; 64], 10.0, 1.0), Err(Error::PositivityLoss { .. })));
        assert!(MomentumField::new(vec![1.0; 64], 10.0, 0.0).is_err());
    }

    #[test]
    fn wrapped_wave_matches_profile() {
        let p = WaveParameters::new(1.0, 0.4).unwrap();
        let w = WrappedProfile::new(&p, 4096, None).unwrap();
        assert_eq!(w.len(), 4096);
        assert!(w.seam_error() < 1e-12);
        let u = w.field().u();
        let err = u.iter().zip(w.phi()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
        let crest = w.phi().iter().copied().fold(0.0, f64::max);
        assert_eq!(w.phi()[2048], crest);
    }

    #[test]
    fn equivalence_single_mode() {
        let (n, l, k) = (128, 20.0, 0.5);
        let q = 3.0 * 2.0 * std::f64::consts::PI / l;
        let m: Vec<f64> = (0..n).map(|j| k + 0.2 * (q * j as f64 * l / n as f64).cos()).collect();
        let r = h1_h3_equivalence_check(&MomentumField::new(m, l, k).unwrap());
        let per_mode = (1.0 + 3.0 * q * q + 3.0 * q.powi(4) + q.powi(6)) / (1.0 + q * q).powi(2);
        assert!((per_mode - (1.0 + q * q)).abs() < 1e-12);
        assert!(r.relative_mismatch < 1e-13, "{r:?}");
    }

    #[test]
    fn equivalence_on_wave() {
        let p = WaveParameters::new(1.0, 0.4).unwrap();
        let r = h1_h3_equivalence_check(&WrappedProfile::new(&p, 1024, None).unwrap().field());
        assert!(r.relative_mismatch < 1e-12, "{r:?}");
    }
}
