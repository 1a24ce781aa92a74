use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::field::{h1_norm_sq_spectrum, MomentumField, WrappedProfile};

/// Newton iterations of the sub-grid shift refinement.
const NEWTON_ITERATIONS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitalDistance {
    /// `min_r ||m - mu(. - r)||_{H^1}`.
    pub d: f64,
    /// Minimizing shift in `(-L_dom/2, L_dom/2]`.
    pub r_star: f64,
}

/// Weighted cross-spectrum `(1 + kappa^2) m_hat conj(mu_hat)`.
fn cross_spectrum(m_hat: &[Complex64], mu_hat: &[Complex64], kappa: &[f64]) -> Vec<Complex64> {
    m_hat.iter().zip(mu_hat).zip(kappa).map(|((a, b), kj)| a * b.conj() * (1.0 + kj * kj)).collect()
}

/// `C(r) = Re sum w_j m_j conj(mu_j) e^{i kappa_j r}` and its first two derivatives.
fn correlation(cross: &[Complex64], kappa: &[f64], r: f64) -> (f64, f64, f64) {
    let (mut c0, mut c1, mut c2) = (0.0, 0.0, 0.0);
    for (z, &kj) in cross.iter().zip(kappa) {
        let t = z * Complex64::from_polar(1.0, kj * r);
        c0 += t.re;
        c1 -= kj * t.im;
        c2 -= kj * kj * t.re;
    }
    (c0, c1, c2)
}

/// H^1 distance from `m` to the translation orbit of the wrapped wave.
///
/// All grid shifts are scanned at once through the cross-correlation; the
/// best one is refined by a parabola through `d^2` and then by Newton steps
/// on the correlation. The distance itself is evaluated directly at the
/// refined shift.
pub fn orbital_distance(field: &MomentumField, profile: &WrappedProfile) -> Result<OrbitalDistance> {
    let f = field.fourier();
    if f.len() != profile.len() || (f.length() - profile.fourier().length()).abs() > 1e-12 * f.length() {
        return Err(Error::InvalidInput("field and wrapped profile live on different grids".into()));
    }
    let n = f.len();
    let dx = f.dx();
    let kappa = f.wavenumbers();
    let m_hat = f.forward(field.m());
    let cross = cross_spectrum(&m_hat, profile.mu_hat(), kappa);

    // corr[s] = sum_j cross_j e^{2 pi i j s / N} = C(s dx).
    let mut corr = cross.clone();
    f.inverse_unnormalized(&mut corr);
    let best = (0..n).max_by(|&a, &b| corr[a].re.total_cmp(&corr[b].re)).unwrap_or(0);
    let (cm, c0, cp) = (corr[(best + n - 1) % n].re, corr[best].re, corr[(best + 1) % n].re);
    let curvature = cm - 2.0 * c0 + cp;
    let offset = if curvature < 0.0 { (0.5 * (cm - cp) / curvature).clamp(-1.0, 1.0) } else { 0.0 };
    let s = if best > n / 2 { best as f64 - n as f64 } else { best as f64 };
    let mut r = (s + offset) * dx;

    for _ in 0..NEWTON_ITERATIONS {
        let (_, c1, c2) = correlation(&cross, kappa, r);
        if !(c2 < 0.0) {
            break;
        }
        let step = -c1 / c2;
        if !(step.abs() <= dx) {
            break;
        }
        r += step;
        if step.abs() < 1e-15 * f.length() {
            break;
        }
    }
    let half = 0.5 * f.length();
    if r > half {
        r -= f.length();
    } else if r <= -half {
        r += f.length();
    }

    // The Nyquist coefficient is translated by its real part, as in `Fourier::shift`.
    let diff: Vec<Complex64> = (0..n)
        .map(|j| {
            let phase = kappa[j] * r;
            let rot = if j == n / 2 { Complex64::new(phase.cos(), 0.0) } else { Complex64::from_polar(1.0, -phase) };
            m_hat[j] - profile.mu_hat()[j] * rot
        })
        .collect();
    let d = h1_norm_sq_spectrum(f, &diff).max(0.0).sqrt();
    Ok(OrbitalDistance { d, r_star: r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::WaveParameters;

    fn wave() -> WrappedProfile {
        WrappedProfile::new(&WaveParameters::new(1.0, 0.4).unwrap(), 2048, None).unwrap()
    }

    #[test]
    fn wave_is_at_zero_distance() {
        let w = wave();
        let r = orbital_distance(&w.field(), &w).unwrap();
        assert!(r.d < 1e-12 && r.r_star.abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn recovers_subgrid_translate() {
        let w = wave();
        for s in [1.7, -3.25, 0.013] {
            let shifted = w.field().shifted(s).unwrap();
            let r = orbital_distance(&shifted, &w).unwrap();
            assert!((r.r_star - s).abs() < w.dx() / 10.0, "{s} {r:?}");
            assert!(r.d < 1e-8 * w.h1_excess(), "{r:?}");
        }
    }

    #[test]
    fn distance_is_bounded_by_perturbation() {
        let w = wave();
        let x = w.x();
        let bump: Vec<f64> = x.iter().map(|x| (-(x - 1.0) * (x - 1.0)).exp()).collect();
        let norm = crate::evolution::field::h1_norm(w.fourier(), &bump);
        let eps = 1e-3;
        let m: Vec<f64> = w.mu().iter().zip(&bump).map(|(m, b)| m + eps * b / norm).collect();
        let r = orbital_distance(&MomentumField::new(m, w.fourier().length(), 0.4).unwrap(), &w).unwrap();
        assert!(r.d > 0.0 && r.d <= eps * (1.0 + 1e-9), "{r:?}");
    }
}
