use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::field::{h1_norm, MomentumField, WrappedProfile};

/// Centre and width of the Gaussian bump.
const GAUSSIAN_CENTRE: f64 = 1.0;
const GAUSSIAN_WIDTH: f64 = 1.0;
/// Highest angular wavenumber of band-limited noise.
const NOISE_BAND: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    /// `exp(-(x - 1)^2 / 2)`.
    #[default]
    Gaussian,
    /// `mu_xi`, the tangent to the translation orbit.
    TranslationMode,
    /// Random Fourier coefficients with `0 < |kappa| <= 2`.
    BandlimitedNoise,
}

impl PerturbationKind {
    pub const ALL: [Self; 3] = [Self::Gaussian, Self::TranslationMode, Self::BandlimitedNoise];

    pub fn name(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::TranslationMode => "translation_mode",
            Self::BandlimitedNoise => "bandlimited_noise",
        }
    }
}

impl std::str::FromStr for PerturbationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::InvalidParameter {
            field: "perturbation",
            message: format!("unknown kind {s:?} (expected gaussian, translation_mode or bandlimited_noise)"),
        })
    }
}

impl std::fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Unit-free shape of the perturbation before normalization.
fn shape(profile: &WrappedProfile, kind: PerturbationKind, seed: u64) -> Vec<f64> {
    let f = profile.fourier();
    match kind {
        PerturbationKind::Gaussian => profile
            .x()
            .iter()
            .map(|x| {
                let s = (x - GAUSSIAN_CENTRE) / GAUSSIAN_WIDTH;
                (-0.5 * s * s).exp()
            })
            .collect(),
        PerturbationKind::TranslationMode => f.derivative(profile.mu()),
        PerturbationKind::BandlimitedNoise => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = f.len();
            let mut spec = vec![Complex64::new(0.0, 0.0); n];
            for j in 1..n / 2 {
                if f.wavenumbers()[j] > NOISE_BAND {
                    break;
                }
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                spec[j] = Complex64::new(re, im);
                spec[n - j] = spec[j].conj();
            }
            f.inverse(spec)
        }
    }
}

/// `m_0 = mu + delta m` with `||delta m||_{H^1} = eps`.
///
/// `seed` only affects band-limited noise.
pub fn make_perturbation(
    profile: &WrappedProfile,
    kind: PerturbationKind,
    eps: f64,
    seed: u64,
) -> Result<MomentumField> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter { field: "eps", message: format!("must be finite and >= 0, got {eps}") });
    }
    if eps == 0.0 {
        return Ok(profile.field());
    }
    let delta = shape(profile, kind, seed);
    let norm = h1_norm(profile.fourier(), &delta);
    if !(norm > 0.0) {
        return Err(Error::InvalidInput(format!("{kind} perturbation vanishes on this grid")));
    }
    let scale = eps / norm;
    let m: Vec<f64> = profile.mu().iter().zip(&delta).map(|(m, d)| m + scale * d).collect();
    MomentumField::new(m, profile.fourier().length(), profile.params().k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::WaveParameters;

    fn wave() -> WrappedProfile {
        WrappedProfile::new(&WaveParameters::new(1.0, 0.4).unwrap(), 1024, None).unwrap()
    }

    #[test]
    fn zero_eps_is_the_wave() {
        let w = wave();
        let f = make_perturbation(&w, PerturbationKind::Gaussian, 0.0, 0).unwrap();
        assert_eq!(f.m(), w.mu());
    }

    #[test]
    fn exact_h1_size() {
        let w = wave();
        for kind in PerturbationKind::ALL {
            let f = make_perturbation(&w, kind, 1e-3, 7).unwrap();
            let d: Vec<f64> = f.m().iter().zip(w.mu()).map(|(a, b)| a - b).collect();
            let n = h1_norm(w.fourier(), &d);
            assert!((n - 1e-3).abs() < 1e-9, "{kind} {n}");
        }
    }

    #[test]
    fn noise_is_seeded() {
        let w = wave();
        let a = make_perturbation(&w, PerturbationKind::BandlimitedNoise, 1e-3, 1).unwrap();
        let b = make_perturbation(&w, PerturbationKind::BandlimitedNoise, 1e-3, 1).unwrap();
        let c = make_perturbation(&w, PerturbationKind::BandlimitedNoise, 1e-3, 2).unwrap();
        assert_eq!(a.m(), b.m());
        assert_ne!(a.m(), c.m());
    }

    #[test]
    fn positivity_is_enforced() {
        let w = wave();
        let r = make_perturbation(&w, PerturbationKind::TranslationMode, 50.0, 0);
        assert!(matches!(r, Err(Error::PositivityLoss { .. })), "{r:?}");
    }

    #[test]
    fn kind_round_trip() {
        for kind in PerturbationKind::ALL {
            assert_eq!(kind.name().parse::<PerturbationKind>().unwrap(), kind);
        }
        assert!("sine".parse::<PerturbationKind>().is_err());
    }
}
