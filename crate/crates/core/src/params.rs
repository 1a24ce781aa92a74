//! Wave parameters `(c, k)` and the constants derived from them.
//!
//! A smooth solitary wave on the background `k` travelling at speed `c`
//! exists iff `c > 0` and `sqrt(c)/3 < k < sqrt(3c)/3`. Every other quantity
//! used downstream (profile constants, Lagrange multipliers, the essential
//! spectrum edge) is a closed-form function of the pair.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Validated wave parameters plus all derived constants.
///
/// Derived constants are evaluated once, in the order of the fields below,
/// from `c`, `k` and the shared subexpression `d = c - k^2`. Keeping a fixed
/// expression order makes outputs bit-reproducible on a given platform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParameters {
    /// Wave speed.
    pub c: f64,
    /// Background level of `u` (and of `m`) at infinity.
    pub k: f64,
    /// Profile constant `a = k (c - k^2)`.
    pub a: f64,
    /// Level-set constant `E = k^2 (2c - 3k^2)`.
    pub energy: f64,
    /// Crest value `phi_1 = sqrt(2(c - k^2)) - k`.
    pub phi1: f64,
    /// Rescale factor `beta = (c - k^2) / (4k)`.
    pub beta: f64,
    /// Rescaled constant `h = 8k^2 / (c - k^2)`.
    pub h: f64,
    /// Rescaled crest `4k (sqrt(2(c - k^2)) - 2k) / (c - k^2)`.
    pub phi0_rescaled: f64,
    /// Lagrange multiplier of `F1`.
    pub omega1: f64,
    /// Lagrange multiplier of `F2`.
    pub omega2: f64,
    /// Supremum of `mu`.
    pub mu_sup: f64,
    /// Bottom of the essential spectrum of the Hessian operator.
    pub ess_edge: f64,
    /// Exponential decay rate of `phi - k`.
    pub kappa: f64,
}

/// Lower end `sqrt(c)/3` of the admissible `k` window.
pub fn window_lower(c: f64) -> f64 {
    c.sqrt() / 3.0
}

/// Upper end `sqrt(3c)/3` of the admissible `k` window.
pub fn window_upper(c: f64) -> f64 {
    (3.0 * c).sqrt() / 3.0
}

impl WaveParameters {
    /// Validates `(c, k)` and computes the derived constants.
    pub fn new(c: f64, k: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter {
                field: "c",
                message: format!("wave speed must be positive and finite, got {c}"),
            });
        }
        if !k.is_finite() {
            return Err(Error::InvalidParameter { field: "k", message: format!("background must be finite, got {k}") });
        }
        let (lo, hi) = (window_lower(c), window_upper(c));
        // Sharp window: 9k^2 > c and 3k^2 < c, both strict.
        if !(k > 0.0 && 9.0 * k * k > c && k > lo) {
            return Err(Error::InvalidParameter {
                field: "k",
                message: format!(
                    "k = {k} violates the lower bound sqrt(c)/3 = {lo:.6} \
                     (admissible window is the open interval (sqrt(c)/3, sqrt(3c)/3) = ({lo:.6}, {hi:.6}))"
                ),
            });
        }
        if 3.0 * k * k >= c || k >= hi {
            return Err(Error::InvalidParameter {
                field: "k",
                message: format!(
                    "k = {k} violates the upper bound sqrt(3c)/3 = {hi:.6} \
                     (admissible window is the open interval (sqrt(c)/3, sqrt(3c)/3) = ({lo:.6}, {hi:.6}))"
                ),
            });
        }

        let k2 = k * k;
        let d = c - k2;
        let sqrt_2d = (2.0 * d).sqrt();
        let a = k * d;
        let energy = k2 * (2.0 * c - 3.0 * k2);
        let phi1 = sqrt_2d - k;
        let beta = d / (4.0 * k);
        let h = 8.0 * k2 / d;
        let phi0_rescaled = 4.0 * k * (sqrt_2d - 2.0 * k) / d;
        let omega1 = (c - 9.0 * k2) / (4.0 * k2 * k2 * d);
        let omega2 = -(c + 3.0 * k2) / (2.0 * k2 * d);
        let sqrt_d = d.sqrt();
        let mu_sup = k * sqrt_d / (2.0 * std::f64::consts::SQRT_2 * k - sqrt_d);
        let ess_edge = (c - 3.0 * k2) / (k2 * k2 * k * d);
        let kappa = ((c - 3.0 * k2) / d).sqrt();

        Ok(Self { c, k, a, energy, phi1, beta, h, phi0_rescaled, omega1, omega2, mu_sup, ess_edge, kappa })
    }

    /// `c - k^2`, positive on the whole window.
    pub fn d(&self) -> f64 {
        self.c - self.k * self.k
    }

    /// Coefficient `(c + 3k^2) / (2k^2 (c - k^2))` of `calF` in the
    /// decomposition `Lambda = calG - coeff * calF`; equals `-omega2`.
    pub fn calf_coefficient(&self) -> f64 {
        -self.omega2
    }

    /// Distance of `k` to the nearer window endpoint, in units of `sqrt(c)`.
    pub fn window_margin(&self) -> f64 {
        let lo = window_lower(self.c);
        let hi = window_upper(self.c);
        (self.k - lo).min(hi - self.k) / self.c.sqrt()
    }

    /// Parameters `(lambda^2 c, lambda k)` of the scaled wave.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter {
                field: "lambda",
                message: format!("scale factor must be positive, got {lambda}"),
            });
        }
        Self::new(lambda * lambda * self.c, lambda * self.k)
    }

    /// `x = 4k s / (c - k^2)` for `s = phi - k`, i.e. the rescaled amplitude
    /// `(phi - k) / beta`.
    #[inline]
    pub(crate) fn rescaled_amplitude(&self, s: f64) -> f64 {
        s / self.beta
    }

    /// `psi^2` on the homoclinic level curve as a function of the excess
    /// `s = phi - k`, written without cancellation near `s = 0`.
    ///
    /// `psi^2 = s^2 (1 - h / (1 + sqrt(1 - s/beta))^2)`.
    #[inline]
    pub(crate) fn psi2_from_excess(&self, s: f64) -> Option<f64> {
        let x = self.rescaled_amplitude(s);
        if !(x <= 1.0) {
            return None;
        }
        let r = (1.0 - x).sqrt();
        let t = 1.0 + r;
        Some(s * s * (1.0 - self.h / (t * t)))
    }

    /// `mu` as a function of `phi` (closed-form relation between the
    /// momentum and velocity profiles): `mu = k / sqrt(1 - (phi - k)/beta)`.
    #[inline]
    pub fn mu_of_phi(&self, phi: f64) -> Option<f64> {
        let x = self.rescaled_amplitude(phi - self.k);
        if x < 1.0 {
            Some(self.k / (1.0 - x).sqrt())
        } else {
            None
        }
    }
}

/// Validates `(c, k)`; alias for [`WaveParameters::new`].
pub fn validate_parameters(c: f64, k: f64) -> Result<WaveParameters> {
    WaveParameters::new(c, k)
}

/// `psi^2 = phi^2 - c + sqrt((c - k^2)(c + 3k^2 - 4k phi))` on the "+" branch
/// of the level curve through the saddle `(k, 0)`.
///
/// Fails when the radicand `c + 3k^2 - 4k phi` is negative.
pub fn level_curve_psi2(phi: f64, params: &WaveParameters) -> Result<f64> {
    let k = params.k;
    let radicand = params.c + 3.0 * k * k - 4.0 * k * phi;
    if !(radicand >= 0.0) {
        return Err(Error::Domain {
            context: "level_curve_psi2",
            message: format!("radicand c + 3k^2 - 4k phi = {radicand:e} is negative at phi = {phi}"),
        });
    }
    params.psi2_from_excess(phi - k).ok_or_else(|| Error::Domain {
        context: "level_curve_psi2",
        message: format!("phi = {phi} is outside the level curve domain"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Values frozen from a 30-digit evaluation of the closed forms.
    #[test]
    fn derived_constants_at_reference_point() {
        let p = WaveParameters::new(1.0, 0.4).unwrap();
        assert_relative_eq!(p.phi1, 0.896_148_139_681_572, epsilon = 1e-15);
        assert_relative_eq!(p.a, 0.336, epsilon = 1e-15);
        assert_relative_eq!(p.energy, 0.2432, epsilon = 1e-15);
        assert_relative_eq!(p.beta, 0.525, epsilon = 1e-15);
        assert_relative_eq!(p.h, 1.523_809_523_809_523_8, epsilon = 1e-14);
        assert_relative_eq!(p.phi0_rescaled, 0.945_044_075_583_946_8, epsilon = 1e-14);
        assert_relative_eq!(p.omega1, -5.115_327_380_952_381, epsilon = 1e-13);
        assert_relative_eq!(p.omega2, -5.505_952_380_952_381, epsilon = 1e-13);
        assert_relative_eq!(p.mu_sup, 1.706_289_556_132_052_4, epsilon = 1e-13);
        assert_relative_eq!(p.ess_edge, 60.453_869_047_619_05, epsilon = 1e-11);
        assert_relative_eq!(p.kappa, 0.786_795_792_469_443_1, epsilon = 1e-14);
    }

    #[test]
    fn crest_matches_reported_value() {
        let p = WaveParameters::new(1.0, 0.4).unwrap();
        assert!((p.phi1 - 0.896148140).abs() < 1e-9);
    }

    #[test]
    fn window_endpoints_are_rejected() {
        let err = WaveParameters::new(1.0, 1.0 / 3.0).unwrap_err();
        assert!(err.to_string().contains("lower bound"), "{err}");
        let err = WaveParameters::new(1.0, 0.6).unwrap_err();
        assert!(err.to_string().contains("upper bound"), "{err}");
        assert!(WaveParameters::new(1.0, 3f64.sqrt() / 3.0).is_err());
        assert!(WaveParameters::new(0.0, 0.4).is_err());
        assert!(WaveParameters::new(-1.0, 0.4).is_err());
        assert!(WaveParameters::new(1.0, -0.4).is_err());
        assert!(WaveParameters::new(f64::NAN, 0.4).is_err());
    }

    #[test]
    fn invariants_hold_across_window() {
        for c in [0.25, 1.0, 4.0, 9.5] {
            let (lo, hi) = (window_lower(c), window_upper(c));
            for i in 1..50 {
                let k = lo + (hi - lo) * i as f64 / 50.0;
                let p = WaveParameters::new(c, k).unwrap();
                assert!(p.a > 0.0 && p.energy > 0.0);
                assert!(c - 3.0 * k * k > 0.0);
                assert!(p.beta > 3f64.sqrt() * c.sqrt() / 6.0 && p.beta < 2.0 * c.sqrt() / 3.0);
                assert!(p.h > 1.0 && p.h < 4.0);
                assert!(p.phi0_rescaled > 0.0 && p.phi0_rescaled < 1.0);
                assert!(k < p.phi1 && p.phi1 * p.phi1 < c);
                assert!(p.ess_edge > 0.0 && p.mu_sup > k);
            }
        }
    }

    #[test]
    fn psi2_vanishes_at_equilibrium_and_crest() {
        let p = WaveParameters::new(1.0, 0.4).unwrap();
        assert_eq!(level_curve_psi2(p.k, &p).unwrap(), 0.0);
        assert!(level_curve_psi2(p.phi1, &p).unwrap().abs() < 1e-15);
    }

    #[test]
    fn psi2_reference_value_and_level_set() {
        let p = WaveParameters::new(1.0, 0.4).unwrap();
        let psi2 = level_curve_psi2(0.6, &p).unwrap();
        assert!((psi2 - 0.020_908_465_674_332_24).abs() < 1e-15);
        // direct evaluation of the "+" branch
        let direct = 0.36 - 1.0 + (0.84f64 * 0.52).sqrt();
        assert!((psi2 - direct).abs() < 1e-15);
        let level = (0.36 - psi2 - 1.0).powi(2) - 0.84 * 0.52;
        assert!(level.abs() < 1e-15);
    }

    #[test]
    fn psi2_rejects_negative_radicand() {
        let p = WaveParameters::new(1.0, 0.4).unwrap();
        // c + 3k^2 - 4k phi < 0 for phi > 1.48/1.6
        assert!(level_curve_psi2(1.0, &p).is_err());
    }

    #[test]
    fn edge_identity() {
        for i in 1..40 {
            let k = window_lower(1.0) + (window_upper(1.0) - window_lower(1.0)) * i as f64 / 40.0;
            let p = WaveParameters::new(1.0, k).unwrap();
            let lhs = 1.5 * k.powi(-5) + p.omega2 * k.powi(-3);
            assert!((lhs - p.ess_edge).abs() < 1e-12 * p.ess_edge);
            // omega1 = 3/(4k^4) + omega2/k^2
            assert!((p.omega1 - (0.75 / k.powi(4) + p.omega2 / (k * k))).abs() < 1e-12 * p.omega1.abs().max(1.0));
        }
    }

    #[test]
    fn scaling_crest_closed_form() {
        let p = WaveParameters::new(1.0, 0.4).unwrap();
        let q = p.scaled(2.0).unwrap();
        assert!((q.phi1 - 2.0 * p.phi1).abs() < 1e-15);
        assert!((q.kappa - p.kappa).abs() < 1e-15);
    }
}
