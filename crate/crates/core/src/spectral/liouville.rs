//! Liouville normal form `A = -a^{-5} d^2/dz^2 + V_A(z)` of the Hessian,
//! with `dz/dxi = (c + phi_xi^2 - phi^2)^{-5/2}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics;
use crate::params::WaveParameters;
use crate::profile::WaveProfile;
use crate::spectral::eigen::SymTridiagonal;
use crate::spectral::operator::assemble_hessian;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiouvilleReport {
    pub hessian_eigenvalues: Vec<f64>,
    pub liouville_eigenvalues: Vec<f64>,
    pub max_abs_difference: f64,
    /// `max |lambda_A - lambda_L| / max(|lambda_L|, 1)`.
    pub max_relative_difference: f64,
    /// `5 max(dx^2, dz^2) sup |V|`.
    pub bound: f64,
    pub within_bound: bool,
    /// `max(|q(z_0)|, |q(z_end)|)`.
    pub q_end: f64,
    pub dz: f64,
}

/// Potential terms of `A` at a point of the level curve, as functions of `phi`.
struct LiouvillePotential {
    base: f64,
    q: f64,
}

fn potential_at(phi: f64, params: &WaveParameters) -> Result<LiouvillePotential> {
    let WaveParameters { a, c, k, omega2, .. } = *params;
    let s = phi - k;
    let psi2 = params
        .psi2_from_excess(s)
        .ok_or_else(|| Error::Domain {
            context: "liouville_check",
            message: format!("phi = {phi} off the level curve"),
        })?
        .max(0.0);
    let mu = params
        .mu_of_phi(phi)
        .ok_or_else(|| Error::Domain { context: "liouville_check", message: format!("mu undefined at phi = {phi}") })?;
    let phi_xixi = phi - a / (c + psi2 - phi * phi);
    let m2 = mu * mu;
    let m3 = m2 * mu;
    let m5 = m3 * m2;
    let mu_xi2 = 4.0 / (a * a) * psi2 * m3 * m3;
    let mu_xixi = 2.0 / a * phi_xixi * m3 + 12.0 / (a * a) * psi2 * m5;
    let q = 5.0 * mu_xixi / (m5 * mu) - 15.0 * mu_xi2 / (m5 * m2) - 2.5 / a * phi_xixi / m3
        + 35.0 / (4.0 * a * a) * psi2 / mu;
    Ok(LiouvillePotential { base: 1.5 / m5 + omega2 / m3, q })
}

/// Cubic Hermite interpolation on increasing nodes `x` with values `y` and slopes `dy`.
fn hermite(x: &[f64], y: &[f64], dy: &[f64], t: f64) -> Result<f64> {
    let n = x.len();
    let tol = 1e-12 * (x[n - 1] - x[0]).abs();
    if t < x[0] - tol || t > x[n - 1] + tol {
        return Err(Error::Domain {
            context: "liouville_check",
            message: format!("resampling point z = {t} outside [{}, {}]", x[0], x[n - 1]),
        });
    }
    let j = match x.partition_point(|v| *v <= t) {
        0 => 0,
        p if p >= n => n - 2,
        p => p - 1,
    };
    let h = x[j + 1] - x[j];
    let s = (t - x[j]) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    Ok(h00 * y[j] + h10 * h * dy[j] + h01 * y[j + 1] + h11 * h * dy[j + 1])
}

/// Compares the `n` lowest eigenvalues of the Hessian and of its Liouville form.
pub fn liouville_check(profile: &WaveProfile, n: usize) -> Result<LiouvilleReport> {
    let params = profile.params();
    let WaveParameters { a, c, .. } = *params;
    let op = assemble_hessian(profile)?;
    let hessian_eigenvalues = op.matrix().lowest_eigenvalues(n);

    let phi = profile.phi();
    let psi = profile.phi_xi();
    let len = phi.len();
    let weight: Vec<f64> = phi.iter().zip(psi).map(|(p, q)| (c + q * q - p * p).powf(-2.5)).collect();
    let mut z = numerics::cumulative_simpson(&weight, profile.dx());
    let z0 = z[profile.half_points()];
    for v in z.iter_mut() {
        *v -= z0;
    }
    let slope: Vec<f64> = psi.iter().zip(&weight).map(|(q, w)| q / w).collect();
    let dz = (z[len - 1] - z[0]) / (len - 1) as f64;

    let mut potential = Vec::with_capacity(len);
    let mut q_ends = [0.0; 2];
    for j in 0..len {
        let t = if j == len - 1 { z[len - 1] } else { z[0] + j as f64 * dz };
        let ph = hermite(&z, phi, &slope, t)?;
        let pot = potential_at(ph, params)?;
        if j == 0 {
            q_ends[0] = pot.q.abs();
        }
        if j == len - 1 {
            q_ends[1] = pot.q.abs();
        }
        potential.push(pot.base + pot.q);
    }
    let inv = 1.0 / (a.powi(5) * dz * dz);
    let diag: Vec<f64> = potential[1..len - 1].iter().map(|v| 2.0 * inv + v).collect();
    let off = vec![-inv; len - 3];
    let liouville = SymTridiagonal::new(diag, off)?;
    let liouville_eigenvalues = liouville.lowest_eigenvalues(n);

    let mut max_abs_difference = 0.0f64;
    let mut max_relative_difference = 0.0f64;
    for (x, y) in hessian_eigenvalues.iter().zip(&liouville_eigenvalues) {
        let d = (x - y).abs();
        max_abs_difference = max_abs_difference.max(d);
        max_relative_difference = max_relative_difference.max(d / x.abs().max(1.0));
    }
    let sup_v = numerics::sup_norm(op.potential());
    let h = profile.dx().max(dz);
    let bound = 5.0 * h * h * sup_v;
    Ok(LiouvilleReport {
        hessian_eigenvalues,
        liouville_eigenvalues,
        max_abs_difference,
        max_relative_difference,
        bound,
        within_bound: max_abs_difference <= bound,
        q_end: q_ends[0].max(q_ends[1]),
        dz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{construct_profile, GridSpec};

    #[test]
    fn constant_background_spectra_coincide() {
        let p = WaveParameters::new(1.0, 0.4).unwrap();
        let prof = WaveProfile::background(p, 0.02, 5.0).unwrap();
        let r = liouville_check(&prof, 3).unwrap();
        assert!(r.max_relative_difference < 1e-10, "{r:?}");
        assert!(r.q_end < 1e-12);
    }

    #[test]
    fn solitary_wave_spectra_agree() {
        let p = WaveParameters::new(1.0, 0.4).unwrap();
        let prof = construct_profile(&p, &GridSpec::new(0.01, 40.0)).unwrap();
        let r = liouville_check(&prof, 2).unwrap();
        assert!(r.within_bound, "{r:?}");
        assert!(r.max_abs_difference < 5e-3, "{r:?}");
        assert!(r.q_end < 1e-8);
        assert!(r.liouville_eigenvalues[0] < 0.0);
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let x = [0.0, 0.3, 1.0, 1.7];
        let f = |t: f64| t * t * t - 2.0 * t + 0.5;
        let df = |t: f64| 3.0 * t * t - 2.0;
        let y: Vec<f64> = x.iter().map(|t| f(*t)).collect();
        let dy: Vec<f64> = x.iter().map(|t| df(*t)).collect();
        for t in [0.0, 0.1, 0.65, 1.2, 1.7] {
            assert!((hermite(&x, &y, &dy, t).unwrap() - f(t)).abs() < 1e-13);
        }
        assert!(hermite(&x, &y, &dy, 2.0).is_err());
    }
}
