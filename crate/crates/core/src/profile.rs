//! Construction of the smooth solitary-wave profile.
//!
//! The velocity profile `phi` solves `(phi - phi'')(phi'^2 - phi^2 + c) = a`
//! with `phi -> k` at infinity. Integration starts at the crest
//! `(phi, phi') = (phi_1, 0)`, where the vector field is smooth. The full
//! second-order system is used near the crest; once `phi` has dropped below
//! the midpoint `(phi_1 + k)/2` the integration continues on the first
//! integral `phi' = -sqrt(psi^2(phi))`, which is contracting toward the
//! saddle `(k, 0)`. The second-order system is unstable in that direction
//! (perturbations grow like `exp(kappa xi)`), so it cannot reach the tail.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics;
use crate::params::WaveParameters;

/// Smallest admissible value of `c + phi'^2 - phi^2` during integration.
const DENOMINATOR_FLOOR: f64 = 1e-10;

/// RK4 substeps per grid step in the crest region.
const CREST_SUBSTEPS: usize = 8;

/// How far the grid extends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Extent {
    /// Fixed half-length `L`; the grid is `[-L, L]`.
    HalfLength(f64),
    /// Extend until `|phi - k| < tol`, failing beyond `max_half_length`.
    TailTolerance { tol: f64, max_half_length: f64 },
}

/// Grid request for [`construct_profile`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub dx: f64,
    pub extent: Extent,
}

impl GridSpec {
    pub fn new(dx: f64, half_length: f64) -> Self {
        Self { dx, extent: Extent::HalfLength(half_length) }
    }

    /// Default grid: `L = max(30, 30/kappa)`, `dx = 0.01 min(1, 1/kappa)`.
    pub fn default_for(params: &WaveParameters) -> Self {
        Self::new(default_dx(params), default_half_length(params))
    }

    /// Same extent, different spacing.
    pub fn with_dx(self, dx: f64) -> Self {
        Self { dx, ..self }
    }

    pub fn tail_tolerance(dx: f64, tol: f64, max_half_length: f64) -> Self {
        Self { dx, extent: Extent::TailTolerance { tol, max_half_length } }
    }
}

/// Optional user overrides of the default grid.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct GridOverride {
    pub dx: Option<f64>,
    pub half_length: Option<f64>,
}

impl GridOverride {
    pub fn resolve(&self, params: &WaveParameters) -> GridSpec {
        GridSpec::new(
            self.dx.unwrap_or_else(|| default_dx(params)),
            self.half_length.unwrap_or_else(|| default_half_length(params)),
        )
    }
}

pub fn default_half_length(params: &WaveParameters) -> f64 {
    30f64.max(30.0 / params.kappa)
}

pub fn default_dx(params: &WaveParameters) -> f64 {
    0.01 * 1f64.min(1.0 / params.kappa)
}

/// Sampled solitary wave on the symmetric grid `xi_i = (i - n) dx`,
/// `i = 0..=2n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveProfile {
    params: WaveParameters,
    dx: f64,
    half_points: usize,
    phi: Vec<f64>,
    phi_xi: Vec<f64>,
    mu: Vec<f64>,
    mu_xi: Vec<f64>,
    tail_error: f64,
}

impl WaveProfile {
    /// Builds a profile from arbitrary samples on the symmetric grid.
    /// Used for degenerate or deliberately corrupted inputs.
    pub fn from_samples(
        params: WaveParameters,
        dx: f64,
        phi: Vec<f64>,
        phi_xi: Vec<f64>,
        mu: Vec<f64>,
        mu_xi: Vec<f64>,
    ) -> Result<Self> {
        let len = phi.len();
        if len < 5 || len.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "symmetric grid needs an odd number (>= 5) of samples, got {len}"
            )));
        }
        if phi_xi.len() != len || mu.len() != len || mu_xi.len() != len {
            return Err(Error::InvalidInput("sample arrays differ in length".into()));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::InvalidParameter { field: "dx", message: format!("must be positive, got {dx}") });
        }
        let tail_error = (phi[len - 1] - params.k).abs();
        Ok(Self { params, dx, half_points: len / 2, phi, phi_xi, mu, mu_xi, tail_error })
    }

    /// The constant background `phi = mu = k` on the same kind of grid.
    pub fn background(params: WaveParameters, dx: f64, half_length: f64) -> Result<Self> {
        let n = half_points(dx, half_length)?;
        let len = 2 * n + 1;
        let k = params.k;
        Self::from_samples(params, dx, vec![k; len], vec![0.0; len], vec![k; len], vec![0.0; len])
    }

    pub fn params(&self) -> &WaveParameters {
        &self.params
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Number of grid points on `(0, L]`; the grid has `2n + 1` points.
    pub fn half_points(&self) -> usize {
        self.half_points
    }

    pub fn half_length(&self) -> f64 {
        self.half_points as f64 * self.dx
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn xi(&self) -> Vec<f64> {
        let n = self.half_points as i64;
        (0..self.len() as i64).map(|i| (i - n) as f64 * self.dx).collect()
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn phi_xi(&self) -> &[f64] {
        &self.phi_xi
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn mu_xi(&self) -> &[f64] {
        &self.mu_xi
    }

    pub fn tail_error(&self) -> f64 {
        self.tail_error
    }

    /// `phi''` from the profile equation, `phi - a / (c + phi'^2 - phi^2)`.
    pub fn phi_xixi(&self) -> Vec<f64> {
        let WaveParameters { a, c, .. } = self.params;
        self.phi.iter().zip(&self.phi_xi).map(|(&p, &q)| p - a / (c + q * q - p * p)).collect()
    }

    /// `mu'' = 2 phi'' mu^3 / a + 12 phi'^2 mu^5 / a^2`.
    pub fn mu_xixi(&self) -> Vec<f64> {
        let a = self.params.a;
        let phi_xixi = self.phi_xixi();
        self.mu
            .iter()
            .zip(&self.phi_xi)
            .zip(&phi_xixi)
            .map(|((&m, &q), &pxx)| {
                let m3 = m * m * m;
                2.0 * pxx * m3 / a + 12.0 * q * q * m3 * m * m / (a * a)
            })
            .collect()
    }

    /// `max phi`.
    pub fn crest(&self) -> f64 {
        self.phi.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Writes `xi,phi,phi_xi,mu,mu_xi` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "xi,phi,phi_xi,mu,mu_xi")?;
        for (i, xi) in self.xi().iter().enumerate() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                xi, self.phi[i], self.phi_xi[i], self.mu[i], self.mu_xi[i]
            )?;
        }
        Ok(())
    }
}

fn half_points(dx: f64, half_length: f64) -> Result<usize> {
    if !(dx > 0.0 && dx.is_finite()) {
        return Err(Error::InvalidParameter { field: "dx", message: format!("must be positive, got {dx}") });
    }
    if !(half_length > 0.0 && half_length.is_finite()) {
        return Err(Error::InvalidParameter {
            field: "half_length",
            message: format!("must be positive, got {half_length}"),
        });
    }
    let n = (half_length / dx).round() as usize;
    if n < 2 {
        return Err(Error::InvalidParameter {
            field: "half_length",
            message: format!("L = {half_length} gives fewer than two steps of size {dx}"),
        });
    }
    Ok(n)
}

/// Integrates the profile on `[0, L]` from the crest and mirrors it.
pub fn construct_profile(params: &WaveParameters, grid: &GridSpec) -> Result<WaveProfile> {
    let dx = grid.dx;
    let (max_steps, tol) = match grid.extent {
        Extent::HalfLength(l) => (half_points(dx, l)?, None),
        Extent::TailTolerance { tol, max_half_length } => {
            if !(tol > 0.0) {
                return Err(Error::InvalidParameter {
                    field: "tail_tol",
                    message: format!("must be positive, got {tol}"),
                });
            }
            (half_points(dx, max_half_length)?, Some(tol))
        }
    };

    let half = integrate_half(params, dx, max_steps, tol)?;
    let n = half.phi.len() - 1;
    if let Some(tol) = tol {
        let tail = (half.phi[n] - params.k).abs();
        if tail > tol {
            return Err(Error::TailNotConverged { tail_error: tail, tolerance: tol, half_length: n as f64 * dx });
        }
    }

    // Exact mirror: phi even, phi' odd.
    let mut phi = Vec::with_capacity(2 * n + 1);
    let mut phi_xi = Vec::with_capacity(2 * n + 1);
    for i in (1..=n).rev() {
        phi.push(half.phi[i]);
        phi_xi.push(-half.psi[i]);
    }
    phi.extend_from_slice(&half.phi);
    phi_xi.extend_from_slice(&half.psi);

    let a = params.a;
    let mut mu = Vec::with_capacity(phi.len());
    let mut mu_xi = Vec::with_capacity(phi.len());
    for (&p, &q) in phi.iter().zip(&phi_xi) {
        let m = params.mu_of_phi(p).ok_or_else(|| Error::Domain {
            context: "construct_profile",
            message: format!("phi = {p} outside the range where mu is defined"),
        })?;
        mu.push(m);
        mu_xi.push(2.0 * q * m * m * m / a);
    }
    let tail_error = (phi[phi.len() - 1] - params.k).abs();
    Ok(WaveProfile { params: *params, dx, half_points: n, phi, phi_xi, mu, mu_xi, tail_error })
}

struct HalfProfile {
    phi: Vec<f64>,
    psi: Vec<f64>,
}

fn integrate_half(params: &WaveParameters, dx: f64, max_steps: usize, tol: Option<f64>) -> Result<HalfProfile> {
    let WaveParameters { c, a, k, phi1, .. } = *params;
    let mut phi = Vec::with_capacity(max_steps + 1);
    let mut psi = Vec::with_capacity(max_steps + 1);
    phi.push(phi1);
    psi.push(0.0);

    let field = |p: f64, q: f64, xi: f64| -> Result<(f64, f64)> {
        let den = c + q * q - p * p;
        if !(den > DENOMINATOR_FLOOR) {
            return Err(Error::IntegrationFailure { xi, denominator: den, floor: DENOMINATOR_FLOOR });
        }
        Ok((q, p - a / den))
    };

    // Crest region: second-order system.
    let switch = 0.5 * (phi1 + k);
    let (mut p, mut q) = (phi1, 0.0);
    let h = dx / CREST_SUBSTEPS as f64;
    let mut step = 0;
    while step < max_steps && p > switch {
        for sub in 0..CREST_SUBSTEPS {
            let xi = (step as f64 + sub as f64 / CREST_SUBSTEPS as f64) * dx;
            let (k1p, k1q) = field(p, q, xi)?;
            let (k2p, k2q) = field(p + 0.5 * h * k1p, q + 0.5 * h * k1q, xi)?;
            let (k3p, k3q) = field(p + 0.5 * h * k2p, q + 0.5 * h * k2q, xi)?;
            let (k4p, k4q) = field(p + h * k3p, q + h * k3q, xi)?;
            p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        }
        step += 1;
        phi.push(p);
        psi.push(q);
    }

    // Tail: s' = -s g(s) on the level curve, s = phi - k.
    let slope = |s: f64| -> Result<f64> {
        let psi2 = params.psi2_from_excess(s).ok_or_else(|| Error::Domain {
            context: "construct_profile",
            message: format!("phi = {} left the level curve", k + s),
        })?;
        Ok(-psi2.max(0.0).sqrt())
    };
    let mut s = p - k;
    while step < max_steps {
        if let Some(tol) = tol {
            if s.abs() < tol {
                break;
            }
        }
        let k1 = slope(s)?;
        let k2 = slope(s + 0.5 * dx * k1)?;
        let k3 = slope(s + 0.5 * dx * k2)?;
        let k4 = slope(s + dx * k3)?;
        s += dx / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        step += 1;
        phi.push(k + s);
        psi.push(slope(s)?);
    }
    Ok(HalfProfile { phi, psi })
}

/// Sup-norm residuals of a sampled profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileResiduals {
    /// `(phi - phi'')(phi'^2 - phi^2 + c) - a`, `phi''` by centered differences.
    pub ode: f64,
    /// `(phi^2 - phi'^2)^2 - 2c(phi^2 - phi'^2) + 4a phi - E`.
    pub level_set: f64,
    /// `|mu - (phi - phi'')|`.
    pub momentum: f64,
}

pub fn profile_residuals(profile: &WaveProfile) -> ProfileResiduals {
    let WaveParameters { a, c, energy, .. } = *profile.params();
    let phi = profile.phi();
    let psi = profile.phi_xi();
    let phi_xixi = numerics::derivative2(phi, profile.dx());
    let mut ode = 0.0f64;
    let mut level_set = 0.0f64;
    let mut momentum = 0.0f64;
    for i in 0..phi.len() {
        let (p, q) = (phi[i], psi[i]);
        ode = ode.max(((p - phi_xixi[i]) * (q * q - p * p + c) - a).abs());
        let w = p * p - q * q;
        level_set = level_set.max((w * w - 2.0 * c * w + 4.0 * a * p - energy).abs());
        momentum = momentum.max((profile.mu()[i] - (p - phi_xixi[i])).abs());
    }
    ProfileResiduals { ode, level_set, momentum }
}

/// `sup |(phi - psi^2 - c)^2 - (c - k^2)(c + 3k^2 - 4k phi)|`.
pub fn level_curve_residual(profile: &WaveProfile) -> f64 {
    let p = profile.params();
    let k = p.k;
    profile
        .phi()
        .iter()
        .zip(profile.phi_xi())
        .map(|(&f, &q)| {
            let lhs = f * f - q * q - p.c;
            (lhs * lhs - p.d() * (p.c + 3.0 * k * k - 4.0 * k * f)).abs()
        })
        .fold(0.0, f64::max)
}

/// Result of comparing a profile with its scaled counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingReport {
    pub lambda: f64,
    /// `sup |phi_scaled - lambda phi|` on the shared grid.
    pub sup_difference: f64,
    /// `|phi_1(lambda^2 c, lambda k) - lambda phi_1(c, k)|`.
    pub crest_difference: f64,
}

/// Compares the profile at `(c, k)` with the one at `(lambda^2 c, lambda k)`
/// on the same `xi` grid; the profile equation maps one onto the other by
/// `phi -> lambda phi`.
pub fn scaling_covariance_check(params: &WaveParameters, lambda: f64, grid: &GridSpec) -> Result<ScalingReport> {
    let scaled = params.scaled(lambda)?;
    let grid = GridSpec { extent: Extent::HalfLength(fixed_half_length(params, grid)?), ..*grid };
    let base = construct_profile(params, &grid)?;
    let other = construct_profile(&scaled, &grid)?;
    let sup_difference = base.phi().iter().zip(other.phi()).map(|(p, q)| (q - lambda * p).abs()).fold(0.0, f64::max);
    Ok(ScalingReport { lambda, sup_difference, crest_difference: (scaled.phi1 - lambda * params.phi1).abs() })
}

fn fixed_half_length(params: &WaveParameters, grid: &GridSpec) -> Result<f64> {
    match grid.extent {
        Extent::HalfLength(l) => Ok(l),
        Extent::TailTolerance { .. } => Ok(construct_profile(params, grid)?.half_length()),
    }
}
