//! Finite-difference Hessian operator
//! `L = -d/dxi mu^{-5} d/dxi + 5 mu_xixi mu^{-6} - 15 mu_xi^2 mu^{-7} + (3/2) mu^{-5} + omega2 mu^{-3}`.

use crate::error::{Error, Result};
use crate::profile::WaveProfile;
use crate::spectral::eigen::SymTridiagonal;

/// Dirichlet-truncated Sturm-Liouville operator on the interior grid points.
///
/// Row `j` corresponds to grid point `j + 1` of the profile grid; the end
/// points carry the homogeneous Dirichlet condition.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    dx: f64,
    /// `p = mu^{-5}` averaged at the `N - 1` half-points.
    flux: Vec<f64>,
    /// Potential at all `N` grid points.
    potential: Vec<f64>,
    matrix: SymTridiagonal,
    ess_edge: f64,
    warnings: Vec<String>,
}

/// Resolution threshold for `dx sqrt(ess_edge)`.
pub const RESOLUTION_LIMIT: f64 = 0.5;

impl DiscreteOperator {
    /// Conservative discretization of `-(p f')' + V f` with Dirichlet ends.
    pub fn from_coefficients(flux: Vec<f64>, potential: Vec<f64>, dx: f64, ess_edge: f64) -> Result<Self> {
        let n = potential.len();
        if n < 3 || flux.len() + 1 != n {
            return Err(Error::InvalidInput(format!(
                "need N >= 3 potential samples and N - 1 half-point fluxes, got {n} and {}",
                flux.len()
            )));
        }
        if !(dx > 0.0) {
            return Err(Error::InvalidParameter { field: "dx", message: format!("must be positive, got {dx}") });
        }
        let inv = 1.0 / (dx * dx);
        let diag: Vec<f64> = (1..n - 1).map(|i| (flux[i - 1] + flux[i]) * inv + potential[i]).collect();
        let off: Vec<f64> = (1..n - 2).map(|i| -flux[i] * inv).collect();
        let matrix = SymTridiagonal::new(diag, off)?;
        let mut warnings = Vec::new();
        if ess_edge > 0.0 && dx * ess_edge.sqrt() > RESOLUTION_LIMIT {
            warnings.push(format!(
                "grid too coarse: dx * sqrt(ess_edge) = {:.3} > {RESOLUTION_LIMIT}",
                dx * ess_edge.sqrt()
            ));
        }
        Ok(Self { dx, flux, potential, matrix, ess_edge, warnings })
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Number of unknowns (interior grid points).
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn flux(&self) -> &[f64] {
        &self.flux
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn matrix(&self) -> &SymTridiagonal {
        &self.matrix
    }

    pub fn ess_edge(&self) -> f64 {
        self.ess_edge
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `max(|V(x_0) - edge|, |V(x_{N-1}) - edge|)`.
    pub fn end_potential_error(&self) -> f64 {
        let n = self.potential.len();
        (self.potential[0] - self.ess_edge).abs().max((self.potential[n - 1] - self.ess_edge).abs())
    }

    /// Entry `(i, j)` of the matrix.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let d = self.matrix.diag();
        let o = self.matrix.off();
        match i.abs_diff(j) {
            0 => d[i],
            1 => o[i.min(j)],
            _ => 0.0,
        }
    }

    /// `max |A_ij - A_ji|` over the band.
    pub fn symmetry_defect(&self) -> f64 {
        (0..self.dim().saturating_sub(1))
            .map(|j| (self.entry(j, j + 1) - self.entry(j + 1, j)).abs())
            .fold(0.0, f64::max)
    }

    /// Applies the matrix to a vector of interior values.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.matrix.apply(v)
    }
}

/// Hessian of the action at a profile, using the analytic `mu_xixi`.
pub fn assemble_hessian(profile: &WaveProfile) -> Result<DiscreteOperator> {
    let params = profile.params();
    let mu = profile.mu();
    if let Some(v) = mu.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Domain { context: "assemble_hessian", message: format!("mu must be positive, found {v}") });
    }
    let mu_xi = profile.mu_xi();
    let mu_xixi = profile.mu_xixi();
    let p: Vec<f64> = mu.iter().map(|m| m.powi(-5)).collect();
    let flux: Vec<f64> = p.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let potential: Vec<f64> =
        (0..mu.len()).map(|i| hessian_potential(mu[i], mu_xi[i], mu_xixi[i], params.omega2)).collect();
    DiscreteOperator::from_coefficients(flux, potential, profile.dx(), params.ess_edge)
}

/// `5 mu_xixi mu^{-6} - 15 mu_xi^2 mu^{-7} + (3/2) mu^{-5} + omega2 mu^{-3}`.
pub fn hessian_potential(mu: f64, mu_xi: f64, mu_xixi: f64, omega2: f64) -> f64 {
    let m2 = mu * mu;
    let m3 = m2 * mu;
    let m5 = m3 * m2;
    5.0 * mu_xixi / (m5 * mu) - 15.0 * mu_xi * mu_xi / (m5 * m2) + 1.5 / m5 + omega2 / m3
}
