//! The Vakhitov-Kolokolov inner product `<L^{-1} b, b>`, `b = dcalF/dm (mu)`,
//! and the parameter-derivative identity behind its closed form.
//!
//! The Hessian of the action is `2 L` with `L` the operator assembled in
//! [`super::operator`]; both the inner product and the identity below use it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{dq_dk_closed_form, k_calf_derivative};
use crate::numerics;
use crate::params::WaveParameters;
use crate::profile::{construct_profile, Extent, GridSpec, WaveProfile};
use crate::spectral::eigen::SymTridiagonal;
use crate::spectral::operator::{assemble_hessian, hessian_potential, DiscreteOperator};

/// Window margin (in units of `sqrt(c)`) below which a conditioning warning is issued.
pub const EDGE_MARGIN_WARNING: f64 = 0.01;
/// Condition estimate above which a warning is issued.
pub const CONDITION_WARNING: f64 = 1e9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VkSolve {
    /// `<y, b>` with `2 L y = b` on the even subspace.
    pub value: f64,
    /// `||A_even|| / min |lambda_even|`.
    pub condition_estimate: f64,
    pub warnings: Vec<String>,
}

/// `max |b(xi) - b(-xi)|` on the symmetric grid.
pub fn even_asymmetry(b: &[f64]) -> f64 {
    let n = b.len();
    (0..n / 2).map(|i| (b[i] - b[n - 1 - i]).abs()).fold(0.0, f64::max)
}

/// Even-sector restriction of the operator to grid points `xi >= 0`.
///
/// Returns `(lower, diag, upper)` of the folded system in which row 0 picks
/// up the mirrored neighbour twice.
fn fold_even(op: &DiscreteOperator, half_points: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let d = op.matrix().diag();
    let o = op.matrix().off();
    let n = half_points;
    // grid index g <-> interior row g - 1; unknowns g = n .. 2n - 1
    let diag: Vec<f64> = (0..n).map(|i| d[n - 1 + i]).collect();
    let lower: Vec<f64> = (1..n).map(|i| o[n - 2 + i]).collect();
    let mut upper: Vec<f64> = (0..n - 1).map(|i| o[n - 1 + i]).collect();
    upper[0] *= 2.0;
    (lower, diag, upper)
}

/// Direct route: solve `2 L y = b` on the even subspace and return
/// `<y, b> = dx (y_0 b_0 + 2 sum_{i>0} y_i b_i)`.
pub fn vk_inner_product(profile: &WaveProfile) -> Result<VkSolve> {
    let op = assemble_hessian(profile)?;
    vk_inner_product_with(profile, &op)
}

pub fn vk_inner_product_with(profile: &WaveProfile, op: &DiscreteOperator) -> Result<VkSolve> {
    let params = profile.params();
    let k2 = params.k * params.k;
    let b: Vec<f64> = profile.mu().iter().map(|m| (m - params.k) * (m + params.k) / (k2 * m * m)).collect();
    let asymmetry = even_asymmetry(&b);
    let scale = numerics::sup_norm(&b).max(f64::MIN_POSITIVE);
    if asymmetry > 1e-12 * scale {
        return Err(Error::Parity { asymmetry });
    }
    let n = profile.half_points();
    if n < 3 {
        return Err(Error::InvalidInput("grid too small for the even-sector solve".into()));
    }
    let (lower, diag, upper) = fold_even(op, n);
    let rhs = &b[n..2 * n];
    let mut y = numerics::solve_tridiagonal(&lower, &diag, &upper, rhs)?;
    for v in y.iter_mut() {
        *v *= 0.5;
    }
    let value = profile.dx() * (y[0] * rhs[0] + 2.0 * numerics::dot(&y[1..], &rhs[1..]));

    // Symmetric even-sector matrix for the condition estimate.
    let mut off_sym = lower.clone();
    off_sym[0] *= std::f64::consts::SQRT_2;
    let even = SymTridiagonal::new(diag, off_sym)?;
    let lows = even.lowest_eigenvalues(3);
    let min_abs = lows.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let condition_estimate = even.norm_inf() / min_abs;

    let mut warnings = Vec::new();
    if params.window_margin() < EDGE_MARGIN_WARNING {
        warnings.push(format!(
            "k = {} is within {:.4} sqrt(c) of the admissible window edge; the even-sector solve is poorly conditioned (estimate {:.3e})",
            params.k,
            params.window_margin(),
            condition_estimate
        ));
    }
    if condition_estimate > CONDITION_WARNING {
        warnings
            .push(format!("even-sector condition estimate {condition_estimate:.3e} exceeds {CONDITION_WARNING:.0e}"));
    }
    Ok(VkSolve { value, condition_estimate, warnings })
}

/// `((c - k^2)^2 / (4c)) dQ/dk`.
pub fn vk_closed_form(c: f64, k: f64) -> Result<f64> {
    let d = c - k * k;
    Ok(d * d / (4.0 * c) * dq_dk_closed_form(c, k)?)
}

/// Cross-check route: `((c - k^2)^2 / (4c)) d/dk [k calF(mu_k)]` by centered
/// differences over profiles at `k +- dk` on the given grid.
pub fn vk_crosscheck(params: &WaveParameters, grid: &GridSpec, dk: f64) -> Result<f64> {
    let d = params.d();
    Ok(d * d / (4.0 * params.c) * k_calf_derivative(params, grid, dk)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    /// `sup |2 L (k mu_k - mu) - (4c/(c-k^2)^2) dcalF/dm|` on the interior.
    pub residual_sup: f64,
    /// `sup |(4c/(c-k^2)^2) dcalF/dm|`.
    pub rhs_sup: f64,
    pub dk: f64,
}

/// Checks `L (k mu_k - mu) = (4c/(c-k^2)^2) dcalF/dm (mu)` for the Hessian.
///
/// `mu_k` is the five-point centered difference over profiles at
/// `k +- dk, k +- 2 dk`; the operator is applied in expanded form
/// `-p w'' - p' w' + V w` with fourth-order stencils and analytic coefficients.
pub fn hessian_identity_residual(params: &WaveParameters, grid: &GridSpec, dk: f64) -> Result<IdentityCheck> {
    if !(dk > 0.0) {
        return Err(Error::InvalidParameter { field: "dk", message: format!("must be positive, got {dk}") });
    }
    let base = construct_profile(params, grid)?;
    let grid = GridSpec { extent: Extent::HalfLength(base.half_length()), ..*grid };
    let mu_at = |kk: f64| -> Result<Vec<f64>> {
        let p = WaveParameters::new(params.c, kk)?;
        Ok(construct_profile(&p, &grid)?.mu().to_vec())
    };
    let (k, c) = (params.k, params.c);
    let mp2 = mu_at(k + 2.0 * dk)?;
    let mp1 = mu_at(k + dk)?;
    let mm1 = mu_at(k - dk)?;
    let mm2 = mu_at(k - 2.0 * dk)?;
    let mu = base.mu();
    let w: Vec<f64> =
        (0..mu.len()).map(|i| k * (-mp2[i] + 8.0 * mp1[i] - 8.0 * mm1[i] + mm2[i]) / (12.0 * dk) - mu[i]).collect();
    let dx = base.dx();
    let w1 = numerics::derivative1_4(&w, dx);
    let w2 = numerics::derivative2_4(&w, dx);
    let mu_xi = base.mu_xi();
    let mu_xixi = base.mu_xixi();
    let d = params.d();
    let factor = 4.0 * c / (d * d);
    let k2 = k * k;
    let mut residual_sup = 0.0f64;
    let mut rhs_sup = 0.0f64;
    for i in 2..mu.len() - 2 {
        let m = mu[i];
        let p = m.powi(-5);
        let dp = -5.0 * m.powi(-6) * mu_xi[i];
        let v = hessian_potential(m, mu_xi[i], mu_xixi[i], params.omega2);
        let lw = -p * w2[i] - dp * w1[i] + v * w[i];
        let rhs = factor * (m - k) * (m + k) / (k2 * m * m);
        residual_sup = residual_sup.max((2.0 * lw - rhs).abs());
        rhs_sup = rhs_sup.max(rhs.abs());
    }
    Ok(IdentityCheck { residual_sup, rhs_sup, dk })
}
