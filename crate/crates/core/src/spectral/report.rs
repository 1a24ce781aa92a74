use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::numerics;
use crate::profile::{GridSpec, WaveProfile};
use crate::spectral::operator::{assemble_hessian, DiscreteOperator};
use crate::spectral::vk::{vk_closed_form, vk_crosscheck, vk_inner_product_with};

/// Parameter step of the cross-check route.
pub const DEFAULT_DK: f64 = 1e-4;
/// Eigenpairs computed below the essential edge at most.
pub const MAX_EIGENPAIRS: usize = 64;
/// Relative agreement expected between the two VK routes.
pub const VK_AGREEMENT: f64 = 0.01;
/// Eigenvalues above the edge included in listings.
const ABOVE_EDGE_LISTED: usize = 2;

/// `10 dx^2 ess_edge`.
pub fn tol_zero(dx: f64, ess_edge: f64) -> f64 {
    10.0 * dx * dx * ess_edge
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub c: f64,
    pub k: f64,
    pub dx: f64,
    pub half_length: f64,
    pub ess_edge: f64,
    pub tol_zero: f64,
    /// Eigenvalues below the essential edge, ascending.
    pub eigenvalues: Vec<f64>,
    /// A few eigenvalues at or above the edge (discretized continuum).
    pub above_edge: Vec<f64>,
    pub negative_count: usize,
    pub zero_count: usize,
    pub positive_count: usize,
    pub kernel_eigenvalue: Option<f64>,
    /// `|<v, mu_xi>| / (|v| |mu_xi|)` for the near-zero eigenvector.
    pub kernel_alignment: Option<f64>,
    /// Smallest eigenvalue above `tol_zero`.
    pub gap: Option<f64>,
    /// Exactly one negative, one near-zero aligned with `mu_xi`, rest positive.
    pub structure_ok: bool,
    pub findings: Vec<String>,
    pub vk_value: f64,
    pub vk_crosscheck: f64,
    pub vk_closed_form: f64,
    pub vk_relative_difference: f64,
    pub condition_estimate: f64,
    pub max_eigen_residual: f64,
    pub operator_norm: f64,
    pub warnings: Vec<String>,
}

impl SpectralReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `index,eigenvalue,below_edge`.
    pub fn write_eigenvalues_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "index,eigenvalue,below_edge")?;
        let below = self.eigenvalues.iter().map(|v| (v, true));
        let above = self.above_edge.iter().map(|v| (v, false));
        for (i, (v, flag)) in below.chain(above).enumerate() {
            writeln!(out, "{},{:.17e},{}", i + 1, v, flag)?;
        }
        Ok(())
    }
}

/// Eigen part of the report, without the VK routes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSummary {
    pub eigenvalues: Vec<f64>,
    pub above_edge: Vec<f64>,
    pub tol_zero: f64,
    pub negative_count: usize,
    pub zero_count: usize,
    pub positive_count: usize,
    pub kernel_eigenvalue: Option<f64>,
    pub kernel_alignment: Option<f64>,
    pub gap: Option<f64>,
    pub structure_ok: bool,
    pub findings: Vec<String>,
    pub max_eigen_residual: f64,
    pub operator_norm: f64,
}

/// Computes and classifies the spectrum below the essential edge.
pub fn spectrum_summary(profile: &WaveProfile, op: &DiscreteOperator) -> Result<SpectrumSummary> {
    let ess_edge = profile.params().ess_edge;
    let matrix = op.matrix();
    let below = matrix.count_below(ess_edge);
    let mut findings = Vec::new();
    if below > MAX_EIGENPAIRS {
        findings.push(format!("{below} eigenvalues below the edge; only the lowest {MAX_EIGENPAIRS} were computed"));
    }
    let pairs = matrix.lowest_eigenpairs(below.min(MAX_EIGENPAIRS))?;
    let above_edge: Vec<f64> =
        (below..(below + ABOVE_EDGE_LISTED).min(matrix.dim())).map(|j| matrix.eigenvalue(j)).collect();
    let tol = tol_zero(profile.dx(), ess_edge);

    let negative_count = pairs.values.iter().filter(|v| **v < -tol).count();
    let zero: Vec<usize> = (0..pairs.values.len()).filter(|&j| pairs.values[j].abs() <= tol).collect();
    let positive_count = pairs.values.iter().filter(|v| **v > tol).count();

    let mu_xi = &profile.mu_xi()[1..profile.len() - 1];
    let mu_xi_norm = numerics::l2(mu_xi);
    let (kernel_eigenvalue, kernel_alignment) = match zero.first() {
        Some(&j) if mu_xi_norm > 0.0 => {
            let v = &pairs.vectors[j];
            (Some(pairs.values[j]), Some(numerics::dot(v, mu_xi).abs() / (numerics::l2(v) * mu_xi_norm)))
        }
        Some(&j) => (Some(pairs.values[j]), None),
        None => (None, None),
    };
    let gap = pairs.values.iter().copied().find(|v| *v > tol);

    if negative_count != 1 {
        findings.push(format!("expected exactly one eigenvalue below -tol_zero, found {negative_count}"));
    }
    if zero.len() != 1 {
        findings.push(format!("expected exactly one eigenvalue in [-tol_zero, tol_zero], found {}", zero.len()));
    }
    match kernel_alignment {
        Some(a) if a > 0.999 => {}
        Some(a) => findings.push(format!("near-zero eigenvector alignment with mu_xi is {a:.6} (<= 0.999)")),
        None => {}
    }
    let structure_ok = negative_count == 1 && zero.len() == 1 && kernel_alignment.is_some_and(|a| a > 0.999);
    let max_eigen_residual = pairs.residuals.iter().copied().fold(0.0, f64::max);
    Ok(SpectrumSummary {
        eigenvalues: pairs.values,
        above_edge,
        tol_zero: tol,
        negative_count,
        zero_count: zero.len(),
        positive_count,
        kernel_eigenvalue,
        kernel_alignment,
        gap,
        structure_ok,
        findings,
        max_eigen_residual,
        operator_norm: pairs.norm,
    })
}

/// Full spectral report at a profile, including both VK routes.
pub fn spectral_report(profile: &WaveProfile) -> Result<SpectralReport> {
    spectral_report_with_dk(profile, DEFAULT_DK)
}

pub fn spectral_report_with_dk(profile: &WaveProfile, dk: f64) -> Result<SpectralReport> {
    let params = profile.params();
    let op = assemble_hessian(profile)?;
    let s = spectrum_summary(profile, &op)?;
    let vk = vk_inner_product_with(profile, &op)?;
    let grid = GridSpec::new(profile.dx(), profile.half_length());
    let vk_crosscheck = vk_crosscheck(params, &grid, dk)?;
    let mut warnings = op.warnings().to_vec();
    warnings.extend(vk.warnings.iter().cloned());
    let vk_relative_difference = ((vk.value - vk_crosscheck) / vk_crosscheck).abs();
    if vk_relative_difference > VK_AGREEMENT {
        warnings.push(format!(
            "VK routes differ by {:.2}% (> {:.0}%); the crest is under-resolved at dx = {}",
            100.0 * vk_relative_difference,
            100.0 * VK_AGREEMENT,
            profile.dx()
        ));
    }
    Ok(SpectralReport {
        c: params.c,
        k: params.k,
        dx: profile.dx(),
        half_length: profile.half_length(),
        ess_edge: params.ess_edge,
        tol_zero: s.tol_zero,
        eigenvalues: s.eigenvalues,
        above_edge: s.above_edge,
        negative_count: s.negative_count,
        zero_count: s.zero_count,
        positive_count: s.positive_count,
        kernel_eigenvalue: s.kernel_eigenvalue,
        kernel_alignment: s.kernel_alignment,
        gap: s.gap,
        structure_ok: s.structure_ok,
        findings: s.findings,
        vk_value: vk.value,
        vk_crosscheck,
        vk_closed_form: vk_closed_form(params.c, params.k)?,
        vk_relative_difference,
        condition_estimate: vk.condition_estimate,
        max_eigen_residual: s.max_eigen_residual,
        operator_norm: s.operator_norm,
        warnings,
    })
}
