//! Runs every numerical check at one parameter pair and collects a verdict.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::evolution::{run_evolution, EvolutionConfig, EvolutionSummary, PerturbationKind};
use crate::functionals::{
    dq_dk_closed_form, dq_dk_finite_difference, euler_lagrange_residual, q_closed_form, q_quadrature, DQDK_STEP,
};
use crate::params::WaveParameters;
use crate::profile::{construct_profile, scaling_covariance_check, GridSpec};
use crate::spectral::{casimir_residual, hessian_identity_residual, spectral_report, vk_crosscheck, DEFAULT_DK};

/// Perturbation sizes of the orbital-stability experiment.
pub const STABILITY_EPS: [f64; 3] = [1e-4, 3e-4, 1e-3];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Pass condition in words.
    pub requirement: String,
    pub measured: BTreeMap<&'static str, f64>,
    /// Set when the check could not be evaluated.
    pub error: Option<String>,
    pub seconds: f64,
}

impl Check {
    fn errored(name: &'static str, err: &crate::error::Error) -> Self {
        Self {
            name,
            passed: false,
            requirement: String::new(),
            measured: BTreeMap::new(),
            error: Some(err.to_string()),
            seconds: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub c: f64,
    pub k: f64,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub passed: bool,
}

impl Verdict {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serializes")
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Run the time-evolution checks (a few seconds).
    pub evolution: bool,
    /// Periodic grid size of the evolution checks.
    pub n: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { evolution: true, n: 4096 }
    }
}

struct Builder {
    name: &'static str,
    requirement: String,
    measured: BTreeMap<&'static str, f64>,
    start: Instant,
}

impl Builder {
    fn new(name: &'static str, requirement: impl Into<String>) -> Self {
        Self { name, requirement: requirement.into(), measured: BTreeMap::new(), start: Instant::now() }
    }

    fn m(mut self, key: &'static str, value: f64) -> Self {
        self.measured.insert(key, value);
        self
    }

    fn finish(self, passed: bool) -> Check {
        Check {
            name: self.name,
            passed,
            requirement: self.requirement,
            measured: self.measured,
            error: None,
            seconds: self.start.elapsed().as_secs_f64(),
        }
    }
}

fn crest_check(params: &WaveParameters, grid: &GridSpec) -> Result<Check> {
    let b = Builder::new("crest", "|max phi - phi_1| < 1e-6");
    let profile = construct_profile(params, grid)?;
    let err = (profile.crest() - params.phi1).abs();
    Ok(b.m("crest", profile.crest()).m("phi_1", params.phi1).m("error", err).finish(err < 1e-6))
}

fn variational_check(params: &WaveParameters, grid: &GridSpec) -> Result<Check> {
    let b = Builder::new("euler_lagrange", "sup|dLambda/dm(mu)| < 1e-6 and drops >= 4x when dx halves");
    let coarse = euler_lagrange_residual(&construct_profile(params, grid)?)?;
    let fine_grid = GridSpec { dx: 0.5 * grid.dx, ..*grid };
    let fine = euler_lagrange_residual(&construct_profile(params, &fine_grid)?)?;
    let ratio = coarse / fine;
    Ok(b.m("residual", coarse).m("residual_half_dx", fine).m("ratio", ratio).finish(coarse < 1e-6 && ratio >= 4.0))
}

fn spectral_check(params: &WaveParameters, grid: &GridSpec, warnings: &mut Vec<String>) -> Result<Check> {
    let b = Builder::new(
        "spectral_structure",
        "one negative eigenvalue, one near-zero with alignment > 0.999, rest positive; kernel eigenvalue O(dx^2)",
    );
    let report = spectral_report(&construct_profile(params, grid)?)?;
    warnings.extend(report.warnings.iter().cloned());
    let fine_grid = GridSpec { dx: 0.5 * grid.dx, ..*grid };
    let fine = spectral_report(&construct_profile(params, &fine_grid)?)?;
    let kernel = report.kernel_eigenvalue.unwrap_or(f64::NAN).abs();
    let kernel_fine = fine.kernel_eigenvalue.unwrap_or(f64::NAN).abs();
    let ratio = kernel / kernel_fine;
    let passed = report.structure_ok && fine.structure_ok && ratio >= 3.0;
    Ok(b.m("negative_count", report.negative_count as f64)
        .m("zero_count", report.zero_count as f64)
        .m("lambda1", report.eigenvalues.first().copied().unwrap_or(f64::NAN))
        .m("kernel_eigenvalue", kernel)
        .m("kernel_eigenvalue_half_dx", kernel_fine)
        .m("kernel_ratio", ratio)
        .m("kernel_alignment", report.kernel_alignment.unwrap_or(f64::NAN))
        .m("tol_zero", report.tol_zero)
        .finish(passed))
}

fn vk_check(params: &WaveParameters, grid: &GridSpec, warnings: &mut Vec<String>) -> Result<Check> {
    let b = Builder::new(
        "vakhitov_kolokolov",
        "|Q_quad - Q_closed| < 1e-6; dQ/dk closed vs difference < 1e-6 relative; vk within 1% of closed form; both negative",
    );
    let profile = construct_profile(params, grid)?;
    let q_quad = q_quadrature(&profile)?;
    let q_closed = q_closed_form(params.c, params.k)?;
    let dqdk = dq_dk_closed_form(params.c, params.k)?;
    let dqdk_fd = dq_dk_finite_difference(params, &GridSpec::new(grid.dx, profile.half_length()), DQDK_STEP)?;
    let report = spectral_report(&profile)?;
    warnings.extend(report.warnings.iter().filter(|w| !warnings.contains(w)).cloned().collect::<Vec<_>>());
    let vk_closed = report.vk_closed_form;
    let q_err = (q_quad - q_closed).abs();
    let dq_rel = ((dqdk_fd - dqdk) / dqdk).abs();
    let vk_rel = ((report.vk_value - vk_closed) / vk_closed).abs();
    let passed = q_err < 1e-6 && dq_rel < 1e-6 && vk_rel < 0.01 && report.vk_value < 0.0 && dqdk < 0.0;
    Ok(b.m("Q_quad", q_quad)
        .m("Q_closed", q_closed)
        .m("Q_error", q_err)
        .m("dQdk", dqdk)
        .m("dQdk_fd", dqdk_fd)
        .m("dQdk_relative_error", dq_rel)
        .m("vk_value", report.vk_value)
        .m("vk_crosscheck", report.vk_crosscheck)
        .m("vk_closed_form", vk_closed)
        .m("vk_relative_error", vk_rel)
        .m("condition_estimate", report.condition_estimate)
        .finish(passed))
}

fn casimir_check(params: &WaveParameters, grid: &GridSpec) -> Result<Check> {
    let b = Builder::new("casimir", "||J dF2/dm||, ||J dF3/dm|| < 1e-5 at dx/2, dropping >= 3x per halving");
    let half = GridSpec { dx: 0.5 * grid.dx, ..*grid };
    let coarse = construct_profile(params, grid)?;
    let fine = construct_profile(params, &half)?;
    let rc = casimir_residual(coarse.mu(), coarse.dx())?;
    let rf = casimir_residual(fine.mu(), fine.dx())?;
    let (ratio2, ratio3) = (rc.r2 / rf.r2, rc.r3 / rf.r3);
    let passed = rf.r2 < 1e-5 && rf.r3 < 1e-5 && ratio2 >= 3.0 && ratio3 >= 3.0;
    Ok(b.m("r2", rf.r2)
        .m("r3", rf.r3)
        .m("r2_coarse", rc.r2)
        .m("r3_coarse", rc.r3)
        .m("ratio2", ratio2)
        .m("ratio3", ratio3)
        .finish(passed))
}

fn scaling_check(params: &WaveParameters, dx: f64) -> Result<Check> {
    let b = Builder::new("scaling_covariance", "sup|phi(4c, 2k) - 2 phi(c, k)| < 1e-6");
    let r = scaling_covariance_check(params, 2.0, &GridSpec::default_for(params).with_dx(dx))?;
    Ok(b.m("sup_difference", r.sup_difference)
        .m("crest_difference", r.crest_difference)
        .finish(r.sup_difference < 1e-6))
}

fn identity_check(params: &WaveParameters, grid: &GridSpec) -> Result<Check> {
    let b = Builder::new("hessian_identity", "sup|2L(k mu_k - mu) - (4c/(c-k^2)^2) dcalF/dm| < 1e-3");
    let r = hessian_identity_residual(params, grid, DEFAULT_DK)?;
    Ok(b.m("residual", r.residual_sup).m("rhs_sup", r.rhs_sup).finish(r.residual_sup < 1e-3))
}

fn evolution_checks(params: &WaveParameters, n: usize) -> Result<Vec<Check>> {
    let base = EvolutionConfig { n, ..EvolutionConfig::new(params.c, params.k) };
    let mut configs = vec![base];
    for eps in STABILITY_EPS {
        let mut cfg = base;
        cfg.eps = eps;
        cfg.perturbation = PerturbationKind::Gaussian;
        cfg.control.t_end = 20.0;
        configs.push(cfg);
    }
    let start = Instant::now();
    let runs: Vec<EvolutionSummary> =
        configs.par_iter().map(|c| run_evolution(c).map(|r| r.summary)).collect::<Result<_>>()?;
    let seconds = start.elapsed().as_secs_f64();

    let free = &runs[0];
    let drift = free.max_relative_drift;
    let conservation = Builder::new("conservation", "relative drift of F1, F2, F3 < 1e-6 over t in [0, 10]")
        .m("drift_F1", drift[0])
        .m("drift_F2", drift[1])
        .m("drift_F3", drift[2])
        .m("min_m", free.min_m)
        .finish(drift.iter().all(|d| *d < 1e-6) && free.min_m > 0.0);
    let speed = Builder::new("travelling_speed", "|r*(10) - 10c| < 2 dx and sup d < 5e-4 ||mu - k||_H1")
        .m("crest_position_error", free.crest_position_error)
        .m("dx", free.dx)
        .m("sup_distance", free.sup_distance)
        .m("wave_h1_excess", free.wave_h1_excess)
        .finish(free.crest_position_error.abs() < 2.0 * free.dx && free.sup_distance < 5e-4 * free.wave_h1_excess);

    let mut stability = Builder::new("orbital_stability", "sup_{t<=20} d <= 10 eps, sup d / eps within a factor 2");
    let ratios: Vec<f64> = runs[1..].iter().map(|r| r.sup_distance / r.eps).collect();
    for (r, key) in runs[1..].iter().zip(["sup_d_eps_1e-4", "sup_d_eps_3e-4", "sup_d_eps_1e-3"]) {
        stability = stability.m(key, r.sup_distance);
    }
    let spread = ratios.iter().copied().fold(0.0, f64::max) / ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let bounded = runs[1..].iter().all(|r| r.sup_distance <= 10.0 * r.eps && r.min_m > 0.0);
    let stability = stability.m("ratio_spread", spread).finish(bounded && spread <= 2.0);

    let mut out = vec![conservation, speed, stability];
    for c in out.iter_mut() {
        c.seconds = seconds;
    }
    Ok(out)
}

/// Runs all checks at `(c, k)` on the default grid.
///
/// Only invalid parameters are returned as an error; a check that fails to
/// evaluate is recorded as failed with its error message.
pub fn verify_all(c: f64, k: f64, options: &VerifyOptions) -> Result<Verdict> {
    let params = WaveParameters::new(c, k)?;
    let grid = GridSpec::default_for(&params);
    let half = grid.with_dx(0.5 * grid.dx);
    let mut warnings = Vec::new();
    let record = |name: &'static str, r: Result<Check>| r.unwrap_or_else(|e| Check::errored(name, &e));
    let mut checks = vec![
        record("crest", crest_check(&params, &grid)),
        record("euler_lagrange", variational_check(&params, &grid)),
        record("spectral_structure", spectral_check(&params, &grid, &mut warnings)),
        record("vakhitov_kolokolov", vk_check(&params, &grid, &mut warnings)),
        record("casimir", casimir_check(&params, &grid)),
    ];
    if options.evolution {
        match evolution_checks(&params, options.n) {
            Ok(v) => checks.extend(v),
            Err(e) => {
                for name in ["conservation", "travelling_speed", "orbital_stability"] {
                    checks.push(Check::errored(name, &e));
                }
            }
        }
    }
    checks.push(record("scaling_covariance", scaling_check(&params, half.dx)));
    checks.push(record("hessian_identity", identity_check(&params, &half)));
    match vk_crosscheck(&params, &grid, DEFAULT_DK) {
        Ok(v) if v < 0.0 => {}
        Ok(v) => warnings.push(format!("VK cross-check route is not negative: {v}")),
        Err(e) => warnings.push(format!("VK cross-check route failed: {e}")),
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(Verdict { c, k, checks, warnings, passed })
}
