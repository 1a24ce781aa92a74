use std::path::PathBuf;

use mch_core::evolution::{run_evolution, EvolutionConfig, StepControl};
use mch_core::functionals::{functional_report, FUNCTIONALS_CSV_HEADER};
use mch_core::params::WaveParameters;
use mch_core::profile::{construct_profile, profile_residuals, GridOverride, GridSpec, ProfileResiduals};
use mch_core::spectral::{spectral_report, vk_closed_form, vk_crosscheck, vk_inner_product, DEFAULT_DK};
use mch_core::sweep::{k_values, run_sweep_with};
use mch_core::verify::{verify_all, VerifyOptions};
use mch_core::WaveProfile;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::OutputDir;

#[derive(Serialize)]
struct Resolved<'a> {
    mchwave_version: &'static str,
    #[serde(flatten)]
    config: &'a RunConfig,
    /// Values actually used where the config left a default.
    effective: Value,
}

#[derive(Serialize)]
struct WaveSummary {
    parameters: WaveParameters,
    dx: f64,
    half_length: f64,
    points: usize,
    crest: f64,
    tail_error: f64,
    residuals: ProfileResiduals,
}

#[derive(Serialize)]
struct VkReport {
    c: f64,
    k: f64,
    dx: f64,
    half_length: f64,
    vk_value: f64,
    vk_crosscheck: f64,
    vk_closed_form: f64,
    /// `|vk_value - vk_crosscheck| / |vk_crosscheck|`.
    relative_difference: f64,
    dk: f64,
    condition_estimate: f64,
    warnings: Vec<String>,
}

fn grid_override(cfg: &RunConfig) -> GridOverride {
    GridOverride { dx: cfg.dx, half_length: cfg.half_length }
}

fn grid_json(grid: &GridSpec, profile: &WaveProfile) -> Value {
    json!({ "dx": grid.dx, "half_length": profile.half_length() })
}

fn profile_for(cfg: &RunConfig) -> CliResult<(WaveParameters, GridSpec, WaveProfile)> {
    let params = WaveParameters::new(cfg.c, cfg.k())?;
    let grid = grid_override(cfg).resolve(&params);
    let profile = construct_profile(&params, &grid)?;
    Ok((params, grid, profile))
}

/// Runs the configured command; returns the output directory.
pub fn run(cfg: &RunConfig) -> CliResult<PathBuf> {
    let mut out = OutputDir::create(&cfg.out, cfg.force)?;
    let effective = match cfg.command {
        Command::Wave => wave(cfg, &mut out)?,
        Command::Functionals => functionals(cfg, &mut out)?,
        Command::Spectrum => spectrum(cfg, &mut out)?,
        Command::Vk => vk(cfg, &mut out)?,
        Command::Evolve => evolve(cfg, &mut out)?,
        Command::Sweep => return sweep(cfg, out),
        Command::VerifyAll => return verify(cfg, out),
    };
    out.finish(&Resolved { mchwave_version: env!("CARGO_PKG_VERSION"), config: cfg, effective })
}

fn wave(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<Value> {
    let (params, grid, profile) = profile_for(cfg)?;
    let summary = WaveSummary {
        parameters: params,
        dx: profile.dx(),
        half_length: profile.half_length(),
        points: profile.len(),
        crest: profile.crest(),
        tail_error: profile.tail_error(),
        residuals: profile_residuals(&profile),
    };
    out.write_with("profile.csv", "profile samples", |w| profile.write_csv(w))?;
    out.write_json("wave.json", "profile summary", &summary)?;
    println!(
        "wave c = {} k = {}: crest {:.10} ({} points, dx = {}, L = {}), tail error {:.2e}",
        params.c, params.k, summary.crest, summary.points, summary.dx, summary.half_length, summary.tail_error
    );
    Ok(grid_json(&grid, &profile))
}

fn functionals(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<Value> {
    let (_, grid, profile) = profile_for(cfg)?;
    let report = functional_report(&profile)?;
    out.write_json("functionals.json", "functional values with Q and dQ/dk", &report)?;
    out.write_with("functionals.csv", "one-row summary", |w| {
        writeln!(w, "{FUNCTIONALS_CSV_HEADER}")?;
        writeln!(w, "{}", report.csv_row())
    })?;
    println!(
        "Q_quad = {:.10}, Q_closed = {:.10}, dQ/dk = {:.6} (difference quotient {:.6}), EL residual {:.2e}",
        report.q_quad, report.q_closed, report.dqdk_closed, report.dqdk_fd, report.el_residual_sup
    );
    Ok(grid_json(&grid, &profile))
}

fn spectrum(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<Value> {
    let (_, grid, profile) = profile_for(cfg)?;
    let report = spectral_report(&profile)?;
    out.write_json("spectrum.json", "spectral report", &report)?;
    out.write_with("eigenvalues.csv", "eigenvalue list", |w| report.write_eigenvalues_csv(w))?;
    println!(
        "{} eigenvalues below the edge {:.4}: {} negative, {} near zero, {} positive; structure {}",
        report.eigenvalues.len(),
        report.ess_edge,
        report.negative_count,
        report.zero_count,
        report.positive_count,
        if report.structure_ok { "ok" } else { "NOT ok" }
    );
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(grid_json(&grid, &profile))
}

fn vk(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<Value> {
    let (params, grid, profile) = profile_for(cfg)?;
    let solve = vk_inner_product(&profile)?;
    let cross = vk_crosscheck(&params, &GridSpec::new(profile.dx(), profile.half_length()), DEFAULT_DK)?;
    let report = VkReport {
        c: params.c,
        k: params.k,
        dx: profile.dx(),
        half_length: profile.half_length(),
        vk_value: solve.value,
        vk_crosscheck: cross,
        vk_closed_form: vk_closed_form(params.c, params.k)?,
        relative_difference: ((solve.value - cross) / cross).abs(),
        dk: DEFAULT_DK,
        condition_estimate: solve.condition_estimate,
        warnings: solve.warnings,
    };
    out.write_json("vk.json", "Vakhitov-Kolokolov quantity", &report)?;
    println!(
        "vk = {:.8} (cross-check {:.8}, closed form {:.8}, relative difference {:.2e})",
        report.vk_value, report.vk_crosscheck, report.vk_closed_form, report.relative_difference
    );
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(grid_json(&grid, &profile))
}

fn evolve(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<Value> {
    let config = EvolutionConfig {
        c: cfg.c,
        k: cfg.k(),
        n: cfg.n,
        l_dom: cfg.l_dom,
        perturbation: cfg.perturbation,
        eps: cfg.eps,
        seed: cfg.seed,
        control: StepControl { t_end: cfg.t_end, dt_max: cfg.dt_max, ..StepControl::default() },
    };
    let run = run_evolution(&config)?;
    let s = &run.summary;
    out.write_with("diagnostics.csv", "diagnostics per sample", |w| run.trajectory.write_diagnostics_csv(w))?;
    out.write_with("terminal.csv", "terminal momentum field", |w| run.trajectory.write_terminal_csv(w))?;
    out.write_json("summary.json", "run summary", s)?;
    println!(
        "t_end = {} in {} steps: sup d = {:.3e}, drift F1 {:.1e} F2 {:.1e} F3 {:.1e}, min m {:.6}, crest offset {:.2e}",
        s.t_end,
        s.steps,
        s.sup_distance,
        s.max_relative_drift[0],
        s.max_relative_drift[1],
        s.max_relative_drift[2],
        s.min_m,
        s.crest_position_error
    );
    Ok(json!({ "l_dom": s.l_dom, "dx": s.dx }))
}

fn sweep(cfg: &RunConfig, mut out: OutputDir) -> CliResult<PathBuf> {
    let ks = k_values(cfg.c, cfg.k_min, cfg.k_max, cfg.k_count)?;
    let table = run_sweep_with(cfg.c, &ks, grid_override(cfg))?;
    out.write_with("sweep.csv", "one row per k", |w| table.write_csv(w))?;
    out.write_json("sweep.json", "rows with warnings and the verdict", &table)?;
    let v = &table.verdict;
    let root = out.finish(&Resolved {
        mchwave_version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        effective: json!({ "k": ks }),
    })?;
    println!(
        "{} rows: dQ/dk < 0 {}, vk < 0 {}, one negative eigenvalue {}, {} failed",
        v.rows, v.all_dqdk_negative, v.all_vk_negative, v.all_single_negative_eigenvalue, v.failed_rows
    );
    if v.failed_rows > 0 {
        let first = table.rows.iter().find_map(|r| r.error.as_ref().map(|e| (r.k, e))).expect("a failed row");
        return Err(numerical(format!(
            "{} of {} sweep rows could not be computed; first at k = {}: {}",
            v.failed_rows, v.rows, first.0, first.1
        )));
    }
    if !v.passed {
        return Err(CliError::Acceptance("sweep verdict failed".into()));
    }
    Ok(root)
}

fn numerical(message: String) -> CliError {
    CliError::Core(mch_core::Error::InvalidInput(message))
}

fn verify(cfg: &RunConfig, mut out: OutputDir) -> CliResult<PathBuf> {
    if cfg.dx.is_some() || cfg.half_length.is_some() {
        eprintln!("warning: verify-all runs each check at its own resolution; --dx and --half-length are ignored");
    }
    let options = VerifyOptions { evolution: !cfg.skip_evolution, n: cfg.n };
    let verdict = verify_all(cfg.c, cfg.k(), &options)?;
    out.write_with("verdict.json", "pass or fail per check with measured values", |w| {
        writeln!(w, "{}", verdict.to_json())
    })?;
    let root = out.finish(&Resolved {
        mchwave_version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        effective: json!({ "evolution_checks": options.evolution }),
    })?;
    for check in &verdict.checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        match &check.error {
            Some(e) => println!("{status} {}: {e}", check.name),
            None => println!("{status} {}: {}", check.name, check.requirement),
        }
    }
    for w in &verdict.warnings {
        eprintln!("warning: {w}");
    }
    if !verdict.passed {
        let failed = verdict.checks.iter().filter(|c| !c.passed).count();
        return Err(CliError::Acceptance(format!("{failed} of {} checks failed", verdict.checks.len())));
    }
    Ok(root)
}
