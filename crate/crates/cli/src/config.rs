//! Command-line flags, the JSON config file and their merge into a [`RunConfig`].
//!
//! Precedence: flag, then config file, then built-in default.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mch_core::evolution::PerturbationKind;
use mch_core::params::validate_parameters;
use mch_core::sweep::default_k_range;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "MCHWAVE_OUT";
pub const DEFAULT_OUT_ROOT: &str = "mchwave-out";
pub const DEFAULT_K_COUNT: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Construct the solitary-wave profile and export it.
    Wave,
    /// Conserved functionals, Q and dQ/dk.
    Functionals,
    /// Hessian eigenvalues below the essential edge.
    Spectrum,
    /// Vakhitov-Kolokolov quantity by both routes.
    Vk,
    /// Evolve a perturbed wave on a periodic domain.
    Evolve,
    /// Functionals and spectrum across a range of k.
    Sweep,
    /// Run every check at one (c, k) and emit a verdict.
    VerifyAll,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Wave => "wave",
            Self::Functionals => "functionals",
            Self::Spectrum => "spectrum",
            Self::Vk => "vk",
            Self::Evolve => "evolve",
            Self::Sweep => "sweep",
            Self::VerifyAll => "verify-all",
        }
    }

    fn needs_k(self) -> bool {
        self != Self::Sweep
    }
}

#[derive(Debug, Parser)]
#[command(name = "mchwave", version, about = "Solitary waves of the modified Camassa-Holm equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub flags: Flags,
}

/// Flags mirror the keys of the config file (`--half-length` is `half_length`).
#[derive(Debug, Default, Args)]
pub struct Flags {
    /// Wave speed.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Background level.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// Profile grid spacing.
    #[arg(long, global = true)]
    pub dx: Option<f64>,
    /// Profile half-length L (grid is [-L, L]).
    #[arg(long, global = true)]
    pub half_length: Option<f64>,
    /// Sweep range start.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub k_min: Option<f64>,
    /// Sweep range end.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub k_max: Option<f64>,
    /// Number of sweep values.
    #[arg(long, global = true)]
    pub k_count: Option<usize>,
    /// Periodic grid size (power of two).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Periodic domain length.
    #[arg(long, global = true)]
    pub l_dom: Option<f64>,
    /// Time-step cap.
    #[arg(long, global = true)]
    pub dt_max: Option<f64>,
    /// Final time.
    #[arg(long, global = true)]
    pub t_end: Option<f64>,
    /// gaussian, translation_mode or bandlimited_noise.
    #[arg(long, global = true)]
    pub perturbation: Option<String>,
    /// H1 size of the perturbation.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Seed for band-limited noise.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overwrite a non-empty output directory.
    #[arg(long, global = true)]
    pub force: bool,
    /// verify-all: skip the time-evolution checks.
    #[arg(long, global = true)]
    pub skip_evolution: bool,
}

/// Contents of a config file; every key is optional.
#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<Command>,
    pub c: Option<f64>,
    pub k: Option<f64>,
    pub dx: Option<f64>,
    pub half_length: Option<f64>,
    pub k_min: Option<f64>,
    pub k_max: Option<f64>,
    pub k_count: Option<usize>,
    pub n: Option<usize>,
    pub l_dom: Option<f64>,
    pub dt_max: Option<f64>,
    pub t_end: Option<f64>,
    pub perturbation: Option<PerturbationKind>,
    pub eps: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub force: Option<bool>,
    pub skip_evolution: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Config { path: path.to_owned(), message: e.to_string() })?;
        serde_json::from_str(&text).map_err(|e| CliError::Config { path: path.to_owned(), message: e.to_string() })
    }
}

/// Fully resolved run description; written to `resolved_config.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub c: f64,
    pub k: Option<f64>,
    /// Grid overrides; `None` selects the per-wave default.
    pub dx: Option<f64>,
    pub half_length: Option<f64>,
    pub k_min: f64,
    pub k_max: f64,
    pub k_count: usize,
    pub n: usize,
    pub l_dom: Option<f64>,
    pub dt_max: f64,
    pub t_end: f64,
    pub perturbation: PerturbationKind,
    pub eps: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub force: bool,
    pub skip_evolution: bool,
    pub config_file: Option<PathBuf>,
}

impl RunConfig {
    /// The validated `k` of a single-wave command.
    pub fn k(&self) -> f64 {
        self.k.expect("k is validated for single-wave commands")
    }
}

fn missing(field: &str, command: Command) -> CliError {
    CliError::Usage(format!("`{}` needs --{field} (or `{field}` in the config file)", command.name()))
}

/// Merges flags over the config file over defaults and validates `(c, k)`.
pub fn parse_config(cli: Cli) -> CliResult<RunConfig> {
    let Cli { command, flags } = cli;
    let file = match &flags.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let command = command.or(file.command).ok_or_else(|| {
        CliError::Usage("no command given (wave, functionals, spectrum, vk, evolve, sweep, verify-all)".into())
    })?;

    let c = flags.c.or(file.c).ok_or_else(|| missing("c", command))?;
    let k = flags.k.or(file.k);
    if command.needs_k() {
        let k = k.ok_or_else(|| missing("k", command))?;
        validate_parameters(c, k)?;
    } else if !(c.is_finite() && c > 0.0) {
        return Err(mch_core::Error::InvalidParameter {
            field: "c",
            message: format!("wave speed must be positive and finite, got {c}"),
        }
        .into());
    }

    let perturbation = match flags.perturbation {
        Some(s) => s.parse::<PerturbationKind>()?,
        None => file.perturbation.unwrap_or_default(),
    };
    let (lo, hi) = default_k_range(c);
    let defaults = mch_core::evolution::EvolutionConfig::new(c, 0.0);
    let out = match flags.out.or(file.out) {
        Some(p) => p,
        None => {
            let root = std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_ROOT));
            root.join(command.name())
        }
    };

    Ok(RunConfig {
        command,
        c,
        k,
        dx: flags.dx.or(file.dx),
        half_length: flags.half_length.or(file.half_length),
        k_min: flags.k_min.or(file.k_min).unwrap_or(lo),
        k_max: flags.k_max.or(file.k_max).unwrap_or(hi),
        k_count: flags.k_count.or(file.k_count).unwrap_or(DEFAULT_K_COUNT),
        n: flags.n.or(file.n).unwrap_or(defaults.n),
        l_dom: flags.l_dom.or(file.l_dom),
        dt_max: flags.dt_max.or(file.dt_max).unwrap_or(defaults.control.dt_max),
        t_end: flags.t_end.or(file.t_end).unwrap_or(defaults.control.t_end),
        perturbation,
        eps: flags.eps.or(file.eps).unwrap_or(defaults.eps),
        seed: flags.seed.or(file.seed).unwrap_or(defaults.seed),
        out,
        force: flags.force || file.force.unwrap_or(false),
        skip_evolution: flags.skip_evolution || file.skip_evolution.unwrap_or(false),
        config_file: flags.config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> CliResult<RunConfig> {
        let mut argv = vec!["mchwave"];
        argv.extend_from_slice(args);
        parse_config(Cli::try_parse_from(argv).expect("flags parse"))
    }

    #[test]
    fn defaults_are_filled() {
        let cfg = parse(&["--c", "1", "--k", "0.4", "wave"]).unwrap();
        assert_eq!(cfg.command, Command::Wave);
        assert_eq!((cfg.n, cfg.k_count, cfg.seed), (4096, 21, 0));
        assert_eq!((cfg.dt_max, cfg.t_end, cfg.eps), (0.01, 10.0, 0.0));
        assert_eq!(cfg.perturbation, PerturbationKind::Gaussian);
        assert!(cfg.dx.is_none() && cfg.l_dom.is_none());
    }

    #[test]
    fn flags_after_the_command() {
        let cfg =
            parse(&["evolve", "--c", "1", "--k", "0.4", "--perturbation", "bandlimited_noise", "--seed", "7"]).unwrap();
        assert_eq!(cfg.perturbation, PerturbationKind::BandlimitedNoise);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn inadmissible_k_names_the_window() {
        let err = parse(&["--k", "0.6", "--c", "1", "wave"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let msg = err.to_string();
        assert!(msg.contains("sqrt(c)/3") && msg.contains("sqrt(3c)/3"), "{msg}");
    }

    #[test]
    fn missing_k_is_a_usage_error() {
        let err = parse(&["--c", "1", "spectrum"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(parse(&["--c", "1", "sweep"]).is_ok());
    }

    #[test]
    fn unknown_perturbation_is_rejected() {
        let err = parse(&["--c", "1", "--k", "0.4", "--perturbation", "square", "evolve"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("perturbation"));
    }

    #[test]
    fn file_keys_are_checked() {
        let err = serde_json::from_str::<FileConfig>(r#"{"c": 1, "kk": 0.4}"#).unwrap_err();
        assert!(err.to_string().contains("unknown field `kk`"));
        let f: FileConfig =
            serde_json::from_str(r#"{"command": "verify-all", "perturbation": "translation_mode"}"#).unwrap();
        assert_eq!(f.command, Some(Command::VerifyAll));
        assert_eq!(f.perturbation, Some(PerturbationKind::TranslationMode));
    }

    #[test]
    fn schema_lists_exactly_the_file_keys() {
        let schema: serde_json::Value = serde_json::from_str(include_str!("../schema/run_config.schema.json")).unwrap();
        let props = schema["properties"].as_object().unwrap();
        let mut schema_keys: Vec<&str> = props.keys().map(String::as_str).collect();
        schema_keys.sort_unstable();

        let err = serde_json::from_str::<FileConfig>(r#"{"not_a_key": 0}"#).unwrap_err().to_string();
        let expected = &err[err.find("expected one of").unwrap()..];
        let mut struct_keys: Vec<&str> = expected.split('`').skip(1).step_by(2).collect();
        struct_keys.sort_unstable();
        assert_eq!(schema_keys, struct_keys);
    }
}
