//! Parameter sweeps over the admissible `k` window at fixed `c`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::functional_report;
use crate::params::{window_lower, window_upper, WaveParameters};
use crate::profile::{construct_profile, GridOverride};
use crate::spectral::spectral_report;

/// Default distance (in units of `sqrt(c)`) of the sweep range from the window ends.
pub const DEFAULT_MARGIN: f64 = 0.02;

pub const SWEEP_CSV_HEADER: &str =
    "c,k,Q_quad,Q_closed,dQdk,dQdk_fd,vk_value,vk_crosscheck,lambda1,lambda2,negative_count,el_residual,status";

/// `[sqrt(c)/3 + m sqrt(c), sqrt(3c)/3 - m sqrt(c)]` for the default margin `m`.
pub fn default_k_range(c: f64) -> (f64, f64) {
    let s = c.sqrt();
    (window_lower(c) + DEFAULT_MARGIN * s, window_upper(c) - DEFAULT_MARGIN * s)
}

/// `count` equally spaced values in `[k_min, k_max]`, each validated.
pub fn k_values(c: f64, k_min: f64, k_max: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidParameter { field: "k_count", message: "sweep range is empty".into() });
    }
    if !(k_min <= k_max) {
        return Err(Error::InvalidParameter {
            field: "k_min",
            message: format!("empty range: k_min = {k_min} > k_max = {k_max}"),
        });
    }
    if count == 1 && k_min != k_max {
        return Err(Error::InvalidParameter { field: "k_count", message: "a single value needs k_min = k_max".into() });
    }
    let ks: Vec<f64> = if count == 1 {
        vec![k_min]
    } else {
        let step = (k_max - k_min) / (count - 1) as f64;
        (0..count).map(|i| if i == count - 1 { k_max } else { k_min + i as f64 * step }).collect()
    };
    for &k in &ks {
        WaveParameters::new(c, k)?;
    }
    Ok(ks)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub c: f64,
    pub k: f64,
    #[serde(rename = "Q_quad")]
    pub q_quad: f64,
    #[serde(rename = "Q_closed")]
    pub q_closed: f64,
    #[serde(rename = "dQdk")]
    pub dqdk: f64,
    #[serde(rename = "dQdk_fd")]
    pub dqdk_fd: f64,
    pub vk_value: f64,
    pub vk_crosscheck: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub negative_count: usize,
    pub el_residual: f64,
    pub warnings: Vec<String>,
    /// Set when the row could not be computed; numeric fields are then NaN.
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(c: f64, k: f64, err: &Error) -> Self {
        Self {
            c,
            k,
            q_quad: f64::NAN,
            q_closed: f64::NAN,
            dqdk: f64::NAN,
            dqdk_fd: f64::NAN,
            vk_value: f64::NAN,
            vk_crosscheck: f64::NAN,
            lambda1: f64::NAN,
            lambda2: f64::NAN,
            negative_count: 0,
            el_residual: f64::NAN,
            warnings: Vec::new(),
            error: Some(err.to_string()),
        }
    }

    /// `dQdk < 0`, `vk_value < 0` and exactly one negative eigenvalue.
    pub fn ok(&self) -> bool {
        self.error.is_none() && self.dqdk < 0.0 && self.vk_value < 0.0 && self.negative_count == 1
    }

    pub fn status(&self) -> &'static str {
        match (&self.error, self.ok()) {
            (Some(_), _) => "error",
            (None, true) => "ok",
            (None, false) => "fail",
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{},{:.17e},{}",
            self.c,
            self.k,
            self.q_quad,
            self.q_closed,
            self.dqdk,
            self.dqdk_fd,
            self.vk_value,
            self.vk_crosscheck,
            self.lambda1,
            self.lambda2,
            self.negative_count,
            self.el_residual,
            self.status()
        )
    }
}

/// One sweep row on the default grid at `(c, k)`.
pub fn sweep_row(c: f64, k: f64) -> SweepRow {
    sweep_row_with(c, k, GridOverride::default())
}

pub fn sweep_row_with(c: f64, k: f64, grid: GridOverride) -> SweepRow {
    compute_row(c, k, grid).unwrap_or_else(|e| SweepRow::failed(c, k, &e))
}

fn compute_row(c: f64, k: f64, grid: GridOverride) -> Result<SweepRow> {
    let params = WaveParameters::new(c, k)?;
    let profile = construct_profile(&params, &grid.resolve(&params))?;
    let f = functional_report(&profile)?;
    let s = spectral_report(&profile)?;
    let eig = |j: usize| s.eigenvalues.get(j).copied().unwrap_or(f64::NAN);
    Ok(SweepRow {
        c,
        k,
        q_quad: f.q_quad,
        q_closed: f.q_closed,
        dqdk: f.dqdk_closed,
        dqdk_fd: f.dqdk_fd,
        vk_value: s.vk_value,
        vk_crosscheck: s.vk_crosscheck,
        lambda1: eig(0),
        lambda2: eig(1),
        negative_count: s.negative_count,
        el_residual: f.el_residual_sup,
        warnings: s.warnings,
        error: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepVerdict {
    pub rows: usize,
    pub all_dqdk_negative: bool,
    pub all_vk_negative: bool,
    pub all_single_negative_eigenvalue: bool,
    pub failed_rows: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub verdict: SweepVerdict,
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{SWEEP_CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(out, "{}", r.csv_row())?;
        }
        Ok(())
    }
}

/// Computes every row in parallel on the default grids; row order follows `ks`.
pub fn run_sweep(c: f64, ks: &[f64]) -> Result<SweepTable> {
    run_sweep_with(c, ks, GridOverride::default())
}

pub fn run_sweep_with(c: f64, ks: &[f64], grid: GridOverride) -> Result<SweepTable> {
    if ks.is_empty() {
        return Err(Error::InvalidParameter { field: "k_count", message: "sweep range is empty".into() });
    }
    let rows: Vec<SweepRow> = ks.par_iter().map(|&k| sweep_row_with(c, k, grid)).collect();
    let ok = |pred: fn(&SweepRow) -> bool| rows.iter().all(|r| r.error.is_none() && pred(r));
    let verdict = SweepVerdict {
        rows: rows.len(),
        all_dqdk_negative: ok(|r| r.dqdk < 0.0),
        all_vk_negative: ok(|r| r.vk_value < 0.0),
        all_single_negative_eigenvalue: ok(|r| r.negative_count == 1),
        failed_rows: rows.iter().filter(|r| r.error.is_some()).count(),
        passed: rows.iter().all(SweepRow::ok),
    };
    Ok(SweepTable { rows, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_generation() {
        let ks = k_values(1.0, 0.36, 0.56, 21).unwrap();
        assert_eq!(ks.len(), 21);
        assert!((ks[1] - 0.37).abs() < 1e-15 && ks[20] == 0.56);
        assert!(k_values(1.0, 0.36, 0.56, 0).is_err());
        assert!(k_values(1.0, 0.5, 0.4, 3).is_err());
        assert!(k_values(1.0, 0.3, 0.5, 3).is_err());
        let (lo, hi) = default_k_range(1.0);
        assert!((lo - (1.0 / 3.0 + 0.02)).abs() < 1e-15 && hi < 0.5774 - 0.02);
    }

    #[test]
    fn small_sweep_matches_single_rows() {
        let t = run_sweep(1.0, &[0.4, 0.5]).unwrap();
        assert!(t.verdict.passed, "{:?}", t.verdict);
        assert_eq!(t.rows[0], sweep_row(1.0, 0.4));
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(1).unwrap().ends_with(",ok"));
    }

    #[test]
    fn failed_row_is_recorded() {
        let t = run_sweep(1.0, &[0.4, 0.7]).unwrap();
        assert_eq!(t.verdict.failed_rows, 1);
        assert!(!t.verdict.passed);
        assert_eq!(t.rows[1].status(), "error");
    }
}
