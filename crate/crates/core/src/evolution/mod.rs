//! Pseudo-spectral time evolution of `m_t + ((u^2 - u_x^2) m)_x = 0` on a
//! periodic domain, with conservation and orbital-distance diagnostics.

mod distance;
mod field;
mod perturbation;

use std::io::Write;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use distance::{orbital_distance, OrbitalDistance};
pub use field::{
    default_l_dom, h1_h3_equivalence_check, h1_norm, helmholtz_inverse, EquivalenceReport, MomentumField,
    WrappedProfile,
};
pub use perturbation::{make_perturbation, PerturbationKind};

use crate::error::{Error, Result};
use crate::fourier::Fourier;
use crate::functionals::{conserved_integrals, ConservedIntegrals, Domain};
use crate::params::WaveParameters;

/// `-(g)_x` with `g = (u^2 - u_x^2) m`; coefficients with `|j| > N/3`
/// of `g` are discarded.
///
/// `t` only labels a blow-up error.
pub fn rhs(fourier: &Fourier, m: &[f64], t: f64) -> Result<Vec<f64>> {
    let n = fourier.len();
    let kappa = fourier.wavenumbers();
    let m_hat = fourier.forward(m);
    let u_hat: Vec<Complex64> = m_hat.iter().zip(kappa).map(|(z, kj)| z / (1.0 + kj * kj)).collect();
    let mut ux_hat = u_hat.clone();
    fourier.differentiate_spectrum(&mut ux_hat);
    let u = fourier.inverse(u_hat);
    let ux = fourier.inverse(ux_hat);
    let g: Vec<f64> = (0..n).map(|i| (u[i] * u[i] - ux[i] * ux[i]) * m[i]).collect();
    let mut g_hat = fourier.forward(&g);
    let cutoff = n / 3;
    for (j, z) in g_hat.iter_mut().enumerate() {
        if j.min(n - j) > cutoff {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    fourier.differentiate_spectrum(&mut g_hat);
    let out: Vec<f64> = fourier.inverse(g_hat).into_iter().map(|v| -v).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::BlowUp { t });
    }
    Ok(out)
}

/// `max |u^2 - u_x^2|`, the advection speed bound.
pub fn max_speed(field: &MomentumField) -> f64 {
    let f = field.fourier();
    let u = field.u();
    let ux = f.derivative(&u);
    u.iter().zip(&ux).map(|(a, b)| (a * a - b * b).abs()).fold(0.0, f64::max)
}

fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// One classical RK4 step.
pub fn step(field: &MomentumField, dt: f64, t: f64) -> Result<MomentumField> {
    let f = field.fourier();
    let m = field.m();
    let k1 = rhs(f, m, t)?;
    let k2 = rhs(f, &axpy(m, 0.5 * dt, &k1), t)?;
    let k3 = rhs(f, &axpy(m, 0.5 * dt, &k2), t)?;
    let k4 = rhs(f, &axpy(m, dt, &k3), t)?;
    let next: Vec<f64> = (0..m.len()).map(|i| m[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::BlowUp { t: t + dt });
    }
    let mut out = field.clone();
    out.set_unchecked(next);
    Ok(out)
}

/// Time-stepping controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub t_end: f64,
    /// Upper bound on the step.
    pub dt_max: f64,
    /// `dt <= cfl dx / max|u^2 - u_x^2|`.
    pub cfl: f64,
    pub sample_interval: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { t_end: 10.0, dt_max: 0.01, cfl: 0.5, sample_interval: 0.1 }
    }
}

impl StepControl {
    fn validate(&self) -> Result<()> {
        let checks = [
            ("t_end", self.t_end >= 0.0 && self.t_end.is_finite()),
            ("dt_max", self.dt_max > 0.0 && self.dt_max.is_finite()),
            ("cfl", self.cfl > 0.0 && self.cfl.is_finite()),
            ("sample_interval", self.sample_interval > 0.0 && self.sample_interval.is_finite()),
        ];
        for (field, ok) in checks {
            if !ok {
                return Err(Error::InvalidParameter { field, message: format!("invalid value in {self:?}") });
            }
        }
        Ok(())
    }
}

/// Diagnostics at one sample time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub integrals: ConservedIntegrals,
    pub d: f64,
    /// Unwrapped optimal shift.
    pub r_star: f64,
    pub min_m: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub terminal: MomentumField,
    pub steps: usize,
}

/// Header of the diagnostics CSV.
pub const TRAJECTORY_CSV_HEADER: &str = "t,F1,F2,F3,d,r_star,min_m";

impl Trajectory {
    /// `|F_i(t) - F_i(0)| / max(|F_i(0)|, 1)`, maximized over samples.
    pub fn max_relative_drift(&self) -> [f64; 3] {
        let first = self.samples[0].integrals.as_array();
        let mut out = [0.0f64; 3];
        for s in &self.samples {
            let v = s.integrals.as_array();
            for i in 0..3 {
                out[i] = out[i].max((v[i] - first[i]).abs() / first[i].abs().max(1.0));
            }
        }
        out
    }

    pub fn sup_distance(&self) -> f64 {
        self.samples.iter().map(|s| s.d).fold(0.0, f64::max)
    }

    pub fn min_m(&self) -> f64 {
        self.samples.iter().map(|s| s.min_m).fold(f64::INFINITY, f64::min)
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }

    pub fn write_diagnostics_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{TRAJECTORY_CSV_HEADER}")?;
        for s in &self.samples {
            let i = s.integrals;
            writeln!(
                out,
                "{:.12e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                s.t, i.f1, i.f2, i.f3, s.d, s.r_star, s.min_m
            )?;
        }
        Ok(())
    }

    /// Terminal state as `x,m`.
    pub fn write_terminal_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,m")?;
        for (x, m) in self.terminal.x().iter().zip(self.terminal.m()) {
            writeln!(out, "{x:.17e},{m:.17e}")?;
        }
        Ok(())
    }
}

fn sample(field: &MomentumField, reference: &WrappedProfile, t: f64, previous_r: Option<f64>) -> Result<Sample> {
    let integrals = conserved_integrals(field.m(), field.dx(), field.k(), Domain::Periodic)?;
    let od = orbital_distance(field, reference)?;
    let r_star = match previous_r {
        Some(prev) => {
            let l = field.l_dom();
            od.r_star + l * ((prev - od.r_star) / l).round()
        }
        None => od.r_star,
    };
    Ok(Sample { t, integrals, d: od.d, r_star, min_m: field.min_m() })
}

/// Integrates from `initial` to `control.t_end`, sampling diagnostics every
/// `sample_interval` (steps are shortened to land on sample times).
pub fn evolve(initial: MomentumField, reference: &WrappedProfile, control: &StepControl) -> Result<Trajectory> {
    control.validate()?;
    let dx = initial.dx();
    let mut field = initial;
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut samples = vec![sample(&field, reference, t, None)?];
    let mut next_sample = 1usize;
    let tol = 1e-12 * control.t_end.max(1.0);
    while t < control.t_end - tol {
        let target = (next_sample as f64 * control.sample_interval).min(control.t_end);
        while t < target - tol {
            let speed = max_speed(&field);
            let cfl_dt = if speed > 0.0 { control.cfl * dx / speed } else { f64::INFINITY };
            let dt = control.dt_max.min(cfl_dt).min(target - t);
            field = step(&field, dt, t)?;
            t = if target - (t + dt) <= tol { target } else { t + dt };
            steps += 1;
            let min_m = field.min_m();
            if !(min_m > 0.0) {
                return Err(Error::PositivityLoss { t, min_m });
            }
        }
        let prev = samples.last().map(|s| s.r_star);
        samples.push(sample(&field, reference, t, prev)?);
        next_sample += 1;
    }
    Ok(Trajectory { samples, terminal: field, steps })
}

/// One perturbed-wave experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub c: f64,
    pub k: f64,
    pub n: usize,
    /// Period; `4 L` by default.
    pub l_dom: Option<f64>,
    pub perturbation: PerturbationKind,
    pub eps: f64,
    pub seed: u64,
    pub control: StepControl,
}

impl EvolutionConfig {
    pub fn new(c: f64, k: f64) -> Self {
        Self {
            c,
            k,
            n: 4096,
            l_dom: None,
            perturbation: PerturbationKind::Gaussian,
            eps: 0.0,
            seed: 0,
            control: StepControl::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolutionSummary {
    pub c: f64,
    pub k: f64,
    pub n: usize,
    pub l_dom: f64,
    pub dx: f64,
    pub perturbation: PerturbationKind,
    pub eps: f64,
    pub seed: u64,
    pub t_end: f64,
    pub steps: usize,
    pub initial_distance: f64,
    pub sup_distance: f64,
    pub terminal_distance: f64,
    pub terminal_r_star: f64,
    /// `r_star(t_end) - c t_end`.
    pub crest_position_error: f64,
    pub max_relative_drift: [f64; 3],
    pub min_m: f64,
    pub seam_error: f64,
    pub wave_h1_excess: f64,
}

#[derive(Debug, Clone)]
pub struct EvolutionRun {
    pub reference: WrappedProfile,
    pub trajectory: Trajectory,
    pub summary: EvolutionSummary,
}

/// Wraps the wave, perturbs it and evolves it.
pub fn run_evolution(config: &EvolutionConfig) -> Result<EvolutionRun> {
    let params = WaveParameters::new(config.c, config.k)?;
    let reference = WrappedProfile::new(&params, config.n, config.l_dom)?;
    let initial = make_perturbation(&reference, config.perturbation, config.eps, config.seed)?;
    let trajectory = evolve(initial, &reference, &config.control)?;
    let last = *trajectory.last();
    let summary = EvolutionSummary {
        c: config.c,
        k: config.k,
        n: config.n,
        l_dom: reference.fourier().length(),
        dx: reference.dx(),
        perturbation: config.perturbation,
        eps: config.eps,
        seed: config.seed,
        t_end: last.t,
        steps: trajectory.steps,
        initial_distance: trajectory.samples[0].d,
        sup_distance: trajectory.sup_distance(),
        terminal_distance: last.d,
        terminal_r_star: last.r_star,
        crest_position_error: last.r_star - config.c * last.t,
        max_relative_drift: trajectory.max_relative_drift(),
        min_m: trajectory.min_m(),
        seam_error: reference.seam_error(),
        wave_h1_excess: reference.h1_excess(),
    };
    Ok(EvolutionRun { reference, trajectory, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::sup_norm;

    fn wave(n: usize) -> WrappedProfile {
        WrappedProfile::new(&WaveParameters::new(1.0, 0.4).unwrap(), n, None).unwrap()
    }

    #[test]
    fn constant_is_stationary() {
        let w = wave(256);
        let f = MomentumField::constant(256, w.fourier().length(), 0.4).unwrap();
        assert!(rhs(f.fourier(), f.m(), 0.0).unwrap().iter().all(|v| v.abs() < 1e-15));
        let ctl = StepControl { t_end: 1.0, ..Default::default() };
        let tr = evolve(f, &w, &ctl).unwrap();
        assert!(tr.terminal.m().iter().all(|v| (v - 0.4).abs() < 1e-14));
    }

    #[test]
    fn travelling_wave_identity() {
        let w = wave(4096);
        let r = rhs(w.fourier(), w.mu(), 0.0).unwrap();
        let mu_xi = w.fourier().derivative(w.mu());
        let err = r.iter().zip(&mu_xi).map(|(a, b)| (a + w.params().c * b).abs()).fold(0.0, f64::max);
        assert!(err < 5e-5 * sup_norm(&mu_xi), "{err}");
    }

    #[test]
    fn rhs_commutes_with_grid_shifts() {
        let w = wave(512);
        let f = make_perturbation(&w, PerturbationKind::BandlimitedNoise, 1e-2, 3).unwrap();
        let s = 17;
        let n = f.len();
        let shifted: Vec<f64> = (0..n).map(|i| f.m()[(i + n - s) % n]).collect();
        let a = rhs(f.fourier(), &shifted, 0.0).unwrap();
        let b = rhs(f.fourier(), f.m(), 0.0).unwrap();
        let scale = sup_norm(&b);
        for i in 0..n {
            assert!((a[i] - b[(i + n - s) % n]).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let f = Fourier::new(16, 10.0).unwrap();
        let mut m = vec![1.0; 16];
        m[3] = f64::NAN;
        assert!(matches!(rhs(&f, &m, 2.5), Err(Error::BlowUp { t }) if t == 2.5));
    }

    #[test]
    fn short_run_conserves_and_translates() {
        let mut cfg = EvolutionConfig::new(1.0, 0.4);
        cfg.control.t_end = 1.0;
        let run = run_evolution(&cfg).unwrap();
        let s = &run.summary;
        assert!(s.max_relative_drift.iter().all(|d| *d < 1e-8), "{s:?}");
        assert!(s.crest_position_error.abs() < s.dx, "{s:?}");
        assert!(s.sup_distance < 5e-5 * s.wave_h1_excess, "{s:?}");
        let times: Vec<f64> = run.trajectory.samples.iter().map(|x| x.t).collect();
        assert_eq!(times.len(), 11);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*times.last().unwrap(), 1.0);
        let mut buf = Vec::new();
        run.trajectory.write_diagnostics_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 12);
    }
}
