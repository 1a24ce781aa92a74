//! Conserved integrals, the action functional and the quantity `Q`.
//!
//! With background `k` the conserved integrals are
//!
//! ```text
//! F1 = int (m - k)
//! F2 = int (1/m - 1/k)
//! F3 = int (m_x^2 / m^5 + 1/(4 m^3) - 1/(4 k^3))
//! ```
//!
//! and the action is `Lambda = F3 + omega1 F1 + omega2 F2`. The splitting
//! `Lambda = calG - coeff * calF` uses `calF = F1 / k^2 + F2` and
//! `calG = 3 F1 / (4 k^4) + F3`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::Fourier;
use crate::numerics::{self, Order, Quadrature};
use crate::params::WaveParameters;
use crate::profile::{construct_profile, GridSpec, WaveProfile};

/// Boundary treatment of a sampled field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Domain {
    /// Truncated line: Simpson quadrature and finite differences.
    #[default]
    Line,
    /// One period: trapezoid sums and spectral derivatives. Needs `2^p` points.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservedIntegrals {
    #[serde(rename = "F1")]
    pub f1: f64,
    #[serde(rename = "F2")]
    pub f2: f64,
    #[serde(rename = "F3")]
    pub f3: f64,
}

impl ConservedIntegrals {
    pub fn as_array(&self) -> [f64; 3] {
        [self.f1, self.f2, self.f3]
    }
}

/// The functionals that have a variational derivative here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Functional {
    F1,
    F2,
    F3,
    CalF,
    CalG,
    Lambda,
}

/// All functional values at one field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalValues {
    #[serde(rename = "F1")]
    pub f1: f64,
    #[serde(rename = "F2")]
    pub f2: f64,
    #[serde(rename = "F3")]
    pub f3: f64,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    #[serde(rename = "calF")]
    pub cal_f: f64,
    #[serde(rename = "calG")]
    pub cal_g: f64,
}

fn check_positive(m: &[f64], context: &'static str) -> Result<()> {
    if let Some((i, v)) = m.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::Domain { context, message: format!("m must be positive (class X_k), found m[{i}] = {v}") });
    }
    Ok(())
}

fn first_derivative(m: &[f64], dx: f64, domain: Domain, order: Order) -> Result<Vec<f64>> {
    match domain {
        Domain::Line => Ok(order.d1(m, dx)),
        Domain::Periodic => Ok(Fourier::new(m.len(), m.len() as f64 * dx)?.derivative(m)),
    }
}

fn second_derivative(m: &[f64], dx: f64, domain: Domain, order: Order) -> Result<Vec<f64>> {
    match domain {
        Domain::Line => Ok(order.d2(m, dx)),
        Domain::Periodic => {
            let f = Fourier::new(m.len(), m.len() as f64 * dx)?;
            let mut spec = f.forward(m);
            for (z, &kj) in spec.iter_mut().zip(f.wavenumbers()) {
                *z *= -kj * kj;
            }
            Ok(f.inverse(spec))
        }
    }
}

fn integrate(f: &[f64], dx: f64, domain: Domain, quad: Quadrature) -> f64 {
    match domain {
        Domain::Line => quad.integrate(f, dx),
        Domain::Periodic => f.iter().sum::<f64>() * dx,
    }
}

// Background-subtracted densities, written without cancellation.
fn density_f2(m: f64, k: f64) -> f64 {
    -(m - k) / (m * k)
}

fn density_f3(m: f64, mx: f64, k: f64) -> f64 {
    let m3 = m * m * m;
    mx * mx / (m3 * m * m) - (m - k) * (m * m + m * k + k * k) / (4.0 * m3 * k * k * k)
}

fn integrals_from(m: &[f64], mx: &[f64], dx: f64, k: f64, domain: Domain, quad: Quadrature) -> ConservedIntegrals {
    let d1: Vec<f64> = m.iter().map(|&v| v - k).collect();
    let d2: Vec<f64> = m.iter().map(|&v| density_f2(v, k)).collect();
    let d3: Vec<f64> = m.iter().zip(mx).map(|(&v, &vx)| density_f3(v, vx, k)).collect();
    ConservedIntegrals {
        f1: integrate(&d1, dx, domain, quad),
        f2: integrate(&d2, dx, domain, quad),
        f3: integrate(&d3, dx, domain, quad),
    }
}

/// `F1, F2, F3` of a sampled field; `m_x` by centered differences on the
/// line or spectrally on a period.
pub fn conserved_integrals(m: &[f64], dx: f64, k: f64, domain: Domain) -> Result<ConservedIntegrals> {
    conserved_integrals_with(m, dx, k, domain, Quadrature::Simpson)
}

pub fn conserved_integrals_with(
    m: &[f64],
    dx: f64,
    k: f64,
    domain: Domain,
    quad: Quadrature,
) -> Result<ConservedIntegrals> {
    check_positive(m, "conserved_integrals")?;
    if m.len() < 5 {
        return Err(Error::InvalidInput(format!("need at least 5 samples, got {}", m.len())));
    }
    let mx = first_derivative(m, dx, domain, Order::Second)?;
    Ok(integrals_from(m, &mx, dx, k, domain, quad))
}

fn assemble_values(ints: ConservedIntegrals, params: &WaveParameters) -> FunctionalValues {
    let k2 = params.k * params.k;
    let cal_f = ints.f1 / k2 + ints.f2;
    let cal_g = 0.75 * ints.f1 / (k2 * k2) + ints.f3;
    let lambda = ints.f3 + params.omega1 * ints.f1 + params.omega2 * ints.f2;
    FunctionalValues { f1: ints.f1, f2: ints.f2, f3: ints.f3, lambda, cal_f, cal_g }
}

/// Values of every functional at a sampled field.
pub fn functional_values(m: &[f64], dx: f64, params: &WaveParameters, domain: Domain) -> Result<FunctionalValues> {
    Ok(assemble_values(conserved_integrals(m, dx, params.k, domain)?, params))
}

/// Values at a constructed profile, using the stored analytic `mu_xi`.
pub fn profile_functionals(profile: &WaveProfile) -> Result<FunctionalValues> {
    profile_functionals_with(profile, Quadrature::Simpson)
}

pub fn profile_functionals_with(profile: &WaveProfile, quad: Quadrature) -> Result<FunctionalValues> {
    check_positive(profile.mu(), "profile_functionals")?;
    let ints = integrals_from(profile.mu(), profile.mu_xi(), profile.dx(), profile.params().k, Domain::Line, quad);
    Ok(assemble_values(ints, profile.params()))
}

/// `dF3/dm = -2 m_xx / m^5 + 5 m_x^2 / m^6 - 3 / (4 m^4)`.
fn delta_f3(m: f64, mx: f64, mxx: f64) -> f64 {
    let m2 = m * m;
    let m4 = m2 * m2;
    -2.0 * mxx / (m4 * m) + 5.0 * mx * mx / (m4 * m2) - 0.75 / m4
}

fn pointwise(which: Functional, m: f64, mx: f64, mxx: f64, params: &WaveParameters) -> f64 {
    let k2 = params.k * params.k;
    match which {
        Functional::F1 => 1.0,
        Functional::F2 => -1.0 / (m * m),
        Functional::F3 => delta_f3(m, mx, mxx),
        Functional::CalF => (m - params.k) * (m + params.k) / (k2 * m * m),
        Functional::CalG => 0.75 / (k2 * k2) + delta_f3(m, mx, mxx),
        Functional::Lambda => params.omega1 - params.omega2 / (m * m) + delta_f3(m, mx, mxx),
    }
}

/// Pointwise variational derivative on the truncated line with second-order
/// differences.
pub fn variational_derivative(which: Functional, m: &[f64], dx: f64, params: &WaveParameters) -> Result<Vec<f64>> {
    variational_derivative_with(which, m, dx, params, Domain::Line, Order::Second)
}

pub fn variational_derivative_with(
    which: Functional,
    m: &[f64],
    dx: f64,
    params: &WaveParameters,
    domain: Domain,
    order: Order,
) -> Result<Vec<f64>> {
    check_positive(m, "variational_derivative")?;
    if m.len() < 5 {
        return Err(Error::InvalidInput(format!("need at least 5 samples, got {}", m.len())));
    }
    let mx = first_derivative(m, dx, domain, order)?;
    let mxx = second_derivative(m, dx, domain, order)?;
    Ok(variational_derivative_from(which, m, &mx, &mxx, params))
}

/// Variational derivative from given samples of `m, m_x, m_xx`.
pub fn variational_derivative_from(
    which: Functional,
    m: &[f64],
    mx: &[f64],
    mxx: &[f64],
    params: &WaveParameters,
) -> Vec<f64> {
    m.iter().zip(mx).zip(mxx).map(|((&v, &vx), &vxx)| pointwise(which, v, vx, vxx, params)).collect()
}

/// `sup |dLambda/dm (mu)|` with `mu_xi`, `mu_xixi` taken from the profile
/// equation rather than differenced.
pub fn euler_lagrange_residual(profile: &WaveProfile) -> Result<f64> {
    check_positive(profile.mu(), "euler_lagrange_residual")?;
    let r = variational_derivative_from(
        Functional::Lambda,
        profile.mu(),
        profile.mu_xi(),
        &profile.mu_xixi(),
        profile.params(),
    );
    Ok(numerics::sup_norm(&r))
}

/// Same residual with `mu_xi`, `mu_xixi` by finite differences of `mu`.
pub fn euler_lagrange_residual_fd(profile: &WaveProfile, order: Order) -> Result<f64> {
    let r = variational_derivative_with(
        Functional::Lambda,
        profile.mu(),
        profile.dx(),
        profile.params(),
        Domain::Line,
        order,
    )?;
    Ok(numerics::sup_norm(&r))
}

/// Integrand `t^{-1/2} + t^{1/2} - 2`, `t = 1 - (phi - k)/beta`, evaluated as
/// `(x / (1 + r))^2 / r` with `x = (phi - k)/beta`, `r = sqrt(t)`.
pub fn q_integrand(profile: &WaveProfile) -> Result<Vec<f64>> {
    let p = profile.params();
    profile
        .phi()
        .iter()
        .map(|&phi| {
            let x = (phi - p.k) / p.beta;
            let t = 1.0 - x;
            if !(t > 0.0) {
                return Err(Error::Domain {
                    context: "q_quadrature",
                    message: format!("radicand c + 3k^2 - 4k phi <= 0 at phi = {phi}"),
                });
            }
            let r = t.sqrt();
            let y = x / (1.0 + r);
            Ok(y * y / r)
        })
        .collect()
}

/// `Q = int (t^{-1/2} + t^{1/2} - 2) dxi` by composite Simpson.
pub fn q_quadrature(profile: &WaveProfile) -> Result<f64> {
    q_quadrature_with(profile, Quadrature::Simpson)
}

pub fn q_quadrature_with(profile: &WaveProfile, quad: Quadrature) -> Result<f64> {
    Ok(quad.integrate(&q_integrand(profile)?, profile.dx()))
}

/// `Q = 8 ln((sqrt(c-k^2) + sqrt(c-3k^2)) / (sqrt(2) k)) - 8 sqrt((c-3k^2)/(c-k^2))`.
pub fn q_closed_form(c: f64, k: f64) -> Result<f64> {
    let p = WaveParameters::new(c, k)?;
    let d = p.d();
    let e = c - 3.0 * k * k;
    Ok(8.0 * ((d.sqrt() + e.sqrt()) / (std::f64::consts::SQRT_2 * k)).ln() - 8.0 * (e / d).sqrt())
}

/// `dQ/dk = -8c / (k (c-k^2)) sqrt((c-3k^2)/(c-k^2))`.
pub fn dq_dk_closed_form(c: f64, k: f64) -> Result<f64> {
    let p = WaveParameters::new(c, k)?;
    let d = p.d();
    Ok(-8.0 * c / (k * d) * ((c - 3.0 * k * k) / d).sqrt())
}

/// `d/dk [k calF(mu_k)]` by a centered difference over the profiles at
/// `k +- dk` on the grid `grid`.
pub fn k_calf_derivative(params: &WaveParameters, grid: &GridSpec, dk: f64) -> Result<f64> {
    let value = |k: f64| -> Result<f64> {
        let p = WaveParameters::new(params.c, k)?;
        let prof = construct_profile(&p, grid)?;
        Ok(k * profile_functionals(&prof)?.cal_f)
    };
    Ok((value(params.k + dk)? - value(params.k - dk)?) / (2.0 * dk))
}

/// Step of [`dq_dk_finite_difference`] in the reports.
pub const DQDK_STEP: f64 = 1e-3;

/// `dQ/dk` by the five-point centered difference of `Q_quad` over profiles
/// at `k +- h, k +- 2h` on the grid `grid`.
pub fn dq_dk_finite_difference(params: &WaveParameters, grid: &GridSpec, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter { field: "dk", message: format!("must be positive, got {h}") });
    }
    let q = |k: f64| -> Result<f64> {
        let p = WaveParameters::new(params.c, k)?;
        q_quadrature(&construct_profile(&p, grid)?)
    };
    let k = params.k;
    Ok((-q(k + 2.0 * h)? + 8.0 * q(k + h)? - 8.0 * q(k - h)? + q(k - 2.0 * h)?) / (12.0 * h))
}

/// Report of [`functional_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalReport {
    pub c: f64,
    pub k: f64,
    #[serde(flatten)]
    pub values: FunctionalValues,
    #[serde(rename = "Q_quad")]
    pub q_quad: f64,
    #[serde(rename = "Q_closed")]
    pub q_closed: f64,
    #[serde(rename = "dQdk_closed")]
    pub dqdk_closed: f64,
    /// Five-point difference of `Q_quad` with step [`DQDK_STEP`].
    #[serde(rename = "dQdk_fd")]
    pub dqdk_fd: f64,
    pub el_residual_sup: f64,
}

impl FunctionalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Row matching [`FUNCTIONALS_CSV_HEADER`].
    pub fn csv_row(&self) -> String {
        format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            self.c, self.k, self.q_quad, self.q_closed, self.dqdk_closed, self.dqdk_fd, self.el_residual_sup
        )
    }
}

pub const FUNCTIONALS_CSV_HEADER: &str = "c,k,Q_quad,Q_closed,dQdk,dQdk_fd,el_residual";

pub fn functional_report(profile: &WaveProfile) -> Result<FunctionalReport> {
    let p = profile.params();
    Ok(FunctionalReport {
        c: p.c,
        k: p.k,
        values: profile_functionals(profile)?,
        q_quad: q_quadrature(profile)?,
        q_closed: q_closed_form(p.c, p.k)?,
        dqdk_closed: dq_dk_closed_form(p.c, p.k)?,
        dqdk_fd: dq_dk_finite_difference(p, &GridSpec::new(profile.dx(), profile.half_length()), DQDK_STEP)?,
        el_residual_sup: euler_lagrange_residual(profile)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> (WaveParameters, WaveProfile) {
        let p = WaveParameters::new(1.0, 0.4).unwrap();
        let prof = construct_profile(&p, &GridSpec::new(0.01, 40.0)).unwrap();
        (p, prof)
    }

    #[test]
    fn background_has_zero_integrals() {
        let m = vec![0.4; 101];
        let f = conserved_integrals(&m, 0.1, 0.4, Domain::Line).unwrap();
        assert_eq!([f.f1, f.f2], [0.0, 0.0]);
        assert!(f.f3.abs() < 1e-25);
        let m = vec![0.4; 64];
        let f = conserved_integrals(&m, 0.1, 0.4, Domain::Periodic).unwrap();
        assert_eq!([f.f1, f.f2], [0.0, 0.0]);
        assert!(f.f3.abs() < 1e-25);
    }

    #[test]
    fn gaussian_bump_mass() {
        let dx = 0.01;
        let m: Vec<f64> = (0..2001).map(|i| 0.4 + 0.1 * (-0.5 * ((i as f64 - 1000.0) * dx).powi(2)).exp()).collect();
        let f = conserved_integrals(&m, dx, 0.4, Domain::Line).unwrap();
        assert!((f.f1 - 0.1 * (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn nonpositive_field_rejected() {
        let mut m = vec![0.4; 11];
        m[5] = 0.0;
        assert!(matches!(conserved_integrals(&m, 0.1, 0.4, Domain::Line), Err(Error::Domain { .. })));
        assert!(variational_derivative(Functional::F2, &m, 0.1, &WaveParameters::new(1.0, 0.4).unwrap()).is_err());
    }

    #[test]
    fn profile_signs_and_refinement() {
        let p = WaveParameters::new(1.0, 0.4).unwrap();
        let a = profile_functionals(&construct_profile(&p, &GridSpec::new(0.01, 40.0)).unwrap()).unwrap();
        let b = profile_functionals(&construct_profile(&p, &GridSpec::new(0.005, 40.0)).unwrap()).unwrap();
        assert!(a.f1 > 0.0 && a.f2 < 0.0 && a.f3.is_finite());
        assert!((a.f1 - b.f1).abs() < 1e-8);
        assert!((a.f2 - b.f2).abs() < 1e-8);
        assert!((a.f3 - b.f3).abs() < 1e-8);
    }

    #[test]
    fn decomposition_identity() {
        let (p, prof) = reference();
        let v = profile_functionals(&prof).unwrap();
        let rhs = v.cal_g - p.calf_coefficient() * v.cal_f;
        assert!((v.lambda - rhs).abs() < 1e-12 * v.lambda.abs().max(1.0));
    }

    #[test]
    fn background_is_critical_point() {
        for k in [0.35, 0.4, 0.5, 0.57] {
            let p = WaveParameters::new(1.0, k).unwrap();
            let m = vec![k; 21];
            let r = variational_derivative(Functional::Lambda, &m, 0.1, &p).unwrap();
            assert!(numerics::sup_norm(&r) < 1e-11 * p.omega2.abs() / (k * k), "k = {k}");
            let r = variational_derivative(Functional::CalF, &m, 0.1, &p).unwrap();
            assert!(r.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn euler_lagrange_converges() {
        let p = WaveParameters::new(1.0, 0.4).unwrap();
        let r1 = euler_lagrange_residual(&construct_profile(&p, &GridSpec::new(0.01, 40.0)).unwrap()).unwrap();
        let r2 = euler_lagrange_residual(&construct_profile(&p, &GridSpec::new(0.005, 40.0)).unwrap()).unwrap();
        assert!(r1 < 1e-6, "{r1}");
        assert!(r1 / r2 > 4.0, "{r1} {r2}");
        let fd = euler_lagrange_residual_fd(&construct_profile(&p, &GridSpec::new(0.01, 40.0)).unwrap(), Order::Second)
            .unwrap();
        assert!(fd > r1);
    }

    #[test]
    fn q_matches_closed_form() {
        let (p, prof) = reference();
        let q = q_quadrature(&prof).unwrap();
        let qc = q_closed_form(p.c, p.k).unwrap();
        assert!((qc - 2.209_348_890_080_017).abs() < 1e-12);
        assert!((q - qc).abs() < 1e-6, "{q} {qc}");
        assert!((dq_dk_closed_form(1.0, 0.4).unwrap() + 18.733_233_154_034_36).abs() < 1e-10);
        // Q is k calF(mu)
        let v = profile_functionals(&prof).unwrap();
        assert!((p.k * v.cal_f - q).abs() < 1e-9);
    }

    #[test]
    fn degenerate_q_is_zero() {
        let p = WaveParameters::new(1.0, 0.4).unwrap();
        let prof = WaveProfile::background(p, 0.1, 5.0).unwrap();
        assert_eq!(q_quadrature(&prof).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_derivative_consistency() {
        for k in [0.34, 0.4, 0.47, 0.55, 0.575] {
            let h = 1e-6;
            let fd = (q_closed_form(1.0, k + h).unwrap() - q_closed_form(1.0, k - h).unwrap()) / (2.0 * h);
            let an = dq_dk_closed_form(1.0, k).unwrap();
            assert!(((fd - an) / an).abs() < 1e-6, "k = {k}: {fd} {an}");
        }
    }

    #[test]
    fn report_json_fields() {
        let (_, prof) = reference();
        let r = functional_report(&prof).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in [
            "F1",
            "F2",
            "F3",
            "Lambda",
            "calF",
            "calG",
            "Q_quad",
            "Q_closed",
            "dQdk_closed",
            "dQdk_fd",
            "el_residual_sup",
        ] {
            assert!(v[key].is_f64(), "{key}");
        }
        assert_eq!(r.csv_row().split(',').count(), FUNCTIONALS_CSV_HEADER.split(',').count());
        assert!(((r.dqdk_fd - r.dqdk_closed) / r.dqdk_closed).abs() < 1e-6, "{r:?}");
    }
}
