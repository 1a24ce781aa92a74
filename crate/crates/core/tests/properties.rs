use mch_core::evolution::{h1_h3_equivalence_check, rhs, step, MomentumField};
use mch_core::functionals::{conserved_integrals, dq_dk_closed_form, q_closed_form, Domain};
use mch_core::params::{validate_parameters, window_lower, window_upper};
use mch_core::spectral::assemble_hessian;
use mch_core::{construct_profile, GridSpec, WaveParameters};
use proptest::prelude::*;

/// `(c, k)` with `k` strictly inside the window, `frac` of the way across it.
fn admissible() -> impl Strategy<Value = (f64, f64)> {
    (0.25f64..9.0, 0.02f64..0.98).prop_map(|(c, frac)| {
        let (lo, hi) = (window_lower(c), window_upper(c));
        (c, lo + frac * (hi - lo))
    })
}

/// Interior `(c, k)` resolved well enough on a coarse grid.
fn interior() -> impl Strategy<Value = (f64, f64)> {
    (0.5f64..4.0, 0.15f64..0.85).prop_map(|(c, frac)| {
        let (lo, hi) = (window_lower(c), window_upper(c));
        (c, lo + frac * (hi - lo))
    })
}

fn coarse_profile(c: f64, k: f64) -> mch_core::WaveProfile {
    let p = WaveParameters::new(c, k).unwrap();
    let grid = GridSpec::default_for(&p);
    construct_profile(&p, &grid.with_dx(2.0 * grid.dx)).unwrap()
}

/// Positive band-limited field `k + sum a_j cos(j x 2pi/L + b_j)` with `|a| <= k/2`.
fn band_limited(n: usize, l: f64, k: f64, coeffs: &[(f64, f64)]) -> Vec<f64> {
    let total: f64 = coeffs.iter().map(|(a, _)| a.abs()).sum();
    let scale = if total > 0.0 { 0.5 * k / total } else { 0.0 };
    (0..n)
        .map(|j| {
            let x = -0.5 * l + j as f64 * l / n as f64;
            k + coeffs
                .iter()
                .enumerate()
                .map(|(i, (a, b))| scale * a * ((i + 1) as f64 * std::f64::consts::TAU * x / l + b).cos())
                .sum::<f64>()
        })
        .collect()
}

fn rotate(v: &[f64], by: usize) -> Vec<f64> {
    let mut out = v.to_vec();
    out.rotate_right(by);
    out
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn admissibility_is_sharp(c in 1e-3f64..100.0, k in 1e-3f64..10.0) {
        let inside = 9.0 * k * k > c && 3.0 * k * k < c;
        prop_assert_eq!(validate_parameters(c, k).is_ok(), inside);
    }

    #[test]
    fn window_ends_are_rejected(c in 1e-3f64..100.0) {
        prop_assert!(validate_parameters(c, window_lower(c)).is_err());
        prop_assert!(validate_parameters(c, window_upper(c)).is_err());
    }

    #[test]
    fn essential_edge_identity((c, k) in admissible()) {
        let p = WaveParameters::new(c, k).unwrap();
        let d = c - k * k;
        let lhs = 1.5 * k.powi(-5) - (c + 3.0 * k * k) / (2.0 * k * k * d) * k.powi(-3);
        let rhs = (c - 3.0 * k * k) / (k.powi(5) * d);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()).max(1.0));
        prop_assert!((p.ess_edge - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn crest_scales_exactly((c, k) in admissible(), lambda in 0.2f64..5.0) {
        let p = WaveParameters::new(c, k).unwrap();
        let s = p.scaled(lambda).unwrap();
        prop_assert!((s.phi1 - lambda * p.phi1).abs() <= 1e-13 * s.phi1);
    }

    #[test]
    fn q_positive_and_decreasing((c, k) in admissible()) {
        let q = q_closed_form(c, k).unwrap();
        let dq = dq_dk_closed_form(c, k).unwrap();
        prop_assert!(q > 0.0, "Q = {q}");
        prop_assert!(dq < 0.0, "dQ/dk = {dq}");
    }

    #[test]
    fn dq_dk_matches_difference_of_q((c, k) in interior()) {
        let h = 1e-6 * k;
        let fd = (q_closed_form(c, k + h).unwrap() - q_closed_form(c, k - h).unwrap()) / (2.0 * h);
        let exact = dq_dk_closed_form(c, k).unwrap();
        prop_assert!(((fd - exact) / exact).abs() < 1e-6, "fd {fd}, closed {exact}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn profile_shape((c, k) in interior()) {
        let prof = coarse_profile(c, k);
        let p = *prof.params();
        let phi = prof.phi();
        let n = phi.len();
        let mid = n / 2;
        for i in 0..n {
            prop_assert_eq!(phi[i], phi[n - 1 - i]);
            prop_assert_eq!(prof.mu()[i], prof.mu()[n - 1 - i]);
        }
        let tail = k + 1e-10 * p.phi1;
        for i in mid..n - 1 {
            if phi[i + 1] > tail {
                prop_assert!(phi[i + 1] < phi[i], "not decreasing at {}", i);
            }
        }
        let sup_xi2 = prof.phi_xi().iter().map(|v| v * v).fold(0.0, f64::max);
        for (i, (&f, &m)) in phi.iter().zip(prof.mu()).enumerate() {
            prop_assert!(f > k && f <= p.phi1 * (1.0 + 1e-12));
            prop_assert!(m > k && m <= p.mu_sup * (1.0 + 1e-12));
            let den = c + prof.phi_xi()[i].powi(2) - f * f;
            prop_assert!(den >= c - p.phi1 * p.phi1 - 1e-12 && den <= c - k * k + sup_xi2 + 1e-12);
        }
        prop_assert!(c - p.phi1 * p.phi1 > 0.0);
    }

    #[test]
    fn hessian_commutes_with_reflection((c, k) in interior(), seed in any::<u64>()) {
        let op = assemble_hessian(&coarse_profile(c, k)).unwrap();
        let dim = op.dim();
        let v: Vec<f64> = (0..dim).map(|i| ((i as u64).wrapping_mul(seed | 1) % 1009) as f64 / 1009.0 - 0.5).collect();
        let mut rv = v.clone();
        rv.reverse();
        let mut l_v = op.apply(&v);
        l_v.reverse();
        let l_rv = op.apply(&rv);
        let scale = l_v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        prop_assert!(sup_diff(&l_v, &l_rv) <= 1e-13 * scale);
        prop_assert!(op.symmetry_defect() == 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn h1_h3_identity_on_band_limited_fields(
        k in 0.2f64..2.0,
        l in 10.0f64..200.0,
        coeffs in prop::collection::vec((-1.0f64..1.0, 0.0f64..6.3), 1..40),
    ) {
        let n = 256;
        let field = MomentumField::new(band_limited(n, l, k, &coeffs), l, k).unwrap();
        let r = h1_h3_equivalence_check(&field);
        prop_assert!(r.relative_mismatch < 1e-12, "{:?}", r);
    }

    #[test]
    fn rhs_commutes_with_grid_shifts(
        k in 0.2f64..2.0,
        by in 1usize..255,
        coeffs in prop::collection::vec((-1.0f64..1.0, 0.0f64..6.3), 1..20),
    ) {
        let (n, l) = (256, 40.0);
        let m = band_limited(n, l, k, &coeffs);
        let field = MomentumField::new(m.clone(), l, k).unwrap();
        let shifted = MomentumField::new(rotate(&m, by), l, k).unwrap();
        let a = rotate(&rhs(field.fourier(), field.m(), 0.0).unwrap(), by);
        let b = rhs(shifted.fourier(), shifted.m(), 0.0).unwrap();
        let scale = a.iter().map(|x| x.abs()).fold(1.0, f64::max);
        prop_assert!(sup_diff(&a, &b) <= 1e-12 * scale);
    }

    #[test]
    fn evolution_commutes_with_grid_shifts(
        k in 0.5f64..1.5,
        by in 1usize..127,
        coeffs in prop::collection::vec((-1.0f64..1.0, 0.0f64..6.3), 1..8),
    ) {
        let (n, l, dt) = (128, 40.0, 0.01);
        let m = band_limited(n, l, k, &coeffs);
        let mut a = MomentumField::new(m.clone(), l, k).unwrap();
        let mut b = MomentumField::new(rotate(&m, by), l, k).unwrap();
        for i in 0..20 {
            let t = i as f64 * dt;
            a = step(&a, dt, t).unwrap();
            b = step(&b, dt, t).unwrap();
        }
        prop_assert!(sup_diff(&rotate(a.m(), by), b.m()) <= 1e-12 * k);
    }
}

#[test]
fn rk4_converges_at_fourth_order() {
    let (n, l, k) = (128, 40.0, 1.0);
    let m = band_limited(n, l, k, &[(1.0, 0.3), (0.5, 1.1), (0.25, 2.0)]);
    let f2 = |m: &[f64]| conserved_integrals(m, l / n as f64, k, Domain::Periodic).unwrap().f2;
    let run = |steps: usize| {
        let dt = 1.0 / steps as f64;
        let mut field = MomentumField::new(m.clone(), l, k).unwrap();
        for i in 0..steps {
            field = step(&field, dt, i as f64 * dt).unwrap();
        }
        field.m().to_vec()
    };
    let (a, b, c) = (run(25), run(50), run(100));
    let (ea, eb) = (sup_diff(&a, &b), sup_diff(&b, &c));
    let ratio = ea / eb;
    assert!((12.0..20.0).contains(&ratio), "field ratio {ratio} ({ea:e}, {eb:e})");
    let (fa, fb, fc) = (f2(&a), f2(&b), f2(&c));
    let (da, db) = ((fa - fb).abs(), (fb - fc).abs());
    assert!(db <= da / 8.0 || db < 1e-13 * fc.abs(), "F2 differences {da:e}, {db:e}");
}
