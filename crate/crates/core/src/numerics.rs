//! Uniform-grid quadrature, finite differences and a banded solver.

use crate::error::{Error, Result};

/// Composite Simpson rule on a uniform grid.
///
/// An odd number of points uses the plain rule; an even number closes the
/// last three intervals with Simpson's 3/8 rule.
pub fn simpson(f: &[f64], dx: f64) -> f64 {
    let n = f.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * dx * (f[0] + f[1]),
        3 => dx / 3.0 * (f[0] + 4.0 * f[1] + f[2]),
        4 => 3.0 * dx / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]),
        _ if n % 2 == 1 => simpson_odd(f, dx),
        _ => {
            let head = simpson_odd(&f[..n - 3], dx);
            let t = &f[n - 4..];
            head + 3.0 * dx / 8.0 * (t[0] + 3.0 * t[1] + 3.0 * t[2] + t[3])
        }
    }
}

fn simpson_odd(f: &[f64], dx: f64) -> f64 {
    let n = f.len();
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n - 1 {
        if i % 2 == 1 {
            odd += f[i];
        } else {
            even += f[i];
        }
    }
    dx / 3.0 * (f[0] + f[n - 1] + 4.0 * odd + 2.0 * even)
}

/// Simpson with one Richardson step against the every-other-point grid.
/// Falls back to plain Simpson when the coarse grid is not Simpson-compatible.
pub fn simpson_richardson(f: &[f64], dx: f64) -> f64 {
    let n = f.len();
    let fine = simpson(f, dx);
    if n < 5 || !(n - 1).is_multiple_of(4) {
        return fine;
    }
    let coarse: Vec<f64> = f.iter().step_by(2).copied().collect();
    let coarse = simpson(&coarse, 2.0 * dx);
    (16.0 * fine - coarse) / 15.0
}

/// Quadrature rule selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    #[default]
    Simpson,
    /// Simpson plus one Richardson extrapolation step (oracle runs).
    SimpsonRichardson,
}

impl Quadrature {
    pub fn integrate(self, f: &[f64], dx: f64) -> f64 {
        match self {
            Quadrature::Simpson => simpson(f, dx),
            Quadrature::SimpsonRichardson => simpson_richardson(f, dx),
        }
    }
}

/// Cumulative integral `F_i = int_{x_0}^{x_i} f`, Simpson on interval pairs
/// with the three-point single-interval rule for odd indices.
pub fn cumulative_simpson(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * dx * (f[0] + f[1]);
        return out;
    }
    let mut i = 0;
    while i + 2 < n {
        let (f0, f1, f2) = (f[i], f[i + 1], f[i + 2]);
        out[i + 1] = out[i] + dx / 12.0 * (5.0 * f0 + 8.0 * f1 - f2);
        out[i + 2] = out[i] + dx / 3.0 * (f0 + 4.0 * f1 + f2);
        i += 2;
    }
    if i + 1 < n {
        let (f0, f1, f2) = (f[i - 1], f[i], f[i + 1]);
        out[i + 1] = out[i] + dx / 12.0 * (-f0 + 8.0 * f1 + 5.0 * f2);
    }
    out
}

/// Fourth-order cumulative integral: trapezoid plus the Euler-Maclaurin
/// end correction `-dx^2/12 (f'(x_i) - f'(x_0))`.
pub fn cumulative_integral4(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    let fp = if n >= 5 { derivative1_4(f, dx) } else { derivative1(f, dx) };
    let mut acc = 0.0;
    for i in 1..n {
        acc += 0.5 * dx * (f[i - 1] + f[i]);
        out[i] = acc - dx * dx / 12.0 * (fp[i] - fp[0]);
    }
    out
}

/// First derivative, centered second order, one-sided second order at the ends.
pub fn derivative1(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 3, "need at least three points");
    let mut g = vec![0.0; n];
    let inv = 0.5 / dx;
    for i in 1..n - 1 {
        g[i] = (f[i + 1] - f[i - 1]) * inv;
    }
    g[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv;
    g[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv;
    g
}

/// Second derivative, centered second order, one-sided second order at the ends.
pub fn derivative2(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 4, "need at least four points");
    let mut g = vec![0.0; n];
    let inv = 1.0 / (dx * dx);
    for i in 1..n - 1 {
        g[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * inv;
    }
    g[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * inv;
    g[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * inv;
    g
}

/// First derivative, centered fourth order in the interior.
pub fn derivative1_4(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 5, "need at least five points");
    let mut g = derivative1(f, dx);
    let inv = 1.0 / (12.0 * dx);
    for i in 2..n - 2 {
        g[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) * inv;
    }
    g
}

/// Second derivative, centered fourth order in the interior.
pub fn derivative2_4(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 5, "need at least five points");
    let mut g = derivative2(f, dx);
    let inv = 1.0 / (12.0 * dx * dx);
    for i in 2..n - 2 {
        g[i] = (-f[i + 2] + 16.0 * f[i + 1] - 30.0 * f[i] + 16.0 * f[i - 1] - f[i - 2]) * inv;
    }
    g
}

/// Finite-difference order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Order {
    #[default]
    Second,
    Fourth,
}

impl Order {
    pub fn d1(self, f: &[f64], dx: f64) -> Vec<f64> {
        match self {
            Order::Second => derivative1(f, dx),
            Order::Fourth => derivative1_4(f, dx),
        }
    }

    pub fn d2(self, f: &[f64], dx: f64) -> Vec<f64> {
        match self {
            Order::Second => derivative2(f, dx),
            Order::Fourth => derivative2_4(f, dx),
        }
    }
}

/// Solves a general tridiagonal system with partial pivoting.
///
/// `lower[i]` couples row `i + 1` to column `i`, `upper[i]` couples row `i`
/// to column `i + 1`.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if lower.len() + 1 != n || upper.len() + 1 != n || rhs.len() != n {
        return Err(Error::InvalidInput(format!(
            "tridiagonal dimensions: diag {n}, lower {}, upper {}, rhs {}",
            lower.len(),
            upper.len(),
            rhs.len()
        )));
    }
    // LU with row interchanges; U has two superdiagonals (LAPACK gtsv layout).
    let mut d = diag.to_vec();
    let mut du = upper.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut dl = lower.to_vec();
    let mut b = rhs.to_vec();
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                return Err(Error::Domain {
                    context: "solve_tridiagonal",
                    message: format!("singular matrix at row {i}"),
                });
            }
            let fact = dl[i] / d[i];
            dl[i] = fact;
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
            if i + 2 < n {
                du2[i] = 0.0;
            }
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = fact;
            let temp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = temp - fact * d[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -fact;
            }
            b.swap(i, i + 1);
            b[i + 1] -= fact * b[i];
        }
    }
    if d[n - 1] == 0.0 {
        return Err(Error::Domain {
            context: "solve_tridiagonal",
            message: format!("singular matrix at row {}", n - 1),
        });
    }
    let mut x = b;
    x[n - 1] /= d[n - 1];
    if n > 1 {
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    Ok(x)
}

/// `max |f_i|`.
pub fn sup_norm(f: &[f64]) -> f64 {
    f.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Sum-of-squares norm.
pub fn l2(f: &[f64]) -> f64 {
    f.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
