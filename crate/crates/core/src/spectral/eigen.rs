//! Lowest eigenpairs of a symmetric tridiagonal matrix by Sturm bisection
//! and inverse iteration.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics;

/// Symmetric tridiagonal matrix: `diag` of length `n`, `off` of length `n-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
    norm: f64,
}

const MAX_BISECTIONS: usize = 200;
const MAX_INVERSE_ITERATIONS: usize = 8;
/// Relative residual target `||A v - lambda v|| / ||A||`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::InvalidInput(format!(
                "symmetric tridiagonal needs off.len() + 1 == diag.len(), got {} and {}",
                off.len(),
                diag.len()
            )));
        }
        if diag.iter().chain(&off).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        let mut m = Self { diag, off, norm: 0.0 };
        m.norm = m.row_sum_max();
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out: Vec<f64> = self.diag.iter().zip(v).map(|(d, x)| d * x).collect();
        for i in 0..n - 1 {
            out[i] += self.off[i] * v[i + 1];
            out[i + 1] += self.off[i] * v[i];
        }
        out
    }

    /// Infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        self.norm
    }

    fn row_sum_max(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.off[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.off[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt() * self.norm_inf().max(1.0);
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q == 0.0 {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            let e = self.off[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `j`-th smallest eigenvalue (0-based) to full working precision.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) || mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// The `n` smallest eigenvalues in ascending order.
    pub fn lowest_eigenvalues(&self, n: usize) -> Vec<f64> {
        (0..n.min(self.dim())).map(|j| self.eigenvalue(j)).collect()
    }

    /// The `n` smallest eigenpairs with orthonormal eigenvectors.
    pub fn lowest_eigenpairs(&self, n: usize) -> Result<EigenPairs> {
        let n = n.min(self.dim());
        let norm = self.norm_inf();
        let mut values = Vec::with_capacity(n);
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut residuals = Vec::with_capacity(n);
        for j in 0..n {
            let lambda = self.eigenvalue(j);
            let (v, res) = self.inverse_iteration(lambda, &vectors, norm, j)?;
            values.push(lambda);
            vectors.push(v);
            residuals.push(res);
        }
        Ok(EigenPairs { values, vectors, residuals, norm })
    }

    fn inverse_iteration(
        &self,
        lambda: f64,
        previous: &[Vec<f64>],
        norm: f64,
        index: usize,
    ) -> Result<(Vec<f64>, f64)> {
        let n = self.dim();
        let tolerance = RESIDUAL_TOLERANCE * norm;
        // Deterministic start vector with components in every direction.
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_749_895).fract()).collect();
        normalize(&mut v);
        let mut residual = f64::INFINITY;
        let mut shift = lambda;
        for attempt in 0..MAX_INVERSE_ITERATIONS {
            let diag: Vec<f64> = self.diag.iter().map(|d| d - shift).collect();
            let mut w = match numerics::solve_tridiagonal(&self.off, &diag, &self.off, &v) {
                Ok(w) => w,
                Err(_) => {
                    shift = lambda + f64::EPSILON * norm * (attempt as f64 + 1.0);
                    continue;
                }
            };
            if w.iter().any(|x| !x.is_finite()) {
                shift = lambda + f64::EPSILON * norm * (attempt as f64 + 1.0);
                continue;
            }
            for p in previous {
                let c = numerics::dot(&w, p);
                for (wi, pi) in w.iter_mut().zip(p) {
                    *wi -= c * pi;
                }
            }
            normalize(&mut w);
            v = w;
            let av = self.apply(&v);
            residual = numerics::l2(&av.iter().zip(&v).map(|(a, x)| a - lambda * x).collect::<Vec<_>>());
            if residual < tolerance && attempt >= 1 {
                break;
            }
        }
        if !(residual < tolerance) {
            return Err(Error::Solver { index, residual, tolerance });
        }
        Ok((v, residual))
    }
}

fn normalize(v: &mut [f64]) {
    let s = numerics::l2(v);
    if s > 0.0 {
        for x in v.iter_mut() {
            *x /= s;
        }
    }
}

/// Eigenvalues (ascending) with unit eigenvectors and their residuals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    #[serde(skip)]
    pub vectors: Vec<Vec<f64>>,
    /// `||A v - lambda v||_2` per pair.
    pub residuals: Vec<f64>,
    /// `||A||_inf`.
    pub norm: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize, dx: f64) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0 / (dx * dx); n], vec![-1.0 / (dx * dx); n - 1]).unwrap()
    }

    #[test]
    fn discrete_laplacian_spectrum() {
        let n = 200;
        let dx = 1.0 / (n as f64 + 1.0);
        let a = laplacian(n, dx);
        let pairs = a.lowest_eigenpairs(4).unwrap();
        for (j, lam) in pairs.values.iter().enumerate() {
            let theta = (j as f64 + 1.0) * std::f64::consts::PI * dx / 2.0;
            let exact = 4.0 / (dx * dx) * theta.sin().powi(2);
            assert!((lam - exact).abs() < 1e-9 * exact, "{lam} {exact}");
        }
        for (i, v) in pairs.vectors.iter().enumerate() {
            for (j, w) in pairs.vectors.iter().enumerate() {
                let d = numerics::dot(v, w);
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
        assert!(pairs.residuals.iter().all(|r| *r < 1e-10 * pairs.norm));
    }

    #[test]
    fn sturm_count_brackets() {
        let a = SymTridiagonal::new(vec![1.0, 2.0, 3.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(a.count_below(0.5), 0);
        assert_eq!(a.count_below(2.5), 2);
        assert_eq!(a.count_below(10.0), 3);
        for (got, want) in a.lowest_eigenvalues(3).iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-15, "{got} {want}");
        }
    }

    #[test]
    fn indefinite_matrix() {
        // [[0, 1], [1, 0]] has eigenvalues -1 and 1.
        let a = SymTridiagonal::new(vec![0.0, 0.0], vec![1.0]).unwrap();
        let p = a.lowest_eigenpairs(2).unwrap();
        assert!((p.values[0] + 1.0).abs() < 1e-15);
        assert!((p.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(SymTridiagonal::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(SymTridiagonal::new(vec![f64::NAN], vec![]).is_err());
    }
}
