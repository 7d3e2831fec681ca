//! Symmetric tridiagonal eigenproblems: Sturm-sequence bisection for the
//! eigenvalues, shifted inverse iteration for the vectors.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

/// An eigenvalue with its unit eigenvector and scaled residual
/// `‖(T - λ)x‖ / ‖T‖_∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Invalid("tridiagonal shape mismatch".into()));
        }
        if diag.iter().chain(&off).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite matrix entry".into()));
        }
        Ok(SymTridiagonal { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Infinity norm.
    pub fn norm(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let l = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let r = if i + 1 < n { self.off[i].abs() } else { 0.0 };
                self.diag[i].abs() + l + r
            })
            .fold(0.0, f64::max)
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let l = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let r = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - l - r);
            hi = hi.max(self.diag[i] + l + r);
        }
        let pad = 1e-12 * (lo.abs().max(hi.abs())).max(1e-300);
        (lo - pad, hi + pad)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.off[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt() * (1.0 + x.abs());
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0..self.len() {
            if i > 0 {
                let e = self.off[i - 1];
                q = self.diag[i] - x - e * e / q;
            }
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn refine(&self, mut lo: f64, mut hi: f64, k: usize, rel: f64) -> f64 {
        // invariant: count_below(lo) <= k < count_below(hi)
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= rel * lo.abs().max(hi.abs()) + f64::MIN_POSITIVE || mid <= lo || mid >= hi
            {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// The `k`-th smallest eigenvalue (0-based), to near machine precision.
    pub fn kth_eigenvalue(&self, k: usize) -> Result<f64> {
        if k >= self.len() {
            return Err(Error::Invalid(format!("eigenvalue index {k} out of range")));
        }
        let (lo, hi) = self.bounds();
        Ok(self.refine(lo, hi, k, 4.0 * f64::EPSILON))
    }

    /// All eigenvalues below `threshold`, ascending, each to relative
    /// bracket width `rel`.
    pub fn eigenvalues_below(&self, threshold: f64, rel: f64) -> Vec<f64> {
        let (lo, hi) = self.bounds();
        let top = threshold.min(hi);
        if top <= lo {
            return Vec::new();
        }
        let c_top = self.count_below(top);
        let mut out = Vec::with_capacity(c_top);
        let mut stack = vec![(lo, top, 0usize, c_top)];
        while let Some((a, b, ca, cb)) = stack.pop() {
            if cb == ca {
                continue;
            }
            let narrow = b - a <= rel * a.abs().max(b.abs()) + f64::MIN_POSITIVE;
            if cb - ca == 1 || narrow {
                for k in ca..cb {
                    out.push(self.refine(a, b, k, rel));
                }
                continue;
            }
            let mid = 0.5 * (a + b);
            let cm = self.count_below(mid);
            stack.push((mid, b, cm, cb));
            stack.push((a, mid, ca, cm));
        }
        out.sort_by(|x, y| x.total_cmp(y));
        out
    }

    /// Solves `(T - σ) x = b` in place by LU with partial pivoting.
    pub fn solve_shifted(&self, sigma: f64, b: &mut [f64]) {
        let n = self.len();
        if n == 1 {
            let d = self.diag[0] - sigma;
            b[0] /= if d == 0.0 {
                f64::EPSILON * self.norm().max(1.0)
            } else {
                d
            };
            return;
        }
        let guard = f64::EPSILON * self.norm().max(f64::MIN_POSITIVE);
        let mut dl = self.off.clone();
        let mut d: Vec<f64> = self.diag.iter().map(|v| v - sigma).collect();
        let mut du = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n - 1];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = guard;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
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
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = guard;
        }
        for i in 0..n - 1 {
            if swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - dl[i] * b[i];
            } else {
                b[i + 1] -= dl[i] * b[i];
            }
        }
        b[n - 1] /= d[n - 1];
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
        }
    }

    /// Eigenvector for an eigenvalue estimate `lambda`, orthogonalized
    /// against `previous` (vectors of nearby eigenvalues).
    pub fn eigenvector(&self, lambda: f64, previous: &[&[f64]]) -> EigenPair {
        let n = self.len();
        let norm = self.norm().max(f64::MIN_POSITIVE);
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.1 * ((i as f64) * 0.7548776662).fract())
            .collect();
        normalize(&mut x);
        let mut value = lambda;
        for it in 0..6 {
            let shift = if it == 0 { lambda } else { value };
            self.solve_shifted(shift, &mut x);
            for p in previous {
                let c: f64 = x.iter().zip(p.iter()).map(|(a, b)| a * b).sum();
                for (xi, pi) in x.iter_mut().zip(p.iter()) {
                    *xi -= c * pi;
                }
            }
            if !normalize(&mut x) {
                x = (0..n)
                    .map(|i| ((i as f64 + 1.0) * 0.618).fract() - 0.5)
                    .collect();
                normalize(&mut x);
                continue;
            }
            let tx = self.apply(&x);
            let rq: f64 = tx.iter().zip(&x).map(|(a, b)| a * b).sum();
            let res = residual(&tx, &x, rq) / norm;
            // keep the bisection value if the Rayleigh quotient drifted to another eigenvalue
            if (rq - lambda).abs() <= 1e-6 * lambda.abs().max(norm * 1e-9) {
                value = rq;
            }
            if res < 1e-13 && it >= 1 {
                break;
            }
        }
        let tx = self.apply(&x);
        let res = residual(&tx, &x, value) / norm;
        EigenPair {
            value,
            vector: x,
            residual: res,
        }
    }

    /// All eigenpairs below `threshold`, ascending.
    pub fn eigenpairs_below(&self, threshold: f64) -> Vec<EigenPair> {
        let values = self.eigenvalues_below(threshold, 1e-9);
        self.pairs_for(&values)
    }

    /// The `count` lowest eigenpairs.
    pub fn lowest(&self, count: usize) -> Result<Vec<EigenPair>> {
        let count = count.min(self.len());
        let mut values = Vec::with_capacity(count);
        for k in 0..count {
            values.push(self.kth_eigenvalue(k)?);
        }
        Ok(self.pairs_for(&values))
    }

    fn pairs_for(&self, values: &[f64]) -> Vec<EigenPair> {
        let scale = self.norm().max(f64::MIN_POSITIVE);
        let mut pairs: Vec<EigenPair> = Vec::with_capacity(values.len());
        for (k, &v) in values.iter().enumerate() {
            let near: Vec<&[f64]> = pairs
                .iter()
                .enumerate()
                .filter(|(j, p)| k - j <= 8 && (p.value - v).abs() <= 1e-7 * scale)
                .map(|(_, p)| p.vector.as_slice())
                .collect();
            let pair = self.eigenvector(v, &near);
            pairs.push(pair);
        }
        pairs
    }
}

fn normalize(x: &mut [f64]) -> bool {
    let amax = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(amax > 0.0 && amax.is_finite()) {
        return false;
    }
    let s: f64 = x.iter().map(|v| (v / amax).powi(2)).sum::<f64>().sqrt() * amax;
    for v in x.iter_mut() {
        *v /= s;
    }
    true
}

fn residual(tx: &[f64], x: &[f64], lambda: f64) -> f64 {
    tx.iter()
        .zip(x)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum::<f64>()
        .sqrt()
}
