//! Spherical-harmonic sectors: eigenvalues of the Laplace–Beltrami operator
//! on the unit sphere and their multiplicities.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::funcs::{Dimension, RadialPotential};

/// `c_m = m(N-2+m)`.
pub fn angular_eigenvalue(dim: Dimension, m: usize) -> f64 {
    let m = m as f64;
    m * (dim.as_f64() - 2.0 + m)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Dimension of the space of degree-`m` spherical harmonics on `S^{N-1}`.
pub fn multiplicity(dim: Dimension, m: usize) -> f64 {
    let n = dim.get();
    if m < 2 {
        return if m == 0 { 1.0 } else { n as f64 };
    }
    (binomial(m + n - 1, n - 1) - binomial(m + n - 3, n - 1)).round()
}

/// Zonal harmonic of degree `m` as a function of `x = cos θ`, normalized by
/// `(1/|S^{N-1}|) ∫ Z_m² dσ = 1`, with its derivative. Available for
/// `N = 3` (Legendre) and `N = 4` (Chebyshev of the second kind).
pub fn zonal(dim: Dimension, m: usize, x: f64) -> Result<(f64, f64)> {
    let (mut p0, mut p1) = match dim.get() {
        3 => (1.0, x),
        4 => (1.0, 2.0 * x),
        n => {
            return Err(Error::Unsupported(format!(
                "zonal harmonics implemented for N = 3, 4, not {n}"
            )))
        }
    };
    let mut d0 = 0.0;
    let mut d1 = if dim.get() == 3 { 1.0 } else { 2.0 };
    if m == 0 {
        p1 = p0;
        d1 = d0;
    }
    for k in 1..m {
        let kf = k as f64;
        let (p2, d2) = if dim.get() == 3 {
            let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
            let d2 = ((2.0 * kf + 1.0) * (p1 + x * d1) - kf * d0) / (kf + 1.0);
            (p2, d2)
        } else {
            (2.0 * x * p1 - p0, 2.0 * (p1 + x * d1) - d0)
        };
        p0 = p1;
        d0 = d1;
        p1 = p2;
        d1 = d2;
    }
    let norm = if dim.get() == 3 {
        (2.0 * m as f64 + 1.0).sqrt()
    } else {
        1.0
    };
    Ok((norm * p1, norm * d1))
}

/// Energy `∫ (|∇u|² - V u²) dx` of `u(r, θ) = Σ_m u_m(r) Z_m(cos θ)` by
/// tensor Gauss quadrature in `(s, θ)`, with `u_m` piecewise linear on the
/// log grid.
pub fn zonal_energy(
    dim: Dimension,
    log_nodes: &[f64],
    coefficients: &[Vec<f64>],
    v: Option<&RadialPotential>,
) -> Result<f64> {
    if coefficients.iter().any(|c| c.len() != log_nodes.len()) {
        return Err(Error::Invalid("coefficients do not match the grid".into()));
    }
    let n = dim.get();
    let angular = GaussLegendre::new(NonZeroUsize::new(96).expect("nonzero"));
    // (Z_m(x), (1-x²)^{1/2} Z_m'(x), weight) at the angular nodes
    let mut table = Vec::new();
    for (t, w) in angular.as_node_weight_pairs() {
        let theta = 0.5 * std::f64::consts::PI * (t + 1.0);
        let (x, sin) = (theta.cos(), theta.sin());
        let mut z = Vec::with_capacity(coefficients.len());
        for m in 0..coefficients.len() {
            let (val, der) = zonal(dim, m, x)?;
            z.push((val, sin * der));
        }
        // dσ = |S^{N-2}| sin^{N-2}θ dθ
        table.push((z, 0.5 * std::f64::consts::PI * w * sin.powi(n as i32 - 2)));
    }
    // |S^{N-2}|
    let lower_sphere = if n == 3 { 2.0 } else { 4.0 } * std::f64::consts::PI;
    let nm2 = dim.as_f64() - 2.0;
    let mut total = 0.0;
    let radial = crate::grids::gauss_rule();
    for e in 0..log_nodes.len() - 1 {
        let (a, b) = (log_nodes[e], log_nodes[e + 1]);
        let h = b - a;
        for &(xq, wq) in radial {
            let s = a + 0.5 * (xq + 1.0) * h;
            let t = (s - a) / h;
            let r2v = v.map_or(0.0, |p| p.r2_value(dim, s));
            let vals: Vec<(f64, f64)> = coefficients
                .iter()
                .map(|c| (c[e] * (1.0 - t) + c[e + 1] * t, (c[e + 1] - c[e]) / h))
                .collect();
            let mut ang = 0.0;
            for (z, wa) in &table {
                let (mut u, mut us, mut ut) = (0.0, 0.0, 0.0);
                for ((val, der), (zv, zd)) in vals.iter().zip(z) {
                    u += val * zv;
                    us += der * zv;
                    ut += val * zd;
                }
                ang += wa * (us * us + ut * ut - r2v * u * u);
            }
            total += 0.5 * h * wq * (nm2 * s).exp() * ang;
        }
    }
    Ok(total * lower_sphere)
}
