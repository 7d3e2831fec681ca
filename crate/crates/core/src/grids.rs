//! Log-radial grids, quadrature and assembly of weighted radial forms.
//!
//! A grid is uniform in `s = ln r`. Forms are discretized with piecewise
//! linear functions in `s`, exact element integrals of the stiffness weight
//! and a lumped (trapezoidal) mass, which yields a symmetric tridiagonal
//! pencil. The pencil is stored in the scaled form `M^{-1/2} A M^{-1/2}`
//! together with `ln M`, so that grids reaching `r = 1e-80` stay in range.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

use crate::eigen::SymTridiagonal;
use crate::error::{Error, Result};
use crate::funcs::{Dimension, GroundState, Profile, RadialPotential};

/// Eight-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let rule = GaussLegendre::new(NonZeroUsize::new(8).expect("nonzero"));
        let mut v: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    })
}

/// Integrates `f` over every element of the log grid `s` with the Gauss rule.
pub fn gauss_elements<F: FnMut(usize, f64) -> f64>(s: &[f64], mut f: F) -> f64 {
    let rule = gauss_rule();
    let mut total = 0.0;
    for e in 0..s.len().saturating_sub(1) {
        let (a, b) = (s[e], s[e + 1]);
        let h = b - a;
        for &(x, w) in rule {
            total += 0.5 * h * w * f(e, a + 0.5 * (x + 1.0) * h);
        }
    }
    total
}

/// Radially symmetric domains.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadialDomain {
    Ball { radius: f64 },
    Annulus { inner: f64, outer: f64 },
    Exterior { radius: f64, truncation: f64 },
    WholeSpace { r_min: f64, truncation: f64 },
}

impl RadialDomain {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            RadialDomain::Ball { radius } => radius > 0.0 && radius.is_finite(),
            RadialDomain::Annulus { inner, outer } => {
                inner > 0.0 && outer > inner && outer.is_finite()
            }
            RadialDomain::Exterior { radius, truncation } => {
                radius > 0.0 && truncation > radius && truncation.is_finite()
            }
            RadialDomain::WholeSpace { r_min, truncation } => {
                r_min > 0.0 && r_min < 1.0 && truncation > 1.0 && truncation.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("invalid domain {self:?}")))
        }
    }

    /// `D = sup |x|` for bounded domains.
    pub fn scale(&self) -> Option<f64> {
        match *self {
            RadialDomain::Ball { radius } => Some(radius),
            RadialDomain::Annulus { outer, .. } => Some(outer),
            _ => None,
        }
    }

    /// Whether the domain reaches down to the origin.
    pub fn touches_origin(&self) -> bool {
        matches!(
            self,
            RadialDomain::Ball { .. } | RadialDomain::WholeSpace { .. }
        )
    }
}

/// Boundary treatment at a grid end.
///
/// `Robin(c)` refers to the form in the original variable `u = φw`: the flux
/// of `φ` enters together with `c·|x|^{N-2} u²` on the boundary sphere, where
/// `c` carries the sign of the quotient (positive for the ball convention,
/// negative for the exterior convention). `Natural` leaves the end free in
/// the weighted variable `w` with no boundary term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Boundary {
    Dirichlet,
    Natural,
    Robin(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    s: Vec<f64>,
    pub inner: Boundary,
    pub outer: Boundary,
}

/// Builds a geometric grid with `n` nodes spanning the domain.
pub fn make_grid(dom: RadialDomain, n: usize, r_min_fraction: f64) -> Result<RadialGrid> {
    if n < 16 {
        return Err(Error::Invalid(format!("need at least 16 nodes, got {n}")));
    }
    if !(r_min_fraction > 0.0 && r_min_fraction <= 1e-2) {
        return Err(Error::Invalid(format!(
            "r_min fraction must lie in (0, 1e-2], got {r_min_fraction}"
        )));
    }
    dom.validate()?;
    let (lo, hi) = match dom {
        RadialDomain::Ball { radius } => ((r_min_fraction * radius).ln(), radius.ln()),
        RadialDomain::Annulus { inner, outer } => (inner.ln(), outer.ln()),
        RadialDomain::Exterior { radius, truncation } => (radius.ln(), truncation.ln()),
        RadialDomain::WholeSpace { r_min, truncation } => (r_min.ln(), truncation.ln()),
    };
    RadialGrid::uniform(lo, hi, n)
}

impl RadialGrid {
    /// `n` nodes uniformly spaced in `s` on `[lo, hi]`, Dirichlet at both ends.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(hi > lo) || n < 2 || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Invalid(
                "grid needs lo < hi and at least two nodes".into(),
            ));
        }
        let h = (hi - lo) / (n - 1) as f64;
        let mut s: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
        s[n - 1] = hi;
        Ok(RadialGrid {
            s,
            inner: Boundary::Dirichlet,
            outer: Boundary::Dirichlet,
        })
    }

    /// Grid on arbitrary strictly increasing nodes in `s`, Dirichlet at both ends.
    pub fn from_log_nodes(s: Vec<f64>) -> Result<Self> {
        if s.len() < 2 || s.iter().any(|x| !x.is_finite()) || s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid(
                "log nodes must be finite and strictly increasing".into(),
            ));
        }
        Ok(RadialGrid {
            s,
            inner: Boundary::Dirichlet,
            outer: Boundary::Dirichlet,
        })
    }

    /// Uniform grid on `[lo, hi]` with step at most `h`.
    pub fn with_step(lo: f64, hi: f64, h: f64) -> Result<Self> {
        let n = ((hi - lo) / h).ceil() as usize + 1;
        Self::uniform(lo, hi, n.max(2))
    }

    pub fn with_boundaries(mut self, inner: Boundary, outer: Boundary) -> Self {
        self.inner = inner;
        self.outer = outer;
        self
    }

    /// Inserts the midpoint of every element; the old nodes are kept.
    pub fn refine(&self) -> Self {
        let mut s = Vec::with_capacity(2 * self.s.len() - 1);
        for w in self.s.windows(2) {
            s.push(w[0]);
            s.push(0.5 * (w[0] + w[1]));
        }
        s.push(self.s[self.s.len() - 1]);
        RadialGrid {
            s,
            inner: self.inner,
            outer: self.outer,
        }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Node positions in `s = ln r`.
    pub fn log_nodes(&self) -> &[f64] {
        &self.s
    }

    /// Node radii.
    pub fn nodes(&self) -> Vec<f64> {
        self.s.iter().map(|s| s.exp()).collect()
    }

    pub fn step(&self) -> f64 {
        (self.s[self.s.len() - 1] - self.s[0]) / (self.s.len() - 1) as f64
    }

    /// Trapezoid weights in `s`.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let n = self.s.len();
        (0..n)
            .map(|i| {
                let l = if i > 0 {
                    self.s[i] - self.s[i - 1]
                } else {
                    0.0
                };
                let r = if i + 1 < n {
                    self.s[i + 1] - self.s[i]
                } else {
                    0.0
                };
                0.5 * (l + r)
            })
            .collect()
    }

    /// Per-node weights for `∫ · r^{N-1} dr` (angular factor excluded).
    pub fn quad_weights(&self, dim: Dimension) -> Vec<f64> {
        let n = dim.as_f64();
        self.trapezoid_weights()
            .iter()
            .zip(&self.s)
            .map(|(w, s)| w * (n * s).exp())
            .collect()
    }

    /// Index of the node closest to `r`.
    pub fn nearest(&self, r: f64) -> usize {
        let s = r.ln();
        let j = self.s.partition_point(|x| *x < s);
        if j == 0 {
            0
        } else if j >= self.s.len() {
            self.s.len() - 1
        } else if (self.s[j] - s) < (s - self.s[j - 1]) {
            j
        } else {
            j - 1
        }
    }
}

/// Measures for [`quadrature`].
#[derive(Clone, Copy, Debug)]
pub enum Measure<'a> {
    /// `dx`.
    Volume,
    /// `|x|^{-2} dx`.
    Hardy,
    /// `φ² dx`.
    Weighted(&'a GroundState),
}

/// Trapezoidal value of `∫ u² dμ` over the grid, angular factor included.
pub fn quadrature(
    dim: Dimension,
    grid: &RadialGrid,
    values: &[f64],
    measure: Measure,
) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::Invalid("values do not match the grid".into()));
    }
    let n = dim.as_f64();
    let tw = grid.trapezoid_weights();
    let mut total = 0.0;
    for (i, &s) in grid.log_nodes().iter().enumerate() {
        let log_w = match measure {
            Measure::Volume => n * s,
            Measure::Hardy => (n - 2.0) * s,
            Measure::Weighted(phi) => n * s + 2.0 * phi.log_value(s)?,
        };
        total += tw[i] * values[i] * values[i] * log_w.exp();
    }
    Ok(dim.surface_area() * total)
}

/// Ingredients of the quadratic form
/// `∫|∇u|² - ∫V u² + c_m ∫u²/|x|² + boundary terms` over `∫ W u²`,
/// written for `u = φ w`.
#[derive(Clone, Copy, Debug)]
pub struct FormSpec<'a> {
    pub dim: Dimension,
    pub potential: Option<&'a RadialPotential>,
    /// Angular eigenvalue `c_m = m(N-2+m)` of the harmonic sector.
    pub sector: f64,
    pub weight: Option<&'a GroundState>,
    pub denominator: &'a Profile,
}

/// The assembled pencil for a [`FormSpec`] on a [`RadialGrid`].
#[derive(Clone, Debug)]
pub struct WeightedOperator {
    pub dim: Dimension,
    /// All grid nodes in `s`.
    pub s: Vec<f64>,
    /// Grid indices of the unknowns (Dirichlet ends removed).
    pub active: Vec<usize>,
    /// `ln` of the element stiffness `k_e = h_e^{-2} ∫_e φ² r^{N-2} ds`.
    pub log_stiffness: Vec<f64>,
    /// Potential plus boundary contribution divided by the mass, per grid node.
    pub potential_ratio: Vec<f64>,
    /// `ln` of the lumped mass `M_i = tw_i φ_i² r_i^{N-2} r_i² W(r_i)`.
    pub log_mass: Vec<f64>,
    /// Boundary term divided by the mass, with its grid node.
    pub boundary_term: Vec<(usize, f64)>,
    /// `ln φ` at the grid nodes.
    pub log_phi: Vec<f64>,
    matrix: SymTridiagonal,
}

/// Assembles the weighted form on the grid.
pub fn assemble(grid: &RadialGrid, spec: &FormSpec) -> Result<WeightedOperator> {
    let dim = spec.dim;
    let nm2 = dim.as_f64() - 2.0;
    let s = grid.log_nodes().to_vec();
    let n = s.len();
    let mut g = vec![0.0; n];
    let mut r2v_phi = vec![0.0; n];
    if let Some(phi) = spec.weight {
        for i in 0..n {
            g[i] = phi.log_value(s[i])?;
            if !g[i].is_finite() {
                return Err(Error::Positivity(format!(
                    "weight is not positive at r = {}",
                    s[i].exp()
                )));
            }
            r2v_phi[i] = phi.r2_potential(s[i]);
        }
    }
    let rho: Vec<f64> = (0..n).map(|i| 2.0 * g[i] + nm2 * s[i]).collect();
    let tw = grid.trapezoid_weights();

    let mut log_mass = vec![0.0; n];
    let mut potential_ratio = vec![0.0; n];
    for i in 0..n {
        let log_w = spec.denominator.log_value(s[i]) + 2.0 * s[i];
        if !log_w.is_finite() {
            return Err(Error::Positivity(format!(
                "denominator weight vanishes at r = {}",
                s[i].exp()
            )));
        }
        log_mass[i] = tw[i].ln() + rho[i] + log_w;
        let r2v = spec.potential.map_or(0.0, |p| p.r2_value(dim, s[i]));
        let q = r2v_phi[i] - r2v + spec.sector;
        potential_ratio[i] = q / log_w.exp();
    }

    let log_stiffness: Vec<f64> = (0..n - 1)
        .map(|e| {
            let h = s[e + 1] - s[e];
            let (a, b) = (rho[e], rho[e + 1]);
            let d = (b - a).abs();
            let log_int = a.max(b)
                + h.ln()
                + if d < 1e-8 {
                    -0.5 * d
                } else {
                    ((-(-d).exp_m1()) / d).ln()
                };
            log_int - 2.0 * h.ln()
        })
        .collect();

    let mut boundary_term = Vec::new();
    let phi_flux = |i: usize, sign: f64| -> Result<f64> {
        Ok(match spec.weight {
            Some(phi) => sign * phi.log_derivative(s[i])?,
            None => 0.0,
        })
    };
    for (bc, i, sign) in [(grid.inner, 0usize, -1.0), (grid.outer, n - 1, 1.0)] {
        if let Boundary::Robin(c) = bc {
            let coeff = phi_flux(i, sign)? + c;
            let ratio = coeff * (rho[i] - log_mass[i]).exp();
            potential_ratio[i] += ratio;
            boundary_term.push((i, ratio));
        }
    }

    let first = if grid.inner == Boundary::Dirichlet {
        1
    } else {
        0
    };
    let last = if grid.outer == Boundary::Dirichlet {
        n - 2
    } else {
        n - 1
    };
    if last < first {
        return Err(Error::Invalid("grid has no interior unknowns".into()));
    }
    let active: Vec<usize> = (first..=last).collect();
    let mut diag = Vec::with_capacity(active.len());
    let mut off = Vec::with_capacity(active.len().saturating_sub(1));
    for &i in &active {
        let mut d = potential_ratio[i];
        if i > 0 {
            d += (log_stiffness[i - 1] - log_mass[i]).exp();
        }
        if i + 1 < n {
            d += (log_stiffness[i] - log_mass[i]).exp();
        }
        diag.push(d);
        if i < last {
            off.push(-(log_stiffness[i] - 0.5 * (log_mass[i] + log_mass[i + 1])).exp());
        }
    }
    let matrix = SymTridiagonal::new(diag, off)?;
    Ok(WeightedOperator {
        dim,
        s,
        active,
        log_stiffness,
        potential_ratio,
        log_mass,
        boundary_term,
        log_phi: g,
        matrix,
    })
}

impl WeightedOperator {
    /// The scaled symmetric matrix `M^{-1/2} A M^{-1/2}` on the unknowns.
    pub fn matrix(&self) -> &SymTridiagonal {
        &self.matrix
    }

    /// Rayleigh quotient of nodal values `w` (entries at Dirichlet nodes ignored).
    pub fn quotient_w(&self, w: &[f64]) -> f64 {
        let c = self
            .active
            .iter()
            .filter(|&&i| w[i] != 0.0)
            .map(|&i| 0.5 * self.log_mass[i] + w[i].abs().ln())
            .fold(f64::NEG_INFINITY, f64::max);
        if !c.is_finite() {
            return f64::NAN;
        }
        let y: Vec<f64> = self
            .active
            .iter()
            .map(|&i| w[i] * (0.5 * self.log_mass[i] - c).exp())
            .collect();
        let ty = self.matrix.apply(&y);
        let num: f64 = ty.iter().zip(&y).map(|(a, b)| a * b).sum();
        let den: f64 = y.iter().map(|v| v * v).sum();
        num / den
    }

    /// Rayleigh quotient of nodal values of `u`.
    pub fn quotient_u(&self, u: &[f64]) -> f64 {
        let w: Vec<f64> = u
            .iter()
            .zip(&self.log_phi)
            .map(|(u, g)| u * (-g).exp())
            .collect();
        self.quotient_w(&w)
    }

    /// Numerator and denominator of the quotient of `w`, angular factor included.
    /// Only meaningful when the raw masses are representable.
    pub fn form_parts_w(&self, w: &[f64]) -> (f64, f64) {
        let n = self.s.len();
        let area = self.dim.surface_area();
        let wa = |i: usize| if self.active.contains(&i) { w[i] } else { 0.0 };
        let mut num = 0.0;
        for e in 0..n - 1 {
            num += self.log_stiffness[e].exp() * (wa(e + 1) - wa(e)).powi(2);
        }
        let mut den = 0.0;
        for &i in &self.active {
            let m = self.log_mass[i].exp();
            num += self.potential_ratio[i] * m * w[i] * w[i];
            den += m * w[i] * w[i];
        }
        (area * num, area * den)
    }

    /// Converts a vector in the scaled unknowns to nodal `u = φw` values
    /// normalized to unit maximum modulus.
    pub fn vector_to_u(&self, y: &[f64]) -> Vec<f64> {
        let mut logs = vec![f64::NEG_INFINITY; self.s.len()];
        let mut signs = vec![0.0; self.s.len()];
        for (k, &i) in self.active.iter().enumerate() {
            if y[k] != 0.0 {
                logs[i] = y[k].abs().ln() - 0.5 * self.log_mass[i] + self.log_phi[i];
                signs[i] = y[k].signum();
            }
        }
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        logs.iter()
            .zip(&signs)
            .map(|(l, sg)| {
                if l.is_finite() {
                    sg * (l - top).exp()
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Nodal `w` values for a vector in the scaled unknowns, multiplied by
    /// `e^{-shift}` to keep them in range.
    pub fn vector_to_w(&self, y: &[f64], shift: f64) -> Vec<f64> {
        let mut w = vec![0.0; self.s.len()];
        for (k, &i) in self.active.iter().enumerate() {
            w[i] = y[k] * (-0.5 * self.log_mass[i] - shift).exp();
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn d3() -> Dimension {
        Dimension::new(3).unwrap()
    }

    #[test]
    fn grid_examples() {
        let g = make_grid(RadialDomain::Ball { radius: 1.0 }, 64, 1e-6).unwrap();
        let r = g.nodes();
        assert_eq!(r.len(), 64);
        assert!((r[0] - 1e-6).abs() < 1e-18 && (r[63] - 1.0).abs() < 1e-15);
        let ratio = r[1] / r[0];
        assert!(r.windows(2).all(|w| (w[1] / w[0] - ratio).abs() < 1e-12));
        let e = make_grid(
            RadialDomain::Exterior {
                radius: 1.0,
                truncation: 1e3,
            },
            64,
            1e-6,
        )
        .unwrap();
        assert!((e.nodes()[63] - 1e3).abs() < 1e-9);
        let f = g.refine();
        assert_eq!(f.len(), 127);
        assert!(g.log_nodes().iter().all(|s| f.log_nodes().contains(s)));
        assert!(make_grid(RadialDomain::Ball { radius: 1.0 }, 64, 0.5).is_err());
        assert!(make_grid(RadialDomain::Ball { radius: 1.0 }, 8, 1e-6).is_err());
    }

    #[test]
    fn quadrature_examples() {
        let g = make_grid(RadialDomain::Ball { radius: 1.0 }, 1024, 1e-6).unwrap();
        let ones = vec![1.0; g.len()];
        let v = quadrature(d3(), &g, &ones, Measure::Volume).unwrap();
        assert!((v / (4.0 * PI / 3.0) - 1.0).abs() < 1e-3);
        let u: Vec<f64> = g.nodes().iter().map(|r| *r).collect();
        let v = quadrature(d3(), &g, &u, Measure::Volume).unwrap();
        assert!((v / (4.0 * PI / 5.0) - 1.0).abs() < 1e-3);
        let u: Vec<f64> = g.nodes().iter().map(|r| r.powf(-0.5)).collect();
        let v = quadrature(d3(), &g, &u, Measure::Hardy).unwrap();
        // ∫ r^{-1} dr over [1e-6, 1] is exact for the trapezoid rule in s
        assert!((v - 4.0 * PI * 1e6f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn dirichlet_ball_ground_eigenvalue() {
        let g = make_grid(RadialDomain::Ball { radius: 1.0 }, 3000, 1e-5)
            .unwrap()
            .with_boundaries(Boundary::Natural, Boundary::Dirichlet);
        let vol = Profile::volume();
        let op = assemble(
            &g,
            &FormSpec {
                dim: d3(),
                potential: None,
                sector: 0.0,
                weight: None,
                denominator: &vol,
            },
        )
        .unwrap();
        let l = op.matrix().kth_eigenvalue(0).unwrap();
        assert!((l / (PI * PI) - 1.0).abs() < 1e-2, "{l}");
    }

    #[test]
    fn robin_constant_quotient() {
        let alpha = 0.3;
        let g = make_grid(RadialDomain::Ball { radius: 1.0 }, 400, 1e-8)
            .unwrap()
            .with_boundaries(Boundary::Natural, Boundary::Robin(alpha));
        let hardy = Profile::hardy();
        let op = assemble(
            &g,
            &FormSpec {
                dim: d3(),
                potential: None,
                sector: 0.0,
                weight: None,
                denominator: &hardy,
            },
        )
        .unwrap();
        let q = op.quotient_u(&vec![1.0; g.len()]);
        let trunc = 1.0 - 1e-8;
        assert!((q - alpha / trunc).abs() < 1e-3 * alpha, "{q}");
    }
}
