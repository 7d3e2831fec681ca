//! Radial Rayleigh quotients with boundary terms and the critical
//! thresholds `ε_0`, `ε_{k,0}`, `ε̄_0`, `ε̄_{k,0}`.
//!
//! Every quotient is solved in the radial sector: for radial potentials the
//! angular term `c_m/|x|²` only raises the quotient. The forms are assembled
//! for `u = r^{-(N-2)/2} w`, which turns the inverse-square problems into
//! constant-coefficient problems in `s = ln r`.

use crate::eigen::EigenPair;
use crate::error::{Error, Result};
use crate::funcs::{Dimension, GroundState, Profile, RadialPotential, Side};
use crate::grids::{assemble, Boundary, FormSpec, RadialDomain, RadialGrid};
use crate::sectors::angular_eigenvalue;

/// Sign convention for the boundary term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    /// `+α ∫_{∂Ω} (x·ν/|x|²) u²` on the outer sphere of a ball.
    Ball,
    /// `-α ∫_{∂Ω} (x·ν/|x|²) u²` on the inner sphere of an exterior domain.
    Exterior,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RayleighProblem {
    pub dim: Dimension,
    pub domain: RadialDomain,
    pub alpha: f64,
    pub convention: Convention,
    /// Potential subtracted in the numerator.
    pub potential: Option<RadialPotential>,
    /// Weight `W` of the denominator `∫ W u²`.
    pub denominator: Profile,
    pub sector: usize,
}

impl RayleighProblem {
    /// `λ_Ω(α)` on a ball, or `μ_Ω(α)` on an exterior domain, with the Hardy
    /// denominator.
    pub fn hardy(dim: Dimension, domain: RadialDomain, alpha: f64) -> Self {
        let convention = match domain {
            RadialDomain::Exterior { .. } => Convention::Exterior,
            _ => Convention::Ball,
        };
        RayleighProblem {
            dim,
            domain,
            alpha,
            convention,
            potential: None,
            denominator: Profile::hardy(),
            sector: 0,
        }
    }

    fn boundaries(&self) -> (Boundary, Boundary) {
        let signed = match self.convention {
            Convention::Ball => self.alpha,
            Convention::Exterior => -self.alpha,
        };
        match (self.domain, self.convention) {
            (RadialDomain::Exterior { .. }, _)
            | (RadialDomain::Annulus { .. }, Convention::Exterior) => {
                (Boundary::Robin(signed), Boundary::Dirichlet)
            }
            (RadialDomain::WholeSpace { .. }, _) => (Boundary::Dirichlet, Boundary::Dirichlet),
            _ => (Boundary::Dirichlet, Boundary::Robin(signed)),
        }
    }

    /// Log-radius of the end that is held fixed when the truncation varies.
    fn anchor(&self) -> Result<f64> {
        match self.domain {
            RadialDomain::Ball { radius } => Ok(radius.ln()),
            RadialDomain::Exterior { radius, .. } => Ok(radius.ln()),
            _ => Err(Error::Unsupported(
                "truncation studies need a ball or an exterior domain".into(),
            )),
        }
    }

    /// Largest useful truncation length in `s`: long enough to expose the
    /// critical branch, short enough that the denominator weight stays in range.
    fn max_length(&self) -> f64 {
        let decay = match (&self.denominator, self.domain) {
            (Profile::Power { exponent, .. }, RadialDomain::Exterior { .. }) => -(exponent + 2.0),
            (Profile::Power { exponent, .. }, _) => exponent + 2.0,
            _ => 0.0,
        };
        if decay > 0.0 {
            (70.0 / decay).min(400.0)
        } else {
            400.0
        }
    }
}

/// Smallest eigenvalue of a discretized quotient.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenResult {
    pub value: f64,
    /// Nodal values of the minimizer `u`, unit maximum modulus.
    pub vector: Vec<f64>,
    /// Log-radii of the nodes carrying `vector`.
    pub log_nodes: Vec<f64>,
    pub residual: f64,
    /// Values at the successive truncations of a study (single entry otherwise).
    pub convergence_trace: Vec<f64>,
    /// Set when the minimizing sequence is expected to be non-compact.
    pub warning: Option<String>,
}

/// Solves the quotient on a given grid; the grid's boundary flags are
/// replaced by those implied by the problem.
pub fn solve_quotient(p: &RayleighProblem, grid: &RadialGrid) -> Result<EigenResult> {
    p.domain.validate()?;
    if let Some(v) = &p.potential {
        v.validate(p.dim)?;
    }
    let (inner, outer) = p.boundaries();
    let grid = grid.clone().with_boundaries(inner, outer);
    let phi = GroundState::critical(p.dim);
    let spec = FormSpec {
        dim: p.dim,
        potential: p.potential.as_ref(),
        sector: angular_eigenvalue(p.dim, p.sector),
        weight: Some(&phi),
        denominator: &p.denominator,
    };
    let op = assemble(&grid, &spec).map_err(|e| match e {
        Error::Positivity(m) => Error::Positivity(format!("indefinite mass: {m}")),
        other => other,
    })?;
    let pairs = op.matrix().lowest(1)?;
    let EigenPair {
        value,
        vector,
        residual,
    } = pairs.into_iter().next().expect("one eigenpair");
    if residual > 1e-8 {
        return Err(Error::NoConvergence(format!(
            "eigen residual {residual:.3e} above 1e-8"
        )));
    }
    let a = p.dim.hardy_exponent();
    let warning = (p.convention == Convention::Ball && (p.alpha - a).abs() < 1e-12)
        .then(|| "critical α: no minimizer, slow convergence in the truncation".to_string());
    Ok(EigenResult {
        value,
        vector: op.vector_to_u(&vector),
        log_nodes: grid.log_nodes().to_vec(),
        residual,
        convergence_trace: vec![value],
        warning,
    })
}

/// Truncation study: a fixed step in `s` and three truncation lengths
/// `L, 2L, 4L` measured from the fixed end of the domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationStudy {
    pub step: f64,
    /// Longest truncation length; `None` picks one from the denominator.
    pub max_length: Option<f64>,
}

impl Default for TruncationStudy {
    fn default() -> Self {
        TruncationStudy {
            step: 0.01,
            max_length: None,
        }
    }
}

/// Extrapolates `v(L) = v_∞ + c_2/L² + c_3/L³` through three samples.
pub fn extrapolate_truncation(lengths: &[f64; 3], values: &[f64; 3]) -> f64 {
    // Solve the 3x3 Vandermonde-like system by elimination.
    let rows: Vec<[f64; 4]> = lengths
        .iter()
        .zip(values)
        .map(|(l, v)| [1.0, l.powi(-2), l.powi(-3), *v])
        .collect();
    let mut m = rows;
    for c in 0..3 {
        let piv = (c..3)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .expect("rows");
        m.swap(c, piv);
        for r in 0..3 {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..4 {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    m[0][3] / m[0][0]
}

/// Solves the quotient at three truncations and extrapolates in the
/// truncation length. The returned vector belongs to the longest truncation.
pub fn converged_quotient(p: &RayleighProblem, study: &TruncationStudy) -> Result<EigenResult> {
    let anchor = p.anchor()?;
    let l_max = study.max_length.unwrap_or_else(|| p.max_length());
    let lengths = [l_max / 4.0, l_max / 2.0, l_max];
    let mut values = [0.0; 3];
    let mut last = None;
    for (j, &l) in lengths.iter().enumerate() {
        let (lo, hi) = match p.domain {
            RadialDomain::Exterior { .. } => (anchor, anchor + l),
            _ => (anchor - l, anchor),
        };
        let grid = RadialGrid::with_step(lo, hi, study.step)?;
        let domain = match p.domain {
            RadialDomain::Exterior { radius, .. } => RadialDomain::Exterior {
                radius,
                truncation: hi.exp(),
            },
            d => d,
        };
        let q = RayleighProblem {
            domain,
            ..p.clone()
        };
        let r = solve_quotient(&q, &grid)?;
        values[j] = r.value;
        last = Some(r);
    }
    let mut out = last.expect("three solves");
    // Extrapolate only when the truncation error decays algebraically; an
    // exponentially converged sequence is taken as is.
    let (d01, d12) = (values[0] - values[1], values[1] - values[2]);
    let algebraic = d01.abs() > 1e-13 * values[2].abs().max(1.0) && d12.abs() > 0.02 * d01.abs();
    out.value = if algebraic {
        extrapolate_truncation(&lengths, &values)
    } else {
        values[2]
    };
    out.convergence_trace = values.to_vec();
    Ok(out)
}

/// `α(N-2-α)` for `α ≤ (N-2)/2` and `((N-2)/2)²` above: the value of
/// `λ_B(α)` on balls.
pub fn ball_formula(dim: Dimension, alpha: f64) -> f64 {
    let a = dim.hardy_exponent();
    if alpha <= a {
        alpha * (dim.as_f64() - 2.0 - alpha)
    } else {
        a * a
    }
}

/// `μ_B(α)` on the exterior of a ball: `α(N-2-α)` for `α ≥ (N-2)/2`,
/// `((N-2)/2)²` below.
pub fn exterior_formula(dim: Dimension, alpha: f64) -> f64 {
    ball_formula(dim, dim.as_f64() - 2.0 - alpha)
}

/// Which critical threshold to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThresholdVariant {
    /// `ε_0`: exterior of the unit ball, boundary coefficient `(N-2)/2`.
    Base,
    /// `ε_{k,0}`: boundary coefficient `(N-2+k)/2`, `k < N-2`.
    LogRefined(usize),
    /// `ε̄_{k,0}` on the unit ball with coefficient `(N-2-k)/2`; `k = 0`
    /// gives `ε̄_0`.
    KelvinDual(usize),
}

impl ThresholdVariant {
    /// Boundary coefficient and the value of the Hardy quotient it selects.
    fn coefficient(&self, dim: Dimension) -> Result<(f64, Convention)> {
        let nm2 = dim.as_f64() - 2.0;
        match *self {
            ThresholdVariant::Base => Ok((nm2 / 2.0, Convention::Exterior)),
            ThresholdVariant::LogRefined(k) => {
                if k == 0 || k as f64 >= nm2 {
                    return Err(Error::Domain(format!(
                        "log-refined threshold needs 1 <= k < N-2, got k = {k}"
                    )));
                }
                Ok(((nm2 + k as f64) / 2.0, Convention::Exterior))
            }
            ThresholdVariant::KelvinDual(k) => {
                if k as f64 >= nm2 && k > 0 {
                    return Err(Error::Domain(format!(
                        "dual threshold needs k < N-2, got k = {k}"
                    )));
                }
                Ok(((nm2 - k as f64) / 2.0, Convention::Ball))
            }
        }
    }

    /// The lower bound `K^{-1} × (Hardy quotient at the boundary coefficient)`.
    pub fn lower_bound(&self, dim: Dimension, weight: &Profile) -> Result<f64> {
        let (c, conv) = self.coefficient(dim)?;
        let side = if conv == Convention::Exterior {
            Side::Outside
        } else {
            Side::Inside
        };
        let bound = weight
            .subcritical_bound(side)
            .ok_or_else(|| Error::Domain("weight does not satisfy a subcritical bound".into()))?;
        let hardy = match conv {
            Convention::Exterior => exterior_formula(dim, c),
            Convention::Ball => ball_formula(dim, c),
        };
        Ok(hardy / bound.k)
    }
}

/// Computes a critical threshold as the smallest eigenvalue of the quotient
/// with denominator `∫ f u²` (tail) or `∫ g u²` (core for the dual variant).
pub fn epsilon0(
    dim: Dimension,
    weight: &Profile,
    variant: ThresholdVariant,
    study: &TruncationStudy,
) -> Result<EigenResult> {
    let (c, conv) = variant.coefficient(dim)?;
    let lower = variant.lower_bound(dim, weight)?;
    let domain = match conv {
        Convention::Exterior => RadialDomain::Exterior {
            radius: 1.0,
            truncation: 10.0,
        },
        Convention::Ball => RadialDomain::Ball { radius: 1.0 },
    };
    let p = RayleighProblem {
        dim,
        domain,
        alpha: c,
        convention: conv,
        potential: None,
        denominator: weight.clone(),
        sector: 0,
    };
    let r = converged_quotient(&p, study)?;
    if r.value < lower * (1.0 - 1e-6) {
        return Err(Error::BoundViolated(format!(
            "threshold {} below the guaranteed lower bound {lower}: discretization fault",
            r.value
        )));
    }
    Ok(r)
}

/// Outcome of the comparison `λ_Ω(α,V) < λ_{B_r}(α,V)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExistenceCondition {
    pub lambda_domain: f64,
    pub lambda_inner: f64,
    pub holds: bool,
    pub inconclusive: bool,
}

/// Compares the weighted quotient on the ball `Ω = B_R` with the one on `B_r`.
pub fn minimizer_existence_condition(
    dim: Dimension,
    alpha: f64,
    weight: &Profile,
    r: f64,
    big_r: f64,
    study: &TruncationStudy,
) -> Result<ExistenceCondition> {
    if !(r > 0.0 && r < big_r) {
        return Err(Error::Invalid("inner radius must lie in (0, R)".into()));
    }
    let solve = |radius: f64| -> Result<Option<EigenResult>> {
        if vanishes_inside(weight, radius) {
            return Ok(None);
        }
        let mut p = RayleighProblem::hardy(dim, RadialDomain::Ball { radius }, alpha);
        p.denominator = weight.clone();
        converged_quotient(&p, study).map(Some)
    };
    let outer = solve(big_r)?
        .ok_or_else(|| Error::Positivity("weight vanishes on the whole domain".into()))?;
    let inner = solve(r)?;
    let tol_of = |e: &EigenResult| {
        (e.convergence_trace[1] - e.convergence_trace[2]).abs() + 1e-6 * e.value.abs()
    };
    match inner {
        None => {
            let holds = outer.value.is_finite() && outer.value > 0.0;
            Ok(ExistenceCondition {
                lambda_domain: outer.value,
                lambda_inner: f64::INFINITY,
                holds,
                inconclusive: false,
            })
        }
        Some(inner) => {
            let gap = inner.value - outer.value;
            let tol = tol_of(&outer) + tol_of(&inner);
            let inconclusive = gap.abs() <= tol;
            Ok(ExistenceCondition {
                lambda_domain: outer.value,
                lambda_inner: inner.value,
                holds: !inconclusive && gap > 0.0 && outer.value > 0.0,
                inconclusive,
            })
        }
    }
}

fn vanishes_inside(w: &Profile, r: f64) -> bool {
    match w {
        Profile::Power { coefficient, .. } => *coefficient == 0.0,
        Profile::Tabulated { radii, values } => {
            radii.iter().zip(values).all(|(x, v)| *x > r || *v == 0.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn extrapolation_is_exact_on_the_model() {
        let l = [10.0, 20.0, 40.0];
        let v = l.map(|x: f64| 0.75 + 3.0 / (x * x) - 2.0 / x.powi(3));
        assert!((extrapolate_truncation(&l, &v) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn formulas() {
        assert_eq!(ball_formula(dim(4), 0.5), 0.75);
        assert_eq!(ball_formula(dim(5), 2.0), 2.25);
        assert_eq!(exterior_formula(dim(4), 1.5), 0.75);
        assert_eq!(exterior_formula(dim(4), 0.5), 1.0);
    }

    #[test]
    fn subcritical_ball_value() {
        let p = RayleighProblem::hardy(dim(4), RadialDomain::Ball { radius: 1.0 }, 0.5);
        let r = converged_quotient(&p, &TruncationStudy::default()).unwrap();
        assert!((r.value - 0.75).abs() < 1e-3, "{r:?}");
        assert!(r
            .convergence_trace
            .windows(2)
            .all(|w| w[1] <= w[0] * (1.0 + 1e-10)));
    }

    #[test]
    fn supercritical_ball_value() {
        let p = RayleighProblem::hardy(dim(5), RadialDomain::Ball { radius: 1.0 }, 2.0);
        let r = converged_quotient(&p, &TruncationStudy::default()).unwrap();
        assert!(
            (r.value - 2.25).abs() < 1e-3,
            "{} {:?}",
            r.value,
            r.convergence_trace
        );
    }

    #[test]
    fn exterior_value() {
        let p = RayleighProblem::hardy(
            dim(4),
            RadialDomain::Exterior {
                radius: 1.0,
                truncation: 10.0,
            },
            1.5,
        );
        let r = converged_quotient(&p, &TruncationStudy::default()).unwrap();
        assert!(
            (r.value - 0.75).abs() < 1e-3,
            "{} {:?}",
            r.value,
            r.convergence_trace
        );
    }
}
