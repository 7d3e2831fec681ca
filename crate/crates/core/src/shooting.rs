//! Outward shooting for the radial Robin problem on the exterior of the unit
//! ball and bisection for the critical coupling.

use crate::error::{Error, Result};
use crate::funcs::{Dimension, NumericProfile, Profile, RadialOde, Side};
use crate::ode::{self, Flow, OdeOptions};
use crate::rayleigh::exterior_formula;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShootingOptions {
    pub r_inf: f64,
    /// Spacing in `s = ln r` of the tabulated profile.
    pub output_step: f64,
    pub rtol: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            r_inf: 1e4,
            output_step: 0.02,
            rtol: 1e-10,
        }
    }
}

/// Profile `ψ` on `[1, R∞]` with `ψ(1) = 1`, `ψ'(1) = -robin`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShootingResult {
    pub epsilon: f64,
    pub profile: NumericProfile,
    /// Extrapolated `lim_{r→∞} ψ(r)`.
    pub limit_estimate: f64,
    pub monotone_decreasing: bool,
    pub positive: bool,
    /// First radius where `ψ` changes sign, if any.
    pub zero_crossing: Option<f64>,
}

impl ShootingResult {
    /// A zero crossing or a nonpositive limit marks a supercritical coupling.
    pub fn supercritical(&self) -> bool {
        !self.positive || self.limit_estimate <= 0.0
    }

    pub fn radii(&self) -> Vec<f64> {
        self.profile.s.iter().map(|s| s.exp()).collect()
    }
}

fn limit_at(dim: Dimension, s: f64, y: &[f64; 2]) -> f64 {
    let n = dim.as_f64();
    y[0] + y[1] * ((2.0 - n) * s).exp() / (n - 2.0)
}

/// Aitken extrapolation of three samples at `R∞/4, R∞/2, R∞`.
fn aitken(l0: f64, l1: f64, l2: f64) -> f64 {
    let d1 = l1 - l0;
    let d2 = l2 - l1;
    if d1 == 0.0 || d2 == 0.0 {
        return l2;
    }
    let ratio = d2 / d1;
    if !(ratio > 0.0 && ratio < 0.95) {
        return l2;
    }
    l2 + d2 * ratio / (1.0 - ratio)
}

fn table(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = (((hi - lo).abs() / step).ceil() as usize).max(4);
    let mut v: Vec<f64> = (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect();
    v[n] = hi;
    v
}

/// Integrates `ψ'' + ((N-1)/r)ψ' + ε f ψ = 0` outward from `r = 1`.
pub fn shoot(
    dim: Dimension,
    epsilon: f64,
    tail: &Profile,
    robin: f64,
    opts: &ShootingOptions,
) -> Result<ShootingResult> {
    if !(epsilon >= 0.0) {
        return Err(Error::Domain(format!(
            "ε must be nonnegative, got {epsilon}"
        )));
    }
    if !(opts.r_inf > 8.0) {
        return Err(Error::Invalid("R∞ must exceed 8".into()));
    }
    if tail.subcritical_bound(Side::Outside).is_none() {
        return Err(Error::Domain("tail is not subcritical".into()));
    }
    let ode_sys = RadialOde {
        dim,
        epsilon,
        weight: tail.clone(),
    };
    let s_end = opts.r_inf.ln();
    let targets = table(0.0, s_end, opts.output_step);
    let mut crossing = None;
    let ode_opts = OdeOptions {
        rtol: opts.rtol,
        atol: 1e-14,
        ..OdeOptions::default()
    };
    let states = ode::integrate(
        |s, y| ode_sys.rhs(s, y),
        0.0,
        [1.0, -robin],
        &targets[1..],
        ode_opts,
        |s, y| {
            if y[0] <= 0.0 {
                crossing = Some(s.exp());
                Flow::Stop
            } else {
                Flow::Continue
            }
        },
    )?;
    let mut s_tab = vec![0.0];
    let mut psi = vec![1.0];
    let mut flux = vec![-robin];
    for (s, y) in targets[1..].iter().zip(&states) {
        s_tab.push(*s);
        psi.push(y[0]);
        flux.push(y[1]);
    }
    let positive = crossing.is_none() && psi.iter().all(|v| *v > 0.0);
    let monotone_decreasing = psi.windows(2).all(|w| w[1] < w[0]);
    let last = s_tab.len() - 1;
    let limit_estimate = if positive {
        let at = |target: f64| {
            let j = s_tab.partition_point(|x| *x < target).min(last);
            limit_at(dim, s_tab[j], &[psi[j], flux[j]])
        };
        let ln2 = std::f64::consts::LN_2;
        aitken(at(s_end - 2.0 * ln2), at(s_end - ln2), at(s_end))
    } else {
        limit_at(dim, s_tab[last], &[psi[last], flux[last]]).min(0.0)
    };
    Ok(ShootingResult {
        epsilon,
        profile: NumericProfile {
            ode: ode_sys,
            s: s_tab,
            psi,
            flux,
        },
        limit_estimate,
        monotone_decreasing,
        positive,
        zero_crossing: crossing,
    })
}

/// Integrates the same equation inward from `r = 1` down to `r_min`, for
/// ground states that are numeric inside the unit ball.
pub fn shoot_inward(
    dim: Dimension,
    epsilon: f64,
    core: &Profile,
    robin: f64,
    r_min: f64,
    step: f64,
) -> Result<NumericProfile> {
    if !(r_min > 0.0 && r_min < 1.0) {
        return Err(Error::Invalid("r_min must lie in (0, 1)".into()));
    }
    let ode_sys = RadialOde {
        dim,
        epsilon,
        weight: core.clone(),
    };
    let mut targets = table(0.0, r_min.ln(), step);
    let states = ode_sys.integrate(0.0, [1.0, -robin], &targets[1..], OdeOptions::default())?;
    let mut psi = vec![1.0];
    let mut flux = vec![-robin];
    for y in &states {
        psi.push(y[0]);
        flux.push(y[1]);
    }
    targets.reverse();
    psi.reverse();
    flux.reverse();
    Ok(NumericProfile {
        ode: ode_sys,
        s: targets,
        psi,
        flux,
    })
}

/// Smallest coupling at which the outward solution stops having a positive
/// limit, located by bisection to relative bracket width `tol`.
pub fn epsilon0_by_bisection(
    dim: Dimension,
    tail: &Profile,
    robin: f64,
    tol: f64,
    opts: &ShootingOptions,
) -> Result<f64> {
    let nm2 = dim.as_f64() - 2.0;
    if !(robin < nm2) {
        return Err(Error::BracketNotFound(format!(
            "robin coefficient {robin} >= N-2: no positive limit even at ε = 0"
        )));
    }
    let bound = tail
        .subcritical_bound(Side::Outside)
        .ok_or_else(|| Error::Domain("tail is not subcritical".into()))?;
    let lower = exterior_formula(dim, robin.max(nm2 / 2.0)) / bound.k;
    let mut lo = 0.0;
    let mut hi = lower.max(1e-3);
    let mut found = false;
    for _ in 0..60 {
        if shoot(dim, hi, tail, robin, opts)?.supercritical() {
            found = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if !found {
        return Err(Error::BracketNotFound(format!(
            "no sign change of the limit up to ε = {hi}; the tail is too weak on [1, {}]",
            opts.r_inf
        )));
    }
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if shoot(dim, mid, tail, robin, opts)?.supercritical() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let est = 0.5 * (lo + hi);
    if est < lower * (1.0 - tol) {
        return Err(Error::BoundViolated(format!(
            "bisection value {est} below the lower bound {lower}"
        )));
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn homogeneous_solution() {
        let r = shoot(
            d(3),
            0.0,
            &Profile::power(1.0, -4.0),
            0.5,
            &ShootingOptions::default(),
        )
        .unwrap();
        assert!((r.limit_estimate - 0.5).abs() < 1e-9);
        for (rad, p) in r.radii().iter().zip(&r.profile.psi).step_by(37) {
            assert!((p - (0.5 + 0.5 / rad)).abs() < 1e-9);
        }
        assert!(r.positive && r.monotone_decreasing);
    }

    #[test]
    fn subcritical_profile() {
        let r = shoot(
            d(3),
            0.1,
            &Profile::power(1.0, -4.0),
            0.5,
            &ShootingOptions::default(),
        )
        .unwrap();
        assert!(r.positive && r.monotone_decreasing && r.limit_estimate > 0.0);
        assert!(r.profile.flux.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn bessel_threshold_for_inverse_quartic_tail() {
        // ψ = A sin(√ε/r) + B cos(√ε/r); the threshold solves tan z = 2z, ε = z².
        let mut z: f64 = 1.1;
        for _ in 0..50 {
            let f = z.tan() - 2.0 * z;
            let df = 1.0 / z.cos().powi(2) - 2.0;
            z -= f / df;
        }
        let e = epsilon0_by_bisection(
            d(3),
            &Profile::power(1.0, -4.0),
            0.5,
            1e-8,
            &ShootingOptions::default(),
        )
        .unwrap();
        assert!((e / (z * z) - 1.0).abs() < 1e-4, "{e} vs {}", z * z);
    }

    #[test]
    fn zero_tail_has_no_threshold() {
        let r = epsilon0_by_bisection(
            d(3),
            &Profile::power(0.0, -4.0),
            0.5,
            1e-6,
            &ShootingOptions::default(),
        );
        assert!(matches!(r, Err(Error::BracketNotFound(_))));
    }
}
