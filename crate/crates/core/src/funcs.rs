//! Special functions, potentials and ground-state profiles.
//!
//! Radial quantities are evaluated in the logarithmic variable `s = ln r`
//! wherever the grids reach far into the singular region, so that radii such
//! as `1e-80` never underflow.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::ode::{self, Flow, OdeOptions};

/// Space dimension `N ≥ 3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dimension {
    n: usize,
}

impl Dimension {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!(
                "dimension must be at least 3, got {n}"
            )));
        }
        Ok(Dimension { n })
    }

    pub fn get(&self) -> usize {
        self.n
    }

    pub fn as_f64(&self) -> f64 {
        self.n as f64
    }

    /// Volume of the unit ball, `ω_N`.
    pub fn unit_ball_volume(&self) -> f64 {
        let mut w = if self.n.is_multiple_of(2) { 1.0 } else { 2.0 };
        let mut m = if self.n.is_multiple_of(2) { 0 } else { 1 };
        while m < self.n {
            m += 2;
            w *= 2.0 * PI / m as f64;
        }
        w
    }

    /// Area of the unit sphere, `N ω_N`.
    pub fn surface_area(&self) -> f64 {
        self.as_f64() * self.unit_ball_volume()
    }

    /// The critical exponent `a = (N-2)/2`.
    pub fn hardy_exponent(&self) -> f64 {
        (self.as_f64() - 2.0) / 2.0
    }

    /// The critical Hardy constant `a²`.
    pub fn hardy_constant(&self) -> f64 {
        self.hardy_exponent().powi(2)
    }
}

/// `X_1, …, X_k` evaluated at `t = e^{log_t}`, `log_t ≤ 0`.
///
/// Uses `ln X_{i+1} = -ln(1 - ln X_i)` with `ln_1p`, which keeps full
/// relative accuracy of `1 - X_i` near `t = 1`.
pub fn x_chain_log(k: usize, log_t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k);
    let mut ell = log_t.min(0.0);
    for _ in 0..k {
        out.push(1.0 / (1.0 - ell));
        ell = -(-ell).ln_1p();
    }
    out
}

/// Running products `P_i = X_1 ⋯ X_i`, `i = 1..=k`.
pub fn x_products_log(k: usize, log_t: f64) -> Vec<f64> {
    let mut p = 1.0;
    x_chain_log(k, log_t)
        .into_iter()
        .map(|x| {
            p *= x;
            p
        })
        .collect()
}

/// `X_k(t)` for `0 < t ≤ 1`.
pub fn eval_xk(k: usize, t: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("depth k must be at least 1".into()));
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Domain(format!("X_k needs 0 < t <= 1, got {t}")));
    }
    Ok(x_chain_log(k, t.ln())[k - 1])
}

/// `d/dr X_k(r)^a` for `0 < r ≤ 1`.
pub fn eval_xk_derivative(k: usize, a: f64, r: f64) -> Result<f64> {
    IteratedLog::new(k, 1.0)?.derivative_x_power(a, r)
}

/// `d/dr Y_k(r)^a` for `r > 1`, where `Y_k(r) = X_k(1/r)`.
pub fn eval_yk_derivative(k: usize, a: f64, r: f64) -> Result<f64> {
    IteratedLog::new(k, 1.0)?.derivative_y_power(a, r)
}

/// Iterated logarithms `X_k(r/D)` and their reflections `Y_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IteratedLog {
    depth: usize,
    scale: f64,
}

impl IteratedLog {
    pub fn new(depth: usize, scale: f64) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Domain("depth k must be at least 1".into()));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain(format!(
                "scale D must be positive, got {scale}"
            )));
        }
        Ok(IteratedLog { depth, scale })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn t_inside(&self, r: f64) -> Result<f64> {
        let t = r / self.scale;
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::Domain(format!("X_k needs 0 < r/D <= 1, got {t}")));
        }
        Ok(t)
    }

    fn t_outside(&self, r: f64) -> Result<f64> {
        let t = r / self.scale;
        if !(t >= 1.0 && t.is_finite()) {
            return Err(Error::Domain(format!("Y_k needs r/D >= 1, got {t}")));
        }
        Ok(t)
    }

    /// `X_1(r/D), …, X_k(r/D)`.
    pub fn x_chain(&self, r: f64) -> Result<Vec<f64>> {
        Ok(x_chain_log(self.depth, self.t_inside(r)?.ln()))
    }

    pub fn x(&self, r: f64) -> Result<f64> {
        Ok(self.x_chain(r)?[self.depth - 1])
    }

    /// `X̃_k`: equal to `X_k` inside the unit scale and to 1 outside.
    pub fn x_tilde(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {r}")));
        }
        if r >= self.scale {
            Ok(1.0)
        } else {
            self.x(r)
        }
    }

    pub fn y(&self, r: f64) -> Result<f64> {
        let t = self.t_outside(r)?;
        Ok(x_chain_log(self.depth, -t.ln())[self.depth - 1])
    }

    /// `Ỹ_k(r) = X̃_k(D²/r)`: equal to 1 for `r ≤ D`.
    pub fn y_tilde(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {r}")));
        }
        if r <= self.scale {
            Ok(1.0)
        } else {
            self.y(r)
        }
    }

    /// `d/dr X_k^a = (a/r) X_1 ⋯ X_{k-1} X_k^{a+1}`.
    pub fn derivative_x_power(&self, a: f64, r: f64) -> Result<f64> {
        let t = self.t_inside(r)?;
        Ok(chain_derivative(self.depth, a, r, t.ln()))
    }

    /// `d/dr Y_k^a = -(a/r) Y_1 ⋯ Y_{k-1} Y_k^{a+1}`, valid for `r > D`.
    pub fn derivative_y_power(&self, a: f64, r: f64) -> Result<f64> {
        let t = self.t_outside(r)?;
        if t == 1.0 {
            return Err(Error::Domain("the Y_k rule holds only for r > D".into()));
        }
        Ok(-chain_derivative(self.depth, a, r, -t.ln()))
    }
}

fn chain_derivative(k: usize, a: f64, r: f64, log_t: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let xs = x_chain_log(k, log_t);
    let prod: f64 = xs[..k - 1].iter().product();
    a / r * prod * xs[k - 1].powf(a + 1.0)
}

/// Smallest root `α` of `α(N-2-α) = λ`.
pub fn exponent_from_lambda(dim: Dimension, lambda: f64) -> Result<f64> {
    let a = dim.hardy_exponent();
    let disc = a * a - lambda;
    if disc < 0.0 || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "λ = {lambda} exceeds the critical value {}",
            a * a
        )));
    }
    Ok(a - disc.sqrt())
}

/// Largest root `β` of `β(1-β) = μ`, for `0 < μ ≤ 1/4`.
pub fn beta_from_mu(mu: f64) -> Result<f64> {
    if !(mu > 0.0 && mu <= 0.25) {
        return Err(Error::Domain(format!("μ must lie in (0, 1/4], got {mu}")));
    }
    Ok(0.5 + 0.5 * (1.0 - 4.0 * mu).max(0.0).sqrt())
}

/// Which side of the unit sphere a subcritical bound refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `r ≥ 1`: tails, `f ≤ K r^{-2-σ}`.
    Outside,
    /// `r ≤ 1`: cores, `g ≤ K r^{-2+σ}`.
    Inside,
}

/// Subcritical bound parameters `(σ, K)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubcriticalBound {
    pub sigma: f64,
    pub k: f64,
}

/// A nonnegative radial weight, used for tails `f`, cores `g` and denominators.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    /// `coefficient · r^exponent`.
    Power { coefficient: f64, exponent: f64 },
    /// Piecewise linear in `ln r` between samples, zero outside the table.
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

impl Profile {
    pub fn power(coefficient: f64, exponent: f64) -> Self {
        Profile::Power {
            coefficient,
            exponent,
        }
    }

    /// The Hardy weight `r^{-2}`.
    pub fn hardy() -> Self {
        Profile::power(1.0, -2.0)
    }

    /// The volume weight `1`.
    pub fn volume() -> Self {
        Profile::power(1.0, 0.0)
    }

    pub fn tabulated(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() || radii.len() < 2 {
            return Err(Error::Invalid(
                "tabulated profile needs matching radii/values of length >= 2".into(),
            ));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) || radii[0] <= 0.0 {
            return Err(Error::Invalid(
                "tabulated radii must be positive and increasing".into(),
            ));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Invalid(
                "tabulated values must be finite and nonnegative".into(),
            ));
        }
        Ok(Profile::Tabulated { radii, values })
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            Profile::Power {
                coefficient,
                exponent,
            } => coefficient * r.powf(*exponent),
            Profile::Tabulated { radii, values } => {
                if r < radii[0] || r > radii[radii.len() - 1] {
                    return 0.0;
                }
                let j = radii.partition_point(|x| *x <= r).clamp(1, radii.len() - 1);
                let (s0, s1) = (radii[j - 1].ln(), radii[j].ln());
                let w = if s1 > s0 {
                    (r.ln() - s0) / (s1 - s0)
                } else {
                    0.0
                };
                values[j - 1] * (1.0 - w) + values[j] * w
            }
        }
    }

    /// `r^2 · value(r)` at `r = e^s`.
    pub fn r2_value(&self, s: f64) -> f64 {
        match self {
            Profile::Power {
                coefficient,
                exponent,
            } => {
                if *coefficient == 0.0 {
                    0.0
                } else {
                    coefficient * ((exponent + 2.0) * s).exp()
                }
            }
            Profile::Tabulated { .. } => self.value(s.exp()) * (2.0 * s).exp(),
        }
    }

    /// `ln value(e^s)`; `-∞` where the profile vanishes.
    pub fn log_value(&self, s: f64) -> f64 {
        match self {
            Profile::Power {
                coefficient,
                exponent,
            } => coefficient.ln() + exponent * s,
            Profile::Tabulated { .. } => self.value(s.exp()).ln(),
        }
    }

    /// A subcritical bound valid on the given side, if one exists.
    pub fn subcritical_bound(&self, side: Side) -> Option<SubcriticalBound> {
        match self {
            Profile::Power {
                coefficient,
                exponent,
            } => {
                let sigma = match side {
                    Side::Outside => -2.0 - exponent,
                    Side::Inside => exponent + 2.0,
                };
                if *coefficient < 0.0 {
                    None
                } else if sigma > 0.0 {
                    Some(SubcriticalBound {
                        sigma,
                        k: coefficient.max(f64::MIN_POSITIVE),
                    })
                } else if *coefficient == 0.0 {
                    Some(SubcriticalBound {
                        sigma: 1.0,
                        k: f64::MIN_POSITIVE,
                    })
                } else {
                    None
                }
            }
            Profile::Tabulated { radii, values } => {
                let sigma = 1.0;
                let mut k: f64 = 0.0;
                for (r, v) in radii.iter().zip(values) {
                    let inside = *r <= 1.0;
                    match side {
                        Side::Outside if *r >= 1.0 => k = k.max(v * r.powf(2.0 + sigma)),
                        Side::Inside if inside => k = k.max(v * r.powf(2.0 - sigma)),
                        _ => {}
                    }
                }
                Some(SubcriticalBound {
                    sigma,
                    k: k.max(f64::MIN_POSITIVE),
                })
            }
        }
    }

    /// Checks `value ≤ K r^{∓2∓σ}` on the given side at the given radii.
    pub fn satisfies(&self, bound: SubcriticalBound, side: Side, radii: &[f64]) -> bool {
        radii.iter().all(|&r| {
            let v = self.value(r);
            match side {
                Side::Outside => {
                    r < 1.0 || v <= bound.k * r.powf(-2.0 - bound.sigma) * (1.0 + 1e-12)
                }
                Side::Inside => {
                    r > 1.0 || v <= bound.k * r.powf(-2.0 + bound.sigma) * (1.0 + 1e-12)
                }
            }
        })
    }

    fn is_nonnegative(&self) -> bool {
        match self {
            Profile::Power {
                coefficient,
                exponent,
            } => *coefficient >= 0.0 && exponent.is_finite(),
            Profile::Tabulated { .. } => true,
        }
    }
}

/// The radial potentials studied here.
///
/// Iterated logarithms in `LogRefined` use `D = 1`; `LogBounded` carries its
/// own scale `D`.
#[derive(Clone, Debug, PartialEq)]
pub enum RadialPotential {
    /// `λ / r²`.
    InverseSquare { lambda: f64 },
    /// `a²/r²` for `r < 1`, `ε f` for `r > 1`.
    CriticalInner { epsilon: f64, tail: Profile },
    /// `ε g` for `r < 1`, `a²/r²` for `r > 1`.
    CriticalOuter { epsilon: f64, core: Profile },
    /// `a²/r² + (1/4r²) Σ_{i≤k} X_1²⋯X_i²` for `r < 1`, `ε f` for `r > 1`.
    IteratedLogInner {
        k: usize,
        epsilon: f64,
        tail: Profile,
    },
    /// `a²/r² + (1/4r²) Σ_{i<k} X_1²⋯X_i² + (μ/r²) X_1²⋯X_k²` with `X_i = X_i(r/D)`.
    IteratedLogBounded { k: usize, mu: f64, scale: f64 },
    /// A tabulated potential.
    Tabulated(Profile),
}

impl RadialPotential {
    /// `r² V(r)` at `r = e^s`.
    pub fn r2_value(&self, dim: Dimension, s: f64) -> f64 {
        let a2 = dim.hardy_constant();
        match self {
            RadialPotential::InverseSquare { lambda } => *lambda,
            RadialPotential::CriticalInner { epsilon, tail } => {
                if s < 0.0 {
                    a2
                } else {
                    epsilon * tail.r2_value(s)
                }
            }
            RadialPotential::CriticalOuter { epsilon, core } => {
                if s < 0.0 {
                    epsilon * core.r2_value(s)
                } else {
                    a2
                }
            }
            RadialPotential::IteratedLogInner { k, epsilon, tail } => {
                if s < 0.0 {
                    a2 + 0.25 * x_products_log(*k, s).iter().map(|p| p * p).sum::<f64>()
                } else {
                    epsilon * tail.r2_value(s)
                }
            }
            RadialPotential::IteratedLogBounded { k, mu, scale } => {
                let p = x_products_log(*k, s - scale.ln());
                let head: f64 = p[..k - 1].iter().map(|q| q * q).sum();
                a2 + 0.25 * head + mu * p[k - 1] * p[k - 1]
            }
            RadialPotential::Tabulated(p) => p.r2_value(s),
        }
    }

    pub fn value(&self, dim: Dimension, r: f64) -> f64 {
        self.r2_value(dim, r.ln()) / (r * r)
    }

    /// Checks nonnegativity, parameter ranges and the subcritical conditions.
    pub fn validate(&self, dim: Dimension) -> Result<()> {
        let a2 = dim.hardy_constant();
        match self {
            RadialPotential::InverseSquare { lambda } => {
                if !lambda.is_finite() || *lambda > a2 {
                    return Err(Error::Domain(format!(
                        "λ = {lambda} exceeds the critical value {a2}"
                    )));
                }
            }
            RadialPotential::CriticalInner { epsilon, tail }
            | RadialPotential::IteratedLogInner { epsilon, tail, .. } => {
                if !(*epsilon >= 0.0) || !tail.is_nonnegative() {
                    return Err(Error::Domain("ε and the tail must be nonnegative".into()));
                }
                if tail.subcritical_bound(Side::Outside).is_none() {
                    return Err(Error::Domain("tail is not subcritical at infinity".into()));
                }
                if let RadialPotential::IteratedLogInner { k, .. } = self {
                    if *k == 0 {
                        return Err(Error::Domain("k must be at least 1".into()));
                    }
                }
            }
            RadialPotential::CriticalOuter { epsilon, core } => {
                if !(*epsilon >= 0.0) || !core.is_nonnegative() {
                    return Err(Error::Domain("ε and the core must be nonnegative".into()));
                }
                if core.subcritical_bound(Side::Inside).is_none() {
                    return Err(Error::Domain(
                        "core is not subcritical at the origin".into(),
                    ));
                }
            }
            RadialPotential::IteratedLogBounded { k, mu, scale } => {
                if *k == 0 || !(*mu > 0.0 && *mu <= 0.25) || !(*scale > 0.0) {
                    return Err(Error::Domain("need k >= 1, 0 < μ <= 1/4, D > 0".into()));
                }
            }
            RadialPotential::Tabulated(p) => {
                if !p.is_nonnegative() {
                    return Err(Error::Domain(
                        "tabulated potential must be nonnegative".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Closed-form law `φ = r^exponent · Π X_i(r/D)^{log_powers[i]}`.
///
/// Beyond `r = D` the iterated logarithms are frozen at 1.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerLaw {
    pub exponent: f64,
    pub log_powers: Vec<f64>,
    pub scale: f64,
}

impl InnerLaw {
    pub fn power(exponent: f64) -> Self {
        InnerLaw {
            exponent,
            log_powers: Vec::new(),
            scale: 1.0,
        }
    }

    fn products(&self, s: f64) -> (Vec<f64>, Vec<f64>) {
        let k = self.log_powers.len();
        if k == 0 {
            return (Vec::new(), Vec::new());
        }
        let lt = s - self.scale.ln();
        if lt >= 0.0 {
            return (vec![1.0; k], vec![0.0; k]);
        }
        let xs = x_chain_log(k, lt);
        let mut p = 1.0;
        let ps = xs
            .iter()
            .map(|x| {
                p *= x;
                p
            })
            .collect();
        (xs, ps)
    }

    /// `g(s) = ln φ(e^s)`.
    pub fn log_value(&self, s: f64) -> f64 {
        let (xs, _) = self.products(s);
        self.exponent * s
            + xs.iter()
                .zip(&self.log_powers)
                .map(|(x, p)| p * x.ln())
                .sum::<f64>()
    }

    /// `g'(s) = r φ'/φ`.
    pub fn log_derivative(&self, s: f64) -> f64 {
        let (_, ps) = self.products(s);
        self.exponent
            + ps.iter()
                .zip(&self.log_powers)
                .map(|(q, p)| p * q)
                .sum::<f64>()
    }

    /// `g''(s)`.
    pub fn log_second_derivative(&self, s: f64) -> f64 {
        let (_, ps) = self.products(s);
        let mut acc = 0.0;
        let mut partial = 0.0;
        for (q, p) in ps.iter().zip(&self.log_powers) {
            partial += q;
            acc += p * q * partial;
        }
        acc
    }

    /// `r² V_φ` for the potential with `Δφ + V_φ φ = 0`.
    pub fn r2_potential(&self, dim: Dimension, s: f64) -> f64 {
        let g1 = self.log_derivative(s);
        -(self.log_second_derivative(s) + g1 * g1 + (dim.as_f64() - 2.0) * g1)
    }
}

/// Radial equation `(r^{N-1} ψ')' + r^{N-1} ε w ψ = 0` written in `s = ln r`
/// for the state `(ψ, F = r^{N-1} ψ')`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialOde {
    pub dim: Dimension,
    pub epsilon: f64,
    pub weight: Profile,
}

impl RadialOde {
    pub fn rhs(&self, s: f64, y: &[f64; 2]) -> [f64; 2] {
        let n = self.dim.as_f64();
        let dpsi = y[1] * ((2.0 - n) * s).exp();
        let r2w = self.weight.r2_value(s);
        let dflux = if r2w == 0.0 {
            0.0
        } else {
            -self.epsilon * r2w * ((n - 2.0) * s).exp() * y[0]
        };
        [dpsi, dflux]
    }

    /// Integrates from state `y0` at `s0` to each of the monotone `targets`.
    pub fn integrate(
        &self,
        s0: f64,
        y0: [f64; 2],
        targets: &[f64],
        opts: OdeOptions,
    ) -> Result<Vec<[f64; 2]>> {
        ode::integrate(
            |s, y| self.rhs(s, y),
            s0,
            y0,
            targets,
            opts,
            |_, _| Flow::Continue,
        )
    }
}

/// Numerically integrated part of a ground state, tabulated at nodes `s`
/// with values `ψ` and fluxes `F = r^{N-1} ψ'`.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericProfile {
    pub ode: RadialOde,
    pub s: Vec<f64>,
    pub psi: Vec<f64>,
    pub flux: Vec<f64>,
}

impl NumericProfile {
    fn outer_s(&self) -> (f64, f64) {
        (self.s[0], self.s[self.s.len() - 1])
    }

    /// `(ψ, F)` at `s`, by short re-integration from the nearest node.
    pub fn state(&self, s: f64) -> Result<[f64; 2]> {
        let (lo, hi) = self.outer_s();
        let n = self.ode.dim.as_f64();
        if s > hi {
            // harmonic continuation beyond the table
            let f = self.flux[self.flux.len() - 1];
            let psi = self.psi[self.psi.len() - 1];
            let c = f / (2.0 - n);
            let psi_s = psi + c * (((2.0 - n) * s).exp() - ((2.0 - n) * hi).exp());
            return Ok([psi_s, f]);
        }
        if s < lo {
            return Ok([self.psi[0], self.flux[0]]);
        }
        let j = self.s.partition_point(|x| *x <= s).clamp(1, self.s.len());
        let i = j - 1;
        if s == self.s[i] {
            return Ok([self.psi[i], self.flux[i]]);
        }
        let start = if i + 1 < self.s.len() && (self.s[i + 1] - s) < (s - self.s[i]) {
            i + 1
        } else {
            i
        };
        let y = self.ode.integrate(
            self.s[start],
            [self.psi[start], self.flux[start]],
            &[s],
            OdeOptions::default(),
        )?;
        Ok(y[0])
    }
}

/// A positive radial solution `φ` of `Δφ + Vφ = 0`, closed form on one side
/// of `match_radius` and (optionally) numeric on the other.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundState {
    pub dim: Dimension,
    pub inner_law: InnerLaw,
    pub outer_profile: Option<NumericProfile>,
    pub match_radius: f64,
    /// Which side of `match_radius` the numeric part covers.
    pub numeric_side: Side,
}

impl GroundState {
    /// A pure closed-form ground state.
    pub fn closed_form(dim: Dimension, law: InnerLaw) -> Self {
        GroundState {
            dim,
            inner_law: law,
            outer_profile: None,
            match_radius: f64::INFINITY,
            numeric_side: Side::Outside,
        }
    }

    /// The critical inverse-square profile `r^{-(N-2)/2}`.
    pub fn critical(dim: Dimension) -> Self {
        Self::closed_form(dim, InnerLaw::power(-dim.hardy_exponent()))
    }

    fn in_numeric(&self, s: f64) -> Option<&NumericProfile> {
        let p = self.outer_profile.as_ref()?;
        let sm = self.match_radius.ln();
        match self.numeric_side {
            Side::Outside if s > sm => Some(p),
            Side::Inside if s < sm => Some(p),
            _ => None,
        }
    }

    fn law_at_match(&self) -> f64 {
        self.inner_law.log_value(self.match_radius.ln())
    }

    /// `g(s) = ln φ(e^s)`.
    pub fn log_value(&self, s: f64) -> Result<f64> {
        match self.in_numeric(s) {
            Some(p) => {
                let y = p.state(s)?;
                if !(y[0] > 0.0) {
                    return Err(Error::Positivity(format!(
                        "ground state vanishes at r = {}",
                        s.exp()
                    )));
                }
                Ok(y[0].ln() + self.law_at_match())
            }
            None => Ok(self.inner_law.log_value(s)),
        }
    }

    /// `g'(s) = r φ'(r)/φ(r)`.
    pub fn log_derivative(&self, s: f64) -> Result<f64> {
        match self.in_numeric(s) {
            Some(p) => {
                let y = p.state(s)?;
                Ok(y[1] * ((2.0 - self.dim.as_f64()) * s).exp() / y[0])
            }
            None => Ok(self.inner_law.log_derivative(s)),
        }
    }

    /// `r² V_φ(r)` where `Δφ + V_φ φ = 0`.
    pub fn r2_potential(&self, s: f64) -> f64 {
        match self.in_numeric(s) {
            Some(p) => p.ode.epsilon * p.ode.weight.r2_value(s),
            None => self.inner_law.r2_potential(self.dim, s),
        }
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        Ok(self.log_value(r.ln())?.exp())
    }

    pub fn derivative(&self, r: f64) -> Result<f64> {
        let s = r.ln();
        Ok(self.log_value(s)?.exp() * self.log_derivative(s)? / r)
    }

    /// Relative weak-form residual of `(r^{N-1}φ')' + r^{N-1}Vφ = 0` against
    /// the hat functions of the log grid `s_nodes`, maximized over interior nodes.
    pub fn weak_residual(&self, pot: &RadialPotential, s_nodes: &[f64]) -> Result<f64> {
        let gl = crate::grids::gauss_rule();
        let nm2 = self.dim.as_f64() - 2.0;
        let mut worst: f64 = 0.0;
        for i in 1..s_nodes.len().saturating_sub(1) {
            let ref_log = nm2 * s_nodes[i] + self.log_value(s_nodes[i])?;
            let mut res = 0.0;
            let mut scale = 0.0;
            for (a, b, up) in [
                (s_nodes[i - 1], s_nodes[i], true),
                (s_nodes[i], s_nodes[i + 1], false),
            ] {
                let h = b - a;
                for &(x, w) in gl.iter() {
                    let s = a + 0.5 * (x + 1.0) * h;
                    let wt = 0.5 * h * w;
                    let hat = if up { (s - a) / h } else { (b - s) / h };
                    let dhat = if up { 1.0 / h } else { -1.0 / h };
                    let amp = (nm2 * s + self.log_value(s)? - ref_log).exp();
                    let g1 = self.log_derivative(s)?;
                    let t1 = -amp * g1 * dhat;
                    let t2 = amp * pot.r2_value(self.dim, s) * hat;
                    res += wt * (t1 + t2);
                    scale += wt * (t1.abs() + t2.abs());
                }
            }
            if scale > 0.0 {
                worst = worst.max(res.abs() / scale);
            }
        }
        Ok(worst)
    }

    /// `lim_{r→∞} φ(r)` when the numeric part extends to infinity.
    pub fn limit_at_infinity(&self) -> Option<f64> {
        let p = self.outer_profile.as_ref()?;
        if self.numeric_side != Side::Outside {
            return None;
        }
        let n = self.dim.as_f64();
        let last = p.s.len() - 1;
        let l = p.psi[last] + p.flux[last] * ((2.0 - n) * p.s[last]).exp() / (n - 2.0);
        Some(l * self.law_at_match().exp())
    }
}

const MATCH_TOL: f64 = 1e-8;

/// Assembles the ground state of `pot` from its closed-form law and, where
/// required, the numeric profile produced by the shooting solver.
pub fn build_ground_state(
    dim: Dimension,
    pot: &RadialPotential,
    numeric: Option<NumericProfile>,
) -> Result<GroundState> {
    pot.validate(dim)?;
    let a = dim.hardy_exponent();
    let glue = |law: InnerLaw, side: Side, p: Option<NumericProfile>| -> Result<GroundState> {
        let p = p.ok_or_else(|| {
            Error::Invalid("this potential needs a numeric profile from the shooting solver".into())
        })?;
        let idx = match side {
            Side::Outside => 0,
            Side::Inside => p.s.len() - 1,
        };
        if p.s[idx].abs() > 1e-12 {
            return Err(Error::Mismatch(format!(
                "numeric profile starts at r = {}, expected 1",
                p.s[idx].exp()
            )));
        }
        let n = dim.as_f64();
        let value = p.psi[idx];
        let logder = p.flux[idx] / value;
        let _ = n;
        let law_logder = law.log_derivative(0.0);
        if (value - 1.0).abs() > MATCH_TOL
            || (logder - law_logder).abs() > MATCH_TOL * (1.0 + law_logder.abs())
        {
            return Err(Error::Mismatch(format!(
                "value {value} / log-derivative {logder} at r = 1 do not match closed form 1 / {law_logder}"
            )));
        }
        if p.psi.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Positivity("numeric profile is not positive".into()));
        }
        Ok(GroundState {
            dim,
            inner_law: law,
            outer_profile: Some(p),
            match_radius: 1.0,
            numeric_side: side,
        })
    };
    match pot {
        RadialPotential::InverseSquare { lambda } => {
            let alpha = exponent_from_lambda(dim, *lambda)?;
            Ok(GroundState::closed_form(dim, InnerLaw::power(-alpha)))
        }
        RadialPotential::IteratedLogBounded { k, mu, scale } => {
            let beta = beta_from_mu(*mu)?;
            let mut powers = vec![-0.5; k - 1];
            powers.push(-beta);
            Ok(GroundState::closed_form(
                dim,
                InnerLaw {
                    exponent: -a,
                    log_powers: powers,
                    scale: *scale,
                },
            ))
        }
        RadialPotential::CriticalInner { .. } => glue(InnerLaw::power(-a), Side::Outside, numeric),
        RadialPotential::IteratedLogInner { k, .. } => glue(
            InnerLaw {
                exponent: -a,
                log_powers: vec![-0.5; *k],
                scale: 1.0,
            },
            Side::Outside,
            numeric,
        ),
        RadialPotential::CriticalOuter { .. } => glue(InnerLaw::power(-a), Side::Inside, numeric),
        RadialPotential::Tabulated(_) => Err(Error::Unsupported(
            "no closed-form ground state for tabulated potentials".into(),
        )),
    }
}

/// Both sides of the Kelvin energy identity for a radial profile on an
/// exterior domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KelvinCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub discrepancy: f64,
}

/// Compares `∫|∇u|²` over `{r > R}` with the energy of the Kelvin transform
/// `v(y) = |y|^{2-N} u(y/|y|²)` on `{|y| < 1/R}` plus the boundary term.
///
/// `radii` must be increasing and start at the boundary radius `R`; `u` is
/// treated as piecewise linear in `ln r` and as vanishing beyond the last node.
pub fn kelvin_energy_check(dim: Dimension, radii: &[f64], u: &[f64]) -> Result<KelvinCheck> {
    if radii.len() != u.len() || radii.len() < 4 {
        return Err(Error::Invalid(
            "kelvin check needs at least 4 matching samples".into(),
        ));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) || radii[0] <= 0.0 {
        return Err(Error::Invalid(
            "radii must be positive and increasing".into(),
        ));
    }
    let nm2 = dim.as_f64() - 2.0;
    let s: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let last = s.len() - 1;
    if u[last] != 0.0 {
        let j = s.partition_point(|x| *x < s[last] - 0.5 * (s[last] - s[0]));
        let j = j.min(last - 1);
        if u[j] == 0.0 || u[last] / u[j] <= 0.0 {
            return Err(Error::Divergent(
                "profile changes sign or vanishes before the far end".into(),
            ));
        }
        let p = -(u[last].abs().ln() - u[j].abs().ln()) / (s[last] - s[j]);
        if p <= 0.5 * nm2 {
            return Err(Error::Divergent(format!(
                "decay exponent {p} does not exceed (N-2)/2"
            )));
        }
    }
    let area = dim.surface_area();
    let weight_integral = |c: f64, a: f64, b: f64| -> f64 {
        if c.abs() < 1e-300 {
            b - a
        } else {
            ((c * b).exp() - (c * a).exp()) / c
        }
    };
    let v: Vec<f64> = s
        .iter()
        .zip(u)
        .map(|(si, ui)| (nm2 * si).exp() * ui)
        .collect();
    let mut lhs = 0.0;
    let mut grad_v = 0.0;
    for e in 0..last {
        let h = s[e + 1] - s[e];
        lhs += ((u[e + 1] - u[e]) / h).powi(2) * weight_integral(nm2, s[e], s[e + 1]);
        grad_v += ((v[e + 1] - v[e]) / h).powi(2) * weight_integral(-nm2, s[e], s[e + 1]);
    }
    lhs *= area;
    let boundary = nm2 * v[0] * v[0] * (-nm2 * s[0]).exp();
    let rhs = area * (grad_v + boundary);
    let scale = lhs.abs().max(rhs.abs());
    let discrepancy = if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    };
    Ok(KelvinCheck {
        lhs,
        rhs,
        discrepancy,
    })
}
