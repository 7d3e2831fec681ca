//! On-diagonal heat kernels of `-Δ - V` by spectral expansion in each
//! harmonic sector, and the scaling bounds they are tested against.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::funcs::{Dimension, GroundState, Profile, RadialPotential};
use crate::grids::{assemble, gauss_rule, Boundary, FormSpec, RadialGrid, WeightedOperator};
use crate::mazya::RandomBump;
use crate::sectors::{angular_eigenvalue, multiplicity};

/// Modes with `e^{-λ t_min}` below this are dropped.
pub const MODE_CUTOFF: f64 = 1e-12;

/// A grid that is uniform in `r` (spacing `dr`) where `r·h_max > dr` up to
/// `fine_until`, logarithmic (step `h_max`) closer to the origin, and
/// geometrically coarsened (ratio `growth`) beyond `fine_until`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradedGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub dr: f64,
    pub fine_until: f64,
    pub h_max: f64,
    pub growth: f64,
}

impl GradedGrid {
    pub fn build(&self) -> Result<RadialGrid> {
        let ok = self.r_min > 0.0
            && self.r_max > self.r_min
            && self.dr > 0.0
            && self.h_max > 0.0
            && self.growth >= 1.0
            && self.r_max.is_finite();
        if !ok {
            return Err(Error::Invalid(format!("invalid graded grid {self:?}")));
        }
        let (lo, hi) = (self.r_min.ln(), self.r_max.ln());
        let mut s = vec![lo];
        let mut spacing = self.dr;
        let mut cur = lo;
        while cur < hi {
            let r = cur.exp();
            if r > self.fine_until {
                spacing *= self.growth;
            }
            let h = self.h_max.min(spacing / r);
            cur += h;
            s.push(cur);
        }
        // stretch so that the last node lands on r_max
        let scale = (hi - lo) / (cur - lo);
        for x in s.iter_mut() {
            *x = lo + (*x - lo) * scale;
        }
        let last = s.len() - 1;
        s[last] = hi;
        RadialGrid::from_log_nodes(s)
    }
}

/// Heat flow of `-Δ - V` on a radial domain.
///
/// The operator is discretized in `w = u/φ` when a ground state is given,
/// with a natural inner end and the outer boundary condition of the grid.
#[derive(Clone, Debug)]
pub struct HeatProblem<'a> {
    pub dim: Dimension,
    pub potential: Option<&'a RadialPotential>,
    pub weight: Option<&'a GroundState>,
    pub grid: RadialGrid,
}

impl<'a> HeatProblem<'a> {
    pub fn new(
        dim: Dimension,
        potential: Option<&'a RadialPotential>,
        weight: Option<&'a GroundState>,
        grid: RadialGrid,
    ) -> Self {
        let outer = grid.outer;
        HeatProblem {
            dim,
            potential,
            weight,
            grid: grid.with_boundaries(Boundary::Natural, outer),
        }
    }

    /// The same problem on the grid with every element halved.
    pub fn refined(&self) -> Self {
        HeatProblem {
            grid: self.grid.refine(),
            ..self.clone()
        }
    }

    fn operator(&self, m: usize) -> Result<WeightedOperator> {
        let den = Profile::volume();
        let spec = FormSpec {
            dim: self.dim,
            potential: self.potential,
            sector: angular_eigenvalue(self.dim, m),
            weight: self.weight,
            denominator: &den,
        };
        assemble(&self.grid, &spec)
    }

    /// Node indices closest to the requested radii, deduplicated.
    pub fn sample_nodes(&self, radii: &[f64]) -> Vec<usize> {
        let mut idx: Vec<usize> = radii.iter().map(|&r| self.grid.nearest(r)).collect();
        idx.dedup();
        idx
    }

    /// `ln φ` at a node (zero without a ground state).
    fn log_phi(&self, i: usize) -> Result<f64> {
        match self.weight {
            Some(p) => p.log_value(self.grid.log_nodes()[i]),
            None => Ok(0.0),
        }
    }
}

/// `n` times spaced geometrically on `[t_min, t_max]`.
pub fn log_times(t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max >= t_min && n >= 1) {
        return Err(Error::Invalid(
            "need 0 < t_min <= t_max and at least one time".into(),
        ));
    }
    if n == 1 {
        return Ok(vec![t_min]);
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    Ok((0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect())
}

/// Spectral data of one harmonic sector.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorKernel {
    pub m: usize,
    pub c_m: f64,
    pub multiplicity: f64,
    pub eigenvalues: Vec<f64>,
    pub times: Vec<f64>,
    /// Grid nodes where the diagonal is recorded.
    pub sample_nodes: Vec<usize>,
    /// `w_n` at the sample nodes, one row per mode.
    pub sample_modes: Vec<Vec<f64>>,
    /// `Σ_n e^{-λ_n t} w_n(r)²` on `times × sample_nodes`: the diagonal of
    /// the transformed kernel `K_φ` in this sector.
    pub values: Vec<Vec<f64>>,
    /// Full modes on all grid nodes and the lumped masses, when requested.
    pub modes: Option<(Vec<Vec<f64>>, Vec<f64>)>,
}

impl SectorKernel {
    /// Off-diagonal value of the transformed sector kernel at grid nodes
    /// `i`, `j`; needs full modes.
    pub fn off_diagonal(&self, t: f64, i: usize, j: usize) -> Result<f64> {
        let (modes, _) = self
            .modes
            .as_ref()
            .ok_or_else(|| Error::Invalid("sector kernel kept no modes".into()))?;
        Ok(self
            .eigenvalues
            .iter()
            .zip(modes)
            .map(|(l, w)| (-l * t).exp() * w[i] * w[j])
            .sum())
    }
}

/// Spectral solution of one sector: every mode with `e^{-λ t_min} ≥ 10⁻¹²`.
pub fn sector_diagonal(
    p: &HeatProblem,
    m: usize,
    times: &[f64],
    samples: &[usize],
    keep_modes: bool,
) -> Result<SectorKernel> {
    if times.is_empty() || times.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::Invalid("times must be positive".into()));
    }
    let op = p.operator(m)?;
    let t_min = times.iter().cloned().fold(f64::INFINITY, f64::min);
    let threshold = -MODE_CUTOFF.ln() / t_min;
    let mat = op.matrix();
    let lowest = mat.kth_eigenvalue(0)?;
    if lowest < -1e-10 * threshold {
        return Err(Error::Positivity(format!(
            "sector {m}: lowest eigenvalue {lowest} is negative; the form is not positive"
        )));
    }
    let count = mat.count_below(threshold);
    if 2 * count >= mat.len() {
        return Err(Error::UnderResolved(format!(
            "sector {m}: {count} modes below {threshold:.3e} on {} unknowns; refine the grid or raise t_min",
            mat.len()
        )));
    }
    let pairs = mat.eigenpairs_below(threshold);
    let n = op.s.len();
    let to_w = |y: &[f64]| -> Vec<f64> {
        let mut w = vec![0.0; n];
        for (k, &i) in op.active.iter().enumerate() {
            w[i] = y[k] * (-0.5 * op.log_mass[i]).exp();
        }
        w
    };
    let mut eigenvalues = Vec::with_capacity(pairs.len());
    let mut sample_modes = Vec::with_capacity(pairs.len());
    let mut full = Vec::new();
    for pr in &pairs {
        let w = to_w(&pr.vector);
        eigenvalues.push(pr.value.max(0.0));
        sample_modes.push(samples.iter().map(|&i| w[i]).collect::<Vec<_>>());
        if keep_modes {
            full.push(w);
        }
    }
    let values = times
        .iter()
        .map(|&t| {
            (0..samples.len())
                .map(|j| {
                    eigenvalues
                        .iter()
                        .zip(&sample_modes)
                        .map(|(l, w)| (-l * t).exp() * w[j] * w[j])
                        .sum()
                })
                .collect()
        })
        .collect();
    let modes = keep_modes.then(|| (full, op.log_mass.iter().map(|l| l.exp()).collect()));
    Ok(SectorKernel {
        m,
        c_m: angular_eigenvalue(p.dim, m),
        multiplicity: multiplicity(p.dim, m),
        eigenvalues,
        times: times.to_vec(),
        sample_nodes: samples.to_vec(),
        sample_modes,
        values,
        modes,
    })
}

/// How many harmonic sectors to sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SectorCutoff {
    /// Sectors `0..=M`.
    Fixed(usize),
    /// Add sectors until the newest one contributes less than `tol` of the
    /// running sum everywhere, at most `max` sectors.
    Auto { tol: f64, max: usize },
}

/// The diagonal `K(t, r, r)` on a product grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalKernel {
    pub dim: Dimension,
    pub times: Vec<f64>,
    pub radii: Vec<f64>,
    /// `K(t_i, r_j)`.
    pub values: Vec<Vec<f64>>,
    /// `K_φ = K/φ²`.
    pub transformed: Vec<Vec<f64>>,
    pub log_phi: Vec<f64>,
    /// Highest sector included.
    pub sectors: usize,
    /// Largest relative size of the estimated sector tail.
    pub truncation_estimate: f64,
    pub cutoff_insufficient: bool,
    pub mode_count: usize,
    sums: SectorSums,
}

/// Running sums over sectors, kept between calls so that a kernel can be
/// extended to a higher cutoff without recomputing the lower sectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorSums {
    samples: Vec<usize>,
    sum: Vec<Vec<f64>>,
    last: Vec<Vec<f64>>,
    prev: Vec<Vec<f64>>,
    next_sector: usize,
    mode_count: usize,
}

impl SectorSums {
    fn add(&mut self, p: &HeatProblem, times: &[f64], m: usize) -> Result<f64> {
        let sk = sector_diagonal(p, m, times, &self.samples, false)?;
        let area = p.dim.surface_area();
        self.mode_count += sk.eigenvalues.len();
        let mut rel: f64 = 0.0;
        for i in 0..times.len() {
            for j in 0..self.samples.len() {
                let c = sk.multiplicity * sk.values[i][j] / area;
                self.sum[i][j] += c;
                self.prev[i][j] = self.last[i][j];
                self.last[i][j] = c;
                if self.sum[i][j] > 0.0 {
                    rel = rel.max(c / self.sum[i][j]);
                }
            }
        }
        self.next_sector = m + 1;
        Ok(rel)
    }

    /// Geometric tail from the ratio of the last two sector contributions,
    /// relative to the value, maximized over the samples.
    fn tail_estimate(&self) -> f64 {
        let mut estimate: f64 = 0.0;
        for ((s, l), p) in self
            .sum
            .iter()
            .flatten()
            .zip(self.last.iter().flatten())
            .zip(self.prev.iter().flatten())
        {
            let (a, b) = (*p, *l);
            // contributions at roundoff level of the eigenvectors carry no trend
            let tail = if b <= 1e-14 * s {
                0.0
            } else if a > 0.0 && b < a {
                let q = b / a;
                b * q / (1.0 - q)
            } else {
                f64::INFINITY
            };
            if *s > 0.0 {
                estimate = estimate.max(tail / s);
            }
        }
        estimate
    }
}

/// Sums sectors `0..=M` with multiplicities into the diagonal kernel.
pub fn assemble_diagonal(
    p: &HeatProblem,
    times: &[f64],
    radii: &[f64],
    cutoff: SectorCutoff,
) -> Result<DiagonalKernel> {
    if times.is_empty() || radii.is_empty() {
        return Err(Error::Invalid(
            "need at least one time and one radius".into(),
        ));
    }
    let samples = p.sample_nodes(radii);
    let (nt, nr) = (times.len(), samples.len());
    let mut sums = SectorSums {
        samples,
        sum: vec![vec![0.0; nr]; nt],
        last: vec![vec![0.0; nr]; nt],
        prev: vec![vec![0.0; nr]; nt],
        next_sector: 0,
        mode_count: 0,
    };
    let (max_m, tol) = match cutoff {
        SectorCutoff::Fixed(m) => (m, None),
        SectorCutoff::Auto { tol, max } => (max, Some(tol)),
    };
    let mut quiet = 0;
    for m in 0..=max_m {
        let rel = sums.add(p, times, m)?;
        if let Some(tol) = tol {
            quiet = if rel < tol { quiet + 1 } else { 0 };
            if quiet >= 2 {
                break;
            }
        }
    }
    finish(p, times, sums)
}

/// Continues the sector sum of `k` up to sector `m_new` on the same problem.
pub fn extend_sectors(p: &HeatProblem, k: &DiagonalKernel, m_new: usize) -> Result<DiagonalKernel> {
    let mut sums = k.sums.clone();
    if p.sample_nodes(&k.radii) != sums.samples {
        return Err(Error::Mismatch(
            "kernel was computed on a different grid".into(),
        ));
    }
    for m in sums.next_sector..=m_new {
        sums.add(p, &k.times, m)?;
    }
    finish(p, &k.times, sums)
}

fn finish(p: &HeatProblem, times: &[f64], sums: SectorSums) -> Result<DiagonalKernel> {
    if sums.sum.iter().flatten().any(|v| !(*v > 0.0)) {
        return Err(Error::Positivity(
            "diagonal kernel is not positive at every sample".into(),
        ));
    }
    let nodes = p.grid.log_nodes();
    let log_phi = sums
        .samples
        .iter()
        .map(|&i| p.log_phi(i))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<Vec<f64>> = sums
        .sum
        .iter()
        .map(|row| {
            row.iter()
                .zip(&log_phi)
                .map(|(k, g)| k * (2.0 * g).exp())
                .collect()
        })
        .collect();
    let estimate = sums.tail_estimate();
    Ok(DiagonalKernel {
        dim: p.dim,
        times: times.to_vec(),
        radii: sums.samples.iter().map(|&i| nodes[i].exp()).collect(),
        values,
        transformed: sums.sum.clone(),
        log_phi,
        sectors: sums.next_sector - 1,
        truncation_estimate: estimate,
        cutoff_insufficient: estimate > 0.01,
        mode_count: sums.mode_count,
        sums,
    })
}

/// `(4πt)^{-N/2}`.
pub fn free_kernel(dim: Dimension, t: f64) -> f64 {
    (4.0 * std::f64::consts::PI * t).powf(-0.5 * dim.as_f64())
}

/// The spatial factor of a heat-kernel bound `K(t,x,x) ≤ c t^{-N/2} E(t,x)²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundKind {
    /// `E = 1`.
    Free,
    /// `E = |x|^{-α}` on a bounded domain, `0 < λ < a²`.
    SubcriticalBounded,
    /// `E = min{1, (|x|/√t)^{-α}}` for `λ < 0`, `α < 0`.
    SubcriticalNegative { alpha: f64 },
    /// `E = |x|^{-(N-2)/2}` on a bounded domain.
    CriticalBounded,
    /// `E = max{|x|^{-(N-2)/2}, 1}` in the whole space.
    WholeSpaceCritical,
    /// `E = φ_{k,β}` on a bounded domain.
    LogRefinedBounded,
    /// `E = ψ`, the whole-space ground state.
    LogRefinedWholeSpace,
}

impl BoundKind {
    pub fn name(&self) -> &'static str {
        match self {
            BoundKind::Free => "free",
            BoundKind::SubcriticalBounded => "subcritical-bounded",
            BoundKind::SubcriticalNegative { .. } => "subcritical-negative-lambda",
            BoundKind::CriticalBounded => "critical-bounded",
            BoundKind::WholeSpaceCritical => "whole-space-critical",
            BoundKind::LogRefinedBounded => "log-refined-bounded",
            BoundKind::LogRefinedWholeSpace => "log-refined-whole-space",
        }
    }

    /// `ln E(t, r)²`, using `ln φ(r)` where the envelope is the ground state.
    fn log_envelope_sq(&self, dim: Dimension, t: f64, r: f64, log_phi: f64) -> f64 {
        let a = dim.hardy_exponent();
        match *self {
            BoundKind::Free => 0.0,
            BoundKind::SubcriticalBounded
            | BoundKind::CriticalBounded
            | BoundKind::LogRefinedBounded
            | BoundKind::LogRefinedWholeSpace => 2.0 * log_phi,
            BoundKind::SubcriticalNegative { alpha } => {
                2.0 * (-alpha * (r.ln() - 0.5 * t.ln())).min(0.0)
            }
            BoundKind::WholeSpaceCritical => 2.0 * (-a * r.ln()).max(0.0),
        }
    }
}

/// Normalized ratio `K t^{N/2} / E²` over the sampled grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub sup: f64,
    pub argsup: (f64, f64),
    /// Infimum of the same ratio on `{r ≤ √t}`, when sampled.
    pub sharpness_inf: Option<f64>,
    /// For `SubcriticalNegative`: sup of `K_φ t^{N/2-α}`.
    pub exponent_sup: Option<f64>,
    /// Largest relative change of `sup` tolerated under refinement.
    pub threshold: f64,
    /// `ratio[i][j]` on `times × radii`.
    pub ratio: Vec<Vec<f64>>,
}

impl BoundReport {
    pub fn finite(&self) -> bool {
        self.sup.is_finite() && self.exponent_sup.is_none_or(|e| e.is_finite())
    }

    /// Relative change of the sup (and of the exponent sup) against another run.
    pub fn change(&self, other: &BoundReport) -> f64 {
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
        let mut c = rel(self.sup, other.sup);
        if let (Some(a), Some(b)) = (self.exponent_sup, other.exponent_sup) {
            c = c.max(rel(a, b));
        }
        c
    }

    /// Finite and within the threshold against every variant.
    pub fn stable_against(&self, variants: &[&BoundReport]) -> bool {
        self.finite()
            && variants
                .iter()
                .all(|v| v.finite() && self.change(v) < self.threshold)
    }
}

pub fn check_bound(k: &DiagonalKernel, kind: BoundKind) -> Result<BoundReport> {
    let half_n = 0.5 * k.dim.as_f64();
    let mut sup = f64::NEG_INFINITY;
    let mut argsup = (0.0, 0.0);
    let mut inf: Option<f64> = None;
    let mut exp_sup: Option<f64> = None;
    let mut ratio = Vec::with_capacity(k.times.len());
    for (i, &t) in k.times.iter().enumerate() {
        let mut row = Vec::with_capacity(k.radii.len());
        for (j, &r) in k.radii.iter().enumerate() {
            let le = kind.log_envelope_sq(k.dim, t, r, k.log_phi[j]);
            let v = k.values[i][j] * t.powf(half_n) * (-le).exp();
            if !v.is_finite() {
                return Err(Error::Divergent(format!(
                    "ratio not finite at t = {t}, r = {r}"
                )));
            }
            if v > sup {
                sup = v;
                argsup = (t, r);
            }
            if r * r <= t {
                inf = Some(inf.map_or(v, |x| x.min(v)));
            }
            if let BoundKind::SubcriticalNegative { alpha } = kind {
                let e = k.transformed[i][j] * t.powf(half_n - alpha);
                exp_sup = Some(exp_sup.map_or(e, |x| x.max(e)));
            }
            row.push(v);
        }
        ratio.push(row);
    }
    Ok(BoundReport {
        kind,
        sup,
        argsup,
        sharpness_inf: inf,
        exponent_sup: exp_sup,
        threshold: 0.10,
        ratio,
    })
}

/// Outcome of [`semigroup_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SemigroupCheck {
    /// Largest `|k(t) - ∫k(t/2)k(t/2)|`, relative to `√(k(t,r,r)k(t,s,s))`.
    pub max_violation: f64,
    /// Largest `k(t,r,s)² / (k(t,r,r) k(t,s,s)) - 1`, clipped at zero.
    pub max_domination_violation: f64,
    /// Whether the diagonal decreases along the time grid at every sample.
    pub monotone_in_t: bool,
}

/// Chapman–Kolmogorov, diagonal domination and time monotonicity of one
/// sector, at the given node pairs.
pub fn semigroup_check(
    sk: &SectorKernel,
    t: f64,
    pairs: &[(usize, usize)],
) -> Result<SemigroupCheck> {
    let (modes, mass) = sk
        .modes
        .as_ref()
        .ok_or_else(|| Error::Invalid("sector kernel kept no modes".into()))?;
    let n = mass.len();
    let mut viol: f64 = 0.0;
    let mut dom: f64 = 0.0;
    for &(i, j) in pairs {
        let kij = sk.off_diagonal(t, i, j)?;
        let kii = sk.off_diagonal(t, i, i)?;
        let kjj = sk.off_diagonal(t, j, j)?;
        let scale = (kii * kjj).sqrt();
        let mut comp = 0.0;
        for l in 0..n {
            if mass[l] == 0.0 || modes.iter().all(|w| w[l] == 0.0) {
                continue;
            }
            let a = sk.off_diagonal(0.5 * t, i, l)?;
            let b = sk.off_diagonal(0.5 * t, l, j)?;
            comp += mass[l] * a * b;
        }
        viol = viol.max((kij - comp).abs() / scale);
        dom = dom.max(kij * kij / (kii * kjj) - 1.0);
    }
    let monotone = (0..sk.sample_nodes.len()).all(|j| {
        sk.values
            .windows(2)
            .all(|w| w[1][j] <= w[0][j] * (1.0 + 1e-12))
    });
    Ok(SemigroupCheck {
        max_violation: viol,
        max_domination_violation: dom.max(0.0),
        monotone_in_t: monotone,
    })
}

/// Outcome of [`ground_transform_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformCheck {
    pub max_relative_gap: f64,
    pub samples: usize,
}

/// Compares `∫|∇u|² - ∫V u²` with `∫|∇w|² φ²` for `u = φw` on random smooth
/// `w` supported in `[r_lo, r_hi]`.
pub fn ground_transform_check(
    dim: Dimension,
    v: &RadialPotential,
    ground: &GroundState,
    r_lo: f64,
    r_hi: f64,
    count: usize,
    seed: u64,
) -> Result<TransformCheck> {
    if !(r_lo > 0.0 && r_hi > r_lo) {
        return Err(Error::Invalid("need 0 < r_lo < r_hi".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nm2 = dim.as_f64() - 2.0;
    let rule = gauss_rule();
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let bump = RandomBump::new(&mut rng, r_lo.ln(), r_hi.ln());
        let nodes = bump.nodes(400);
        let (mut lhs, mut rhs, mut scale) = (0.0, 0.0, 0.0);
        for e in 0..nodes.len() - 1 {
            let h = nodes[e + 1] - nodes[e];
            for &(x, wq) in rule {
                let s = nodes[e] + 0.5 * (x + 1.0) * h;
                let wt = 0.5 * h * wq;
                let g = ground.log_value(s)?;
                let g1 = ground.log_derivative(s)?;
                let (w, ws) = bump.eval(s);
                let amp = (2.0 * g + nm2 * s).exp();
                let us2 = amp * (g1 * w + ws).powi(2);
                let vu2 = amp * v.r2_value(dim, s) * w * w;
                lhs += wt * (us2 - vu2);
                rhs += wt * amp * ws * ws;
                scale += wt * (us2 + vu2.abs());
            }
        }
        worst = worst.max((lhs - rhs).abs() / scale.max(rhs.abs()));
    }
    Ok(TransformCheck {
        max_relative_gap: worst,
        samples: count,
    })
}

/// `min (b/a) - 1` over the shared samples: nonnegative when kernel `b` lies
/// above kernel `a` everywhere.
pub fn kernel_ordering(a: &DiagonalKernel, b: &DiagonalKernel) -> Result<f64> {
    if a.times != b.times || a.radii != b.radii {
        return Err(Error::Mismatch(
            "kernels are sampled on different grids".into(),
        ));
    }
    let mut m = f64::INFINITY;
    for (ra, rb) in a.values.iter().zip(&b.values) {
        for (x, y) in ra.iter().zip(rb) {
            m = m.min(y / x - 1.0);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn d3() -> Dimension {
        Dimension::new(3).unwrap()
    }

    #[test]
    fn dirichlet_ball_eigenvalues() {
        let g = GradedGrid {
            r_min: 1e-4,
            r_max: 1.0,
            dr: 2e-3,
            fine_until: 1.0,
            h_max: 0.05,
            growth: 1.0,
        }
        .build()
        .unwrap();
        let p = HeatProblem::new(d3(), None, None, g);
        let sk = sector_diagonal(&p, 0, &[0.01], &[p.grid.nearest(0.5)], false).unwrap();
        for (n, l) in sk.eigenvalues.iter().take(3).enumerate() {
            let exact = ((n + 1) as f64 * PI).powi(2);
            assert!((l / exact - 1.0).abs() < 1e-3, "{l} vs {exact}");
        }
        let s1 = sector_diagonal(&p, 1, &[0.01], &[p.grid.nearest(0.5)], false).unwrap();
        assert!(s1.eigenvalues[0] > sk.eigenvalues[0]);
    }

    #[test]
    fn under_resolved_is_refused() {
        let g = GradedGrid {
            r_min: 1e-2,
            r_max: 1.0,
            dr: 0.05,
            fine_until: 1.0,
            h_max: 0.2,
            growth: 1.0,
        }
        .build()
        .unwrap();
        let p = HeatProblem::new(d3(), None, None, g);
        let err = sector_diagonal(&p, 0, &[1e-6], &[5], false).unwrap_err();
        assert!(matches!(err, Error::UnderResolved(_)));
    }

    #[test]
    fn free_kernel_at_moderate_time() {
        let t = 0.01;
        let g = GradedGrid {
            r_min: 1e-4,
            r_max: 2.0,
            dr: 0.0125,
            fine_until: 0.8,
            h_max: 0.05,
            growth: 1.05,
        }
        .build()
        .unwrap();
        let p = HeatProblem::new(d3(), None, None, g);
        let k = assemble_diagonal(
            &p,
            &[t],
            &[0.3],
            SectorCutoff::Auto {
                tol: 1e-7,
                max: 200,
            },
        )
        .unwrap();
        let rel = k.values[0][0] / free_kernel(d3(), t) - 1.0;
        assert!(rel.abs() < 0.02, "rel {rel}");
        assert!(!k.cutoff_insufficient);
    }
}
