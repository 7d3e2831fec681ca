//! Configuration-driven experiment runner.
//!
//! `hardylab <scenario> --config <path> [--out <dir>]` reads a flat
//! `key = value` file, runs one scenario and writes `<scenario>.csv` and
//! `summary.txt` into the output directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::funcs::{
    build_ground_state, eval_xk_derivative, exponent_from_lambda, kelvin_energy_check, Dimension,
    GroundState, Profile, RadialPotential,
};
use crate::grids::RadialDomain;
use crate::heat::{
    assemble_diagonal, check_bound, extend_sectors, free_kernel, ground_transform_check, log_times,
    BoundKind, GradedGrid, HeatProblem, SectorCutoff,
};
use crate::mazya::{
    best_constant, harmonic_improvement_check, mazya_sup, sample_radial_form, sector_energy,
    DescentOptions, GroundStateWeights, MazyaOptions, PowerWeights, RadialWeights, SectorExpansion,
    SobolevQuotient,
};
use crate::rayleigh::{
    ball_formula, converged_quotient, epsilon0, exterior_formula, RayleighProblem,
    ThresholdVariant, TruncationStudy,
};
use crate::sectors::{angular_eigenvalue, zonal_energy};
use crate::shooting::{epsilon0_by_bisection, shoot, ShootingOptions};

/// Recognized configuration keys.
pub const KEYS: &[&str] = &[
    "N",
    "domain",
    "R",
    "Rinf",
    "rmin",
    "grid_sizes",
    "alpha",
    "lambda",
    "epsilon",
    "k",
    "mu",
    "sigma",
    "Kbound",
    "tail",
    "tmin",
    "tmax",
    "t_points",
    "sectors",
    "tol",
    "seed",
    "potential",
    "epsilon_fraction",
    "weights",
    "q",
    "restarts",
    "samples",
    "radii_points",
];

const POSITIVE_KEYS: &[&str] = &[
    "R",
    "Rinf",
    "rmin",
    "epsilon",
    "mu",
    "sigma",
    "Kbound",
    "tmin",
    "tmax",
    "tol",
    "epsilon_fraction",
    "q",
];
const INTEGER_KEYS: &[&str] = &[
    "N",
    "k",
    "t_points",
    "sectors",
    "seed",
    "restarts",
    "samples",
    "radii_points",
];

const USAGE: &str = "usage: hardylab <scenario> --config <path> [--out <dir>]  (see --help)";

const AFTER_HELP: &str = "\
Scenarios and the checks they gate:
  rayleigh        boundary-term Hardy quotients against the closed formulas,
                  sandwich and monotonicity in alpha
  epsilon0        critical coupling by eigenproblem and by shooting, agreement
                  and the lower bound K^-1 (N-2)^2/4
  shoot           outward Robin profile for a given coupling
  mazya           one-dimensional Maz'ja supremum, finiteness, scaling
  best-constant   best constant of the radial Sobolev-type inequality
  heat-bound      on-diagonal heat kernel against its scaling bound, stability
                  under refinement and sector doubling
  identity-suite  ground-state transform, sector, derivative, Kelvin and
                  improved-Hardy identities on random test functions

Config: one `key = value` per line, `#` starts a comment. Keys:
  N domain R Rinf rmin grid_sizes alpha lambda epsilon k mu sigma Kbound tail
  tmin tmax t_points sectors tol seed potential epsilon_fraction weights q
  restarts samples radii_points
Exit codes: 0 all checks pass, 1 invalid config, 2 solver fault,
3 a check failed.

Reference runs (configs/ in the source tree):
  closed formulas, sandwich, monotonicity   rayleigh --config rayleigh_n{3,4,5}_ball.cfg
  exterior formulas and Kelvin duality      rayleigh --config rayleigh_n{3,4,5}_exterior.cfg
  threshold cross-validation                epsilon0 --config epsilon0_r{4,3}.cfg
  Maz'ja criterion                          mazya --config mazya_{classical,ground_state,q2}.cfg
  identities and improved Hardy positivity  identity-suite --config identity_n{3,4}.cfg
  free-kernel calibration                   heat-bound --config heat_free.cfg
  heat-kernel bounds                        heat-bound --config heat_{critical_ball,subcritical_ball,
                                            negative_whole,critical_inner,log_ball_n4}.cfg
  Sobolev best constant                     best-constant --config best_constant_n3.cfg";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    Rayleigh,
    Epsilon0,
    Shoot,
    Mazya,
    BestConstant,
    HeatBound,
    IdentitySuite,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Rayleigh => "rayleigh",
            Scenario::Epsilon0 => "epsilon0",
            Scenario::Shoot => "shoot",
            Scenario::Mazya => "mazya",
            Scenario::BestConstant => "best-constant",
            Scenario::HeatBound => "heat-bound",
            Scenario::IdentitySuite => "identity-suite",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hardylab", version, about = "Hardy constants, thresholds and heat-kernel bounds for -Δ - V", after_help = AFTER_HELP)]
pub struct Args {
    pub scenario: Scenario,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Solver(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Solver(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid configuration: {m}"),
            CliError::Solver(m) => write!(f, "solver fault: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Invalid(m) | Error::Domain(m) => CliError::Validation(m),
            other => CliError::Solver(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn invalid<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Validation(msg.into()))
}

/// Parsed `key = value` configuration.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return invalid(format!("line {}: expected `key = value`", no + 1));
            };
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return invalid(format!("line {}: unknown key `{k}`", no + 1));
            }
            if v.is_empty() {
                return invalid(format!("line {}: empty value for `{k}`", no + 1));
            }
            if values.insert(k.to_string(), v.to_string()).is_some() {
                return invalid(format!("line {}: duplicate key `{k}`", no + 1));
            }
        }
        if values.is_empty() {
            return invalid("empty config");
        }
        let cfg = Config { values };
        for key in POSITIVE_KEYS {
            cfg.f64_or(key, 1.0)?;
        }
        for key in INTEGER_KEYS {
            cfg.usize_or(key, 0)?;
        }
        cfg.signed_f64("lambda")?;
        Ok(cfg)
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn raw_f64(&self, key: &str) -> CliResult<Option<f64>> {
        match self.get_str(key) {
            None => Ok(None),
            Some(v) => match parse_number(v) {
                Some(x) if x.is_finite() => Ok(Some(x)),
                _ => invalid(format!("`{key}` must be a finite number, got `{v}`")),
            },
        }
    }

    /// A positive number.
    pub fn f64_or(&self, key: &str, default: f64) -> CliResult<f64> {
        let v = self.raw_f64(key)?.unwrap_or(default);
        if !(v > 0.0) {
            return invalid(format!("`{key}` must be positive, got {v}"));
        }
        Ok(v)
    }

    pub fn required_f64(&self, key: &str) -> CliResult<f64> {
        self.raw_f64(key)?
            .ok_or_else(|| CliError::Validation(format!("missing key `{key}`")))
    }

    /// A number of either sign (used for `lambda` only).
    pub fn signed_f64(&self, key: &str) -> CliResult<Option<f64>> {
        self.raw_f64(key)
    }

    /// A nonnegative integer.
    pub fn usize_or(&self, key: &str, default: usize) -> CliResult<usize> {
        match self.get_str(key) {
            None => Ok(default),
            Some(v) => v.parse::<usize>().map_err(|_| {
                CliError::Validation(format!("`{key}` must be a nonnegative integer, got `{v}`"))
            }),
        }
    }

    pub fn dimension(&self) -> CliResult<Dimension> {
        let n = self.usize_or("N", 3)?;
        Dimension::new(n)
            .map_err(|_| CliError::Validation(format!("`N` must be at least 3, got {n}")))
    }

    /// `grid_sizes`: a strictly increasing comma-separated list.
    pub fn grid_sizes(&self, default: &[usize]) -> CliResult<Vec<usize>> {
        let Some(v) = self.get_str("grid_sizes") else {
            return Ok(default.to_vec());
        };
        let sizes = v
            .split(',')
            .map(|x| x.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| {
                CliError::Validation(format!(
                    "`grid_sizes` must be a list of integers, got `{v}`"
                ))
            })?;
        if sizes.is_empty()
            || sizes.iter().any(|&n| n < 16)
            || sizes.windows(2).any(|w| w[1] <= w[0])
        {
            return invalid("`grid_sizes` must be strictly increasing and each at least 16");
        }
        Ok(sizes)
    }

    /// `alpha`: a comma-separated list or `lo:hi:count`.
    pub fn alphas(&self, default: (f64, f64, usize)) -> CliResult<Vec<f64>> {
        let list = match self.get_str("alpha") {
            None => range(default.0, default.1, default.2),
            Some(v) if v.contains(':') => {
                let parts: Vec<&str> = v.split(':').collect();
                if parts.len() != 3 {
                    return invalid("`alpha` range must be `lo:hi:count`");
                }
                let lo = parse_number(parts[0]);
                let hi = parse_number(parts[1]);
                let n = parts[2].trim().parse::<usize>().ok();
                match (lo, hi, n) {
                    (Some(lo), Some(hi), Some(n)) if n >= 1 && hi >= lo => range(lo, hi, n),
                    _ => return invalid(format!("bad `alpha` range `{v}`")),
                }
            }
            Some(v) => v
                .split(',')
                .map(parse_number)
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| CliError::Validation(format!("bad `alpha` list `{v}`")))?,
        };
        if list.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return invalid("`alpha` values must be positive");
        }
        Ok(list)
    }
}

fn parse_number(v: &str) -> Option<f64> {
    let v = v.trim();
    if let Some((a, b)) = v.split_once('/') {
        return Some(a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?);
    }
    v.parse().ok()
}

fn range(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// A named pass/fail line of the summary.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        Check {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

/// A CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:.14e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// Everything a scenario produces.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub scenario: Scenario,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Informational `key = value` lines of the summary.
    pub notes: Vec<(String, String)>,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(scenario: Scenario, header: Vec<&'static str>) -> Self {
        Report {
            scenario,
            header,
            rows: Vec::new(),
            notes: Vec::new(),
            checks: Vec::new(),
        }
    }

    fn note(&mut self, key: &str, value: impl std::fmt::Display) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    fn num_note(&mut self, key: &str, value: f64) {
        self.note(key, format!("{value:.14e}"));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario = {}", self.scenario.name());
        for (k, v) in &self.notes {
            let _ = writeln!(s, "{k} = {v}");
        }
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{} {}: {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        s
    }
}

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = std::fs::File::create(&tmp)?;
    f.write_all(contents.as_bytes())?;
    f.sync_all()?;
    drop(f);
    std::fs::rename(&tmp, path)
}

/// Runs a scenario on a parsed configuration.
pub fn run(scenario: Scenario, cfg: &Config) -> CliResult<Report> {
    match scenario {
        Scenario::Rayleigh => run_rayleigh(cfg),
        Scenario::Epsilon0 => run_epsilon0(cfg),
        Scenario::Shoot => run_shoot(cfg),
        Scenario::Mazya => run_mazya(cfg),
        Scenario::BestConstant => run_best_constant(cfg),
        Scenario::HeatBound => run_heat_bound(cfg),
        Scenario::IdentitySuite => run_identity_suite(cfg),
    }
}

/// Parses arguments, runs, writes the artifacts and maps the outcome to an
/// exit code.
pub fn main_with_args(args: Args) -> ExitCode {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read config {}: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };
    let cfg = match Config::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}\n{USAGE}");
            return ExitCode::from(e.code());
        }
    };
    let report = match run(args.scenario, &cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            if matches!(e, CliError::Validation(_)) {
                eprintln!("{USAGE}");
            }
            return ExitCode::from(e.code());
        }
    };
    if let Err(e) = std::fs::create_dir_all(&args.out)
        .and_then(|_| {
            write_atomic(
                &args.out.join(format!("{}.csv", args.scenario.name())),
                &report.csv(),
            )
        })
        .and_then(|_| write_atomic(&args.out.join("summary.txt"), &report.summary()))
    {
        eprintln!("cannot write outputs to {}: {e}", args.out.display());
        return ExitCode::from(2);
    }
    print!("{}", report.summary());
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        for c in report.checks.iter().filter(|c| !c.pass) {
            eprintln!("check failed: {} ({})", c.name, c.detail);
        }
        ExitCode::from(3)
    }
}

fn tail_profile(cfg: &Config) -> CliResult<Profile> {
    match cfg.get_str("tail").unwrap_or("power") {
        "power" => {}
        other => {
            return invalid(format!(
                "unknown tail `{other}`; only `power` (f = Kbound r^(-2-sigma)) is supported"
            ))
        }
    }
    let sigma = cfg.f64_or("sigma", 2.0)?;
    let k = cfg.f64_or("Kbound", 1.0)?;
    Ok(Profile::power(k, -2.0 - sigma))
}

fn run_rayleigh(cfg: &Config) -> CliResult<Report> {
    let dim = cfg.dimension()?;
    let nm2 = dim.as_f64() - 2.0;
    let radius = cfg.f64_or("R", 1.0)?;
    let tol = cfg.f64_or("tol", 1e-3)?;
    let exterior = match cfg.get_str("domain").unwrap_or("ball") {
        "ball" => false,
        "exterior" => true,
        other => {
            return invalid(format!(
                "rayleigh needs domain `ball` or `exterior`, got `{other}`"
            ))
        }
    };
    let alphas = cfg.alphas((0.05 * nm2, 0.95 * nm2, 24))?;
    let mut rep = Report::new(
        Scenario::Rayleigh,
        vec!["alpha", "lambda_computed", "lambda_formula", "abs_err"],
    );
    let study = TruncationStudy::default();
    let mut worst: f64 = 0.0;
    let mut sandwich = true;
    let mut values = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        let domain = if exterior {
            RadialDomain::Exterior {
                radius,
                truncation: 10.0 * radius,
            }
        } else {
            RadialDomain::Ball { radius }
        };
        let r = converged_quotient(&RayleighProblem::hardy(dim, domain, alpha), &study)?;
        let formula = if exterior {
            exterior_formula(dim, alpha)
        } else {
            ball_formula(dim, alpha)
        };
        let err = (r.value - formula).abs();
        worst = worst.max(err / formula.abs().max(1e-300));
        let a2 = dim.hardy_constant();
        // the same lower bound holds for the dual exterior value
        let low = alpha * (nm2 - alpha);
        sandwich &= r.value >= low - 1e-3 && r.value <= a2 + 1e-3;
        // extrapolation correction as the error scale of this estimate
        let spread = r
            .convergence_trace
            .last()
            .map_or(0.0, |t| (t - r.value).abs());
        values.push((r.value, spread));
        rep.rows.push(vec![
            Cell::Num(alpha),
            Cell::Num(r.value),
            Cell::Num(formula),
            Cell::Num(err),
        ]);
    }
    if exterior {
        // Kelvin duality: μ(α) against λ_Ball(N-2-α)
        let mut gap: f64 = 0.0;
        let mut checked = 0;
        for (&alpha, &(mu, _)) in alphas.iter().zip(&values) {
            let dual = nm2 - alpha;
            if dual <= 0.0 {
                continue;
            }
            let p = RayleighProblem::hardy(
                dim,
                RadialDomain::Ball {
                    radius: 1.0 / radius,
                },
                dual,
            );
            gap = gap.max((mu - converged_quotient(&p, &study)?.value).abs());
            checked += 1;
        }
        if checked > 0 {
            rep.num_note("kelvin_gap", gap);
            rep.checks.push(Check::new(
                "kelvin_duality",
                gap <= 2e-3,
                format!("max |mu(alpha) - lambda_ball(N-2-alpha)| = {gap:.3e} <= 2e-3"),
            ));
        }
    }
    let sorted = alphas.windows(2).all(|w| w[1] > w[0]);
    let monotone = values.windows(2).all(|w| {
        let ((a, ea), (b, eb)) = (w[0], w[1]);
        let slack = ea + eb + 1e-9 * a.abs().max(1.0);
        if exterior {
            b <= a + slack
        } else {
            b >= a - slack
        }
    });
    rep.num_note("max_rel_err", worst);
    rep.checks.push(Check::new(
        "formula",
        worst <= tol,
        format!("max relative error {worst:.3e} <= {tol:.1e}"),
    ));
    rep.checks.push(Check::new(
        "sandwich",
        sandwich,
        "alpha(N-2-alpha) - 1e-3 <= value <= (N-2)^2/4 + 1e-3".into(),
    ));
    if sorted {
        let dir = if exterior {
            "nonincreasing"
        } else {
            "nondecreasing"
        };
        rep.checks
            .push(Check::new("monotone", monotone, format!("{dir} in alpha")));
    }
    Ok(rep)
}

fn threshold_variant(dim: Dimension, k: usize) -> CliResult<ThresholdVariant> {
    if k == 0 {
        return Ok(ThresholdVariant::Base);
    }
    if k as f64 >= dim.as_f64() - 2.0 {
        return invalid(format!("k = {k} needs 1 <= k < N-2"));
    }
    Ok(ThresholdVariant::LogRefined(k))
}

fn run_epsilon0(cfg: &Config) -> CliResult<Report> {
    let dim = cfg.dimension()?;
    let f = tail_profile(cfg)?;
    let k = cfg.usize_or("k", 0)?;
    let tol = cfg.f64_or("tol", 1e-2)?;
    let variant = threshold_variant(dim, k)?;
    let robin = (dim.as_f64() - 2.0 + k as f64) / 2.0;
    let lower = variant.lower_bound(dim, &f)?;
    let eig = epsilon0(dim, &f, variant, &TruncationStudy::default())?;
    let opts = ShootingOptions {
        r_inf: cfg.f64_or("Rinf", 1e4)?,
        ..ShootingOptions::default()
    };
    let sh = epsilon0_by_bisection(dim, &f, robin, 1e-9, &opts)?;
    let mut rep = Report::new(
        Scenario::Epsilon0,
        vec!["method", "epsilon0", "lower_bound"],
    );
    rep.rows.push(vec![
        Cell::Text("eigen".into()),
        Cell::Num(eig.value),
        Cell::Num(lower),
    ]);
    rep.rows.push(vec![
        Cell::Text("shooting".into()),
        Cell::Num(sh),
        Cell::Num(lower),
    ]);
    let rel = (eig.value - sh).abs() / sh;
    rep.num_note("epsilon0_eigen", eig.value);
    rep.num_note("epsilon0_shooting", sh);
    rep.num_note("lower_bound", lower);
    rep.checks.push(Check::new(
        "cross_validation",
        rel <= tol,
        format!("relative gap {rel:.3e} <= {tol:.1e}"),
    ));
    rep.checks.push(Check::new(
        "lower_bound",
        eig.value >= lower * (1.0 - 1e-9) && sh >= lower * (1.0 - 1e-9),
        format!("both >= {lower:.6e}"),
    ));
    Ok(rep)
}

fn run_shoot(cfg: &Config) -> CliResult<Report> {
    let dim = cfg.dimension()?;
    let f = tail_profile(cfg)?;
    let k = cfg.usize_or("k", 0)?;
    threshold_variant(dim, k)?;
    let eps = cfg.required_f64("epsilon")?;
    if !(eps >= 0.0) {
        return invalid("`epsilon` must be nonnegative");
    }
    let robin = (dim.as_f64() - 2.0 + k as f64) / 2.0;
    let opts = ShootingOptions {
        r_inf: cfg.f64_or("Rinf", 1e4)?,
        ..ShootingOptions::default()
    };
    let r = shoot(dim, eps, &f, robin, &opts)?;
    let mut rep = Report::new(Scenario::Shoot, vec!["r", "psi", "flux"]);
    for ((s, p), fl) in r.profile.s.iter().zip(&r.profile.psi).zip(&r.profile.flux) {
        rep.rows
            .push(vec![Cell::Num(s.exp()), Cell::Num(*p), Cell::Num(*fl)]);
    }
    rep.num_note("limit_estimate", r.limit_estimate);
    rep.note("positive", r.positive);
    rep.note("supercritical", r.supercritical());
    rep.note(
        "zero_crossing",
        r.zero_crossing
            .map_or("none".to_string(), |z| format!("{z:.14e}")),
    );
    // the flux r^{N-1}ψ' starts negative and decreases while ψ > 0
    let mut ok = true;
    for w in r.profile.psi.windows(2).zip(r.profile.flux.windows(2)) {
        let (p, fl) = w;
        if p[0] > 0.0 && p[1] > 0.0 {
            ok &= p[1] <= p[0] && fl[1] <= fl[0] + 1e-12 * fl[0].abs();
        }
    }
    rep.checks.push(Check::new(
        "decreasing_while_positive",
        ok,
        "psi and its flux decrease while psi > 0".into(),
    ));
    Ok(rep)
}

/// The ground state of `ε f` outside the unit ball glued to `r^{-(N-2)/2}`
/// (k = 0) or `φ_{k}` (k ≥ 1) inside, with `ε = epsilon` or
/// `epsilon_fraction · ε_{k,0}`.
fn whole_space_ground_state(
    cfg: &Config,
    dim: Dimension,
) -> CliResult<(RadialPotential, GroundState, f64)> {
    let f = tail_profile(cfg)?;
    let k = cfg.usize_or("k", 0)?;
    threshold_variant(dim, k)?;
    let robin = (dim.as_f64() - 2.0 + k as f64) / 2.0;
    let opts = ShootingOptions {
        r_inf: cfg.f64_or("Rinf", 1e4)?.max(1e4),
        ..ShootingOptions::default()
    };
    let eps = match cfg.raw_f64("epsilon")? {
        Some(e) => e,
        None => {
            let frac = cfg.f64_or("epsilon_fraction", 0.5)?;
            if frac >= 1.0 {
                return invalid("`epsilon_fraction` must be below 1");
            }
            frac * epsilon0_by_bisection(dim, &f, robin, 1e-10, &opts)?
        }
    };
    if !(eps > 0.0) {
        return invalid("`epsilon` must be positive");
    }
    let sh = shoot(dim, eps, &f, robin, &opts)?;
    if sh.supercritical() {
        return invalid(format!(
            "epsilon = {eps} is not below the critical coupling"
        ));
    }
    let pot = if k == 0 {
        RadialPotential::CriticalInner {
            epsilon: eps,
            tail: f,
        }
    } else {
        RadialPotential::IteratedLogInner {
            k,
            epsilon: eps,
            tail: f,
        }
    };
    let phi = build_ground_state(dim, &pot, Some(sh.profile))?;
    Ok((pot, phi, eps))
}

/// Power-counting prediction for `A = r^a`, `B = r^b`.
fn power_counting_finite(a: f64, b: f64, q: f64) -> bool {
    a > 1.0 && b > -1.0 && ((b + 1.0) - 0.5 * q * (a - 1.0)).abs() < 1e-12
}

fn run_mazya(cfg: &Config) -> CliResult<Report> {
    let dim = cfg.dimension()?;
    let n = dim.as_f64();
    let q = cfg.f64_or("q", 2.0 * n / (n - 2.0))?;
    if q < 2.0 {
        return invalid("`q` must be at least 2");
    }
    let opts = MazyaOptions {
        r_min: cfg.f64_or("rmin", 1e-6)?,
        r_max: cfg.f64_or("Rinf", 1e6)?,
        ..MazyaOptions::default()
    };
    let mut rep = Report::new(Scenario::Mazya, vec!["extension", "r_min", "r_max", "sup"]);
    let kind = cfg.get_str("weights").unwrap_or("classical");
    let (check, expected, closed) = match kind {
        "classical" => {
            let w = PowerWeights::classical(dim);
            let c = mazya_sup(&w, q, &opts)?;
            let base = MazyaOptions {
                extensions: 0,
                ..opts
            };
            let s0 = mazya_sup(&w, q, &base)?.sup_value;
            let sa = mazya_sup(
                &PowerWeights {
                    a_coefficient: 2.0,
                    ..w
                },
                q,
                &base,
            )?
            .sup_value;
            let sb = mazya_sup(
                &PowerWeights {
                    b_coefficient: 2.0,
                    ..w
                },
                q,
                &base,
            )?
            .sup_value;
            if s0.is_finite() {
                let ea = (sa / s0 - 2f64.powf(-q / 2.0)).abs();
                let eb = (sb / s0 - 2.0).abs();
                rep.checks.push(Check::new(
                    "scaling",
                    ea < 1e-10 && eb < 1e-10,
                    format!("A->2A error {ea:.2e}, B->2B error {eb:.2e}"),
                ));
            }
            let finite = power_counting_finite(n - 1.0, n - 1.0, q);
            let closed = finite.then(|| 1.0 / (n * (n - 2.0).powf(n / (n - 2.0))));
            (c, finite, closed)
        }
        "ground-state" | "ground-state-plain" => {
            let (_, phi, eps) = whole_space_ground_state(cfg, dim)?;
            rep.num_note("epsilon", eps);
            let depth = if kind == "ground-state" {
                cfg.usize_or("k", 0)? + 1
            } else {
                0
            };
            let w = GroundStateWeights {
                q,
                ..GroundStateWeights::critical(&phi, depth)
            };
            (
                mazya_sup(&w, q, &opts)?,
                kind == "ground-state" && (q - 2.0 * n / (n - 2.0)).abs() < 1e-12,
                None,
            )
        }
        other => return invalid(format!("unknown weights `{other}`")),
    };
    let (mut lo, mut hi) = (opts.r_min.ln(), opts.r_max.ln());
    for (e, v) in check.extension_trace.iter().enumerate() {
        if e > 0 {
            lo -= opts.extension_length;
            hi += opts.extension_length;
        }
        rep.rows.push(vec![
            Cell::Int(e),
            Cell::Num(lo.exp()),
            Cell::Num(hi.exp()),
            Cell::Num(*v),
        ]);
    }
    rep.note("weights", kind);
    rep.num_note("q", q);
    rep.num_note("sup", check.sup_value);
    rep.note("finite", check.finite);
    rep.checks.push(Check::new(
        "finiteness",
        check.finite == expected,
        format!("reported {}, expected {}", fin(check.finite), fin(expected)),
    ));
    if let Some(c) = closed {
        let err = (check.sup_value - c).abs();
        rep.checks.push(Check::new(
            "closed_form",
            err <= 1e-3,
            format!("|sup - {c:.6}| = {err:.2e} <= 1e-3"),
        ));
    }
    Ok(rep)
}

fn fin(b: bool) -> &'static str {
    if b {
        "finite"
    } else {
        "divergent"
    }
}

/// Sharp constant of `∫|∇u|² ≥ S (∫|u|^{2N/(N-2)})^{(N-2)/N}` on `R^N`.
pub fn sobolev_constant(dim: Dimension) -> f64 {
    let n = dim.as_f64();
    let sphere = Dimension::new(dim.get() + 1)
        .expect("N+1 >= 3")
        .surface_area();
    0.25 * n * (n - 2.0) * sphere.powf(2.0 / n)
}

fn interpolate(from_s: &[f64], from_v: &[f64], to_s: &[f64]) -> Vec<f64> {
    to_s.iter()
        .map(|&s| {
            let j = from_s
                .partition_point(|x| *x < s)
                .clamp(1, from_s.len() - 1);
            let (a, b) = (from_s[j - 1], from_s[j]);
            let t = ((s - a) / (b - a)).clamp(0.0, 1.0);
            from_v[j - 1] * (1.0 - t) + from_v[j] * t
        })
        .collect()
}

fn run_best_constant(cfg: &Config) -> CliResult<Report> {
    let dim = cfg.dimension()?;
    let n = dim.as_f64();
    let q = 2.0 * n / (n - 2.0);
    let sizes = cfg.grid_sizes(&[201, 401])?;
    let (lo, hi) = (
        cfg.f64_or("rmin", 1e-4)?.ln(),
        cfg.f64_or("Rinf", 1e4)?.ln(),
    );
    if !(hi > lo) {
        return invalid("need rmin < Rinf");
    }
    let restarts = cfg.usize_or("restarts", 20)?;
    let seed = cfg.usize_or("seed", 7)? as u64;
    let kind = cfg.get_str("weights").unwrap_or("classical");
    let classical = PowerWeights::classical(dim);
    let ground;
    let gw;
    let weights: &dyn RadialWeights = match kind {
        "classical" => &classical,
        "ground-state" => {
            ground = whole_space_ground_state(cfg, dim)?.1;
            gw = GroundStateWeights::critical(&ground, cfg.usize_or("k", 0)? + 1);
            &gw
        }
        other => return invalid(format!("unknown weights `{other}`")),
    };
    let quot = SobolevQuotient {
        dim,
        weights,
        potential: None,
        q,
    };
    let mut rep = Report::new(
        Scenario::BestConstant,
        vec!["nodes", "c_estimate", "restart_min", "restart_max"],
    );
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut values = Vec::new();
    for &m in &sizes {
        let nodes: Vec<f64> = range(lo, hi, m);
        let warm = prev.as_ref().map(|(s, v)| interpolate(s, v, &nodes));
        let opts = DescentOptions {
            restarts,
            seed,
            warm_start: warm,
            ..DescentOptions::default()
        };
        let b = best_constant(&quot, &nodes, &opts)?;
        let rmin = b
            .restart_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let rmax = b
            .restart_values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        rep.rows.push(vec![
            Cell::Int(m),
            Cell::Num(b.c_estimate),
            Cell::Num(rmin),
            Cell::Num(rmax),
        ]);
        values.push(b.c_estimate);
        prev = Some((nodes, b.minimizer));
    }
    let best = values[values.len() - 1];
    rep.note("weights", kind);
    rep.num_note("c_estimate", best);
    let monotone = values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    rep.checks.push(Check::new(
        "refinement_monotone",
        monotone,
        "estimate nonincreasing under grid refinement".into(),
    ));
    rep.checks.push(Check::new(
        "positive",
        best > 0.0,
        format!("estimate {best:.6e} > 0"),
    ));
    if kind == "classical" {
        let s = sobolev_constant(dim);
        let rel = (best - s).abs() / s;
        rep.num_note("sobolev_constant", s);
        rep.checks.push(Check::new(
            "classical_constant",
            rel <= 0.05,
            format!("relative gap {rel:.3e} <= 5e-2"),
        ));
    }
    Ok(rep)
}

fn run_heat_bound(cfg: &Config) -> CliResult<Report> {
    let dim = cfg.dimension()?;
    let a2 = dim.hardy_constant();
    let ball = match cfg.get_str("domain").unwrap_or("ball") {
        "ball" => true,
        "whole" => false,
        other => {
            return invalid(format!(
                "heat-bound needs domain `ball` or `whole`, got `{other}`"
            ))
        }
    };
    let radius = cfg.f64_or("R", 1.0)?;
    let r_inf = cfg.f64_or("Rinf", 16.0)?;
    let t_min = cfg.f64_or("tmin", 1e-4)?;
    let t_max = cfg.f64_or("tmax", 1e-1)?;
    let times = log_times(t_min, t_max, cfg.usize_or("t_points", 7)?)?;
    let (outer, r_hi) = if ball {
        (radius, 0.95 * radius)
    } else {
        (r_inf, r_inf / 8.0)
    };
    if !ball && t_max > (r_inf / 8.0).powi(2) {
        return invalid(format!(
            "whole-space runs need tmax <= (Rinf/8)^2 = {}",
            (r_inf / 8.0).powi(2)
        ));
    }
    let r_lo = 1e-3 * if ball { radius } else { 1.0 };
    let count = cfg.usize_or("radii_points", 12)?.max(2);
    let radii: Vec<f64> = (0..count)
        .map(|i| r_lo * (r_hi / r_lo).powf(i as f64 / (count - 1) as f64))
        .collect();

    let potential_kind = cfg.get_str("potential").unwrap_or("inverse-square");
    let (pot, phi, kind): (Option<RadialPotential>, Option<GroundState>, BoundKind) =
        match potential_kind {
            "free" => (None, None, BoundKind::Free),
            "inverse-square" => {
                let lambda = cfg.signed_f64("lambda")?.unwrap_or(a2);
                let alpha = exponent_from_lambda(dim, lambda)?;
                let v = RadialPotential::InverseSquare { lambda };
                let kind = if lambda < 0.0 {
                    BoundKind::SubcriticalNegative { alpha }
                } else if lambda == 0.0 {
                    BoundKind::Free
                } else if lambda < a2 {
                    BoundKind::SubcriticalBounded
                } else {
                    BoundKind::CriticalBounded
                };
                let g = build_ground_state(dim, &v, None)?;
                (Some(v), Some(g), kind)
            }
            "critical-inner" | "log-inner" => {
                if ball {
                    return invalid(format!(
                        "potential `{potential_kind}` is a whole-space potential"
                    ));
                }
                let k = cfg.usize_or("k", 0)?;
                if (potential_kind == "log-inner") != (k > 0) {
                    return invalid("`log-inner` needs k >= 1 and `critical-inner` needs k = 0");
                }
                let (v, g, _) = whole_space_ground_state(cfg, dim)?;
                let kind = if k == 0 {
                    BoundKind::WholeSpaceCritical
                } else {
                    BoundKind::LogRefinedWholeSpace
                };
                (Some(v), Some(g), kind)
            }
            "log-bounded" => {
                if !ball {
                    return invalid("`log-bounded` lives on a ball");
                }
                let k = cfg.usize_or("k", 1)?;
                if k == 0 {
                    return invalid("`log-bounded` needs k >= 1");
                }
                let mu = cfg.f64_or("mu", 0.25)?;
                let v = RadialPotential::IteratedLogBounded {
                    k,
                    mu,
                    scale: radius,
                };
                let g = build_ground_state(dim, &v, None)?;
                (Some(v), Some(g), BoundKind::LogRefinedBounded)
            }
            other => return invalid(format!("unknown potential `{other}`")),
        };
    let grid = GradedGrid {
        r_min: cfg.f64_or("rmin", 1e-6)?,
        r_max: outer,
        dr: t_min.sqrt() / 8.0,
        fine_until: if ball { outer } else { 1.25 * r_hi },
        h_max: 0.05,
        growth: 1.05,
    }
    .build()?;
    let prob = HeatProblem::new(dim, pot.as_ref(), phi.as_ref(), grid);
    let cutoff = match cfg.usize_or("sectors", 0)? {
        0 => SectorCutoff::Auto {
            tol: 1e-6,
            max: 4000,
        },
        m => SectorCutoff::Fixed(m),
    };
    let stab = cfg.f64_or("tol", 0.10)?;
    let base = assemble_diagonal(&prob, &times, &radii, cutoff)?;
    let report = check_bound(&base, kind)?;
    let doubled = check_bound(
        &extend_sectors(&prob, &base, 2 * base.sectors.max(1))?,
        kind,
    )?;
    let refined = check_bound(
        &assemble_diagonal(
            &prob.refined(),
            &times,
            &base.radii,
            SectorCutoff::Fixed(base.sectors),
        )?,
        kind,
    )?;

    let mut rep = Report::new(Scenario::HeatBound, vec!["t", "r", "K", "ratio"]);
    for (i, t) in base.times.iter().enumerate() {
        for (j, r) in base.radii.iter().enumerate() {
            rep.rows.push(vec![
                Cell::Num(*t),
                Cell::Num(*r),
                Cell::Num(base.values[i][j]),
                Cell::Num(report.ratio[i][j]),
            ]);
        }
    }
    rep.note("bound", kind.name());
    rep.note("sectors", base.sectors);
    rep.note("modes", base.mode_count);
    rep.num_note("sup", report.sup);
    rep.num_note("sup_refined", refined.sup);
    rep.num_note("sup_doubled_sectors", doubled.sup);
    rep.note(
        "argsup",
        format!("t = {:.6e}, r = {:.6e}", report.argsup.0, report.argsup.1),
    );
    if let Some(inf) = report.sharpness_inf {
        rep.num_note("sharpness_inf", inf);
    }
    if let Some(e) = report.exponent_sup {
        rep.num_note("exponent_sup", e);
    }
    rep.num_note("truncation_estimate", base.truncation_estimate);
    rep.checks.push(Check::new(
        "sup_finite",
        report.finite(),
        format!("sup = {:.6e}", report.sup),
    ));
    let cr = report.change(&refined);
    let cd = report.change(&doubled);
    rep.checks.push(Check::new(
        "refinement_stable",
        report.finite() && cr < stab,
        format!("relative change {cr:.3e} < {stab}"),
    ));
    rep.checks.push(Check::new(
        "sector_doubling_stable",
        report.finite() && cd < stab,
        format!("relative change {cd:.3e} < {stab}"),
    ));
    rep.checks.push(Check::new(
        "sector_cutoff",
        !base.cutoff_insufficient,
        format!("estimated tail {:.2e} <= 1e-2", base.truncation_estimate),
    ));
    if let (Some(e0), Some(er), Some(ed)) = (
        report.exponent_sup,
        refined.exponent_sup,
        doubled.exponent_sup,
    ) {
        let c = ((er - e0).abs().max((ed - e0).abs())) / e0;
        rep.checks.push(Check::new(
            "exponent_stable",
            e0.is_finite() && c < stab,
            format!("sup K_phi t^(N/2-alpha) = {e0:.6e}, relative change {c:.3e} < {stab}"),
        ));
    }
    if kind == BoundKind::Free {
        let mut worst: f64 = 0.0;
        for (i, t) in base.times.iter().enumerate() {
            for (j, r) in base.radii.iter().enumerate() {
                if *r >= 0.1 && outer - r >= 6.0 * t.sqrt() {
                    worst = worst.max((base.values[i][j] / free_kernel(dim, *t) - 1.0).abs());
                }
            }
        }
        rep.checks.push(Check::new(
            "free_kernel",
            worst <= 0.03,
            format!(
                "max deviation {worst:.3e} <= 3e-2 away from the origin and the outer boundary"
            ),
        ));
    }
    Ok(rep)
}

/// Random piecewise-linear sector coefficients on `nodes`, vanishing at both
/// ends.
fn random_expansion(rng: &mut ChaCha8Rng, nodes: &[f64], sectors: usize) -> Vec<Vec<f64>> {
    let (lo, hi) = (nodes[0], nodes[nodes.len() - 1]);
    (0..sectors)
        .map(|m| {
            let c = lo + (hi - lo) * rng.random_range(0.2..0.8);
            let w = (hi - lo) * rng.random_range(0.05..0.3);
            let amp = rng.random_range(0.2..1.0) / (1.0 + m as f64);
            let last = nodes.len() - 1;
            nodes
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    if i == 0 || i == last {
                        0.0
                    } else {
                        amp * (-((s - c) / w).powi(2)).exp()
                    }
                })
                .collect()
        })
        .collect()
}

fn run_identity_suite(cfg: &Config) -> CliResult<Report> {
    let dim = cfg.dimension()?;
    let a2 = dim.hardy_constant();
    let tol = cfg.f64_or("tol", 1e-6)?;
    let seed = cfg.usize_or("seed", 11)? as u64;
    let samples = cfg.usize_or("samples", 20)?.max(1);
    let k = cfg.usize_or("k", 1)?.max(1);
    let mu = cfg.f64_or("mu", 0.25)?;
    let lambda = cfg.signed_f64("lambda")?.unwrap_or(0.75 * a2);
    let mut rep = Report::new(
        Scenario::IdentitySuite,
        vec!["identity", "case", "value", "tolerance", "pass"],
    );
    let push = |rep: &mut Report, id: &str, case: String, value: f64, tol: f64, pass: bool| {
        rep.rows.push(vec![
            Cell::Text(id.into()),
            Cell::Text(case.clone()),
            Cell::Num(value),
            Cell::Num(tol),
            Cell::Text(if pass { "PASS" } else { "FAIL" }.into()),
        ]);
        rep.checks.push(Check::new(
            &format!("{id}[{case}]"),
            pass,
            format!("{value:.3e} vs {tol:.1e}"),
        ));
    };

    // ground-state transform for power, critical and log-refined profiles
    let cases = [
        (
            format!("lambda={lambda}"),
            RadialPotential::InverseSquare { lambda },
        ),
        (
            "critical".to_string(),
            RadialPotential::InverseSquare { lambda: a2 },
        ),
        (
            format!("k={k},mu={mu}"),
            RadialPotential::IteratedLogBounded { k, mu, scale: 1.0 },
        ),
    ];
    for (case, v) in &cases {
        let g = build_ground_state(dim, v, None)?;
        let c = ground_transform_check(dim, v, &g, 1e-6, 1.0, samples, seed)?;
        push(
            &mut rep,
            "ground_transform",
            case.clone(),
            c.max_relative_gap,
            tol,
            c.max_relative_gap <= tol,
        );
    }

    // sector identity: 2-D quadrature of the energy against the sector sum
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = range(-4.0, 0.0, 81);
    if matches!(dim.get(), 3 | 4) {
        let v = RadialPotential::InverseSquare { lambda: 0.5 * a2 };
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let coeffs = random_expansion(&mut rng, &nodes, 4);
            let direct = zonal_energy(dim, &nodes, &coeffs, Some(&v))?;
            let sum: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(m, c)| sector_energy(dim, &nodes, c, angular_eigenvalue(dim, m), Some(&v)))
                .sum();
            worst = worst.max((direct - sum).abs() / direct.abs());
        }
        push(
            &mut rep,
            "sector_sum",
            "zonal".into(),
            worst,
            tol,
            worst <= tol,
        );
    }

    // derivative rules for X_k against central differences
    for depth in 1..=4 {
        let mut worst: f64 = 0.0;
        for i in 0..100 {
            let r = (-12.0 + 11.9 * i as f64 / 99.0).exp();
            let a = 0.5 + 0.01 * i as f64;
            let h = 1e-5 * r;
            let fd = (crate::funcs::eval_xk(depth, r + h)?.powf(a)
                - crate::funcs::eval_xk(depth, r - h)?.powf(a))
                / (2.0 * h);
            let ex = eval_xk_derivative(depth, a, r)?;
            worst = worst.max((fd - ex).abs() / ex.abs());
        }
        push(
            &mut rep,
            "derivative_rule",
            format!("k={depth}"),
            worst,
            tol,
            worst <= tol,
        );
    }

    // Kelvin energy identity on random decaying profiles
    let mut worst: f64 = 0.0;
    let radii: Vec<f64> = range(0.0, 6.0, 2401).iter().map(|s| s.exp()).collect();
    for _ in 0..samples {
        let p = rng.random_range(0.0..2.0);
        let c = rng.random_range(-0.5..0.5);
        let rho = rng.random_range(1.0..4.0);
        let u: Vec<f64> = radii
            .iter()
            .map(|r| r.powf(-p) * (1.0 + c * r.ln().sin()) * (-r / rho).exp())
            .collect();
        let kc = kelvin_energy_check(dim, &radii, &u)?;
        worst = worst.max(kc.discrepancy);
    }
    // the two sides use different piecewise-linear interpolants, so they agree to O(h²)
    let ktol = tol.max(1e-5);
    push(
        &mut rep,
        "kelvin_energy",
        "random".into(),
        worst,
        ktol,
        worst <= ktol,
    );

    // improved Hardy positivity and the harmonic improvement for V_k^μ
    for depth in [1usize, 2] {
        let v = RadialPotential::IteratedLogBounded {
            k: depth,
            mu: 0.25,
            scale: 1.0,
        };
        let g = build_ground_state(dim, &v, None)?;
        let plain = sample_radial_form(dim, &v, None, 1e-8, 1.0, samples, seed)?;
        let near = sample_radial_form(dim, &v, Some(&g), 1e-8, 1.0, samples, seed + 1)?;
        let m = plain.min_ratio.min(near.min_ratio);
        push(
            &mut rep,
            "improved_hardy",
            format!("k={depth}"),
            m,
            1e-9,
            m >= -1e-9,
        );
        let mut ok = true;
        let mut worst = f64::INFINITY;
        for _ in 0..samples {
            let coeffs = random_expansion(&mut rng, &range(-8.0, 0.0, 161), 3);
            let h = harmonic_improvement_check(
                dim,
                &SectorExpansion {
                    log_nodes: range(-8.0, 0.0, 161),
                    coefficients: coeffs,
                },
                &v,
            )?;
            ok &= h.holds;
            worst = worst.min((h.lhs - h.rhs) / h.lhs.abs());
        }
        push(
            &mut rep,
            "harmonic_improvement",
            format!("k={depth}"),
            worst,
            1e-10,
            ok,
        );
    }
    Ok(rep)
}
