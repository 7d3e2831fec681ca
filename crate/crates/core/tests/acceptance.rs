//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned
//! below. Runs the reference configurations under `configs/`; built
//! without the libtest harness so the report is always printed.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use hardylab::cli::{run, Cell, Config, Report, Scenario};

const FORMULA_REL_TOL: f64 = 1e-3;
const SANDWICH_TOL: f64 = 1e-3;
/// Just above the Hardy exponent the extrapolated values sit a few 10⁻⁶
/// above the plateau ((N-2)/2)², so a flat sweep can dip by that much.
const MONOTONE_SLACK: f64 = 1e-5;
const KELVIN_TOL: f64 = 2e-3;
const THRESHOLD_REL_TOL: f64 = 1e-2;
const MAZYA_SUP_TOL: f64 = 1e-3;
const IDENTITY_REL_TOL: f64 = 1e-6;
const FREE_KERNEL_REL_TOL: f64 = 0.03;
const HEAT_STABILITY: f64 = 0.10;
const RAYLEIGH_BUDGET: Duration = Duration::from_secs(60);
const THRESHOLD_BUDGET: Duration = Duration::from_secs(120);
const FREE_KERNEL_BUDGET: Duration = Duration::from_secs(120);
const HEAT_BUDGET: Duration = Duration::from_secs(600);

fn config_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> Config {
    let text =
        std::fs::read_to_string(config_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    Config::parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn exec(scenario: Scenario, cfg: &Config) -> Report {
    run(scenario, cfg).unwrap_or_else(|e| panic!("{}: {e}", scenario.name()))
}

fn num(c: &Cell) -> f64 {
    match c {
        Cell::Num(x) => *x,
        Cell::Int(n) => *n as f64,
        Cell::Text(t) => panic!("expected a number, got {t}"),
    }
}

fn note(r: &Report, key: &str) -> String {
    r.notes
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.clone())
        .unwrap_or_else(|| panic!("no note {key}"))
}

fn check(r: &Report, name: &str) -> bool {
    r.checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("no check {name}"))
        .pass
}

fn hardy_constant(n: f64) -> f64 {
    0.25 * (n - 2.0) * (n - 2.0)
}

/// `min(α(N-2-α), ((N-2)/2)²)` for α ≤ (N-2)/2 and the plateau beyond.
fn ball_value(n: f64, alpha: f64) -> f64 {
    if alpha <= 0.5 * (n - 2.0) {
        alpha * (n - 2.0 - alpha)
    } else {
        hardy_constant(n)
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn criterion_1_and_2() -> (Outcome, Outcome) {
    let start = Instant::now();
    let (mut worst, mut sandwich, mut monotone) = (0.0f64, true, true);
    let mut count = 0;
    for n in [3, 4, 5] {
        for domain in ["ball", "exterior"] {
            let r = exec(
                Scenario::Rayleigh,
                &load(&format!("rayleigh_n{n}_{domain}.cfg")),
            );
            let nf = n as f64;
            let rows: Vec<(f64, f64)> = r
                .rows
                .iter()
                .map(|row| (num(&row[0]), num(&row[1])))
                .collect();
            let below = rows.iter().filter(|(a, _)| *a < 0.5 * (nf - 2.0)).count();
            count = count.max(below.min(rows.len() - below));
            for &(alpha, v) in &rows {
                let exact = if domain == "ball" {
                    ball_value(nf, alpha)
                } else {
                    ball_value(nf, nf - 2.0 - alpha)
                };
                worst = worst.max((v - exact).abs() / exact);
                if domain == "ball" {
                    sandwich &= v >= alpha * (nf - 2.0 - alpha) - SANDWICH_TOL
                        && v <= hardy_constant(nf) + SANDWICH_TOL;
                }
            }
            if domain == "ball" {
                monotone &= check(&r, "monotone")
                    && rows.windows(2).all(|w| w[1].1 >= w[0].1 - MONOTONE_SLACK);
            }
        }
    }
    let t = start.elapsed();
    (
        Outcome {
            pass: worst <= FORMULA_REL_TOL && t <= RAYLEIGH_BUDGET && count >= 12,
            detail: format!("max relative error {worst:.2e} (tol {FORMULA_REL_TOL:.0e}), {count} alphas per regime, {:.1} s", t.as_secs_f64()),
        },
        Outcome {
            pass: sandwich && monotone,
            detail: format!("sandwich {sandwich}, nondecreasing {monotone} (slack {MONOTONE_SLACK:.0e})"),
        },
    )
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    for n in [3, 4] {
        let nm2 = n as f64 - 2.0;
        let alphas: Vec<String> = [0.3, 0.5, 0.7]
            .iter()
            .map(|f| format!("{}", f * nm2))
            .collect();
        let duals: Vec<String> = [0.3, 0.5, 0.7]
            .iter()
            .map(|f| format!("{}", (1.0 - f) * nm2))
            .collect();
        let ext = exec(
            Scenario::Rayleigh,
            &Config::parse(&format!(
                "N = {n}\ndomain = exterior\nalpha = {}\n",
                alphas.join(",")
            ))
            .unwrap(),
        );
        let ball = exec(
            Scenario::Rayleigh,
            &Config::parse(&format!(
                "N = {n}\ndomain = ball\nalpha = {}\n",
                duals.join(",")
            ))
            .unwrap(),
        );
        for (a, b) in ext.rows.iter().zip(&ball.rows) {
            worst = worst.max((num(&a[1]) - num(&b[1])).abs());
        }
    }
    Outcome {
        pass: worst <= KELVIN_TOL,
        detail: format!("max |mu(alpha) - lambda(N-2-alpha)| = {worst:.2e} (tol {KELVIN_TOL:.0e})"),
    }
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, k) in [("epsilon0_r4.cfg", 1.0), ("epsilon0_r3.cfg", 1.0)] {
        let r = exec(Scenario::Epsilon0, &load(name));
        let eig = num(&r.rows[0][1]);
        let sh = num(&r.rows[1][1]);
        let lower = hardy_constant(3.0) / k;
        let rel = (eig - sh).abs() / sh;
        pass &= rel <= THRESHOLD_REL_TOL && eig >= lower && sh >= lower;
        parts.push(format!("{name}: {eig:.6} vs {sh:.6} (gap {rel:.1e})"));
    }
    let t = start.elapsed();
    pass &= t <= THRESHOLD_BUDGET;
    Outcome {
        pass,
        detail: format!("{}, {:.1} s", parts.join("; "), t.as_secs_f64()),
    }
}

fn criterion_5() -> Outcome {
    let classical = exec(Scenario::Mazya, &load("mazya_classical.cfg"));
    let sup: f64 = note(&classical, "sup").parse().unwrap();
    let ground = exec(Scenario::Mazya, &load("mazya_ground_state.cfg"));
    let q2 = exec(Scenario::Mazya, &load("mazya_q2.cfg"));
    let gap = (sup - 1.0 / 3.0).abs();
    let gf = note(&ground, "finite") == "true";
    let q2f = note(&q2, "finite") == "true";
    Outcome {
        pass: gap <= MAZYA_SUP_TOL && gf && !q2f,
        detail: format!(
            "|sup - 1/3| = {gap:.2e}, ground-state weights finite {gf}, q = 2 finite {q2f}"
        ),
    }
}

fn identity_rows(n: usize) -> Report {
    exec(
        Scenario::IdentitySuite,
        &load(&format!("identity_n{n}.cfg")),
    )
}

fn criterion_6(reports: &[Report]) -> Outcome {
    let mut worst = 0.0f64;
    let mut seen = 0;
    let samples = [3, 4].map(|n| {
        load(&format!("identity_n{n}.cfg"))
            .usize_or("samples", 0)
            .unwrap()
    });
    for r in reports {
        for row in &r.rows {
            let Cell::Text(id) = &row[0] else { panic!() };
            if ["ground_transform", "sector_sum", "derivative_rule"].contains(&id.as_str()) {
                worst = worst.max(num(&row[2]));
                seen += 1;
            }
        }
    }
    Outcome {
        pass: worst <= IDENTITY_REL_TOL && seen == 16 && samples.iter().all(|&s| s >= 20),
        detail: format!(
            "{seen} identity cases, {} random functions each, worst relative gap {worst:.2e}",
            samples[0]
        ),
    }
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let r = exec(Scenario::HeatBound, &load("heat_free.cfg"));
    let mut worst = 0.0f64;
    let mut points = 0;
    for row in &r.rows {
        let (t, radius, k) = (num(&row[0]), num(&row[1]), num(&row[2]));
        if (0.1..=0.5).contains(&radius) {
            let free = (4.0 * std::f64::consts::PI * t).powf(-1.5);
            worst = worst.max((k / free - 1.0).abs());
            points += 1;
        }
    }
    let secs = start.elapsed();
    Outcome {
        pass: worst <= FREE_KERNEL_REL_TOL && points > 0 && secs <= FREE_KERNEL_BUDGET,
        detail: format!(
            "{points} points, worst deviation {worst:.2e} (tol {FREE_KERNEL_REL_TOL}), {:.1} s",
            secs.as_secs_f64()
        ),
    }
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, name) in [
        ("a", "heat_critical_ball.cfg"),
        ("b", "heat_subcritical_ball.cfg"),
        ("c", "heat_negative_whole.cfg"),
        ("d", "heat_critical_inner.cfg"),
        ("e", "heat_log_ball_n4.cfg"),
    ] {
        let r = exec(Scenario::HeatBound, &load(name));
        let sup: f64 = note(&r, "sup").parse().unwrap();
        let refined: f64 = note(&r, "sup_refined").parse().unwrap();
        let doubled: f64 = note(&r, "sup_doubled_sectors").parse().unwrap();
        let cr = (refined - sup).abs() / sup;
        let cd = (doubled - sup).abs() / sup;
        let mut ok = sup.is_finite() && cr < HEAT_STABILITY && cd < HEAT_STABILITY;
        if label == "c" {
            let alpha = hardylab::funcs::exponent_from_lambda(
                hardylab::funcs::Dimension::new(3).unwrap(),
                -0.75,
            )
            .unwrap();
            ok &= alpha == -0.5 && check(&r, "exponent_stable");
            parts.push(format!("(c) exponent sup {}", note(&r, "exponent_sup")));
        }
        pass &= ok;
        parts.push(format!(
            "({label}) sup {sup:.4e} refine {cr:.1e} double {cd:.1e}"
        ));
    }
    let t = start.elapsed();
    pass &= t <= HEAT_BUDGET;
    Outcome {
        pass,
        detail: format!("{}, {:.0} s", parts.join("; "), t.as_secs_f64()),
    }
}

fn criterion_9(reports: &[Report]) -> Outcome {
    let mut pass = true;
    let mut seen = 0;
    for r in reports {
        for row in &r.rows {
            let Cell::Text(id) = &row[0] else { panic!() };
            if id == "improved_hardy" || id == "harmonic_improvement" {
                seen += 1;
                pass &= matches!(&row[4], Cell::Text(p) if p == "PASS");
            }
        }
    }
    Outcome {
        pass: pass && seen == 8,
        detail: format!("{seen} cases over N in {{3,4}}, k in {{1,2}}, 100 functions each"),
    }
}

fn criterion_10() -> Outcome {
    let cases: Vec<(Scenario, String)> = vec![
        (Scenario::Rayleigh, "N = 4\nalpha = 0.1:1.9:7\n".into()),
        (Scenario::Epsilon0, "N = 3\nsigma = 1\n".into()),
        (Scenario::Shoot, "N = 3\nepsilon = 0.5\n".into()),
        (Scenario::Mazya, "N = 3\nweights = ground-state\n".into()),
        (
            Scenario::BestConstant,
            "N = 3\ngrid_sizes = 41,81\nrestarts = 4\nrmin = 1e-3\nRinf = 1e3\n".into(),
        ),
        (
            Scenario::HeatBound,
            "N = 3\nlambda = 3/16\ntmin = 4e-3\ntmax = 0.1\nt_points = 3\nradii_points = 4\n"
                .into(),
        ),
        (Scenario::IdentitySuite, "N = 4\nsamples = 10\n".into()),
    ];
    let mut differing = Vec::new();
    for (s, text) in &cases {
        let cfg = Config::parse(text).unwrap();
        let a = exec(*s, &cfg);
        let b = exec(*s, &cfg);
        if a.csv() != b.csv() || a.summary() != b.summary() {
            differing.push(s.name());
        }
    }
    // the binary writes exactly the rendered report
    let dir = std::env::temp_dir().join(format!("hardylab-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("m.cfg");
    std::fs::write(&cfg_path, "N = 3\n").unwrap();
    let mut files = Vec::new();
    for _ in 0..2 {
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_hardylab"))
            .args([
                "mazya",
                "--config",
                cfg_path.to_str().unwrap(),
                "--out",
                dir.to_str().unwrap(),
            ])
            .output()
            .unwrap()
            .status;
        assert!(status.success());
        files.push(std::fs::read(dir.join("mazya.csv")).unwrap());
    }
    let expected = exec(Scenario::Mazya, &Config::parse("N = 3\n").unwrap())
        .csv()
        .into_bytes();
    let _ = std::fs::remove_dir_all(&dir);
    let binary_ok = files[0] == files[1] && files[0] == expected;
    Outcome {
        pass: differing.is_empty() && binary_ok,
        detail: format!(
            "{} scenarios rerun, differing: {differing:?}, binary output reproducible {binary_ok}",
            cases.len()
        ),
    }
}

fn main() {
    let mut results: Vec<(usize, Outcome)> = Vec::new();
    let (c1, c2) = criterion_1_and_2();
    results.push((1, c1));
    results.push((2, c2));
    results.push((3, criterion_3()));
    results.push((4, criterion_4()));
    results.push((5, criterion_5()));
    let ids = [identity_rows(3), identity_rows(4)];
    results.push((6, criterion_6(&ids)));
    results.push((7, criterion_7()));
    results.push((8, criterion_8()));
    results.push((9, criterion_9(&ids)));
    results.push((10, criterion_10()));
    for (i, o) in &results {
        println!(
            "criterion {i:>2}: {} - {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    let failed: Vec<usize> = results
        .iter()
        .filter(|(_, o)| !o.pass)
        .map(|(i, _)| *i)
        .collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
