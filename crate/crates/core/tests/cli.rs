use std::path::Path;
use std::process::{Command, Output};

use hardylab::cli::{CliError, Config};
use hardylab::Error;

fn run(scenario: &str, config: &str, dir: &Path) -> Output {
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_hardylab"))
        .args([
            scenario,
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn empty_config_prints_usage() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("rayleigh", "# nothing here\n\n", dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("usage: hardylab"));
}

#[test]
fn validation_errors_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    for (cfg, needle) in [
        ("N = 3\nfoo = 1\n", "unknown key `foo`"),
        ("N = 3\nN = 4\n", "duplicate key `N`"),
        ("N = 2\n", "`N` must be at least 3"),
        ("N = 3\ntmin = -1\n", "`tmin` must be positive"),
        ("N = 3\nalpha = 0.5:0.1:4\n", "bad `alpha` range"),
        ("N = three\n", "`N` must be a nonnegative integer"),
        ("N = 3\nR\n", "expected `key = value`"),
    ] {
        let o = run("rayleigh", cfg, dir.path());
        assert_eq!(o.status.code(), Some(1), "{cfg}");
        assert!(stderr(&o).contains(needle), "{cfg}: {}", stderr(&o));
    }
    let o = run("shoot", "N = 3\n", dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing key `epsilon`"));
    let o = run(
        "heat-bound",
        "N = 3\npotential = log-bounded\ndomain = whole\n",
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn failed_check_exits_with_three_and_still_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        "rayleigh",
        "N = 3\nalpha = 0.2,0.4\ntol = 1e-14\n",
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("check failed: formula"));
    let summary = std::fs::read_to_string(dir.path().join("out/summary.txt")).unwrap();
    assert!(summary.lines().any(|l| l.starts_with("FAIL formula")));
    assert!(summary.lines().any(|l| l.starts_with("PASS sandwich")));
}

#[test]
fn solver_faults_map_to_exit_two() {
    assert_eq!(CliError::from(Error::NoConvergence("x".into())).code(), 2);
    assert_eq!(CliError::from(Error::UnderResolved("x".into())).code(), 2);
    assert_eq!(CliError::from(Error::Invalid("x".into())).code(), 1);
}

#[test]
fn csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("rayleigh", "N = 4\nalpha = 0.5,1.5\n", dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("out/rayleigh.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "alpha,lambda_computed,lambda_formula,abs_err");
    assert_eq!(lines.len(), 3);
    let cells: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(cells[0], "1.50000000000000e0");
    assert_eq!(cells[2], "1.00000000000000e0");
    // 15 significant digits in every numeric cell
    for c in &cells {
        let mantissa = c.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.len(), 16, "{c}");
    }
    // no stray temporary files
    let names: Vec<String> = std::fs::read_dir(dir.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert!(names.iter().all(|n| !n.ends_with(".tmp")), "{names:?}");
}

#[test]
fn reruns_are_byte_identical() {
    for (scenario, cfg) in [
        ("identity-suite", "N = 3\nsamples = 10\nseed = 5\n"),
        (
            "best-constant",
            "N = 3\ngrid_sizes = 41,81\nrestarts = 3\nrmin = 1e-3\nRinf = 1e3\n",
        ),
        ("mazya", "N = 4\n"),
    ] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run(scenario, cfg, a.path());
        run(scenario, cfg, b.path());
        for f in [format!("{scenario}.csv"), "summary.txt".to_string()] {
            let x = std::fs::read(a.path().join("out").join(&f)).unwrap();
            let y = std::fs::read(b.path().join("out").join(&f)).unwrap();
            assert!(!x.is_empty());
            assert_eq!(x, y, "{scenario}/{f} differs between runs");
        }
    }
}

#[test]
fn help_lists_every_scenario() {
    let o = Command::new(env!("CARGO_BIN_EXE_hardylab"))
        .arg("--help")
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&o.stdout);
    for s in [
        "rayleigh",
        "epsilon0",
        "shoot",
        "mazya",
        "best-constant",
        "heat-bound",
        "identity-suite",
    ] {
        assert!(text.contains(s), "{s} missing from help");
    }
}

#[test]
fn config_parsing_accepts_fractions_and_comments() {
    let c = Config::parse("N = 4   # dimension\nlambda = -3/4\n\n# trailing\nalpha = 0.1:0.3:3\n")
        .unwrap();
    assert_eq!(c.signed_f64("lambda").unwrap(), Some(-0.75));
    let a = c.alphas((1.0, 2.0, 2)).unwrap();
    assert_eq!(a.len(), 3);
    assert!((a[1] - 0.2).abs() < 1e-15);
    assert_eq!(c.dimension().unwrap().get(), 4);
}
