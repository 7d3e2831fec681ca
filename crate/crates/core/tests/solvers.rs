use hardylab::funcs::{Dimension, Profile};
use hardylab::grids::{make_grid, RadialDomain};
use hardylab::rayleigh::{
    ball_formula, converged_quotient, epsilon0, exterior_formula, solve_quotient, RayleighProblem,
    ThresholdVariant, TruncationStudy,
};
use hardylab::shooting::{epsilon0_by_bisection, shoot, ShootingOptions};
use proptest::prelude::*;

fn dim(n: usize) -> Dimension {
    Dimension::new(n).unwrap()
}

fn ball(d: Dimension, alpha: f64) -> f64 {
    converged_quotient(
        &RayleighProblem::hardy(d, RadialDomain::Ball { radius: 1.0 }, alpha),
        &TruncationStudy::default(),
    )
    .unwrap()
    .value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ball_sandwich(n in 3usize..6, frac in 0.02f64..0.98) {
        let d = dim(n);
        let alpha = frac * (d.as_f64() - 2.0);
        let v = ball(d, alpha);
        prop_assert!(v >= alpha * (d.as_f64() - 2.0 - alpha) - 1e-3);
        prop_assert!(v <= d.hardy_constant() + 1e-3);
    }
}

#[test]
fn kink_at_the_hardy_exponent() {
    for n in [3, 4, 5] {
        let d = dim(n);
        let a = d.hardy_exponent();
        let below: Vec<f64> = (1..=6).map(|i| ball(d, a * i as f64 / 6.0)).collect();
        for w in below.windows(2) {
            assert!(w[1] > w[0], "N={n}: not increasing below a: {below:?}");
        }
        for alpha in [1.2 * a, 1.5 * a, 1.9 * a] {
            let v = ball(d, alpha);
            assert!(
                (v - d.hardy_constant()).abs() <= 1e-3 * d.hardy_constant(),
                "N={n} alpha={alpha}: {v}"
            );
        }
    }
}

#[test]
fn kelvin_duality_on_the_unit_ball() {
    let study = TruncationStudy::default();
    for n in [3, 4] {
        let d = dim(n);
        for f in [0.3, 0.5, 0.7] {
            let alpha = f * (d.as_f64() - 2.0);
            let ext = RayleighProblem::hardy(
                d,
                RadialDomain::Exterior {
                    radius: 1.0,
                    truncation: 10.0,
                },
                alpha,
            );
            let mu = converged_quotient(&ext, &study).unwrap().value;
            let lam = ball(d, d.as_f64() - 2.0 - alpha);
            assert!(
                (mu - lam).abs() <= 2e-3,
                "N={n} alpha={alpha}: {mu} vs {lam}"
            );
            assert!((mu - exterior_formula(d, alpha)).abs() <= 1e-3 * mu);
        }
    }
}

#[test]
fn refinement_converges_monotonically_at_first_order_or_better() {
    let d = dim(3);
    let alpha = 0.3;
    let p = RayleighProblem::hardy(d, RadialDomain::Ball { radius: 1.0 }, alpha);
    let mut g = make_grid(RadialDomain::Ball { radius: 1.0 }, 41, 1e-2).unwrap();
    let mut vals = Vec::new();
    for _ in 0..5 {
        vals.push(solve_quotient(&p, &g).unwrap().value);
        g = g.refine();
    }
    // the lumped mass makes the discrete value approach from below
    for w in vals.windows(2) {
        assert!(w[1] >= w[0] - 1e-12, "{vals:?}");
    }
    // successive differences shrink at least geometrically with ratio 1/2
    for w in vals.windows(3) {
        let order = ((w[0] - w[1]) / (w[1] - w[2])).log2();
        assert!(order >= 1.0, "order {order}: {vals:?}");
    }
    // the inner cut at r = 10⁻² keeps this above the formula
    assert!(vals[4] > ball_formula(d, alpha));
}

#[test]
fn thresholds_agree_across_methods() {
    let d = dim(3);
    let opts = ShootingOptions::default();
    for sigma in [2.0, 1.0] {
        let f = Profile::power(1.0, -2.0 - sigma);
        let e = epsilon0(d, &f, ThresholdVariant::Base, &TruncationStudy::default())
            .unwrap()
            .value;
        let s = epsilon0_by_bisection(d, &f, 0.5, 1e-9, &opts).unwrap();
        assert!((e - s).abs() <= 1e-2 * s, "sigma={sigma}: {e} vs {s}");
        let lower = ThresholdVariant::Base.lower_bound(d, &f).unwrap();
        assert!(e >= lower && s >= lower);
    }
}

#[test]
fn subcritical_profiles_are_positive_and_decreasing() {
    let d = dim(3);
    let f = Profile::power(1.0, -4.0);
    let opts = ShootingOptions::default();
    let eps0 = epsilon0_by_bisection(d, &f, 0.5, 1e-9, &opts).unwrap();
    let mut limits = Vec::new();
    for i in 0..8 {
        let eps = eps0 * (0.1 + 0.85 * i as f64 / 7.0);
        let r = shoot(d, eps, &f, 0.5, &opts).unwrap();
        assert!(r.positive && !r.supercritical(), "eps={eps}");
        let p = &r.profile;
        for j in 1..p.psi.len() {
            assert!(
                p.psi[j] < p.psi[j - 1],
                "psi not decreasing at r = {}",
                p.s[j].exp()
            );
            assert!(
                p.flux[j] <= p.flux[j - 1] + 1e-9 * p.flux[j - 1].abs(),
                "flux increases at r = {}",
                p.s[j].exp()
            );
        }
        limits.push(r.limit_estimate);
    }
    for w in limits.windows(2) {
        assert!(w[1] <= w[0], "limit not monotone in epsilon: {limits:?}");
    }
    assert!(shoot(d, 1.05 * eps0, &f, 0.5, &opts)
        .unwrap()
        .supercritical());
}

#[test]
fn bisection_is_stable_under_truncation_doubling() {
    let d = dim(3);
    for sigma in [2.0, 1.0] {
        let f = Profile::power(1.0, -2.0 - sigma);
        let a = epsilon0_by_bisection(d, &f, 0.5, 1e-9, &ShootingOptions::default()).unwrap();
        let b = epsilon0_by_bisection(
            d,
            &f,
            0.5,
            1e-9,
            &ShootingOptions {
                r_inf: 2e4,
                ..ShootingOptions::default()
            },
        )
        .unwrap();
        assert!((a - b).abs() <= 1e-6 * a, "sigma={sigma}: {a} vs {b}");
    }
}
