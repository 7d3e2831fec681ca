use hardylab::funcs::{
    build_ground_state, eval_xk, eval_xk_derivative, exponent_from_lambda, kelvin_energy_check,
    Dimension, IteratedLog, Profile, RadialPotential,
};
use hardylab::grids::{assemble, quadrature, FormSpec, Measure, RadialGrid};
use hardylab::mazya::{mazya_sup, MazyaOptions, PowerWeights};
use proptest::prelude::*;

fn dim(n: usize) -> Dimension {
    Dimension::new(n).unwrap()
}

#[test]
fn xk_fixed_points() {
    for k in 1..=6 {
        assert_eq!(eval_xk(k, 1.0).unwrap(), 1.0);
        let l = IteratedLog::new(k, 2.0).unwrap();
        for r in [1e-9, 0.3, 1.0, 1.999, 2.0] {
            assert_eq!(l.y_tilde(r).unwrap(), 1.0, "k={k} r={r}");
        }
    }
}

#[test]
fn xk_derivative_rule_matches_differences() {
    for k in 1..=4 {
        for a in [-1.0, -0.5, 1.0, 2.0] {
            for i in 0..100 {
                let r = (-14.0 + 13.9 * i as f64 / 99.0).exp();
                let h = 1e-5 * r;
                let fd = (eval_xk(k, r + h).unwrap().powf(a) - eval_xk(k, r - h).unwrap().powf(a))
                    / (2.0 * h);
                let ex = eval_xk_derivative(k, a, r).unwrap();
                assert!(
                    (fd - ex).abs() <= 1e-6 * ex.abs(),
                    "k={k} a={a} r={r}: {fd} vs {ex}"
                );
            }
        }
    }
}

#[test]
fn closed_form_ground_states_have_small_weak_residual() {
    let s: Vec<f64> = (0..=400).map(|i| -12.0 + 12.0 * i as f64 / 400.0).collect();
    for n in [3, 4, 5] {
        let d = dim(n);
        let a2 = d.hardy_constant();
        for v in [
            RadialPotential::InverseSquare { lambda: a2 },
            RadialPotential::InverseSquare { lambda: 0.5 * a2 },
            RadialPotential::InverseSquare { lambda: -1.0 },
            RadialPotential::IteratedLogBounded {
                k: 1,
                mu: 0.25,
                scale: 1.0,
            },
            RadialPotential::IteratedLogBounded {
                k: 2,
                mu: 0.1,
                scale: 1.0,
            },
        ] {
            let g = build_ground_state(d, &v, None).unwrap();
            let res = g.weak_residual(&v, &s).unwrap();
            assert!(res < 1e-9, "N={n} {v:?}: {res}");
        }
    }
}

#[test]
fn kelvin_discrepancy_converges() {
    let d = dim(3);
    let mut prev: Option<f64> = None;
    for n in [201, 401, 801, 1601] {
        let radii: Vec<f64> = (0..n)
            .map(|i| (6.0 * i as f64 / (n - 1) as f64).exp())
            .collect();
        let u: Vec<f64> = radii
            .iter()
            .map(|r| r.powf(-0.7) * (-r / 2.0).exp())
            .collect();
        let e = kelvin_energy_check(d, &radii, &u).unwrap().discrepancy;
        if let Some(p) = prev {
            let order = (p / e).log2();
            assert!(order >= 1.0, "n={n}: order {order}");
        }
        prev = Some(e);
    }
}

#[test]
fn quadrature_is_second_order() {
    let d = dim(3);
    // ∫_{r<1} e^{-r} dx over the ball with the origin cut at e^{-30}
    let exact = {
        let inner = 2.0 - 5.0 * (-1f64).exp();
        d.surface_area() * inner
    };
    let mut errs = Vec::new();
    for n in [101, 201, 401] {
        let g = RadialGrid::uniform(-30.0, 0.0, n).unwrap();
        let vals: Vec<f64> = g.nodes().iter().map(|r| (-0.5 * r).exp()).collect();
        errs.push((quadrature(d, &g, &vals, Measure::Volume).unwrap() - exact).abs());
    }
    for w in errs.windows(2) {
        assert!((w[0] / w[1]).log2() >= 1.9, "{errs:?}");
    }
}

#[test]
fn assembled_quotient_matches_lumped_quadrature() {
    let d = dim(3);
    let lambda = 0.2;
    let v = RadialPotential::InverseSquare { lambda };
    let den = Profile::hardy();
    let g = RadialGrid::uniform(-8.0, 0.0, 161).unwrap();
    let op = assemble(
        &g,
        &FormSpec {
            dim: d,
            potential: Some(&v),
            sector: 0.0,
            weight: None,
            denominator: &den,
        },
    )
    .unwrap();
    let s = g.log_nodes();
    let tw = g.trapezoid_weights();
    let mut seed = 12345u64;
    for _ in 0..20 {
        let u: Vec<f64> = (0..s.len())
            .map(|i| {
                seed = seed
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                if i == 0 || i == s.len() - 1 {
                    0.0
                } else {
                    (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.3
                }
            })
            .collect();
        let mut num = 0.0;
        for e in 0..s.len() - 1 {
            let h = s[e + 1] - s[e];
            num += ((u[e + 1] - u[e]) / h).powi(2) * (s[e + 1].exp() - s[e].exp());
        }
        let mut den_sum = 0.0;
        for i in 1..s.len() - 1 {
            let m = tw[i] * s[i].exp() * u[i] * u[i];
            num -= lambda * m;
            den_sum += m;
        }
        let q = op.quotient_u(&u);
        assert!(
            (q - num / den_sum).abs() <= 1e-10 * q.abs().max(1.0),
            "{q} vs {}",
            num / den_sum
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn xk_increasing_in_t_and_k(k in 1usize..6, t1 in 1e-12f64..0.999, f in 0.01f64..0.99) {
        let t0 = t1 * f;
        let a = eval_xk(k, t0).unwrap();
        let b = eval_xk(k, t1).unwrap();
        prop_assert!(a < b);
        prop_assert!(eval_xk(k + 1, t1).unwrap() > b);
    }

    #[test]
    fn exponent_round_trip(n in 3usize..9, frac in 0.0f64..1.0) {
        let d = dim(n);
        let alpha = frac * d.hardy_exponent();
        let back = exponent_from_lambda(d, alpha * (d.as_f64() - 2.0 - alpha)).unwrap();
        prop_assert!((back - alpha).abs() <= 1e-12 * d.hardy_exponent().max(1.0) + 1e-12, "{back} vs {alpha}");
    }

    #[test]
    fn negative_exponents_round_trip(n in 3usize..9, alpha in -5.0f64..0.0) {
        let d = dim(n);
        let back = exponent_from_lambda(d, alpha * (d.as_f64() - 2.0 - alpha)).unwrap();
        prop_assert!((back - alpha).abs() <= 1e-10 * alpha.abs().max(1.0));
    }

    #[test]
    fn mazya_scaling(ac in 0.1f64..10.0, bc in 0.1f64..10.0, scale in 0.1f64..10.0, n in 3usize..7) {
        let base = PowerWeights { a_coefficient: ac, b_coefficient: bc, ..PowerWeights::classical(dim(n)) };
        let q = 2.0 * n as f64 / (n as f64 - 2.0);
        let opts = MazyaOptions { extensions: 0, ..MazyaOptions::default() };
        let s0 = mazya_sup(&base, q, &opts).unwrap().sup_value;
        let sa = mazya_sup(&PowerWeights { a_coefficient: scale * ac, ..base }, q, &opts).unwrap().sup_value;
        let sb = mazya_sup(&PowerWeights { b_coefficient: scale * bc, ..base }, q, &opts).unwrap().sup_value;
        prop_assert!((sa / s0 - scale.powf(-q / 2.0)).abs() <= 1e-10 * scale.powf(-q / 2.0));
        prop_assert!((sb / s0 - scale).abs() <= 1e-10 * scale);
    }
}
