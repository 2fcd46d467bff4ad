use proptest::prelude::*;
use riesz_stab::certifier::{
    certify, compute_b_theorem2, compute_v0, empirical_bound_test, CertifyOptions, Classification, HarnessOptions,
};
use riesz_stab::minimizer::{
    e_sequence, minimize_configuration, riesz_gradient, spatial_histogram, Domain, MinimizeOptions,
};
use riesz_stab::riesz::{constant_cd, constant_csd, energy_integral_ball, hypersingular_lower_bound, riesz_energy};
use riesz_stab::{random_configuration, Configuration, CoreTailBounds, PairPotential, SamplingBox};

fn quick() -> MinimizeOptions {
    MinimizeOptions { starts: Some(6), ..MinimizeOptions::default() }
}

fn core_tail(d: usize, s: f64) -> PairPotential {
    let b = CoreTailBounds {
        core_exponent: s,
        core_strength: 1.0,
        core_radius: 1.0,
        tail_radius: 2.0,
        tail_strength: 1.0,
        tail_exponent: 1.5,
    };
    PairPotential::custom(d, b, "core-tail", move |r| {
        if r <= 1.0 {
            r.powf(-s)
        } else if r <= 2.0 {
            0.0
        } else {
            -r.powf(-(d as f64 + 1.5))
        }
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gradient_matches_central_differences(d in 1usize..=3, si in 0usize..3, n in 2usize..7, seed in any::<u64>()) {
        let s = [1.0, 2.0, 3.5][si];
        let gamma = random_configuration(n, &SamplingBox::new(d, 1.0).unwrap(), seed);
        let g = riesz_gradient(&gamma, s).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            for k in 0..d {
                let mut flat = gamma.as_flat().to_vec();
                flat[i * d + k] += 1e-6;
                let up = riesz_energy(&Configuration::from_flat(d, flat.clone()).unwrap(), s).unwrap();
                flat[i * d + k] -= 2e-6;
                let down = riesz_energy(&Configuration::from_flat(d, flat).unwrap(), s).unwrap();
                num += ((up - down) / 2e-6 - g[i][k]).powi(2);
                den += g[i][k].powi(2);
            }
        }
        prop_assert!((num / den).sqrt() <= 1e-4);
    }

    #[test]
    fn v0_monotone_in_truncation(lambda in 0.3f64..1.0, extra in 0usize..6) {
        let p = core_tail(2, 4.0);
        let t0 = (2.0 / lambda).ceil() as usize + 1;
        let a = compute_v0(&p, lambda, Some(t0 + extra)).unwrap();
        let b = compute_v0(&p, lambda, Some(t0 + extra + 3)).unwrap();
        prop_assert!(b.value >= a.value);
        prop_assert!(b.remainder <= a.remainder);
        prop_assert!(b.upper >= a.value);
    }

    #[test]
    fn theorem2_least_threshold(d in 1usize..=3, lambda in 0.2f64..2.0, frac in 0.01f64..0.99, scale in 0.0f64..20.0) {
        let cd = constant_cd(d, lambda, 1.0).unwrap();
        let eps = frac * cd;
        let v0 = scale * (cd - eps);
        let (n0, b) = compute_b_theorem2(d, lambda, 1.0, eps, v0).unwrap();
        prop_assert!((cd - eps) * (n0 as f64).ln() > v0 / 2.0);
        if n0 > 2 {
            prop_assert!((cd - eps) * ((n0 - 1) as f64).ln() <= v0 / 2.0);
        }
        prop_assert!(b >= v0 / 2.0);
    }

    #[test]
    fn nonnegative_potentials_never_unstable(d in 1usize..=3, height in 0.1f64..10.0, core in 0.2f64..2.0) {
        let p = PairPotential::square_well(d, height, core, 0.0, 0.0).unwrap();
        let c = certify(&p, &CertifyOptions::default()).unwrap();
        prop_assert_ne!(c.classification, Classification::Unstable);
    }
}

#[test]
fn hypersingular_bound_holds_for_minimizers() {
    let sq = Domain::cube(2, 1.0).unwrap();
    for n in 2..=12 {
        let r = minimize_configuration(n, &sq, 3.0, &quick()).unwrap();
        assert!(r.energy >= hypersingular_lower_bound(2, 3.0, 1.0, 1.0, n).unwrap(), "n = {n}");
    }
    let line = Domain::cube(1, 1.0).unwrap();
    for n in [2, 5, 9] {
        let r = minimize_configuration(n, &line, 2.5, &quick()).unwrap();
        // tight at n = 2 in one dimension
        let bound = hypersingular_lower_bound(1, 2.5, 1.0, 1.0, n).unwrap();
        assert!(r.energy >= bound * (1.0 - 1e-12), "n = {n}");
    }
}

#[test]
fn e_values_stay_below_ball_integral() {
    let ball = Domain::ball(3, 1.0).unwrap();
    for s in [0.5, 1.0, 1.5, 2.0] {
        let seq = e_sequence(&ball, s, &[3, 6, 12], &quick()).unwrap();
        let limit = energy_integral_ball(3, s, 1.0).unwrap();
        for (n, e) in &seq.values {
            assert!(*e <= limit, "s = {s}, n = {n}: {e} > {limit}");
        }
    }
}

#[test]
fn e_sequence_interval_increasing_and_deterministic() {
    let line = Domain::cube(1, 1.0).unwrap();
    let a = e_sequence(&line, 2.0, &[2, 4, 8], &quick()).unwrap();
    assert!(a.monotone());
    let b = e_sequence(&line, 2.0, &[8, 8], &quick()).unwrap();
    assert_eq!(b.values[0].1.to_bits(), b.values[1].1.to_bits());
    assert_eq!(b.values[0].1.to_bits(), a.values[2].1.to_bits());
}

#[test]
fn two_points_are_centrally_symmetric() {
    for dom in [Domain::cube(2, 1.0).unwrap(), Domain::ball(3, 2.0).unwrap(), Domain::cube(3, 0.5).unwrap()] {
        for s in [1.0, 2.5] {
            let r = minimize_configuration(2, &dom, s, &quick()).unwrap();
            let (x, y) = (r.configuration.point(0), r.configuration.point(1));
            let off: f64 = x.iter().zip(y).map(|(a, b)| (a + b).powi(2)).sum::<f64>().sqrt();
            assert!(off <= 1e-6, "{dom:?} s = {s}: |x + y| = {off}");
        }
    }
}

#[test]
fn uniform_sample_fills_subcells_evenly() {
    let n = 8000;
    let b = SamplingBox::new(3, 1.0).unwrap().with_origin(vec![-0.5; 3]).unwrap();
    let gamma = random_configuration(n, &b, 11);
    let h = spatial_histogram(&gamma, &Domain::cube(3, 1.0).unwrap(), 2).unwrap();
    let sigma = (0.125 * 0.875 / n as f64).sqrt();
    assert_eq!(h.fractions.len(), 8);
    for f in &h.fractions {
        assert!((f - 0.125).abs() <= 5.0 * sigma, "{f}");
    }
}

// desk-scale proxies for weak-star convergence; thresholds are heuristic
#[test]
fn proxy_boundary_shell_holds_most_points() {
    let ball = Domain::ball(3, 1.0).unwrap();
    let r = minimize_configuration(40, &ball, 1.0, &MinimizeOptions::default()).unwrap();
    let h = spatial_histogram(&r.configuration, &ball, 10).unwrap();
    assert!(*h.fractions.last().unwrap() >= 0.95);
}

#[test]
fn proxy_hypersingular_points_spread_evenly() {
    let sq = Domain::cube(2, 1.0).unwrap();
    let r = minimize_configuration(36, &sq, 3.0, &MinimizeOptions::default()).unwrap();
    let h = spatial_histogram(&r.configuration, &sq, 2).unwrap();
    let max = h.fractions.iter().cloned().fold(f64::MIN, f64::max);
    let min = h.fractions.iter().cloned().fold(f64::MAX, f64::min);
    assert!(max - min <= 0.15, "{:?}", h.fractions);
}

#[test]
fn sss_constant_holds_pointwise() {
    for (d, s) in [(2usize, 4.0), (1, 2.0), (3, 5.0)] {
        let p = core_tail(d, s);
        let c = certify(&p, &CertifyOptions::default()).unwrap();
        assert_eq!(c.classification, Classification::SSS, "d = {d}, s = {s}");
        let lambda = c.lambda.unwrap();
        let v0 = c.v0.unwrap().upper;
        let csd = constant_csd(d, s, lambda, 1.0).unwrap();
        for n in 2..=1000 {
            let nf = n as f64;
            let pw = nf.powf(1.0 + s / d as f64);
            assert!(c.a * pw <= csd * pw - 0.5 * v0 * nf * nf + 1e-9 * csd * pw, "n = {n}");
        }
    }
}

#[test]
fn shipped_certificates_survive_the_harness() {
    let pots = vec![
        core_tail(2, 4.0),
        core_tail(1, 2.0),
        PairPotential::square_well(2, 3.0, 1.0, 0.0, 0.0).unwrap(),
        PairPotential::square_well(2, 3.0, 1.0, 0.01, 1.5).unwrap(),
        PairPotential::lj_like(3, 6.0, 1.0, 1.0, Some(2.5)).unwrap(),
    ];
    for p in pots {
        let c = certify(&p, &CertifyOptions::default()).unwrap();
        assert!(c.classification.is_certified(), "{}: {}", p.label(), c.classification);
        let r = empirical_bound_test(&p, &c, &HarnessOptions::default()).unwrap();
        assert_eq!(r.violations, 0, "{}: {:?}", p.label(), r.counterexample);
        assert!(r.min_slack.unwrap() >= -1e-9);
    }
}

#[test]
fn inflated_certificate_is_caught() {
    let p = core_tail(2, 4.0);
    let mut c = certify(&p, &CertifyOptions::default()).unwrap();
    assert!(c.v0.unwrap().upper > 0.0);
    c.a *= 10.0;
    let r = empirical_bound_test(&p, &c, &HarnessOptions::default()).unwrap();
    assert!(r.violations > 0);
    let ce = r.counterexample.unwrap();
    assert!(ce.energy < ce.bound);
}

#[test]
fn harness_is_deterministic() {
    let p = PairPotential::square_well(2, 3.0, 1.0, 0.0, 0.0).unwrap();
    let c = certify(&p, &CertifyOptions::default()).unwrap();
    let o = HarnessOptions { trials: 500, ..HarnessOptions::default() };
    assert_eq!(empirical_bound_test(&p, &c, &o).unwrap(), empirical_bound_test(&p, &c, &o).unwrap());
}
