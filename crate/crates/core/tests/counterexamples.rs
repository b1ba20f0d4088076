use latbs::counterexamples::*;
use latbs::lattice::{lorentz_norm, LatticeBox, Potential};
use latbs::quad::integrate;
use latbs::resolvent::WeightedNormConfig;
use std::f64::consts::PI;

#[test]
fn knapp_slopes_default_ladder() {
    let r = knapp_family(&KnappConfig::default()).unwrap();
    println!("a = {} slopes Q {} M {} ratio {}", r.a, r.slope_q, r.slope_m, r.slope_ratio);
    assert!(r.tube_inclusion && r.a_auto);
    assert!((r.slope_q - 2.0).abs() < 0.15, "{}", r.slope_q);
    assert!((r.slope_m - 10.0 / 3.0).abs() < 0.2, "{}", r.slope_m);
    assert_eq!(r.ratio_unbounded, r.predicted_unbounded);
}

#[test]
fn knapp_ratio_dichotomy_in_p() {
    for p in [3.0, 8.0] {
        let cfg = KnappConfig { p, eps: vec![0.2, 0.1, 0.05], mesh: 64, ..Default::default() };
        let r = knapp_family(&cfg).unwrap();
        assert_eq!(r.ratio_unbounded, r.predicted_unbounded, "p = {p}: {}", r.slope_ratio);
    }
}

#[test]
fn anisotropic_weight_is_weak_lp() {
    // sup_t t |{w > t}|^{1/p} stays bounded as the box grows.
    let w = Potential::AnisotropicWeight { p: 6.0 };
    let vals = |r: usize| -> f64 {
        let bx = LatticeBox::new(3, r);
        lorentz_norm(&w.sample(&bx), 6.0, f64::INFINITY).unwrap()
    };
    let (a, b) = (vals(20), vals(40));
    assert!(b / a < 1.1, "{a} {b}");
}

#[test]
fn flatband_identity() {
    let t = flatband_kernel(flatband::DEFAULT_RHO, 50).unwrap();
    assert!(t.diagonal_std < 1e-10 * t.diagonal_mean);
    assert!(t.factorization_error < 1e-12);
    for s in 20..=100usize {
        assert!(t.j_abs[s] < 1e-4 * t.j_abs[0], "t = {s}: {}", t.j_abs[s] / t.j_abs[0]);
    }
    // Finite-order decay check: faster than |t|^-6 on the sampled range.
    let env = |from: usize| t.j_abs[from..].iter().cloned().fold(0.0, f64::max);
    let order = (env(40) / env(10)).ln() / 4f64.ln();
    assert!(order < -6.0, "{order}");
}

#[test]
fn flatband_profile_and_log_growth() {
    let rep = flatband_weighted_blowup(&[(vec![0, 0], 1.0)], &BlowupConfig::default()).unwrap();
    assert!((rep.profile_slope + 0.5).abs() < 0.05, "{}", rep.profile_slope);
    // Oracle: the partial sums grow like ln S times sum_t <t>^-2 |J(t)|^2.
    let cut = FlatCutoff::new(flatband::DEFAULT_RHO).unwrap();
    let c: f64 = (-40i64..=40).map(|t| flat_j(&cut, t).norm_sqr() / (1.0 + (t * t) as f64)).sum();
    assert!((rep.log_slope / c - 1.0).abs() < 0.05, "{} vs {c}", rep.log_slope);
}

#[test]
fn threshold_series() {
    let mus: Vec<f64> = latbs::fit::logspace(1e-2, 1e-5, 7);
    let two = threshold_divergence(2, &Potential::point_mass(vec![0, 0], -1.0), &[(vec![0, 0], 1.0)], &mus).unwrap();
    // Oracle constant near the elliptic threshold, h0 ~ 4 pi^2 |xi|^2.
    let oracle = 1.0 / (2.0 * PI);
    assert!((two.log_slope / oracle - 1.0).abs() < 0.05, "{}", two.log_slope);
    assert!(two.monotone);
    let three = threshold_divergence(3, &Potential::point_mass(vec![0, 0, 0], -1.0), &[(vec![0, 0, 0], 1.0)], &mus[..4]).unwrap();
    assert!(three.ratio <= 1.5 && three.growth == Growth::Bounded, "{}", three.ratio);
}

#[test]
fn sobolev_refinement() {
    let t = sobolev_blowup_probe(&SobolevConfig::default()).unwrap();
    for (s, d) in &t.drift {
        println!("s = {s}: drift {d}");
    }
    let drift = |s: f64| t.drift.iter().find(|x| x.0 == s).unwrap().1;
    assert!(drift(0.0).abs() < 1e-3);
    assert!(drift(0.9).abs() < 0.05);
}

#[test]
fn ultra_surface_log_divergence() {
    let eps = latbs::fit::logspace(1e-2, 1e-8, 7);
    let s = ultra_surface_form(3, &UltraProfile::Singular { radius: 1.0 }, &eps).unwrap();
    assert!((s.log_slope / (PI / 2f64.sqrt()) - 1.0).abs() < 0.02, "{}", s.log_slope);
    // Independent midpoint rule in ln r for the d = 3 radial integral.
    let e = 1e-4;
    let n = 200_000;
    let (a, b) = ((1e-12f64).ln(), 0.0f64);
    let h = (b - a) / n as f64;
    let mid: f64 = (0..n)
        .map(|i| {
            let r = (a + (i as f64 + 0.5) * h).exp();
            let rho = (2.0 * r * r + e).sqrt();
            let chi = latbs::special::BumpProfile::eval(rho / 4.0);
            r * r * chi * chi / (rho * 2.0 * (r * r + e).sqrt()) * h
        })
        .sum();
    let want = 2.0 * 2.0 * PI * mid;
    assert!((ultra_surface_value(3, &UltraProfile::Singular { radius: 1.0 }, e) / want - 1.0).abs() < 1e-6);
    let bounded = ultra_surface_form(3, &UltraProfile::Bounded { inner: 0.5, outer: 1.0 }, &eps).unwrap();
    let vmax = bounded.values.iter().cloned().fold(0.0, f64::max);
    assert!(vmax <= 1.05 * bounded.values[0]);
    let _ = integrate(|x: f64| x, 0.0, 1.0, 1e-12, 1e-12);
}

#[test]
fn decay_blowup_matches_scaling_exponent() {
    let cfg = WeightedNormConfig::default();
    for alpha in [0.5, 0.75] {
        let r = decay_blowup(3, alpha, &[0.15, 0.1, 0.07], 60, &cfg).unwrap();
        println!("alpha {alpha}: slope {} norms {:?}", r.slope, r.norms);
        assert!((r.slope + r.scaling_exponent).abs() < 0.2, "{}", r.slope);
    }
}
