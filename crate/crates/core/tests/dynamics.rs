use latbs::dynamics::*;
use latbs::lattice::{LatticeBox, LatticeFn};
use latbs::quad::integrate;
use std::f64::consts::PI;

/// `J_n(x) = (1/pi) int_0^pi cos(n tau - x sin tau) d tau`.
fn bessel_integral(n: i64, x: f64) -> f64 {
    integrate(|tau: f64| (n as f64 * tau - x * tau.sin()).cos(), 0.0, PI, 1e-13, 1e-11) / PI
}

/// `sup_n |J_n(2t)|`, which sits just below `n = 2t`.
fn sup_oracle(t: f64) -> f64 {
    let c = (2.0 * t) as i64;
    (c - 40..=c + 10).map(|n| bessel_integral(n, 2.0 * t).abs()).fold(0.0, f64::max)
}

#[test]
fn one_dimensional_sup_norm_against_bessel_integrals() {
    let consts: Vec<f64> = [50.0, 100.0, 200.0].iter().map(|&t| sup_oracle(t) * t.cbrt()).collect();
    let c = consts.iter().sum::<f64>() / 3.0;
    let t = 100.0;
    let bx = LatticeBox::new(1, required_radius(t) + 5);
    let u = propagate(&LatticeFn::delta(bx, &[0]).unwrap(), t).unwrap();
    let sup = u.sup_norm();
    assert!((sup / (c * t.powf(-1.0 / 3.0)) - 1.0).abs() < 0.2);
    assert!((sup - sup_oracle(t)).abs() < 1e-9);
}

#[test]
fn decay_exponents_over_default_window() {
    let cfg = DispersiveConfig::default();
    let one = dispersive_fit(1, &cfg).unwrap();
    assert!((one.slope + 1.0 / 3.0).abs() < 0.05, "{}", one.slope);
    let two = dispersive_fit(2, &cfg).unwrap();
    assert!((two.slope + 2.0 / 3.0).abs() < 0.07, "{}", two.slope);
    for f in [&one, &two] {
        assert!(!f.inconclusive);
        assert!(f.envelope_constant.is_finite() && f.envelope_constant < 1.0);
        assert!(f.run.l2_norms.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }
}

#[test]
fn duality_symmetry() {
    let bx = LatticeBox::new(2, 20);
    let u0 = LatticeFn::delta(bx, &[0, 0]).unwrap();
    let a = propagate(&u0, 1.5).unwrap().sup_norm();
    let b = propagate(&u0, -1.5).unwrap().sup_norm();
    assert!((a - b).abs() < 1e-14);
}

#[test]
fn strichartz_delta_stabilizes_under_doubling() {
    let a = strichartz_delta(4, 8.0).unwrap();
    let b = strichartz_delta(4, 16.0).unwrap();
    assert!(b.value >= a.value);
    assert!(b.value / a.value <= 1.05, "{} {}", a.value, b.value);
}

#[test]
fn continuum_slope_matches_half_dimension() {
    let cfg = ContinuumConfig::default();
    let ts = latbs::fit::logspace(10.0, 1000.0, 9);
    for (d, k) in [(2, 1), (2, 0), (3, 1)] {
        let sups: Vec<f64> = ts.iter().map(|&t| continuum_dispersive(d, k, t, &cfg).unwrap().sup_norm).collect();
        let fit = latbs::fit::loglog_fit(&ts, &sups);
        assert!((fit.slope + d as f64 / 2.0).abs() < 0.05, "d={d} k={k}: {}", fit.slope);
    }
}
