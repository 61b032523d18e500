mod common;

use common::{bump, gauss};
use hoch_core::dynamics::*;
use hoch_core::spectral::{helmholtz_convolve, Grid, RealField};
use hoch_core::weights::*;
use std::f64::consts::PI;

#[test]
fn unit_weight_is_admissible_with_zero_constant() {
    let w = StandardWeight::unit();
    let r = admissibility_check(&w, &Grid::new(20.0, 512).unwrap().points());
    assert_eq!(r.a_min, 0.0);
    assert!(r.admissible());
    assert!(lp_condition(&w, 1.0) && lp_condition(&w, 2.0) && lp_condition(&w, f64::INFINITY));
}

#[test]
fn squared_algebraic_weight_has_constant_two() {
    let w = StandardWeight::algebraic(2.0);
    let points: Vec<f64> = (-400..=400).map(|i| i as f64 * 0.05).collect();
    let r = admissibility_check(&w, &points);
    assert!((r.a_min - 2.0).abs() < 1e-12);
    assert!(r.admissible());
    let last = r.moderate_integrals.last().unwrap().1;
    // 2 int_0^inf (1+x)^2 e^{-x} dx = 2 (1 + 2 + 2)
    assert!((last - 10.0).abs() < 1e-8);
}

#[test]
fn critical_exponential_weight_is_bounded_but_not_integrable() {
    let w = StandardWeight::new(1.0, 1.0, 1.0, 0.0, Side::Both);
    let r = admissibility_check(&w, &[0.0, 1.0, 5.0]);
    assert!(!r.admissible());
    let ints: Vec<f64> = r.moderate_integrals.iter().map(|&(_, v)| v).collect();
    for pair in ints.windows(2) {
        assert!(pair[1] > 1.5 * pair[0]);
    }
    assert!(!lp_condition(&w, 2.0));
    assert!(!lp_condition(&w, f64::INFINITY));
    let borderline = StandardWeight::new(1.0, 1.0, 0.0, 0.0, Side::Both);
    assert!(lp_condition(&borderline, f64::INFINITY));
}

#[test]
fn subcritical_exponential_weights_are_admissible() {
    for a in [0.3, 0.9] {
        let w = StandardWeight::new(a, 1.0, 2.0, 1.0, Side::Both);
        assert!(admissibility_check(&w, &[0.0, 2.0, 10.0]).admissible());
        assert!(lp_condition(&w, 1.0));
    }
    assert!(!StandardWeight::new(0.5, 2.0, 0.0, 0.0, Side::Both).in_admissible_range());
}

#[test]
fn weighted_norm_examples() {
    let g = Grid::new(20.0, 1024).unwrap();
    let f = RealField::from_fn(&g, |x| gauss(x, 1.0, 0.0, 1.0));
    let unit = weighted_norm(&f, &StandardWeight::unit(), 2.0);
    assert!((unit - f.lp_norm(2.0)).abs() < 1e-14);
    assert!((unit - (PI / 2.0).sqrt().sqrt()).abs() < 1e-12);

    let tail = RealField::from_fn(&g, |x| (-x.abs()).exp());
    let half = StandardWeight::new(0.5, 1.0, 0.0, 0.0, Side::Both);
    let sup = weighted_norm(&tail, &half, f64::INFINITY);
    assert!((sup - 1.0).abs() < 1e-14);
}

#[test]
fn weighted_bump_against_quadrature() {
    // the kink of the weight at 0 leaves an O(dx^2) trapezoid error
    let g = Grid::new(2.0, 32768).unwrap();
    let f = RealField::from_fn(&g, |x| bump(x, 0.0, 1.0));
    let got = weighted_norm(&f, &StandardWeight::algebraic(2.0), 1.0);
    let n = 200_000;
    let h = 2.0 / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        let x = -1.0 + i as f64 * h;
        let c = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += c * bump(x, 0.0, 1.0) * (1.0 + x.abs()).powi(2);
    }
    let want = acc * h / 3.0;
    assert!(((got - want) / want).abs() < 1e-8, "{got} {want}");
}

#[test]
fn weighted_norm_is_monotone_in_the_weight() {
    let g = Grid::new(20.0, 512).unwrap();
    let f = RealField::from_fn(&g, |x| (-x.abs()).exp() * (3.0 * x).cos());
    for p in [1.0, 2.0, f64::INFINITY] {
        let a = weighted_norm(&f, &StandardWeight::algebraic(1.0), p);
        let b = weighted_norm(&f, &StandardWeight::algebraic(2.0), p);
        let c = weighted_norm(&f, &StandardWeight::new(0.5, 1.0, 2.0, 0.0, Side::Both), p);
        assert!(weighted_norm(&f, &StandardWeight::unit(), p) <= a && a <= b && b <= c);
    }
}

#[test]
fn zero_data_persists_as_zero() {
    let g = Grid::new(10.0, 128).unwrap();
    let p = Params::new(2.0, 1.0, Alpha::Constant(0.0), 1.0).unwrap();
    let traj =
        integrate(&State::zeros(&g), &p, &StepControl::new(0.05, 1.0).with_output_interval(0.1), Formulation::MForm)
            .unwrap();
    let r = persistence_monitor(&traj, &StandardWeight::algebraic(3.0), 2.0, DEFAULT_NOISE_FLOOR).unwrap();
    assert!(r.is_zero());
    assert_eq!(r.m, 0.0);
    assert!(r.bound_holds(0.0));
}

#[test]
fn synthetic_decay_rates() {
    let g = Grid::new(40.0, 2048).unwrap();
    let win = Window::default_for(40.0);
    let exp = RealField::from_fn(&g, |x| (-0.5 * x.abs()).exp());
    let fit = decay_profile(&exp, win, DEFAULT_NOISE_FLOOR).unwrap();
    assert!((fit.a_hat - 0.5).abs() < 1e-10 && fit.a_residual < 1e-10);

    let flat = RealField::constant(&g, 2.0);
    let fit = decay_profile(&flat, win, DEFAULT_NOISE_FLOOR).unwrap();
    assert!(fit.a_hat.abs() < 1e-12 && fit.c_hat.abs() < 1e-12);

    let alg = RealField::from_fn(&g, |x| (1.0 + x.abs()).powi(-3));
    let fit = decay_profile(&alg, win, DEFAULT_NOISE_FLOOR).unwrap();
    assert!((fit.c_hat - 3.0).abs() < 1e-10 && fit.c_residual < 1e-10);
    assert!(fit.a_residual > 1e-2);
}

fn momentum_run(half_length: f64, n: usize) -> Trajectory {
    let g = Grid::new(half_length, n).unwrap();
    let m0 = RealField::from_fn(&g, |x| gauss(x, 0.8, 0.0, 1.0));
    let s = State::new(0.0, helmholtz_convolve(&m0), RealField::from_fn(&g, |x| gauss(x, 0.4, 0.5, 1.0))).unwrap();
    let p = Params::new(2.0, 1.0, Alpha::Constant(0.0), 1.0).unwrap();
    integrate(&s, &p, &StepControl::new(0.01, 1.0).with_output_interval(0.05), Formulation::MForm).unwrap()
}

#[test]
fn persistence_end_to_end() {
    let base = momentum_run(40.0, 2048);
    let wide = momentum_run(80.0, 4096);
    let battery = [
        (StandardWeight::algebraic(3.0), f64::INFINITY),
        (StandardWeight::algebraic(3.0), 2.0),
        (StandardWeight::right_exponential(0.9), f64::INFINITY),
        (StandardWeight::right_exponential(0.9), 1.0),
    ];
    for (w, p) in battery {
        let r = persistence_monitor(&base, &w, p, DEFAULT_NOISE_FLOOR).unwrap();
        let r2 = persistence_monitor(&wide, &w, p, DEFAULT_NOISE_FLOOR).unwrap();
        assert!(r.m > 0.0 && r.m_running.windows(2).all(|v| v[1] >= v[0]));
        assert!(r.residual < 0.05, "residual {}", r.residual);
        assert!(r.bound_holds(r.residual));
        let spread = r.w.iter().zip(&r2.w).map(|(a, b)| ((a - b) / b).abs()).fold(0.0, f64::max);
        assert!(spread < 1e-3, "{w:?}: {spread}");
    }
}

#[test]
fn velocity_tail_keeps_unit_rate() {
    let traj = momentum_run(40.0, 2048);
    let win = Window::default_for(40.0);
    for s in traj.states().iter().skip(1) {
        let fit = decay_profile(&s.u, win, DEFAULT_NOISE_FLOOR).unwrap();
        assert!((fit.a_hat - 1.0).abs() < 1e-3, "t={} a={}", s.t, fit.a_hat);
    }
}
