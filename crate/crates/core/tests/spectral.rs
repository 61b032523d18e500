mod common;

use common::{band_limited, bump, rng};
use hoch_core::spectral::*;
use std::f64::consts::PI;

fn sup_diff(a: &RealField, b: &RealField) -> f64 {
    a.max_abs_diff(b).unwrap()
}

#[test]
fn zero_field_has_zero_coefficients() {
    let g = Grid::new(PI, 64).unwrap();
    assert!(RealField::zeros(&g).transform().coeffs().iter().all(|c| c.norm() == 0.0));
}

#[test]
fn lowest_cosine_occupies_two_modes() {
    let g = Grid::new(20.0, 128).unwrap();
    let f = RealField::from_fn(&g, |x| (PI * x / 20.0).cos());
    let spec = f.transform();
    let big: Vec<i64> = (0..128).filter(|&i| spec.coeffs()[i].norm() > 1e-9).map(|i| g.mode(i)).collect();
    assert_eq!(big, vec![1, -1]);
}

#[test]
fn random_round_trip() {
    let g = Grid::new(7.0, 256).unwrap();
    let mut r = rng(1);
    for _ in 0..10 {
        let f = band_limited(&g, 60, &mut r);
        let back = f.transform().inverse_transform();
        assert!(sup_diff(&f, &back) < 1e-12 * f.sup_norm());
        assert!(f.transform().hermitian_defect() < 1e-12 * f.sup_norm() * 256.0);
    }
}

#[test]
fn parseval() {
    let g = Grid::new(3.0, 128).unwrap();
    let f = band_limited(&g, 30, &mut rng(2));
    assert!((f.lp_norm(2.0) - f.transform().parseval_l2()).abs() < 1e-12 * f.lp_norm(2.0));
}

#[test]
fn derivative_of_sine() {
    let g = Grid::new(PI, 64).unwrap();
    let f = RealField::from_fn(&g, |x| (2.0 * x).sin());
    let want = RealField::from_fn(&g, |x| 2.0 * (2.0 * x).cos());
    assert!(sup_diff(&derivative(&f, 1), &want) < 1e-12);
    let c = RealField::constant(&g, 3.5);
    assert!(derivative(&c, 1).sup_norm() < 1e-15);
}

#[test]
fn gaussian_second_derivative_matches_closed_form() {
    let g = Grid::new(20.0, 512).unwrap();
    let f = RealField::from_fn(&g, |x| (-x * x).exp());
    let want = RealField::from_fn(&g, |x| (4.0 * x * x - 2.0) * (-x * x).exp());
    assert!(sup_diff(&derivative(&f, 2), &want) < 1e-10);
}

#[test]
fn inertia_eigenvalues() {
    let g = Grid::new(PI, 16).unwrap();
    let s = RealField::from_fn(&g, |x| (2.0 * x).sin());
    let m = apply_inertia(&s, 2.0).unwrap();
    assert!(sup_diff(&m, &s.scale(25.0)) < 1e-12);
    assert!(sup_diff(&invert_inertia(&s.scale(25.0), 2.0).unwrap(), &s) < 1e-13);
    let c = RealField::constant(&g, -1.25);
    for r in [1.0, 1.5, 3.0] {
        assert!(sup_diff(&apply_inertia(&c, r).unwrap(), &c) < 1e-14);
        assert!(sup_diff(&invert_inertia(&c, r).unwrap(), &c) < 1e-14);
    }
}

#[test]
fn inertia_rejects_exponents_below_one() {
    assert!(Inertia::new(0.5).is_err());
    assert!(Inertia::exploratory(0.5).is_ok());
    let g = Grid::new(PI, 32).unwrap();
    assert!(apply_inertia(&RealField::zeros(&g), 0.9).is_err());
}

#[test]
fn inertia_round_trip_and_commutation() {
    let g = Grid::new(10.0, 128).unwrap();
    let mut r = rng(3);
    for exponent in [1.0, 1.5, 2.0, 3.0] {
        let a = Inertia::new(exponent).unwrap();
        let f = dealias(&band_limited(&g, 30, &mut r).transform()).inverse_transform();
        // composed on coefficients; a sample round trip in between multiplies
        // rounding noise by the full symbol
        let back = a.apply_spectral(&a.invert_spectral(&f.transform())).inverse_transform();
        assert!(sup_diff(&back, &f) < 1e-11 * f.sup_norm().max(1.0));
        let there = a.invert(&a.apply(&f));
        assert!(sup_diff(&there, &f) < 1e-11 * f.sup_norm().max(1.0));
        let d_then_a = a.apply(&derivative(&f, 1));
        let a_then_d = derivative(&a.apply(&f), 1);
        assert!(sup_diff(&d_then_a, &a_then_d) < 1e-11 * d_then_a.sup_norm().max(1.0));
    }
}

#[test]
fn inertia_is_linear() {
    let g = Grid::new(5.0, 128).unwrap();
    let mut r = rng(4);
    let (f, h) = (band_limited(&g, 20, &mut r), band_limited(&g, 20, &mut r));
    let combo = f.zip_with(&h, |x, y| 2.0 * x - 0.5 * y).unwrap();
    let lhs = apply_inertia(&combo, 1.5).unwrap();
    let rhs = apply_inertia(&f, 1.5).unwrap().scale(2.0).axpy(-0.5, &apply_inertia(&h, 1.5).unwrap()).unwrap();
    assert!(sup_diff(&lhs, &rhs) < 1e-12 * lhs.sup_norm());
}

#[test]
fn helmholtz_cosine_and_inverse_pair() {
    let g = Grid::new(PI, 64).unwrap();
    let c3 = RealField::from_fn(&g, |x| (3.0 * x).cos());
    assert!(sup_diff(&helmholtz_convolve(&c3), &c3.scale(0.1)) < 1e-14);
    let f = band_limited(&Grid::new(8.0, 256).unwrap(), 50, &mut rng(5));
    let gf = helmholtz_convolve(&f);
    let back = gf.axpy(-1.0, &derivative(&gf, 2)).unwrap();
    assert!(sup_diff(&back, &f) < 1e-11);
    assert!(sup_diff(&gf, &invert_inertia(&f, 1.0).unwrap()) < 1e-15);
}

/// `int_{-1}^{1} exp(-|x - y|) / 2 * bump(y) dy` by composite Simpson split at `y = x`.
fn kernel_quadrature(x: f64) -> f64 {
    let f = |y: f64| 0.5 * (-(x - y).abs()).exp() * bump(y, 0.0, 1.0);
    let simpson = |a: f64, b: f64| {
        if b <= a {
            return 0.0;
        }
        let n = 20_000;
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        acc * h / 3.0
    };
    let split = x.clamp(-1.0, 1.0);
    simpson(-1.0, split) + simpson(split, 1.0)
}

#[test]
fn inverse_inertia_matches_kernel_quadrature() {
    let g = Grid::new(40.0, 4096).unwrap();
    let f = RealField::from_fn(&g, |x| bump(x, 0.0, 1.0));
    let u = invert_inertia(&f, 1.0).unwrap().transform();
    for x in [-6.0, -1.5, -0.4, 0.0, 0.3, 0.9, 2.0, 7.5] {
        assert!((u.eval_at(x) - kernel_quadrature(x)).abs() < 1e-6, "x={x}");
    }
}

#[test]
fn narrow_gaussian_reproduces_green_function() {
    let g = Grid::new(40.0, 4096).unwrap();
    let s = 0.04;
    let norm = 1.0 / (s * (2.0 * PI).sqrt());
    let f = RealField::from_fn(&g, |x| norm * (-x * x / (2.0 * s * s)).exp());
    let gf = helmholtz_convolve(&f);
    for (j, &x) in g.points().iter().enumerate() {
        if (1.0..=5.0).contains(&x.abs()) {
            let want = 0.5 * (-x.abs()).exp();
            assert!(((gf.samples()[j] - want) / want).abs() < 1e-3);
        }
    }
}

#[test]
fn dealias_keeps_band_and_drops_nyquist() {
    let g = Grid::new(PI, 64).unwrap();
    let inside = RealField::from_fn(&g, |x| (5.0 * x).sin() + (21.0 * x).cos());
    assert!(sup_diff(&dealias(&inside.transform()).inverse_transform(), &inside) < 1e-13);
    let nyquist = RealField::from_fn(&g, |x| (32.0 * x).cos());
    assert!(dealias(&nyquist.transform()).inverse_transform().sup_norm() < 1e-15);
}

#[test]
fn dealiased_product_matches_double_resolution() {
    let n = 128;
    let cut = dealias_cutoff(n);
    let (coarse, fine) = (Grid::new(4.0, n).unwrap(), Grid::new(4.0, 2 * n).unwrap());
    for seed in 0..5 {
        let f_c = band_limited(&coarse, cut, &mut rng(10 + seed));
        let g_c = band_limited(&coarse, cut, &mut rng(20 + seed));
        let f_f = band_limited(&fine, cut, &mut rng(10 + seed));
        let g_f = band_limited(&fine, cut, &mut rng(20 + seed));
        let prod_c = dealias(&f_c.zip_with(&g_c, |a, b| a * b).unwrap().transform()).inverse_transform();
        let step = PI / 4.0;
        let prod_f = f_f
            .zip_with(&g_f, |a, b| a * b)
            .unwrap()
            .transform()
            .apply_real_symbol(|xi| ((xi / step).abs().round() as usize <= cut) as u8 as f64)
            .inverse_transform();
        let err = (0..n).map(|j| (prod_c.samples()[j] - prod_f.samples()[2 * j]).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "seed {seed}: {err}");
    }
}

#[test]
fn grid_validation() {
    assert!(Grid::new(-1.0, 64).is_err());
    assert!(Grid::new(1.0, 100).is_err());
    assert!(Grid::new(1.0, 8).is_err());
    let g = Grid::new(2.0, 16).unwrap();
    assert!(RealField::new(&g, vec![0.0; 15]).is_err());
    assert!(RealField::new(&g, vec![f64::NAN; 16]).is_err());
}
