mod common;

use std::f64::consts::PI;

use common::{norm_relative, random_density, rng};
use neumann_place::analytic::{
    absolute_series_bound, coefficients_by_quadrature, density_coefficients_by_quadrature, eval_field,
    eval_potential, exact_coefficients, tail_bound,
};
use neumann_place::density::ExactDensity;
use neumann_place::netlist::Region;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn closed_forms_match_quadrature() {
    for seed in 0..4 {
        let d = random_density(seed, 10, Region::new(3.0, 2.0));
        let exact = exact_coefficients(&d, 16);
        let quad = coefficients_by_quadrature(&d, 16, 1024);
        let rel = norm_relative(quad.as_slice(), exact.as_slice());
        assert!(rel <= 1e-4, "seed {seed}: {rel}");
        assert_eq!(quad.get(0, 0), 0.0);
    }
}

#[test]
fn laplacian_recovers_density_modes() {
    let d = random_density(7, 10, Region::new(1.5, 2.5));
    let k = 16;
    let a = exact_coefficients(&d, k);
    let b = density_coefficients_by_quadrature(&d, k, 1024);
    let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    for u in 1..=k {
        for p in 1..=k {
            let got = a.laplacian_mode(u, p);
            let want = b[u * (k + 1) + p];
            assert!((got - want).abs() <= 1e-4 * scale, "({u}, {p}): {got} vs {want}");
        }
    }
}

#[test]
fn field_is_minus_gradient() {
    let region = Region::new(2.0, 3.0);
    let d = random_density(3, 10, region);
    let c = exact_coefficients(&d, 24);
    let mut r = rng(11);
    let hx = 1e-5 * region.width;
    let hy = 1e-5 * region.height;
    let pts: Vec<(f64, f64)> = (0..50).map(|_| (r.gen_range(0.01..0.99) * 2.0, r.gen_range(0.01..0.99) * 3.0)).collect();
    let fields: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| eval_field(&c, x, y).unwrap()).collect();
    let scale = fields.iter().map(|f| f.0.abs().max(f.1.abs())).fold(0.0, f64::max);
    for (&(x, y), &(fx, fy)) in pts.iter().zip(&fields) {
        let dx = (eval_potential(&c, x + hx, y).unwrap() - eval_potential(&c, x - hx, y).unwrap()) / (2.0 * hx);
        let dy = (eval_potential(&c, x, y + hy).unwrap() - eval_potential(&c, x, y - hy).unwrap()) / (2.0 * hy);
        assert!((-dx - fx).abs() <= 1e-6 * scale && (-dy - fy).abs() <= 1e-6 * scale);
    }
}

#[test]
fn potential_has_zero_mean() {
    let region = Region::new(1.0, 2.0);
    let c = exact_coefficients(&random_density(5, 10, region), 16);
    let n = 128;
    let mut sum = 0.0;
    let mut peak: f64 = 0.0;
    for j in 0..n {
        for l in 0..n {
            let v = eval_potential(&c, (l as f64 + 0.5) / n as f64, 2.0 * (j as f64 + 0.5) / n as f64).unwrap();
            sum += v;
            peak = peak.max(v.abs());
        }
    }
    assert!((sum / (n * n) as f64).abs() <= 1e-9 * peak);
}

#[test]
fn normal_field_vanishes_on_walls() {
    let region = Region::new(2.0, 1.0);
    let c = exact_coefficients(&random_density(9, 10, region), 32);
    for t in 0..=20 {
        let s = t as f64 / 20.0;
        assert_eq!(eval_field(&c, 0.0, s).unwrap().0, 0.0);
        assert_eq!(eval_field(&c, 2.0, s).unwrap().0, 0.0);
        assert_eq!(eval_field(&c, 2.0 * s, 0.0).unwrap().1, 0.0);
        assert_eq!(eval_field(&c, 2.0 * s, 1.0).unwrap().1, 0.0);
    }
}

#[test]
fn outside_points_are_rejected() {
    let c = exact_coefficients(&random_density(1, 3, Region::new(1.0, 1.0)), 4);
    assert!(eval_potential(&c, 1.5, 0.5).is_err());
    assert!(eval_field(&c, 0.5, -0.1).is_err());
}

#[test]
fn partial_sums_converge_within_tail_bound() {
    let region = Region::new(1.0, 1.0);
    let d = random_density(21, 10, region);
    let full = exact_coefficients(&d, 128);
    let bound = absolute_series_bound(&d);
    let mut last = 0.0;
    for k in 1..=32 {
        let s = full.truncated(k).abs_sum();
        assert!(s >= last && s <= bound, "K = {k}: {s}");
        last = s;
    }
    let mut r = rng(4);
    for k in [8, 16, 32] {
        let tb = tail_bound(&d, k);
        let (ck, c4k) = (full.truncated(k), full.truncated(4 * k));
        for _ in 0..100 {
            let (x, y) = (r.gen::<f64>(), r.gen::<f64>());
            let diff = (eval_potential(&ck, x, y).unwrap() - eval_potential(&c4k, x, y).unwrap()).abs();
            assert!(diff <= tb.bound, "K = {k}: {diff} > {}", tb.bound);
        }
        assert!(tail_bound(&d, 2 * k).bound <= tb.bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn coefficients_superpose(seed_a in 0u64..1000, seed_b in 0u64..1000, na in 0usize..6, nb in 0usize..6) {
        let region = Region::new(2.0, 1.0);
        let a = random_density(seed_a, na, region);
        let b = random_density(seed_b, nb, region);
        let union = ExactDensity::new(region, a.rects().iter().chain(b.rects()).copied());
        let k = 12;
        let (ca, cb, cu) = (exact_coefficients(&a, k), exact_coefficients(&b, k), exact_coefficients(&union, k));
        let scale = cu.abs_sum().max(1e-300);
        for (i, v) in cu.as_slice().iter().enumerate() {
            prop_assert!((v - ca.as_slice()[i] - cb.as_slice()[i]).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn single_mode_series(u in 0usize..6, p in 0usize..6, x in 0.0f64..1.0, y in 0.0f64..1.0) {
        prop_assume!(u + p > 0);
        let region = Region::new(1.0, 1.0);
        let mut c = exact_coefficients(&ExactDensity::new(region, []), 6);
        c.set(u, p, 1.0);
        let psi = eval_potential(&c, x, y).unwrap();
        let (fx, fy) = eval_field(&c, x, y).unwrap();
        let (uf, pf) = (u as f64 * PI, p as f64 * PI);
        prop_assert!((psi - (uf * x).cos() * (pf * y).cos()).abs() < 1e-12);
        prop_assert!((fx - uf * (uf * x).sin() * (pf * y).cos()).abs() < 1e-11);
        prop_assert!((fy - pf * (uf * x).cos() * (pf * y).sin()).abs() < 1e-11);
    }
}
