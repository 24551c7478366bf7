//! Closed-form cosine-series solution of the Neumann Poisson problem for a
//! density made of rectangles, with partial-sum evaluation and tail bounds.
//!
//! The potential is `psi(x, y) = sum_{u,p} a[u][p] cos(u pi x / W) cos(p pi y / H)`
//! and the field is its negative gradient.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::density::ExactDensity;
use crate::error::Result;
use crate::netlist::Region;
use crate::trig::{cos_pi, sin_pi};

/// `(K + 1) x (K + 1)` cosine-series coefficients, `a[u][p]` at `u * (K + 1) + p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoefficients {
    k: usize,
    region: Region,
    a: Vec<f64>,
}

impl SpectralCoefficients {
    pub fn zeros(k: usize, region: Region) -> Self {
        SpectralCoefficients { k, region, a: vec![0.0; (k + 1) * (k + 1)] }
    }

    /// Wraps a row-major coefficient matrix; `a[0][0]` is forced to zero.
    pub fn from_vec(k: usize, region: Region, mut a: Vec<f64>) -> Self {
        assert_eq!(a.len(), (k + 1) * (k + 1), "coefficient matrix must be (k+1)^2");
        a[0] = 0.0;
        SpectralCoefficients { k, region, a }
    }

    /// Truncation order `K`.
    pub fn order(&self) -> usize {
        self.k
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn get(&self, u: usize, p: usize) -> f64 {
        self.a[u * (self.k + 1) + p]
    }

    pub fn set(&mut self, u: usize, p: usize, v: f64) {
        if (u, p) != (0, 0) {
            self.a[u * (self.k + 1) + p] = v;
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }

    /// `sum |a[u][p]|` over all retained modes.
    pub fn abs_sum(&self) -> f64 {
        self.a.iter().map(|v| v.abs()).sum()
    }

    /// The first `k' + 1` modes in each direction.
    pub fn truncated(&self, k: usize) -> SpectralCoefficients {
        let k = k.min(self.k);
        let a = (0..=k).flat_map(|u| (0..=k).map(move |p| (u, p))).map(|(u, p)| self.get(u, p)).collect();
        SpectralCoefficients { k, region: self.region, a }
    }

    /// Density cosine coefficient implied by mode `(u, p)`:
    /// `a[u][p] * (u^2 pi^2 / W^2 + p^2 pi^2 / H^2)`.
    pub fn laplacian_mode(&self, u: usize, p: usize) -> f64 {
        let (w, h) = (self.region.width, self.region.height);
        let ku = u as f64 * PI / w;
        let kp = p as f64 * PI / h;
        self.get(u, p) * (ku * ku + kp * kp)
    }
}

/// Differences `sin(u pi hi / L) - sin(u pi lo / L)` for `u = 0..=k`, per interval.
fn sine_differences(intervals: &[(f64, f64)], extent: f64, k: usize) -> Vec<Vec<f64>> {
    (0..=k)
        .map(|u| {
            let uf = u as f64;
            intervals.iter().map(|&(lo, hi)| sin_pi(uf * hi / extent) - sin_pi(uf * lo / extent)).collect()
        })
        .collect()
}

/// Coefficients from the closed forms for rectangle densities. `O(K^2 n)`.
pub fn exact_coefficients(density: &ExactDensity, k: usize) -> SpectralCoefficients {
    exact_coefficients_counted(density, k).0
}

/// As [`exact_coefficients`], also returning the number of block-mode products
/// evaluated.
pub fn exact_coefficients_counted(density: &ExactDensity, k: usize) -> (SpectralCoefficients, u64) {
    let region = density.region();
    let (w, h) = (region.width, region.height);
    let rects = density.rects();
    let xs: Vec<(f64, f64)> = rects.iter().map(|r| (r.x0, r.x1)).collect();
    let ys: Vec<(f64, f64)> = rects.iter().map(|r| (r.y0, r.y1)).collect();
    let widths: Vec<f64> = rects.iter().map(|r| r.width()).collect();
    let heights: Vec<f64> = rects.iter().map(|r| r.height()).collect();
    let sx = sine_differences(&xs, w, k);
    let sy = sine_differences(&ys, h, k);
    let pi3 = PI * PI * PI;
    let pi4 = pi3 * PI;

    let rows: Vec<Vec<f64>> = (0..=k)
        .into_par_iter()
        .map(|u| {
            let uf = u as f64;
            (0..=k)
                .map(|p| {
                    let pf = p as f64;
                    match (u, p) {
                        (0, 0) => 0.0,
                        (_, 0) => {
                            let s: f64 = heights.iter().zip(&sx[u]).map(|(hi, d)| hi * d).sum();
                            2.0 * w * w / (uf * uf * uf * pi3 * h) * s
                        }
                        (0, _) => {
                            let s: f64 = widths.iter().zip(&sy[p]).map(|(wi, d)| wi * d).sum();
                            2.0 * h * h / (pf * pf * pf * pi3 * w) * s
                        }
                        _ => {
                            let s: f64 = sx[u].iter().zip(&sy[p]).map(|(a, b)| a * b).sum();
                            4.0 * w * w * h * h / ((uf * uf * h * h + pf * pf * w * w) * uf * pf * pi4) * s
                        }
                    }
                })
                .collect()
        })
        .collect();
    let ops = ((k + 1) * (k + 1) - 1) as u64 * rects.len() as u64;
    (SpectralCoefficients::from_vec(k, region, rows.concat()), ops)
}

/// Cell-averaged coverage of `density` on a `res x res` grid (row-major along y),
/// mean-subtracted.
fn cell_averaged_density(density: &ExactDensity, res: usize) -> Vec<f64> {
    let region = density.region();
    let dx = region.width / res as f64;
    let dy = region.height / res as f64;
    let overlaps = |lo: f64, hi: f64, step: f64| -> (usize, Vec<f64>) {
        let first = ((lo / step).floor() as usize).min(res - 1);
        let last = ((hi / step).ceil() as usize).clamp(first + 1, res) - 1;
        let v = (first..=last)
            .map(|c| {
                let a = c as f64 * step;
                (hi.min(a + step) - lo.max(a)).max(0.0) / step
            })
            .collect();
        (first, v)
    };
    let mut grid = vec![-density.mean(); res * res];
    for r in density.rects() {
        let (ix, fx) = overlaps(r.x0, r.x1, dx);
        let (iy, fy) = overlaps(r.y0, r.y1, dy);
        for (j, wy) in fy.iter().enumerate() {
            let row = &mut grid[(iy + j) * res..(iy + j + 1) * res];
            for (i, wx) in fx.iter().enumerate() {
                row[ix + i] += wx * wy;
            }
        }
    }
    grid
}

/// Midpoint-rule integrals `I[u][p] = iint rho cos(u pi x / W) cos(p pi y / H)`.
fn quadrature_integrals(density: &ExactDensity, k: usize, res: usize) -> Vec<f64> {
    let region = density.region();
    let rho = cell_averaged_density(density, res);
    // Midpoints are at (c + 1/2) / res of either extent, so one table serves both axes.
    let cos_table: Vec<Vec<f64>> = (0..=k)
        .map(|u| (0..res).map(|c| cos_pi(u as f64 * (c as f64 + 0.5) / res as f64)).collect())
        .collect();
    let (cx, cy) = (&cos_table, &cos_table);
    // t[u][iy] = sum_ix rho[iy][ix] cx[u][ix]
    let t: Vec<Vec<f64>> = (0..=k)
        .into_par_iter()
        .map(|u| (0..res).map(|iy| rho[iy * res..(iy + 1) * res].iter().zip(&cx[u]).map(|(r, c)| r * c).sum()).collect())
        .collect();
    let cell = region.area() / (res * res) as f64;
    (0..=k)
        .flat_map(|u| (0..=k).map(move |p| (u, p)))
        .map(|(u, p)| t[u].iter().zip(&cy[p]).map(|(a, b)| a * b).sum::<f64>() * cell)
        .collect()
}

/// Coefficients by direct numerical integration of the defining integrals,
/// using the midpoint rule on `res x res` cells with cell-averaged density.
/// Independent of the closed forms; intended as a test oracle.
pub fn coefficients_by_quadrature(density: &ExactDensity, k: usize, res: usize) -> SpectralCoefficients {
    let region = density.region();
    let (w, h) = (region.width, region.height);
    let integrals = quadrature_integrals(density, k, res);
    let pi2 = PI * PI;
    let a = integrals
        .iter()
        .enumerate()
        .map(|(idx, &i)| {
            let (u, p) = ((idx / (k + 1)) as f64, (idx % (k + 1)) as f64);
            match (u == 0.0, p == 0.0) {
                (true, true) => 0.0,
                (false, true) => 2.0 * w / (u * u * pi2 * h) * i,
                (true, false) => 2.0 * h / (p * p * pi2 * w) * i,
                (false, false) => 4.0 * w * h / ((u * u * h * h + p * p * w * w) * pi2) * i,
            }
        })
        .collect();
    SpectralCoefficients::from_vec(k, region, a)
}

/// Cosine-series coefficients of the density itself, by the same quadrature:
/// `b[u][p] = (e_u e_p / (W H)) iint rho cos cos` with `e_0 = 1`, `e_{>0} = 2`.
pub fn density_coefficients_by_quadrature(density: &ExactDensity, k: usize, res: usize) -> Vec<f64> {
    let region = density.region();
    let integrals = quadrature_integrals(density, k, res);
    let e = |i: usize| if i == 0 { 1.0 } else { 2.0 };
    integrals
        .iter()
        .enumerate()
        .map(|(idx, &i)| e(idx / (k + 1)) * e(idx % (k + 1)) * i / region.area())
        .collect()
}

fn cos_modes(k: usize, t: f64) -> Vec<f64> {
    (0..=k).map(|u| cos_pi(u as f64 * t)).collect()
}

fn sin_modes(k: usize, t: f64) -> Vec<f64> {
    (0..=k).map(|u| sin_pi(u as f64 * t)).collect()
}

/// Partial sum of the potential over `u, p <= K`.
pub fn eval_potential(c: &SpectralCoefficients, x: f64, y: f64) -> Result<f64> {
    let region = c.region();
    region.check_point(x, y)?;
    let k = c.order();
    let cx = cos_modes(k, x / region.width);
    let cy = cos_modes(k, y / region.height);
    Ok(cx
        .iter()
        .enumerate()
        .map(|(u, cu)| cu * c.a[u * (k + 1)..(u + 1) * (k + 1)].iter().zip(&cy).map(|(a, cp)| a * cp).sum::<f64>())
        .sum())
}

/// Partial sum of the field `-grad psi` over `u, p <= K`.
pub fn eval_field(c: &SpectralCoefficients, x: f64, y: f64) -> Result<(f64, f64)> {
    let region = c.region();
    region.check_point(x, y)?;
    let k = c.order();
    let (tx, ty) = (x / region.width, y / region.height);
    let (cx, sx) = (cos_modes(k, tx), sin_modes(k, tx));
    let (cy, sy) = (cos_modes(k, ty), sin_modes(k, ty));
    let (mut fx, mut fy) = (0.0, 0.0);
    for u in 0..=k {
        let row = &c.a[u * (k + 1)..(u + 1) * (k + 1)];
        let ku = u as f64 * PI / region.width;
        let mut rx = 0.0;
        let mut ry = 0.0;
        for (p, a) in row.iter().enumerate() {
            rx += a * cy[p];
            ry += a * (p as f64 * PI / region.height) * sy[p];
        }
        fx += ku * sx[u] * rx;
        fy += cx[u] * ry;
    }
    Ok((fx, fy))
}

/// Upper bound on the omitted part of the series after truncation at `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    pub k: usize,
    pub bound: f64,
}

const EXPLICIT_TERMS: usize = 1_000_000;
const INNER_TERMS: usize = 2048;

/// `sum_{p > k} 1 / p^3`, summed explicitly then closed by the integral test.
fn cubic_tail(k: usize) -> f64 {
    let end = k + EXPLICIT_TERMS;
    let explicit: f64 = (k + 1..=end).rev().map(|p| (p as f64).powi(-3)).sum();
    explicit + 0.5 / (end as f64 * end as f64)
}

/// `sum_{u, p >= 1, max(u, p) > k} 1 / (u^3 p H^2 + u p^3 W^2)`, as an upper bound.
fn mixed_tail(k: usize, w: f64, h: f64) -> f64 {
    let g = |u: f64, p: f64| 1.0 / (u * p * (u * u * h * h + p * p * w * w));
    // Integral of g(u, .) from `from` to infinity.
    let integral = |u: f64, from: f64| (u * u * h * h / (w * w * from * from)).ln_1p() / (2.0 * u * u * u * h * h);
    let inner = |u: usize, after: usize| -> f64 {
        let uf = u as f64;
        let end = after + INNER_TERMS;
        let s: f64 = (after + 1..=end).rev().map(|p| g(uf, p as f64)).sum();
        s + integral(uf, end as f64)
    };
    let part_a: f64 = (1..=k).into_par_iter().map(|u| inner(u, k)).sum();
    let near = k + INNER_TERMS;
    let part_b: f64 = (k + 1..=near).into_par_iter().map(|u| inner(u, 0)).sum();
    let far_end = near.max(EXPLICIT_TERMS);
    let part_c: f64 = (near + 1..=far_end).rev().map(|u| g(u as f64, 1.0) + integral(u as f64, 1.0)).sum();
    // g <= 1 / (2 H W u^2 p^2) beyond that.
    let part_d = PI * PI / (12.0 * h * w * far_end as f64);
    part_a + part_b + part_c + part_d
}

fn series_bound(density: &ExactDensity, k: usize) -> f64 {
    let region = density.region();
    let (w, h) = (region.width, region.height);
    let rects = density.rects();
    if rects.is_empty() {
        return 0.0;
    }
    let sum_w: f64 = rects.iter().map(|r| r.width()).sum();
    let sum_h: f64 = rects.iter().map(|r| r.height()).sum();
    let n = rects.len() as f64;
    let pi3 = PI * PI * PI;
    let cubic = cubic_tail(k);
    4.0 * h * h * sum_w / (w * pi3) * cubic
        + 4.0 * w * w * sum_h / (h * pi3) * cubic
        + 16.0 * w * w * h * h * n / (pi3 * PI) * mixed_tail(k, w, h)
}

/// Bound on `|psi - psi_K|` anywhere in the region, from the per-mode
/// coefficient bounds summed over the omitted modes.
pub fn tail_bound(density: &ExactDensity, k: usize) -> TailBound {
    TailBound { k, bound: series_bound(density, k) }
}

/// Bound on `sum |a[u][p]|` over all modes, hence on `|psi|` everywhere.
pub fn absolute_series_bound(density: &ExactDensity) -> f64 {
    series_bound(density, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::Rect;

    fn unit() -> Region {
        Region::new(1.0, 1.0)
    }

    #[test]
    fn empty_and_full_are_zero() {
        let e = exact_coefficients(&ExactDensity::new(unit(), []), 8);
        assert!(e.as_slice().iter().all(|&v| v == 0.0));
        let full = exact_coefficients(&ExactDensity::new(unit(), [Rect::centered(0.5, 0.5, 1.0, 1.0)]), 8);
        assert!(full.as_slice().iter().all(|&v| v == 0.0), "{:?}", full.as_slice());
    }

    #[test]
    fn centered_square_modes() {
        let d = ExactDensity::new(unit(), [Rect::centered(0.5, 0.5, 0.5, 0.5)]);
        let c = exact_coefficients(&d, 4);
        assert_eq!(c.get(0, 0), 0.0);
        assert!(c.get(1, 0).abs() < 1e-16);
        assert!((c.get(2, 0) + 1.0 / (4.0 * PI.powi(3))).abs() < 1e-15);
        assert!((c.get(0, 2) + 1.0 / (4.0 * PI.powi(3))).abs() < 1e-15);
    }

    #[test]
    fn quadrature_zero_for_empty() {
        let q = coefficients_by_quadrature(&ExactDensity::new(unit(), []), 4, 64);
        assert!(q.as_slice().iter().all(|&v| v == 0.0));
        assert_eq!(q.get(0, 0), 0.0);
    }

    #[test]
    fn single_mode_potential_and_field() {
        let region = Region::new(2.0, 3.0);
        let mut c = SpectralCoefficients::zeros(3, region);
        c.set(1, 0, 1.0);
        for &(x, y) in &[(0.0, 0.0), (0.7, 1.1), (2.0, 3.0), (1.3, 2.2)] {
            let psi = eval_potential(&c, x, y).unwrap();
            assert!((psi - (PI * x / 2.0).cos()).abs() < 1e-14);
            let (fx, fy) = eval_field(&c, x, y).unwrap();
            assert!((fx - PI / 2.0 * (PI * x / 2.0).sin()).abs() < 1e-14);
            assert_eq!(fy, 0.0);
        }
        assert!(eval_potential(&c, 2.1, 0.0).is_err());
        assert!(eval_field(&c, 0.0, -0.1).is_err());
    }

    #[test]
    fn neumann_at_walls_is_exact() {
        let d = ExactDensity::new(unit(), [Rect::centered(0.3, 0.6, 0.2, 0.3), Rect::centered(0.8, 0.2, 0.1, 0.1)]);
        let c = exact_coefficients(&d, 16);
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            assert_eq!(eval_field(&c, 0.0, t).unwrap().0, 0.0);
            assert_eq!(eval_field(&c, 1.0, t).unwrap().0, 0.0);
            assert_eq!(eval_field(&c, t, 0.0).unwrap().1, 0.0);
            assert_eq!(eval_field(&c, t, 1.0).unwrap().1, 0.0);
        }
    }

    #[test]
    fn tail_bound_basics() {
        assert_eq!(tail_bound(&ExactDensity::new(unit(), []), 4).bound, 0.0);
        let d = ExactDensity::new(unit(), [Rect::centered(0.3, 0.6, 0.2, 0.3)]);
        let b: Vec<f64> = [1, 2, 4, 8, 16, 32].iter().map(|&k| tail_bound(&d, k).bound).collect();
        assert!(b.windows(2).all(|w| w[0] >= w[1]), "{b:?}");
        assert!(absolute_series_bound(&d) >= b[0]);
    }

    #[test]
    fn cubic_tail_matches_zeta() {
        // zeta(3) = 1.2020569031595942...
        assert!((cubic_tail(0) - 1.202_056_903_159_594_2).abs() < 1e-13);
        assert!((cubic_tail(1) - 0.202_056_903_159_594_2).abs() < 1e-13);
    }

    #[test]
    fn op_count_is_quadratic_in_k_linear_in_n() {
        let rects: Vec<Rect> = (0..10).map(|i| Rect::centered(0.05 + 0.09 * i as f64, 0.5, 0.05, 0.05)).collect();
        let d = ExactDensity::new(unit(), rects);
        let (_, ops8) = exact_coefficients_counted(&d, 8);
        let (_, ops16) = exact_coefficients_counted(&d, 16);
        assert_eq!(ops8, 80 * 10);
        assert_eq!(ops16, 288 * 10);
    }
}
