//! Periodic spectral solution on bin indices (`omega_u = 2 pi u / m`, no
//! half-bin offset), kept for comparison with the cosine-series solver.
//!
//! Frequencies above `m / 2` are folded to their signed alias `u - m`, so the
//! synthesis of a single sampled mode returns that mode divided by
//! `omega_u^2 + omega_p^2`. The result is rescaled from index units to region
//! units.

use std::f64::consts::PI;

use super::dct::{along_x, along_y, PeriodicTransform};
use super::field::FieldMap;
use crate::density::DensityGrid;
use crate::error::Result;

fn folded(u: usize, m: usize) -> f64 {
    let s = if u <= m / 2 { u as f64 } else { u as f64 - m as f64 };
    2.0 * PI * s / m as f64
}

/// Reusable baseline solver for a fixed `m`.
pub struct SpectralBaseline {
    m: usize,
    transform: PeriodicTransform,
}

impl SpectralBaseline {
    pub fn new(m: usize) -> Result<Self> {
        Ok(SpectralBaseline { m, transform: PeriodicTransform::new(m)? })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn solve(&self, grid: &DensityGrid) -> Result<FieldMap> {
        let m = self.m;
        if grid.m != m {
            return Err(crate::error::Error::UnsupportedGridSize(grid.m));
        }
        let t = &self.transform;
        let norm = 1.0 / (m * m) as f64;
        let omega: Vec<f64> = (0..m).map(|u| folded(u, m)).collect();

        // coefficients indexed [p * m + u]
        let mut a = grid.values.clone();
        along_x(&mut a, m, |row, buf| t.cos(row, buf));
        along_y(&mut a, m, |col, buf| t.cos(col, buf));
        let mut psi = vec![0.0; m * m];
        let mut xi_x = vec![0.0; m * m];
        let mut xi_y = vec![0.0; m * m];
        for p in 0..m {
            for u in 0..m {
                if (u, p) == (0, 0) {
                    continue;
                }
                let k = p * m + u;
                let s = a[k] * norm / (omega[u] * omega[u] + omega[p] * omega[p]);
                psi[k] = s;
                xi_x[k] = s * omega[u];
                xi_y[k] = s * omega[p];
            }
        }
        along_x(&mut psi, m, |row, buf| t.cos(row, buf));
        along_y(&mut psi, m, |col, buf| t.cos(col, buf));
        along_x(&mut xi_x, m, |row, buf| t.sin(row, buf));
        along_y(&mut xi_x, m, |col, buf| t.cos(col, buf));
        along_x(&mut xi_y, m, |row, buf| t.cos(row, buf));
        along_y(&mut xi_y, m, |col, buf| t.sin(col, buf));

        let (bw, bh) = (grid.bin_w, grid.bin_h);
        psi.iter_mut().for_each(|v| *v *= bw * bh);
        xi_x.iter_mut().for_each(|v| *v *= bh);
        xi_y.iter_mut().for_each(|v| *v *= bw);
        Ok(FieldMap { m, region: grid.region, psi, xi_x, xi_y })
    }
}

/// Baseline potential and field of a mean-subtracted grid.
pub fn spectral_baseline(grid: &DensityGrid) -> Result<FieldMap> {
    SpectralBaseline::new(grid.m)?.solve(grid)
}

/// Direct `O(m^4)` evaluation of the baseline, same conventions.
pub fn naive_spectral_baseline(grid: &DensityGrid) -> FieldMap {
    let m = grid.m;
    let mf = m as f64;
    let angle = |u: usize, l: usize| 2.0 * PI * (u * l) as f64 / mf;
    let mut a = vec![0.0; m * m];
    for u in 0..m {
        for p in 0..m {
            let mut s = 0.0;
            for l in 0..m {
                for j in 0..m {
                    s += grid.get(l, j) * angle(u, l).cos() * angle(p, j).cos();
                }
            }
            a[u * m + p] = s / (mf * mf);
        }
    }
    let mut map = FieldMap::zeros(m, grid.region);
    for j in 0..m {
        for l in 0..m {
            let (mut psi, mut fx, mut fy) = (0.0, 0.0, 0.0);
            for u in 0..m {
                for p in 0..m {
                    if (u, p) == (0, 0) {
                        continue;
                    }
                    let (wu, wp) = (folded(u, m), folded(p, m));
                    let s = a[u * m + p] / (wu * wu + wp * wp);
                    let (cu, su) = (angle(u, l).cos(), angle(u, l).sin());
                    let (cp, sp) = (angle(p, j).cos(), angle(p, j).sin());
                    psi += s * cu * cp;
                    fx += s * wu * su * cp;
                    fy += s * wp * cu * sp;
                }
            }
            map.psi[j * m + l] = psi * grid.bin_w * grid.bin_h;
            map.xi_x[j * m + l] = fx * grid.bin_h;
            map.xi_y[j * m + l] = fy * grid.bin_w;
        }
    }
    map
}
