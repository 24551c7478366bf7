//! Grid solver: cosine-transform coefficients of the bin density, potential and
//! field on bin centers, and the periodic spectral baseline.

mod baseline;
mod dct;
mod field;

use std::f64::consts::PI;

pub use baseline::{naive_spectral_baseline, spectral_baseline, SpectralBaseline};
pub use dct::{CosineTransform, PeriodicTransform};
pub use field::{interpolate_field, FieldMap};

use crate::analytic::SpectralCoefficients;
use crate::density::DensityGrid;
use crate::error::{Error, Result};
use crate::netlist::Region;
use crate::trig::sin_pi;
use dct::{along_x, along_y, transpose};

/// `m x m` reduced coefficients, `a'[u][p]` at `u * m + p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedCoefficients {
    pub m: usize,
    pub a_prime: Vec<f64>,
}

impl ReducedCoefficients {
    pub fn get(&self, u: usize, p: usize) -> f64 {
        self.a_prime[u * self.m + p]
    }
}

/// `a'[u][p] = sum_{l,j} P[l][j] cos(u (l + 1/2) pi / m) cos(p (j + 1/2) pi / m)`
/// by a 2-D DCT-II. `a'[0][0]` is set to zero.
pub fn reduced_transform(grid: &DensityGrid) -> Result<ReducedCoefficients> {
    let t = CosineTransform::new(grid.m)?;
    Ok(reduced_with(&t, grid))
}

fn reduced_with(t: &CosineTransform, grid: &DensityGrid) -> ReducedCoefficients {
    let m = grid.m;
    let mut data = grid.values.clone();
    along_x(&mut data, m, |row, buf| t.dct2(row, buf));
    along_y(&mut data, m, |col, buf| t.dct2(col, buf));
    // data[p * m + u] -> u-major
    transpose(&mut data, m);
    data[0] = 0.0;
    ReducedCoefficients { m, a_prime: data }
}

/// Direct `O(m^4)` evaluation of the reduced coefficients.
pub fn naive_reduced_transform(grid: &DensityGrid) -> ReducedCoefficients {
    let m = grid.m;
    let mf = m as f64;
    let mut a = vec![0.0; m * m];
    for u in 0..m {
        for p in 0..m {
            if (u, p) == (0, 0) {
                continue;
            }
            let mut s = 0.0;
            for l in 0..m {
                let cu = (u as f64 * (l as f64 + 0.5) * PI / mf).cos();
                for j in 0..m {
                    s += grid.get(l, j) * cu * (p as f64 * (j as f64 + 0.5) * PI / mf).cos();
                }
            }
            a[u * m + p] = s;
        }
    }
    ReducedCoefficients { m, a_prime: a }
}

/// Series coefficients (order `K = m - 1`) from reduced coefficients.
pub fn scale_coefficients(a_prime: &ReducedCoefficients, region: Region) -> SpectralCoefficients {
    let m = a_prime.m;
    let mf = m as f64;
    let (w, h) = (region.width, region.height);
    let pi3 = PI * PI * PI;
    let pi4 = pi3 * PI;
    let half_sin: Vec<f64> = (0..m).map(|u| sin_pi(u as f64 / (2.0 * mf))).collect();
    let mut a = vec![0.0; m * m];
    for u in 0..m {
        let uf = u as f64;
        for p in 0..m {
            let pf = p as f64;
            let scale = match (u, p) {
                (0, 0) => 0.0,
                (0, _) => 4.0 * h * h / (pf * pf * pf * pi3 * mf) * half_sin[p],
                (_, 0) => 4.0 * w * w / (uf * uf * uf * pi3 * mf) * half_sin[u],
                _ => {
                    16.0 * w * w * h * h / (uf * pf * (uf * uf * h * h + pf * pf * w * w) * pi4)
                        * half_sin[u]
                        * half_sin[p]
                }
            };
            a[u * m + p] = scale * a_prime.get(u, p);
        }
    }
    SpectralCoefficients::from_vec(m - 1, region, a)
}

/// Coefficients zero-padded to an `m x m` grid indexed `[p * m + u]`, with
/// optional per-mode weights.
fn padded(c: &SpectralCoefficients, m: usize, weight: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let k = c.order();
    let mut g = vec![0.0; m * m];
    for u in 0..=k {
        for p in 0..=k {
            g[p * m + u] = c.get(u, p) * weight(u, p);
        }
    }
    g
}

fn check_order(c: &SpectralCoefficients, m: usize) -> Result<()> {
    if c.order() + 1 > m {
        return Err(Error::OrderTooLarge { k: c.order(), m });
    }
    Ok(())
}

/// Potential and field at the `m x m` bin centers from series coefficients of
/// order at most `m - 1`.
pub fn fast_field_map(c: &SpectralCoefficients, m: usize) -> Result<FieldMap> {
    let t = CosineTransform::new(m)?;
    field_with(&t, c, m)
}

fn field_with(t: &CosineTransform, c: &SpectralCoefficients, m: usize) -> Result<FieldMap> {
    check_order(c, m)?;
    let region = c.region();
    let (kx, ky) = (PI / region.width, PI / region.height);

    let mut psi = padded(c, m, |_, _| 1.0);
    along_x(&mut psi, m, |row, buf| t.dct3(row, buf));
    along_y(&mut psi, m, |col, buf| t.dct3(col, buf));

    let mut xi_x = padded(c, m, |u, _| u as f64 * kx);
    along_x(&mut xi_x, m, |row, buf| t.sine3(row, buf));
    along_y(&mut xi_x, m, |col, buf| t.dct3(col, buf));

    let mut xi_y = padded(c, m, |_, p| p as f64 * ky);
    along_x(&mut xi_y, m, |row, buf| t.dct3(row, buf));
    along_y(&mut xi_y, m, |col, buf| t.sine3(col, buf));

    Ok(FieldMap { m, region, psi, xi_x, xi_y })
}

/// Direct double-sum evaluation of potential and field at bin centers.
pub fn naive_field_map(c: &SpectralCoefficients, m: usize) -> Result<FieldMap> {
    check_order(c, m)?;
    let region = c.region();
    let k = c.order();
    let mf = m as f64;
    let mut map = FieldMap::zeros(m, region);
    for j in 0..m {
        for l in 0..m {
            let (mut psi, mut fx, mut fy) = (0.0, 0.0, 0.0);
            for u in 0..=k {
                let ax = u as f64 * (l as f64 + 0.5) * PI / mf;
                for p in 0..=k {
                    let ay = p as f64 * (j as f64 + 0.5) * PI / mf;
                    let a = c.get(u, p);
                    psi += a * ax.cos() * ay.cos();
                    fx += a * (u as f64 * PI / region.width) * ax.sin() * ay.cos();
                    fy += a * (p as f64 * PI / region.height) * ax.cos() * ay.sin();
                }
            }
            map.psi[j * m + l] = psi;
            map.xi_x[j * m + l] = fx;
            map.xi_y[j * m + l] = fy;
        }
    }
    Ok(map)
}

/// Reusable grid solver for a fixed `m`.
pub struct FastSolver {
    m: usize,
    transform: CosineTransform,
}

impl FastSolver {
    pub fn new(m: usize) -> Result<Self> {
        Ok(FastSolver { m, transform: CosineTransform::new(m)? })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coefficients(&self, grid: &DensityGrid) -> Result<SpectralCoefficients> {
        if grid.m != self.m {
            return Err(Error::UnsupportedGridSize(grid.m));
        }
        Ok(scale_coefficients(&reduced_with(&self.transform, grid), grid.region))
    }

    /// Potential and field maps of coefficients with order at most `m - 1`.
    pub fn field(&self, c: &SpectralCoefficients) -> Result<FieldMap> {
        field_with(&self.transform, c, self.m)
    }

    /// Density grid to potential and field maps.
    pub fn solve(&self, grid: &DensityGrid) -> Result<FieldMap> {
        let c = self.coefficients(grid)?;
        field_with(&self.transform, &c, self.m)
    }
}

/// Smallest power of two `m >= 2` with `m^2 >= n`.
pub fn grid_side_for(n: usize) -> usize {
    let root = (n as f64).sqrt().ceil() as usize;
    root.next_power_of_two().max(2)
}
