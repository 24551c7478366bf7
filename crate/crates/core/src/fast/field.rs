use crate::error::Result;
use crate::netlist::Region;

/// Potential and field sampled at the `m x m` bin centers, row-major along y
/// (bin `(l, j)` at `j * m + l`).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    pub m: usize,
    pub region: Region,
    pub psi: Vec<f64>,
    pub xi_x: Vec<f64>,
    pub xi_y: Vec<f64>,
}

impl FieldMap {
    pub fn zeros(m: usize, region: Region) -> Self {
        FieldMap { m, region, psi: vec![0.0; m * m], xi_x: vec![0.0; m * m], xi_y: vec![0.0; m * m] }
    }

    pub fn bin_w(&self) -> f64 {
        self.region.width / self.m as f64
    }

    pub fn bin_h(&self) -> f64 {
        self.region.height / self.m as f64
    }

    pub fn psi_at(&self, l: usize, j: usize) -> f64 {
        self.psi[j * self.m + l]
    }

    pub fn xi_at(&self, l: usize, j: usize) -> (f64, f64) {
        let k = j * self.m + l;
        (self.xi_x[k], self.xi_y[k])
    }

    pub fn mean_psi(&self) -> f64 {
        self.psi.iter().sum::<f64>() / self.psi.len() as f64
    }

    pub fn max_abs_psi(&self) -> f64 {
        self.psi.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn max_abs_xi(&self) -> f64 {
        self.xi_x.iter().zip(&self.xi_y).fold(0.0, |a, (x, y)| a.max(x.hypot(*y)))
    }

    /// Field magnitude per bin.
    pub fn xi_magnitude(&self) -> Vec<f64> {
        self.xi_x.iter().zip(&self.xi_y).map(|(x, y)| x.hypot(*y)).collect()
    }

    /// Entry-wise difference `self - other`.
    pub fn residual(&self, other: &FieldMap) -> FieldMap {
        let sub = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect();
        FieldMap {
            m: self.m,
            region: self.region,
            psi: sub(&self.psi, &other.psi),
            xi_x: sub(&self.xi_x, &other.xi_x),
            xi_y: sub(&self.xi_y, &other.xi_y),
        }
    }

    /// Bilinear weights for `(x, y)`: lower-left bin and fractional offsets.
    /// Points within half a bin of the boundary clamp to the outer ring.
    pub(crate) fn stencil(&self, x: f64, y: f64) -> (usize, usize, f64, f64) {
        let m = self.m;
        let locate = |v: f64, bin: f64| -> (usize, f64) {
            let f = (v / bin - 0.5).clamp(0.0, (m - 1) as f64);
            let i = (f.floor() as usize).min(m - 2);
            (i, f - i as f64)
        };
        let (l, tx) = locate(x, self.bin_w());
        let (j, ty) = locate(y, self.bin_h());
        (l, j, tx, ty)
    }

    fn blend(&self, data: &[f64], (l, j, tx, ty): (usize, usize, f64, f64)) -> f64 {
        let m = self.m;
        let at = |l: usize, j: usize| data[j * m + l];
        (1.0 - ty) * ((1.0 - tx) * at(l, j) + tx * at(l + 1, j)) + ty * ((1.0 - tx) * at(l, j + 1) + tx * at(l + 1, j + 1))
    }

    /// `(psi, xi_x, xi_y)` at an arbitrary point by bilinear interpolation of
    /// the four surrounding bin centers.
    pub fn interpolate(&self, x: f64, y: f64) -> Result<(f64, f64, f64)> {
        self.region.check_point(x, y)?;
        let s = self.stencil(x, y);
        Ok((self.blend(&self.psi, s), self.blend(&self.xi_x, s), self.blend(&self.xi_y, s)))
    }

    /// As [`FieldMap::interpolate`] without the region check; points outside are clamped.
    pub(crate) fn interpolate_clamped(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let s = self.stencil(x, y);
        (self.blend(&self.psi, s), self.blend(&self.xi_x, s), self.blend(&self.xi_y, s))
    }
}

/// `(psi, xi_x, xi_y)` of `map` at a point.
pub fn interpolate_field(map: &FieldMap, x: f64, y: f64) -> Result<(f64, f64, f64)> {
    map.interpolate(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(m: usize) -> FieldMap {
        let mut f = FieldMap::zeros(m, Region::new(m as f64, 2.0 * m as f64));
        for j in 0..m {
            for l in 0..m {
                f.psi[j * m + l] = (l * l + 3 * j) as f64;
                f.xi_x[j * m + l] = l as f64 - j as f64;
                f.xi_y[j * m + l] = 1.0;
            }
        }
        f
    }

    #[test]
    fn exact_at_bin_centers() {
        let f = ramp(4);
        for j in 0..4 {
            for l in 0..4 {
                let (x, y) = (l as f64 + 0.5, 2.0 * (j as f64 + 0.5));
                let (p, fx, fy) = f.interpolate(x, y).unwrap();
                assert_eq!((p, fx, fy), (f.psi_at(l, j), f.xi_at(l, j).0, 1.0));
            }
        }
    }

    #[test]
    fn midpoint_is_mean_and_within_envelope() {
        let f = ramp(4);
        let (p, _, _) = f.interpolate(2.0, 3.0).unwrap();
        let (a, b) = (f.psi_at(1, 1), f.psi_at(2, 1));
        assert!((p - 0.5 * (a + b)).abs() < 1e-12);
        for k in 0..=20 {
            let x = 1.5 + k as f64 / 20.0;
            let (p, _, _) = f.interpolate(x, 3.0).unwrap();
            assert!(p >= a.min(b) - 1e-12 && p <= a.max(b) + 1e-12);
        }
    }

    #[test]
    fn boundary_ring_clamps() {
        let f = ramp(4);
        let (p, _, _) = f.interpolate(0.0, 0.0).unwrap();
        assert_eq!(p, f.psi_at(0, 0));
        let (p, _, _) = f.interpolate(4.0, 8.0).unwrap();
        assert_eq!(p, f.psi_at(3, 3));
        assert!(f.interpolate(4.1, 0.0).is_err());
    }
}
