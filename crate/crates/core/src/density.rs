//! Continuous block density and its binned approximation.

use crate::error::{Error, Result};
use crate::netlist::{Block, Circuit, Placement, Rect, Region};

/// Exact piecewise-constant density: the number of blocks covering a point
/// minus the mean coverage, so that it integrates to zero over the region.
///
/// Rectangles are clipped to the region on construction.
#[derive(Debug, Clone)]
pub struct ExactDensity {
    rects: Vec<Rect>,
    region: Region,
    mean: f64,
}

impl ExactDensity {
    pub fn new(region: Region, rects: impl IntoIterator<Item = Rect>) -> Self {
        let rects: Vec<Rect> = rects.into_iter().filter_map(|r| r.clip(region)).collect();
        let mean = rects.iter().map(Rect::area).sum::<f64>() / region.area();
        ExactDensity { rects, region, mean }
    }

    /// Density of every area-occupying block of `circuit` at `placement`.
    pub fn from_placement(circuit: &Circuit, placement: &Placement) -> Self {
        let rects = circuit
            .blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| b.occupies_area())
            .map(|(i, b)| b.rect_at(placement.x[i], placement.y[i]));
        ExactDensity::new(circuit.region, rects)
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    pub fn region(&self) -> Region {
        self.region
    }

    /// Mean coverage `sum(w_i h_i) / (W H)` that is subtracted.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn total_charge(&self) -> f64 {
        self.rects.iter().map(Rect::area).sum()
    }

    /// Covering count minus the mean. Points on a block edge count as covered.
    pub fn at(&self, x: f64, y: f64) -> Result<f64> {
        self.region.check_point(x, y)?;
        let covered = self.rects.iter().filter(|r| r.x0 <= x && x <= r.x1 && r.y0 <= y && y <= r.y1).count();
        Ok(covered as f64 - self.mean)
    }
}

/// Density of `d` at a point.
pub fn exact_density_at(d: &ExactDensity, x: f64, y: f64) -> Result<f64> {
    d.at(x, y)
}

/// `m x m` bin densities. Storage is row-major with rows along y: bin `(l, j)`
/// (x index `l`, y index `j`) lives at `j * m + l`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub m: usize,
    pub region: Region,
    pub bin_w: f64,
    pub bin_h: f64,
    /// Area ratio per bin before mean subtraction.
    pub raw: Vec<f64>,
    /// `raw - raw_mean`.
    pub values: Vec<f64>,
    pub raw_mean: f64,
}

impl DensityGrid {
    /// Builds a grid from raw area ratios (row-major along y), subtracting the mean.
    pub fn from_raw(region: Region, m: usize, raw: Vec<f64>) -> Result<Self> {
        if m < 2 || raw.len() != m * m {
            return Err(Error::UnsupportedGridSize(m));
        }
        let raw_mean = raw.iter().sum::<f64>() / (m * m) as f64;
        let values = raw.iter().map(|v| v - raw_mean).collect();
        Ok(DensityGrid {
            m,
            region,
            bin_w: region.width / m as f64,
            bin_h: region.height / m as f64,
            raw,
            values,
            raw_mean,
        })
    }

    pub fn get(&self, l: usize, j: usize) -> f64 {
        self.values[j * self.m + l]
    }

    pub fn raw_at(&self, l: usize, j: usize) -> f64 {
        self.raw[j * self.m + l]
    }

    pub fn bin_area(&self) -> f64 {
        self.bin_w * self.bin_h
    }

    /// Center of bin `(l, j)`.
    pub fn bin_center(&self, l: usize, j: usize) -> (f64, f64) {
        ((l as f64 + 0.5) * self.bin_w, (j as f64 + 0.5) * self.bin_h)
    }
}

/// Which blocks a grid accumulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockFilter {
    /// Every block that occupies area: movable, fixed, and fillers.
    All,
    /// Movable blocks that are not fillers.
    Movable,
    /// Fixed blocks only.
    Fixed,
}

impl BlockFilter {
    fn accepts(self, b: &Block) -> bool {
        b.occupies_area()
            && match self {
                BlockFilter::All => true,
                BlockFilter::Movable => b.movable && !b.is_filler,
                BlockFilter::Fixed => !b.movable,
            }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DensityOptions {
    /// Inflate blocks smaller than a bin to bin size, scaling their density down.
    pub smoothing: bool,
    pub filter: BlockFilter,
}

impl Default for DensityOptions {
    fn default() -> Self {
        DensityOptions { smoothing: true, filter: BlockFilter::All }
    }
}

/// Per-axis footprint of one block: interval and density factor.
fn footprint_1d(center: f64, size: f64, extent: f64, bin: f64, smoothing: bool) -> Option<(f64, f64, f64)> {
    let lo = (center - 0.5 * size).max(0.0);
    let hi = (center + 0.5 * size).min(extent);
    let len = hi - lo;
    if len <= 0.0 {
        return None;
    }
    if smoothing && len < bin {
        let c = 0.5 * (lo + hi);
        let start = (c - 0.5 * bin).clamp(0.0, extent - bin);
        Some((start, start + bin, len / bin))
    } else {
        Some((lo, hi, 1.0))
    }
}

/// Bin range `first..=last` covered by `[a, b]`.
fn bin_span(a: f64, b: f64, bin: f64, m: usize) -> (usize, usize) {
    let first = ((a / bin).floor() as usize).min(m - 1);
    let last = (((b / bin).ceil() as usize).max(first + 1) - 1).min(m - 1);
    (first, last)
}

/// Length of `[a, b]` inside bin `k`.
fn bin_overlap(a: f64, b: f64, bin: f64, k: usize) -> f64 {
    let lo = k as f64 * bin;
    (b.min(lo + bin) - a.max(lo)).max(0.0)
}

/// Scatters block areas into an `m x m` grid of area ratios (no mean subtraction).
fn scatter(circuit: &Circuit, placement: &Placement, m: usize, opts: DensityOptions) -> Vec<f64> {
    let region = circuit.region;
    let bin_w = region.width / m as f64;
    let bin_h = region.height / m as f64;
    let inv_bin_area = 1.0 / (bin_w * bin_h);
    let mut raw = vec![0.0; m * m];
    for (i, b) in circuit.blocks.iter().enumerate() {
        if !opts.filter.accepts(b) {
            continue;
        }
        let Some((x0, x1, fx)) = footprint_1d(placement.x[i], b.width, region.width, bin_w, opts.smoothing) else {
            continue;
        };
        let Some((y0, y1, fy)) = footprint_1d(placement.y[i], b.height, region.height, bin_h, opts.smoothing) else {
            continue;
        };
        let (lx, hx) = bin_span(x0, x1, bin_w, m);
        let (ly, hy) = bin_span(y0, y1, bin_h, m);
        let scale = fx * fy * inv_bin_area;
        for j in ly..=hy {
            let wy = bin_overlap(y0, y1, bin_h, j) * scale;
            let row = &mut raw[j * m..(j + 1) * m];
            for (l, cell) in row.iter_mut().enumerate().take(hx + 1).skip(lx) {
                *cell += bin_overlap(x0, x1, bin_w, l) * wy;
            }
        }
    }
    raw
}

/// Bin density of all area-occupying blocks with local smoothing, mean-subtracted.
pub fn build_bin_density(placement: &Placement, circuit: &Circuit, m: usize) -> Result<DensityGrid> {
    build_bin_density_with(placement, circuit, m, DensityOptions::default())
}

pub fn build_bin_density_with(
    placement: &Placement,
    circuit: &Circuit,
    m: usize,
    opts: DensityOptions,
) -> Result<DensityGrid> {
    if m < 2 {
        return Err(Error::UnsupportedGridSize(m));
    }
    DensityGrid::from_raw(circuit.region, m, scatter(circuit, placement, m, opts))
}

/// Area overflow of movable blocks over the per-bin capacity, as a fraction of
/// the movable area.
///
/// A bin's capacity is `target * (bin area - fixed area in the bin)`. Both grids
/// should be built without smoothing. Returns 0 when there is no movable area.
pub fn overflow_ratio(movable: &DensityGrid, fixed: Option<&DensityGrid>, target_density: f64) -> f64 {
    let bin_area = movable.bin_area();
    let total: f64 = movable.raw.iter().sum::<f64>() * bin_area;
    if total <= 0.0 {
        return 0.0;
    }
    let over: f64 = movable
        .raw
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            let free = 1.0 - fixed.map_or(0.0, |f| f.raw[k]).min(1.0);
            (d - target_density * free).max(0.0) * bin_area
        })
        .sum();
    over / total
}

/// Overflow ratio of `circuit`'s movable blocks at `placement` on an `m x m` grid.
pub fn placement_overflow(circuit: &Circuit, placement: &Placement, m: usize) -> Result<f64> {
    let exact = |filter| DensityOptions { smoothing: false, filter };
    let movable = build_bin_density_with(placement, circuit, m, exact(BlockFilter::Movable))?;
    let fixed = build_bin_density_with(placement, circuit, m, exact(BlockFilter::Fixed))?;
    Ok(overflow_ratio(&movable, Some(&fixed), circuit.target_density))
}
