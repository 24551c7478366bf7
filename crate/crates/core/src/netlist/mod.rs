//! Circuit model: blocks, nets, rows, and placements.

mod bookshelf;
mod synthetic;

use std::collections::HashMap;

pub use bookshelf::{parse_bookshelf, read_placement, write_bookshelf, write_placement};
pub use synthetic::generate_synthetic;

use crate::error::{Error, Result};

/// Placement region `[0, width] x [0, height]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub width: f64,
    pub height: f64,
}

impl Region {
    pub fn new(width: f64, height: f64) -> Self {
        Region { width, height }
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=self.width).contains(&x) && (0.0..=self.height).contains(&y)
    }

    pub(crate) fn check_point(&self, x: f64, y: f64) -> Result<()> {
        if self.contains(x, y) {
            Ok(())
        } else {
            Err(Error::OutsideRegion { x, y, width: self.width, height: self.height })
        }
    }
}

/// Axis-aligned rectangle given by its corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn centered(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Rect { x0: cx - 0.5 * w, y0: cy - 0.5 * h, x1: cx + 0.5 * w, y1: cy + 0.5 * h }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    /// Intersection with the region, `None` when empty.
    pub fn clip(&self, region: Region) -> Option<Rect> {
        let r = Rect {
            x0: self.x0.max(0.0),
            y0: self.y0.max(0.0),
            x1: self.x1.min(region.width),
            y1: self.y1.min(region.height),
        };
        (r.x1 > r.x0 && r.y1 > r.y0).then_some(r)
    }

    pub fn overlap_area(&self, other: &Rect) -> f64 {
        let w = self.x1.min(other.x1) - self.x0.max(other.x0);
        let h = self.y1.min(other.y1) - self.y0.max(other.y0);
        if w > 0.0 && h > 0.0 {
            w * h
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub name: String,
    pub width: f64,
    pub height: f64,
    pub movable: bool,
    pub is_filler: bool,
    /// Bookshelf `terminal_NI`: a fixed pin location that occupies no area.
    pub non_image: bool,
    /// Center coordinates.
    pub x: f64,
    pub y: f64,
}

impl Block {
    pub fn cell(name: impl Into<String>, width: f64, height: f64, x: f64, y: f64) -> Self {
        Block {
            name: name.into(),
            width,
            height,
            movable: true,
            is_filler: false,
            non_image: false,
            x,
            y,
        }
    }

    pub fn fixed(name: impl Into<String>, width: f64, height: f64, x: f64, y: f64) -> Self {
        Block { movable: false, ..Block::cell(name, width, height, x, y) }
    }

    pub fn filler(name: impl Into<String>, side: f64, x: f64, y: f64) -> Self {
        Block { is_filler: true, ..Block::cell(name, side, side, x, y) }
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn rect_at(&self, x: f64, y: f64) -> Rect {
        Rect::centered(x, y, self.width, self.height)
    }

    /// Whether the block contributes charge to the density.
    pub fn occupies_area(&self) -> bool {
        !self.non_image && self.area() > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pin {
    pub block: usize,
    /// Offset from the block center.
    pub dx: f64,
    pub dy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    pub name: String,
    pub pins: Vec<Pin>,
}

/// A placement row, possibly split into several free segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub y: f64,
    pub height: f64,
    pub site_width: f64,
    /// Disjoint, sorted `[x0, x1)` intervals.
    pub segments: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Circuit {
    pub name: String,
    pub blocks: Vec<Block>,
    pub nets: Vec<Net>,
    pub region: Region,
    pub target_density: f64,
    pub rows: Vec<Row>,
    /// Offset subtracted from the source coordinates to move the region to the origin.
    pub origin: (f64, f64),
    index: HashMap<String, usize>,
}

impl Circuit {
    pub fn new(
        name: impl Into<String>,
        blocks: Vec<Block>,
        nets: Vec<Net>,
        region: Region,
        target_density: f64,
        rows: Vec<Row>,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(blocks.len());
        for (i, b) in blocks.iter().enumerate() {
            if index.insert(b.name.clone(), i).is_some() {
                return Err(Error::InvalidCircuit(format!("duplicate block id `{}`", b.name)));
            }
        }
        let c = Circuit {
            name: name.into(),
            blocks,
            nets,
            region,
            target_density,
            rows,
            origin: (0.0, 0.0),
            index,
        };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::InvalidCircuit(m));
        if !(self.region.width > 0.0 && self.region.height > 0.0) {
            return invalid(format!("region {} x {} is not positive", self.region.width, self.region.height));
        }
        if !(self.target_density > 0.0 && self.target_density <= 1.0) {
            return invalid(format!("target density {} outside (0, 1]", self.target_density));
        }
        for b in &self.blocks {
            let ok = if b.movable { b.width > 0.0 && b.height > 0.0 } else { b.width >= 0.0 && b.height >= 0.0 };
            if !ok || !b.x.is_finite() || !b.y.is_finite() {
                return invalid(format!("block `{}` has invalid geometry", b.name));
            }
        }
        for net in &self.nets {
            if net.pins.is_empty() {
                return invalid(format!("net `{}` has no pins", net.name));
            }
            for p in &net.pins {
                match self.blocks.get(p.block) {
                    None => return invalid(format!("net `{}` pin references block #{}", net.name, p.block)),
                    Some(b) if b.is_filler => {
                        return invalid(format!("net `{}` connects filler `{}`", net.name, b.name))
                    }
                    _ => {}
                }
            }
        }
        let capacity = self.region.area() * self.target_density;
        let movable = self.movable_area();
        if movable > capacity * (1.0 + 1e-9) {
            return invalid(format!("movable area {movable} exceeds capacity {capacity}"));
        }
        Ok(())
    }

    pub fn block_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn num_pins(&self) -> usize {
        self.nets.iter().map(|n| n.pins.len()).sum()
    }

    /// Total area of movable, non-filler blocks.
    pub fn movable_area(&self) -> f64 {
        self.blocks.iter().filter(|b| b.movable && !b.is_filler).map(Block::area).sum()
    }

    /// Area of fixed blocks inside the region.
    pub fn fixed_area_in_region(&self) -> f64 {
        self.blocks
            .iter()
            .filter(|b| !b.movable && b.occupies_area())
            .filter_map(|b| b.rect_at(b.x, b.y).clip(self.region))
            .map(|r| r.area())
            .sum()
    }

    pub fn initial_placement(&self) -> Placement {
        Placement {
            x: self.blocks.iter().map(|b| b.x).collect(),
            y: self.blocks.iter().map(|b| b.y).collect(),
        }
    }

    /// Per-block list of incident net indices.
    pub fn block_nets(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.blocks.len()];
        for (ni, net) in self.nets.iter().enumerate() {
            for p in &net.pins {
                if out[p.block].last() != Some(&ni) {
                    out[p.block].push(ni);
                }
            }
        }
        out
    }

    pub fn with_placement(&self, placement: &Placement) -> Circuit {
        let mut c = self.clone();
        for (i, b) in c.blocks.iter_mut().enumerate() {
            b.x = placement.x[i];
            b.y = placement.y[i];
        }
        c
    }
}

/// Block center coordinates indexed like `Circuit::blocks`.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Placement {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Half-perimeter wirelength of every net, summed.
pub fn hpwl(circuit: &Circuit, placement: &Placement) -> f64 {
    circuit.nets.iter().map(|net| net_hpwl(net, placement)).sum()
}

pub(crate) fn net_hpwl(net: &Net, placement: &Placement) -> f64 {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &net.pins {
        let x = placement.x[p.block] + p.dx;
        let y = placement.y[p.block] + p.dy;
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    (x1 - x0) + (y1 - y0)
}
