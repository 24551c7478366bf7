#![allow(dead_code)]

use neumann_place::density::{DensityGrid, ExactDensity};
use neumann_place::netlist::{Block, Circuit, Net, Pin, Rect, Region};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` random rectangles inside `region`, each up to a quarter of its sides.
pub fn random_density(seed: u64, n: usize, region: Region) -> ExactDensity {
    let mut r = rng(seed);
    let (w, h) = (region.width, region.height);
    let rects: Vec<Rect> = (0..n)
        .map(|_| {
            let bw = r.gen_range(0.02..0.25) * w;
            let bh = r.gen_range(0.02..0.25) * h;
            let cx = r.gen_range(0.5 * bw..w - 0.5 * bw);
            let cy = r.gen_range(0.5 * bh..h - 0.5 * bh);
            Rect::centered(cx, cy, bw, bh)
        })
        .collect();
    ExactDensity::new(region, rects)
}

/// Random mean-subtracted `m x m` grid.
pub fn random_grid(seed: u64, m: usize, region: Region) -> DensityGrid {
    let mut r = rng(seed);
    let raw = (0..m * m).map(|_| r.gen_range(0.0..2.0)).collect();
    DensityGrid::from_raw(region, m, raw).unwrap()
}

/// `n` movable cells scattered at random with random 2-4 pin nets and two
/// fixed pads, in a `side x side` region.
pub fn random_circuit(seed: u64, n: usize, side: f64) -> Circuit {
    let mut r = rng(seed);
    let cell = 0.08 * side;
    let mut blocks: Vec<Block> = (0..n)
        .map(|i| {
            let w = cell * r.gen_range(0.5..1.5);
            let h = cell * r.gen_range(0.5..1.5);
            Block::cell(format!("c{i}"), w, h, r.gen_range(0.2..0.8) * side, r.gen_range(0.2..0.8) * side)
        })
        .collect();
    blocks.push(Block::fixed("p0", 0.0, 0.0, 0.0, 0.3 * side));
    blocks.push(Block::fixed("p1", 0.0, 0.0, side, 0.7 * side));
    let total = blocks.len();
    let mut nets = Vec::new();
    for k in 0..n + 2 {
        let degree = r.gen_range(2..=4);
        let mut members: Vec<usize> = Vec::new();
        if k < 2 {
            members.push(n + k);
        }
        while members.len() < degree {
            let b = r.gen_range(0..total);
            if !members.contains(&b) {
                members.push(b);
            }
        }
        let pins = members
            .into_iter()
            .map(|block| Pin { block, dx: r.gen_range(-0.2..0.2) * cell, dy: r.gen_range(-0.2..0.2) * cell })
            .collect();
        nets.push(Net { name: format!("n{k}"), pins });
    }
    Circuit::new("rand", blocks, nets, Region::new(side, side), 1.0, vec![]).unwrap()
}

/// `max |a - b| / max |b|`.
pub fn norm_relative(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
