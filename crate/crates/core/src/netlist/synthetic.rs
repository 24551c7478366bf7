//! Seeded synthetic circuits with local net structure.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Block, Circuit, Net, Pin, Region, Row};
use crate::error::{Error, Result};

const UTILIZATION: f64 = 0.5;

/// Generates `n_cells` identical movable cells and `n_nets` nets of degree 2..=5.
///
/// Cells sit on a hidden square lattice and each net joins a random cell with
/// lattice neighbours, so a good placement has much lower wirelength than a
/// random one. Cells start clustered around the region center. Rows have the
/// cell height and span the region width with a whole number of sites, each at
/// least one cell wide; total cell area is half the region.
pub fn generate_synthetic(n_cells: usize, n_nets: usize, region: Region, seed: u64) -> Result<Circuit> {
    if n_cells == 0 {
        return Err(Error::Infeasible("at least one cell is required".into()));
    }
    if !(region.width > 0.0 && region.height > 0.0) {
        return Err(Error::Infeasible(format!("region {} x {} is not positive", region.width, region.height)));
    }
    let (w, h) = (region.width, region.height);
    let side = (UTILIZATION * w * h / n_cells as f64).sqrt();
    let n_rows = ((h / side).floor() as usize).max(1);
    let cell_h = h / n_rows as f64;
    let cell_w = UTILIZATION * w * n_rows as f64 / n_cells as f64;
    if cell_w > w {
        return Err(Error::Infeasible(format!("{n_cells} cells do not fit {n_rows} rows of width {w}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks: Vec<Block> = (0..n_cells)
        .map(|i| {
            let x = w * rng.gen_range(0.45..0.55);
            let y = h * rng.gen_range(0.45..0.55);
            Block::cell(format!("c{i}"), cell_w, cell_h, x, y)
        })
        .collect();

    // Hidden lattice: cell i lives at (i % s, i / s).
    let s = (n_cells as f64).sqrt().ceil() as i64;
    let at = |c: i64, r: i64| -> Option<usize> {
        let i = r * s + c;
        (c >= 0 && c < s && r >= 0 && i < n_cells as i64).then_some(i as usize)
    };
    let mut nets = Vec::with_capacity(n_nets);
    for ni in 0..n_nets {
        let degree = rng.gen_range(2..=5usize).min(n_cells);
        let root = rng.gen_range(0..n_cells);
        let (rc, rr) = ((root as i64) % s, (root as i64) / s);
        let mut members = vec![root];
        let mut neighbours: Vec<usize> = (-2..=2)
            .flat_map(|dr| (-2..=2).map(move |dc| (dc, dr)))
            .filter_map(|(dc, dr)| at(rc + dc, rr + dr))
            .filter(|&i| i != root)
            .collect();
        neighbours.shuffle(&mut rng);
        members.extend(neighbours.into_iter().take(degree - 1));
        while members.len() < degree {
            let c = rng.gen_range(0..n_cells);
            if !members.contains(&c) {
                members.push(c);
            }
        }
        let pins = members.into_iter().map(|block| Pin { block, dx: 0.0, dy: 0.0 }).collect();
        nets.push(Net { name: format!("n{ni}"), pins });
    }

    let site = w / (w / cell_w).floor();
    let rows = (0..n_rows)
        .map(|r| Row { y: r as f64 * cell_h, height: cell_h, site_width: site, segments: vec![(0.0, w)] })
        .collect();
    Circuit::new(format!("synthetic{n_cells}"), blocks, nets, region, 1.0, rows)
}
