//! Unconnected filler cells that take up whitespace.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::netlist::{Block, Circuit};

/// Free capacity left for fillers: `W H target - movable area - fixed area`.
pub fn whitespace(circuit: &Circuit) -> f64 {
    circuit.region.area() * circuit.target_density - circuit.movable_area() - circuit.fixed_area_in_region()
}

/// Square fillers with side equal to the geometric mean of the average movable
/// cell width and height, covering `filler_ratio` of the whitespace, placed
/// uniformly at random.
pub fn insert_fillers(circuit: &Circuit, filler_ratio: f64, seed: u64) -> Vec<Block> {
    let space = whitespace(circuit);
    if space <= 0.0 {
        if space < 0.0 {
            log::warn!("negative whitespace {space:.6}; no fillers inserted");
        }
        return Vec::new();
    }
    let cells: Vec<&Block> = circuit.blocks.iter().filter(|b| b.movable && !b.is_filler).collect();
    if cells.is_empty() || filler_ratio <= 0.0 {
        return Vec::new();
    }
    let n = cells.len() as f64;
    let avg_w = cells.iter().map(|b| b.width).sum::<f64>() / n;
    let avg_h = cells.iter().map(|b| b.height).sum::<f64>() / n;
    let side = (avg_w * avg_h).sqrt().min(circuit.region.width).min(circuit.region.height);
    let count = (filler_ratio * space / (side * side)).floor() as usize;

    let (w, h) = (circuit.region.width, circuit.region.height);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut prefix = String::from("__filler");
    while circuit.blocks.iter().any(|b| b.name.starts_with(&prefix)) {
        prefix.push('_');
    }
    (0..count)
        .map(|i| {
            let x = rng.gen_range(0.5 * side..=w - 0.5 * side);
            let y = rng.gen_range(0.5 * side..=h - 0.5 * side);
            Block::filler(format!("{prefix}{i}"), side, x, y)
        })
        .collect()
}
