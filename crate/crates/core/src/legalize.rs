//! Row legalization (Tetris-style greedy packing) and adjacent-swap detailed
//! placement.

use crate::error::{Error, Result};
use crate::netlist::{net_hpwl, Block, Circuit, Placement, Rect, Row};

const EPS: f64 = 1e-9;

/// Rows of the circuit, or uniform full-width rows of the median movable cell
/// height when it declares none.
pub fn rows_or_uniform(circuit: &Circuit) -> Vec<Row> {
    if !circuit.rows.is_empty() {
        return circuit.rows.clone();
    }
    let mut heights: Vec<f64> =
        circuit.blocks.iter().filter(|b| b.movable && !b.is_filler).map(|b| b.height).collect();
    if heights.is_empty() {
        return Vec::new();
    }
    heights.sort_by(f64::total_cmp);
    let h = heights[heights.len() / 2];
    let n = (circuit.region.height / h + EPS).floor() as usize;
    (0..n)
        .map(|r| Row { y: r as f64 * h, height: h, site_width: 0.0, segments: vec![(0.0, circuit.region.width)] })
        .collect()
}

struct Lane {
    y: f64,
    height: f64,
    site: f64,
    origin: f64,
    /// Disjoint free intervals sorted by x.
    free: Vec<(f64, f64)>,
}

impl Lane {
    fn snap_up(&self, x: f64) -> f64 {
        if self.site > 0.0 {
            self.origin + ((x - self.origin) / self.site - EPS).ceil() * self.site
        } else {
            x
        }
    }

    fn snap_down(&self, x: f64) -> f64 {
        if self.site > 0.0 {
            self.origin + ((x - self.origin) / self.site + EPS).floor() * self.site
        } else {
            x
        }
    }

    fn snap_near(&self, x: f64) -> f64 {
        if self.site > 0.0 {
            self.origin + ((x - self.origin) / self.site).round() * self.site
        } else {
            x
        }
    }

    /// Site-aligned left edge closest to `want` for a cell of width `w` inside
    /// free interval `k`, if it fits.
    fn slot(&self, k: usize, want: f64, w: f64) -> Option<f64> {
        let (a, b) = self.free[k];
        let lo = self.snap_up(a);
        let hi = self.snap_down(b - w);
        if lo > hi + EPS {
            return None;
        }
        Some(self.snap_near(want).clamp(lo, hi.max(lo)))
    }

    /// Removes `[a, b]` from the free intervals.
    fn occupy(&mut self, a: f64, b: f64) {
        let mut out = Vec::with_capacity(self.free.len() + 1);
        for &(x0, x1) in &self.free {
            if b <= x0 + EPS || a >= x1 - EPS {
                out.push((x0, x1));
                continue;
            }
            if a > x0 + EPS {
                out.push((x0, a));
            }
            if b < x1 - EPS {
                out.push((b, x1));
            }
        }
        self.free = out;
    }

    /// As [`Lane::occupy`] for a cell just placed in free interval `k`.
    fn occupy_at(&mut self, k: usize, a: f64, b: f64) {
        let (x0, x1) = self.free[k];
        let mut parts = Vec::with_capacity(2);
        if a > x0 + EPS {
            parts.push((x0, a));
        }
        if b < x1 - EPS {
            parts.push((b, x1));
        }
        self.free.splice(k..=k, parts);
    }
}

fn is_macro(b: &Block, row_height: f64) -> bool {
    b.height > row_height * (1.0 + 1e-6)
}

/// Free x-intervals of `[0, width]` not covered by `blockers` in the band `[y0, y1]`.
fn free_intervals(width: f64, y0: f64, y1: f64, blockers: &[Rect]) -> Vec<(f64, f64)> {
    let mut covered: Vec<(f64, f64)> =
        blockers.iter().filter(|r| r.y0 < y1 - EPS && r.y1 > y0 + EPS).map(|r| (r.x0, r.x1)).collect();
    covered.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut free = Vec::new();
    let mut at = 0.0;
    for (a, b) in covered {
        if a > at {
            free.push((at, a.min(width)));
        }
        at = at.max(b);
    }
    if at < width {
        free.push((at, width));
    }
    free
}

/// Places movable macros one at a time, largest first, at the nearest
/// row-aligned spot free of fixed blocks and earlier macros.
fn place_macros(
    circuit: &Circuit,
    placement: &mut Placement,
    macros: &[usize],
    rows: &[Row],
    blockers: &mut Vec<Rect>,
) -> Result<()> {
    let region = circuit.region;
    let mut order = macros.to_vec();
    order.sort_by(|&a, &b| circuit.blocks[b].area().total_cmp(&circuit.blocks[a].area()).then(a.cmp(&b)));
    let mut ys: Vec<f64> = rows.iter().map(|r| r.y).collect();
    if ys.is_empty() {
        ys.push(0.0);
    }
    for i in order {
        let b = &circuit.blocks[i];
        let (want_x, want_y) = (placement.x[i] - 0.5 * b.width, placement.y[i] - 0.5 * b.height);
        let mut cands: Vec<f64> = ys.iter().copied().filter(|y| y + b.height <= region.height + EPS).collect();
        cands.sort_by(|a, c| (a - want_y).abs().total_cmp(&(c - want_y).abs()));
        let mut best: Option<(f64, f64, f64)> = None;
        for y in cands {
            let dy = (y - want_y).abs();
            if best.is_some_and(|(c, _, _)| dy >= c) {
                break;
            }
            for (a, c) in free_intervals(region.width, y, y + b.height, blockers) {
                if c - a + EPS < b.width {
                    continue;
                }
                let x = want_x.clamp(a, c - b.width);
                let cost = (x - want_x).abs() + dy;
                if best.is_none_or(|(bc, _, _)| cost < bc) {
                    best = Some((cost, x, y));
                }
            }
        }
        let Some((_, x, y)) = best else {
            return Err(Error::RowCapacity(b.name.clone()));
        };
        placement.x[i] = x + 0.5 * b.width;
        placement.y[i] = y + 0.5 * b.height;
        blockers.push(b.rect_at(placement.x[i], placement.y[i]));
    }
    Ok(())
}

fn build_lanes(rows: &[Row], blockers: &[Rect]) -> Vec<Lane> {
    rows.iter()
        .map(|r| {
            let mut lane = Lane {
                y: r.y,
                height: r.height,
                site: r.site_width,
                origin: r.segments.first().map_or(0.0, |s| s.0),
                free: r.segments.clone(),
            };
            for rect in blockers {
                if rect.y0 < r.y + r.height - EPS && rect.y1 > r.y + EPS {
                    lane.occupy(rect.x0, rect.x1);
                }
            }
            lane
        })
        .collect()
}

/// Cheapest slot for a cell in one lane: `(cost, interval, x)`. Free
/// intervals are scanned outwards from `want_x` until they are farther than
/// `bound`.
fn best_in_lane(lane: &Lane, want_x: f64, w: f64, dy: f64, bound: f64) -> Option<(f64, usize, f64)> {
    let split = lane.free.partition_point(|iv| iv.1 <= want_x);
    let mut best: Option<(f64, usize, f64)> = None;
    let limit = |best: &Option<(f64, usize, f64)>| best.map_or(bound, |b| b.0.min(bound));
    for k in split..lane.free.len() {
        if (lane.free[k].0 - want_x).max(0.0) + dy >= limit(&best) {
            break;
        }
        if let Some(x) = lane.slot(k, want_x, w) {
            let cost = (x - want_x).abs() + dy;
            if cost < limit(&best) {
                best = Some((cost, k, x));
            }
        }
    }
    for k in (0..split).rev() {
        if (want_x + w - lane.free[k].1).max(0.0) + dy >= limit(&best) {
            break;
        }
        if let Some(x) = lane.slot(k, want_x, w) {
            let cost = (x - want_x).abs() + dy;
            if cost < limit(&best) {
                best = Some((cost, k, x));
            }
        }
    }
    best
}

/// Greedy pass over `cells` in order: each takes the free slot nearest its
/// desired position over all rows, or with `packed`, the leftmost slot of the
/// nearest row that has room. Returns the first cell that did not fit.
fn tetris(
    circuit: &Circuit,
    placement: &mut Placement,
    cells: &[usize],
    lanes: &mut [Lane],
    packed: bool,
) -> std::result::Result<(), usize> {
    let mut by_y: Vec<usize> = (0..lanes.len()).collect();
    for &i in cells {
        let b = &circuit.blocks[i];
        let want_x = if packed { f64::NEG_INFINITY } else { placement.x[i] - 0.5 * b.width };
        let want_y = placement.y[i] - 0.5 * b.height;
        by_y.sort_by(|&a, &c| (lanes[a].y - want_y).abs().total_cmp(&(lanes[c].y - want_y).abs()).then(a.cmp(&c)));
        let mut best: Option<(f64, usize, usize, f64)> = None;
        for &r in &by_y {
            let lane = &lanes[r];
            let dy = (lane.y - want_y).abs();
            let bound = best.map_or(f64::INFINITY, |b| b.0);
            if dy >= bound {
                break;
            }
            if b.height > lane.height + EPS {
                continue;
            }
            let found = if packed {
                (0..lane.free.len()).find_map(|k| lane.slot(k, lane.free[k].0, b.width).map(|x| (dy, k, x)))
            } else {
                best_in_lane(lane, want_x, b.width, dy, bound)
            };
            if let Some((cost, k, x)) = found {
                if cost < bound {
                    best = Some((cost, r, k, x));
                }
            }
        }
        let Some((_, r, k, x)) = best else {
            return Err(i);
        };
        lanes[r].occupy_at(k, x, x + b.width);
        placement.x[i] = x + 0.5 * b.width;
        placement.y[i] = lanes[r].y + 0.5 * b.height;
    }
    Ok(())
}

/// Snaps every movable block to a legal, overlap-free position: macros first
/// (treated as blockages afterwards), then cells in order of x, each to the
/// nearest free slot over the nearest rows. Falls back to packing cells
/// leftwards when fragmentation leaves a cell without room.
pub fn legalize_rows(circuit: &Circuit, placement: &Placement) -> Result<Placement> {
    let rows = rows_or_uniform(circuit);
    let row_h = rows.iter().map(|r| r.height).fold(f64::INFINITY, f64::min);
    let mut out = placement.clone();
    let region = circuit.region;
    let movable: Vec<usize> =
        (0..circuit.blocks.len()).filter(|&i| circuit.blocks[i].movable && !circuit.blocks[i].is_filler).collect();
    for &i in &movable {
        let b = &circuit.blocks[i];
        out.x[i] = out.x[i].clamp(0.5 * b.width, (region.width - 0.5 * b.width).max(0.5 * b.width));
        out.y[i] = out.y[i].clamp(0.5 * b.height, (region.height - 0.5 * b.height).max(0.5 * b.height));
    }
    let mut blockers: Vec<Rect> = circuit
        .blocks
        .iter()
        .enumerate()
        .filter(|(_, b)| !b.movable && b.occupies_area())
        .map(|(i, b)| b.rect_at(placement.x[i], placement.y[i]))
        .collect();
    let (macros, mut cells): (Vec<usize>, Vec<usize>) =
        movable.iter().partition(|&&i| is_macro(&circuit.blocks[i], row_h));
    place_macros(circuit, &mut out, &macros, &rows, &mut blockers)?;

    cells.sort_by(|&a, &b| {
        let ka = out.x[a] - 0.5 * circuit.blocks[a].width;
        let kb = out.x[b] - 0.5 * circuit.blocks[b].width;
        ka.total_cmp(&kb).then(a.cmp(&b))
    });
    let start = out.clone();
    let mut lanes = build_lanes(&rows, &blockers);
    if tetris(circuit, &mut out, &cells, &mut lanes, false).is_ok() {
        return Ok(out);
    }
log::info!("gapped legalization ran out of room; packing cells leftwards");
    out = start;
    let mut lanes = build_lanes(&rows, &blockers);
    tetris(circuit, &mut out, &cells, &mut lanes, true)
        .map_err(|i| Error::RowCapacity(circuit.blocks[i].name.clone()))?;
    Ok(out)
}

/// Number of pairs of area-occupying, non-filler blocks whose rectangles
/// intersect with positive area, not counting pairs of fixed blocks.
pub fn count_overlaps(circuit: &Circuit, placement: &Placement) -> usize {
    let mut items: Vec<(Rect, bool)> = circuit
        .blocks
        .iter()
        .enumerate()
        .filter(|(_, b)| b.occupies_area() && !b.is_filler)
        .map(|(i, b)| (b.rect_at(placement.x[i], placement.y[i]), b.movable))
        .collect();
    items.sort_by(|a, b| a.0.x0.total_cmp(&b.0.x0));
    let mut count = 0;
    for i in 0..items.len() {
        let (a, ma) = items[i];
        for &(b, mb) in &items[i + 1..] {
            if b.x0 >= a.x1 - EPS {
                break;
            }
            if (ma || mb) && a.overlap_area(&b) > EPS * a.area().max(b.area()).max(1.0) {
                count += 1;
            }
        }
    }
    count
}

/// Whether every non-filler movable block lies inside the region.
pub fn inside_region(circuit: &Circuit, placement: &Placement) -> bool {
    circuit.blocks.iter().enumerate().filter(|(_, b)| b.movable && !b.is_filler).all(|(i, b)| {
        let r = b.rect_at(placement.x[i], placement.y[i]);
        r.x0 >= -EPS && r.y0 >= -EPS && r.x1 <= circuit.region.width + EPS && r.y1 <= circuit.region.height + EPS
    })
}

/// Sum of `|dx| + |dy|` over movable blocks.
pub fn total_displacement(circuit: &Circuit, a: &Placement, b: &Placement) -> f64 {
    (0..circuit.blocks.len())
        .filter(|&i| circuit.blocks[i].movable)
        .map(|i| (a.x[i] - b.x[i]).abs() + (a.y[i] - b.y[i]).abs())
        .sum()
}

fn local_hpwl(circuit: &Circuit, placement: &Placement, nets: &[usize]) -> f64 {
    nets.iter().map(|&n| net_hpwl(&circuit.nets[n], placement)).sum()
}

/// Exchanges neighbouring cells within each row while that strictly lowers
/// the wirelength, until a full pass changes nothing. The pair keeps its
/// combined span, so legality is preserved.
pub fn detailed_swap(circuit: &Circuit, placement: &Placement) -> Placement {
    let rows = rows_or_uniform(circuit);
    let mut out = placement.clone();
    let block_nets = circuit.block_nets();
    let row_h = rows.iter().map(|r| r.height).fold(f64::INFINITY, f64::min);

    // cells grouped by row, each row sorted by x
    let mut lanes: Vec<Vec<usize>> = vec![Vec::new(); rows.len()];
    for (i, b) in circuit.blocks.iter().enumerate() {
        if !b.movable || b.is_filler || is_macro(b, row_h) {
            continue;
        }
        let bottom = out.y[i] - 0.5 * b.height;
        if let Some(r) = rows.iter().position(|r| (r.y - bottom).abs() <= EPS * (1.0 + r.y.abs())) {
            lanes[r].push(i);
        }
    }
    for lane in &mut lanes {
        lane.sort_by(|&a, &b| out.x[a].total_cmp(&out.x[b]).then(a.cmp(&b)));
    }

    let mut nets: Vec<usize> = Vec::new();
    loop {
        let mut changed = false;
        for (r, lane) in lanes.iter_mut().enumerate() {
            let site = rows[r].site_width;
            let origin = rows[r].segments.first().map_or(0.0, |s| s.0);
            for k in 0..lane.len().saturating_sub(1) {
                let (a, b) = (lane[k], lane[k + 1]);
                let (wa, wb) = (circuit.blocks[a].width, circuit.blocks[b].width);
                let left = out.x[a] - 0.5 * wa;
                let right = out.x[b] + 0.5 * wb;
                let new_a_left = right - wa;
                if site > 0.0 {
                    let f = (new_a_left - origin) / site;
                    if (f - f.round()).abs() > 1e-6 {
                        continue;
                    }
                }
                nets.clear();
                nets.extend(block_nets[a].iter().chain(&block_nets[b]));
                nets.sort_unstable();
                nets.dedup();
                let before = local_hpwl(circuit, &out, &nets);
                let (xa, xb) = (out.x[a], out.x[b]);
                out.x[b] = left + 0.5 * wb;
                out.x[a] = new_a_left + 0.5 * wa;
                let after = local_hpwl(circuit, &out, &nets);
                if after < before - EPS * (1.0 + before.abs()) {
                    lane.swap(k, k + 1);
                    changed = true;
                } else {
                    out.x[a] = xa;
                    out.x[b] = xb;
                }
            }
        }
        if !changed {
            return out;
        }
    }
}
