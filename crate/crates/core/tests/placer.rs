mod common;

use common::{norm_relative, random_circuit, rng};
use neumann_place::density::placement_overflow;
use neumann_place::netlist::{generate_synthetic, hpwl, Block, Circuit, Net, Pin, Placement, Region};
use neumann_place::placer::{
    initial_lambda, insert_fillers, lse_wirelength, potential_energy, run_global_placement, update_lambda,
    whitespace, FieldEngine, PlacementProblem, PlacementStatus, PlacerConfig, Solver,
};
use proptest::prelude::*;
use rand::Rng;

fn synthetic500() -> Circuit {
    generate_synthetic(500, 600, Region::new(100.0, 100.0), 1).unwrap()
}

#[test]
fn lse_gradient_matches_finite_differences() {
    for seed in 0..3 {
        let c = random_circuit(seed, 20, 10.0);
        let p = c.initial_placement();
        let gamma = 0.4;
        let wl = lse_wirelength(&c, &p, gamma);
        let h = 1e-5;
        let (mut fd, mut an) = (Vec::new(), Vec::new());
        for i in 0..20 {
            for axis in 0..2 {
                let shifted = |d: f64| {
                    let mut q = p.clone();
                    if axis == 0 { q.x[i] += d } else { q.y[i] += d }
                    lse_wirelength(&c, &q, gamma).value
                };
                fd.push((shifted(h) - shifted(-h)) / (2.0 * h));
                an.push(if axis == 0 { wl.grad_x[i] } else { wl.grad_y[i] });
            }
        }
        let rel = norm_relative(&fd, &an);
        assert!(rel <= 1e-5, "seed {seed}: {rel}");
    }
}

#[test]
fn lse_bounds_hpwl() {
    let c = random_circuit(4, 20, 10.0);
    let p = c.initial_placement();
    let h = hpwl(&c, &p);
    let mut slack = 0.0;
    for net in &c.nets {
        slack += 4.0 * (net.pins.len() as f64).ln();
    }
    for gamma in [1.0, 0.1, 0.01, 0.001] {
        let v = lse_wirelength(&c, &p, gamma).value;
        assert!(v >= h && v - h <= gamma * slack + 1e-9, "gamma {gamma}");
    }
}

/// `(fd, analytic)` total gradients at the starting point with the balanced penalty.
fn total_gradient_pair(seed: u64) -> (Vec<f64>, Vec<f64>) {
    let c = random_circuit(seed, 20, 10.0);
    let engine = FieldEngine::new(Solver::AnalyticFast, 8).unwrap();
    let mut prob = PlacementProblem::new(&c, engine, 0.5 * 10.0 / 8.0);
    let x = prob.pack(&c.initial_placement());
    let g = prob.gradient_info(&x).unwrap();
    prob.set_lambda(initial_lambda(PlacerConfig::default().lambda_0, &g.wirelength, &g.energy));
    let total = prob.gradient_info(&x).unwrap().total;
    let h = 1e-4;
    let fd = (0..x.len())
        .map(|k| {
            let mut f = |d: f64| {
                let mut y = x.clone();
                y[k] += d;
                prob.objective_value(&y).unwrap()
            };
            (f(h) - f(-h)) / (2.0 * h)
        })
        .collect();
    (fd, total)
}

#[test]
fn total_gradient_matches_finite_differences() {
    for seed in 0..3 {
        let (fd, an) = total_gradient_pair(seed);
        let rel = norm_relative(&fd, &an);
        assert!(rel <= 1e-4, "seed {seed}: {rel}");
    }
}

fn crowd() -> Circuit {
    // eight unit cells piled near (3, 3) and one probe cell to their right
    let mut blocks: Vec<Block> =
        (0..8).map(|i| Block::cell(format!("c{i}"), 1.0, 1.0, 2.5 + 0.1 * i as f64, 3.0 + 0.05 * i as f64)).collect();
    blocks.push(Block::cell("probe", 1.0, 1.0, 5.0, 3.5));
    Circuit::new("crowd", blocks, vec![], Region::new(16.0, 16.0), 1.0, vec![]).unwrap()
}

fn energy_at(c: &Circuit, p: &Placement) -> f64 {
    let engine = FieldEngine::new(Solver::AnalyticFast, 16).unwrap();
    let (_, map) = engine.solve(c, p).unwrap();
    let all: Vec<usize> = (0..c.blocks.len()).collect();
    potential_energy(c, p, &map, &all)
}

#[test]
fn moving_along_field_lowers_energy() {
    let c = crowd();
    let p = c.initial_placement();
    let engine = FieldEngine::new(Solver::AnalyticFast, 16).unwrap();
    let (_, map) = engine.solve(&c, &p).unwrap();
    let i = 8;
    let (_, fx, fy) = map.interpolate(p.x[i], p.y[i]).unwrap();
    assert!(fx > 0.0, "field should push the probe away from the crowd");
    let norm = fx.hypot(fy);
    let mut q = p.clone();
    q.x[i] += 0.2 * fx / norm;
    q.y[i] += 0.2 * fy / norm;
    assert!(energy_at(&c, &q) < energy_at(&c, &p));
}

#[test]
fn energy_examples() {
    // four blocks tiling the region: uniform density, zero potential
    let tiles: Vec<Block> = (0..4).map(|k| Block::cell(format!("t{k}"), 2.0, 2.0, 1.0 + 2.0 * (k % 2) as f64, 1.0 + 2.0 * (k / 2) as f64)).collect();
    let c = Circuit::new("u", tiles, vec![], Region::new(4.0, 4.0), 1.0, vec![]).unwrap();
    assert!(energy_at(&c, &c.initial_placement()).abs() < 1e-12);

    // moving a block from the crowded half to the empty half
    let mut blocks: Vec<Block> = (0..6).map(|k| Block::cell(format!("c{k}"), 1.5, 1.5, 2.0 + 0.3 * k as f64, 4.0 + 0.5 * k as f64)).collect();
    blocks.push(Block::cell("m", 1.5, 1.5, 3.0, 6.0));
    let c = Circuit::new("h", blocks, vec![], Region::new(16.0, 8.0), 1.0, vec![]).unwrap();
    let p = c.initial_placement();
    let mut q = p.clone();
    q.x[6] = 12.0;
    assert!(energy_at(&c, &q) < energy_at(&c, &p));

    // doubling every charge for a fixed map
    let engine = FieldEngine::new(Solver::AnalyticFast, 16).unwrap();
    let (_, map) = engine.solve(&c, &p).unwrap();
    let mut doubled = c.clone();
    for b in &mut doubled.blocks {
        b.width *= 2.0;
    }
    let all: Vec<usize> = (0..c.blocks.len()).collect();
    let n1 = potential_energy(&c, &p, &map, &all);
    let n2 = potential_energy(&doubled, &p, &map, &all);
    assert!((n2 - 2.0 * n1).abs() <= 1e-12 * n1.abs());
}

#[test]
fn lambda_schedule() {
    assert_eq!(update_lambda(0.3, 1.0), 0.3);
    let w = [1.0, -2.0, 3.0];
    let n = [0.5, 0.5, -1.0];
    let l0 = initial_lambda(8e-5, &w, &n);
    let sum = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>();
    assert!((l0 * sum(&n) - 8e-5 * sum(&w)).abs() < 1e-18);
    assert_eq!(initial_lambda(8e-5, &w, &[0.0; 3]), 8e-5);

    let cfg = PlacerConfig { max_iters: 40, target_overflow: 0.01, ..PlacerConfig::default() };
    let r = run_global_placement(&synthetic500(), &cfg).unwrap();
    let l0 = r.trace[0].lambda;
    for row in &r.trace {
        let want = l0 * cfg.lambda_growth.powi(row.iteration as i32);
        assert!((row.lambda - want).abs() <= 1e-12 * want);
    }

    let flat = PlacerConfig { lambda_growth: 1.0, max_iters: 10, ..cfg };
    let r = run_global_placement(&synthetic500(), &flat).unwrap();
    assert!(r.trace.iter().all(|row| row.lambda == r.trace[0].lambda));
}

#[test]
fn fillers_cover_whitespace() {
    let c = synthetic500();
    let a = insert_fillers(&c, 0.7, 5);
    let b = insert_fillers(&c, 0.7, 5);
    assert_eq!(a, b);
    let side = a[0].width;
    let area: f64 = a.iter().map(Block::area).sum();
    let want = 0.7 * whitespace(&c);
    assert!(area <= want && want - area < side * side);
    assert!(a.iter().all(|f| f.is_filler && f.movable));
}

#[test]
fn synthetic_cluster_spreads_and_beats_random_spread() {
    let c = synthetic500();
    let cfg = PlacerConfig::default();
    let r = run_global_placement(&c, &cfg).unwrap();
    assert_eq!(r.status, PlacementStatus::Converged);
    assert!(r.overflow <= 0.10);
    assert!(r.trace.last().unwrap().overflow <= 0.10);
    assert_eq!(r.placement.len(), c.blocks.len());
    assert!((placement_overflow(&c, &r.placement, r.m).unwrap() - r.overflow).abs() < 1e-12);

    let mut g = rng(99);
    let mut spread = c.initial_placement();
    for i in 0..spread.len() {
        spread.x[i] = g.gen_range(2.0..98.0);
        spread.y[i] = g.gen_range(2.0..98.0);
    }
    assert!(hpwl(&c, &r.placement) < hpwl(&c, &spread));

    // the returned iterate has the lowest overflow seen
    let best = r.trace.iter().map(|t| t.overflow).fold(f64::INFINITY, f64::min);
    assert_eq!(r.overflow, best);
    assert_eq!(r.trace[r.best_iteration].overflow, best);
}

#[test]
fn placement_is_deterministic() {
    let c = random_circuit(8, 60, 30.0);
    let cfg = PlacerConfig { max_iters: 60, ..PlacerConfig::default() };
    let a = run_global_placement(&c, &cfg).unwrap();
    let b = run_global_placement(&c, &cfg).unwrap();
    assert_eq!(a.placement, b.placement);
    let strip = |t: &[neumann_place::placer::TraceRow]| t.iter().map(|r| (r.hpwl, r.energy, r.overflow)).collect::<Vec<_>>();
    assert_eq!(strip(&a.trace), strip(&b.trace));
}

#[test]
fn spread_start_stops_early() {
    // cells on a lattice at a quarter of the capacity
    let n = 64;
    let side = 32.0;
    let blocks: Vec<Block> = (0..n)
        .map(|i| Block::cell(format!("c{i}"), 2.0, 2.0, 2.0 + 4.0 * (i % 8) as f64, 2.0 + 4.0 * (i / 8) as f64))
        .collect();
    let nets = (0..n - 1)
        .map(|i| Net { name: format!("n{i}"), pins: vec![Pin { block: i, dx: 0.0, dy: 0.0 }, Pin { block: i + 1, dx: 0.0, dy: 0.0 }] })
        .collect();
    let c = Circuit::new("lattice", blocks, nets, Region::new(side, side), 1.0, vec![]).unwrap();
    let r = run_global_placement(&c, &PlacerConfig::default()).unwrap();
    assert!(r.iterations <= 2, "{} iterations", r.iterations);
    let moved = (0..n).map(|i| (r.placement.x[i] - c.blocks[i].x).abs().max((r.placement.y[i] - c.blocks[i].y).abs())).fold(0.0, f64::max);
    assert!(moved < 1.0, "moved {moved}");
}

#[test]
fn fixed_blocks_stay_put() {
    let c = random_circuit(2, 30, 20.0);
    let r = run_global_placement(&c, &PlacerConfig { max_iters: 50, ..PlacerConfig::default() }).unwrap();
    for (i, b) in c.blocks.iter().enumerate().filter(|(_, b)| !b.movable) {
        assert_eq!((r.placement.x[i], r.placement.y[i]), (b.x, b.y));
    }
    for (i, b) in c.blocks.iter().enumerate().filter(|(_, b)| b.movable) {
        assert!(r.placement.x[i] >= 0.5 * b.width - 1e-12 && r.placement.x[i] <= 20.0 - 0.5 * b.width + 1e-12);
    }
}

#[test]
fn config_is_validated() {
    let c = random_circuit(1, 5, 10.0);
    for bad in [
        PlacerConfig { target_overflow: 0.0, ..PlacerConfig::default() },
        PlacerConfig { lambda_growth: 0.9, ..PlacerConfig::default() },
        PlacerConfig { gamma: Some(-1.0), ..PlacerConfig::default() },
        PlacerConfig { bins: Some(6), ..PlacerConfig::default() },
    ] {
        assert!(run_global_placement(&c, &bad).is_err(), "{bad:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hpwl_ignores_pin_order(seed in 0u64..500, rot in 0usize..5) {
        let c = random_circuit(seed, 10, 10.0);
        let p = c.initial_placement();
        let mut nets = c.nets.clone();
        for n in &mut nets {
            let k = rot % n.pins.len();
            n.pins.rotate_left(k);
            n.pins.reverse();
        }
        let shuffled = Circuit::new("s", c.blocks.clone(), nets, c.region, 1.0, vec![]).unwrap();
        prop_assert!((hpwl(&c, &p) - hpwl(&shuffled, &p)).abs() <= 1e-12 * hpwl(&c, &p));
    }

    #[test]
    fn lse_is_an_upper_bound(seed in 0u64..500, gamma in 0.01f64..2.0) {
        let c = random_circuit(seed, 12, 10.0);
        let p = c.initial_placement();
        prop_assert!(lse_wirelength(&c, &p, gamma).value >= hpwl(&c, &p) - 1e-12);
    }
}
