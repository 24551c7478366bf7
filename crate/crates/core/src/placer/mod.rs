//! Electrostatic global placement: smoothed wirelength plus a penalty on the
//! potential energy of the block charges, minimized with Nesterov's method
//! until the density overflow drops below a target.

mod fillers;
mod nesterov;
mod wirelength;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use fillers::{insert_fillers, whitespace};
pub use nesterov::{NesterovState, Objective, StepInfo};
pub use wirelength::{hpwl, lse_wirelength, LseWirelength};

use crate::analytic::exact_coefficients;
use crate::density::{build_bin_density, placement_overflow, DensityGrid, ExactDensity};
use crate::error::{Error, Result};
use crate::fast::{grid_side_for, FastSolver, FieldMap, SpectralBaseline};
use crate::netlist::{Circuit, Placement};

/// Which Poisson solver produces the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    /// Cosine-series coefficients from the bin density by cosine transforms.
    AnalyticFast,
    /// Periodic spectral solution on bin indices.
    SpectralBaseline,
    /// Closed-form coefficients of the exact block density, truncated at `k`.
    ExactSeries { k: usize },
}

impl Solver {
    pub fn name(&self) -> &'static str {
        match self {
            Solver::AnalyticFast => "analytic-fast",
            Solver::SpectralBaseline => "spectral-baseline",
            Solver::ExactSeries { .. } => "exact-series",
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Default truncation order of the exact-series solver.
pub const DEFAULT_SERIES_ORDER: usize = 64;

impl FromStr for Solver {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "analytic-fast" => Ok(Solver::AnalyticFast),
            "spectral-baseline" => Ok(Solver::SpectralBaseline),
            "exact-series" => Ok(Solver::ExactSeries { k: DEFAULT_SERIES_ORDER }),
            _ => Err(format!("unknown solver `{s}` (analytic-fast, spectral-baseline, exact-series)")),
        }
    }
}

/// Density grid plus potential and field for one placement.
pub enum FieldEngine {
    Fast(FastSolver),
    Baseline(SpectralBaseline),
    Exact { k: usize, solver: FastSolver },
}

impl FieldEngine {
    pub fn new(solver: Solver, m: usize) -> Result<Self> {
        Ok(match solver {
            Solver::AnalyticFast => FieldEngine::Fast(FastSolver::new(m)?),
            Solver::SpectralBaseline => FieldEngine::Baseline(SpectralBaseline::new(m)?),
            Solver::ExactSeries { k } => {
                let k = if k + 1 > m {
                    log::warn!("series order {k} reduced to {} to fit the {m} x {m} grid", m - 1);
                    m - 1
                } else {
                    k
                };
                FieldEngine::Exact { k, solver: FastSolver::new(m)? }
            }
        })
    }

    pub fn m(&self) -> usize {
        match self {
            FieldEngine::Fast(s) | FieldEngine::Exact { solver: s, .. } => s.m(),
            FieldEngine::Baseline(b) => b.m(),
        }
    }

    /// Smoothed bin density of every area-occupying block and the resulting field.
    pub fn solve(&self, circuit: &Circuit, placement: &Placement) -> Result<(DensityGrid, FieldMap)> {
        let grid = build_bin_density(placement, circuit, self.m())?;
        let map = match self {
            FieldEngine::Fast(s) => s.solve(&grid)?,
            FieldEngine::Baseline(b) => b.solve(&grid)?,
            FieldEngine::Exact { k, solver } => {
                let density = ExactDensity::from_placement(circuit, placement);
                solver.field(&exact_coefficients(&density, *k))?
            }
        };
        Ok((grid, map))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacerConfig {
    /// Stop once the overflow ratio is at or below this value.
    pub target_overflow: f64,
    /// Initial penalty relative to the gradient-norm balance.
    pub lambda_0: f64,
    /// Penalty multiplier per iteration.
    pub lambda_growth: f64,
    /// Smoothing length of the wirelength model; `None` picks a multiple of
    /// the average bin dimension.
    pub gamma: Option<f64>,
    pub max_iters: usize,
    /// Fraction of the whitespace covered by fillers.
    pub filler_ratio: f64,
    pub seed: u64,
    /// Grid side; `None` picks the smallest power of two with `m^2 >= objects`.
    pub bins: Option<usize>,
    pub solver: Solver,
}

/// Default wirelength smoothing length in units of the average bin dimension.
pub const GAMMA_PER_BIN: f64 = 0.5;

impl Default for PlacerConfig {
    fn default() -> Self {
        PlacerConfig {
            target_overflow: 0.10,
            lambda_0: 8e-5,
            lambda_growth: 1.05,
            gamma: None,
            max_iters: 2000,
            filler_ratio: 1.0,
            seed: 1,
            bins: None,
            solver: Solver::AnalyticFast,
        }
    }
}

impl PlacerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Infeasible(m));
        if !(self.target_overflow > 0.0 && self.target_overflow < 1.0) {
            return bad(format!("target overflow {} outside (0, 1)", self.target_overflow));
        }
        if !(self.lambda_growth >= 1.0) {
            return bad(format!("lambda growth {} below 1", self.lambda_growth));
        }
        if !(self.lambda_0 > 0.0) {
            return bad(format!("lambda_0 {} is not positive", self.lambda_0));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0) {
                return bad(format!("gamma {g} is not positive"));
            }
        }
        if !(0.0..=1.0).contains(&self.filler_ratio) {
            return bad(format!("filler ratio {} outside [0, 1]", self.filler_ratio));
        }
        Ok(())
    }
}

/// Gradients of the objective over the variable vector `[x..., y...]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientInfo {
    pub wirelength: Vec<f64>,
    pub energy: Vec<f64>,
    pub lambda: f64,
    /// `wirelength + lambda * energy`
    pub total: Vec<f64>,
}

/// `1/2 sum q_i psi(v_i)` over `blocks`, with `q_i` the block area and `psi`
/// interpolated from `map`.
pub fn potential_energy(circuit: &Circuit, placement: &Placement, map: &FieldMap, blocks: &[usize]) -> f64 {
    0.5 * blocks
        .iter()
        .map(|&i| {
            let (psi, _, _) = map.interpolate_clamped(placement.x[i], placement.y[i]);
            circuit.blocks[i].area() * psi
        })
        .sum::<f64>()
}

/// Penalty balancing the two gradient norms: `lambda_0 |grad W|_1 / |grad N|_1`,
/// or `lambda_0` when the energy gradient vanishes.
pub fn initial_lambda(lambda_0: f64, wirelength_grad: &[f64], energy_grad: &[f64]) -> f64 {
    let wl: f64 = wirelength_grad.iter().map(|g| g.abs()).sum();
    let en: f64 = energy_grad.iter().map(|g| g.abs()).sum();
    if en > 0.0 {
        lambda_0 * wl / en
    } else {
        lambda_0
    }
}

pub fn update_lambda(lambda: f64, growth: f64) -> f64 {
    lambda * growth
}

struct Evaluation {
    x: Vec<f64>,
    wirelength: f64,
    wirelength_grad: Vec<f64>,
    energy: f64,
    energy_grad: Vec<f64>,
}

/// Placement objective over the movable blocks (cells and fillers) of a circuit.
pub struct PlacementProblem<'a> {
    circuit: &'a Circuit,
    vars: Vec<usize>,
    placement: Placement,
    engine: FieldEngine,
    gamma: f64,
    lambda: f64,
    pins: Vec<f64>,
    /// Allowed center range per variable.
    bounds_x: Vec<(f64, f64)>,
    bounds_y: Vec<(f64, f64)>,
    cache: Option<Evaluation>,
}

impl<'a> PlacementProblem<'a> {
    pub fn new(circuit: &'a Circuit, engine: FieldEngine, gamma: f64) -> Self {
        let vars: Vec<usize> = (0..circuit.blocks.len()).filter(|&i| circuit.blocks[i].movable).collect();
        let mut pins = vec![0.0; circuit.blocks.len()];
        for net in &circuit.nets {
            for p in &net.pins {
                pins[p.block] += 1.0;
            }
        }
        let pins = vars.iter().map(|&i| pins[i]).collect();
        let (w, h) = (circuit.region.width, circuit.region.height);
        let range = |size: f64, extent: f64| {
            if size >= extent {
                (0.5 * extent, 0.5 * extent)
            } else {
                (0.5 * size, extent - 0.5 * size)
            }
        };
        let bounds_x = vars.iter().map(|&i| range(circuit.blocks[i].width, w)).collect();
        let bounds_y = vars.iter().map(|&i| range(circuit.blocks[i].height, h)).collect();
        PlacementProblem {
            circuit,
            vars,
            placement: circuit.initial_placement(),
            engine,
            gamma,
            lambda: 0.0,
            pins,
            bounds_x,
            bounds_y,
            cache: None,
        }
    }

    pub fn variables(&self) -> &[usize] {
        &self.vars
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn set_lambda(&mut self, lambda: f64) {
        self.lambda = lambda;
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn m(&self) -> usize {
        self.engine.m()
    }

    /// Variable vector of a full placement.
    pub fn pack(&self, placement: &Placement) -> Vec<f64> {
        let mut x: Vec<f64> = self.vars.iter().map(|&i| placement.x[i]).collect();
        x.extend(self.vars.iter().map(|&i| placement.y[i]));
        x
    }

    /// Full placement with the variables set from `x`.
    pub fn unpack(&self, x: &[f64]) -> Placement {
        let mut p = self.placement.clone();
        self.write(&mut p, x);
        p
    }

    fn write(&self, p: &mut Placement, x: &[f64]) {
        let n = self.vars.len();
        for (k, &i) in self.vars.iter().enumerate() {
            p.x[i] = x[k];
            p.y[i] = x[n + k];
        }
    }

    fn evaluate_components(&mut self, x: &[f64]) -> Result<&Evaluation> {
        if self.cache.as_ref().is_some_and(|c| c.x == x) {
            return Ok(self.cache.as_ref().unwrap());
        }
        let mut placement = std::mem::replace(&mut self.placement, Placement { x: vec![], y: vec![] });
        self.write(&mut placement, x);
        let wl = lse_wirelength(self.circuit, &placement, self.gamma);
        let (_, map) = self.engine.solve(self.circuit, &placement)?;
        let n = self.vars.len();
        let mut wirelength_grad = vec![0.0; 2 * n];
        let mut energy_grad = vec![0.0; 2 * n];
        let mut energy = 0.0;
        for (k, &i) in self.vars.iter().enumerate() {
            wirelength_grad[k] = wl.grad_x[i];
            wirelength_grad[n + k] = wl.grad_y[i];
            let (psi, xi_x, xi_y) = map.interpolate_clamped(placement.x[i], placement.y[i]);
            let q = self.circuit.blocks[i].area();
            energy += 0.5 * q * psi;
            energy_grad[k] = -q * xi_x;
            energy_grad[n + k] = -q * xi_y;
        }
        self.placement = placement;
        self.cache = Some(Evaluation { x: x.to_vec(), wirelength: wl.value, wirelength_grad, energy, energy_grad });
        Ok(self.cache.as_ref().unwrap())
    }

    /// Wirelength, energy, and their gradients at `x`.
    pub fn gradient_info(&mut self, x: &[f64]) -> Result<GradientInfo> {
        let lambda = self.lambda;
        let e = self.evaluate_components(x)?;
        let total = e.wirelength_grad.iter().zip(&e.energy_grad).map(|(w, n)| w + lambda * n).collect();
        Ok(GradientInfo { wirelength: e.wirelength_grad.clone(), energy: e.energy_grad.clone(), lambda, total })
    }

    /// `(W_LSE, N)` at `x`, with the field recomputed for `x`.
    pub fn values(&mut self, x: &[f64]) -> Result<(f64, f64)> {
        let e = self.evaluate_components(x)?;
        Ok((e.wirelength, e.energy))
    }

    /// `W_LSE + lambda N` at `x`.
    pub fn objective_value(&mut self, x: &[f64]) -> Result<f64> {
        let (w, n) = self.values(x)?;
        Ok(w + self.lambda * n)
    }
}

impl Objective for PlacementProblem<'_> {
    /// Objective value; the gradient is scaled per block by
    /// `1 / max(1, pins + lambda * area)`.
    fn evaluate(&mut self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        let lambda = self.lambda;
        let n = self.vars.len();
        let (wirelength, energy) = {
            let e = self.evaluate_components(x)?;
            for k in 0..2 * n {
                grad[k] = e.wirelength_grad[k] + lambda * e.energy_grad[k];
            }
            (e.wirelength, e.energy)
        };
        for (k, &i) in self.vars.iter().enumerate() {
            let scale = 1.0 / (self.pins[k] + lambda * self.circuit.blocks[i].area()).max(1.0);
            grad[k] *= scale;
            grad[n + k] *= scale;
        }
        Ok(wirelength + lambda * energy)
    }

    fn project(&self, x: &mut [f64]) {
        let n = self.vars.len();
        for k in 0..n {
            x[k] = x[k].clamp(self.bounds_x[k].0, self.bounds_x[k].1);
            x[n + k] = x[n + k].clamp(self.bounds_y[k].0, self.bounds_y[k].1);
        }
    }
}

/// One row of the per-iteration trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub hpwl: f64,
    pub wirelength: f64,
    pub energy: f64,
    pub lambda: f64,
    pub overflow: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementStatus {
    Converged,
    /// The iteration limit was hit; the best-overflow iterate is returned.
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct PlacementResult {
    /// Positions of the input circuit's blocks; fillers are dropped.
    pub placement: Placement,
    pub trace: Vec<TraceRow>,
    pub status: PlacementStatus,
    /// Nesterov steps taken.
    pub iterations: usize,
    /// Overflow of the returned placement.
    pub overflow: f64,
    /// Iteration of the returned placement.
    pub best_iteration: usize,
    pub m: usize,
    pub fillers: usize,
    pub gamma: f64,
}

/// Moves blocks that share a center with an earlier movable block by up to a
/// tenth of `spread` in each direction, so that identical starts separate.
fn separate_duplicates(circuit: &Circuit, placement: &mut Placement, spread: f64, seed: u64) {
    let mut seen = HashSet::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (i, b) in circuit.blocks.iter().enumerate() {
        if !b.movable || b.is_filler {
            continue;
        }
        if !seen.insert((placement.x[i].to_bits(), placement.y[i].to_bits())) {
            placement.x[i] += 0.1 * spread * rng.gen_range(-1.0..1.0);
            placement.y[i] += 0.1 * spread * rng.gen_range(-1.0..1.0);
        }
    }
}

/// Circuit with fillers appended, grid side, and smoothing length for `config`.
pub fn prepare(circuit: &Circuit, config: &PlacerConfig) -> Result<(Circuit, usize, f64)> {
    config.validate()?;
    let fillers = insert_fillers(circuit, config.filler_ratio, config.seed);
    let mut blocks = circuit.blocks.clone();
    blocks.extend(fillers);
    let mut extended =
        Circuit::new(circuit.name.clone(), blocks, circuit.nets.clone(), circuit.region, circuit.target_density, circuit.rows.clone())?;
    extended.origin = circuit.origin;
    let objects = extended.blocks.iter().filter(|b| b.movable).count();
    let m = match config.bins {
        Some(m) => m,
        None => grid_side_for(objects),
    };
    let bin = 0.5 * (circuit.region.width + circuit.region.height) / m as f64;
    let gamma = config.gamma.unwrap_or(GAMMA_PER_BIN * bin);
    Ok((extended, m, gamma))
}

/// Global placement of `circuit`'s movable blocks.
pub fn run_global_placement(circuit: &Circuit, config: &PlacerConfig) -> Result<PlacementResult> {
    let start = Instant::now();
    let (mut extended, m, gamma) = prepare(circuit, config)?;
    let fillers = extended.blocks.len() - circuit.blocks.len();
    let mut init = extended.initial_placement();
    let bin = 0.5 * (circuit.region.width + circuit.region.height) / m as f64;
    separate_duplicates(&extended, &mut init, bin, config.seed);
    for (i, b) in extended.blocks.iter_mut().enumerate() {
        b.x = init.x[i];
        b.y = init.y[i];
    }

    let engine = FieldEngine::new(config.solver, m)?;
    let mut problem = PlacementProblem::new(&extended, engine, gamma);
    let mut x0 = problem.pack(&init);
    problem.project(&mut x0);

    let finish = |placement: Placement, trace: Vec<TraceRow>, status, iterations, overflow, best_iteration| {
        let mut placement: Placement = placement;
        placement.x.truncate(circuit.blocks.len());
        placement.y.truncate(circuit.blocks.len());
        PlacementResult { placement, trace, status, iterations, overflow, best_iteration, m, fillers, gamma }
    };
    if problem.variables().is_empty() {
        let p = extended.initial_placement();
        let overflow = placement_overflow(&extended, &p, m)?;
        return Ok(finish(p, Vec::new(), PlacementStatus::Converged, 0, overflow, 0));
    }

    let g = problem.gradient_info(&x0)?;
    problem.set_lambda(initial_lambda(config.lambda_0, &g.wirelength, &g.energy));
    let mut state = NesterovState::new(x0, &mut problem, 0.1 * bin)?;

    let mut trace = Vec::new();
    let mut best: Option<(f64, usize, Placement)> = None;
    let mut iteration = 0;
    loop {
        let v = state.v.clone();
        let (wirelength, energy) = problem.values(&v)?;
        let placement = problem.unpack(&v);
        let overflow = placement_overflow(&extended, &placement, m)?;
        trace.push(TraceRow {
            iteration,
            hpwl: hpwl(&extended, &placement),
            wirelength,
            energy,
            lambda: problem.lambda(),
            overflow,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        if best.as_ref().is_none_or(|(o, _, _)| overflow < *o) {
            best = Some((overflow, iteration, placement));
        }
        if overflow <= config.target_overflow || iteration >= config.max_iters {
            break;
        }
        state.step(&mut problem)?;
        iteration += 1;
        problem.set_lambda(update_lambda(problem.lambda(), config.lambda_growth));
        state.refresh(&mut problem)?;
    }
    let (overflow, best_iteration, placement) = best.expect("at least one iterate");
    let status = if overflow <= config.target_overflow {
        PlacementStatus::Converged
    } else {
        log::warn!("overflow {overflow:.4} above target after {iteration} iterations");
        PlacementStatus::MaxIterations
    };
    Ok(finish(placement, trace, status, iteration, overflow, best_iteration))
}

/// Trace as CSV; the wall-clock column is included only when `timing` is set,
/// so that untimed traces are reproducible byte for byte.
pub fn trace_csv(trace: &[TraceRow], timing: bool) -> String {
    use crate::io::sig9;
    let mut out = String::from("iteration,hpwl,wl_lse,energy,lambda,overflow");
    out.push_str(if timing { ",wall_ms\n" } else { "\n" });
    for r in trace {
        out.push_str(&format!(
            "{},{},{},{},{},{}",
            r.iteration,
            sig9(r.hpwl),
            sig9(r.wirelength),
            sig9(r.energy),
            sig9(r.lambda),
            sig9(r.overflow)
        ));
        if timing {
            out.push_str(&format!(",{:.3}", r.wall_ms));
        }
        out.push('\n');
    }
    out
}
