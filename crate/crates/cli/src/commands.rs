use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use neumann_place::analytic::{exact_coefficients, SpectralCoefficients};
use neumann_place::density::{build_bin_density, ExactDensity};
use neumann_place::fast::{grid_side_for, FastSolver, FieldMap};
use neumann_place::io::{sig9, write_coefficients_csv, write_grid_csv, write_ppm};
use neumann_place::legalize::{count_overlaps, detailed_swap, legalize_rows};
use neumann_place::netlist::{
    generate_synthetic, hpwl, parse_bookshelf, read_placement, write_placement, Circuit, Placement, Region,
};
use neumann_place::placer::{
    run_global_placement, trace_csv, FieldEngine, PlacementResult, PlacementStatus, PlacerConfig, Solver,
    DEFAULT_SERIES_ORDER,
};

use crate::config::ConfigFile;
use crate::{CompareArgs, FieldArgs, InputArgs, Layout, PlaceArgs, PlacerArgs, SolverArgs};

/// Side of the square region of an `n`-cell synthetic circuit: 100 for 500 cells.
fn synthetic_side(n: usize) -> f64 {
    100.0 * (n as f64 / 500.0).sqrt()
}

fn synthetic(n: usize, nets: Option<usize>, layout: Layout, seed: u64) -> Result<Circuit> {
    let side = synthetic_side(n);
    let nets = nets.unwrap_or(n * 6 / 5);
    let mut c = generate_synthetic(n, nets, Region::new(side, side), seed)?;
    if layout == Layout::Corner {
        // map the central cluster [0.45, 0.55] onto [0.02, 0.22]
        for b in c.blocks.iter_mut().filter(|b| b.movable) {
            b.x = ((b.x / side - 0.45) * 2.0 + 0.02) * side;
            b.y = ((b.y / side - 0.45) * 2.0 + 0.02) * side;
        }
    }
    Ok(c)
}

fn load(input: &InputArgs, seed: u64) -> Result<Circuit> {
    let mut c = match (&input.input, input.synthetic) {
        (Some(path), _) => parse_bookshelf(path).with_context(|| format!("loading {}", path.display()))?,
        (None, Some(n)) => synthetic(n, input.nets, input.layout, seed)?,
        (None, None) => bail!("either --input or --synthetic is required"),
    };
    if let Some(t) = input.target_density {
        if !(t > 0.0 && t <= 1.0) || c.movable_area() > t * c.region.area() {
            bail!("target density {t} is infeasible for {}", c.name);
        }
        c.target_density = t;
    }
    Ok(c)
}

fn solver_from(name: Option<String>, k: Option<usize>) -> Result<Solver> {
    let solver: Solver = name.as_deref().unwrap_or("analytic-fast").parse().map_err(anyhow::Error::msg)?;
    Ok(match solver {
        Solver::ExactSeries { .. } => Solver::ExactSeries { k: k.unwrap_or(DEFAULT_SERIES_ORDER) },
        s => s,
    })
}

fn config_file(path: &Option<PathBuf>) -> Result<ConfigFile> {
    path.as_deref().map(ConfigFile::load).transpose().map(Option::unwrap_or_default)
}

fn placer_config(file: &ConfigFile, p: &PlacerArgs, s: &SolverArgs) -> Result<PlacerConfig> {
    let d = PlacerConfig::default();
    let solver = file.pick(s.solver.clone(), "solver")?;
    let k = file.pick(s.k, "k")?;
    let cfg = PlacerConfig {
        target_overflow: file.pick(p.tau, "tau")?.unwrap_or(d.target_overflow),
        lambda_0: file.pick(p.lambda0, "lambda0")?.unwrap_or(d.lambda_0),
        lambda_growth: file.pick(p.lambda_growth, "lambda_growth")?.unwrap_or(d.lambda_growth),
        gamma: file.pick(p.gamma, "gamma")?,
        max_iters: file.pick(p.max_iters, "max_iters")?.unwrap_or(d.max_iters),
        filler_ratio: file.pick(p.filler_ratio, "filler_ratio")?.unwrap_or(d.filler_ratio),
        seed: file.pick(p.seed, "seed")?.unwrap_or(d.seed),
        bins: file.pick(s.bins, "bins")?,
        solver: solver_from(solver, k)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Result of one placement run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub circuit: String,
    pub blocks: usize,
    pub nets: usize,
    pub pins: usize,
    pub region: Region,
    pub solver: Solver,
    pub seed: u64,
    pub bins: usize,
    pub fillers: usize,
    pub gamma: f64,
    pub iterations: usize,
    pub status: PlacementStatus,
    pub overflow: f64,
    pub gp_hpwl: f64,
    pub legal_hpwl: f64,
    pub hpwl: f64,
    pub overlaps: usize,
    pub gp_seconds: f64,
    pub total_seconds: f64,
}

impl RunReport {
    fn status_name(&self) -> &'static str {
        match self.status {
            PlacementStatus::Converged => "converged",
            PlacementStatus::MaxIterations => "max-iterations",
        }
    }

    pub fn human(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "circuit      {} ({} blocks, {} nets, {} pins)", self.circuit, self.blocks, self.nets, self.pins);
        let _ = writeln!(s, "region       {} x {}", self.region.width, self.region.height);
        let _ = writeln!(s, "solver       {} on {}x{} bins", self.solver, self.bins, self.bins);
        let _ = writeln!(s, "fillers      {}", self.fillers);
        let _ = writeln!(s, "iterations   {} ({}), overflow {:.4}", self.iterations, self.status_name(), self.overflow);
        let _ = writeln!(s, "GP-HPWL      {:.6e}", self.gp_hpwl);
        let _ = writeln!(s, "legal HPWL   {:.6e}", self.legal_hpwl);
        let _ = writeln!(s, "HPWL         {:.6e} ({} overlaps)", self.hpwl, self.overlaps);
        let _ = writeln!(s, "GP-CPU       {:.3} s", self.gp_seconds);
        let _ = writeln!(s, "CPU          {:.3} s", self.total_seconds);
        s
    }

    pub fn key_values(&self) -> String {
        let pairs: Vec<(&str, String)> = vec![
            ("circuit", self.circuit.clone()),
            ("blocks", self.blocks.to_string()),
            ("nets", self.nets.to_string()),
            ("pins", self.pins.to_string()),
            ("region_width", self.region.width.to_string()),
            ("region_height", self.region.height.to_string()),
            ("solver", self.solver.to_string()),
            ("seed", self.seed.to_string()),
            ("bins", self.bins.to_string()),
            ("fillers", self.fillers.to_string()),
            ("gamma", sig9(self.gamma)),
            ("iterations", self.iterations.to_string()),
            ("status", self.status_name().to_string()),
            ("final_overflow", sig9(self.overflow)),
            ("gp_hpwl", sig9(self.gp_hpwl)),
            ("legal_hpwl", sig9(self.legal_hpwl)),
            ("hpwl", sig9(self.hpwl)),
            ("overlaps", self.overlaps.to_string()),
            ("gp_seconds", format!("{:.6}", self.gp_seconds)),
            ("total_seconds", format!("{:.6}", self.total_seconds)),
        ];
        pairs.into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

/// Global placement, legalization, and detailed placement.
fn run_pipeline(circuit: &Circuit, cfg: &PlacerConfig) -> Result<(RunReport, PlacementResult, Placement)> {
    let start = Instant::now();
    let gp = run_global_placement(circuit, cfg)?;
    let gp_seconds = start.elapsed().as_secs_f64();
    let legal = legalize_rows(circuit, &gp.placement)?;
    let legal_hpwl = hpwl(circuit, &legal);
    let detailed = detailed_swap(circuit, &legal);
    let total_seconds = start.elapsed().as_secs_f64();
    let report = RunReport {
        circuit: circuit.name.clone(),
        blocks: circuit.blocks.len(),
        nets: circuit.nets.len(),
        pins: circuit.num_pins(),
        region: circuit.region,
        solver: cfg.solver,
        seed: cfg.seed,
        bins: gp.m,
        fillers: gp.fillers,
        gamma: gp.gamma,
        iterations: gp.iterations,
        status: gp.status,
        overflow: gp.overflow,
        gp_hpwl: hpwl(circuit, &gp.placement),
        legal_hpwl,
        hpwl: hpwl(circuit, &detailed),
        overlaps: count_overlaps(circuit, &detailed),
        gp_seconds,
        total_seconds,
    };
    Ok((report, gp, detailed))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Series coefficients of a placement for solvers that have them.
fn coefficients(circuit: &Circuit, placement: &Placement, solver: Solver, m: usize) -> Result<Option<SpectralCoefficients>> {
    Ok(match solver {
        Solver::AnalyticFast => Some(FastSolver::new(m)?.coefficients(&build_bin_density(placement, circuit, m)?)?),
        Solver::ExactSeries { k } => Some(exact_coefficients(&ExactDensity::from_placement(circuit, placement), k)),
        Solver::SpectralBaseline => None,
    })
}

pub fn place(args: &PlaceArgs) -> Result<()> {
    let file = config_file(&args.placer.config)?;
    let cfg = placer_config(&file, &args.placer, &args.solver)?;
    let circuit = load(&args.input, cfg.seed)?;
    let (report, gp, detailed) = run_pipeline(&circuit, &cfg)?;
    if report.status == PlacementStatus::MaxIterations {
        log::warn!("overflow target {} not reached; reporting the best iterate", cfg.target_overflow);
    }
    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let name = &circuit.name;
        write_placement(&circuit, &gp.placement, &dir.join(format!("{name}.gp.pl")))?;
        write_placement(&circuit, &detailed, &dir.join(format!("{name}.pl")))?;
        write_text(&dir.join("trace.csv"), &trace_csv(&gp.trace, args.trace_timing))?;
        write_text(&dir.join("report.txt"), &report.human())?;
        write_text(&dir.join("report.kv"), &report.key_values())?;
        if args.dump_coeffs {
            match coefficients(&circuit, &gp.placement, cfg.solver, gp.m)? {
                Some(c) => write_coefficients_csv(&dir.join("coeffs.csv"), &c)?,
                None => log::warn!("{} has no cosine-series coefficients to dump", cfg.solver),
            }
        }
    }
    print!("{}\n{}", report.human(), report.key_values());
    Ok(())
}

fn write_map(dir: &Path, stem: &str, values: &[f64], m: usize) -> Result<()> {
    write_grid_csv(&dir.join(format!("{stem}.csv")), values, m)?;
    write_ppm(&dir.join(format!("{stem}.ppm")), values, m)?;
    Ok(())
}

fn argmax_abs(values: &[f64]) -> usize {
    (0..values.len()).fold(0, |best, k| if values[k].abs() > values[best].abs() { k } else { best })
}

pub fn field(args: &FieldArgs) -> Result<()> {
    let file = config_file(&args.config)?;
    let seed = file.pick(args.seed, "seed")?.unwrap_or(PlacerConfig::default().seed);
    let circuit = load(&args.input, seed)?;
    let placement = match &args.placement {
        Some(p) => read_placement(&circuit, p)?,
        None => circuit.initial_placement(),
    };
    let k = file.pick(args.solver.k, "k")?;
    let solvers: Vec<Solver> = match &args.diff {
        Some(pair) => pair.iter().map(|s| solver_from(Some(s.clone()), k)).collect::<Result<_>>()?,
        None => vec![solver_from(file.pick(args.solver.solver.clone(), "solver")?, k)?],
    };
    let objects = circuit.blocks.iter().filter(|b| b.occupies_area()).count();
    let m = file.pick(args.solver.bins, "bins")?.unwrap_or_else(|| grid_side_for(objects));
    let dir = &args.out_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;

    let mut maps: Vec<(Solver, FieldMap)> = Vec::new();
    for &solver in &solvers {
        let (grid, map) = FieldEngine::new(solver, m)?.solve(&circuit, &placement)?;
        if maps.is_empty() {
            write_map(dir, "density", &grid.values, m)?;
        }
        let stem = solver.name();
        write_map(dir, &format!("{stem}_psi"), &map.psi, m)?;
        write_map(dir, &format!("{stem}_xi"), &map.xi_magnitude(), m)?;
        write_grid_csv(&dir.join(format!("{stem}_xi_x.csv")), &map.xi_x, m)?;
        write_grid_csv(&dir.join(format!("{stem}_xi_y.csv")), &map.xi_y, m)?;
        if args.dump_coeffs {
            match coefficients(&circuit, &placement, solver, m)? {
                Some(c) => write_coefficients_csv(&dir.join(format!("{stem}_coeffs.csv")), &c)?,
                None => log::warn!("{solver} has no cosine-series coefficients to dump"),
            }
        }
        let peak = argmax_abs(&map.psi);
        println!(
            "{stem}: m={m} max|psi|={} at bin ({}, {}) mean(psi)={} max|xi|={}",
            sig9(map.max_abs_psi()),
            peak % m,
            peak / m,
            sig9(map.mean_psi()),
            sig9(map.max_abs_xi())
        );
        maps.push((solver, map));
    }
    if let [(_, a), (_, b)] = maps.as_slice() {
        let r = a.residual(b);
        write_map(dir, "residual_psi", &r.psi, m)?;
        write_map(dir, "residual_xi", &r.xi_magnitude(), m)?;
        println!("residual: max|dpsi|={} max|dxi|={}", sig9(r.max_abs_psi()), sig9(r.max_abs_xi()));
    }
    Ok(())
}

struct Row {
    input: String,
    solver: Solver,
    outcome: std::result::Result<RunReport, String>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Comparison table and per-solver averages of ratios to the first solver.
fn compare_table(rows: &[Row], solvers: &[Solver]) -> (String, String) {
    let mut text = String::new();
    let mut csv = String::from("input,solver,gp_hpwl,hpwl,gp_seconds,total_seconds,final_overflow,status\n");
    let _ = writeln!(
        text,
        "{:<24} {:<18} {:>14} {:>14} {:>10} {:>10} {:>9}  status",
        "input", "solver", "GP-HPWL", "HPWL", "GP-CPU(s)", "CPU(s)", "overflow"
    );
    for r in rows {
        match &r.outcome {
            Ok(rep) => {
                let _ = writeln!(
                    text,
                    "{:<24} {:<18} {:>14.6e} {:>14.6e} {:>10.3} {:>10.3} {:>9.4}  {}",
                    r.input,
                    r.solver,
                    rep.gp_hpwl,
                    rep.hpwl,
                    rep.gp_seconds,
                    rep.total_seconds,
                    rep.overflow,
                    rep.status_name()
                );
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{:.6},{:.6},{},{}",
                    r.input,
                    r.solver,
                    sig9(rep.gp_hpwl),
                    sig9(rep.hpwl),
                    rep.gp_seconds,
                    rep.total_seconds,
                    sig9(rep.overflow),
                    rep.status_name()
                );
            }
            Err(e) => {
                let _ = writeln!(text, "{:<24} {:<18} FAILED: {e}", r.input, r.solver);
                let _ = writeln!(csv, "{},{},,,,,,failed", r.input, r.solver);
            }
        }
    }
    let reference = solvers[0];
    let _ = writeln!(text, "\nNormalized (mean ratio to {reference} over inputs where both succeeded)");
    let _ = writeln!(text, "{:<18} {:>8} {:>8} {:>8} {:>8} {:>14}", "solver", "GP-HPWL", "HPWL", "GP-CPU", "CPU", "median HPWL");
    for &s in solvers {
        let mut ratios = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
        let mut finals = Vec::new();
        for r in rows.iter().filter(|r| r.solver == s) {
            let Ok(rep) = &r.outcome else { continue };
            finals.push(rep.hpwl);
            let base = rows.iter().find(|b| b.solver == reference && b.input == r.input).and_then(|b| b.outcome.as_ref().ok());
            if let Some(b) = base {
                let pairs = [
                    (rep.gp_hpwl, b.gp_hpwl),
                    (rep.hpwl, b.hpwl),
                    (rep.gp_seconds, b.gp_seconds),
                    (rep.total_seconds, b.total_seconds),
                ];
                for (k, (x, y)) in pairs.iter().enumerate() {
                    ratios[k].push(x / y);
                }
            }
        }
        let mean = |v: &Vec<f64>| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
        let _ = writeln!(
            text,
            "{:<18} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>14.6e}",
            s.name(),
            mean(&ratios[0]),
            mean(&ratios[1]),
            mean(&ratios[2]),
            mean(&ratios[3]),
            median(finals)
        );
    }
    (text, csv)
}

pub fn compare(args: &CompareArgs) -> Result<()> {
    let file = config_file(&args.placer.config)?;
    let solvers: Vec<Solver> = args.solvers.iter().map(|s| solver_from(Some(s.clone()), args.k)).collect::<Result<_>>()?;
    if solvers.is_empty() {
        bail!("no solvers given");
    }
    let base_args = SolverArgs { solver: None, bins: args.bins, k: args.k };
    let base = placer_config(&file, &args.placer, &base_args)?;

    let mut jobs: Vec<(String, std::result::Result<Circuit, String>, u64)> = Vec::new();
    match args.synthetic {
        Some(n) => {
            for &seed in &args.seeds {
                let c = synthetic(n, args.nets, Layout::Center, seed).map_err(|e| format!("{e:#}"));
                jobs.push((format!("synthetic{n}-s{seed}"), c, seed));
            }
        }
        None => {
            for path in &args.inputs {
                let c = parse_bookshelf(path).map_err(|e| e.to_string());
                jobs.push((path.display().to_string(), c, base.seed));
            }
        }
    }
    let mut rows = Vec::new();
    for (input, circuit, seed) in &jobs {
        for &solver in &solvers {
            let cfg = PlacerConfig { solver, seed: *seed, ..base.clone() };
            let outcome = match circuit {
                Ok(c) => run_pipeline(c, &cfg).map(|r| r.0).map_err(|e| format!("{e:#}")),
                Err(e) => Err(e.clone()),
            };
            if let Err(e) = &outcome {
                log::warn!("{input} with {solver}: {e}");
            }
            rows.push(Row { input: input.clone(), solver, outcome });
        }
    }
    let (text, csv) = compare_table(&rows, &solvers);
    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_text(&dir.join("compare.csv"), &csv)?;
    }
    print!("{text}");
    Ok(())
}
