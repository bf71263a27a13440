//! Differential Evolution over grid-snapped QAOA angles for Max-Cut, with
//! every energy evaluation going through an [`Executor`].
//!
//! Parameter vectors are laid out `[β_1 … β_p, γ_1 … γ_p]`. Each candidate
//! is snapped to the grid before evaluation, so repeated candidates (and
//! ZX-equivalent ones) become cache hits.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::circuit::{build_qaoa_maxcut, quantize_phase, CircuitError, MaxCutGraph, Phase};
use crate::exec::{Accounting, ExecError, Executor, StageTimings};
use crate::rng::PortableRng;
use crate::sim::{MaxCutQaoa, SimError};

#[derive(Debug, thiserror::Error)]
pub enum QaoaError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Exec(#[from] ExecError),
}

/// `β ∈ linspace(0, π/2, n_beta)`, `γ ∈ linspace(0, 2π, n_gamma)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    pub n_beta: usize,
    pub n_gamma: usize,
}

impl Grid {
    pub const COARSE: Grid = Grid {
        n_beta: 16,
        n_gamma: 32,
    };
    pub const MEDIUM: Grid = Grid {
        n_beta: 32,
        n_gamma: 64,
    };
    pub const FINE: Grid = Grid {
        n_beta: 64,
        n_gamma: 128,
    };

    pub fn new(n_beta: usize, n_gamma: usize) -> Result<Grid, QaoaError> {
        if n_beta < 2 || n_gamma < 2 {
            return Err(QaoaError::Config(
                "grids need at least two points per axis".into(),
            ));
        }
        Ok(Grid { n_beta, n_gamma })
    }

    pub fn by_name(name: &str) -> Option<Grid> {
        match name {
            "coarse" => Some(Grid::COARSE),
            "medium" => Some(Grid::MEDIUM),
            "fine" => Some(Grid::FINE),
            _ => None,
        }
    }

    pub fn beta_points(&self) -> Vec<f64> {
        linspace(0.0, PI / 2.0, self.n_beta)
    }

    pub fn gamma_points(&self) -> Vec<f64> {
        linspace(0.0, 2.0 * PI, self.n_gamma)
    }

    /// `(lower, upper)` bound of every coordinate for depth `p`.
    pub fn bounds(&self, p: usize) -> Vec<(f64, f64)> {
        let mut b = vec![(0.0, PI / 2.0); p];
        b.extend(std::iter::repeat_n((0.0, 2.0 * PI), p));
        b
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

/// Nearest point of `points` (sorted); ties go to the lower point.
fn nearest(points: &[f64], x: f64) -> f64 {
    let i = points.partition_point(|&p| p < x);
    if i == 0 {
        return points[0];
    }
    if i == points.len() {
        return points[i - 1];
    }
    let (lo, hi) = (points[i - 1], points[i]);
    if x - lo <= hi - x {
        lo
    } else {
        hi
    }
}

/// Snaps `[β…, γ…]` onto `grid` and quantizes. Returns `(betas, gammas)`.
pub fn snap(params: &[f64], grid: &Grid) -> Result<(Vec<Phase>, Vec<Phase>), QaoaError> {
    if !params.len().is_multiple_of(2) || params.is_empty() {
        return Err(QaoaError::Config(format!(
            "{} parameters is not 2p",
            params.len()
        )));
    }
    let p = params.len() / 2;
    let (bp, gp) = (grid.beta_points(), grid.gamma_points());
    let betas = params[..p]
        .iter()
        .map(|&b| quantize_phase(nearest(&bp, b)))
        .collect::<Result<_, _>>()?;
    let gammas = params[p..]
        .iter()
        .map(|&g| quantize_phase(nearest(&gp, g)))
        .collect::<Result<_, _>>()?;
    Ok((betas, gammas))
}

/// Seeded sample of `n_edges` distinct edges: a partial Fisher-Yates shuffle
/// of the lexicographic pair list `(0,1), (0,2), …`, keeping the first
/// `n_edges` picks.
pub fn random_graph(n: usize, n_edges: usize, seed: u64) -> Result<MaxCutGraph, QaoaError> {
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    if n_edges > pairs.len() {
        return Err(QaoaError::Config(format!(
            "{n_edges} edges do not fit in a simple graph on {n} vertices"
        )));
    }
    let mut rng = PortableRng::new(seed);
    for i in 0..n_edges {
        let j = i + rng.index(pairs.len() - i);
        pairs.swap(i, j);
    }
    pairs.truncate(n_edges);
    Ok(MaxCutGraph::new(n, pairs)?)
}

/// Differential Evolution settings (always `best1bin`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeConfig {
    pub population: usize,
    pub generations: usize,
    pub f: f64,
    pub cr: f64,
    pub seed: u64,
}

impl DeConfig {
    pub fn validate(&self) -> Result<(), QaoaError> {
        if self.population < 4 {
            return Err(QaoaError::Config("population must be at least 4".into()));
        }
        if !(self.f > 0.0 && self.f <= 2.0) {
            return Err(QaoaError::Config(format!("F = {} outside (0, 2]", self.f)));
        }
        if !(0.0..=1.0).contains(&self.cr) {
            return Err(QaoaError::Config(format!(
                "CR = {} outside [0, 1]",
                self.cr
            )));
        }
        Ok(())
    }
}

impl Default for DeConfig {
    fn default() -> DeConfig {
        DeConfig {
            population: 50,
            generations: 20,
            f: 0.7,
            cr: 0.7,
            seed: 100,
        }
    }
}

/// State after one generation (generation 0 is the initial population).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_energy: f64,
    pub calls: u64,
    pub hits: u64,
    pub unique_entries: u64,
}

#[derive(Clone, Debug)]
pub struct OptimizationReport {
    pub history: Vec<GenerationRecord>,
    pub best_betas: Vec<Phase>,
    pub best_gammas: Vec<Phase>,
    pub best_energy: f64,
    pub accounting: Accounting,
    pub timings: StageTimings,
    pub wall: Duration,
}

pub const CSV_HEADER: &str = "generation,best_energy,calls,hits,unique_entries";

impl OptimizationReport {
    pub fn best_energies(&self) -> Vec<f64> {
        self.history.iter().map(|g| g.best_energy).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for g in &self.history {
            let _ = writeln!(
                s,
                "{},{:.12},{},{},{}",
                g.generation, g.best_energy, g.calls, g.hits, g.unique_entries
            );
        }
        s
    }
}

/// Energies are rounded to this resolution so that evaluations of
/// equivalent circuits compare equal even when computed along different
/// floating-point paths.
const ENERGY_QUANTUM: f64 = 1.0 / (1u64 << 32) as f64;

fn round_energy(e: f64) -> f64 {
    (e / ENERGY_QUANTUM).round() * ENERGY_QUANTUM
}

/// Expected cut of the snapped point, through the executor's cache.
fn evaluate(
    graph: &MaxCutGraph,
    eval: &MaxCutQaoa,
    exec: &Executor,
    betas: &[Phase],
    gammas: &[Phase],
) -> Result<f64, QaoaError> {
    let c = build_qaoa_maxcut(graph, betas, gammas)?;
    let (e, _) = exec.expectation(&c, |_| Ok(round_energy(eval.energy(betas, gammas)?)))?;
    Ok(e)
}

/// Maximizes the expected cut with `best1bin` DE.
///
/// Random draws happen in a fixed order: the initial population member by
/// member, dimension by dimension; then per generation, per member: `r1`,
/// `r2` (distinct, excluding the member), the forced dimension, and one
/// crossover draw per dimension. A whole generation's trials are evaluated
/// (in parallel on `workers` threads) before any selection, and the best
/// member is the lowest index among those with the highest energy.
pub fn de_optimize(
    graph: &MaxCutGraph,
    p: usize,
    grid: &Grid,
    cfg: &DeConfig,
    exec: &Executor,
    workers: usize,
) -> Result<OptimizationReport, QaoaError> {
    cfg.validate()?;
    if p == 0 {
        return Err(QaoaError::Config("depth p must be at least 1".into()));
    }
    let start = Instant::now();
    let eval = MaxCutQaoa::new(graph)?;
    let bounds = grid.bounds(p);
    let dims = bounds.len();
    let np = cfg.population;
    let mut rng = PortableRng::new(cfg.seed);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| QaoaError::Config(format!("worker pool: {e}")))?;

    let evaluate_all = |points: &[Vec<f64>]| -> Result<Vec<f64>, QaoaError> {
        pool.install(|| {
            points
                .par_iter()
                .map(|x| {
                    let (b, g) = snap(x, grid)?;
                    evaluate(graph, &eval, exec, &b, &g)
                })
                .collect()
        })
    };
    let record = |generation: usize, best: f64| {
        let a = exec.accounting();
        GenerationRecord {
            generation,
            best_energy: best,
            calls: a.requests,
            hits: a.hits,
            unique_entries: a.inserted,
        }
    };
    let best_of = |energy: &[f64]| {
        let mut best = 0;
        for (i, &e) in energy.iter().enumerate() {
            if e > energy[best] {
                best = i;
            }
        }
        best
    };

    let mut pop: Vec<Vec<f64>> = (0..np)
        .map(|_| {
            bounds
                .iter()
                .map(|&(lo, hi)| lo + rng.next_f64() * (hi - lo))
                .collect()
        })
        .collect();
    let mut energy = evaluate_all(&pop)?;
    let mut best = best_of(&energy);
    let mut history = vec![record(0, energy[best])];

    for generation in 1..=cfg.generations {
        let trials: Vec<Vec<f64>> = (0..np)
            .map(|i| {
                let mut r1 = rng.index(np - 1);
                if r1 >= i {
                    r1 += 1;
                }
                let (lo, hi) = (i.min(r1), i.max(r1));
                let mut r2 = rng.index(np - 2);
                if r2 >= lo {
                    r2 += 1;
                }
                if r2 >= hi {
                    r2 += 1;
                }
                let forced = rng.index(dims);
                (0..dims)
                    .map(|d| {
                        let cross = rng.next_f64() < cfg.cr || d == forced;
                        if cross {
                            let v = pop[best][d] + cfg.f * (pop[r1][d] - pop[r2][d]);
                            v.clamp(bounds[d].0, bounds[d].1)
                        } else {
                            pop[i][d]
                        }
                    })
                    .collect()
            })
            .collect();
        let trial_energy = evaluate_all(&trials)?;
        for (i, (x, e)) in trials.into_iter().zip(trial_energy).enumerate() {
            if e >= energy[i] {
                pop[i] = x;
                energy[i] = e;
            }
        }
        best = best_of(&energy);
        history.push(record(generation, energy[best]));
    }
    exec.flush()?;
    let (best_betas, best_gammas) = snap(&pop[best], grid)?;
    Ok(OptimizationReport {
        history,
        best_betas,
        best_gammas,
        best_energy: energy[best],
        accounting: exec.accounting(),
        timings: exec.timings(),
        wall: start.elapsed(),
    })
}

/// Settings for a QAOA run, read from `key = value` lines (`#` comments):
///
/// ```text
/// vertices = 24
/// edges = 60
/// graph_seed = 42
/// p = 2
/// grid = coarse          # coarse | medium | fine, or set n_beta / n_gamma
/// population = 50
/// generations = 20
/// f = 0.7
/// cr = 0.7
/// seed = 100
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct QaoaConfig {
    pub vertices: usize,
    pub edges: usize,
    pub graph_seed: u64,
    pub p: usize,
    pub grid: Grid,
    pub de: DeConfig,
}

impl Default for QaoaConfig {
    fn default() -> QaoaConfig {
        QaoaConfig {
            vertices: 24,
            edges: 60,
            graph_seed: 42,
            p: 2,
            grid: Grid::COARSE,
            de: DeConfig::default(),
        }
    }
}

impl QaoaConfig {
    pub fn parse(src: &str) -> Result<QaoaConfig, QaoaError> {
        let mut c = QaoaConfig::default();
        let (mut n_beta, mut n_gamma) = (None, None);
        for (i, raw) in src.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| QaoaError::Config(format!("line {}: {msg}", i + 1));
            let (k, v) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            let int = || {
                v.parse::<u64>()
                    .map_err(|_| err(format!("{k}: {v:?} is not an integer")))
            };
            let real = || {
                v.parse::<f64>()
                    .map_err(|_| err(format!("{k}: {v:?} is not a number")))
            };
            match k {
                "vertices" => c.vertices = int()? as usize,
                "edges" => c.edges = int()? as usize,
                "graph_seed" => c.graph_seed = int()?,
                "p" => c.p = int()? as usize,
                "grid" => {
                    c.grid = Grid::by_name(v).ok_or_else(|| err(format!("unknown grid {v:?}")))?
                }
                "n_beta" => n_beta = Some(int()? as usize),
                "n_gamma" => n_gamma = Some(int()? as usize),
                "population" => c.de.population = int()? as usize,
                "generations" => c.de.generations = int()? as usize,
                "f" => c.de.f = real()?,
                "cr" => c.de.cr = real()?,
                "seed" => c.de.seed = int()?,
                _ => return Err(err(format!("unknown key {k:?}"))),
            }
        }
        if n_beta.is_some() || n_gamma.is_some() {
            c.grid = Grid::new(
                n_beta.unwrap_or(c.grid.n_beta),
                n_gamma.unwrap_or(c.grid.n_gamma),
            )?;
        }
        c.de.validate()?;
        Ok(c)
    }

    pub fn to_text(&self) -> String {
        format!(
            "vertices = {}\nedges = {}\ngraph_seed = {}\np = {}\nn_beta = {}\nn_gamma = {}\npopulation = {}\ngenerations = {}\nf = {}\ncr = {}\nseed = {}\n",
            self.vertices,
            self.edges,
            self.graph_seed,
            self.p,
            self.grid.n_beta,
            self.grid.n_gamma,
            self.de.population,
            self.de.generations,
            self.de.f,
            self.de.cr,
            self.de.seed
        )
    }

    pub fn graph(&self) -> Result<MaxCutGraph, QaoaError> {
        random_graph(self.vertices, self.edges, self.graph_seed)
    }
}
