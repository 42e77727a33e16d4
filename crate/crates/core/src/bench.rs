//! Monte Carlo benchmark on a grid: normalized realized waiting times per
//! method, deployment cap and noise level.
//!
//! Each trial samples true robot and goal nodes, one speed per robot and
//! noisy reports. Every method plans on the same noisy instance and is
//! scored on the realized travel times. Scores are normalized by the
//! Hungarian assignment of the same trial.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{distances_to, GraphError, NodeId, TransportGraph};
use crate::instance::{build_instance, initial_assignment, Assignment, InstanceError};
use crate::seed::{derive_seed, rng_for};
use crate::solvers::{
    greedy_with_budget, optimal_all_budgets, random_assign_with_budget, slice_greedy_with_budget, true_oracle, Method,
    SolverError, SolverReport, MAX_FREE_ROBOTS,
};
use crate::uncertainty::{NoiseSpec, DEFAULT_P_MIN};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid experiment: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    /// Label written to the `series` column.
    pub series: String,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub spacing: f64,
    pub n_robots: usize,
    pub n_goals: usize,
    /// Deployment caps `N_d` to evaluate.
    pub caps: Vec<usize>,
    pub noises: Vec<NoiseSpec>,
    pub iterations: usize,
    pub speed_mean: f64,
    pub speed_std: f64,
    pub p_min: f64,
    pub seed: u64,
    pub methods: Vec<Method>,
}

impl ExperimentConfig {
    /// 16x16 grid, 50 m spacing, `N = 16`, `M = 4`, `N_d = 4, 6, ..., 16`.
    pub fn series_a() -> Self {
        Self {
            series: "A".into(),
            grid_rows: 16,
            grid_cols: 16,
            spacing: 50.0,
            n_robots: 16,
            n_goals: 4,
            caps: (4..=16).step_by(2).collect(),
            noises: vec![NoiseSpec::gaussian(100.0)],
            iterations: 500,
            speed_mean: 10.0,
            speed_std: 2.0,
            p_min: DEFAULT_P_MIN,
            seed: 0,
            methods: vec![Method::HungarianOnly, Method::Greedy, Method::Random, Method::TrueOracle],
        }
    }

    /// Same grid, `N = 100`, `M = 10`, `N_d = 10, 20, ..., 100`.
    pub fn series_b() -> Self {
        Self {
            series: "B".into(),
            n_robots: 100,
            n_goals: 10,
            caps: (10..=100).step_by(10).collect(),
            methods: vec![
                Method::HungarianOnly,
                Method::Greedy,
                Method::SliceGreedy,
                Method::Random,
                Method::TrueOracle,
            ],
            ..Self::series_a()
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: String| Err(BenchError::InvalidConfig(m));
        if self.iterations == 0 {
            return bad("iterations must be >= 1".into());
        }
        if !(self.speed_mean > 0.0 && self.speed_mean.is_finite()) {
            return bad(format!("speed_mean must be > 0, got {}", self.speed_mean));
        }
        if !(self.speed_std >= 0.0 && self.speed_std.is_finite()) {
            return bad(format!("speed_std must be >= 0, got {}", self.speed_std));
        }
        if self.n_goals == 0 {
            return bad("at least one goal is required".into());
        }
        if self.n_robots < self.n_goals {
            return bad(format!("N={} is below M={}", self.n_robots, self.n_goals));
        }
        if self.n_robots + self.n_goals > self.grid_rows * self.grid_cols {
            return bad(format!(
                "N + M = {} exceeds the {} grid nodes",
                self.n_robots + self.n_goals,
                self.grid_rows * self.grid_cols
            ));
        }
        if self.caps.is_empty() || self.noises.is_empty() || self.methods.is_empty() {
            return bad("caps, noises and methods must be non-empty".into());
        }
        if let Some(c) = self.caps.iter().find(|&&c| c < self.n_goals || c > self.n_robots) {
            return bad(format!("N_d={c} outside [M, N] = [{}, {}]", self.n_goals, self.n_robots));
        }
        let free = self.n_robots - self.n_goals;
        if self.methods.contains(&Method::Optimal) && free > MAX_FREE_ROBOTS {
            return Err(SolverError::TooLarge {
                free,
                limit: MAX_FREE_ROBOTS,
                estimated_calls: (self.n_goals as u128) << free.min(120),
            }
            .into());
        }
        Ok(())
    }

    fn max_cap(&self) -> usize {
        *self.caps.iter().max().expect("validated")
    }
}

/// One method's score in one trial, at one noise level and cap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub noise: NoiseSpec,
    pub cap: usize,
    pub method: Method,
    pub realized_wait_per_goal: Vec<f64>,
    /// Mean realized wait over goals, seconds.
    pub mean_wait: f64,
    /// `mean_wait` over the Hungarian `mean_wait` of the same trial.
    pub normalized: f64,
    /// Planned `J` (expected wait on the noisy instance; noise-free for
    /// the true-position oracle).
    pub expected_j: f64,
    pub expected_normalized: f64,
    pub objective_calls: u64,
}

/// Speed drawn from `Normal(mean, std)`, redrawn while below `mean / 5`.
pub fn sample_speed<R: Rng + ?Sized>(mean: f64, std: f64, rng: &mut R) -> f64 {
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let v = mean + std * z;
        if v >= mean / 5.0 {
            return v;
        }
    }
}

/// Runs one trial for every noise level, cap and method.
///
/// True nodes and speeds are shared across noise levels, so different
/// levels are compared on the same ground truth.
pub fn run_trial(config: &ExperimentConfig, trial_seed: u64) -> Result<Vec<TrialOutcome>, BenchError> {
    config.validate()?;
    let graph = TransportGraph::grid(config.grid_rows, config.grid_cols, config.spacing, config.speed_mean)?;
    run_trial_on(config, &graph, trial_seed)
}

fn run_trial_on(config: &ExperimentConfig, graph: &TransportGraph, trial_seed: u64) -> Result<Vec<TrialOutcome>, BenchError> {
    let (n, m) = (config.n_robots, config.n_goals);
    let mut rng = rng_for(trial_seed, 0);
    let nodes: Vec<NodeId> = rand::seq::index::sample(&mut rng, graph.node_count(), n + m)
        .into_iter()
        .map(NodeId::from)
        .collect();
    let (robots, goals) = nodes.split_at(n);
    let speeds: Vec<f64> = (0..n).map(|_| sample_speed(config.speed_mean, config.speed_std, &mut rng)).collect();
    let meters: Vec<Vec<f64>> = goals.iter().map(|&g| distances_to(graph, g, |a| graph.arc_length(a))).collect();
    let realized = |deployment: &Assignment| -> Vec<f64> {
        let mut wait = vec![f64::INFINITY; m];
        for e in deployment.edges() {
            let t = meters[e.goal][robots[e.robot].index()] / speeds[e.robot];
            wait[e.goal] = wait[e.goal].min(t);
        }
        wait
    };

    let max_cap = config.max_cap();
    let mut out = Vec::new();
    for noise in &config.noises {
        let instance = build_instance(graph, goals, robots, noise, max_cap, config.p_min, derive_seed(trial_seed, 1))?;
        let o = initial_assignment(&instance);
        let base_wait = realized(&o);
        let base_mean = mean(&base_wait);
        let j0 = crate::objective::ObjectiveCache::new(&instance, &o).map_err(SolverError::from)?.total();

        let greedy = if config.methods.contains(&Method::Greedy) {
            Some(greedy_with_budget(&instance, &o, max_cap - m)?)
        } else {
            None
        };
        let random = if config.methods.contains(&Method::Random) {
            Some(random_assign_with_budget(&instance, &o, derive_seed(trial_seed, 2), max_cap - m)?)
        } else {
            None
        };
        let optimal = if config.methods.contains(&Method::Optimal) {
            Some(optimal_all_budgets(&instance, &o)?)
        } else {
            None
        };
        let truth = if config.methods.contains(&Method::TrueOracle) {
            Some(true_oracle(&instance)?)
        } else {
            None
        };

        for &cap in &config.caps {
            let budget = cap - m;
            for &method in &config.methods {
                let (deployment, expected_j, calls) = match method {
                    Method::HungarianOnly => (o.clone(), j0, 0),
                    Method::Greedy => prefix(greedy.as_ref().expect("computed"), budget, &o, n),
                    Method::Random => prefix(random.as_ref().expect("computed"), budget, &o, n),
                    Method::Optimal => {
                        let r = &optimal.as_ref().expect("computed")[budget];
                        (r.deployment(), r.cost_j, r.objective_calls)
                    }
                    Method::SliceGreedy => {
                        let r = slice_greedy_with_budget(&instance, &o, budget)?;
                        (r.deployment(), r.cost_j, r.objective_calls)
                    }
                    Method::TrueOracle => {
                        let r = truth.as_ref().expect("computed");
                        (r.o.clone(), r.cost_j, 0)
                    }
                };
                let wait = realized(&deployment);
                let mean_wait = mean(&wait);
                out.push(TrialOutcome {
                    noise: *noise,
                    cap,
                    method,
                    realized_wait_per_goal: wait,
                    mean_wait,
                    normalized: mean_wait / base_mean,
                    expected_j,
                    expected_normalized: expected_j / j0,
                    objective_calls: calls,
                });
            }
        }
    }
    Ok(out)
}

/// Deployment, planned cost and query count after the first `budget` steps.
fn prefix(report: &SolverReport, budget: usize, o: &Assignment, n_robots: usize) -> (Assignment, f64, u64) {
    let steps = &report.steps[..budget.min(report.steps.len())];
    let mut deployment = o.clone();
    for s in steps {
        deployment.insert(s.edge).expect("solver edges use free robots");
    }
    let cost = steps.last().map_or(report.j0, |s| s.cost_after);
    let calls = match report.method {
        // step k queries every edge of the n - M - k free robots
        Method::Greedy => {
            let (free, m) = (n_robots - o.len(), o.len());
            (0..steps.len()).map(|k| ((free - k) * m) as u64).sum()
        }
        _ => report.objective_calls,
    };
    (deployment, cost, calls)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Mean and normal-approximation 95% interval (`mean +- 1.96 sd / sqrt(n)`,
/// sample standard deviation; zero width for a single value).
pub fn mean_ci95(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mu = mean(xs);
    if xs.len() < 2 {
        return (mu, mu, mu);
    }
    let var = xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (n - 1.0);
    let half = 1.96 * var.sqrt() / n.sqrt();
    (mu, mu - half, mu + half)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TableKind {
    /// x axis is `N_d`.
    Series,
    /// x axis is the noise scale.
    NoiseSweep,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRow {
    pub series: String,
    pub noise: NoiseSpec,
    pub n_robots: usize,
    pub n_goals: usize,
    pub cap: usize,
    pub method: Method,
    pub mean_norm_wait: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_wait_s: f64,
    pub iterations: usize,
    pub mean_expected_norm: f64,
    pub mean_objective_calls: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultsTable {
    pub kind: TableKind,
    pub rows: Vec<SeriesRow>,
}

pub const SERIES_CSV_HEADER: &str = "series,noise_kind,noise_scale,N,M,N_d,method,mean_norm_wait,ci_low,ci_high,mean_wait_s,iterations";
pub const EXPECTED_CSV_HEADER: &str = "series,noise_kind,noise_scale,N,M,N_d,method,mean_expected_norm,mean_objective_calls,iterations";

impl ResultsTable {
    pub fn row(&self, noise: &NoiseSpec, cap: usize, method: Method) -> Option<&SeriesRow> {
        self.rows.iter().find(|r| r.noise == *noise && r.cap == cap && r.method == method)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(SERIES_CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.series,
                r.noise.kind.as_str(),
                r.noise.scale,
                r.n_robots,
                r.n_goals,
                r.cap,
                r.method,
                r.mean_norm_wait,
                r.ci_low,
                r.ci_high,
                r.mean_wait_s,
                r.iterations
            )
            .expect("writing to a String");
        }
        s
    }

    /// Planned (expected) cost companion to [`to_csv`](Self::to_csv).
    pub fn expected_csv(&self) -> String {
        let mut s = String::from(EXPECTED_CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                r.series,
                r.noise.kind.as_str(),
                r.noise.scale,
                r.n_robots,
                r.n_goals,
                r.cap,
                r.method,
                r.mean_expected_norm,
                r.mean_objective_calls,
                r.iterations
            )
            .expect("writing to a String");
        }
        s
    }

    /// Gnuplot data: one block per (noise kind, method) for a series, or
    /// per (cap, method) for a sweep. Blocks are separated by two blank
    /// lines; columns are `x mean ci_low ci_high`.
    pub fn plot_data(&self) -> String {
        let mut blocks: BTreeMap<(String, usize, Method), Vec<&SeriesRow>> = BTreeMap::new();
        for r in &self.rows {
            let key = match self.kind {
                TableKind::Series => (r.noise.to_string(), 0, r.method),
                TableKind::NoiseSweep => (r.noise.kind.as_str().to_string(), r.cap, r.method),
            };
            blocks.entry(key).or_default().push(r);
        }
        let mut s = String::new();
        for ((noise, cap, method), rows) in blocks {
            match self.kind {
                TableKind::Series => writeln!(s, "# series {} noise {noise} method {method}", rows[0].series),
                TableKind::NoiseSweep => writeln!(s, "# series {} N_d {cap} method {method}", rows[0].series),
            }
            .expect("writing to a String");
            s.push_str("# x mean_norm_wait ci_low ci_high\n");
            for r in rows {
                let x = match self.kind {
                    TableKind::Series => r.cap as f64,
                    TableKind::NoiseSweep => r.noise.scale,
                };
                writeln!(s, "{x} {} {} {}", r.mean_norm_wait, r.ci_low, r.ci_high).expect("writing to a String");
            }
            s.push_str("\n\n");
        }
        s
    }
}

/// Mean normalized wait with 95% CI for every (noise, cap, method).
///
/// Trials run in parallel on the current rayon pool; trial `i` uses seed
/// `derive_seed(config.seed, i)`, so results do not depend on the pool size.
pub fn run_series(config: &ExperimentConfig) -> Result<ResultsTable, BenchError> {
    Ok(ResultsTable { kind: TableKind::Series, rows: aggregate(config, &run_trials(config)?) })
}

/// Like [`run_series`], laid out with the noise scale as x axis.
pub fn run_noise_sweep(config: &ExperimentConfig) -> Result<ResultsTable, BenchError> {
    Ok(ResultsTable { kind: TableKind::NoiseSweep, rows: aggregate(config, &run_trials(config)?) })
}

/// All trial outcomes, in trial order.
pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<Vec<TrialOutcome>>, BenchError> {
    config.validate()?;
    let graph = TransportGraph::grid(config.grid_rows, config.grid_cols, config.spacing, config.speed_mean)?;
    (0..config.iterations as u64)
        .into_par_iter()
        .map(|i| run_trial_on(config, &graph, derive_seed(config.seed, i)))
        .collect()
}

fn aggregate(config: &ExperimentConfig, trials: &[Vec<TrialOutcome>]) -> Vec<SeriesRow> {
    let mut rows = Vec::new();
    for noise in &config.noises {
        for &cap in &config.caps {
            for &method in &config.methods {
                let picked: Vec<&TrialOutcome> = trials
                    .iter()
                    .flat_map(|t| t.iter())
                    .filter(|o| o.noise == *noise && o.cap == cap && o.method == method)
                    .collect();
                let norm: Vec<f64> = picked.iter().map(|o| o.normalized).collect();
                let (mu, lo, hi) = mean_ci95(&norm);
                let waits: Vec<f64> = picked.iter().map(|o| o.mean_wait).collect();
                let expected: Vec<f64> = picked.iter().map(|o| o.expected_normalized).collect();
                let calls: Vec<f64> = picked.iter().map(|o| o.objective_calls as f64).collect();
                rows.push(SeriesRow {
                    series: config.series.clone(),
                    noise: *noise,
                    n_robots: config.n_robots,
                    n_goals: config.n_goals,
                    cap,
                    method,
                    mean_norm_wait: mu,
                    ci_low: lo,
                    ci_high: hi,
                    mean_wait_s: mean(&waits),
                    iterations: picked.len(),
                    mean_expected_norm: mean(&expected),
                    mean_objective_calls: mean(&calls),
                });
            }
        }
    }
    rows
}
