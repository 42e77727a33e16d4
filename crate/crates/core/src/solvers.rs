//! Redundant assignment solvers and baselines.
//!
//! All solvers start from an initial assignment `O` and place up to
//! `N_d - M` redundant edges. [`greedy`] is the main method; it carries
//! the guarantee `J(greedy) <= (J* + J_0) / 2`, checked by
//! [`verify_bound`] against [`exhaustive_optimal`].

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::instance::{hungarian_assignment, Assignment, AssignmentInstance, Edge, InstanceError};
use crate::matroid::{IndependenceContext, MatroidError};
use crate::objective::{belief_masses, merge_winner, Mass, ObjectiveCache, ObjectiveError};
use crate::seed::rng_for;

/// Exhaustive search refuses instances with more free robots than this.
pub const MAX_FREE_ROBOTS: usize = 20;

/// Slack used when comparing costs that should satisfy an inequality.
pub const COST_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    HungarianOnly,
    Greedy,
    Optimal,
    SliceGreedy,
    Random,
    TrueOracle,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::HungarianOnly,
        Method::Greedy,
        Method::Optimal,
        Method::SliceGreedy,
        Method::Random,
        Method::TrueOracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::HungarianOnly => "hungarian",
            Method::Greedy => "greedy",
            Method::Optimal => "optimal",
            Method::SliceGreedy => "slice_greedy",
            Method::Random => "random",
            Method::TrueOracle => "true",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "hungarian" | "hungarian_only" => Method::HungarianOnly,
            "greedy" => Method::Greedy,
            "optimal" => Method::Optimal,
            "slice_greedy" | "slice-greedy" | "slice" => Method::SliceGreedy,
            "random" => Method::Random,
            "true" | "true_oracle" => Method::TrueOracle,
            other => return Err(SolverError::UnknownMethod(other.to_string())),
        })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Matroid(#[from] MatroidError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("exhaustive search over {free} free robots refused (limit {limit}, ~{estimated_calls} objective calls)")]
    TooLarge { free: usize, limit: usize, estimated_calls: u128 },
    #[error("instance carries no ground truth")]
    MissingTruth,
    #[error("reports were produced on different instances or initial assignments")]
    Mismatch,
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
}

/// One committed redundant edge and the objective right after it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Step {
    pub edge: Edge,
    pub decrease: f64,
    pub cost_after: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverReport {
    pub method: Method,
    pub a: Assignment,
    pub o: Assignment,
    /// Redundant edges in the order they were chosen.
    pub steps: Vec<Step>,
    pub cost_j: f64,
    pub j0: f64,
    pub objective_calls: u64,
    pub wall_time_s: f64,
    pub fingerprint: u64,
}

impl SolverReport {
    pub fn normalized(&self) -> f64 {
        if self.j0 > 0.0 {
            self.cost_j / self.j0
        } else {
            1.0
        }
    }

    /// Every edge deployed: `O` plus `A`.
    pub fn deployment(&self) -> Assignment {
        self.o.union(&self.a).expect("solvers keep A and O disjoint in robots")
    }

    pub const CSV_HEADER: &'static str = "method,N,M,N_d,J0,J,J_over_J0,objective_calls,redundant_edges";

    /// Wall time is left out so rows are reproducible byte for byte.
    pub fn csv_row(&self, instance: &AssignmentInstance) -> String {
        let edges: Vec<String> = self.a.edges().map(|e| format!("{}:{}", e.robot, e.goal)).collect();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.method,
            instance.n_robots(),
            instance.n_goals(),
            instance.cap(),
            self.j0,
            self.cost_j,
            self.normalized(),
            self.objective_calls,
            edges.join(" ")
        )
    }
}

fn report(
    method: Method,
    instance: &AssignmentInstance,
    o: &Assignment,
    steps: Vec<Step>,
    cost_j: f64,
    j0: f64,
    objective_calls: u64,
    started: Instant,
) -> Result<SolverReport, SolverError> {
    let a = Assignment::from_edges(steps.iter().map(|s| s.edge))?;
    Ok(SolverReport {
        method,
        a,
        o: o.clone(),
        steps,
        cost_j,
        j0,
        objective_calls,
        wall_time_s: started.elapsed().as_secs_f64(),
        fingerprint: instance.fingerprint(),
    })
}

/// `O` alone: no redundant robots.
pub fn hungarian_only(instance: &AssignmentInstance, o: &Assignment) -> Result<SolverReport, SolverError> {
    let started = Instant::now();
    let cache = ObjectiveCache::new(instance, o)?;
    let j0 = cache.total();
    report(Method::HungarianOnly, instance, o, Vec::new(), j0, j0, 0, started)
}

/// Greedy under the matroid constraint: repeatedly commits the eligible
/// edge with the largest marginal decrease until `N_d - M` edges are placed.
/// Ties go to the lexicographically smallest (robot, goal).
pub fn greedy(instance: &AssignmentInstance, o: &Assignment) -> Result<SolverReport, SolverError> {
    greedy_with_budget(instance, o, instance.rank())
}

pub fn greedy_with_budget(
    instance: &AssignmentInstance,
    o: &Assignment,
    budget: usize,
) -> Result<SolverReport, SolverError> {
    let started = Instant::now();
    let mut cache = ObjectiveCache::new(instance, o)?;
    let j0 = cache.total();
    let cap = instance.n_goals() + budget.min(instance.rank());
    let mut ctx = IndependenceContext::new(o, instance.n_robots(), instance.n_goals(), cap)?;
    let mut steps = Vec::with_capacity(ctx.rank());
    while !ctx.is_full() {
        let mut best: Option<(Edge, f64)> = None;
        for e in ctx.eligible() {
            let d = cache.marginal_decrease(e)?;
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((e, d));
            }
        }
        let Some((edge, _)) = best else { break };
        let decrease = cache.commit(edge)?;
        ctx.push(edge)?;
        steps.push(Step { edge, decrease, cost_after: cache.total() });
    }
    let cost = cache.total();
    report(Method::Greedy, instance, o, steps, cost, j0, cache.query_count(), started)
}

/// Round-robin greedy that spreads redundancy evenly: each round every goal,
/// in index order, takes its best free robot. A final partial round (budget
/// left below `M`) serves the goals with the largest marginal decrease.
pub fn slice_greedy(instance: &AssignmentInstance, o: &Assignment) -> Result<SolverReport, SolverError> {
    slice_greedy_with_budget(instance, o, instance.rank())
}

pub fn slice_greedy_with_budget(
    instance: &AssignmentInstance,
    o: &Assignment,
    budget: usize,
) -> Result<SolverReport, SolverError> {
    let started = Instant::now();
    let m = instance.n_goals();
    let mut cache = ObjectiveCache::new(instance, o)?;
    let j0 = cache.total();
    let cap = m + budget.min(instance.rank());
    let mut ctx = IndependenceContext::new(o, instance.n_robots(), m, cap)?;
    let mut steps = Vec::new();

    'rounds: while !ctx.is_full() {
        let remaining = ctx.rank() - ctx.selected().len();
        let mut open: Vec<bool> = vec![true; m];
        let picks = remaining.min(m);
        for _ in 0..picks {
            // full round: goals in order; partial round: best goal overall
            let goals: Vec<usize> = if remaining >= m {
                vec![open.iter().position(|&x| x).expect("picks <= m")]
            } else {
                (0..m).filter(|&j| open[j]).collect()
            };
            let mut best: Option<(Edge, f64)> = None;
            for r in ctx.free_robots() {
                for &j in &goals {
                    let e = Edge::new(r, j);
                    let d = cache.marginal_decrease(e)?;
                    if best.is_none_or(|(_, bd)| d > bd) {
                        best = Some((e, d));
                    }
                }
            }
            let Some((edge, _)) = best else { break 'rounds };
            let decrease = cache.commit(edge)?;
            ctx.push(edge)?;
            open[edge.goal] = false;
            steps.push(Step { edge, decrease, cost_after: cache.total() });
        }
    }
    let cost = cache.total();
    report(Method::SliceGreedy, instance, o, steps, cost, j0, cache.query_count(), started)
}

/// `N_d - M` distinct free robots drawn uniformly, each sent to a uniformly
/// random goal. With a fixed seed, smaller budgets yield prefixes of the
/// same draw.
pub fn random_assign(instance: &AssignmentInstance, o: &Assignment, seed: u64) -> Result<SolverReport, SolverError> {
    random_assign_with_budget(instance, o, seed, instance.rank())
}

pub fn random_assign_with_budget(
    instance: &AssignmentInstance,
    o: &Assignment,
    seed: u64,
    budget: usize,
) -> Result<SolverReport, SolverError> {
    let started = Instant::now();
    let mut cache = ObjectiveCache::new(instance, o)?;
    let j0 = cache.total();
    let mut rng = rng_for(seed, 0);
    let mut free: Vec<usize> = (0..instance.n_robots()).filter(|&r| !cache.is_assigned(r)).collect();
    free.shuffle(&mut rng);
    let mut steps = Vec::new();
    for &robot in free.iter().take(budget.min(instance.rank())) {
        let edge = Edge::new(robot, rng.random_range(0..instance.n_goals()));
        let decrease = cache.commit(edge)?;
        steps.push(Step { edge, decrease, cost_after: cache.total() });
    }
    let cost = cache.total();
    report(Method::Random, instance, o, steps, cost, j0, 0, started)
}

/// Hungarian assignment on the true, noise-free travel times. The reported
/// cost is the mean travel time of that assignment from the true nodes;
/// `j0` is the same value.
pub fn true_oracle(instance: &AssignmentInstance) -> Result<SolverReport, SolverError> {
    let started = Instant::now();
    let truth = instance.ground_truth().ok_or(SolverError::MissingTruth)?;
    let table = instance.table();
    let costs: Vec<Vec<f64>> = (0..instance.n_goals())
        .map(|j| truth.robot_nodes.iter().map(|&v| table.time(j, v)).collect())
        .collect();
    let o = hungarian_assignment(&costs)?;
    let cost = o.edges().map(|e| costs[e.goal][e.robot]).sum::<f64>() / instance.n_goals() as f64;
    report(Method::TrueOracle, instance, &o, Vec::new(), cost, cost, 0, started)
}

/// Minimum `J` over every independent `A` with `|A| = N_d - M`.
pub fn exhaustive_optimal(instance: &AssignmentInstance, o: &Assignment) -> Result<SolverReport, SolverError> {
    let mut all = optimal_all_budgets(instance, o)?;
    Ok(all.pop().expect("budget 0 is always present"))
}

/// Exact optimum for every budget `0..=N_d - M` in one search.
///
/// For each goal the expected waiting time of every subset of free robots
/// (up to the budget) is built by extending subsets one robot at a time; a
/// DP over goals then picks the best disjoint split of a robot subset.
/// `objective_calls` counts subset evaluations, `O(M 2^(N-M))`.
pub fn optimal_all_budgets(instance: &AssignmentInstance, o: &Assignment) -> Result<Vec<SolverReport>, SolverError> {
    let started = Instant::now();
    let cache = ObjectiveCache::new(instance, o)?;
    let j0 = cache.total();
    let m = instance.n_goals();
    let free: Vec<usize> = (0..instance.n_robots()).filter(|&r| !cache.is_assigned(r)).collect();
    let n = free.len();
    if n > MAX_FREE_ROBOTS {
        return Err(SolverError::TooLarge {
            free: n,
            limit: MAX_FREE_ROBOTS,
            estimated_calls: (m as u128) << n.min(120),
        });
    }
    let k = instance.rank().min(n);
    let full = 1usize << n;

    let mut subset_cost = vec![vec![f64::NAN; full]; m];
    let mut calls = 0u64;
    let mut scratch = Vec::new();
    for (j, costs) in subset_cost.iter_mut().enumerate() {
        let base_robot = o.robots_of(j).next().expect("O covers goal");
        let row = instance.table().row(j);
        let (base, base_cost) = belief_masses(instance.belief(base_robot).support(), row);
        let mut stack: Vec<(usize, usize, Vec<Mass>, f64)> = vec![(0, 0, base, base_cost)];
        while let Some((start, mask, dist, cost)) = stack.pop() {
            costs[mask] = cost;
            calls += 1;
            if (mask.count_ones() as usize) < k {
                for b in start..n {
                    let (next, next_cost) = merge_winner(&dist, instance.belief(free[b]).support(), row, &mut scratch);
                    stack.push((b + 1, mask | (1 << b), next, next_cost));
                }
            }
        }
    }

    let within = |mask: usize| (mask.count_ones() as usize) <= k;
    let mut best = subset_cost[0].clone();
    let mut choice: Vec<Vec<u32>> = vec![(0..full as u32).collect()];
    for costs in subset_cost.iter().skip(1) {
        let mut next = vec![f64::INFINITY; full];
        let mut pick = vec![0u32; full];
        for mask in (0..full).filter(|&s| within(s)) {
            let mut sub = mask;
            loop {
                let v = best[mask ^ sub] + costs[sub];
                if v < next[mask] {
                    next[mask] = v;
                    pick[mask] = sub as u32;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & mask;
            }
        }
        best = next;
        choice.push(pick);
    }

    let wall = started.elapsed().as_secs_f64();
    let mut reports = Vec::with_capacity(k + 1);
    for budget in 0..=k {
        let mut arg = None;
        for mask in (0..full).filter(|&s| s.count_ones() as usize == budget) {
            if arg.is_none_or(|a: usize| best[mask] < best[a]) {
                arg = Some(mask);
            }
        }
        let mut mask = arg.expect("some subset of each size exists");
        let total = best[mask] / m as f64;
        let mut edges = Vec::with_capacity(budget);
        for j in (0..m).rev() {
            let sub = choice[j][mask] as usize;
            for (b, &robot) in free.iter().enumerate() {
                if sub & (1 << b) != 0 {
                    edges.push(Edge::new(robot, j));
                }
            }
            mask ^= sub;
        }
        edges.sort_unstable();
        let steps = edges
            .into_iter()
            .map(|edge| Step { edge, decrease: f64::NAN, cost_after: f64::NAN })
            .collect();
        let mut r = report(Method::Optimal, instance, o, steps, total, j0, calls, started)?;
        r.wall_time_s = wall;
        reports.push(r);
    }
    Ok(reports)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCertificate {
    pub holds: bool,
    /// `J(greedy)`
    pub lhs: f64,
    /// `(J* + J_0) / 2`
    pub rhs: f64,
}

/// Checks `J(greedy) <= (J* + J_0)/2` for two reports on the same instance.
pub fn verify_bound(greedy: &SolverReport, optimal: &SolverReport) -> Result<BoundCertificate, SolverError> {
    if greedy.fingerprint != optimal.fingerprint || greedy.o != optimal.o || greedy.j0 != optimal.j0 {
        return Err(SolverError::Mismatch);
    }
    let lhs = greedy.cost_j;
    let rhs = 0.5 * (optimal.cost_j + greedy.j0);
    Ok(BoundCertificate { holds: lhs <= rhs + COST_TOLERANCE, lhs, rhs })
}

/// Runs one planning method with its default settings.
pub fn solve(
    method: Method,
    instance: &AssignmentInstance,
    o: &Assignment,
    seed: u64,
) -> Result<SolverReport, SolverError> {
    match method {
        Method::HungarianOnly => hungarian_only(instance, o),
        Method::Greedy => greedy(instance, o),
        Method::Optimal => exhaustive_optimal(instance, o),
        Method::SliceGreedy => slice_greedy(instance, o),
        Method::Random => random_assign(instance, o, seed),
        Method::TrueOracle => true_oracle(instance),
    }
}
