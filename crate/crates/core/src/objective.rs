//! Expected effective waiting time `J_O(A)`.
//!
//! Each goal is served by the first of its assigned robots to arrive, so
//! its waiting time is the minimum of the assigned robots' travel times.
//! `J_O(A)` averages the expected minimum over all goals.
//!
//! Two evaluators live here:
//!
//! * [`exact_cost`] enumerates every joint placement of the robots serving
//!   a goal. Exponential, used as a test oracle.
//! * [`ObjectiveCache`] keeps, per goal, the distribution of the location
//!   of the currently fastest robot. Adding one robot to a goal is a
//!   pairwise pass over that distribution and the robot's belief, so each
//!   query costs `O(s^2)` for belief support size `s`.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use thiserror::Error;

use crate::graph::NodeId;
use crate::instance::{Assignment, AssignmentInstance, Edge, InstanceError};

/// Largest joint support [`exact_cost`] enumerates per goal by default.
pub const DEFAULT_JOINT_LIMIT: u128 = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum ObjectiveError {
    #[error("robot {robot} is already assigned to goal {goal}")]
    RobotAssigned { robot: usize, goal: usize },
    #[error("robot index {0} out of range")]
    UnknownRobot(usize),
    #[error("goal index {0} out of range")]
    UnknownGoal(usize),
    #[error("goal {0} is not covered by the initial assignment")]
    GoalUncovered(usize),
    #[error("initial assignment covers goal {goal} {count} times")]
    GoalCoveredTwice { goal: usize, count: usize },
    #[error("joint support of goal {goal} has {size} outcomes, above the limit of {limit}")]
    JointSupportTooLarge { goal: usize, size: u128, limit: u128 },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Exact `J_O(A)` by enumerating joint node tuples of the robots serving
/// each goal, refusing goals whose joint support exceeds
/// [`DEFAULT_JOINT_LIMIT`].
pub fn exact_cost(instance: &AssignmentInstance, a: &Assignment, o: &Assignment) -> Result<f64, ObjectiveError> {
    exact_cost_with_limit(instance, a, o, DEFAULT_JOINT_LIMIT)
}

pub fn exact_cost_with_limit(
    instance: &AssignmentInstance,
    a: &Assignment,
    o: &Assignment,
    limit: u128,
) -> Result<f64, ObjectiveError> {
    check_cover(instance, o)?;
    let all = o.union(a)?;
    check_edges(instance, all.edges())?;
    let m = instance.n_goals();
    let mut total = 0.0;
    for j in 0..m {
        let robots: Vec<usize> = all.robots_of(j).collect();
        let size = robots
            .iter()
            .map(|&r| instance.belief(r).len() as u128)
            .try_fold(1u128, |acc, s| acc.checked_mul(s))
            .unwrap_or(u128::MAX);
        if size > limit {
            return Err(ObjectiveError::JointSupportTooLarge { goal: j, size, limit });
        }
        let row = instance.table().row(j);
        let supports: Vec<&[(NodeId, f64)]> = robots.iter().map(|&r| instance.belief(r).support()).collect();
        total += enumerate_min(&supports, row, 0, f64::INFINITY, 1.0);
    }
    Ok(total / m as f64)
}

// Sum over joint tuples of min_k f(v_k) * prod_k P(v_k).
fn enumerate_min(supports: &[&[(NodeId, f64)]], row: &[f64], k: usize, best: f64, prob: f64) -> f64 {
    if k == supports.len() {
        return best * prob;
    }
    supports[k]
        .iter()
        .map(|&(v, p)| enumerate_min(supports, row, k + 1, best.min(row[v.index()]), prob * p))
        .sum()
}

fn check_cover(instance: &AssignmentInstance, o: &Assignment) -> Result<(), ObjectiveError> {
    check_edges(instance, o.edges())?;
    for j in 0..instance.n_goals() {
        match o.robots_of(j).count() {
            0 => return Err(ObjectiveError::GoalUncovered(j)),
            1 => {}
            count => return Err(ObjectiveError::GoalCoveredTwice { goal: j, count }),
        }
    }
    Ok(())
}

fn check_edges(instance: &AssignmentInstance, edges: impl Iterator<Item = Edge>) -> Result<(), ObjectiveError> {
    for e in edges {
        if e.robot >= instance.n_robots() {
            return Err(ObjectiveError::UnknownRobot(e.robot));
        }
        if e.goal >= instance.n_goals() {
            return Err(ObjectiveError::UnknownGoal(e.goal));
        }
    }
    Ok(())
}

/// Probability mass on one node together with its travel time to the goal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Mass {
    pub node: NodeId,
    pub time: f64,
    pub prob: f64,
}

/// Distribution of the fastest robot's location after adding a robot with
/// `belief` to a goal whose current winner distribution is `incumbent`.
///
/// On equal travel times the incumbent keeps the mass. Returns the new
/// distribution (sorted by node) and its expected travel time.
pub(crate) fn merge_winner(
    incumbent: &[Mass],
    belief: &[(NodeId, f64)],
    row: &[f64],
    scratch: &mut Vec<f64>,
) -> (Vec<Mass>, f64) {
    scratch.clear();
    scratch.resize(row.len(), 0.0);
    for m1 in incumbent {
        for &(v2, p2) in belief {
            let p = m1.prob * p2;
            let t2 = row[v2.index()];
            if m1.time <= t2 {
                scratch[m1.node.index()] += p;
            } else {
                scratch[v2.index()] += p;
            }
        }
    }
    let mut out: Vec<Mass> = Vec::with_capacity(incumbent.len() + belief.len());
    let mut nodes: Vec<NodeId> = incumbent.iter().map(|m| m.node).chain(belief.iter().map(|b| b.0)).collect();
    nodes.sort_unstable();
    nodes.dedup();
    for v in nodes {
        let p = scratch[v.index()];
        if p > 0.0 {
            out.push(Mass { node: v, time: row[v.index()], prob: p });
        }
    }
    let cost = out.iter().map(|m| m.prob * m.time).sum();
    (out, cost)
}

/// Decrease in one goal's expected waiting time when a robot with `belief`
/// joins: `sum p1 * p2 * max(t1 - t2, 0)` over incumbent/newcomer pairs.
#[cfg(test)]
pub(crate) fn goal_decrease(incumbent: &[Mass], belief: &[(NodeId, f64)], row: &[f64]) -> f64 {
    let mut gain = 0.0;
    for m1 in incumbent {
        let mut g = 0.0;
        for &(v2, p2) in belief {
            let t2 = row[v2.index()];
            if t2 < m1.time {
                g += p2 * (m1.time - t2);
            }
        }
        gain += m1.prob * g;
    }
    gain
}

pub(crate) fn belief_masses(belief: &[(NodeId, f64)], row: &[f64]) -> (Vec<Mass>, f64) {
    let masses: Vec<Mass> = belief
        .iter()
        .map(|&(node, prob)| Mass { node, time: row[node.index()], prob })
        .collect();
    let cost = masses.iter().map(|m| m.prob * m.time).sum();
    (masses, cost)
}

/// A belief's travel times to one goal in increasing order, with running
/// sums of `p` and `p * t`.
#[derive(Debug)]
struct SortedTimes {
    times: Vec<f64>,
    cum_p: Vec<f64>,
    cum_pt: Vec<f64>,
}

impl SortedTimes {
    fn new(belief: &[(NodeId, f64)], row: &[f64]) -> Self {
        let mut pairs: Vec<(f64, f64)> = belief.iter().map(|&(v, p)| (row[v.index()], p)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cum_p = Vec::with_capacity(pairs.len() + 1);
        let mut cum_pt = Vec::with_capacity(pairs.len() + 1);
        let (mut sp, mut spt) = (0.0, 0.0);
        cum_p.push(0.0);
        cum_pt.push(0.0);
        for &(t, p) in &pairs {
            sp += p;
            spt += p * t;
            cum_p.push(sp);
            cum_pt.push(spt);
        }
        Self { times: pairs.into_iter().map(|x| x.0).collect(), cum_p, cum_pt }
    }

    /// `sum p2 * (t1 - t2)` over entries with `t2 < t1`.
    fn gain_below(&self, t1: f64) -> f64 {
        let k = self.times.partition_point(|&t| t < t1);
        t1 * self.cum_p[k] - self.cum_pt[k]
    }
}

#[derive(Debug, Clone)]
struct GoalState {
    winner: Vec<Mass>,
    cost: f64,
    robots: Vec<usize>,
}

/// Incremental evaluator for `J_O(A)`.
///
/// Queries ([`marginal_decrease`](Self::marginal_decrease)) take `&self`
/// and may run concurrently; [`commit`](Self::commit) needs `&mut self`.
#[derive(Debug)]
pub struct ObjectiveCache<'a> {
    instance: &'a AssignmentInstance,
    goals: Vec<GoalState>,
    goal_of_robot: Vec<Option<usize>>,
    /// Indexed `robot * M + goal`; shared between clones.
    sorted: Arc<Vec<SortedTimes>>,
    total: f64,
    queries: AtomicU64,
    pairs: AtomicU64,
}

impl Clone for ObjectiveCache<'_> {
    fn clone(&self) -> Self {
        Self {
            instance: self.instance,
            goals: self.goals.clone(),
            goal_of_robot: self.goal_of_robot.clone(),
            sorted: Arc::clone(&self.sorted),
            total: self.total,
            queries: AtomicU64::new(self.queries.load(Ordering::Relaxed)),
            pairs: AtomicU64::new(self.pairs.load(Ordering::Relaxed)),
        }
    }
}

impl<'a> ObjectiveCache<'a> {
    /// Seeds the cache with the initial assignment; `total()` is then `J_0`.
    pub fn new(instance: &'a AssignmentInstance, o: &Assignment) -> Result<Self, ObjectiveError> {
        check_cover(instance, o)?;
        let mut goals = Vec::with_capacity(instance.n_goals());
        let mut goal_of_robot = vec![None; instance.n_robots()];
        for j in 0..instance.n_goals() {
            let robot = o.robots_of(j).next().expect("cover checked");
            let (winner, cost) = belief_masses(instance.belief(robot).support(), instance.table().row(j));
            goals.push(GoalState { winner, cost, robots: vec![robot] });
            goal_of_robot[robot] = Some(j);
        }
        let m = instance.n_goals();
        let sorted = (0..instance.n_robots() * m)
            .map(|k| SortedTimes::new(instance.belief(k / m).support(), instance.table().row(k % m)))
            .collect();
        let mut cache = Self {
            instance,
            goals,
            goal_of_robot,
            sorted: Arc::new(sorted),
            total: 0.0,
            queries: AtomicU64::new(0),
            pairs: AtomicU64::new(0),
        };
        cache.refresh_total();
        Ok(cache)
    }

    pub fn instance(&self) -> &'a AssignmentInstance {
        self.instance
    }

    /// Current `J_O(A)` in seconds.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn per_goal_cost(&self, goal: usize) -> f64 {
        self.goals[goal].cost
    }

    /// Distribution of the true location of goal `goal`'s fastest robot.
    pub fn per_goal_argmin(&self, goal: usize) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.goals[goal].winner.iter().map(|m| (m.node, m.prob))
    }

    pub fn robots_at(&self, goal: usize) -> &[usize] {
        &self.goals[goal].robots
    }

    pub fn goal_of(&self, robot: usize) -> Option<usize> {
        self.goal_of_robot[robot]
    }

    pub fn is_assigned(&self, robot: usize) -> bool {
        self.goal_of_robot[robot].is_some()
    }

    /// Number of `marginal_decrease` calls served so far.
    pub fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    /// Number of (incumbent node, candidate node) pairs covered by queries.
    pub fn pair_count(&self) -> u64 {
        self.pairs.load(Ordering::Relaxed)
    }

    fn check_candidate(&self, edge: Edge) -> Result<(), ObjectiveError> {
        if edge.robot >= self.goal_of_robot.len() {
            return Err(ObjectiveError::UnknownRobot(edge.robot));
        }
        if edge.goal >= self.goals.len() {
            return Err(ObjectiveError::UnknownGoal(edge.goal));
        }
        if let Some(goal) = self.goal_of_robot[edge.robot] {
            return Err(ObjectiveError::RobotAssigned { robot: edge.robot, goal });
        }
        Ok(())
    }

    /// `J(current) - J(current + edge)`, without changing the cache.
    pub fn marginal_decrease(&self, edge: Edge) -> Result<f64, ObjectiveError> {
        self.check_candidate(edge)?;
        let state = &self.goals[edge.goal];
        let sorted = &self.sorted[edge.robot * self.goals.len() + edge.goal];
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.pairs
            .fetch_add((state.winner.len() * sorted.times.len()) as u64, Ordering::Relaxed);
        let gain: f64 = state.winner.iter().map(|m| m.prob * sorted.gain_below(m.time)).sum();
        Ok(gain / self.goals.len() as f64)
    }

    /// Adds `edge` and returns the realized decrease of `J`.
    pub fn commit(&mut self, edge: Edge) -> Result<f64, ObjectiveError> {
        self.check_candidate(edge)?;
        let before = self.total;
        let row = self.instance.table().row(edge.goal);
        let belief = self.instance.belief(edge.robot).support();
        let mut scratch = Vec::new();
        let state = &mut self.goals[edge.goal];
        let (winner, cost) = merge_winner(&state.winner, belief, row, &mut scratch);
        state.winner = winner;
        state.cost = cost;
        state.robots.push(edge.robot);
        self.goal_of_robot[edge.robot] = Some(edge.goal);
        self.refresh_total();
        Ok(before - self.total)
    }

    fn refresh_total(&mut self) {
        self.total = self.goals.iter().map(|g| g.cost).sum::<f64>() / self.goals.len() as f64;
    }
}
