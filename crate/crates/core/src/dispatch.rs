//! Batched ride-request replay with a resizable vehicle fleet.
//!
//! Every `batch_s` seconds the pending requests become the goals of one
//! assignment instance and the idle vehicles its robots. The first vehicle
//! to reach a pickup serves it; the other vehicles sent there are released
//! where they stand when the winner arrives.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{canonical_path, distances_to, node_reached_after, NodeId, TransportGraph};
use crate::instance::{build_instance, initial_assignment, Assignment, InstanceError};
use crate::seed::{derive_seed, rng_for};
use crate::solvers::{greedy, SolverError};
use crate::uncertainty::{NoiseSpec, DEFAULT_P_MIN};

#[derive(Debug, Error)]
pub enum DispatchError {
    #[error("trace line {line}: {message}")]
    Trace { line: usize, message: String },
    #[error("cannot read trace")]
    Io(#[from] std::io::Error),
    #[error("invalid replay configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

pub const TRACE_HEADER: &str = "request_time_s,pickup_node,dropoff_node";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Request {
    pub time: f64,
    pub pickup: NodeId,
    pub dropoff: NodeId,
}

/// Requests sorted by time (stable for equal times).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RequestTrace {
    events: Vec<Request>,
}

impl RequestTrace {
    pub fn new(mut events: Vec<Request>, graph: &TransportGraph) -> Result<Self, DispatchError> {
        for (i, r) in events.iter().enumerate() {
            if !(r.time.is_finite() && r.time >= 0.0) {
                return Err(DispatchError::Trace { line: i + 2, message: format!("bad request time {}", r.time) });
            }
            for v in [r.pickup, r.dropoff] {
                if !graph.contains(v) {
                    return Err(DispatchError::Trace { line: i + 2, message: format!("node {v} is not in the graph") });
                }
            }
        }
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        Ok(Self { events })
    }

    pub fn load(path: impl AsRef<Path>, graph: &TransportGraph) -> Result<Self, DispatchError> {
        Self::parse(&std::fs::read_to_string(path)?, graph)
    }

    /// CSV with header `request_time_s,pickup_node,dropoff_node`.
    pub fn parse(text: &str, graph: &TransportGraph) -> Result<Self, DispatchError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim() == TRACE_HEADER => {}
            Some((i, h)) => {
                return Err(DispatchError::Trace { line: i + 1, message: format!("expected header `{TRACE_HEADER}`, got `{h}`") })
            }
            None => return Ok(Self::default()),
        }
        let mut events = Vec::new();
        for (i, line) in lines {
            let err = |message: String| DispatchError::Trace { line: i + 1, message };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(err(format!("expected 3 fields, got {}", fields.len())));
            }
            let time: f64 = fields[0].parse().map_err(|_| err(format!("bad time `{}`", fields[0])))?;
            let node = |s: &str| s.parse::<u32>().map(NodeId).map_err(|_| err(format!("bad node `{s}`")));
            let (pickup, dropoff) = (node(fields[1])?, node(fields[2])?);
            for v in [pickup, dropoff] {
                if !graph.contains(v) {
                    return Err(err(format!("node {v} is not in the graph")));
                }
            }
            if !(time.is_finite() && time >= 0.0) {
                return Err(err(format!("bad request time {time}")));
            }
            events.push(Request { time, pickup, dropoff });
        }
        Self::new(events, graph)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{TRACE_HEADER}\n");
        for r in &self.events {
            writeln!(s, "{},{},{}", r.time, r.pickup, r.dropoff).expect("writing to a String");
        }
        s
    }

    pub fn events(&self) -> &[Request] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Poisson arrivals at `rate` per second over `[0, duration)`, pickups and
/// dropoffs uniform over distinct nodes.
pub fn generate_synthetic_trace(
    graph: &TransportGraph,
    rate: f64,
    duration: f64,
    seed: u64,
) -> Result<RequestTrace, DispatchError> {
    if !(rate > 0.0 && rate.is_finite()) || !(duration >= 0.0 && duration.is_finite()) {
        return Err(DispatchError::InvalidConfig(format!("need rate > 0 and duration >= 0, got {rate}, {duration}")));
    }
    if graph.node_count() < 2 {
        return Err(DispatchError::InvalidConfig("graph needs at least two nodes".into()));
    }
    let mut rng = rng_for(seed, 0);
    let n = graph.node_count();
    let mut events = Vec::new();
    let mut t = 0.0;
    loop {
        let u: f64 = rng.random();
        t += -(1.0 - u).ln() / rate;
        if t >= duration {
            break;
        }
        let pickup = rng.random_range(0..n);
        let mut dropoff = rng.random_range(0..n - 1);
        if dropoff >= pickup {
            dropoff += 1;
        }
        events.push(Request { time: t, pickup: NodeId::from(pickup), dropoff: NodeId::from(dropoff) });
    }
    Ok(RequestTrace { events })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Redundant,
    NonRedundant,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Redundant => "redundant",
            Policy::NonRedundant => "non_redundant",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = DispatchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "redundant" => Ok(Policy::Redundant),
            "non_redundant" | "non-redundant" => Ok(Policy::NonRedundant),
            other => Err(DispatchError::InvalidConfig(format!("unknown policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Fleet {
    /// Keep `ceil(factor * occupied)` vehicles. `occupied` is the number of
    /// non-idle vehicles (on a trip or sent to a pickup), floored at the trace
    /// requests whose trip would be in progress with immediate pickup (this
    /// floor also starts the fleet from zero).
    Scaled { factor: f64 },
    /// Fixed vehicles starting at the given nodes.
    Fixed { initial: Vec<NodeId> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispatchConfig {
    pub policy: Policy,
    pub noise: NoiseSpec,
    pub fleet: Fleet,
    pub batch_s: f64,
    pub max_wait_s: f64,
    /// Idle vehicles kept unassigned, as a fraction of pending requests.
    pub reserve_fraction: f64,
    pub p_min: f64,
    pub seed: u64,
}

impl DispatchConfig {
    pub fn new(policy: Policy, noise: NoiseSpec, fleet_factor: f64, seed: u64) -> Self {
        Self {
            policy,
            noise,
            fleet: Fleet::Scaled { factor: fleet_factor },
            batch_s: 20.0,
            max_wait_s: 600.0,
            reserve_fraction: 0.5,
            p_min: DEFAULT_P_MIN,
            seed,
        }
    }

    fn validate(&self) -> Result<(), DispatchError> {
        let bad = |m: String| Err(DispatchError::InvalidConfig(m));
        if let Fleet::Scaled { factor } = self.fleet {
            if !(factor >= 1.0 && factor.is_finite()) {
                return bad(format!("fleet factor must be >= 1, got {factor}"));
            }
        }
        if !(self.batch_s > 0.0 && self.batch_s.is_finite()) {
            return bad(format!("batch interval must be > 0, got {}", self.batch_s));
        }
        if !(self.max_wait_s >= 0.0) {
            return bad(format!("max wait must be >= 0, got {}", self.max_wait_s));
        }
        if !(0.0..=1.0).contains(&self.reserve_fraction) {
            return bad(format!("reserve fraction must lie in [0, 1], got {}", self.reserve_fraction));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum VehicleStatus {
    Idle,
    /// Sent to a pickup it did not win; free again at `then` after `until`.
    Assigned { request: usize, until: f64, then: NodeId },
    /// Carrying a passenger; idle at `dropoff` after `until`.
    Occupied { until: f64, dropoff: NodeId },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Vehicle {
    pub id: usize,
    pub node: NodeId,
    pub status: VehicleStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RequestOutcome {
    pub request: usize,
    pub request_time: f64,
    pub wait: f64,
    pub batch_index: usize,
    pub vehicles_assigned: usize,
}

/// State after one batch. Counts other than `*_this_batch` are cumulative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchRecord {
    pub index: usize,
    pub time: f64,
    pub arrived: usize,
    pub serviced: usize,
    pub dropped: usize,
    pub pending: usize,
    pub fleet_size: usize,
    pub idle_before: usize,
    pub occupied: usize,
    pub occupation_ratio: f64,
    pub deployed_this_batch: usize,
    /// Deployed vehicles counted once each; equals `deployed_this_batch`
    /// unless a vehicle was booked twice.
    pub distinct_deployed: usize,
    /// Deployed vehicles that were not idle at the start of the batch.
    pub deployed_not_idle: usize,
    pub serviced_this_batch: usize,
    pub mean_wait_this_batch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispatchStats {
    pub policy: Policy,
    pub total_requests: usize,
    pub outcomes: Vec<RequestOutcome>,
    pub dropped: usize,
    pub batches: Vec<BatchRecord>,
}

impl DispatchStats {
    pub const CSV_HEADER: &'static str = "request_time_s,wait_s,policy,batch_index";

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        for o in &self.outcomes {
            writeln!(s, "{},{},{},{}", o.request_time, o.wait, self.policy, o.batch_index).expect("writing to a String");
        }
        s
    }

    /// Per-batch occupation ratio and mean wait, for density plots.
    pub fn batches_csv(&self) -> String {
        let mut s = String::from("batch_index,time_s,occupation_ratio,mean_wait_s,pending,fleet_size\n");
        for b in &self.batches {
            writeln!(
                s,
                "{},{},{},{},{},{}",
                b.index, b.time, b.occupation_ratio, b.mean_wait_this_batch, b.pending, b.fleet_size
            )
            .expect("writing to a String");
        }
        s
    }
}

struct Sim<'g> {
    graph: &'g TransportGraph,
    trace: &'g [Request],
    trip: Vec<f64>,
    vehicles: Vec<Vehicle>,
    next_id: usize,
}

impl Sim<'_> {
    /// Trace requests whose pickup-to-dropoff trip covers `t`.
    fn trace_occupied(&self, t: f64) -> usize {
        let end = self.trace.partition_point(|r| r.time <= t);
        self.trace[..end].iter().zip(&self.trip).filter(|(r, &d)| t < r.time + d).count()
    }

    fn release(&mut self, t: f64) {
        for v in &mut self.vehicles {
            match v.status {
                VehicleStatus::Occupied { until, dropoff } if until <= t => {
                    v.node = dropoff;
                    v.status = VehicleStatus::Idle;
                }
                VehicleStatus::Assigned { until, then, .. } if until <= t => {
                    v.node = then;
                    v.status = VehicleStatus::Idle;
                }
                _ => {}
            }
        }
    }

    fn resize<R: Rng>(&mut self, target: usize, rng: &mut R) {
        let n = self.graph.node_count();
        while self.vehicles.len() < target {
            let node = NodeId::from(rng.random_range(0..n));
            self.vehicles.push(Vehicle { id: self.next_id, node, status: VehicleStatus::Idle });
            self.next_id += 1;
        }
        let mut surplus = self.vehicles.len().saturating_sub(target);
        // newest idle vehicles leave first
        let mut i = self.vehicles.len();
        while surplus > 0 && i > 0 {
            i -= 1;
            if self.vehicles[i].status == VehicleStatus::Idle {
                self.vehicles.remove(i);
                surplus -= 1;
            }
        }
    }
}

/// Replays `trace` in batches and returns per-request waits and per-batch
/// records.
pub fn replay(graph: &TransportGraph, trace: &RequestTrace, config: &DispatchConfig) -> Result<DispatchStats, DispatchError> {
    config.validate()?;
    let events = trace.events();
    let mut stats = DispatchStats {
        policy: config.policy,
        total_requests: events.len(),
        outcomes: Vec::new(),
        dropped: 0,
        batches: Vec::new(),
    };
    if events.is_empty() {
        return Ok(stats);
    }

    let mut to_dropoff: HashMap<NodeId, Vec<f64>> = HashMap::new();
    let mut trip = Vec::with_capacity(events.len());
    for r in events {
        let row = to_dropoff.entry(r.dropoff).or_insert_with(|| distances_to(graph, r.dropoff, |a| a.travel_time));
        trip.push(row[r.pickup.index()]);
    }
    let mut sim = Sim { graph, trace: events, trip, vehicles: Vec::new(), next_id: 0 };
    if let Fleet::Fixed { initial } = &config.fleet {
        for &node in initial {
            if !graph.contains(node) {
                return Err(DispatchError::InvalidConfig(format!("vehicle start node {node} is not in the graph")));
            }
            sim.vehicles.push(Vehicle { id: sim.next_id, node, status: VehicleStatus::Idle });
            sim.next_id += 1;
        }
    }
    let mut spawn_rng = rng_for(config.seed, u64::MAX);

    let t0 = events[0].time;
    let mut arrived = 0usize;
    let mut pending: Vec<usize> = Vec::new();
    for k in 0usize.. {
        let t = t0 + k as f64 * config.batch_s;
        sim.release(t);
        while arrived < events.len() && events[arrived].time <= t {
            pending.push(arrived);
            arrived += 1;
        }
        let before = pending.len();
        pending.retain(|&r| t - events[r].time <= config.max_wait_s);
        stats.dropped += before - pending.len();

        if let Fleet::Scaled { factor } = config.fleet {
            let occupied = sim.vehicles.iter().filter(|v| v.status != VehicleStatus::Idle).count();
            let target = (factor * occupied.max(sim.trace_occupied(t)) as f64).ceil() as usize;
            sim.resize(target, &mut spawn_rng);
        }

        let idle: Vec<usize> =
            (0..sim.vehicles.len()).filter(|&i| sim.vehicles[i].status == VehicleStatus::Idle).collect();
        let idle_before = idle.len();
        let m = pending.len().min(idle.len());
        let mut deployed: Vec<usize> = Vec::new();
        let mut served_now: Vec<RequestOutcome> = Vec::new();
        if m > 0 {
            let reserve = (config.reserve_fraction * pending.len() as f64).ceil() as usize;
            let cap = match config.policy {
                Policy::NonRedundant => m,
                Policy::Redundant => idle.len().saturating_sub(reserve).clamp(m, idle.len()),
            };
            // pending is kept in arrival order, so these are the oldest
            let goals: Vec<usize> = pending[..m].to_vec();
            let goal_nodes: Vec<NodeId> = goals.iter().map(|&r| events[r].pickup).collect();
            let robot_nodes: Vec<NodeId> = idle.iter().map(|&i| sim.vehicles[i].node).collect();
            let instance =
                build_instance(graph, &goal_nodes, &robot_nodes, &config.noise, cap, config.p_min, derive_seed(config.seed, k as u64))?;
            let o = initial_assignment(&instance);
            let deployment: Assignment = if cap > m {
                let report = greedy(&instance, &o)?;
                report.deployment()
            } else {
                o
            };
            let table = instance.table();
            for (j, &req) in goals.iter().enumerate() {
                let group: Vec<usize> = deployment.robots_of(j).collect();
                let (winner, time) = group
                    .iter()
                    .map(|&r| (r, table.time(j, robot_nodes[r])))
                    .min_by(|a, b| a.1.total_cmp(&b.1).then(sim.vehicles[idle[a.0]].id.cmp(&sim.vehicles[idle[b.0]].id)))
                    .expect("every goal is covered");
                let pickup_at = t + time;
                for &r in &group {
                    let v = idle[r];
                    deployed.push(v);
                    if r == winner {
                        sim.vehicles[v].status = VehicleStatus::Occupied {
                            until: pickup_at + sim.trip[req],
                            dropoff: events[req].dropoff,
                        };
                    } else {
                        let path = canonical_path(graph, table.row(j), robot_nodes[r]);
                        let then = node_reached_after(graph, &path, time);
                        sim.vehicles[v].status = VehicleStatus::Assigned { request: req, until: pickup_at, then };
                    }
                }
                served_now.push(RequestOutcome {
                    request: req,
                    request_time: events[req].time,
                    wait: pickup_at - events[req].time,
                    batch_index: k,
                    vehicles_assigned: group.len(),
                });
            }
            pending.drain(..m);
        }

        let occupied = sim.vehicles.iter().filter(|v| v.status != VehicleStatus::Idle).count();
        let mut distinct = deployed.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let mean_wait = if served_now.is_empty() {
            f64::NAN
        } else {
            served_now.iter().map(|o| o.wait).sum::<f64>() / served_now.len() as f64
        };
        let serviced_this_batch = served_now.len();
        stats.outcomes.extend(served_now);
        stats.batches.push(BatchRecord {
            index: k,
            time: t,
            arrived,
            serviced: stats.outcomes.len(),
            dropped: stats.dropped,
            pending: pending.len(),
            fleet_size: sim.vehicles.len(),
            idle_before,
            occupied,
            occupation_ratio: if sim.vehicles.is_empty() { 0.0 } else { occupied as f64 / sim.vehicles.len() as f64 },
            deployed_this_batch: deployed.len(),
            distinct_deployed: distinct.len(),
            deployed_not_idle: deployed.iter().filter(|v| !idle.contains(v)).count(),
            serviced_this_batch,
            mean_wait_this_batch: mean_wait,
        });
        if arrived == events.len() && pending.is_empty() {
            break;
        }
    }
    Ok(stats)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaitSummary {
    pub policy: Policy,
    pub total_requests: usize,
    pub serviced: usize,
    pub dropped: usize,
    pub drop_rate: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub median: f64,
    pub p95: f64,
    /// Mean number of vehicles sent per served request.
    pub redundancy: f64,
    /// `(occupation ratio, mean wait)` of every batch that served requests.
    pub batch_pairs: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Summary {
    /// No request was served.
    Empty { policy: Policy, total_requests: usize, dropped: usize },
    Stats(WaitSummary),
}

impl Summary {
    /// Flat `key=value` lines.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        match self {
            Summary::Empty { policy, total_requests, dropped } => {
                writeln!(s, "policy={policy}\nempty=true\ntotal_requests={total_requests}\ndropped={dropped}")
            }
            Summary::Stats(w) => writeln!(
                s,
                "policy={}\nempty=false\ntotal_requests={}\nserviced={}\ndropped={}\ndrop_rate={}\nmean_wait_s={}\nstd_wait_s={}\nmedian_wait_s={}\np95_wait_s={}\nredundancy={}\nbatches_with_service={}",
                w.policy, w.total_requests, w.serviced, w.dropped, w.drop_rate, w.mean, w.std, w.median, w.p95, w.redundancy, w.batch_pairs.len()
            ),
        }
        .expect("writing to a String");
        s
    }
}

/// Value at 0-based index `floor(p * n)` of the sorted data, clamped to the
/// last element; `{0, ..., 99}` gives 95 for `p = 0.95`.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    let i = ((p * sorted.len() as f64).floor() as usize).min(sorted.len() - 1);
    sorted[i]
}

pub fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub fn summarize(stats: &DispatchStats) -> Summary {
    if stats.outcomes.is_empty() {
        return Summary::Empty { policy: stats.policy, total_requests: stats.total_requests, dropped: stats.dropped };
    }
    let mut waits: Vec<f64> = stats.outcomes.iter().map(|o| o.wait).collect();
    waits.sort_by(f64::total_cmp);
    let n = waits.len() as f64;
    let mean = waits.iter().sum::<f64>() / n;
    let std = (waits.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>() / n).sqrt();
    Summary::Stats(WaitSummary {
        policy: stats.policy,
        total_requests: stats.total_requests,
        serviced: waits.len(),
        dropped: stats.dropped,
        drop_rate: stats.dropped as f64 / stats.total_requests as f64,
        mean,
        std,
        median: median(&waits),
        p95: percentile(&waits, 0.95),
        redundancy: stats.outcomes.iter().map(|o| o.vehicles_assigned as f64).sum::<f64>() / n,
        batch_pairs: stats
            .batches
            .iter()
            .filter(|b| b.serviced_this_batch > 0)
            .map(|b| (b.occupation_ratio, b.mean_wait_this_batch))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TransportGraph {
        TransportGraph::grid(16, 16, 50.0, 10.0).unwrap()
    }

    #[test]
    fn empty_trace() {
        let g = grid();
        let stats = replay(&g, &RequestTrace::default(), &DispatchConfig::new(Policy::NonRedundant, NoiseSpec::NONE, 1.56, 1)).unwrap();
        assert!(stats.outcomes.is_empty() && stats.batches.is_empty());
        let s = summarize(&stats);
        assert!(matches!(s, Summary::Empty { total_requests: 0, .. }));
        assert!(s.to_key_values().contains("empty=true"));
    }

    #[test]
    fn single_vehicle_at_pickup() {
        let g = grid();
        let trace = RequestTrace::new(vec![Request { time: 100.0, pickup: NodeId(17), dropoff: NodeId(200) }], &g).unwrap();
        let mut waits = Vec::new();
        for policy in [Policy::Redundant, Policy::NonRedundant] {
            let mut cfg = DispatchConfig::new(policy, NoiseSpec::NONE, 1.0, 4);
            cfg.fleet = Fleet::Fixed { initial: vec![NodeId(17)] };
            let stats = replay(&g, &trace, &cfg).unwrap();
            assert_eq!(stats.outcomes.len(), 1);
            waits.push(stats.outcomes[0].wait);
        }
        assert_eq!(waits, vec![0.0, 0.0]);
    }

    #[test]
    fn nearest_vehicle_wins_and_losers_are_released() {
        let g = TransportGraph::grid(2, 10, 50.0, 10.0).unwrap();
        let trace = RequestTrace::new(vec![Request { time: 0.0, pickup: NodeId(0), dropoff: NodeId(9) }], &g).unwrap();
        let mut cfg = DispatchConfig::new(Policy::Redundant, NoiseSpec::NONE, 1.0, 4);
        cfg.fleet = Fleet::Fixed { initial: vec![NodeId(2), NodeId(6)] };
        cfg.reserve_fraction = 0.0;
        let stats = replay(&g, &trace, &cfg).unwrap();
        assert_eq!(stats.outcomes[0].vehicles_assigned, 2);
        assert_eq!(stats.outcomes[0].wait, 10.0);
        assert_eq!(stats.batches[0].distinct_deployed, 2);
    }

    #[test]
    fn synthetic_trace_counts() {
        let g = grid();
        let t = generate_synthetic_trace(&g, 0.5, 7200.0, 3).unwrap();
        assert!((3300..=3900).contains(&t.len()), "{}", t.len());
        assert!(t.events().iter().all(|r| r.pickup != r.dropoff && r.time < 7200.0));
        assert!(t.events().windows(2).all(|w| w[0].time <= w[1].time));
        assert_eq!(t, generate_synthetic_trace(&g, 0.5, 7200.0, 3).unwrap());
        assert!(generate_synthetic_trace(&g, 1e-6, 10.0, 3).unwrap().is_empty());
        assert!(generate_synthetic_trace(&g, 0.0, 10.0, 3).is_err());
    }

    #[test]
    fn trace_csv_round_trip_and_errors() {
        let g = grid();
        let t = generate_synthetic_trace(&g, 0.05, 600.0, 1).unwrap();
        assert_eq!(RequestTrace::parse(&t.to_csv(), &g).unwrap(), t);
        let unsorted = format!("{TRACE_HEADER}\n30,1,2\n10,3,4\n");
        let parsed = RequestTrace::parse(&unsorted, &g).unwrap();
        assert_eq!(parsed.events()[0].time, 10.0);
        let bad = format!("{TRACE_HEADER}\n30,1,999\n");
        assert!(matches!(RequestTrace::parse(&bad, &g), Err(DispatchError::Trace { line: 2, .. })));
        assert!(RequestTrace::parse("time,a,b\n1,2,3\n", &g).is_err());
        assert!(RequestTrace::parse(&format!("{TRACE_HEADER}\nx,1,2\n"), &g).is_err());
    }

    #[test]
    fn percentiles() {
        let v: Vec<f64> = (0..100).map(f64::from).collect();
        assert_eq!(percentile(&v, 0.95), 95.0);
        assert_eq!(median(&v), 49.5);
        assert_eq!(percentile(&[120.0], 0.95), 120.0);
        assert_eq!(median(&[120.0]), 120.0);
    }

    #[test]
    fn single_wait_summary() {
        let stats = DispatchStats {
            policy: Policy::Redundant,
            total_requests: 1,
            outcomes: vec![RequestOutcome { request: 0, request_time: 0.0, wait: 120.0, batch_index: 0, vehicles_assigned: 1 }],
            dropped: 0,
            batches: Vec::new(),
        };
        let Summary::Stats(s) = summarize(&stats) else { panic!() };
        assert_eq!((s.mean, s.median, s.p95, s.std), (120.0, 120.0, 120.0, 0.0));
    }

    #[test]
    fn conservation_on_short_replay() {
        let g = grid();
        let trace = generate_synthetic_trace(&g, 0.5, 900.0, 8).unwrap();
        for policy in [Policy::Redundant, Policy::NonRedundant] {
            let stats = replay(&g, &trace, &DispatchConfig::new(policy, NoiseSpec::gaussian(100.0), 1.56, 8)).unwrap();
            for b in &stats.batches {
                assert_eq!(b.serviced + b.dropped + b.pending, b.arrived);
                assert_eq!(b.distinct_deployed, b.deployed_this_batch);
                assert_eq!(b.deployed_not_idle, 0);
                assert!((0.0..=1.0).contains(&b.occupation_ratio));
            }
            let last = stats.batches.last().unwrap();
            assert_eq!(last.arrived, trace.len());
            assert_eq!(last.serviced + last.dropped, trace.len());
            assert!(stats.outcomes.iter().all(|o| o.wait >= 0.0));
            let Summary::Stats(s) = summarize(&stats) else { panic!() };
            match policy {
                Policy::NonRedundant => assert_eq!(s.redundancy, 1.0),
                Policy::Redundant => assert!(s.redundancy >= 1.0),
            }
        }
    }

    #[test]
    fn replay_is_deterministic() {
        let g = grid();
        let trace = generate_synthetic_trace(&g, 0.3, 600.0, 2).unwrap();
        let cfg = DispatchConfig::new(Policy::Redundant, NoiseSpec::gaussian(100.0), 1.56, 5);
        let (a, b) = (replay(&g, &trace, &cfg).unwrap(), replay(&g, &trace, &cfg).unwrap());
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.batches_csv(), b.batches_csv());
    }

    #[test]
    fn bad_config() {
        let g = grid();
        let trace = generate_synthetic_trace(&g, 0.3, 60.0, 2).unwrap();
        let cfg = DispatchConfig::new(Policy::Redundant, NoiseSpec::NONE, 0.5, 5);
        assert!(matches!(replay(&g, &trace, &cfg), Err(DispatchError::InvalidConfig(_))));
        assert_eq!("non_redundant".parse::<Policy>().unwrap(), Policy::NonRedundant);
        assert!("both".parse::<Policy>().is_err());
    }
}
