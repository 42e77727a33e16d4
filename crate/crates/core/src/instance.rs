//! Bipartite robot/goal problem: beliefs, travel-time table, deployment
//! cap and the non-redundant initial assignment.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{shortest_travel_times, GraphError, NodeId, Point, TransportGraph, TravelTimeTable};
use crate::hungarian::{solve_rectangular, AssignmentError};
use crate::seed::rng_for;
use crate::uncertainty::{expected_cost, node_belief, sample_reported_position, BeliefError, NoiseSpec, PositionBelief};

pub const INSTANCE_HEADER: &str = "rvrp-instance v1";

/// One robot-to-goal edge of the bipartite graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub robot: usize,
    pub goal: usize,
}

impl Edge {
    pub fn new(robot: usize, goal: usize) -> Self {
        Self { robot, goal }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.robot, self.goal)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum InstanceError {
    #[error("robot {robot} is already assigned to goal {goal}")]
    RobotAlreadyAssigned { robot: usize, goal: usize },
    #[error("deployment cap must satisfy M <= N_d <= N, got M={goals}, N_d={cap}, N={robots}")]
    InvalidCap { goals: usize, cap: usize, robots: usize },
    #[error("instance has no goals")]
    NoGoals,
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Graph(#[from] GraphErrorMessage),
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// [`GraphError`] flattened to its message so instance errors stay
/// comparable.
#[derive(Debug, Error, PartialEq)]
#[error("{0}")]
pub struct GraphErrorMessage(pub String);

impl From<GraphError> for InstanceError {
    fn from(e: GraphError) -> Self {
        InstanceError::Graph(GraphErrorMessage(e.to_string()))
    }
}

/// A set of edges in which every robot appears at most once.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    by_robot: BTreeMap<usize, usize>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edges(edges: impl IntoIterator<Item = Edge>) -> Result<Self, InstanceError> {
        let mut a = Self::new();
        for e in edges {
            a.insert(e)?;
        }
        Ok(a)
    }

    pub fn insert(&mut self, edge: Edge) -> Result<(), InstanceError> {
        if let Some(&goal) = self.by_robot.get(&edge.robot) {
            return Err(InstanceError::RobotAlreadyAssigned { robot: edge.robot, goal });
        }
        self.by_robot.insert(edge.robot, edge.goal);
        Ok(())
    }

    pub fn contains(&self, edge: &Edge) -> bool {
        self.by_robot.get(&edge.robot) == Some(&edge.goal)
    }

    pub fn goal_of(&self, robot: usize) -> Option<usize> {
        self.by_robot.get(&robot).copied()
    }

    pub fn len(&self) -> usize {
        self.by_robot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_robot.is_empty()
    }

    /// Edges ordered by robot index.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.by_robot.iter().map(|(&robot, &goal)| Edge { robot, goal })
    }

    pub fn robots_of(&self, goal: usize) -> impl Iterator<Item = usize> + '_ {
        self.by_robot.iter().filter(move |(_, &g)| g == goal).map(|(&r, _)| r)
    }

    /// Union with `other`; fails if the two share a robot.
    pub fn union(&self, other: &Assignment) -> Result<Assignment, InstanceError> {
        let mut out = self.clone();
        for e in other.edges() {
            out.insert(e)?;
        }
        Ok(out)
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.edges().map(|e| e.to_string()).collect();
        write!(f, "{{{}}}", parts.join(" "))
    }
}

/// Evaluation-only information, never read by the planning solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub robot_nodes: Vec<NodeId>,
    pub reported: Vec<Point>,
}

#[derive(Debug, Clone)]
pub struct AssignmentInstance {
    beliefs: Vec<PositionBelief>,
    table: TravelTimeTable,
    cap: usize,
    truth: Option<GroundTruth>,
    fingerprint: u64,
}

impl AssignmentInstance {
    /// Assembles an instance from precomputed beliefs and travel times.
    pub fn from_parts(
        beliefs: Vec<PositionBelief>,
        table: TravelTimeTable,
        cap: usize,
        truth: Option<GroundTruth>,
    ) -> Result<Self, InstanceError> {
        let n = beliefs.len();
        let m = table.goal_count();
        if m == 0 {
            return Err(InstanceError::NoGoals);
        }
        if !(m <= cap && cap <= n) {
            return Err(InstanceError::InvalidCap { goals: m, cap, robots: n });
        }
        for (i, b) in beliefs.iter().enumerate() {
            if let Some(&(v, _)) = b.support().iter().find(|(v, _)| v.index() >= table.node_count()) {
                return Err(InstanceError::Invalid(format!("belief of robot {i} references unknown node {v}")));
            }
        }
        if let Some(t) = &truth {
            if t.robot_nodes.len() != n || t.robot_nodes.iter().any(|v| v.index() >= table.node_count()) {
                return Err(InstanceError::Invalid("ground truth does not match robots".into()));
            }
        }
        let fingerprint = fingerprint(&beliefs, &table, cap);
        Ok(Self { beliefs, table, cap, truth, fingerprint })
    }

    pub fn n_robots(&self) -> usize {
        self.beliefs.len()
    }

    pub fn n_goals(&self) -> usize {
        self.table.goal_count()
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Matroid rank `N_d - M`: number of redundant edges to place.
    pub fn rank(&self) -> usize {
        self.cap - self.n_goals()
    }

    pub fn belief(&self, robot: usize) -> &PositionBelief {
        &self.beliefs[robot]
    }

    pub fn beliefs(&self) -> &[PositionBelief] {
        &self.beliefs
    }

    pub fn table(&self) -> &TravelTimeTable {
        &self.table
    }

    pub fn goal_nodes(&self) -> &[NodeId] {
        self.table.goal_nodes()
    }

    pub fn ground_truth(&self) -> Option<&GroundTruth> {
        self.truth.as_ref()
    }

    /// Hash of beliefs, travel times and cap; identifies the instance.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Copy of the instance with a different deployment cap.
    pub fn with_cap(&self, cap: usize) -> Result<Self, InstanceError> {
        Self::from_parts(self.beliefs.clone(), self.table.clone(), cap, self.truth.clone())
    }

    /// `M x N` matrix of expected robot-to-goal travel times.
    pub fn expected_cost_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.n_goals())
            .map(|j| self.beliefs.iter().map(|b| expected_cost(b, &self.table, j)).collect())
            .collect()
    }
}

fn fingerprint(beliefs: &[PositionBelief], table: &TravelTimeTable, cap: usize) -> u64 {
    let mut h = DefaultHasher::new();
    cap.hash(&mut h);
    table.goal_nodes().hash(&mut h);
    for j in 0..table.goal_count() {
        for t in table.row(j) {
            t.to_bits().hash(&mut h);
        }
    }
    for b in beliefs {
        for &(v, p) in b.support() {
            v.hash(&mut h);
            p.to_bits().hash(&mut h);
        }
    }
    h.finish()
}

/// Samples reported positions around the true robot nodes, discretizes
/// them into beliefs and computes travel times to `goal_nodes`.
///
/// Robot `i`'s report is drawn from stream `i` of `seed`.
pub fn build_instance(
    graph: &TransportGraph,
    goal_nodes: &[NodeId],
    true_robot_nodes: &[NodeId],
    noise: &NoiseSpec,
    cap: usize,
    p_min: f64,
    seed: u64,
) -> Result<AssignmentInstance, InstanceError> {
    let (n, m) = (true_robot_nodes.len(), goal_nodes.len());
    if m == 0 {
        return Err(InstanceError::NoGoals);
    }
    if !(m <= cap && cap <= n) {
        return Err(InstanceError::InvalidCap { goals: m, cap, robots: n });
    }
    if let Some(v) = true_robot_nodes.iter().chain(goal_nodes).find(|v| !graph.contains(**v)) {
        return Err(GraphError::UnknownNode(*v).into());
    }
    let mut reported = Vec::with_capacity(n);
    let mut beliefs = Vec::with_capacity(n);
    for (i, &node) in true_robot_nodes.iter().enumerate() {
        let mut rng = rng_for(seed, i as u64);
        let report = sample_reported_position(graph.position(node), noise, &mut rng);
        beliefs.push(node_belief(graph, report, noise, p_min)?);
        reported.push(report);
    }
    let table = shortest_travel_times(graph, goal_nodes)?;
    let truth = GroundTruth { robot_nodes: true_robot_nodes.to_vec(), reported };
    AssignmentInstance::from_parts(beliefs, table, cap, Some(truth))
}

/// Hungarian assignment `O`: one distinct robot per goal minimizing the
/// summed expected travel time.
pub fn initial_assignment(instance: &AssignmentInstance) -> Assignment {
    hungarian_assignment(&instance.expected_cost_matrix())
        .expect("expected costs are finite and N >= M by construction")
}

/// Hungarian assignment on an arbitrary `M x N` goal-by-robot matrix.
pub fn hungarian_assignment(goal_by_robot: &[Vec<f64>]) -> Result<Assignment, InstanceError> {
    let (robot_of_goal, _) = solve_rectangular(goal_by_robot)?;
    Assignment::from_edges(robot_of_goal.into_iter().enumerate().map(|(goal, robot)| Edge { robot, goal }))
}

/// Where an instance's graph comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Grid { rows: usize, cols: usize, spacing: f64, speed: f64 },
    File(PathBuf),
}

impl GraphSource {
    pub fn load(&self, base_dir: &Path) -> Result<TransportGraph, GraphError> {
        match self {
            GraphSource::Grid { rows, cols, spacing, speed } => TransportGraph::grid(*rows, *cols, *spacing, *speed),
            GraphSource::File(p) if p.is_absolute() => TransportGraph::load(p),
            GraphSource::File(p) => TransportGraph::load(base_dir.join(p)),
        }
    }
}

impl fmt::Display for GraphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSource::Grid { rows, cols, spacing, speed } => write!(f, "grid {rows} {cols} {spacing} {speed}"),
            GraphSource::File(p) => write!(f, "file {}", p.display()),
        }
    }
}

/// Self-contained, replayable description of one instance.
///
/// ```text
/// rvrp-instance v1
/// graph grid 16 16 50 10
/// goals 3 17 200
/// robots 5 9 12 40 41
/// noise gaussian:100
/// cap 4
/// p_min 1e-6
/// seed 42
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub graph: GraphSource,
    pub goals: Vec<NodeId>,
    pub robots: Vec<NodeId>,
    pub noise: NoiseSpec,
    pub cap: usize,
    pub p_min: f64,
    pub seed: u64,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, l)) if l == INSTANCE_HEADER => {}
            Some((line, l)) => {
                return Err(InstanceError::Parse { line, message: format!("expected `{INSTANCE_HEADER}`, got `{l}`") })
            }
            None => return Err(InstanceError::Parse { line: 1, message: "empty instance file".into() }),
        }

        let (mut graph, mut goals, mut robots, mut noise, mut cap, mut p_min, mut seed) =
            (None, None, None, None, None, None, None);
        for (line, l) in lines {
            let err = |message: String| InstanceError::Parse { line, message };
            let (key, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
            let rest = rest.trim();
            let nodes = |s: &str| -> Result<Vec<NodeId>, InstanceError> {
                s.split_whitespace()
                    .map(|t| t.parse::<u32>().map(NodeId).map_err(|_| err(format!("invalid node id `{t}`"))))
                    .collect()
            };
            match key {
                "graph" => {
                    let f: Vec<&str> = rest.split_whitespace().collect();
                    graph = Some(match f.as_slice() {
                        ["grid", r, c, s, v] => GraphSource::Grid {
                            rows: r.parse().map_err(|_| err(format!("invalid rows `{r}`")))?,
                            cols: c.parse().map_err(|_| err(format!("invalid cols `{c}`")))?,
                            spacing: s.parse().map_err(|_| err(format!("invalid spacing `{s}`")))?,
                            speed: v.parse().map_err(|_| err(format!("invalid speed `{v}`")))?,
                        },
                        ["file", _, ..] => GraphSource::File(PathBuf::from(rest["file".len()..].trim())),
                        _ => return Err(err(format!("expected `graph grid <rows> <cols> <spacing> <speed>` or `graph file <path>`, got `{rest}`"))),
                    });
                }
                "goals" => goals = Some(nodes(rest)?),
                "robots" => robots = Some(nodes(rest)?),
                "noise" => noise = Some(rest.parse::<NoiseSpec>().map_err(|e| err(e.to_string()))?),
                "cap" => cap = Some(rest.parse::<usize>().map_err(|_| err(format!("invalid cap `{rest}`")))?),
                "p_min" => p_min = Some(rest.parse::<f64>().map_err(|_| err(format!("invalid p_min `{rest}`")))?),
                "seed" => seed = Some(rest.parse::<u64>().map_err(|_| err(format!("invalid seed `{rest}`")))?),
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        let missing = |k: &str| InstanceError::Parse { line: 0, message: format!("missing `{k}` record") };
        let goals: Vec<NodeId> = goals.ok_or_else(|| missing("goals"))?;
        Ok(Self {
            graph: graph.ok_or_else(|| missing("graph"))?,
            cap: cap.unwrap_or(goals.len()),
            goals,
            robots: robots.ok_or_else(|| missing("robots"))?,
            noise: noise.unwrap_or_default(),
            p_min: p_min.unwrap_or(crate::uncertainty::DEFAULT_P_MIN),
            seed: seed.unwrap_or(0),
        })
    }

    pub fn to_text(&self) -> String {
        let ids = |v: &[NodeId]| v.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" ");
        format!(
            "{INSTANCE_HEADER}\ngraph {}\ngoals {}\nrobots {}\nnoise {}\ncap {}\np_min {:e}\nseed {}\n",
            self.graph,
            ids(&self.goals),
            ids(&self.robots),
            self.noise,
            self.cap,
            self.p_min,
            self.seed
        )
    }

    pub fn build(&self, graph: &TransportGraph) -> Result<AssignmentInstance, InstanceError> {
        build_instance(graph, &self.goals, &self.robots, &self.noise, self.cap, self.p_min, self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uncertainty::DEFAULT_P_MIN;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn instance_from_matrix(goal_by_robot: Vec<Vec<f64>>) -> AssignmentInstance {
        // each robot is a point mass at its own node; goal j's row holds the costs
        let n = goal_by_robot[0].len();
        let m = goal_by_robot.len();
        let beliefs = (0..n).map(|i| PositionBelief::point_mass(NodeId::from(i))).collect();
        let mut rows = goal_by_robot;
        for row in &mut rows {
            row.extend(std::iter::repeat(0.0).take(m));
        }
        let goals = (0..m).map(|j| NodeId::from(n + j)).collect();
        let table = TravelTimeTable::from_rows(goals, rows).unwrap();
        AssignmentInstance::from_parts(beliefs, table, m, None).unwrap()
    }

    #[test]
    fn assignment_rejects_shared_robot() {
        let mut a = Assignment::new();
        a.insert(Edge::new(1, 0)).unwrap();
        assert_eq!(
            a.insert(Edge::new(1, 2)),
            Err(InstanceError::RobotAlreadyAssigned { robot: 1, goal: 0 })
        );
        assert!(a.contains(&Edge::new(1, 0)));
        assert_eq!(a.goal_of(1), Some(0));
    }

    #[test]
    fn single_robot_instance() {
        let g = TransportGraph::grid(4, 4, 50.0, 10.0).unwrap();
        let inst = build_instance(&g, &[NodeId(15)], &[NodeId(0)], &NoiseSpec::NONE, 1, DEFAULT_P_MIN, 1).unwrap();
        assert_eq!(inst.belief(0).support(), &[(NodeId(0), 1.0)]);
        assert_eq!(inst.expected_cost_matrix(), vec![vec![30.0]]);
    }

    #[test]
    fn cap_bounds_are_enforced() {
        let g = TransportGraph::grid(4, 4, 50.0, 10.0).unwrap();
        let robots = [NodeId(0), NodeId(1), NodeId(2)];
        let goals = [NodeId(10), NodeId(11)];
        for cap in [1, 4] {
            let err = build_instance(&g, &goals, &robots, &NoiseSpec::NONE, cap, DEFAULT_P_MIN, 1).unwrap_err();
            assert!(matches!(err, InstanceError::InvalidCap { .. }));
        }
        assert!(build_instance(&g, &goals, &robots, &NoiseSpec::NONE, 3, DEFAULT_P_MIN, 1).is_ok());
        assert!(build_instance(&g, &goals, &[NodeId(99)], &NoiseSpec::NONE, 2, DEFAULT_P_MIN, 1).is_err());
    }

    #[test]
    fn series_shapes_build() {
        let g = TransportGraph::grid(16, 16, 50.0, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (n, m, caps) in [(16usize, 4usize, (4..=16).step_by(2).collect::<Vec<_>>()), (100, 10, (10..=100).step_by(10).collect())] {
            let nodes: Vec<NodeId> = rand::seq::index::sample(&mut rng, 256, n + m).into_iter().map(NodeId::from).collect();
            for &cap in &caps {
                let inst = build_instance(&g, &nodes[n..], &nodes[..n], &NoiseSpec::gaussian(100.0), cap, DEFAULT_P_MIN, 9).unwrap();
                assert_eq!((inst.n_robots(), inst.n_goals(), inst.rank()), (n, m, cap - m));
            }
        }
    }

    #[test]
    fn hungarian_examples() {
        let o = initial_assignment(&instance_from_matrix(vec![vec![1.0, 10.0], vec![10.0, 1.0]]));
        assert_eq!(o.edges().collect::<Vec<_>>(), vec![Edge::new(0, 0), Edge::new(1, 1)]);
        let o = initial_assignment(&instance_from_matrix(vec![vec![5.0, 5.0], vec![5.0, 5.0]]));
        assert_eq!(o.edges().collect::<Vec<_>>(), vec![Edge::new(0, 0), Edge::new(1, 1)]);
    }

    #[test]
    fn hungarian_beats_exhaustive_injections() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let costs: Vec<Vec<f64>> = (0..3).map(|_| (0..5).map(|_| rng.random_range(0..100) as f64).collect()).collect();
            let inst = instance_from_matrix(costs.clone());
            let o = initial_assignment(&inst);
            let total: f64 = o.edges().map(|e| costs[e.goal][e.robot]).sum();
            let mut best = f64::INFINITY;
            for a in 0..5 {
                for b in 0..5 {
                    for c in 0..5 {
                        if a != b && b != c && a != c {
                            best = best.min(costs[0][a] + costs[1][b] + costs[2][c]);
                        }
                    }
                }
            }
            assert_eq!(total, best);
        }
    }

    #[test]
    fn hungarian_beats_random_matchings() {
        let g = TransportGraph::grid(8, 8, 50.0, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let nodes: Vec<NodeId> = rand::seq::index::sample(&mut rng, 64, 14).into_iter().map(NodeId::from).collect();
        let inst = build_instance(&g, &nodes[10..], &nodes[..10], &NoiseSpec::gaussian(60.0), 4, DEFAULT_P_MIN, 3).unwrap();
        let costs = inst.expected_cost_matrix();
        let o = initial_assignment(&inst);
        assert_eq!(o.len(), 4);
        for j in 0..4 {
            assert_eq!(o.robots_of(j).count(), 1);
        }
        let best: f64 = o.edges().map(|e| costs[e.goal][e.robot]).sum();
        let mut robots: Vec<usize> = (0..10).collect();
        for _ in 0..1000 {
            robots.shuffle(&mut rng);
            let total: f64 = (0..4).map(|j| costs[j][robots[j]]).sum();
            assert!(best <= total + 1e-9);
        }
    }

    #[test]
    fn instance_file_round_trip() {
        let file = InstanceFile {
            graph: GraphSource::Grid { rows: 4, cols: 4, spacing: 50.0, speed: 10.0 },
            goals: vec![NodeId(3), NodeId(12)],
            robots: vec![NodeId(0), NodeId(5), NodeId(6)],
            noise: NoiseSpec::gaussian(40.0),
            cap: 3,
            p_min: 1e-6,
            seed: 77,
        };
        let text = file.to_text();
        assert!(text.starts_with(INSTANCE_HEADER));
        assert_eq!(InstanceFile::parse(&text).unwrap(), file);

        let g = file.graph.load(Path::new(".")).unwrap();
        let a = file.build(&g).unwrap();
        let b = InstanceFile::parse(&text).unwrap().build(&g).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn instance_file_errors() {
        assert!(matches!(InstanceFile::parse("rvrp-instance v2\n"), Err(InstanceError::Parse { line: 1, .. })));
        let e = InstanceFile::parse("rvrp-instance v1\ngraph grid 4 4 50 10\ngoals 1 x\n").unwrap_err();
        assert!(matches!(e, InstanceError::Parse { line: 3, .. }));
        assert!(InstanceFile::parse("rvrp-instance v1\ngoals 1\nrobots 2\n").is_err());
        let f = InstanceFile::parse("rvrp-instance v1\ngraph file maps/m.txt\ngoals 1\nrobots 2\n").unwrap();
        assert_eq!(f.graph, GraphSource::File(PathBuf::from("maps/m.txt")));
        assert_eq!(f.cap, 1);
    }

    proptest! {
        #[test]
        fn initial_assignment_covers_each_goal_once(seed in any::<u64>(), m in 1usize..5, extra in 0usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = m + extra;
            let costs: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.random_range(0.0..50.0)).collect()).collect();
            let o = initial_assignment(&instance_from_matrix(costs));
            prop_assert_eq!(o.len(), m);
            for j in 0..m {
                prop_assert_eq!(o.robots_of(j).count(), 1);
            }
        }
    }
}
