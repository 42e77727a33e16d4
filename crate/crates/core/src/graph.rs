//! Transport network: a strongly connected weighted digraph with planar
//! node coordinates, plus shortest-path travel-time tables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense node identifier in `0..node_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Directed edge with its expected traversal time in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub from: NodeId,
    pub to: NodeId,
    pub travel_time: f64,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("failed to read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("graph is not strongly connected: node {to} is unreachable from node {from}")]
    NotStronglyConnected { from: NodeId, to: NodeId },
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("edge {from}->{to} has invalid travel time {travel_time}")]
    InvalidWeight {
        from: NodeId,
        to: NodeId,
        travel_time: f64,
    },
}

/// Immutable after construction; every instance satisfies strong
/// connectivity and strictly positive finite edge weights.
#[derive(Debug, Clone)]
pub struct TransportGraph {
    positions: Vec<Point>,
    arcs: Vec<Arc>,
    // CSR adjacency, outgoing and incoming, each sorted by neighbour id.
    out_offsets: Vec<usize>,
    out_arcs: Vec<usize>,
    in_offsets: Vec<usize>,
    in_arcs: Vec<usize>,
}

impl TransportGraph {
    pub fn new(positions: Vec<Point>, arcs: Vec<Arc>) -> Result<Self, GraphError> {
        let n = positions.len();
        if n == 0 {
            return Err(GraphError::InvalidParameter("graph has no nodes".into()));
        }
        if n > u32::MAX as usize {
            return Err(GraphError::InvalidParameter("too many nodes".into()));
        }
        for p in &positions {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(GraphError::InvalidParameter(
                    "node coordinates must be finite".into(),
                ));
            }
        }
        for a in &arcs {
            for id in [a.from, a.to] {
                if id.index() >= n {
                    return Err(GraphError::UnknownNode(id));
                }
            }
            if !(a.travel_time > 0.0 && a.travel_time.is_finite()) {
                return Err(GraphError::InvalidWeight {
                    from: a.from,
                    to: a.to,
                    travel_time: a.travel_time,
                });
            }
        }

        let (out_offsets, out_arcs) = csr(n, &arcs, |a| (a.from, a.to));
        let (in_offsets, in_arcs) = csr(n, &arcs, |a| (a.to, a.from));
        let graph = Self {
            positions,
            arcs,
            out_offsets,
            out_arcs,
            in_offsets,
            in_arcs,
        };
        graph.check_strongly_connected()?;
        Ok(graph)
    }

    /// 4-connected bidirectional lattice; node `r * cols + c` sits at
    /// `(c * spacing, r * spacing)`.
    pub fn grid(rows: usize, cols: usize, spacing: f64, nominal_speed: f64) -> Result<Self, GraphError> {
        if rows < 2 || cols < 2 {
            return Err(GraphError::InvalidParameter(format!(
                "grid needs at least 2x2 nodes, got {rows}x{cols}"
            )));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(GraphError::InvalidParameter(format!(
                "grid spacing must be positive, got {spacing}"
            )));
        }
        if !(nominal_speed > 0.0 && nominal_speed.is_finite()) {
            return Err(GraphError::InvalidParameter(format!(
                "nominal speed must be positive, got {nominal_speed}"
            )));
        }
        let mut positions = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                positions.push(Point::new(c as f64 * spacing, r as f64 * spacing));
            }
        }
        let t = spacing / nominal_speed;
        let id = |r: usize, c: usize| NodeId::from(r * cols + c);
        let mut arcs = Vec::with_capacity(4 * rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    arcs.push(Arc { from: id(r, c), to: id(r, c + 1), travel_time: t });
                    arcs.push(Arc { from: id(r, c + 1), to: id(r, c), travel_time: t });
                }
                if r + 1 < rows {
                    arcs.push(Arc { from: id(r, c), to: id(r + 1, c), travel_time: t });
                    arcs.push(Arc { from: id(r + 1, c), to: id(r, c), travel_time: t });
                }
            }
        }
        Self::new(positions, arcs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| GraphError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Parses the line-oriented text format:
    ///
    /// ```text
    /// # comment
    /// node <id> <x_meters> <y_meters>
    /// edge <from> <to> <seconds>
    /// ```
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut positions: Vec<Option<Point>> = Vec::new();
        let mut arcs = Vec::new();
        let mut arc_lines = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let err = |message: String| GraphError::Parse { line: line_no, message };
            match fields[0] {
                "node" => {
                    if fields.len() != 4 {
                        return Err(err(format!("expected `node <id> <x> <y>`, got `{line}`")));
                    }
                    let id: usize = fields[1]
                        .parse()
                        .map_err(|_| err(format!("invalid node id `{}`", fields[1])))?;
                    let x = parse_f64(fields[2]).ok_or_else(|| err(format!("invalid x `{}`", fields[2])))?;
                    let y = parse_f64(fields[3]).ok_or_else(|| err(format!("invalid y `{}`", fields[3])))?;
                    if id >= positions.len() {
                        positions.resize(id + 1, None);
                    }
                    if positions[id].is_some() {
                        return Err(err(format!("duplicate node id {id}")));
                    }
                    positions[id] = Some(Point::new(x, y));
                }
                "edge" => {
                    if fields.len() != 4 {
                        return Err(err(format!("expected `edge <from> <to> <seconds>`, got `{line}`")));
                    }
                    let from: usize = fields[1]
                        .parse()
                        .map_err(|_| err(format!("invalid node id `{}`", fields[1])))?;
                    let to: usize = fields[2]
                        .parse()
                        .map_err(|_| err(format!("invalid node id `{}`", fields[2])))?;
                    let travel_time =
                        parse_f64(fields[3]).ok_or_else(|| err(format!("invalid travel time `{}`", fields[3])))?;
                    if !(travel_time > 0.0) {
                        return Err(err(format!("travel time must be positive, got {travel_time}")));
                    }
                    arcs.push(Arc { from: NodeId::from(from), to: NodeId::from(to), travel_time });
                    arc_lines.push(line_no);
                }
                other => return Err(err(format!("unknown record type `{other}`"))),
            }
        }

        let mut dense = Vec::with_capacity(positions.len());
        for (id, p) in positions.into_iter().enumerate() {
            match p {
                Some(p) => dense.push(p),
                None => {
                    return Err(GraphError::Parse {
                        line: 0,
                        message: format!("node ids must be dense 0..n-1, missing id {id}"),
                    })
                }
            }
        }
        for (a, &line) in arcs.iter().zip(&arc_lines) {
            for id in [a.from, a.to] {
                if id.index() >= dense.len() {
                    return Err(GraphError::Parse {
                        line,
                        message: format!("edge references unknown node {id}"),
                    });
                }
            }
        }
        Self::new(dense, arcs)
    }

    /// Serializes to the text format accepted by [`TransportGraph::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(32 * (self.positions.len() + self.arcs.len()));
        out.push_str(&format!("# {} nodes, {} edges\n", self.node_count(), self.edge_count()));
        for (i, p) in self.positions.iter().enumerate() {
            out.push_str(&format!("node {i} {} {}\n", p.x, p.y));
        }
        for a in &self.arcs {
            out.push_str(&format!("edge {} {} {}\n", a.from, a.to, a.travel_time));
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn edge_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> {
        (0..self.positions.len()).map(NodeId::from)
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.index() < self.positions.len()
    }

    pub fn position(&self, node: NodeId) -> Point {
        self.positions[node.index()]
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Outgoing arcs of `node`, ordered by head node id.
    pub fn out_arcs(&self, node: NodeId) -> impl Iterator<Item = &Arc> {
        let i = node.index();
        self.out_arcs[self.out_offsets[i]..self.out_offsets[i + 1]]
            .iter()
            .map(move |&k| &self.arcs[k])
    }

    /// Incoming arcs of `node`, ordered by tail node id.
    pub fn in_arcs(&self, node: NodeId) -> impl Iterator<Item = &Arc> {
        let i = node.index();
        self.in_arcs[self.in_offsets[i]..self.in_offsets[i + 1]]
            .iter()
            .map(move |&k| &self.arcs[k])
    }

    /// Euclidean length of an arc in meters.
    pub fn arc_length(&self, arc: &Arc) -> f64 {
        self.position(arc.from).distance(&self.position(arc.to))
    }

    /// Closest node to `p`; ties go to the lowest id.
    pub fn nearest_node(&self, p: Point) -> NodeId {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, q) in self.positions.iter().enumerate() {
            let d = (q.x - p.x).powi(2) + (q.y - p.y).powi(2);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        NodeId::from(best)
    }

    fn check_strongly_connected(&self) -> Result<(), GraphError> {
        let root = NodeId(0);
        if let Some(v) = first_unreached(self, root, true) {
            return Err(GraphError::NotStronglyConnected { from: root, to: v });
        }
        if let Some(v) = first_unreached(self, root, false) {
            return Err(GraphError::NotStronglyConnected { from: v, to: root });
        }
        Ok(())
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn csr(n: usize, arcs: &[Arc], key: impl Fn(&Arc) -> (NodeId, NodeId)) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..arcs.len()).collect();
    order.sort_by_key(|&k| key(&arcs[k]));
    let mut offsets = vec![0usize; n + 1];
    for a in arcs {
        offsets[key(a).0.index() + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    (offsets, order)
}

fn first_unreached(g: &TransportGraph, root: NodeId, forward: bool) -> Option<NodeId> {
    let n = g.node_count();
    let mut seen = vec![false; n];
    let mut stack = vec![root];
    seen[root.index()] = true;
    while let Some(u) = stack.pop() {
        let next: Vec<NodeId> = if forward {
            g.out_arcs(u).map(|a| a.to).collect()
        } else {
            g.in_arcs(u).map(|a| a.from).collect()
        };
        for v in next {
            if !seen[v.index()] {
                seen[v.index()] = true;
                stack.push(v);
            }
        }
    }
    seen.iter().position(|&s| !s).map(NodeId::from)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then node id
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum cost of reaching `target` from every node, with arc cost given
/// by `weight`. Runs Dijkstra from `target` over reversed arcs.
pub fn distances_to(graph: &TransportGraph, target: NodeId, weight: impl Fn(&Arc) -> f64) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; graph.node_count()];
    let mut heap = BinaryHeap::new();
    dist[target.index()] = 0.0;
    heap.push(HeapEntry { dist: 0.0, node: target.0 });
    while let Some(HeapEntry { dist: d, node }) = heap.pop() {
        if d > dist[node as usize] {
            continue;
        }
        for arc in graph.in_arcs(NodeId(node)) {
            let nd = d + weight(arc);
            let u = arc.from.index();
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(HeapEntry { dist: nd, node: arc.from.0 });
            }
        }
    }
    dist
}

/// Minimum cost from `source` to every node (forward Dijkstra).
pub fn distances_from(graph: &TransportGraph, source: NodeId, weight: impl Fn(&Arc) -> f64) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; graph.node_count()];
    let mut heap = BinaryHeap::new();
    dist[source.index()] = 0.0;
    heap.push(HeapEntry { dist: 0.0, node: source.0 });
    while let Some(HeapEntry { dist: d, node }) = heap.pop() {
        if d > dist[node as usize] {
            continue;
        }
        for arc in graph.out_arcs(NodeId(node)) {
            let nd = d + weight(arc);
            let v = arc.to.index();
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(HeapEntry { dist: nd, node: arc.to.0 });
            }
        }
    }
    dist
}

/// Shortest travel times `f(node, goal)` for a fixed list of goals.
///
/// Stored goal-major: row `g` holds the time from every node to goal `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct TravelTimeTable {
    goal_nodes: Vec<NodeId>,
    node_count: usize,
    times: Vec<f64>,
}

impl TravelTimeTable {
    pub fn goal_nodes(&self) -> &[NodeId] {
        &self.goal_nodes
    }

    pub fn goal_count(&self) -> usize {
        self.goal_nodes.len()
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    #[inline]
    pub fn time(&self, goal: usize, node: NodeId) -> f64 {
        self.times[goal * self.node_count + node.index()]
    }

    pub fn row(&self, goal: usize) -> &[f64] {
        &self.times[goal * self.node_count..(goal + 1) * self.node_count]
    }

    /// Builds a table from explicit rows (one per goal, indexed by node).
    pub fn from_rows(goal_nodes: Vec<NodeId>, rows: Vec<Vec<f64>>) -> Result<Self, GraphError> {
        if goal_nodes.len() != rows.len() {
            return Err(GraphError::InvalidParameter(
                "one row per goal is required".into(),
            ));
        }
        let node_count = rows.first().map_or(0, Vec::len);
        let mut times = Vec::with_capacity(node_count * rows.len());
        for (g, row) in goal_nodes.iter().zip(rows) {
            if row.len() != node_count || g.index() >= node_count {
                return Err(GraphError::InvalidParameter("ragged travel-time rows".into()));
            }
            if row.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                return Err(GraphError::InvalidParameter(
                    "travel times must be finite and non-negative".into(),
                ));
            }
            times.extend(row);
        }
        Ok(Self { goal_nodes, node_count, times })
    }
}

/// One Dijkstra per goal on the reversed graph.
pub fn shortest_travel_times(graph: &TransportGraph, goals: &[NodeId]) -> Result<TravelTimeTable, GraphError> {
    let n = graph.node_count();
    let mut times = Vec::with_capacity(n * goals.len());
    for &g in goals {
        if !graph.contains(g) {
            return Err(GraphError::UnknownNode(g));
        }
        times.extend(distances_to(graph, g, |a| a.travel_time));
    }
    Ok(TravelTimeTable { goal_nodes: goals.to_vec(), node_count: n, times })
}

/// Canonical shortest path from `from` to the target whose travel-time
/// row is `to_target`. At each step the lowest-id successor lying on a
/// shortest path is taken.
pub fn canonical_path(graph: &TransportGraph, to_target: &[f64], from: NodeId) -> Vec<NodeId> {
    let mut path = vec![from];
    let mut u = from;
    while to_target[u.index()] > 0.0 {
        let remaining = to_target[u.index()];
        let tol = 1e-9 * remaining.max(1.0);
        let next = graph
            .out_arcs(u)
            .find(|a| (a.travel_time + to_target[a.to.index()] - remaining).abs() <= tol)
            .map(|a| a.to);
        match next {
            Some(v) => {
                path.push(v);
                u = v;
            }
            None => break,
        }
        if path.len() > graph.node_count() {
            break;
        }
    }
    path
}

/// Last node fully reached when travelling `elapsed` seconds along `path`.
pub fn node_reached_after(graph: &TransportGraph, path: &[NodeId], elapsed: f64) -> NodeId {
    let mut t = 0.0;
    let mut reached = path[0];
    for w in path.windows(2) {
        let step = graph
            .out_arcs(w[0])
            .filter(|a| a.to == w[1])
            .map(|a| a.travel_time)
            .fold(f64::INFINITY, f64::min);
        if t + step > elapsed + 1e-9 {
            break;
        }
        t += step;
        reached = w[1];
    }
    reached
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_graph() -> TransportGraph {
        // A->B->C with back edges so it stays strongly connected.
        TransportGraph::parse(
            "node 0 0 0\nnode 1 10 0\nnode 2 20 0\n\
             edge 0 1 2\nedge 1 2 3\nedge 2 0 100\n",
        )
        .unwrap()
    }

    #[test]
    fn grid_counts() {
        let g = TransportGraph::grid(16, 16, 50.0, 10.0).unwrap();
        assert_eq!(g.node_count(), 256);
        // 2 * 16 * 15 undirected adjacencies, both directions
        assert_eq!(g.edge_count(), 960);
        assert!(g.arcs().iter().all(|a| a.travel_time == 5.0));

        let g = TransportGraph::grid(2, 2, 50.0, 10.0).unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.edge_count(), 8);
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(TransportGraph::grid(1, 5, 50.0, 10.0).is_err());
        assert!(TransportGraph::grid(3, 3, 0.0, 10.0).is_err());
        assert!(TransportGraph::grid(3, 3, 50.0, -1.0).is_err());
    }

    #[test]
    fn grid_corner_to_corner() {
        let g = TransportGraph::grid(3, 3, 100.0, 10.0).unwrap();
        let table = shortest_travel_times(&g, &[NodeId(8)]).unwrap();
        assert_eq!(table.time(0, NodeId(0)), 40.0);
    }

    #[test]
    fn center_to_corner() {
        let g = TransportGraph::grid(3, 3, 50.0, 10.0).unwrap();
        let table = shortest_travel_times(&g, &[NodeId(4)]).unwrap();
        for corner in [0, 2, 6, 8] {
            assert_eq!(table.time(0, NodeId(corner)), 10.0);
        }
        assert_eq!(table.time(0, NodeId(4)), 0.0);
    }

    #[test]
    fn unique_path_on_line() {
        let g = line_graph();
        let table = shortest_travel_times(&g, &[NodeId(2)]).unwrap();
        assert_eq!(table.time(0, NodeId(0)), 5.0);
        assert_eq!(table.time(0, NodeId(2)), 0.0);
    }

    #[test]
    fn three_cycle_loads() {
        let g = TransportGraph::parse("node 0 0 0\nnode 1 1 0\nnode 2 0 1\nedge 0 1 1\nedge 1 2 1\nedge 2 0 1\n").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn sink_is_rejected() {
        let err = TransportGraph::parse("node 0 0 0\nnode 1 1 0\nnode 2 0 1\nedge 0 1 1\nedge 1 0 1\nedge 0 2 1\n")
            .unwrap_err();
        assert!(matches!(err, GraphError::NotStronglyConnected { from: NodeId(2), to: NodeId(0) }), "{err}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = TransportGraph::parse("node 0 0 0\n# c\nnode 0 1 1\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 3, .. }), "{err}");
        let err = TransportGraph::parse("node 0 0 0\nnode 1 0 0\nedge 0 7 1\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 3, .. }), "{err}");
        let err = TransportGraph::parse("node 0 0 0\nnode 1 0 0\nedge 0 1 0\nedge 1 0 1\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 3, .. }), "{err}");
        let err = TransportGraph::parse("node 0 0 0\nnode 2 0 0\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { .. }), "{err}");
        let err = TransportGraph::parse("vertex 0 0 0\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn text_round_trip() {
        let g = TransportGraph::grid(3, 4, 50.0, 10.0).unwrap();
        let back = TransportGraph::parse(&g.to_text()).unwrap();
        assert_eq!(back.positions(), g.positions());
        assert_eq!(back.arcs(), g.arcs());
    }

    #[test]
    fn canonical_path_prefers_low_ids() {
        let g = TransportGraph::grid(3, 3, 50.0, 10.0).unwrap();
        let table = shortest_travel_times(&g, &[NodeId(8)]).unwrap();
        let path = canonical_path(&g, table.row(0), NodeId(0));
        assert_eq!(path, vec![NodeId(0), NodeId(1), NodeId(2), NodeId(5), NodeId(8)]);
        assert_eq!(node_reached_after(&g, &path, 0.0), NodeId(0));
        assert_eq!(node_reached_after(&g, &path, 7.0), NodeId(1));
        assert_eq!(node_reached_after(&g, &path, 10.0), NodeId(2));
        assert_eq!(node_reached_after(&g, &path, 100.0), NodeId(8));
    }

    #[test]
    fn nearest_node_ties_to_lowest_id() {
        let g = TransportGraph::grid(2, 2, 50.0, 10.0).unwrap();
        assert_eq!(g.nearest_node(Point::new(25.0, 25.0)), NodeId(0));
        assert_eq!(g.nearest_node(Point::new(49.0, 1.0)), NodeId(1));
    }
}
