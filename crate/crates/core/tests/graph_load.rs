use std::fmt::Write as _;
use std::time::Instant;

use rvrp_core::graph::{shortest_travel_times, NodeId, TransportGraph};

/// Ring of 4302 nodes in both directions plus 810 one-way chords:
/// 8604 + 810 = 9414 directed edges.
fn manhattan_sized() -> String {
    let n = 4302usize;
    let mut s = String::from("# ring with chords\n");
    for i in 0..n {
        let a = i as f64 * std::f64::consts::TAU / n as f64;
        writeln!(s, "node {i} {} {}", 5000.0 * a.cos(), 5000.0 * a.sin()).unwrap();
    }
    for i in 0..n {
        let j = (i + 1) % n;
        writeln!(s, "edge {i} {j} 0.73").unwrap();
        writeln!(s, "edge {j} {i} 0.73").unwrap();
    }
    for k in 0..810 {
        let i = (k * 5) % n;
        writeln!(s, "edge {i} {} 40", (i + n / 2 + k) % n).unwrap();
    }
    s
}

#[test]
fn large_graph_loads_quickly() {
    let dir = std::env::temp_dir().join(format!("rvrp-graph-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("city.graph");
    std::fs::write(&path, manhattan_sized()).unwrap();

    let start = Instant::now();
    let g = TransportGraph::load(&path).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(g.node_count(), 4302);
    assert_eq!(g.edge_count(), 9414);
    assert!(elapsed.as_secs_f64() < 1.0, "load took {elapsed:?}");

    let table = shortest_travel_times(&g, &[NodeId(0), NodeId(2151)]).unwrap();
    assert!(table.row(0).iter().all(|t| t.is_finite()));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn saved_grid_reloads() {
    let g = TransportGraph::grid(6, 7, 40.0, 8.0).unwrap();
    let back = TransportGraph::parse(&g.to_text()).unwrap();
    assert_eq!(back.node_count(), 42);
    assert_eq!(back.edge_count(), g.edge_count());
    let a = shortest_travel_times(&g, &[NodeId(41)]).unwrap();
    let b = shortest_travel_times(&back, &[NodeId(41)]).unwrap();
    assert_eq!(a, b);
}
