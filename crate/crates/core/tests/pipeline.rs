//! Instance file to solver report, as the command line uses it.

use std::path::Path;

use rvrp_core::instance::{initial_assignment, InstanceFile};
use rvrp_core::solvers::{solve, verify_bound, Method, SolverError, SolverReport};

const INSTANCE: &str = "rvrp-instance v1
graph grid 6 6 50 10
goals 3 20 33
robots 0 5 7 14 22 30 35
noise gaussian:60
cap 5
p_min 1e-5
seed 17
";

#[test]
fn file_to_reports() {
    let file = InstanceFile::parse(INSTANCE).unwrap();
    let graph = file.graph.load(Path::new(".")).unwrap();
    let inst = file.build(&graph).unwrap();
    assert_eq!((inst.n_robots(), inst.n_goals(), inst.cap()), (7, 3, 5));
    let o = initial_assignment(&inst);
    let reports: Vec<_> = Method::ALL.iter().map(|&m| solve(m, &inst, &o, 1).unwrap()).collect();
    let by = |m: Method| reports.iter().find(|r| r.method == m).unwrap();
    let (g, opt) = (by(Method::Greedy), by(Method::Optimal));
    assert!(verify_bound(g, opt).unwrap().holds);
    assert!(g.cost_j <= by(Method::HungarianOnly).cost_j);
    for r in &reports {
        let row = r.csv_row(&inst);
        assert_eq!(row.split(',').count(), SolverReport::CSV_HEADER.split(',').count());
    }
    // same file, same instance
    let again = InstanceFile::parse(&file.to_text()).unwrap().build(&graph).unwrap();
    assert_eq!(again.fingerprint(), inst.fingerprint());
}

#[test]
fn optimal_refuses_large_instances() {
    let text = INSTANCE
        .replace("graph grid 6 6 50 10", "graph grid 8 8 50 10")
        .replace("robots 0 5 7 14 22 30 35", &format!("robots {}", (40..64).map(|i| i.to_string()).collect::<Vec<_>>().join(" ")));
    let file = InstanceFile::parse(&text).unwrap();
    let graph = file.graph.load(Path::new(".")).unwrap();
    let inst = file.build(&graph).unwrap();
    let err = solve(Method::Optimal, &inst, &initial_assignment(&inst), 0).unwrap_err();
    assert!(matches!(err, SolverError::TooLarge { free: 21, .. }), "{err}");
}
