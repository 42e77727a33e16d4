use std::fmt::{self, Display, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use rvrp_core::bench::{run_noise_sweep, run_series, ExperimentConfig};
use rvrp_core::dispatch::{generate_synthetic_trace, replay as run_replay, summarize, DispatchConfig, Policy, RequestTrace};
use rvrp_core::graph::{NodeId, TransportGraph};
use rvrp_core::instance::{initial_assignment, GraphSource, InstanceFile};
use rvrp_core::seed::{derive_seed, rng_for};
use rvrp_core::solvers::{
    exhaustive_optimal, greedy, solve as run_method, verify_bound, Method, SolverReport, MAX_FREE_ROBOTS,
};
use rvrp_core::uncertainty::{NoiseKind, NoiseSpec, DEFAULT_P_MIN};

use crate::settings::{manifest_beside, write_file, List, Settings};
use crate::Common;

/// Stream for the random baseline in `solve`.
const RANDOM_STREAM: u64 = 2;
/// Stream for synthetic traces, apart from the dispatcher's own streams.
const TRACE_STREAM: u64 = u64::MAX - 1;

/// `grid:ROWS:COLS[:SPACING[:SPEED]]` or a graph file path.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    Grid { rows: usize, cols: usize, spacing: f64, speed: f64 },
    File(PathBuf),
}

impl Default for GraphSpec {
    fn default() -> Self {
        GraphSpec::Grid { rows: 16, cols: 16, spacing: 50.0, speed: 10.0 }
    }
}

impl FromStr for GraphSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let Some(rest) = s.trim().strip_prefix("grid:") else {
            return Ok(GraphSpec::File(PathBuf::from(s.trim())));
        };
        let parts: Vec<&str> = rest.split(':').collect();
        if !(2..=4).contains(&parts.len()) {
            return Err(format!("expected grid:ROWS:COLS[:SPACING[:SPEED]], got `{s}`"));
        }
        let num = |i: usize, d: f64| -> Result<f64, String> {
            parts.get(i).map_or(Ok(d), |p| p.parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        };
        let dim = |i: usize| parts[i].parse::<usize>().map_err(|e| format!("`{}`: {e}", parts[i]));
        Ok(GraphSpec::Grid { rows: dim(0)?, cols: dim(1)?, spacing: num(2, 50.0)?, speed: num(3, 10.0)? })
    }
}

impl Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Grid { rows, cols, spacing, speed } => write!(f, "grid:{rows}:{cols}:{spacing}:{speed}"),
            GraphSpec::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl GraphSpec {
    fn load(&self) -> Result<TransportGraph> {
        Ok(match self {
            GraphSpec::Grid { rows, cols, spacing, speed } => TransportGraph::grid(*rows, *cols, *spacing, *speed)?,
            GraphSpec::File(p) => TransportGraph::load(p).with_context(|| format!("loading graph {}", p.display()))?,
        })
    }

    fn source(&self) -> Result<GraphSource> {
        Ok(match self {
            GraphSpec::Grid { rows, cols, spacing, speed } => {
                GraphSource::Grid { rows: *rows, cols: *cols, spacing: *spacing, speed: *speed }
            }
            GraphSpec::File(p) => GraphSource::File(fs::canonicalize(p).with_context(|| format!("resolving {}", p.display()))?),
        })
    }
}

/// `rate=0.5,hours=2`; `minutes=` and `seconds=` also set the duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Synthetic {
    pub rate: f64,
    pub duration_s: f64,
}

impl FromStr for Synthetic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = Synthetic { rate: 0.5, duration_s: 7200.0 };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| format!("expected key=value, got `{part}`"))?;
            let v: f64 = v.trim().parse().map_err(|e| format!("`{part}`: {e}"))?;
            match k.trim() {
                "rate" => out.rate = v,
                "hours" => out.duration_s = v * 3600.0,
                "minutes" => out.duration_s = v * 60.0,
                "seconds" => out.duration_s = v,
                other => return Err(format!("unknown synthetic key `{other}`")),
            }
        }
        Ok(out)
    }
}

impl Display for Synthetic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rate={},seconds={}", self.rate, self.duration_s)
    }
}

fn required<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("missing `--{}` (or `{key}=` in the config)", key.replace('_', "-")))
}

#[derive(Args)]
pub struct GenGridArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// Meters between neighbouring nodes.
    #[arg(long)]
    spacing: Option<f64>,
    /// Nominal speed in m/s used for edge travel times.
    #[arg(long)]
    speed: Option<f64>,
    #[arg(long)]
    out: Option<String>,
}

pub fn gen_grid(a: GenGridArgs) -> Result<()> {
    let mut s = Settings::new("gen-grid", a.common.config.as_deref())?;
    let rows = s.get("rows", a.rows, 16)?;
    let cols = s.get("cols", a.cols, 16)?;
    let spacing = s.get("spacing", a.spacing, 50.0)?;
    let speed = s.get("speed", a.speed, 10.0)?;
    let out = PathBuf::from(required(s.get_opt("out", a.out)?, "out")?);
    s.seed(a.common.seed)?;
    s.finish()?;
    let g = TransportGraph::grid(rows, cols, spacing, speed)?;
    write_file(&out, &g.to_text())?;
    s.output("graph", &out);
    s.write_manifest(&manifest_beside(&out))?;
    println!("wrote {} ({} nodes, {} directed edges)", out.display(), g.node_count(), g.edge_count());
    Ok(())
}

#[derive(Args)]
pub struct GenInstanceArgs {
    #[command(flatten)]
    common: Common,
    /// grid:ROWS:COLS[:SPACING[:SPEED]] or a graph file.
    #[arg(long)]
    graph: Option<GraphSpec>,
    #[arg(long)]
    robots: Option<usize>,
    #[arg(long)]
    goals: Option<usize>,
    /// Deployment cap N_d; defaults to the robot count.
    #[arg(long)]
    cap: Option<usize>,
    /// none, gaussian:SIGMA, laplace:B or uniform:RADIUS.
    #[arg(long)]
    noise: Option<NoiseSpec>,
    #[arg(long)]
    p_min: Option<f64>,
    #[arg(long)]
    out: Option<String>,
}

pub fn gen_instance(a: GenInstanceArgs) -> Result<()> {
    let mut s = Settings::new("gen-instance", a.common.config.as_deref())?;
    let graph = s.get("graph", a.graph, GraphSpec::default())?;
    let n = s.get("robots", a.robots, 16)?;
    let m = s.get("goals", a.goals, 4)?;
    let cap = s.get("cap", a.cap, n)?;
    let noise = s.get("noise", a.noise, NoiseSpec::gaussian(100.0))?;
    let p_min = s.get("p_min", a.p_min, DEFAULT_P_MIN)?;
    let out = PathBuf::from(required(s.get_opt("out", a.out)?, "out")?);
    let seed = s.seed(a.common.seed)?;
    s.finish()?;

    let g = graph.load()?;
    if n + m > g.node_count() {
        bail!("{n} robots and {m} goals need distinct nodes, graph has {}", g.node_count());
    }
    let nodes: Vec<NodeId> =
        rand::seq::index::sample(&mut rng_for(seed, 0), g.node_count(), n + m).into_iter().map(NodeId::from).collect();
    let file = InstanceFile {
        graph: graph.source()?,
        goals: nodes[n..].to_vec(),
        robots: nodes[..n].to_vec(),
        noise,
        cap,
        p_min,
        seed: derive_seed(seed, 1),
    };
    file.build(&g).context("generated instance is invalid")?;
    write_file(&out, &file.to_text())?;
    s.output("instance", &out);
    s.write_manifest(&manifest_beside(&out))?;
    println!("wrote {}", out.display());
    Ok(())
}

#[derive(Args)]
pub struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    instance: Option<String>,
    /// hungarian, greedy, optimal, slice_greedy, random or true.
    #[arg(long)]
    method: Option<Method>,
    /// Override the instance's deployment cap N_d.
    #[arg(long)]
    cap: Option<usize>,
    /// Also run the exhaustive optimum and print the greedy bound certificate.
    #[arg(long)]
    with_optimal: bool,
    /// Write the report rows to this CSV file.
    #[arg(long)]
    csv: Option<String>,
}

fn print_report(r: &SolverReport, prefix: &str) {
    println!("{prefix}method={}", r.method);
    println!("{prefix}J0={}", r.j0);
    println!("{prefix}J={}", r.cost_j);
    println!("{prefix}J_over_J0={}", r.normalized());
    println!("{prefix}objective_calls={}", r.objective_calls);
    println!("{prefix}wall_time_s={}", r.wall_time_s);
    println!("{prefix}redundant_edges={}", r.a);
}

pub fn solve(a: SolveArgs) -> Result<()> {
    let mut s = Settings::new("solve", a.common.config.as_deref())?;
    let path = PathBuf::from(required(s.get_opt("instance", a.instance)?, "instance")?);
    let method = s.get("method", a.method, Method::Greedy)?;
    let cap = s.get_opt("cap", a.cap)?;
    let with_optimal = s.switch("with_optimal", a.with_optimal)?;
    let csv = s.get_opt("csv", a.csv)?.map(PathBuf::from);
    let seed = s.seed(a.common.seed)?;
    s.finish()?;

    let text = fs::read_to_string(&path).with_context(|| format!("reading instance {}", path.display()))?;
    let file = InstanceFile::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let graph = file.graph.load(base)?;
    let mut inst = file.build(&graph)?;
    if let Some(c) = cap {
        inst = inst.with_cap(c)?;
    }
    let o = initial_assignment(&inst);
    let report = run_method(method, &inst, &o, derive_seed(seed, RANDOM_STREAM))?;
    println!("N={}\nM={}\nN_d={}", inst.n_robots(), inst.n_goals(), inst.cap());
    print_report(&report, "");

    let mut rows = vec![report.csv_row(&inst)];
    if with_optimal {
        let free = inst.n_robots() - inst.n_goals();
        if free > MAX_FREE_ROBOTS {
            eprintln!("note: certificate skipped, {free} free robots exceed the exhaustive limit {MAX_FREE_ROBOTS}");
            println!("certificate=skipped");
        } else {
            let opt = match method {
                Method::Optimal => report.clone(),
                _ => exhaustive_optimal(&inst, &o)?,
            };
            let gr = match method {
                Method::Greedy => report.clone(),
                _ => greedy(&inst, &o)?,
            };
            let cert = verify_bound(&gr, &opt)?;
            println!("optimal_J={}\ngreedy_J={}", opt.cost_j, gr.cost_j);
            println!("bound_lhs={}\nbound_rhs={}\nbound_holds={}", cert.lhs, cert.rhs, cert.holds);
            for r in [&gr, &opt] {
                if r.method != method {
                    rows.push(r.csv_row(&inst));
                }
            }
        }
    }
    if let Some(csv) = csv {
        let mut body = format!("{}\n", SolverReport::CSV_HEADER);
        for r in rows {
            let _ = writeln!(body, "{r}");
        }
        write_file(&csv, &body)?;
        s.output("csv", &csv);
        s.write_manifest(&manifest_beside(&csv))?;
    }
    Ok(())
}

#[derive(Args)]
pub struct BenchArgs {
    #[command(flatten)]
    common: Common,
    /// A (N=16, M=4) or B (N=100, M=10).
    #[arg(long)]
    series: Option<String>,
    /// Comma separated noise models; with a sweep only the first one's kind is used.
    #[arg(long)]
    noise: Option<List<NoiseSpec>>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Comma separated methods; `optimal` needs N - M <= 20.
    #[arg(long)]
    methods: Option<List<Method>>,
    /// Comma separated deployment caps N_d.
    #[arg(long)]
    caps: Option<List<usize>>,
    /// Comma separated noise scales; makes the table a noise sweep.
    #[arg(long)]
    sweep: Option<List<f64>>,
    #[arg(long)]
    p_min: Option<f64>,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory; the table is printed either way.
    #[arg(long)]
    out: Option<String>,
}

pub fn bench(a: BenchArgs, sweep_command: bool) -> Result<()> {
    let mut s = Settings::new(if sweep_command { "sweep" } else { "bench" }, a.common.config.as_deref())?;
    let series = s.get("series", a.series, "A".to_string())?;
    let mut config = match series.to_ascii_uppercase().as_str() {
        "A" => ExperimentConfig::series_a(),
        "B" => ExperimentConfig::series_b(),
        other => bail!("unknown series `{other}`, expected A or B"),
    };
    let noises = s.get("noise", a.noise, List(config.noises.clone()))?;
    config.iterations = s.get("iterations", a.iterations, config.iterations)?;
    config.methods = s.get("methods", a.methods, List(config.methods.clone()))?.0;
    let sweep = if sweep_command {
        Some(s.get("sweep", a.sweep, List(vec![0.0, 50.0, 100.0, 200.0]))?)
    } else {
        s.get_opt("sweep", a.sweep)?
    };
    let default_caps = match sweep {
        Some(_) => vec![2 * config.n_goals],
        None => config.caps.clone(),
    };
    config.caps = s.get("caps", a.caps, List(default_caps))?.0;
    config.p_min = s.get("p_min", a.p_min, config.p_min)?;
    let jobs = s.get("jobs", a.jobs, std::thread::available_parallelism().map_or(1, |n| n.get()))?;
    let out = s.get_opt("out", a.out)?.map(PathBuf::from);
    config.seed = s.seed(a.common.seed)?;
    s.finish()?;

    config.noises = match &sweep {
        Some(scales) => {
            let kind = match noises.0.first().map(|n| n.kind) {
                Some(NoiseKind::None) | None => NoiseKind::Gaussian,
                Some(k) => k,
            };
            scales.0.iter().map(|&x| NoiseSpec::new(kind, x)).collect::<Result<_, _>>()?
        }
        None => noises.0,
    };
    if jobs == 0 {
        bail!("--jobs must be >= 1");
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let table = pool.install(|| match sweep {
        Some(_) => run_noise_sweep(&config),
        None => run_series(&config),
    })?;

    let csv = table.to_csv();
    print!("{csv}");
    if let Some(dir) = out {
        let stem = format!("{}_{}", if sweep.is_some() { "sweep" } else { "series" }, config.series);
        let files = [
            ("table", format!("{stem}.csv"), csv),
            ("expected", format!("{stem}_expected.csv"), table.expected_csv()),
            ("plot", format!("{stem}.dat"), table.plot_data()),
        ];
        for (name, file, body) in files {
            let p = dir.join(file);
            write_file(&p, &body)?;
            s.output(name, &p);
        }
        s.write_manifest(&dir.join("manifest.txt"))?;
    }
    Ok(())
}

/// `both` or a single policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Policies(Option<Policy>);

impl FromStr for Policies {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "both" => Ok(Policies(None)),
            p => p.parse::<Policy>().map(|p| Policies(Some(p))).map_err(|e| format!("{e}; expected both, redundant or non_redundant")),
        }
    }
}

impl Display for Policies {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            None => f.write_str("both"),
            Some(p) => write!(f, "{p}"),
        }
    }
}

impl Policies {
    fn list(self) -> Vec<Policy> {
        match self.0 {
            None => vec![Policy::Redundant, Policy::NonRedundant],
            Some(p) => vec![p],
        }
    }
}

#[derive(Args)]
pub struct ReplayArgs {
    #[command(flatten)]
    common: Common,
    /// CSV trace with header request_time_s,pickup_node,dropoff_node.
    #[arg(long, conflicts_with = "synthetic")]
    trace: Option<String>,
    /// Poisson trace parameters, e.g. rate=0.5,hours=2.
    #[arg(long)]
    synthetic: Option<Synthetic>,
    #[arg(long)]
    graph: Option<GraphSpec>,
    /// both, redundant or non_redundant.
    #[arg(long)]
    policy: Option<Policies>,
    #[arg(long)]
    noise: Option<NoiseSpec>,
    /// Vehicles kept per occupied vehicle.
    #[arg(long)]
    fleet_factor: Option<f64>,
    #[arg(long)]
    batch_s: Option<f64>,
    #[arg(long)]
    max_wait_s: Option<f64>,
    /// Idle vehicles held back, as a fraction of pending requests.
    #[arg(long)]
    reserve_fraction: Option<f64>,
    #[arg(long)]
    p_min: Option<f64>,
    /// Output directory; summaries are printed either way.
    #[arg(long)]
    out: Option<String>,
}

pub fn replay(a: ReplayArgs) -> Result<()> {
    let mut s = Settings::new("replay", a.common.config.as_deref())?;
    let trace_path = s.get_opt("trace", a.trace)?;
    let synthetic = s.get_opt("synthetic", a.synthetic)?;
    let graph_spec = s.get("graph", a.graph, GraphSpec::default())?;
    let policies = s.get("policy", a.policy, Policies(None))?;
    let noise = s.get("noise", a.noise, NoiseSpec::gaussian(100.0))?;
    let factor = s.get("fleet_factor", a.fleet_factor, 1.56)?;
    let defaults = DispatchConfig::new(Policy::Redundant, noise, factor, 0);
    let batch_s = s.get("batch_s", a.batch_s, defaults.batch_s)?;
    let max_wait_s = s.get("max_wait_s", a.max_wait_s, defaults.max_wait_s)?;
    let reserve = s.get("reserve_fraction", a.reserve_fraction, defaults.reserve_fraction)?;
    let p_min = s.get("p_min", a.p_min, defaults.p_min)?;
    let out = s.get_opt("out", a.out)?.map(PathBuf::from);
    let seed = s.seed(a.common.seed)?;
    s.finish()?;

    let graph = graph_spec.load()?;
    let trace = match (&trace_path, synthetic) {
        (Some(_), Some(_)) => bail!("give either --trace or --synthetic, not both"),
        (Some(p), None) => RequestTrace::load(p, &graph).with_context(|| format!("loading trace {p}"))?,
        (None, Some(syn)) => generate_synthetic_trace(&graph, syn.rate, syn.duration_s, derive_seed(seed, TRACE_STREAM))?,
        (None, None) => bail!("missing `--trace` or `--synthetic`"),
    };

    let runs = policies
        .list()
        .into_par_iter()
        .map(|policy| {
            let config = DispatchConfig { policy, batch_s, max_wait_s, reserve_fraction: reserve, p_min, ..DispatchConfig::new(policy, noise, factor, seed) };
            run_replay(&graph, &trace, &config).map(|stats| {
                let summary = summarize(&stats);
                (stats, summary)
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    for (i, (stats, summary)) in runs.iter().enumerate() {
        if i > 0 {
            println!();
        }
        print!("{}", summary.to_key_values());
        if let Some(dir) = &out {
            let p = stats.policy;
            let files = [
                (format!("requests_{p}"), format!("requests_{p}.csv"), stats.to_csv()),
                (format!("batches_{p}"), format!("batches_{p}.csv"), stats.batches_csv()),
                (format!("summary_{p}"), format!("summary_{p}.txt"), summary.to_key_values()),
            ];
            for (name, file, body) in files {
                let path = dir.join(file);
                write_file(&path, &body)?;
                s.output(&name, &path);
            }
        }
    }
    if let Some(dir) = &out {
        if synthetic.is_some() {
            let p = dir.join("trace.csv");
            write_file(&p, &trace.to_csv())?;
            s.output("trace", &p);
        }
        s.write_manifest(&dir.join("manifest.txt"))?;
    }
    Ok(())
}

#[derive(Args)]
pub struct GenTraceArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    graph: Option<GraphSpec>,
    /// Requests per second.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    hours: Option<f64>,
    #[arg(long)]
    out: Option<String>,
}

/// Same trace as `replay --synthetic rate=R,hours=H` with the same seed.
pub fn gen_trace(a: GenTraceArgs) -> Result<()> {
    let mut s = Settings::new("gen-trace", a.common.config.as_deref())?;
    let graph_spec = s.get("graph", a.graph, GraphSpec::default())?;
    let rate = s.get("rate", a.rate, 0.5)?;
    let hours = s.get("hours", a.hours, 2.0)?;
    let out = PathBuf::from(required(s.get_opt("out", a.out)?, "out")?);
    let seed = s.seed(a.common.seed)?;
    s.finish()?;
    let graph = graph_spec.load()?;
    let trace = generate_synthetic_trace(&graph, rate, hours * 3600.0, derive_seed(seed, TRACE_STREAM))?;
    write_file(&out, &trace.to_csv())?;
    s.output("trace", &out);
    s.write_manifest(&manifest_beside(&out))?;
    println!("wrote {} ({} requests)", out.display(), trace.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_spec_forms() {
        assert_eq!("grid:4:5".parse::<GraphSpec>().unwrap(), GraphSpec::Grid { rows: 4, cols: 5, spacing: 50.0, speed: 10.0 });
        let full: GraphSpec = "grid:16:16:25:8".parse().unwrap();
        assert_eq!(full.to_string().parse::<GraphSpec>().unwrap(), full);
        assert_eq!("city.graph".parse::<GraphSpec>().unwrap(), GraphSpec::File("city.graph".into()));
        assert!("grid:4".parse::<GraphSpec>().is_err());
        assert!("grid:a:4".parse::<GraphSpec>().is_err());
    }

    #[test]
    fn synthetic_forms() {
        let s: Synthetic = "rate=0.5,hours=2".parse().unwrap();
        assert_eq!(s, Synthetic { rate: 0.5, duration_s: 7200.0 });
        assert_eq!(s.to_string().parse::<Synthetic>().unwrap(), s);
        assert!("rate=0.5,days=1".parse::<Synthetic>().is_err());
    }

    #[test]
    fn policy_choices() {
        assert_eq!("both".parse::<Policies>().unwrap().list().len(), 2);
        assert_eq!("non_redundant".parse::<Policies>().unwrap().list(), vec![Policy::NonRedundant]);
        assert!("all".parse::<Policies>().is_err());
    }
}
