//! Command-line surface: sampler and GES runs, operator counting, class
//! enumeration, oracle verification and trace summaries.
//!
//! Exit codes: 0 on success, 2 on usage errors, 1 on runtime errors.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use causal_zigzag::ges::{ges_run, GesPhase};
use causal_zigzag::graph::text::{default_names, format_graph, parse_graph};
use causal_zigzag::graph::Cpdag;
use causal_zigzag::ops::count_operators;
use causal_zigzag::sampler::{
    run, summarize, BalancingFunction, Direction, SamplerKind, StopRule, Trace,
};
use causal_zigzag::score::{DataMatrix, ScoreCache, TargetDistribution};
use causal_zigzag::synth::{linear_gaussian, SyntheticSpec};

#[derive(Parser)]
#[command(
    name = "causal-zigzag",
    version,
    about = "Continuous-time samplers over Markov equivalence classes of DAGs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sampler and write a JSONL trace per chain.
    Sample(SampleArgs),
    /// Run greedy equivalence search and write the trajectory as JSONL.
    Ges(GesArgs),
    /// Count the locally valid operators of a graph file.
    Count {
        /// Graph in the text format (a -> b / a -- b / vertex lines).
        graph: PathBuf,
    },
    /// Enumerate all Markov equivalence classes on n <= 5 vertices.
    Enumerate {
        n: usize,
    },
    /// Run the oracle comparisons and print a JSON report.
    Verify {
        /// Largest vertex count of the exhaustive comparisons (<= 5).
        #[arg(long, default_value_t = 4)]
        max_n: usize,
    },
    /// Post-process a trace: time-weighted occupation and edge series.
    Summarize(SummarizeArgs),
}

#[derive(Args)]
struct DataArgs {
    /// CSV with a header row of variable names and numeric rows.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Generate a synthetic linear-Gaussian dataset with this many variables.
    #[arg(long)]
    synthetic_vars: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    synthetic_samples: usize,
    #[arg(long, default_value_t = 0.3)]
    synthetic_edge_prob: f64,
    #[arg(long, default_value_t = 0)]
    synthetic_seed: u64,
}

#[derive(Args)]
struct SampleArgs {
    /// Sampler kind: zigzag or zanella.
    #[arg(long, default_value = "zigzag")]
    kind: String,
    /// Target the uniform distribution over CPDAGs (needs --n or --start).
    #[arg(long)]
    uniform: bool,
    #[command(flatten)]
    data: DataArgs,
    /// Vertex count for uniform runs without a start graph.
    #[arg(long)]
    n: Option<usize>,
    /// Start graph file (default: the empty graph).
    #[arg(long)]
    start: Option<PathBuf>,
    /// Start direction, +1 (inserting) or -1 (deleting).
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    direction: i8,
    /// Coldness of scored targets.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// BIC penalty multiplier.
    #[arg(long, default_value_t = 1.0)]
    penalty: f64,
    /// Balancing function: sqrt, min1 or ratio.
    #[arg(long, default_value = "sqrt")]
    g: String,
    /// Stop after this many jumps (exactly one of --jumps/--max-time).
    #[arg(long)]
    jumps: Option<u64>,
    /// Stop at this simulated time (exactly one of --jumps/--max-time).
    #[arg(long)]
    max_time: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Serialize the full graph every k-th event.
    #[arg(long, default_value_t = 100)]
    stride: u64,
    /// Number of independent chains (seeds seed, seed+1, ...).
    #[arg(long, default_value_t = 1)]
    chains: u64,
    /// Output trace path; chain i writes to `<out>.chain<i>` for chains > 1.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GesArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 1.0)]
    penalty: f64,
    /// Start graph file (default: the empty graph).
    #[arg(long)]
    start: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SummarizeArgs {
    trace: PathBuf,
    /// Number of top-occupation states to report.
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Fraction of total time discarded as burn-in.
    #[arg(long, default_value_t = 0.5)]
    burn_in: f64,
    /// Maximum number of edge-series points.
    #[arg(long, default_value_t = 1000)]
    max_points: usize,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<causal_zigzag::Error> for Failure {
    fn from(e: causal_zigzag::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Sample(args) => cmd_sample(args)?,
        Command::Ges(args) => cmd_ges(args)?,
        Command::Count { graph } => cmd_count(&graph)?,
        Command::Enumerate { n } => cmd_enumerate(n)?,
        Command::Verify { max_n } => return cmd_verify(max_n),
        Command::Summarize(args) => cmd_summarize(args)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn load_graph(path: &Path) -> Result<(Cpdag, Vec<String>), Failure> {
    let text = std::fs::read_to_string(path)?;
    let (pdag, names) = parse_graph(&text)?;
    let g = Cpdag::try_new(pdag)
        .map_err(|_| Failure::Runtime(format!("{}: not a completed CPDAG", path.display())))?;
    Ok((g, names))
}

/// Re-indexes a graph parsed from a file (vertices in first-appearance
/// order) onto the data's variable order, matching by name.
fn align_to_names(
    g: &Cpdag,
    from_names: &[String],
    to_names: &[String],
) -> Result<Cpdag, Failure> {
    if from_names.len() != to_names.len() {
        return Err(usage(format!(
            "start graph has {} vertices but the data has {} variables",
            from_names.len(),
            to_names.len()
        )));
    }
    let index: std::collections::HashMap<&str, usize> = to_names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let perm: Vec<usize> = from_names
        .iter()
        .map(|n| {
            index.get(n.as_str()).copied().ok_or_else(|| {
                usage(format!("start graph vertex `{n}` is not a data variable"))
            })
        })
        .collect::<Result<_, _>>()?;
    let mut out = causal_zigzag::graph::Pdag::new(to_names.len());
    for u in 0..g.n() {
        for &v in g.undirected_of(u) {
            if u < v {
                out.add_undirected(perm[u], perm[v])?;
            }
        }
        for &v in g.children_of(u) {
            out.add_directed(perm[u], perm[v])?;
        }
    }
    Cpdag::try_new(out).map_err(Failure::from)
}

fn load_data(args: &DataArgs) -> Result<Option<Arc<DataMatrix>>, Failure> {
    match (&args.csv, args.synthetic_vars) {
        (Some(_), Some(_)) => Err(usage("choose either --csv or --synthetic-vars, not both")),
        (Some(path), None) => {
            let file = File::open(path)?;
            let data = DataMatrix::from_csv(BufReader::new(file))?;
            if !data.bic_well_posed() {
                eprintln!(
                    "warning: {} observations for {} variables; the BIC needs more samples than variables",
                    data.n_samples(),
                    data.p()
                );
            }
            Ok(Some(Arc::new(data)))
        }
        (None, Some(vars)) => {
            let spec = SyntheticSpec {
                vars,
                samples: args.synthetic_samples,
                edge_prob: args.synthetic_edge_prob,
                seed: args.synthetic_seed,
                ..Default::default()
            };
            Ok(Some(Arc::new(linear_gaussian(&spec).data)))
        }
        (None, None) => Ok(None),
    }
}

fn cmd_sample(args: SampleArgs) -> Result<(), Failure> {
    let kind = SamplerKind::from_name(&args.kind)?;
    let g_fn = BalancingFunction::from_name(&args.g)?;
    let direction = Direction::from_i8(args.direction)?;
    let stop = match (args.jumps, args.max_time) {
        (Some(j), None) => StopRule::jumps(j),
        (None, Some(t)) if t > 0.0 => StopRule::time(t),
        (None, Some(_)) => return Err(usage("--max-time must be positive")),
        _ => return Err(usage("exactly one of --jumps or --max-time is required")),
    };
    if args.beta <= 0.0 {
        return Err(usage("--beta must be positive"));
    }
    if args.penalty <= 0.0 {
        return Err(usage("--penalty must be positive"));
    }
    if args.chains == 0 {
        return Err(usage("--chains must be at least 1"));
    }

    let data = load_data(&args.data)?;
    if args.uniform == data.is_some() {
        return Err(usage(
            "choose exactly one target: --uniform, or data via --csv/--synthetic-vars",
        ));
    }

    let (start, names) = match (&args.start, &data) {
        (Some(path), Some(d)) => {
            let (g, names) = load_graph(path)?;
            let aligned = align_to_names(&g, &names, d.names())?;
            (aligned, d.names().to_vec())
        }
        (Some(path), None) => load_graph(path)?,
        (None, Some(d)) => (Cpdag::empty(d.p()), d.names().to_vec()),
        (None, None) => {
            let n = args
                .n
                .ok_or_else(|| usage("--uniform without --start needs --n"))?;
            (Cpdag::empty(n), default_names(n))
        }
    };

    let target = match &data {
        None => TargetDistribution::Uniform,
        Some(d) => TargetDistribution::bic(d.clone(), args.penalty, args.beta),
    };

    let outputs: Vec<PathBuf> = (0..args.chains)
        .map(|i| chain_path(&args.out, i, args.chains))
        .collect();
    let results: Vec<Result<(u64, usize, f64), Failure>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..args.chains)
            .map(|i| {
                let target = target.clone();
                let start = start.clone();
                let names = names.clone();
                let out = outputs[i as usize].clone();
                scope.spawn(move || -> Result<(u64, usize, f64), Failure> {
                    let trace = run(
                        kind,
                        start,
                        direction,
                        target,
                        g_fn,
                        stop,
                        args.seed + i,
                        args.stride,
                        Some(names),
                    )?;
                    let file = File::create(&out)?;
                    let mut w = BufWriter::new(file);
                    trace.write_jsonl(&mut w)?;
                    w.flush()?;
                    let last = trace.events.last().expect("trace has an init event");
                    Ok((trace.events.len() as u64 - 1, last.edges, trace.total_time))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("chain thread"))
            .collect()
    });
    for (i, result) in results.into_iter().enumerate() {
        let (jumps, edges, total) = result?;
        println!(
            "chain {i}: {jumps} jumps, final edge count {edges}, total time {total:.6}, trace {}",
            outputs[i].display()
        );
    }
    Ok(())
}

fn chain_path(base: &Path, i: u64, chains: u64) -> PathBuf {
    if chains == 1 {
        return base.to_path_buf();
    }
    match base.extension() {
        Some(ext) => {
            let stem = base.with_extension("");
            let mut name = stem.as_os_str().to_os_string();
            name.push(format!(".chain{i}."));
            name.push(ext);
            PathBuf::from(name)
        }
        None => {
            let mut name = base.as_os_str().to_os_string();
            name.push(format!(".chain{i}"));
            PathBuf::from(name)
        }
    }
}

fn cmd_ges(args: GesArgs) -> Result<(), Failure> {
    let data = load_data(&args.data)?
        .ok_or_else(|| usage("ges needs data via --csv or --synthetic-vars"))?;
    if args.penalty <= 0.0 {
        return Err(usage("--penalty must be positive"));
    }
    let start = match &args.start {
        Some(path) => {
            let (g, names) = load_graph(path)?;
            Some(align_to_names(&g, &names, data.names())?)
        }
        None => None,
    };
    let mut cache = ScoreCache::new();
    let traj = ges_run(data.clone(), args.penalty, start, &mut cache)?;
    let names = data.names();

    let file = File::create(&args.out)?;
    let mut w = BufWriter::new(file);
    writeln!(
        w,
        "{}",
        json!({
            "type": "header",
            "mode": "ges",
            "n": data.p(),
            "penalty": args.penalty,
            "names": names,
        })
    )?;
    for (i, step) in traj.steps.iter().enumerate() {
        writeln!(
            w,
            "{}",
            json!({
                "t": i as f64,
                "kind": if step.op.is_insert() { "insert" } else { "delete" },
                "phase": match step.phase { GesPhase::Forward => "forward", GesPhase::Backward => "backward" },
                "x": names[step.op.x()],
                "y": names[step.op.y()],
                "set": step.op.set().iter().map(|&v| names[v].clone()).collect::<Vec<_>>(),
                "delta": step.delta,
                "edges": step.graph.edge_count(),
                "graph": format_graph(step.graph.as_pdag(), Some(names)),
            })
        )?;
    }
    writeln!(
        w,
        "{}",
        json!({"kind": "end", "t": traj.steps.len() as f64, "final_score": traj.final_score})
    )?;
    w.flush()?;
    println!(
        "ges: {} steps, final score {:.6}, final edge count {}, trajectory {}",
        traj.steps.len(),
        traj.final_score,
        traj.result().edge_count(),
        args.out.display()
    );
    Ok(())
}

fn cmd_count(path: &Path) -> Result<(), Failure> {
    let (g, names) = load_graph(path)?;
    let counts = count_operators(&g);
    let pairs: Vec<serde_json::Value> = counts
        .pairs
        .iter()
        .map(|p| {
            json!({
                "x": names[p.x],
                "y": names[p.y],
                "inserts": p.inserts.to_string(),
                "deletes": p.deletes.to_string(),
            })
        })
        .collect();
    let report = json!({
        "n": g.n(),
        "edges": g.edge_count(),
        "insert_total": counts.insert_total.to_string(),
        "delete_total": counts.delete_total.to_string(),
        "total": counts.total().to_string(),
        "pairs": pairs,
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("json"));
    Ok(())
}

fn cmd_enumerate(n: usize) -> Result<(), Failure> {
    let catalog = causal_zigzag_oracle::enumerate_mecs(n)?;
    let mut size_histogram: std::collections::BTreeMap<usize, usize> = Default::default();
    for &s in &catalog.class_sizes {
        *size_histogram.entry(s).or_default() += 1;
    }
    let report = json!({
        "n": n,
        "dags": catalog.dag_count,
        "classes": catalog.class_count(),
        "class_size_histogram": size_histogram
            .into_iter()
            .map(|(size, count)| json!({"class_size": size, "classes": count}))
            .collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("json"));
    Ok(())
}

fn cmd_verify(max_n: usize) -> Result<ExitCode, Failure> {
    let report = causal_zigzag_oracle::verification_report(max_n)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("json"));
    if report["ok"] == json!(true) {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn cmd_summarize(args: SummarizeArgs) -> Result<(), Failure> {
    if !(0.0..1.0).contains(&args.burn_in) {
        return Err(usage("--burn-in must lie in [0, 1)"));
    }
    let file = File::open(&args.trace)?;
    let trace = Trace::read_jsonl(BufReader::new(file))?;
    let summary = summarize(&trace, args.burn_in, args.top, args.max_points);
    let report = json!({
        "total_time": summary.total_time,
        "burn_in_time": summary.burn_in_time,
        "jumps": summary.jumps,
        "final_edges": summary.final_edges,
        "known_fraction": summary.known_fraction,
        "top": summary
            .top
            .iter()
            .map(|(g, occ)| json!({"occupation": occ, "graph": g}))
            .collect::<Vec<_>>(),
        "edge_series": summary
            .edge_series
            .iter()
            .map(|(t, e)| json!([t, e]))
            .collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("json"));
    Ok(())
}
