//! Trace recording, JSONL serialization and post-processing.
//!
//! A trace file is one JSON object per line: a header, one event per state
//! entered (the first carries kind `init`), and a closing `end` line with
//! the total simulated time, so the last state's occupation interval is
//! well defined.

use std::io::{BufRead, Write};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::text::format_graph;
use crate::ops::Operator;
use crate::sampler::{BalancingFunction, Chain, SamplerKind};
use crate::score::TargetDistribution;

pub(crate) fn target_label(target: &TargetDistribution) -> &'static str {
    match target {
        TargetDistribution::Uniform => "uniform",
        TargetDistribution::Scored {
            scorer: crate::score::Scorer::Bic { .. },
            ..
        } => "bic",
        TargetDistribution::Scored { .. } => "custom",
    }
}

#[derive(Clone, Debug)]
pub struct TraceHeader {
    pub n: usize,
    pub kind: SamplerKind,
    pub target: String,
    pub g_fn: BalancingFunction,
    pub beta: f64,
    pub penalty: f64,
    pub seed: u64,
    pub stride: u64,
    pub names: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TraceEventKind {
    Init,
    Insert,
    Delete,
    Turn,
}

impl TraceEventKind {
    pub(crate) fn from_operator(op: &Operator) -> Self {
        if op.is_insert() {
            TraceEventKind::Insert
        } else {
            TraceEventKind::Delete
        }
    }

    fn label(self) -> &'static str {
        match self {
            TraceEventKind::Init => "init",
            TraceEventKind::Insert => "insert",
            TraceEventKind::Delete => "delete",
            TraceEventKind::Turn => "turn",
        }
    }
}

/// One state entry: the jump time at which the state was entered, what got
/// there, and summary statistics of the state.
#[derive(Clone, Debug)]
pub struct TraceEvent {
    pub t: f64,
    pub kind: TraceEventKind,
    /// Operator endpoints and set, with the header's vertex names.
    pub x: Option<String>,
    pub y: Option<String>,
    pub set: Option<Vec<String>>,
    pub edges: usize,
    pub logscore: f64,
    pub dir: i8,
    /// Full graph in the text format, at the snapshot stride and at the
    /// final event.
    pub graph: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub header: TraceHeader,
    pub events: Vec<TraceEvent>,
    pub total_time: f64,
}

impl Trace {
    pub(crate) fn new(header: TraceHeader) -> Trace {
        Trace {
            header,
            events: Vec::new(),
            total_time: 0.0,
        }
    }

    pub(crate) fn record(
        &mut self,
        chain: &Chain,
        kind: TraceEventKind,
        op: Option<&Operator>,
        snapshot: bool,
    ) {
        let names = &self.header.names;
        let (x, y, set) = match op {
            Some(op) => (
                Some(names[op.x()].clone()),
                Some(names[op.y()].clone()),
                Some(op.set().iter().map(|&v| names[v].clone()).collect()),
            ),
            None => (None, None, None),
        };
        let state = chain.state();
        let event = TraceEvent {
            t: chain.time(),
            kind,
            x,
            y,
            set,
            edges: state.graph.edge_count(),
            logscore: chain.log_mass(),
            dir: state.direction.as_i8(),
            graph: snapshot.then(|| format_graph(state.graph.as_pdag(), Some(names))),
        };
        self.events.push(event);
        self.total_time = chain.time();
    }

    /// The final event always carries a graph snapshot; the chain still sits
    /// in that state when a run stops.
    pub(crate) fn ensure_final_snapshot(&mut self, chain: &Chain) {
        if let Some(last) = self.events.last_mut() {
            if last.graph.is_none() {
                last.graph = Some(format_graph(
                    chain.state().graph.as_pdag(),
                    Some(&self.header.names),
                ));
            }
        }
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        let h = &self.header;
        let header = json!({
            "type": "header",
            "n": h.n,
            "kind": h.kind.name(),
            "target": h.target,
            "g": h.g_fn.name(),
            "beta": h.beta,
            "penalty": h.penalty,
            "seed": h.seed,
            "stride": h.stride,
            "names": h.names,
        });
        writeln!(w, "{header}")?;
        for e in &self.events {
            let mut obj = json!({
                "t": e.t,
                "kind": e.kind.label(),
                "edges": e.edges,
                "logscore": e.logscore,
                "dir": e.dir,
            });
            let map = obj.as_object_mut().expect("object");
            if let (Some(x), Some(y), Some(set)) = (&e.x, &e.y, &e.set) {
                map.insert("x".into(), json!(x));
                map.insert("y".into(), json!(y));
                map.insert("set".into(), json!(set));
            }
            if let Some(g) = &e.graph {
                map.insert("graph".into(), json!(g));
            }
            writeln!(w, "{obj}")?;
        }
        writeln!(w, "{}", json!({"kind": "end", "t": self.total_time}))?;
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Trace> {
        let mut lines = r.lines();
        let header_line = lines
            .next()
            .ok_or_else(|| Error::Data("empty trace file".into()))??;
        let h: Value = serde_json::from_str(&header_line)
            .map_err(|e| Error::Data(format!("trace header: {e}")))?;
        let get_str = |v: &Value, k: &str| -> Result<String> {
            v.get(k)
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| Error::Data(format!("trace header misses `{k}`")))
        };
        let header = TraceHeader {
            n: h.get("n").and_then(Value::as_u64).unwrap_or(0) as usize,
            kind: SamplerKind::from_name(&get_str(&h, "kind")?)?,
            target: get_str(&h, "target")?,
            g_fn: BalancingFunction::from_name(&get_str(&h, "g")?)?,
            beta: h.get("beta").and_then(Value::as_f64).unwrap_or(0.0),
            penalty: h.get("penalty").and_then(Value::as_f64).unwrap_or(0.0),
            seed: h.get("seed").and_then(Value::as_u64).unwrap_or(0),
            stride: h.get("stride").and_then(Value::as_u64).unwrap_or(1),
            names: h
                .get("names")
                .and_then(Value::as_array)
                .map(|a| {
                    a.iter()
                        .filter_map(Value::as_str)
                        .map(str::to_string)
                        .collect()
                })
                .unwrap_or_default(),
        };
        let mut events = Vec::new();
        let mut total_time = None;
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let v: Value = serde_json::from_str(&line)
                .map_err(|e| Error::Data(format!("trace line {}: {e}", i + 2)))?;
            let kind = v
                .get("kind")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Data(format!("trace line {}: missing kind", i + 2)))?;
            let t = v
                .get("t")
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Data(format!("trace line {}: missing t", i + 2)))?;
            if kind == "end" {
                total_time = Some(t);
                break;
            }
            let kind = match kind {
                "init" => TraceEventKind::Init,
                "insert" => TraceEventKind::Insert,
                "delete" => TraceEventKind::Delete,
                "turn" => TraceEventKind::Turn,
                other => {
                    return Err(Error::Data(format!(
                        "trace line {}: unknown event kind `{other}`",
                        i + 2
                    )))
                }
            };
            events.push(TraceEvent {
                t,
                kind,
                x: v.get("x").and_then(Value::as_str).map(str::to_string),
                y: v.get("y").and_then(Value::as_str).map(str::to_string),
                set: v.get("set").and_then(Value::as_array).map(|a| {
                    a.iter()
                        .filter_map(Value::as_str)
                        .map(str::to_string)
                        .collect()
                }),
                edges: v.get("edges").and_then(Value::as_u64).unwrap_or(0) as usize,
                logscore: v.get("logscore").and_then(Value::as_f64).unwrap_or(0.0),
                dir: v.get("dir").and_then(Value::as_i64).unwrap_or(1) as i8,
                graph: v.get("graph").and_then(Value::as_str).map(str::to_string),
            });
        }
        let total_time = total_time
            .ok_or_else(|| Error::Data("trace file misses the closing end line".into()))?;
        Ok(Trace {
            header,
            events,
            total_time,
        })
    }
}

/// Earliest recorded time at which the visited state satisfies `pred`
/// (the initial state counts), or `None`.
pub fn first_hitting_time<F: Fn(&TraceEvent) -> bool>(trace: &Trace, pred: F) -> Option<f64> {
    trace.events.iter().find(|e| pred(e)).map(|e| e.t)
}

/// Time-weighted occupation summary of a trace.
#[derive(Clone, Debug)]
pub struct TraceSummary {
    pub total_time: f64,
    pub burn_in_time: f64,
    /// Post-burn-in occupation fractions of the top-k states, keyed by the
    /// graph snapshot text. Only events carrying a snapshot contribute, so
    /// exact per-state summaries need stride 1.
    pub top: Vec<(String, f64)>,
    /// Fraction of post-burn-in time attributable to events with snapshots.
    pub known_fraction: f64,
    /// (time, edge count) series, downsampled to at most `max_points`.
    pub edge_series: Vec<(f64, usize)>,
    pub jumps: usize,
    pub final_edges: usize,
}

/// Summarizes a trace: every visited state weighted by its holding time,
/// the first `burn_in` fraction of total simulated time discarded.
pub fn summarize(trace: &Trace, burn_in: f64, top_k: usize, max_points: usize) -> TraceSummary {
    let total = trace.total_time;
    let burn = total * burn_in.clamp(0.0, 1.0);
    let mut weights: std::collections::HashMap<&str, f64> = std::collections::HashMap::new();
    let mut known = 0.0;
    let mut post = 0.0;
    for (i, e) in trace.events.iter().enumerate() {
        let end = trace
            .events
            .get(i + 1)
            .map(|n| n.t)
            .unwrap_or(total)
            .min(total);
        let start = e.t.max(burn);
        if end <= start {
            continue;
        }
        let w = end - start;
        post += w;
        if let Some(g) = &e.graph {
            known += w;
            *weights.entry(g.as_str()).or_default() += w;
        }
    }
    let mut top: Vec<(String, f64)> = weights
        .into_iter()
        .map(|(g, w)| (g.to_string(), if post > 0.0 { w / post } else { 0.0 }))
        .collect();
    top.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    top.truncate(top_k);

    let stride = trace.events.len().div_ceil(max_points.max(1)).max(1);
    let mut edge_series: Vec<(f64, usize)> = trace
        .events
        .iter()
        .step_by(stride)
        .map(|e| (e.t, e.edges))
        .collect();
    if let Some(last) = trace.events.last() {
        if edge_series.last().map(|p| p.0) != Some(last.t) {
            edge_series.push((last.t, last.edges));
        }
    }
    TraceSummary {
        total_time: total,
        burn_in_time: burn,
        top,
        known_fraction: if post > 0.0 { known / post } else { 0.0 },
        edge_series,
        jumps: trace.events.len().saturating_sub(1),
        final_edges: trace.events.last().map(|e| e.edges).unwrap_or(0),
    }
}
