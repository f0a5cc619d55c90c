//! Plain-text graph format.
//!
//! One item per line: `a -> b` for a directed edge, `a -- b` for an
//! undirected edge, a bare token to declare an (isolated) vertex. Anything
//! after `#` is a comment; blank lines are ignored. Vertex names are
//! whitespace-free tokens, indexed in order of first appearance.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::Pdag;

/// Parses the text format into a graph and its vertex names.
pub fn parse_graph(input: &str) -> Result<(Pdag, Vec<String>)> {
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut edges: Vec<(usize, usize, bool, usize)> = Vec::new(); // (u, v, directed, line)

    let intern = |tok: &str, names: &mut Vec<String>, index: &mut HashMap<String, usize>| {
        if let Some(&i) = index.get(tok) {
            i
        } else {
            let i = names.len();
            names.push(tok.to_string());
            index.insert(tok.to_string(), i);
            i
        }
    };

    for (lineno, raw) in input.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            [v] => {
                intern(v, &mut names, &mut index);
            }
            [a, op, b] if *op == "->" || *op == "--" => {
                let u = intern(a, &mut names, &mut index);
                let v = intern(b, &mut names, &mut index);
                edges.push((u, v, *op == "->", lineno + 1));
            }
            _ => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected `a -> b`, `a -- b` or a vertex name, got `{line}`"),
                });
            }
        }
    }

    let mut g = Pdag::new(names.len());
    for (u, v, directed, line) in edges {
        let res = if directed {
            g.add_directed(u, v)
        } else {
            g.add_undirected(u, v)
        };
        res.map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
    }
    Ok((g, names))
}

/// Formats a graph in the text format, using `names` (or `v{i}` when names
/// are not provided). Every vertex is declared on its own line first, so
/// parsing the output reproduces the same vertex indexing.
pub fn format_graph(g: &Pdag, names: Option<&[String]>) -> String {
    let name = |v: usize| -> String {
        match names {
            Some(ns) => ns[v].clone(),
            None => format!("v{v}"),
        }
    };
    let mut out = String::new();
    for v in 0..g.n() {
        out.push_str(&name(v));
        out.push('\n');
    }
    for u in 0..g.n() {
        for &v in g.undirected_of(u) {
            if u < v {
                out.push_str(&format!("{} -- {}\n", name(u), name(v)));
            }
        }
    }
    for u in 0..g.n() {
        for &v in g.children_of(u) {
            out.push_str(&format!("{} -> {}\n", name(u), name(v)));
        }
    }
    out
}

/// Default vertex names `v0..v{n-1}`.
pub fn default_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}
