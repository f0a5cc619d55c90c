//! Partially directed graphs and the primitive algorithms on them:
//! adjacency queries, chain components, maximum cardinality search,
//! consistent extensions and DAG-to-CPDAG completion.
//!
//! Vertices are dense indices `0..n`; external names are mapped at the
//! CLI boundary (see [`text`]). Graph values are immutable from the
//! perspective of shared use: mutation happens on exclusively owned
//! copies before they are blessed as [`Dag`] or [`Cpdag`].

pub mod random;
pub mod text;

use std::collections::BTreeSet;

use crate::error::{Error, Result};

pub type Vertex = usize;

/// A partially directed graph without self-loops.
///
/// Every vertex keeps three sorted, pairwise disjoint index sets:
/// undirected neighbours, parents and children. The symmetric halves of
/// undirected edges and the parent/child halves of directed edges are
/// maintained together by the mutators.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Pdag {
    ne: Vec<Vec<Vertex>>,
    pa: Vec<Vec<Vertex>>,
    ch: Vec<Vec<Vertex>>,
}

fn sorted_insert(v: &mut Vec<Vertex>, x: Vertex) -> bool {
    match v.binary_search(&x) {
        Ok(_) => false,
        Err(i) => {
            v.insert(i, x);
            true
        }
    }
}

fn sorted_remove(v: &mut Vec<Vertex>, x: Vertex) -> bool {
    match v.binary_search(&x) {
        Ok(i) => {
            v.remove(i);
            true
        }
        Err(_) => false,
    }
}

impl Pdag {
    pub fn new(n: usize) -> Self {
        Pdag {
            ne: vec![Vec::new(); n],
            pa: vec![Vec::new(); n],
            ch: vec![Vec::new(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.ne.len()
    }

    /// Total number of edges, undirected and directed.
    pub fn edge_count(&self) -> usize {
        let und: usize = self.ne.iter().map(|s| s.len()).sum();
        let dir: usize = self.pa.iter().map(|s| s.len()).sum();
        und / 2 + dir
    }

    pub fn undirected_edge_count(&self) -> usize {
        self.ne.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    /// Undirected neighbours of `v`, sorted.
    pub fn undirected_of(&self, v: Vertex) -> &[Vertex] {
        &self.ne[v]
    }

    /// Parents of `v`, sorted.
    pub fn parents_of(&self, v: Vertex) -> &[Vertex] {
        &self.pa[v]
    }

    /// Children of `v`, sorted.
    pub fn children_of(&self, v: Vertex) -> &[Vertex] {
        &self.ch[v]
    }

    pub fn has_undirected(&self, u: Vertex, v: Vertex) -> bool {
        self.ne[u].binary_search(&v).is_ok()
    }

    /// True iff the directed edge `u -> v` exists.
    pub fn has_directed(&self, u: Vertex, v: Vertex) -> bool {
        self.ch[u].binary_search(&v).is_ok()
    }

    pub fn is_adjacent(&self, u: Vertex, v: Vertex) -> bool {
        self.has_undirected(u, v) || self.has_directed(u, v) || self.has_directed(v, u)
    }

    fn check_pair(&self, u: Vertex, v: Vertex) -> Result<()> {
        let n = self.n();
        if u >= n {
            return Err(Error::VertexOutOfRange { v: u, n });
        }
        if v >= n {
            return Err(Error::VertexOutOfRange { v, n });
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        Ok(())
    }

    pub fn add_undirected(&mut self, u: Vertex, v: Vertex) -> Result<()> {
        self.check_pair(u, v)?;
        if self.is_adjacent(u, v) {
            return Err(Error::DuplicateEdge(u, v));
        }
        sorted_insert(&mut self.ne[u], v);
        sorted_insert(&mut self.ne[v], u);
        Ok(())
    }

    pub fn add_directed(&mut self, u: Vertex, v: Vertex) -> Result<()> {
        self.check_pair(u, v)?;
        if self.is_adjacent(u, v) {
            return Err(Error::DuplicateEdge(u, v));
        }
        sorted_insert(&mut self.ch[u], v);
        sorted_insert(&mut self.pa[v], u);
        Ok(())
    }

    /// Removes the edge between `u` and `v`, whatever its type.
    pub fn remove_between(&mut self, u: Vertex, v: Vertex) -> Result<()> {
        self.check_pair(u, v)?;
        if sorted_remove(&mut self.ne[u], v) {
            sorted_remove(&mut self.ne[v], u);
            return Ok(());
        }
        if sorted_remove(&mut self.ch[u], v) {
            sorted_remove(&mut self.pa[v], u);
            return Ok(());
        }
        if sorted_remove(&mut self.ch[v], u) {
            sorted_remove(&mut self.pa[u], v);
            return Ok(());
        }
        Err(Error::NoSuchEdge(u, v))
    }

    /// Replaces the undirected edge `u - v` by `u -> v`.
    pub fn orient(&mut self, u: Vertex, v: Vertex) -> Result<()> {
        self.check_pair(u, v)?;
        if !self.has_undirected(u, v) {
            return Err(Error::NoSuchEdge(u, v));
        }
        sorted_remove(&mut self.ne[u], v);
        sorted_remove(&mut self.ne[v], u);
        sorted_insert(&mut self.ch[u], v);
        sorted_insert(&mut self.pa[v], u);
        Ok(())
    }

    /// `NA_x(y)`: undirected neighbours of `y` adjacent to `x`, sorted.
    ///
    /// Range-checked variant of the internal `na_set` query.
    pub fn neighbors_adjacent(&self, x: Vertex, y: Vertex) -> Result<Vec<Vertex>> {
        self.check_pair(x, y)?;
        Ok(self.na_set(x, y))
    }

    pub(crate) fn na_set(&self, x: Vertex, y: Vertex) -> Vec<Vertex> {
        self.ne[y]
            .iter()
            .copied()
            .filter(|&t| t != x && self.is_adjacent(t, x))
            .collect()
    }

    /// Pairwise adjacency of `set` (any edge type).
    pub fn is_clique(&self, set: &[Vertex]) -> bool {
        for (i, &u) in set.iter().enumerate() {
            for &v in &set[i + 1..] {
                if !self.is_adjacent(u, v) {
                    return false;
                }
            }
        }
        true
    }

    /// Connected components of the undirected subgraph, each sorted,
    /// ordered by smallest member.
    pub fn chain_components(&self) -> Vec<Vec<Vertex>> {
        let n = self.n();
        let mut comp = vec![usize::MAX; n];
        let mut out: Vec<Vec<Vertex>> = Vec::new();
        let mut stack = Vec::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let cid = out.len();
            comp[s] = cid;
            out.push(vec![s]);
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &w in &self.ne[u] {
                    if comp[w] == usize::MAX {
                        comp[w] = cid;
                        out[cid].push(w);
                        stack.push(w);
                    }
                }
            }
            out[cid].sort_unstable();
        }
        out
    }

    /// V-structures `x -> y <- z` with `x`, `z` nonadjacent, as `(x, y, z)`
    /// with `x < z`.
    pub fn v_structures(&self) -> BTreeSet<(Vertex, Vertex, Vertex)> {
        let mut out = BTreeSet::new();
        for y in 0..self.n() {
            let pa = &self.pa[y];
            for (i, &x) in pa.iter().enumerate() {
                for &z in &pa[i + 1..] {
                    if !self.is_adjacent(x, z) {
                        out.insert((x, y, z));
                    }
                }
            }
        }
        out
    }

    /// Adjacent pairs `(u, v)` with `u < v`, ignoring orientation.
    pub fn skeleton(&self) -> BTreeSet<(Vertex, Vertex)> {
        let mut out = BTreeSet::new();
        for u in 0..self.n() {
            for &v in &self.ne[u] {
                if u < v {
                    out.insert((u, v));
                }
            }
            for &v in &self.ch[u] {
                out.insert((u.min(v), u.max(v)));
            }
        }
        out
    }

    /// A topological order of the directed part (undirected edges ignored),
    /// smallest index first among ready vertices.
    pub fn topological_order(&self) -> Result<Vec<Vertex>> {
        let n = self.n();
        let mut indeg: Vec<usize> = (0..n).map(|v| self.pa[v].len()).collect();
        let mut ready: BTreeSet<Vertex> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(&v) = ready.iter().next() {
            ready.remove(&v);
            order.push(v);
            for &c in &self.ch[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err(Error::DirectedCycle)
        }
    }

    pub fn directed_part_is_acyclic(&self) -> bool {
        self.topological_order().is_ok()
    }
}

impl std::fmt::Debug for Pdag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Pdag(n={}", self.n())?;
        for u in 0..self.n() {
            for &v in &self.ne[u] {
                if u < v {
                    write!(f, ", {u}-{v}")?;
                }
            }
            for &v in &self.ch[u] {
                write!(f, ", {u}->{v}")?;
            }
        }
        write!(f, ")")
    }
}

/// A directed acyclic graph. Constructed by [`Dag::try_new`], which verifies
/// that every edge is directed and the graph is acyclic.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Dag(Pdag);

impl Dag {
    pub fn try_new(g: Pdag) -> Result<Self> {
        for v in 0..g.n() {
            if !g.undirected_of(v).is_empty() {
                return Err(Error::UndirectedEdges(v));
            }
        }
        g.topological_order()?;
        Ok(Dag(g))
    }

    pub fn empty(n: usize) -> Self {
        Dag(Pdag::new(n))
    }

    pub fn as_pdag(&self) -> &Pdag {
        &self.0
    }

    pub fn into_pdag(self) -> Pdag {
        self.0
    }

    /// Copy with the directed edge `x -> y` added. The caller guarantees the
    /// result is acyclic; debug builds verify it.
    pub(crate) fn with_edge_added(&self, x: Vertex, y: Vertex) -> Dag {
        let mut p = self.0.clone();
        p.add_directed(x, y).expect("edge insertion on DAG");
        debug_assert!(p.directed_part_is_acyclic());
        Dag(p)
    }

    /// Copy with the directed edge `x -> y` removed.
    pub(crate) fn with_edge_removed(&self, x: Vertex, y: Vertex) -> Dag {
        let mut p = self.0.clone();
        p.remove_between(x, y).expect("edge removal on DAG");
        Dag(p)
    }
}

impl std::ops::Deref for Dag {
    type Target = Pdag;
    fn deref(&self) -> &Pdag {
        &self.0
    }
}

/// A completed PDAG: the canonical representative of a Markov equivalence
/// class. Directed edges are exactly those oriented identically in every
/// member of the class; the undirected part of each chain component is
/// chordal.
///
/// [`Cpdag::try_new`] verifies completedness by extending and re-completing;
/// [`dag_to_cpdag`] produces completed graphs by construction. Structural
/// equality of two `Cpdag`s therefore coincides with equality of the classes
/// they represent.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Cpdag(Pdag);

impl Cpdag {
    pub fn empty(n: usize) -> Self {
        Cpdag(Pdag::new(n))
    }

    /// Validates that `g` is completed: it must equal the completion of one
    /// of its own consistent extensions.
    pub fn try_new(g: Pdag) -> Result<Self> {
        let candidate = Cpdag(g);
        let ext = extend_via_mcs(&candidate.0, &[]).map_err(|_| Error::NotCompleted)?;
        let completed = dag_to_cpdag(&ext);
        if completed.0 == candidate.0 {
            Ok(candidate)
        } else {
            Err(Error::NotCompleted)
        }
    }

    pub fn as_pdag(&self) -> &Pdag {
        &self.0
    }

    pub fn into_pdag(self) -> Pdag {
        self.0
    }
}

impl std::ops::Deref for Cpdag {
    type Target = Pdag;
    fn deref(&self) -> &Pdag {
        &self.0
    }
}

/// True iff `g1` and `g2` have identical skeletons and v-structure sets,
/// i.e. they belong to the same Markov equivalence class.
pub fn same_mec(g1: &Dag, g2: &Dag) -> bool {
    assert_eq!(g1.n(), g2.n(), "same_mec requires equal vertex counts");
    g1.skeleton() == g2.skeleton() && g1.v_structures() == g2.v_structures()
}

// ---------------------------------------------------------------------------
// Maximum cardinality search and consistent extensions
// ---------------------------------------------------------------------------

/// MCS visit order over the undirected subgraph, visiting `prefix` first in
/// the given order and then proceeding by maximum visited-neighbour count
/// with smallest-index tie-breaking. Directed edges are ignored; chain
/// components are traversed one after another.
fn mcs_order(g: &Pdag, prefix: &[Vertex]) -> Vec<Vertex> {
    let n = g.n();
    let mut label = vec![0usize; n];
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    // buckets[l] holds unvisited vertices with l visited neighbours
    let mut buckets: Vec<BTreeSet<Vertex>> = vec![BTreeSet::new(); n + 1];
    buckets[0].extend(0..n);
    let mut high = 0usize;

    let visit = |v: Vertex,
                     label: &mut Vec<usize>,
                     visited: &mut Vec<bool>,
                     buckets: &mut Vec<BTreeSet<Vertex>>,
                     high: &mut usize,
                     order: &mut Vec<Vertex>| {
        buckets[label[v]].remove(&v);
        visited[v] = true;
        order.push(v);
        for &w in g.undirected_of(v) {
            if !visited[w] {
                buckets[label[w]].remove(&w);
                label[w] += 1;
                buckets[label[w]].insert(w);
                if label[w] > *high {
                    *high = label[w];
                }
            }
        }
    };

    for &v in prefix {
        visit(v, &mut label, &mut visited, &mut buckets, &mut high, &mut order);
    }
    while order.len() < n {
        while buckets[high].is_empty() {
            high -= 1;
        }
        let v = *buckets[high].iter().next().expect("nonempty bucket");
        visit(v, &mut label, &mut visited, &mut buckets, &mut high, &mut order);
    }
    order
}

/// Linear-time test that the reverse of `order` is a perfect elimination
/// ordering of the undirected subgraph: for each vertex, its earlier-visited
/// neighbours minus the latest one must all be adjacent to that latest one.
pub(crate) fn mcs_order_is_peo(g: &Pdag, order: &[Vertex]) -> bool {
    let n = g.n();
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    for (i, &v) in order.iter().enumerate() {
        let mut latest: Option<Vertex> = None;
        for &w in g.undirected_of(v) {
            if pos[w] < i && latest.is_none_or(|l| pos[w] > pos[l]) {
                latest = Some(w);
            }
        }
        let Some(p) = latest else { continue };
        for &w in g.undirected_of(v) {
            if pos[w] < i && w != p && !g.has_undirected(w, p) {
                return false;
            }
        }
    }
    true
}

fn extend_via_mcs(g: &Pdag, prefix: &[Vertex]) -> Result<Dag> {
    let order = mcs_order(g, prefix);
    let mut pos = vec![0usize; g.n()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut out = g.clone();
    for u in 0..g.n() {
        let und: Vec<Vertex> = g.undirected_of(u).to_vec();
        for v in und {
            if pos[u] < pos[v] {
                out.orient(u, v)?;
            }
        }
    }
    Dag::try_new(out)
}

/// Consistent extension of a CPDAG by maximum cardinality search.
///
/// Returns a DAG with the same skeleton and v-structures as `g`, all
/// directed edges of `g` preserved, and undirected edges oriented from
/// earlier-visited to later-visited in an MCS order that visits
/// `priority_prefix` first (in the given order).
///
/// The prefix must form a clique in the undirected subgraph, which also
/// confines it to a single chain component.
pub fn mcs_extension(g: &Cpdag, priority_prefix: &[Vertex]) -> Result<Dag> {
    for (i, &u) in priority_prefix.iter().enumerate() {
        if u >= g.n() {
            return Err(Error::VertexOutOfRange { v: u, n: g.n() });
        }
        for &v in &priority_prefix[i + 1..] {
            if !g.has_undirected(u, v) {
                return Err(Error::PrefixNotClique);
            }
        }
    }
    debug_assert!(
        mcs_order_is_peo(g.as_pdag(), &mcs_order(g.as_pdag(), priority_prefix)),
        "MCS order of a CPDAG must be a perfect elimination ordering"
    );
    extend_via_mcs(g.as_pdag(), priority_prefix)
}

// ---------------------------------------------------------------------------
// DAG -> CPDAG completion (compelled edge labeling)
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq)]
enum EdgeLabel {
    Unknown,
    Compelled,
    Reversible,
}

/// Completion of a DAG: the CPDAG of its Markov equivalence class.
///
/// An edge `x -> y` stays directed iff it is oriented the same way in every
/// equivalent DAG; all other edges become undirected. Runs in near-linear
/// time via compelled-edge labeling over a fixed edge order.
pub fn dag_to_cpdag(g: &Dag) -> Cpdag {
    let n = g.n();
    let order = g.topological_order().expect("DAG is acyclic");
    let mut pos = vec![0usize; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }

    // Edges (x, y) sorted by destination position ascending, then source
    // position descending.
    let mut edges: Vec<(Vertex, Vertex)> = Vec::with_capacity(g.edge_count());
    for y in 0..n {
        for &x in g.parents_of(y) {
            edges.push((x, y));
        }
    }
    edges.sort_unstable_by(|a, b| (pos[a.1], std::cmp::Reverse(pos[a.0])).cmp(&(pos[b.1], std::cmp::Reverse(pos[b.0]))));

    let mut idx_of = std::collections::HashMap::with_capacity(edges.len());
    for (i, &e) in edges.iter().enumerate() {
        idx_of.insert(e, i);
    }
    // in_edges[y]: indices of edges into y
    let mut in_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &(_, y)) in edges.iter().enumerate() {
        in_edges[y].push(i);
    }

    let mut label = vec![EdgeLabel::Unknown; edges.len()];
    let mut cursor = 0usize;
    loop {
        while cursor < edges.len() && label[cursor] != EdgeLabel::Unknown {
            cursor += 1;
        }
        if cursor == edges.len() {
            break;
        }
        let (x, y) = edges[cursor];

        let mut settled = false;
        for &w in g.parents_of(x) {
            if label[idx_of[&(w, x)]] != EdgeLabel::Compelled {
                continue;
            }
            if !g.has_directed(w, y) {
                // w -> x compelled but w is no parent of y: everything into y
                // is compelled.
                for &e in &in_edges[y] {
                    label[e] = EdgeLabel::Compelled;
                }
                settled = true;
                break;
            } else {
                label[idx_of[&(w, y)]] = EdgeLabel::Compelled;
            }
        }
        if settled {
            continue;
        }

        let exists_external = g.parents_of(y).iter().any(|&z| z != x && !g.has_directed(z, x));
        let assign = if exists_external {
            EdgeLabel::Compelled
        } else {
            EdgeLabel::Reversible
        };
        for &e in &in_edges[y] {
            if label[e] == EdgeLabel::Unknown {
                label[e] = assign;
            }
        }
    }

    let mut out = Pdag::new(n);
    for (i, &(x, y)) in edges.iter().enumerate() {
        match label[i] {
            EdgeLabel::Compelled => out.add_directed(x, y).expect("edge from DAG"),
            EdgeLabel::Reversible => out.add_undirected(x, y).expect("edge from DAG"),
            EdgeLabel::Unknown => unreachable!("all edges labeled"),
        }
    }
    Cpdag(out)
}
