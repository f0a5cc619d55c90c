//! Counting, listing and uniform sampling of locally valid operators.
//!
//! Per ordered pair `(x, y)`, valid Delete sets correspond to the cliques of
//! the (chordal) undirected graph induced on `NA_x(y)`, and valid Insert
//! sets to `M ∪ C` where `M` is the must-take set forced by semi-directed
//! reachability and `C` ranges over the cliques of the remaining fully
//! connected candidates. Cliques of a chordal graph are counted as
//! `1 + Σ_u 2^{|earlier neighbours of u|}` over a perfect elimination
//! ordering, so counts are exact integers that can exceed machine words.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Cpdag, Pdag, Vertex};
use crate::ops::Operator;

// ---------------------------------------------------------------------------
// Exact operator counts
// ---------------------------------------------------------------------------

/// Exact nonnegative count, kept in a machine word pair while it fits.
///
/// The `Big` variant is only used for values above `u128::MAX`; comparisons
/// rely on that normalization.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Count {
    Small(u128),
    Big(BigUint),
}

impl Count {
    pub const ZERO: Count = Count::Small(0);
    pub const ONE: Count = Count::Small(1);

    pub fn pow2(k: usize) -> Count {
        if k < 128 {
            Count::Small(1u128 << k)
        } else {
            Count::Big(BigUint::from(1u8) << k)
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Count::Small(0))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Count::Small(v) => *v as f64,
            Count::Big(b) => b.to_f64().unwrap_or(f64::INFINITY),
        }
    }

    fn to_big(&self) -> BigUint {
        match self {
            Count::Small(v) => BigUint::from(*v),
            Count::Big(b) => b.clone(),
        }
    }

    fn normalized(b: BigUint) -> Count {
        match b.to_u128() {
            Some(v) => Count::Small(v),
            None => Count::Big(b),
        }
    }

    pub fn add(&self, other: &Count) -> Count {
        match (self, other) {
            (Count::Small(a), Count::Small(b)) => match a.checked_add(*b) {
                Some(s) => Count::Small(s),
                None => Count::Big(BigUint::from(*a) + BigUint::from(*b)),
            },
            _ => Count::Big(self.to_big() + other.to_big()),
        }
    }

    /// `self - other`; the caller guarantees `other <= self`.
    fn sub(&self, other: &Count) -> Count {
        match (self, other) {
            (Count::Small(a), Count::Small(b)) => Count::Small(a - b),
            _ => Count::normalized(self.to_big() - other.to_big()),
        }
    }

    /// Bit `i` of the value.
    fn bit(&self, i: usize) -> bool {
        match self {
            Count::Small(v) => (v >> i) & 1 == 1,
            Count::Big(b) => b.bit(i as u64),
        }
    }
}

impl PartialOrd for Count {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Count {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (Count::Small(a), Count::Small(b)) => a.cmp(b),
            (Count::Small(_), Count::Big(_)) => std::cmp::Ordering::Less,
            (Count::Big(_), Count::Small(_)) => std::cmp::Ordering::Greater,
            (Count::Big(a), Count::Big(b)) => a.cmp(b),
        }
    }
}

impl std::fmt::Display for Count {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Count::Small(v) => write!(f, "{v}"),
            Count::Big(b) => write!(f, "{b}"),
        }
    }
}

/// Uniform draw in `[0, bound)`; `bound > 0`.
fn uniform_below<R: Rng + ?Sized>(bound: &Count, rng: &mut R) -> Count {
    match bound {
        Count::Small(b) => Count::Small(rng.random_range(0..*b)),
        Count::Big(b) => {
            let bits = b.bits();
            let nbytes = bits.div_ceil(8) as usize;
            let top_mask = if bits % 8 == 0 { 0xFF } else { (1u8 << (bits % 8)) - 1 };
            loop {
                let mut buf = vec![0u8; nbytes];
                rng.fill_bytes(&mut buf);
                buf[nbytes - 1] &= top_mask;
                let cand = BigUint::from_bytes_le(&buf);
                if cand < *b {
                    return Count::normalized(cand);
                }
            }
        }
    }
}

/// Numbers of valid operators per ordered vertex pair, with totals.
#[derive(Clone, Debug)]
pub struct OperatorCount {
    /// Pairs with at least one valid operator, in the traversal order of
    /// [`count_operators`].
    pub pairs: Vec<PairCount>,
    pub insert_total: Count,
    pub delete_total: Count,
}

#[derive(Clone, Debug)]
pub struct PairCount {
    pub x: Vertex,
    pub y: Vertex,
    pub inserts: Count,
    pub deletes: Count,
}

impl OperatorCount {
    pub fn total(&self) -> Count {
        self.insert_total.add(&self.delete_total)
    }
}

/// Which operator kinds to consider.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OperatorSide {
    All,
    Inserts,
    Deletes,
}

// ---------------------------------------------------------------------------
// Chordal clique machinery
// ---------------------------------------------------------------------------

/// Perfect elimination structure of the undirected graph induced on
/// `members`: an MCS visit order and, per vertex, its earlier-visited
/// neighbours. Cliques biject onto `{∅} ∪ {(u, S) : S ⊆ earlier(u)}`.
struct CliqueIndex {
    order: Vec<Vertex>,
    earlier: Vec<Vec<Vertex>>,
    count: Count,
}

fn clique_index(g: &Pdag, members: &[Vertex]) -> CliqueIndex {
    let k = members.len();
    let mut weight = vec![0usize; k];
    let mut visited = vec![false; k];
    let idx_of = |v: Vertex| members.binary_search(&v).ok();

    let mut order = Vec::with_capacity(k);
    let mut earlier: Vec<Vec<Vertex>> = Vec::with_capacity(k);
    let mut count = Count::ONE; // the empty clique
    for _ in 0..k {
        let mut pick = usize::MAX;
        for i in 0..k {
            if !visited[i] && (pick == usize::MAX || weight[i] > weight[pick]) {
                pick = i;
            }
        }
        let v = members[pick];
        visited[pick] = true;
        let mut prev: Vec<Vertex> = Vec::with_capacity(weight[pick]);
        for &w in g.undirected_of(v) {
            if let Some(j) = idx_of(w) {
                if visited[j] && w != v {
                    prev.push(w);
                }
            }
        }
        for &w in g.undirected_of(v) {
            if let Some(j) = idx_of(w) {
                if !visited[j] {
                    weight[j] += 1;
                }
            }
        }
        count = count.add(&Count::pow2(prev.len()));
        order.push(v);
        earlier.push(prev);
    }
    CliqueIndex {
        order,
        earlier,
        count,
    }
}

impl CliqueIndex {
    /// The clique with index `idx` in `[0, count)`: index 0 is the empty
    /// clique; the rest are ranked by highest-ordered vertex, then by the
    /// subset bits of its earlier neighbours.
    fn clique_at(&self, idx: &Count) -> Vec<Vertex> {
        if idx.is_zero() {
            return Vec::new();
        }
        let mut rest = idx.sub(&Count::ONE);
        for (u, prev) in self.order.iter().zip(&self.earlier) {
            let block = Count::pow2(prev.len());
            if rest < block {
                let mut clique: Vec<Vertex> =
                    prev.iter().enumerate().filter(|(i, _)| rest.bit(*i)).map(|(_, &w)| w).collect();
                clique.push(*u);
                clique.sort_unstable();
                return clique;
            }
            rest = rest.sub(&block);
        }
        unreachable!("index below total count");
    }
}

/// All cliques (including the empty one) of the undirected graph induced on
/// `members`, in lexicographic order of their sorted vertex sequences. Only
/// cliques are materialized, at cost proportional to their sizes.
fn enumerate_cliques(g: &Pdag, members: &[Vertex]) -> Vec<Vec<Vertex>> {
    let mut out = vec![Vec::new()];
    let mut current = Vec::new();
    fn rec(
        g: &Pdag,
        candidates: &[Vertex],
        current: &mut Vec<Vertex>,
        out: &mut Vec<Vec<Vertex>>,
    ) {
        for (i, &v) in candidates.iter().enumerate() {
            current.push(v);
            out.push(current.clone());
            let next: Vec<Vertex> = candidates[i + 1..]
                .iter()
                .copied()
                .filter(|&w| g.has_undirected(v, w))
                .collect();
            rec(g, &next, current, out);
            current.pop();
        }
    }
    rec(g, members, &mut current, &mut out);
    out
}

/// Number of cliques of a chordal undirected graph, including the empty
/// clique. Errors on directed edges or a non-chordal input.
pub fn count_cliques(g: &Pdag) -> Result<Count> {
    for v in 0..g.n() {
        if !g.parents_of(v).is_empty() {
            return Err(Error::InvalidArgument(
                "count_cliques expects an undirected graph".into(),
            ));
        }
    }
    let members: Vec<Vertex> = (0..g.n()).collect();
    let index = clique_index_checked(g, &members)?;
    Ok(index.count)
}

fn clique_index_checked(g: &Pdag, members: &[Vertex]) -> Result<CliqueIndex> {
    let index = clique_index(g, members);
    // The MCS order of a chordal graph is a reversed perfect elimination
    // ordering; equivalently every `earlier` set is a clique.
    for prev in &index.earlier {
        if !g.is_clique(prev) {
            return Err(Error::NotChordal);
        }
    }
    Ok(index)
}

// ---------------------------------------------------------------------------
// Semi-directed reachability (per destination vertex y)
// ---------------------------------------------------------------------------

/// For a fixed `y`: which vertices are reachable by semi-directed paths that
/// avoid the undirected neighbours of `y` as interior vertices. One row for
/// paths leaving `y` along a directed edge (such paths can never be blocked
/// by a valid Insert set), and one row per undirected neighbour `w`.
struct ReachFromY {
    via_children: Vec<bool>,
    via_neighbor: Vec<(Vertex, Vec<bool>)>,
}

fn semi_reach(g: &Pdag, frontier: &[Vertex], banned: &[bool]) -> Vec<bool> {
    let mut seen = vec![false; g.n()];
    let mut stack: Vec<Vertex> = Vec::new();
    for &s in frontier {
        if !seen[s] {
            seen[s] = true;
            if !banned[s] {
                stack.push(s);
            }
        }
    }
    while let Some(u) = stack.pop() {
        for &w in g.undirected_of(u).iter().chain(g.children_of(u)) {
            if !seen[w] {
                seen[w] = true;
                if !banned[w] {
                    stack.push(w);
                }
            }
        }
    }
    seen
}

fn reach_from(g: &Pdag, y: Vertex) -> ReachFromY {
    let n = g.n();
    let mut banned = vec![false; n];
    for &w in g.undirected_of(y) {
        banned[w] = true;
    }
    banned[y] = true;

    let via_children = semi_reach(g, g.children_of(y), &banned);

    let mut via_neighbor = Vec::with_capacity(g.undirected_of(y).len());
    for &w in g.undirected_of(y) {
        banned[w] = false;
        via_neighbor.push((w, semi_reach(g, &[w], &banned)));
        banned[w] = true;
    }
    ReachFromY {
        via_children,
        via_neighbor,
    }
}

/// Valid Insert sets for the nonadjacent pair `(x, y)` are exactly
/// `must ∪ C` for cliques `C` over `free`; `None` when no valid set exists.
struct InsertSets {
    must: Vec<Vertex>,
    free: Vec<Vertex>,
}

fn insert_sets(g: &Cpdag, reach: &ReachFromY, x: Vertex, y: Vertex) -> Option<InsertSets> {
    if reach.via_children[x] {
        return None; // a semi-directed path from y to x avoids Ne(y) entirely
    }
    let mut must: Vec<Vertex> = Vec::new();
    for (w, r) in &reach.via_neighbor {
        if !g.is_adjacent(*w, x) && r[x] {
            must.push(*w);
        }
    }
    let mut base = g.na_set(x, y);
    base.extend_from_slice(&must);
    if !g.is_clique(&base) {
        return None;
    }
    let free: Vec<Vertex> = g
        .undirected_of(y)
        .iter()
        .copied()
        .filter(|&v| {
            !g.is_adjacent(v, x)
                && !must.contains(&v)
                && base.iter().all(|&b| g.is_adjacent(v, b))
        })
        .collect();
    Some(InsertSets { must, free })
}

/// The set of undirected neighbours of `y` forced into every valid Insert
/// set for the nonadjacent pair `(x, y)`: those nonadjacent to `x` from
/// which `x` is semi-directed-reachable while avoiding the other undirected
/// neighbours of `y`.
pub fn must_take_set(g: &Cpdag, x: Vertex, y: Vertex) -> Vec<Vertex> {
    assert!(x < g.n() && y < g.n() && x != y && !g.is_adjacent(x, y));
    let reach = reach_from(g.as_pdag(), y);
    let mut must: Vec<Vertex> = Vec::new();
    for (w, r) in &reach.via_neighbor {
        if !g.is_adjacent(*w, x) && r[x] {
            must.push(*w);
        }
    }
    must
}

// ---------------------------------------------------------------------------
// Counting, listing, sampling
// ---------------------------------------------------------------------------

/// Has the ordered pair `(x, y)` a deletable edge (`x - y` or `x -> y`)?
fn delete_pair(g: &Cpdag, x: Vertex, y: Vertex) -> bool {
    g.has_undirected(x, y) || g.has_directed(x, y)
}

/// Counts the locally valid operators per ordered pair. Runs in
/// `O(n^2 * m)`: one reachability sweep per destination vertex, then
/// near-linear work per pair.
pub fn count_operators(g: &Cpdag) -> OperatorCount {
    let n = g.n();
    let mut pairs = Vec::new();
    let mut insert_total = Count::ZERO;
    let mut delete_total = Count::ZERO;
    for y in 0..n {
        let reach = reach_from(g.as_pdag(), y);
        for x in 0..n {
            if x == y {
                continue;
            }
            let mut inserts = Count::ZERO;
            let mut deletes = Count::ZERO;
            if delete_pair(g, x, y) {
                let na = g.na_set(x, y);
                deletes = clique_index(g.as_pdag(), &na).count;
            } else if !g.is_adjacent(x, y) {
                if let Some(sets) = insert_sets(g, &reach, x, y) {
                    inserts = clique_index(g.as_pdag(), &sets.free).count;
                }
            }
            if !inserts.is_zero() || !deletes.is_zero() {
                insert_total = insert_total.add(&inserts);
                delete_total = delete_total.add(&deletes);
                pairs.push(PairCount {
                    x,
                    y,
                    inserts,
                    deletes,
                });
            }
        }
    }
    OperatorCount {
        pairs,
        insert_total,
        delete_total,
    }
}

/// Lists every locally valid operator exactly once, in lexicographic order
/// of ordered pairs `(x, y)` and, within a pair, in the lexicographic clique
/// order of the varying part of the set. No invalid candidate is generated.
pub fn list_operators(g: &Cpdag) -> impl Iterator<Item = Operator> + '_ {
    let n = g.n();
    let reach: Vec<ReachFromY> = (0..n).map(|y| reach_from(g.as_pdag(), y)).collect();
    (0..n)
        .flat_map(move |x| (0..n).map(move |y| (x, y)))
        .filter(|&(x, y)| x != y)
        .flat_map(move |(x, y)| pair_operators(g, &reach[y], x, y))
}

fn pair_operators(g: &Cpdag, reach: &ReachFromY, x: Vertex, y: Vertex) -> Vec<Operator> {
    if delete_pair(g, x, y) {
        let na = g.na_set(x, y);
        enumerate_cliques(g.as_pdag(), &na)
            .into_iter()
            .map(|c| {
                let h: Vec<Vertex> = na.iter().copied().filter(|v| !c.contains(v)).collect();
                Operator::Delete { x, y, h }
            })
            .collect()
    } else if !g.is_adjacent(x, y) {
        match insert_sets(g, reach, x, y) {
            Some(sets) => enumerate_cliques(g.as_pdag(), &sets.free)
                .into_iter()
                .map(|c| {
                    let mut t = sets.must.clone();
                    t.extend(c);
                    t.sort_unstable();
                    Operator::Insert { x, y, t }
                })
                .collect(),
            None => Vec::new(),
        }
    } else {
        Vec::new()
    }
}

/// Draws one of the locally valid operators on the given side uniformly at
/// random, using precomputed counts: first a pair proportional to its count,
/// then a clique uniformly within the pair's elimination structure.
pub fn sample_from_counts<R: Rng + ?Sized>(
    g: &Cpdag,
    counts: &OperatorCount,
    side: OperatorSide,
    rng: &mut R,
) -> Result<Operator> {
    let total = match side {
        OperatorSide::All => counts.total(),
        OperatorSide::Inserts => counts.insert_total.clone(),
        OperatorSide::Deletes => counts.delete_total.clone(),
    };
    if total.is_zero() {
        return Err(Error::EmptySupport);
    }
    let mut r = uniform_below(&total, rng);
    for pair in &counts.pairs {
        if side != OperatorSide::Deletes && !pair.inserts.is_zero() {
            if r < pair.inserts {
                let reach = reach_from(g.as_pdag(), pair.y);
                let sets = insert_sets(g, &reach, pair.x, pair.y)
                    .expect("counted pair has valid inserts");
                let index = clique_index(g.as_pdag(), &sets.free);
                debug_assert_eq!(index.count, pair.inserts);
                let mut t = sets.must.clone();
                t.extend(index.clique_at(&r));
                t.sort_unstable();
                return Ok(Operator::Insert {
                    x: pair.x,
                    y: pair.y,
                    t,
                });
            }
            r = r.sub(&pair.inserts);
        }
        if side != OperatorSide::Inserts && !pair.deletes.is_zero() {
            if r < pair.deletes {
                let na = g.na_set(pair.x, pair.y);
                let index = clique_index(g.as_pdag(), &na);
                debug_assert_eq!(index.count, pair.deletes);
                let c = index.clique_at(&r);
                let h: Vec<Vertex> = na.iter().copied().filter(|v| !c.contains(v)).collect();
                return Ok(Operator::Delete {
                    x: pair.x,
                    y: pair.y,
                    h,
                });
            }
            r = r.sub(&pair.deletes);
        }
    }
    unreachable!("draw below total is covered by some pair");
}

/// Draws a locally valid operator uniformly at random.
pub fn sample_operator_uniform<R: Rng + ?Sized>(g: &Cpdag, rng: &mut R) -> Result<Operator> {
    let counts = count_operators(g);
    sample_from_counts(g, &counts, OperatorSide::All, rng)
}
