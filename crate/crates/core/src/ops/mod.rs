//! The GES operator layer: `Insert`/`Delete` validity tests, linear-time
//! application via a prefixed maximum cardinality search, operator inverses,
//! and counting / listing / uniform sampling of locally valid operators.

mod count;

pub use count::{
    count_cliques, count_operators, list_operators, must_take_set, sample_from_counts,
    sample_operator_uniform, Count, OperatorCount, OperatorSide,
};

use crate::error::{Error, Result, Violation};
use crate::graph::{dag_to_cpdag, mcs_extension, Cpdag, Dag, Vertex};

/// A GES operator on a CPDAG.
///
/// `Insert { x, y, t }` inserts the edge `x -> y` and directs `t - y` as
/// `t -> y` for every `t` in `t`; `Delete { x, y, h }` deletes the edge
/// `x - y` or `x -> y` and directs `x - h`, `y - h` towards `h` for every
/// `h` in `h`. The set is kept sorted.
///
/// The derived order is (kind, x, y, set), with inserts before deletes.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Operator {
    Insert { x: Vertex, y: Vertex, t: Vec<Vertex> },
    Delete { x: Vertex, y: Vertex, h: Vec<Vertex> },
}

impl Operator {
    pub fn insert(x: Vertex, y: Vertex, mut t: Vec<Vertex>) -> Self {
        t.sort_unstable();
        Operator::Insert { x, y, t }
    }

    pub fn delete(x: Vertex, y: Vertex, mut h: Vec<Vertex>) -> Self {
        h.sort_unstable();
        Operator::Delete { x, y, h }
    }

    pub fn is_insert(&self) -> bool {
        matches!(self, Operator::Insert { .. })
    }

    pub fn x(&self) -> Vertex {
        match self {
            Operator::Insert { x, .. } | Operator::Delete { x, .. } => *x,
        }
    }

    pub fn y(&self) -> Vertex {
        match self {
            Operator::Insert { y, .. } | Operator::Delete { y, .. } => *y,
        }
    }

    pub fn set(&self) -> &[Vertex] {
        match self {
            Operator::Insert { t, .. } => t,
            Operator::Delete { h, .. } => h,
        }
    }

    /// Text form with external vertex names: `Insert x y {t1,t2}`.
    pub fn display_named(&self, names: &[String]) -> String {
        let kind = if self.is_insert() { "Insert" } else { "Delete" };
        let set = self
            .set()
            .iter()
            .map(|&v| names[v].as_str())
            .collect::<Vec<_>>()
            .join(",");
        format!("{kind} {} {} {{{set}}}", names[self.x()], names[self.y()])
    }
}

impl std::fmt::Display for Operator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = if self.is_insert() { "Insert" } else { "Delete" };
        let set = self
            .set()
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        write!(f, "{kind} {} {} {{{set}}}", self.x(), self.y(), set = set)
    }
}

/// True iff `x` is semi-directed-reachable from `y` through paths avoiding
/// the `blocked` vertices (a semi-directed step follows an undirected edge or
/// a directed edge away from the current vertex).
fn semi_directed_reaches(g: &Cpdag, y: Vertex, x: Vertex, blocked: &[Vertex]) -> bool {
    let n = g.n();
    let mut banned = vec![false; n];
    for &b in blocked {
        banned[b] = true;
    }
    if banned[x] {
        return false;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![y];
    seen[y] = true;
    while let Some(u) = stack.pop() {
        for &w in g.undirected_of(u).iter().chain(g.children_of(u)) {
            if w == x {
                return true;
            }
            if !seen[w] && !banned[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    false
}

/// Returns the violated Insert condition, if any. `None` means valid:
/// (a) x, y nonadjacent; (b) `t` consists of undirected neighbours of y
/// nonadjacent to x; (c) `NA_x(y) ∪ t` is a clique; (d) every semi-directed
/// path from y to x contains a vertex of `NA_x(y) ∪ t`.
pub fn insert_violation(g: &Cpdag, x: Vertex, y: Vertex, t: &[Vertex]) -> Option<Violation> {
    assert!(x < g.n() && y < g.n() && x != y, "vertices in range, x != y");
    if g.is_adjacent(x, y) {
        return Some(Violation::Adjacent);
    }
    for &v in t {
        if v >= g.n() || !g.has_undirected(v, y) || g.is_adjacent(v, x) {
            return Some(Violation::BadInsertSet);
        }
    }
    let mut block = g.na_set(x, y);
    for &v in t {
        if block.contains(&v) {
            return Some(Violation::BadInsertSet); // t must be disjoint from NA
        }
        block.push(v);
    }
    if !g.is_clique(&block) {
        return Some(Violation::NotClique);
    }
    if semi_directed_reaches(g, y, x, &block) {
        return Some(Violation::Unblocked);
    }
    None
}

/// Returns the violated Delete condition, if any: the edge `x - y` or
/// `x -> y` must exist, `h ⊆ NA_x(y)`, and `NA_x(y) \ h` must be a clique.
pub fn delete_violation(g: &Cpdag, x: Vertex, y: Vertex, h: &[Vertex]) -> Option<Violation> {
    assert!(x < g.n() && y < g.n() && x != y, "vertices in range, x != y");
    if !(g.has_undirected(x, y) || g.has_directed(x, y)) {
        return Some(Violation::MissingEdge);
    }
    let na = g.na_set(x, y);
    for &v in h {
        if !na.contains(&v) {
            return Some(Violation::BadDeleteSet);
        }
    }
    let rest: Vec<Vertex> = na.iter().copied().filter(|v| !h.contains(v)).collect();
    if !g.is_clique(&rest) {
        return Some(Violation::NotClique);
    }
    None
}

pub fn insert_valid(g: &Cpdag, x: Vertex, y: Vertex, t: &[Vertex]) -> bool {
    insert_violation(g, x, y, t).is_none()
}

pub fn delete_valid(g: &Cpdag, x: Vertex, y: Vertex, h: &[Vertex]) -> bool {
    delete_violation(g, x, y, h).is_none()
}

/// Checks local validity of `op` for `g`.
pub fn check_operator(g: &Cpdag, op: &Operator) -> Result<()> {
    let violation = match op {
        Operator::Insert { x, y, t } => insert_violation(g, *x, *y, t),
        Operator::Delete { x, y, h } => delete_violation(g, *x, *y, h),
    };
    match violation {
        Some(v) => Err(Error::InvalidOperator(v)),
        None => Ok(()),
    }
}

/// The witness DAG behind a fast operator application: the operator acts as
/// a single edge change on a member obtained by a prefixed MCS, and this is
/// the member after that change (so it belongs to the new class).
///
/// For Insert, `NA_x(y) ∪ T` then `y` are visited first so that exactly
/// those neighbours of `y` precede it; for Delete, `NA_x(y) \ H` then (when
/// `x - y` is undirected) `x`, then `y`.
fn witness(g: &Cpdag, op: &Operator) -> Dag {
    match op {
        Operator::Insert { x, y, t } => {
            let mut prefix = g.na_set(*x, *y);
            prefix.extend_from_slice(t);
            prefix.sort_unstable();
            prefix.push(*y);
            let member = mcs_extension(g, &prefix).expect("prefix is a clique for a valid Insert");
            member.with_edge_added(*x, *y)
        }
        Operator::Delete { x, y, h } => {
            let mut prefix: Vec<Vertex> = g
                .na_set(*x, *y)
                .into_iter()
                .filter(|v| !h.contains(v))
                .collect();
            if g.has_undirected(*x, *y) {
                prefix.push(*x);
            }
            prefix.push(*y);
            let member = mcs_extension(g, &prefix).expect("prefix is a clique for a valid Delete");
            member.with_edge_removed(*x, *y)
        }
    }
}

/// Applies a locally valid operator, returning the completed CPDAG of the
/// new equivalence class. Runs in near-linear time: one prefixed MCS, one
/// edge change, one completion.
pub fn apply_operator(g: &Cpdag, op: &Operator) -> Result<Cpdag> {
    check_operator(g, op)?;
    Ok(dag_to_cpdag(&witness(g, op)))
}

/// The unique reverse operator mapping `g_next` back to `g`
/// (a Delete for an Insert and vice versa).
///
/// Requires `g_next = apply_operator(g, op)`.
pub fn inverse_operator(g: &Cpdag, op: &Operator, g_next: &Cpdag) -> Result<Operator> {
    check_operator(g, op)?;
    let member = witness(g, op);
    if &dag_to_cpdag(&member) != g_next {
        return Err(Error::InverseMismatch);
    }
    match op {
        Operator::Insert { x, y, .. } => {
            // h: members of NA_x(y) in the new CPDAG that are children of y
            // in the witness member of the new class.
            let h: Vec<Vertex> = g_next
                .na_set(*x, *y)
                .into_iter()
                .filter(|&v| member.has_directed(*y, v))
                .collect();
            Ok(Operator::delete(*x, *y, h))
        }
        Operator::Delete { x, y, .. } => {
            // t: undirected neighbours of y in the new CPDAG, nonadjacent to
            // x there, that are parents of y in the witness member.
            let t: Vec<Vertex> = g_next
                .undirected_of(*y)
                .iter()
                .copied()
                .filter(|&v| !g_next.is_adjacent(v, *x) && member.has_directed(v, *y))
                .collect();
            Ok(Operator::insert(*x, *y, t))
        }
    }
}
