//! Markov-equivalent scoring: the uniform score and the decomposable
//! Gaussian BIC with a configurable penalty, local-score caching and
//! operator score deltas.
//!
//! All log-mass values are unnormalized: `log π{γ} = β·s(γ)` for scored
//! targets and `0` for the uniform target.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{mcs_extension, Cpdag, Vertex};
use crate::ops::{apply_operator, Operator};

/// Observations of `p` real variables, reduced to the sufficient statistics
/// of least-squares regressions: per-column means and the Gram matrix
/// `XᵀX`.
#[derive(Clone, Debug)]
pub struct DataMatrix {
    n_samples: usize,
    p: usize,
    names: Vec<String>,
    means: Vec<f64>,
    gram: Vec<f64>, // row-major p*p
}

impl DataMatrix {
    /// Builds the sufficient statistics from per-variable columns of equal
    /// length.
    pub fn from_columns(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        let p = columns.len();
        if p == 0 {
            return Err(Error::Data("no variables".into()));
        }
        if names.len() != p {
            return Err(Error::Data("name count does not match column count".into()));
        }
        let n = columns[0].len();
        if n == 0 {
            return Err(Error::Data("no observations".into()));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::Data(format!(
                    "column {} has {} rows, expected {}",
                    names[j],
                    col.len(),
                    n
                )));
            }
            if let Some(bad) = col.iter().find(|v| !v.is_finite()) {
                return Err(Error::Data(format!(
                    "non-finite value {bad} in column {}",
                    names[j]
                )));
            }
        }
        let means: Vec<f64> = columns.iter().map(|c| c.iter().sum::<f64>() / n as f64).collect();
        let mut gram = vec![0.0; p * p];
        for a in 0..p {
            for b in a..p {
                let s: f64 = columns[a].iter().zip(&columns[b]).map(|(x, y)| x * y).sum();
                gram[a * p + b] = s;
                gram[b * p + a] = s;
            }
        }
        Ok(DataMatrix {
            n_samples: n,
            p,
            names,
            means,
            gram,
        })
    }

    /// Reads a CSV with a header row of variable names and one numeric row
    /// per observation. Ragged rows and missing or non-numeric values are
    /// rejected.
    pub fn from_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let names: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Data(format!("csv header: {e}")))?
            .iter()
            .map(|s| s.trim().to_string())
            .collect();
        let p = names.len();
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); p];
        for (i, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Data(format!("csv row {}: {e}", i + 2)))?;
            if record.len() != p {
                return Err(Error::Data(format!(
                    "csv row {}: {} fields, expected {}",
                    i + 2,
                    record.len(),
                    p
                )));
            }
            for (j, field) in record.iter().enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::Data(format!("csv row {}, column {}: `{field}` is not numeric", i + 2, names[j]))
                })?;
                columns[j].push(v);
            }
        }
        Self::from_columns(names, columns)
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// BIC is well-posed when there are more observations than parameters of
    /// the saturated model.
    pub fn bic_well_posed(&self) -> bool {
        self.n_samples > self.p
    }

    /// Centered cross-product `Σ (x_a - mean_a)(x_b - mean_b)`.
    fn centered(&self, a: usize, b: usize) -> f64 {
        self.gram[a * self.p + b] - self.n_samples as f64 * self.means[a] * self.means[b]
    }
}

/// Residual sum of squares of the least-squares regression of `x` on
/// `parents` plus an intercept, from the Gram matrix. A ridge of `1e-10` on
/// the diagonal is retried once if the normal equations are near-singular.
fn regression_rss(x: Vertex, parents: &[Vertex], data: &DataMatrix) -> Result<f64> {
    let k = parents.len();
    let sxx = data.centered(x, x);
    if k == 0 {
        return Ok(sxx);
    }
    let mut a = vec![0.0; k * k];
    let mut b = vec![0.0; k];
    for i in 0..k {
        for j in 0..k {
            a[i * k + j] = data.centered(parents[i], parents[j]);
        }
        b[i] = data.centered(parents[i], x);
    }
    let solved = cholesky_solve(&a, &b, k).or_else(|| {
        let mut ridged = a.clone();
        for i in 0..k {
            ridged[i * k + i] += 1e-10;
        }
        cholesky_solve(&ridged, &b, k)
    });
    let coef = solved.ok_or_else(|| {
        Error::Numerical(format!("singular regression of {x} on {parents:?}"))
    })?;
    let explained: f64 = coef.iter().zip(&b).map(|(c, s)| c * s).sum();
    Ok(sxx - explained)
}

/// Solves `A x = b` for symmetric positive-definite `A` (row-major `k*k`).
fn cholesky_solve(a: &[f64], b: &[f64], k: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut s = a[i * k + j];
            for t in 0..j {
                s -= l[i * k + t] * l[j * k + t];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * k + i] = s.sqrt();
            } else {
                l[i * k + j] = s / l[j * k + j];
            }
        }
    }
    // forward then backward substitution
    let mut y = vec![0.0; k];
    for i in 0..k {
        let mut s = b[i];
        for t in 0..i {
            s -= l[i * k + t] * y[t];
        }
        y[i] = s / l[i * k + i];
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = y[i];
        for t in (i + 1)..k {
            s -= l[t * k + i] * x[t];
        }
        x[i] = s / l[i * k + i];
    }
    Some(x)
}

/// Local Gaussian BIC of vertex `x` given `parents`:
/// `-(N/2)·ln(RSS/N) - penalty·(|parents| + 1)·ln(N)/2`.
///
/// `penalty = 1` is the standard BIC; larger values penalize parameters more
/// strongly.
pub fn local_bic(x: Vertex, parents: &[Vertex], data: &DataMatrix, penalty: f64) -> Result<f64> {
    let rss = regression_rss(x, parents, data)?;
    let n = data.n_samples as f64;
    if rss <= 0.0 {
        return Err(Error::Numerical(format!(
            "nonpositive residual variance for vertex {x}"
        )));
    }
    Ok(-(n / 2.0) * (rss / n).ln() - penalty * (parents.len() as f64 + 1.0) * n.ln() / 2.0)
}

/// Cache of local scores keyed by (vertex, sorted parent set). Cached values
/// are bit-identical to recomputation: both go through the same arithmetic.
#[derive(Default)]
pub struct ScoreCache {
    map: HashMap<(Vertex, Vec<Vertex>), f64>,
    enabled: bool,
    hits: u64,
    misses: u64,
}

impl ScoreCache {
    pub fn new() -> Self {
        ScoreCache {
            map: HashMap::new(),
            enabled: true,
            hits: 0,
            misses: 0,
        }
    }

    /// A cache that stores nothing; every lookup recomputes.
    pub fn disabled() -> Self {
        ScoreCache {
            map: HashMap::new(),
            enabled: false,
            hits: 0,
            misses: 0,
        }
    }

    pub fn stats(&self) -> (u64, u64) {
        (self.hits, self.misses)
    }

    fn local(
        &mut self,
        x: Vertex,
        parents: &[Vertex],
        data: &DataMatrix,
        penalty: f64,
    ) -> Result<f64> {
        debug_assert!(parents.windows(2).all(|w| w[0] < w[1]));
        if self.enabled {
            if let Some(&v) = self.map.get(&(x, parents.to_vec())) {
                self.hits += 1;
                return Ok(v);
            }
        }
        self.misses += 1;
        let v = local_bic(x, parents, data, penalty)?;
        if self.enabled {
            self.map.insert((x, parents.to_vec()), v);
        }
        Ok(v)
    }
}

/// How a scored target evaluates a CPDAG.
#[derive(Clone)]
pub enum Scorer {
    /// Decomposable Gaussian BIC of any member DAG (all members score
    /// equally).
    Bic { data: Arc<DataMatrix>, penalty: f64 },
    /// An arbitrary score function; operator deltas fall back to full
    /// recomputation through the applied operator.
    Custom(Arc<dyn Fn(&Cpdag) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for Scorer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scorer::Bic { penalty, data } => f
                .debug_struct("Bic")
                .field("penalty", penalty)
                .field("p", &data.p())
                .finish(),
            Scorer::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Unnormalized target distribution over CPDAGs:
/// `log π{γ} = β·s(γ)`, or identically zero for the uniform target.
#[derive(Clone, Debug)]
pub enum TargetDistribution {
    Uniform,
    Scored { scorer: Scorer, beta: f64 },
}

impl TargetDistribution {
    pub fn uniform() -> Self {
        TargetDistribution::Uniform
    }

    pub fn bic(data: Arc<DataMatrix>, penalty: f64, beta: f64) -> Self {
        assert!(beta > 0.0, "coldness must be positive");
        assert!(penalty > 0.0, "penalty must be positive");
        TargetDistribution::Scored {
            scorer: Scorer::Bic { data, penalty },
            beta,
        }
    }

    pub fn custom(beta: f64, score: Arc<dyn Fn(&Cpdag) -> f64 + Send + Sync>) -> Self {
        assert!(beta > 0.0, "coldness must be positive");
        TargetDistribution::Scored {
            scorer: Scorer::Custom(score),
            beta,
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, TargetDistribution::Uniform)
    }

    pub fn beta(&self) -> f64 {
        match self {
            TargetDistribution::Uniform => 0.0,
            TargetDistribution::Scored { beta, .. } => *beta,
        }
    }
}

/// Sum of the local scores of a member DAG of `g`; the BIC is
/// Markov-equivalent, so any member gives the same total.
fn bic_of_cpdag(g: &Cpdag, data: &DataMatrix, penalty: f64, cache: &mut ScoreCache) -> Result<f64> {
    let member = mcs_extension(g, &[])?;
    let mut total = 0.0;
    for x in 0..member.n() {
        total += cache.local(x, member.parents_of(x), data, penalty)?;
    }
    Ok(total)
}

/// Unnormalized log mass `log π{γ}` of `g` under `target`
/// (`β·s(γ)` for scored targets, `0` for the uniform one).
pub fn cpdag_log_score(g: &Cpdag, target: &TargetDistribution, cache: &mut ScoreCache) -> Result<f64> {
    match target {
        TargetDistribution::Uniform => Ok(0.0),
        TargetDistribution::Scored { scorer, beta } => {
            let s = match scorer {
                Scorer::Bic { data, penalty } => bic_of_cpdag(g, data, *penalty, cache)?,
                Scorer::Custom(f) => f(g),
            };
            Ok(beta * s)
        }
    }
}

fn sorted_union(base: &[Vertex], extra: &[Vertex]) -> Vec<Vertex> {
    let mut out: Vec<Vertex> = base.iter().chain(extra).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Log-mass change of applying a valid operator:
/// `log π{apply(g, op)} - log π{g}`.
///
/// For the BIC this reduces to a difference of two local scores of `y`; for
/// custom scorers the operator is applied and both totals compared.
pub fn operator_log_delta(
    g: &Cpdag,
    op: &Operator,
    target: &TargetDistribution,
    cache: &mut ScoreCache,
) -> Result<f64> {
    match target {
        TargetDistribution::Uniform => Ok(0.0),
        TargetDistribution::Scored { scorer, beta } => match scorer {
            Scorer::Bic { data, penalty } => {
                let delta = match op {
                    Operator::Insert { x, y, t } => {
                        let na = g.na_set(*x, *y);
                        let before = sorted_union(g.parents_of(*y), &sorted_union(&na, t));
                        let after = sorted_union(&before, &[*x]);
                        cache.local(*y, &after, data, *penalty)?
                            - cache.local(*y, &before, data, *penalty)?
                    }
                    Operator::Delete { x, y, h } => {
                        let na_less_h: Vec<Vertex> = g
                            .na_set(*x, *y)
                            .into_iter()
                            .filter(|v| !h.contains(v))
                            .collect();
                        let with_x = sorted_union(&sorted_union(g.parents_of(*y), &na_less_h), &[*x]);
                        let without_x: Vec<Vertex> =
                            with_x.iter().copied().filter(|&v| v != *x).collect();
                        cache.local(*y, &without_x, data, *penalty)?
                            - cache.local(*y, &with_x, data, *penalty)?
                    }
                };
                Ok(beta * delta)
            }
            Scorer::Custom(f) => {
                let next = apply_operator(g, op)?;
                Ok(beta * (f(&next) - f(g)))
            }
        },
    }
}
