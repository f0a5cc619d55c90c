//! Exhaustive enumeration of all labeled DAGs on up to five vertices and
//! their Markov equivalence classes.

use std::collections::{BTreeMap, HashMap};

use causal_zigzag::error::{Error, Result};
use causal_zigzag::graph::{dag_to_cpdag, Cpdag, Dag, Pdag};

/// All Markov equivalence classes on `n` vertices, indexed by their CPDAGs.
pub struct MecCatalog {
    pub n: usize,
    pub classes: Vec<Cpdag>,
    pub class_sizes: Vec<usize>,
    pub dag_count: usize,
    index: HashMap<Pdag, usize>,
}

impl MecCatalog {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn class_of(&self, g: &Cpdag) -> Option<usize> {
        self.index.get(g.as_pdag()).copied()
    }
}

/// All labeled DAGs on `n` vertices, by exhausting the three states of each
/// vertex pair and filtering acyclic results.
pub fn enumerate_dags(n: usize) -> Result<Vec<Dag>> {
    if n == 0 || n > 5 {
        return Err(Error::InvalidArgument(format!(
            "DAG enumeration is bounded to 1 <= n <= 5, got {n}"
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    let mut states = vec![0u8; pairs.len()]; // 0 none, 1 i->j, 2 j->i
    loop {
        let mut g = Pdag::new(n);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            match states[k] {
                0 => {}
                1 => g.add_directed(i, j).expect("fresh edge"),
                _ => g.add_directed(j, i).expect("fresh edge"),
            }
        }
        if let Ok(dag) = Dag::try_new(g) {
            out.push(dag);
        }
        // odometer over base-3 digits
        let mut k = 0;
        loop {
            if k == states.len() {
                return Ok(out);
            }
            states[k] += 1;
            if states[k] < 3 {
                break;
            }
            states[k] = 0;
            k += 1;
        }
    }
}

/// Enumerates every Markov equivalence class on `n <= 5` vertices.
///
/// Classes are produced by two independent grouping keys — the completed
/// CPDAG and the (skeleton, v-structures) pair — and the function panics if
/// the two partitions disagree, so the catalog doubles as a cross-check of
/// the completion algorithm.
pub fn enumerate_mecs(n: usize) -> Result<MecCatalog> {
    let dags = enumerate_dags(n)?;
    let dag_count = dags.len();

    // key 1: completion
    let mut by_cpdag: HashMap<Pdag, Vec<usize>> = HashMap::new();
    // key 2: (skeleton, v-structures)
    type StructureKey = (Vec<(usize, usize)>, Vec<(usize, usize, usize)>);
    let mut by_structure: BTreeMap<StructureKey, Vec<usize>> = BTreeMap::new();
    for (i, dag) in dags.iter().enumerate() {
        let c = dag_to_cpdag(dag);
        by_cpdag.entry(c.into_pdag()).or_default().push(i);
        let skel = dag.skeleton().into_iter().collect::<Vec<_>>();
        let vs = dag.v_structures().into_iter().collect::<Vec<_>>();
        by_structure.entry((skel, vs)).or_default().push(i);
    }
    if by_cpdag.len() != by_structure.len() {
        panic!(
            "grouping keys disagree: {} classes by completion, {} by structure",
            by_cpdag.len(),
            by_structure.len()
        );
    }
    // every structural class must map to exactly one completed CPDAG
    let mut classes: Vec<(Pdag, Vec<usize>)> = Vec::with_capacity(by_structure.len());
    for (_, members) in by_structure {
        let reprs: std::collections::HashSet<Pdag> = members
            .iter()
            .map(|&i| dag_to_cpdag(&dags[i]).into_pdag())
            .collect();
        assert_eq!(
            reprs.len(),
            1,
            "members of one structural class completed to different CPDAGs"
        );
        let repr = reprs.into_iter().next().expect("nonempty class");
        assert_eq!(
            by_cpdag.get(&repr).map(Vec::len),
            Some(members.len()),
            "class size mismatch between grouping keys"
        );
        classes.push((repr, members));
    }
    classes.sort_by(|a, b| {
        (a.1.len(), a.1.first())
            .cmp(&(b.1.len(), b.1.first()))
            .then_with(|| a.1.cmp(&b.1))
    });

    let mut index = HashMap::new();
    let mut class_sizes = Vec::new();
    let mut cpdags = Vec::new();
    for (i, (repr, members)) in classes.into_iter().enumerate() {
        index.insert(repr.clone(), i);
        class_sizes.push(members.len());
        cpdags.push(
            Cpdag::try_new(repr).expect("completion output passes the completedness check"),
        );
    }
    assert_eq!(class_sizes.iter().sum::<usize>(), dag_count);
    Ok(MecCatalog {
        n,
        classes: cpdags,
        class_sizes,
        dag_count,
        index,
    })
}
