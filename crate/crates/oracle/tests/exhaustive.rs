//! Exhaustive agreement between the fast operator layer and the brute-force
//! ground truth over every equivalence class on up to four vertices, plus
//! the exact balance conditions of the lifted chain on three vertices.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use causal_zigzag::graph::{dag_to_cpdag, mcs_extension, same_mec, Cpdag, Dag};
use causal_zigzag::ops::{
    apply_operator, count_operators, delete_valid, insert_valid, inverse_operator, list_operators,
    must_take_set, Count, Operator,
};
use causal_zigzag::sampler::{zigzag_rates, BalancingFunction, Direction, LiftedState};
use causal_zigzag::score::{cpdag_log_score, ScoreCache, TargetDistribution};
use causal_zigzag_oracle::{
    brute_force_operators, delete_valid_by_definition, enumerate_dags, enumerate_mecs,
    insert_valid_by_definition, naive_apply, MecCatalog,
};

fn catalog(n: usize) -> &'static MecCatalog {
    static CATS: OnceLock<Vec<MecCatalog>> = OnceLock::new();
    &CATS.get_or_init(|| (1..=4).map(|n| enumerate_mecs(n).unwrap()).collect())[n - 1]
}

fn all_classes() -> impl Iterator<Item = &'static Cpdag> {
    (1..=4).flat_map(|n| catalog(n).classes.iter())
}

fn subsets(pool: &[usize]) -> Vec<Vec<usize>> {
    (0..(1u32 << pool.len()))
        .map(|mask| {
            pool.iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect()
}

#[test]
fn census_matches_known_class_counts() {
    assert_eq!(catalog(1).class_count(), 1);
    assert_eq!(catalog(2).class_count(), 2);
    assert_eq!(catalog(3).class_count(), 11);
    assert_eq!(catalog(4).class_count(), 185);
    assert_eq!(catalog(4).dag_count, 543);
}

#[test]
fn every_catalog_cpdag_is_completed_and_chordal() {
    for g in all_classes() {
        assert!(Cpdag::try_new(g.as_pdag().clone()).is_ok(), "{g:?}");
        // chordality of the undirected part, through the PEO-checked
        // clique counter
        let mut und = causal_zigzag::graph::Pdag::new(g.n());
        for u in 0..g.n() {
            for &v in g.undirected_of(u) {
                if u < v {
                    und.add_undirected(u, v).unwrap();
                }
            }
        }
        assert!(causal_zigzag::ops::count_cliques(&und).is_ok(), "{g:?}");
    }
}

#[test]
fn completion_of_any_extension_is_the_identity() {
    for g in all_classes() {
        let member = mcs_extension(g, &[]).unwrap();
        assert_eq!(&dag_to_cpdag(&member), g, "{g:?}");
    }
}

#[test]
fn mcs_extension_is_a_consistent_extension() {
    for g in all_classes() {
        let d = mcs_extension(g, &[]).unwrap();
        assert_eq!(d.skeleton(), g.skeleton());
        assert_eq!(d.v_structures(), g.v_structures());
        for u in 0..g.n() {
            for &v in g.children_of(u) {
                assert!(d.has_directed(u, v), "directed edge {u}->{v} not preserved");
            }
        }
    }
}

#[test]
fn compelled_edges_are_exactly_the_orientation_invariant_ones() {
    // an edge of the CPDAG is directed iff every class member orients it
    // the same way
    for n in 2..=4 {
        let dags = enumerate_dags(n).unwrap();
        let cat = catalog(n);
        let mut members: BTreeMap<usize, Vec<&Dag>> = BTreeMap::new();
        for d in &dags {
            let class = cat.class_of(&dag_to_cpdag(d)).expect("catalog covers all DAGs");
            members.entry(class).or_default().push(d);
        }
        for (class, dags) in members {
            let g = &cat.classes[class];
            for u in 0..g.n() {
                for &v in g.children_of(u) {
                    assert!(
                        dags.iter().all(|d| d.has_directed(u, v)),
                        "compelled {u}->{v} flips within class {class} (n={n})"
                    );
                }
                for &v in g.undirected_of(u) {
                    if u < v {
                        let fwd = dags.iter().any(|d| d.has_directed(u, v));
                        let bwd = dags.iter().any(|d| d.has_directed(v, u));
                        assert!(
                            fwd && bwd,
                            "reversible {u}-{v} never flips within class {class} (n={n})"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn same_mec_iff_same_completion() {
    for n in 2..=4 {
        let dags = enumerate_dags(n).unwrap();
        let completions: Vec<Cpdag> = dags.iter().map(dag_to_cpdag).collect();
        for i in 0..dags.len() {
            for j in (i + 1)..dags.len() {
                assert_eq!(
                    same_mec(&dags[i], &dags[j]),
                    completions[i] == completions[j],
                    "n={n}, dags {i} and {j}"
                );
            }
        }
    }
}

#[test]
fn validity_agrees_with_definition_on_every_candidate() {
    for g in all_classes() {
        let n = g.n();
        for x in 0..n {
            for y in 0..n {
                if x == y {
                    continue;
                }
                if g.is_adjacent(x, y) {
                    let na = g.neighbors_adjacent(x, y).unwrap();
                    for h in subsets(&na) {
                        assert_eq!(
                            delete_valid(g, x, y, &h),
                            delete_valid_by_definition(g, x, y, &h),
                            "Delete({x},{y},{h:?}) on {g:?}"
                        );
                    }
                } else {
                    let pool: Vec<usize> = g
                        .undirected_of(y)
                        .iter()
                        .copied()
                        .filter(|&u| !g.is_adjacent(u, x))
                        .collect();
                    for t in subsets(&pool) {
                        assert_eq!(
                            insert_valid(g, x, y, &t),
                            insert_valid_by_definition(g, x, y, &t),
                            "Insert({x},{y},{t:?}) on {g:?}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn fast_apply_equals_naive_apply_everywhere() {
    let mut checked = 0usize;
    for g in all_classes() {
        for op in brute_force_operators(g) {
            let fast = apply_operator(g, &op).unwrap();
            let naive = naive_apply(g, &op).unwrap();
            assert_eq!(fast, naive, "{op} on {g:?}");
            checked += 1;
        }
    }
    assert!(checked > 2000, "only {checked} operators checked");
}

#[test]
fn counting_listing_and_brute_force_agree() {
    for g in all_classes() {
        let listed: Vec<Operator> = list_operators(g).collect();
        let brute = brute_force_operators(g);
        assert_eq!(
            listed.iter().cloned().collect::<BTreeSet<_>>(),
            brute,
            "{g:?}"
        );
        assert_eq!(listed.len(), brute.len(), "duplicate listing on {g:?}");
        assert_eq!(
            count_operators(g).total(),
            Count::Small(listed.len() as u128),
            "{g:?}"
        );
    }
}

#[test]
fn must_take_is_the_intersection_of_valid_sets() {
    for g in all_classes() {
        for x in 0..g.n() {
            for y in 0..g.n() {
                if x == y || g.is_adjacent(x, y) {
                    continue;
                }
                let pool: Vec<usize> = g
                    .undirected_of(y)
                    .iter()
                    .copied()
                    .filter(|&u| !g.is_adjacent(u, x))
                    .collect();
                let valid: Vec<Vec<usize>> = subsets(&pool)
                    .into_iter()
                    .filter(|t| insert_valid(g, x, y, t))
                    .collect();
                if valid.is_empty() {
                    continue;
                }
                let mut intersection: BTreeSet<usize> = valid[0].iter().copied().collect();
                for t in &valid[1..] {
                    let s: BTreeSet<usize> = t.iter().copied().collect();
                    intersection = intersection.intersection(&s).copied().collect();
                }
                let must: BTreeSet<usize> = must_take_set(g, x, y).into_iter().collect();
                assert_eq!(must, intersection, "pair ({x},{y}) on {g:?}");
            }
        }
    }
}

#[test]
fn inverse_operators_roundtrip_and_are_unique() {
    for g in all_classes() {
        for op in brute_force_operators(g) {
            let next = apply_operator(g, &op).unwrap();
            let inv = inverse_operator(g, &op, &next).unwrap();
            assert_eq!(inv.is_insert(), !op.is_insert());
            assert_eq!(apply_operator(&next, &inv).unwrap(), *g, "{op} then {inv}");
            // uniqueness: exactly one reverse operator with the same
            // endpoints maps back
            let reverses: Vec<Operator> = brute_force_operators(&next)
                .into_iter()
                .filter(|r| {
                    r.is_insert() != op.is_insert() && r.x() == op.x() && r.y() == op.y()
                })
                .filter(|r| apply_operator(&next, r).unwrap() == *g)
                .collect();
            assert_eq!(reverses, vec![inv], "{op} on {g:?}");
        }
    }
}

#[test]
fn inserted_edge_is_undirected_iff_t_empty_and_equal_parents() {
    for g in all_classes() {
        for op in brute_force_operators(g) {
            let Operator::Insert { x, y, t } = &op else {
                continue;
            };
            let next = apply_operator(g, &op).unwrap();
            let undirected = next.has_undirected(*x, *y);
            let expected = t.is_empty() && g.parents_of(*x) == g.parents_of(*y);
            assert_eq!(undirected, expected, "{op} on {g:?}");
        }
    }
}

#[test]
fn operator_multiplicity_is_symmetric_between_neighbors() {
    // the number of operators mapping γ to η equals the number mapping η
    // back to γ
    for n in 2..=4 {
        let cat = catalog(n);
        let mut multiplicity: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (a, g) in cat.classes.iter().enumerate() {
            for op in list_operators(g) {
                let b = cat.class_of(&apply_operator(g, &op).unwrap()).unwrap();
                *multiplicity.entry((a, b)).or_default() += 1;
            }
        }
        for (&(a, b), &m) in &multiplicity {
            assert_eq!(
                multiplicity.get(&(b, a)).copied().unwrap_or(0),
                m,
                "n={n}: {a}->{b} has {m} operators but the reverse differs"
            );
        }
    }
}

fn random_targets(n_classes: usize, seeds: u64) -> Vec<TargetDistribution> {
    // deterministic pseudo-random strictly positive targets keyed by the
    // class index of the catalog
    (0..seeds)
        .map(|s| {
            let cat = catalog(3);
            let masses: Vec<f64> = (0..n_classes)
                .map(|i| {
                    let h = (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15 ^ (s + 1));
                    2.0 * ((h >> 11) as f64 / (1u64 << 53) as f64) - 1.0
                })
                .collect();
            let cat_ref: &'static MecCatalog = cat;
            TargetDistribution::custom(
                1.0,
                Arc::new(move |g: &Cpdag| 3.0 * masses[cat_ref.class_of(g).unwrap()]),
            )
        })
        .collect()
}

#[test]
fn skew_balance_and_semi_local_condition_hold_exactly() {
    let cat = catalog(3);
    let mut cache = ScoreCache::new();
    for (ti, target) in random_targets(cat.class_count(), 5).into_iter().enumerate() {
        for g_fn in [BalancingFunction::Sqrt, BalancingFunction::Ratio] {
            let mass: Vec<f64> = cat
                .classes
                .iter()
                .map(|g| cpdag_log_score(g, &target, &mut cache).unwrap().exp())
                .collect();
            for (a, g) in cat.classes.iter().enumerate() {
                let up = LiftedState {
                    graph: g.clone(),
                    direction: Direction::Up,
                };
                let up_rates = zigzag_rates(&up, &target, g_fn, &mut cache).unwrap();
                // semi-local condition: Λ(γ^up) = Λ(γ^down)
                let down = LiftedState {
                    graph: g.clone(),
                    direction: Direction::Down,
                };
                let down_rates = zigzag_rates(&down, &target, g_fn, &mut cache).unwrap();
                let (lu, ld) = (up_rates.total_rate(), down_rates.total_rate());
                assert!(
                    (lu - ld).abs() <= 1e-12 * lu.abs().max(ld.abs()).max(1e-300),
                    "target {ti}, {g_fn:?}: Λ↑={lu} vs Λ↓={ld} at class {a}"
                );
                // skew balance per insert move: π(γ)λ(γ↑,η↑) = π(η)λ(η↓,γ↓)
                for (op, rate) in up_rates.materialize(g) {
                    let eta = apply_operator(g, &op).unwrap();
                    let b = cat.class_of(&eta).unwrap();
                    let inv = inverse_operator(g, &op, &eta).unwrap();
                    let eta_down = LiftedState {
                        graph: eta.clone(),
                        direction: Direction::Down,
                    };
                    let back = zigzag_rates(&eta_down, &target, g_fn, &mut cache).unwrap();
                    let back_rate = back
                        .materialize(&eta)
                        .into_iter()
                        .find(|(o, _)| *o == inv)
                        .map(|(_, r)| r)
                        .expect("inverse operator is a valid down-move");
                    let lhs = mass[a] * rate;
                    let rhs = mass[b] * back_rate;
                    assert!(
                        (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()),
                        "target {ti}, {g_fn:?}: skew balance {lhs} vs {rhs} for {op}"
                    );
                }
            }
        }
    }
}

#[test]
fn lifted_jump_graph_is_strongly_connected() {
    let cat = catalog(3);
    let k = cat.class_count();
    let target = TargetDistribution::Uniform;
    let mut cache = ScoreCache::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); 2 * k];
    for (a, g) in cat.classes.iter().enumerate() {
        for (di, direction) in [Direction::Up, Direction::Down].into_iter().enumerate() {
            let state = LiftedState {
                graph: g.clone(),
                direction,
            };
            let rates = zigzag_rates(&state, &target, BalancingFunction::Sqrt, &mut cache).unwrap();
            let row = 2 * a + di;
            for (op, rate) in rates.materialize(g) {
                if rate > 0.0 {
                    let b = cat.class_of(&apply_operator(g, &op).unwrap()).unwrap();
                    adj[row].push(2 * b + di);
                }
            }
            if rates.turn_rate() > 0.0 {
                adj[row].push(2 * a + (1 - di));
            }
        }
    }
    // strong connectivity: BFS forward and backward from state 0
    let reach = |adj: &Vec<Vec<usize>>| {
        let mut seen = vec![false; 2 * k];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    };
    assert!(reach(&adj).iter().all(|&s| s), "not all lifted states reachable");
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); 2 * k];
    for (u, outs) in adj.iter().enumerate() {
        for &v in outs {
            rev[v].push(u);
        }
    }
    assert!(reach(&rev).iter().all(|&s| s), "not all lifted states co-reachable");
}

#[test]
fn five_vertex_catalog_is_completed_and_chordal() {
    let cat = enumerate_mecs(5).unwrap();
    assert_eq!(cat.class_count(), 8782);
    for g in &cat.classes {
        let mut und = causal_zigzag::graph::Pdag::new(g.n());
        for u in 0..g.n() {
            for &v in g.undirected_of(u) {
                if u < v {
                    und.add_undirected(u, v).unwrap();
                }
            }
        }
        assert!(causal_zigzag::ops::count_cliques(&und).is_ok(), "{g:?}");
    }
}

/// Occupation of long runs against an exactly computable scored target on
/// the 11 classes of three vertices.
#[test]
fn scored_target_occupation_matches_the_exact_law() {
    use causal_zigzag::sampler::{Chain, SamplerKind};
    use causal_zigzag::synth::{linear_gaussian, SyntheticSpec};

    let cat = catalog(3);
    let spec = SyntheticSpec {
        vars: 3,
        samples: 40,
        edge_prob: 0.5,
        seed: 3,
        ..Default::default()
    };
    let data = std::sync::Arc::new(linear_gaussian(&spec).data);
    // a data-driven target is strictly positive; mild coldness keeps every
    // class reachable often enough, and deltas stay local and cached
    let target = TargetDistribution::bic(data, 1.0, 0.25);
    // exact law over the 11 classes
    let mut cache = ScoreCache::new();
    let logs: Vec<f64> = cat
        .classes
        .iter()
        .map(|g| cpdag_log_score(g, &target, &mut cache).unwrap())
        .collect();
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = logs.iter().map(|l| (l - m).exp()).sum();
    let law: Vec<f64> = logs.iter().map(|l| (l - m).exp() / z).collect();

    for kind in [SamplerKind::Zanella, SamplerKind::ZigZag] {
        let mut chain = Chain::new(
            kind,
            Cpdag::empty(3),
            Direction::Up,
            target.clone(),
            BalancingFunction::Sqrt,
            17,
        )
        .unwrap();
        let mut occ = vec![0.0f64; cat.class_count()];
        let mut current = cat.class_of(&chain.state().graph).unwrap();
        for _ in 0..1_000_000u64 {
            let record = chain.advance().unwrap();
            occ[current] += record.holding;
            current = cat.class_of(&chain.state().graph).unwrap();
        }
        let total: f64 = occ.iter().sum();
        let tv: f64 = 0.5
            * occ
                .iter()
                .zip(&law)
                .map(|(w, p)| (w / total - p).abs())
                .sum::<f64>();
        assert!(tv < 0.02, "{kind:?}: TV {tv} from the exact law");
    }
}

#[test]
fn denser_random_graphs_agree_on_counts_and_validity() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(314);
    for i in 0..30 {
        let g = causal_zigzag::graph::random::random_cpdag(10, 0.5, &mut rng);
        let listed: Vec<Operator> = list_operators(&g).collect();
        let brute = brute_force_operators(&g);
        assert_eq!(
            listed.iter().cloned().collect::<BTreeSet<_>>(),
            brute,
            "graph {i}: {g:?}"
        );
        assert_eq!(
            count_operators(&g).total(),
            Count::Small(listed.len() as u128),
            "graph {i}"
        );
        for op in listed.iter().take(20) {
            assert_eq!(
                apply_operator(&g, op).unwrap(),
                naive_apply(&g, op).unwrap(),
                "graph {i}: {op}"
            );
        }
    }
}

#[test]
fn compelled_labeling_agrees_with_meek_closure() {
    use causal_zigzag::graph::random::random_dag;
    use causal_zigzag_oracle::meek_closure;
    use rand::SeedableRng;

    // exhaustive at four vertices
    for d in enumerate_dags(4).unwrap() {
        assert_eq!(meek_closure(&d), *dag_to_cpdag(&d).as_pdag(), "{d:?}");
    }
    // random DAGs at production sizes
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2718);
    for n in [8usize, 15, 25, 40] {
        for _ in 0..40 {
            let density = 0.05 + 0.4 * rand::Rng::random::<f64>(&mut rng);
            let d = random_dag(n, density, &mut rng);
            assert_eq!(
                meek_closure(&d),
                *dag_to_cpdag(&d).as_pdag(),
                "n={n}, {d:?}"
            );
        }
    }
}
