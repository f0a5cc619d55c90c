//! Machine-readable verification report backing the CLI `verify` command.

use serde_json::{json, Value};

use causal_zigzag::error::Result;
use causal_zigzag::ops::{apply_operator, count_operators, list_operators, Count, Operator};
use causal_zigzag::sampler::{BalancingFunction, SamplerKind};
use causal_zigzag::score::TargetDistribution;

use crate::brute::brute_force_operators;
use crate::catalog::enumerate_mecs;
use crate::naive::naive_apply;
use crate::stationarity::{exact_stationarity_check, zigzag_generator};

/// Runs the oracle comparisons up to `max_n` vertices and reports the
/// outcomes as JSON: class censuses, operator-layer agreement counts and
/// stationarity residuals (with a corrupted-rate negative control).
pub fn verification_report(max_n: usize) -> Result<Value> {
    let max_n = max_n.clamp(1, 5);
    let mut census = Vec::new();
    let mut ops_agreement = Vec::new();
    let mut all_ok = true;

    for n in 1..=max_n {
        let catalog = enumerate_mecs(n)?;
        census.push(json!({
            "n": n,
            "dags": catalog.dag_count,
            "classes": catalog.class_count(),
        }));

        let mut listed_total = 0usize;
        let mut brute_total = 0usize;
        let mut count_total = Count::ZERO;
        let mut list_matches_brute = true;
        let mut fast_matches_naive = true;
        for g in &catalog.classes {
            let listed: Vec<Operator> = list_operators(g).collect();
            let brute = brute_force_operators(g);
            listed_total += listed.len();
            brute_total += brute.len();
            count_total = count_total.add(&count_operators(g).total());
            if listed.iter().cloned().collect::<std::collections::BTreeSet<_>>() != brute {
                list_matches_brute = false;
            }
            for op in &listed {
                if apply_operator(g, op)? != naive_apply(g, op)? {
                    fast_matches_naive = false;
                }
            }
        }
        let counts_consistent = count_total == Count::Small(listed_total as u128);
        all_ok &= list_matches_brute && fast_matches_naive && counts_consistent
            && listed_total == brute_total;
        ops_agreement.push(json!({
            "n": n,
            "operators": listed_total,
            "count_total": count_total.to_string(),
            "list_matches_brute_force": list_matches_brute,
            "count_matches_list": counts_consistent,
            "fast_apply_matches_naive": fast_matches_naive,
        }));
    }

    // completion cross-check: compelled-edge labeling vs pattern closure
    let mut meek_agreement = true;
    {
        use causal_zigzag::graph::random::random_dag;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..30 {
            let d = random_dag(10, 0.3, &mut rng);
            if crate::meek::meek_closure(&d) != *causal_zigzag::graph::dag_to_cpdag(&d).as_pdag() {
                meek_agreement = false;
            }
        }
        all_ok &= meek_agreement;
    }

    // stationarity on the three-vertex space
    let cat3 = enumerate_mecs(3.min(max_n).max(1))?;
    let stationarity = if cat3.n == 3 {
        let target = TargetDistribution::Uniform;
        let zan = exact_stationarity_check(
            SamplerKind::Zanella,
            &cat3,
            &target,
            BalancingFunction::Sqrt,
        )?;
        let zig = exact_stationarity_check(
            SamplerKind::ZigZag,
            &cat3,
            &target,
            BalancingFunction::Sqrt,
        )?;
        let control = zigzag_generator(&cat3, &target, BalancingFunction::Sqrt, Some(1.5))?.residual;
        all_ok &= zan < 1e-10 && zig < 1e-10 && control > 1e-3;
        json!({
            "zanella_residual": zan,
            "zigzag_residual": zig,
            "corrupted_turn_residual": control,
            "tolerance": 1e-10,
        })
    } else {
        Value::Null
    };

    Ok(json!({
        "max_n": max_n,
        "census": census,
        "operators": ops_agreement,
        "completion_matches_pattern_closure": meek_agreement,
        "stationarity": stationarity,
        "ok": all_ok,
    }))
}
