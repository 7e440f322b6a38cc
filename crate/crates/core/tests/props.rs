//! Cross-cutting properties: oracle agreement, theorem instances, and
//! randomized invariants that tie the modules together.

use metadecomp::caps::Caps;
use metadecomp::enumerate::{enumerate_join_trees, rerootings};
use metadecomp::hypergraph::{is_ear, Hypergraph, WorkingHypergraph};
use metadecomp::jointree::{CanonicalTree, JoinTree};
use metadecomp::meta::build_meta;
use metadecomp::optimizer::{optimize_meta, optimize_tree, OptimizerConfig};
use metadecomp::oracle::{
    all_plans, execute, oracle_global_dp, oracle_join_trees, true_cardinalities,
};
use metadecomp::plan::{cost, is_induced_by, width, QueryPlan};
use metadecomp::set::AttrSet;
use metadecomp::workload::{
    clique_graph, floating_satellite, gen_acyclic, hierarchical, random_cards, random_db,
    shared_core, star, triangle,
};
use proptest::prelude::*;
use std::collections::BTreeSet;

fn enumerated_set(h: &Hypergraph) -> BTreeSet<CanonicalTree> {
    let m = build_meta(h).unwrap();
    enumerate_join_trees(h, &m)
        .unwrap()
        .map(|t| t.unwrap().canonical_key())
        .collect()
}

fn oracle_set(h: &Hypergraph) -> BTreeSet<CanonicalTree> {
    oracle_join_trees(h, &Caps::default())
        .unwrap()
        .into_iter()
        .map(|t| t.canonical_key())
        .collect()
}

#[test]
fn enumeration_matches_oracle_on_named_queries() {
    for h in [
        star(4),
        hierarchical(),
        clique_graph(),
        shared_core(),
        floating_satellite(),
    ] {
        assert_eq!(enumerated_set(&h), oracle_set(&h));
    }
}

#[test]
fn enumeration_matches_oracle_on_random_instances() {
    for seed in 0..120 {
        let n = 2 + (seed as usize % 5);
        let bias = [0.0, 0.5, 1.0][seed as usize % 3];
        let h = gen_acyclic(n, 3, bias, seed);
        assert_eq!(
            enumerated_set(&h),
            oracle_set(&h),
            "seed {seed} n {n} bias {bias}"
        );
    }
}

#[test]
fn tree_set_invariant_under_relation_permutation() {
    // same relations presented in a different order must encode the same
    // join-tree family (canonical keys use dense ids, so compare by name)
    let name_set = |h: &Hypergraph| -> BTreeSet<Vec<(String, String)>> {
        let m = build_meta(h).unwrap();
        enumerate_join_trees(h, &m)
            .unwrap()
            .map(|t| {
                let t = t.unwrap();
                let mut edges: Vec<(String, String)> = t
                    .nodes
                    .iter()
                    .enumerate()
                    .filter_map(|(i, n)| {
                        t.parent[i].map(|p| {
                            (
                                h.rel_name(n.rel).to_string(),
                                h.rel_name(t.nodes[p].rel).to_string(),
                            )
                        })
                    })
                    .collect();
                edges.sort();
                edges.push((h.rel_name(t.nodes[t.root].rel).to_string(), String::new()));
                edges
            })
            .collect()
    };
    let base = shared_core();
    let baseline = name_set(&base);
    let rels: Vec<(String, Vec<String>)> = (0..base.num_relations() as u32)
        .map(|r| {
            (
                base.rel_name(r).to_string(),
                base.edge(r)
                    .iter()
                    .map(|a| base.attr_name(a).to_string())
                    .collect(),
            )
        })
        .collect();
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    for seed in 0..10u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut perm = rels.clone();
        perm.shuffle(&mut rng);
        let h = Hypergraph::new(perm, vec![]).unwrap();
        assert_eq!(name_set(&h), baseline, "permutation seed {seed}");
    }
}

#[test]
fn gyo_agrees_with_join_tree_existence() {
    for seed in 0..60 {
        let h = gen_acyclic(2 + seed as usize % 4, 3, 0.5, seed);
        assert!(h.gyo_is_acyclic());
        assert!(!oracle_set(&h).is_empty());
    }
    assert!(oracle_set(&triangle()).is_empty());
    assert!(!triangle().gyo_is_acyclic());
}

#[test]
fn ear_removal_preserves_acyclicity() {
    for seed in 0..40 {
        let h = gen_acyclic(5, 3, 0.4, seed);
        for r in 0..h.num_relations() as u32 {
            let (ok, _) = is_ear(&h, r).unwrap();
            if !ok {
                continue;
            }
            // rebuild without the ear and re-test; drop attrs private to it
            let rels: Vec<(String, Vec<String>)> = (0..h.num_relations() as u32)
                .filter(|&x| x != r)
                .map(|x| {
                    (
                        h.rel_name(x).to_string(),
                        h.edge(x)
                            .iter()
                            .map(|a| h.attr_name(a).to_string())
                            .collect(),
                    )
                })
                .collect();
            if let Ok(smaller) = Hypergraph::new(rels, vec![]) {
                assert!(smaller.gyo_is_acyclic(), "seed {seed} ear {r}");
            }
        }
    }
}

#[test]
fn meta_valid_and_bounded_on_random_instances() {
    for seed in 0..150 {
        let n = 1 + (seed as usize % 7);
        let h = gen_acyclic(n, 4, [0.0, 0.3, 0.7, 1.0][seed as usize % 4], seed);
        let m = build_meta(&h).unwrap();
        assert_eq!(m.validate(&h), Ok(()), "seed {seed}");
        assert!(m.len() < 2 * h.num_relations(), "size bound, seed {seed}");
        for p in 0..m.len() {
            if m.is_minor(p) {
                assert!(m.children(p).len() >= 2, "minor fan-out, seed {seed}");
            }
        }
    }
}

#[test]
fn width1_iff_induced_by_some_tree() {
    for seed in 0..25 {
        let h = gen_acyclic(2 + seed as usize % 4, 3, 0.5, seed);
        let m = build_meta(&h).unwrap();
        let trees: Vec<JoinTree> = enumerate_join_trees(&h, &m)
            .unwrap()
            .map(|t| t.unwrap())
            .collect();
        for plan in all_plans(&h, h.all_rels()) {
            let w = width(&plan, &h).unwrap().width;
            let induced = trees.iter().any(|t| is_induced_by(&plan, t, &h).unwrap().0);
            assert_eq!(
                w == 1,
                induced,
                "seed {seed} plan {}",
                plan.canonical_string(&h)
            );
        }
    }
}

#[test]
fn width1_plans_exist_iff_acyclic() {
    let has_w1 = |h: &Hypergraph| {
        all_plans(h, h.all_rels())
            .iter()
            .any(|p| width(p, h).map(|w| w.width <= 1).unwrap_or(false))
    };
    assert!(!has_w1(&triangle()));
    for seed in 0..20 {
        let h = gen_acyclic(2 + seed as usize % 3, 3, 0.5, seed);
        assert!(has_w1(&h), "seed {seed}");
    }
}

#[test]
fn tree_optimizer_matches_induced_plan_bruteforce() {
    for seed in 0..20 {
        let n = 2 + seed as usize % 4;
        let h = gen_acyclic(n, 3, 0.5, seed);
        let cp = random_cards(&h, seed, 1000);
        let m = build_meta(&h).unwrap();
        let cfg = OptimizerConfig::default();
        for t in enumerate_join_trees(&h, &m).unwrap() {
            let t = t.unwrap();
            let got = optimize_tree(&h, &t, &cp, &cfg).unwrap();
            let best = all_plans(&h, h.all_rels())
                .into_iter()
                .filter(|p| is_induced_by(p, &t, &h).unwrap().0)
                .map(|p| cost(&p, &h, &cp).unwrap().total)
                .fold(f64::INFINITY, f64::min);
            assert_eq!(got.cost, best, "seed {seed}");
        }
    }
}

#[test]
fn meta_optimizer_exact_against_tree_enumeration() {
    for seed in 0..40 {
        let n = 2 + seed as usize % 5;
        let h = gen_acyclic(n, 4, [0.2, 0.7, 1.0][seed as usize % 3], seed);
        let cp = random_cards(&h, seed, 1000);
        let m = build_meta(&h).unwrap();
        let cfg = OptimizerConfig::default();
        let got = optimize_meta(&h, &m, &cp, &cfg).unwrap();
        let best = enumerate_join_trees(&h, &m)
            .unwrap()
            .map(|t| optimize_tree(&h, &t.unwrap(), &cp, &cfg).unwrap().cost)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(got.cost, best, "seed {seed} n {n}");
        assert!(got.width <= 1);
    }
}

#[test]
fn global_dp_dominates_width1() {
    for seed in 0..30 {
        let h = gen_acyclic(2 + seed as usize % 5, 3, 0.5, seed);
        let cp = random_cards(&h, seed, 1000);
        let m = build_meta(&h).unwrap();
        let w1 = optimize_meta(&h, &m, &cp, &OptimizerConfig::default()).unwrap();
        let (_, global) = oracle_global_dp(&h, &cp, &Caps::default()).unwrap();
        assert!(global <= w1.cost, "seed {seed}");
    }
}

#[test]
fn execute_result_is_plan_invariant() {
    for seed in 0..10 {
        let h = gen_acyclic(4, 3, 0.5, seed);
        let db = random_db(&h, seed, 25, 4);
        let mut reference: Option<Vec<Vec<i64>>> = None;
        for plan in all_plans(&h, h.all_rels()).into_iter().take(8) {
            let rows = execute(&h, &plan, &db).unwrap().rows;
            match &reference {
                None => reference = Some(rows),
                Some(r) => assert_eq!(&rows, r, "seed {seed}"),
            }
        }
    }
}

#[test]
fn size_bound_holds_at_exact_exponent() {
    for seed in 0..15 {
        let h = gen_acyclic(4, 3, 0.5, seed);
        let db = random_db(&h, seed, 30, 4);
        let n_max = db.max_base_rows();
        for plan in all_plans(&h, h.all_rels()) {
            let w = width(&plan, &h).unwrap().width;
            let report = execute(&h, &plan, &db).unwrap();
            let bound = (n_max as u64).pow(w as u32);
            assert!(
                report.max_interface_rows as u64 <= bound,
                "seed {seed} width {w}: {} > {bound}",
                report.max_interface_rows
            );
        }
    }
}

#[test]
fn true_cardinalities_connected_subsets_and_root_agreement() {
    let h = hierarchical();
    let db = random_db(&h, 4, 30, 5);
    let cards = true_cardinalities(&h, &db, &Caps::default()).unwrap();
    // singletons equal base table sizes
    for r in 0..h.num_relations() as u32 {
        assert_eq!(
            cards.get(metadecomp::set::RelSet::singleton(r)).unwrap() as usize,
            db.tables[r as usize].rows.len()
        );
    }
    let m = build_meta(&h).unwrap();
    let opt = optimize_meta(&h, &m, &cards, &OptimizerConfig::default()).unwrap();
    let report = execute(&h, &opt.plan, &db).unwrap();
    assert_eq!(report.rows.len() as f64, cards.get(h.all_rels()).unwrap());
}

#[test]
fn relation_dominated_rooting_keeps_intermediates_small() {
    let h = metadecomp::workload::relation_dominated();
    let root = metadecomp::workload::dominating_relation(&h).unwrap();
    for seed in 0..10 {
        let db = random_db(&h, seed, 60, 8);
        let cards = true_cardinalities(&h, &db, &Caps::default()).unwrap();
        let m = build_meta(&h).unwrap();
        let cfg = OptimizerConfig {
            root_rel: Some(root),
            ..OptimizerConfig::default()
        };
        let opt = optimize_meta(&h, &m, &cards, &cfg).unwrap();
        assert!(opt.width <= 1);
        let report = execute(&h, &opt.plan, &db).unwrap();
        assert!(
            report.max_interface_rows <= db.max_base_rows(),
            "seed {seed}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn overlap_subset_of_edge(seed in 0u64..5000, n in 2usize..7) {
        let h = gen_acyclic(n, 3, 0.5, seed);
        let work = WorkingHypergraph::from_hypergraph(&h);
        for key in work.keys().collect::<Vec<_>>() {
            let o = work.overlap(key).unwrap();
            prop_assert!(o.is_subset_of(work.attrs(key).unwrap()));
        }
    }

    #[test]
    fn reroot_roundtrip(seed in 0u64..5000, n in 2usize..7) {
        let h = gen_acyclic(n, 3, 0.5, seed);
        let m = build_meta(&h).unwrap();
        let t = enumerate_join_trees(&h, &m).unwrap().next().unwrap().unwrap();
        for v in 0..t.len() {
            let back = t.reroot(v).unwrap().reroot(t.root).unwrap();
            prop_assert_eq!(back.canonical_key(), t.canonical_key());
            prop_assert_eq!(back.undirected_edges(), t.undirected_edges());
        }
    }

    #[test]
    fn validate_invariant_under_reroot(seed in 0u64..5000, n in 2usize..7) {
        let h = gen_acyclic(n, 3, 0.5, seed);
        let m = build_meta(&h).unwrap();
        let t = enumerate_join_trees(&h, &m).unwrap().next().unwrap().unwrap();
        for v in 0..t.len() {
            prop_assert_eq!(t.reroot(v).unwrap().validate(&h), Ok(()));
        }
    }

    #[test]
    fn rerootings_with_empty_key_visit_everything(seed in 0u64..5000, n in 2usize..7) {
        let h = gen_acyclic(n, 3, 0.5, seed);
        let m = build_meta(&h).unwrap();
        let t = enumerate_join_trees(&h, &m).unwrap().next().unwrap().unwrap();
        let rs = rerootings(&t, None, &AttrSet::new());
        prop_assert_eq!(rs.len(), t.len() - 1);
        let mut roots: Vec<usize> = rs.iter().map(|r| r.root).collect();
        roots.push(t.root);
        roots.sort_unstable();
        prop_assert_eq!(roots, (0..t.len()).collect::<Vec<_>>());
    }
}

#[test]
fn chi_outside_subtree_within_parent_lemma() {
    for seed in 0..25 {
        let h = gen_acyclic(2 + seed as usize % 5, 3, 0.6, seed);
        let m = build_meta(&h).unwrap();
        for t in enumerate_join_trees(&h, &m).unwrap().take(50) {
            let t = t.unwrap();
            for p in 0..t.len() {
                let Some(q) = t.parent[p] else { continue };
                let inside = t.subtree(p);
                let mut outside = AttrSet::new();
                for v in 0..t.len() {
                    if !inside.contains(&v) {
                        outside = outside.union(&t.nodes[v].chi);
                    }
                }
                assert!(t.nodes[p]
                    .chi
                    .intersect(&outside)
                    .is_subset_of(&t.nodes[q].chi));
            }
        }
    }
}

#[test]
fn adversarial_width2_plan_exceeds_base_size() {
    // R1 x R2 blows up on the {x3,x5} interface while every width-1 plan of
    // the same query stays within the base-table bound
    let h = hierarchical();
    let n = 20usize;
    let mk = |attrs: &[u32], rows: Vec<Vec<i64>>| metadecomp::oracle::Table {
        attrs: attrs.to_vec(),
        rows,
    };
    let a = |name: &str| h.attr_by_name(name).unwrap();
    let schema: Vec<Vec<u32>> = (0..4u32).map(|r| h.edge(r).iter().collect()).collect();
    let col = |r: usize, name: &str| schema[r].iter().position(|&x| x == a(name)).unwrap();
    let mut r1 = Vec::new();
    let mut r2 = Vec::new();
    for i in 0..n as i64 {
        let mut row = vec![0i64; 3];
        row[col(0, "x1")] = 0;
        row[col(0, "x2")] = 0;
        row[col(0, "x3")] = i;
        r1.push(row);
        let mut row = vec![0i64; 3];
        row[col(1, "x1")] = 0;
        row[col(1, "x4")] = 0;
        row[col(1, "x5")] = i;
        r2.push(row);
    }
    let r3: Vec<Vec<i64>> = (0..n as i64)
        .map(|i| {
            let mut row = vec![0i64; 2];
            row[col(2, "x5")] = i;
            row
        })
        .collect();
    let r4: Vec<Vec<i64>> = (0..n as i64)
        .map(|i| {
            let mut row = vec![0i64; 2];
            row[col(3, "x3")] = i;
            row
        })
        .collect();
    let db = metadecomp::oracle::MicroDatabase {
        tables: vec![
            mk(&schema[0], r1),
            mk(&schema[1], r2),
            mk(&schema[2], r3),
            mk(&schema[3], r4),
        ],
    };
    // width-2 plan: ((R1 ⋈ R2) ⋈ R3) ⋈ R4
    let w2 = {
        let p = QueryPlan::join(&QueryPlan::scan(0), &QueryPlan::scan(1));
        let p = QueryPlan::join(&p, &QueryPlan::scan(2));
        QueryPlan::join(&p, &QueryPlan::scan(3))
    };
    assert_eq!(width(&w2, &h).unwrap().width, 2);
    let report = execute(&h, &w2, &db).unwrap();
    assert!(report.max_interface_rows > n, "expected an N^2 blowup");
    // width-1 plan stays within N
    let w1 = QueryPlan::join(
        &QueryPlan::join(&QueryPlan::scan(0), &QueryPlan::scan(3)),
        &QueryPlan::join(&QueryPlan::scan(1), &QueryPlan::scan(2)),
    );
    assert_eq!(width(&w1, &h).unwrap().width, 1);
    let report = execute(&h, &w1, &db).unwrap();
    assert!(report.max_interface_rows <= n);
}
