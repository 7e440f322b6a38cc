//! Remaining worked examples: the relation-dominated plan shape, error
//! paths, and the log-normal shape of the cardinality perturbation.

use metadecomp::caps::Caps;
use metadecomp::enumerate::enumerate_join_trees;
use metadecomp::error::Error;
use metadecomp::hypergraph::Hypergraph;
use metadecomp::meta::build_meta;
use metadecomp::optimizer::{optimize_meta, optimize_tree, OptimizerConfig};
use metadecomp::oracle::{connected_subsets, execute, MicroDatabase, Table};
use metadecomp::plan::{width, CardinalityProvider, QueryPlan};
use metadecomp::set::RelSet;
use metadecomp::workload::{perturb_cards, relation_dominated};
use statrs::distribution::{ContinuousCDF, Normal};
use std::collections::HashMap;

fn rel(h: &Hypergraph, name: &str) -> u32 {
    h.rel_by_name(name).unwrap()
}

fn set(h: &Hypergraph, names: &[&str]) -> RelSet {
    let mut s = RelSet::empty();
    for n in names {
        s.insert(rel(h, n));
    }
    s
}

/// Cardinalities that make the chained single-attribute-interface plan the
/// unique optimum: every join outside its chain is prohibitively large.
fn snowflake_cards(h: &Hypergraph) -> CardinalityProvider {
    let mut t: HashMap<RelSet, f64> = HashMap::new();
    for s in connected_subsets(h) {
        t.insert(s, 1_000_000.0 + s.len() as f64);
    }
    for (names, rows) in [
        (vec!["R_ci"], 1000.0),
        (vec!["R_cn"], 800.0),
        (vec!["R_k"], 5.0),
        (vec!["R_mc"], 900.0),
        (vec!["R_mk"], 1000.0),
        (vec!["R_n"], 8.0),
        (vec!["R_t"], 700.0),
        (vec!["R_mk", "R_k"], 40.0),
        (vec!["R_mk", "R_k", "R_t"], 45.0),
        (vec!["R_mc", "R_cn"], 850.0),
        (vec!["R_mk", "R_k", "R_t", "R_mc", "R_cn"], 60.0),
        (vec!["R_mk", "R_k", "R_t", "R_mc", "R_cn", "R_ci"], 70.0),
        (
            vec!["R_mk", "R_k", "R_t", "R_mc", "R_cn", "R_ci", "R_n"],
            3.0,
        ),
    ] {
        let names: Vec<&str> = names;
        t.insert(set(h, &names), rows);
    }
    CardinalityProvider::from_table(t).unwrap()
}

#[test]
fn relation_dominated_chained_plan_is_optimal() {
    let h = relation_dominated();
    let cp = snowflake_cards(&h);
    let m = build_meta(&h).unwrap();
    let out = optimize_meta(&h, &m, &cp, &OptimizerConfig::default()).unwrap();
    assert_eq!(out.width, 1);

    // expected shape: ((((mk . k) . t) . (mc . cn)) . ci) . n
    let scan = |n: &str| QueryPlan::scan(rel(&h, n));
    let p = QueryPlan::join(&scan("R_mk"), &scan("R_k"));
    let p = QueryPlan::join(&p, &scan("R_t"));
    let p = QueryPlan::join(&p, &QueryPlan::join(&scan("R_mc"), &scan("R_cn")));
    let p = QueryPlan::join(&p, &scan("R_ci"));
    let expected = QueryPlan::join(&p, &scan("R_n"));
    assert_eq!(out.plan.canonical_string(&h), expected.canonical_string(&h));
    assert_eq!(width(&expected, &h).unwrap().width, 1);

    // every interface along the chain is a single attribute
    let info = metadecomp::plan::annotate(&out.plan, &h).unwrap();
    for ix in out.plan.postorder() {
        if info.rels[ix] != h.all_rels() {
            assert!(info.interface[ix].len() <= 2);
        }
    }

    // and the brute-force minimum over every join tree agrees
    let best = enumerate_join_trees(&h, &m)
        .unwrap()
        .map(|t| {
            optimize_tree(&h, &t.unwrap(), &cp, &OptimizerConfig::default())
                .unwrap()
                .cost
        })
        .fold(f64::INFINITY, f64::min);
    assert_eq!(out.cost, best);
}

#[test]
fn width_overflow_names_the_node() {
    // five satellites each covering one interface attribute; the block's
    // interface needs all five, past the exact search bound
    let mut rels: Vec<(String, Vec<String>)> = (1..=5)
        .map(|i| (format!("A{i}"), vec![format!("k{i}"), "c".to_string()]))
        .collect();
    rels.push((
        "B".to_string(),
        (1..=5)
            .map(|i| format!("k{i}"))
            .chain(["c".to_string()])
            .collect(),
    ));
    let h = Hypergraph::new(rels, vec![]).unwrap();
    let mut block = QueryPlan::scan(0);
    for r in 1..5 {
        block = QueryPlan::join(&block, &QueryPlan::scan(r));
    }
    let plan = QueryPlan::join(&block, &QueryPlan::scan(5));
    match width(&plan, &h) {
        Err(Error::WidthOverflow { node, bound }) => {
            assert_eq!(bound, 4);
            assert!(node < plan.len());
        }
        other => panic!("expected WidthOverflow, got {other:?}"),
    }
}

#[test]
fn cardinality_of_empty_set_is_an_error() {
    let h = relation_dominated();
    let cp = snowflake_cards(&h);
    assert!(matches!(
        cp.cardinality(&h, RelSet::empty()),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn execute_rejects_schema_mismatch() {
    let h = relation_dominated();
    let db = MicroDatabase {
        tables: (0..h.num_relations())
            .map(|r| Table {
                attrs: h.edge(r as u32).iter().collect(),
                rows: vec![],
            })
            .collect(),
    };
    let mut bad = db.clone();
    bad.tables[0].attrs = vec![0]; // wrong arity
    let plan = QueryPlan::join(&QueryPlan::scan(0), &QueryPlan::scan(5));
    assert!(matches!(execute(&h, &plan, &bad), Err(Error::Schema(_))));
    // and a plan over the right schema works on empty tables
    let report = execute(&h, &plan, &db).unwrap();
    assert_eq!(report.rows.len(), 0);
}

#[test]
fn true_cardinality_cap_respected() {
    let h = relation_dominated();
    let db = MicroDatabase {
        tables: (0..h.num_relations())
            .map(|r| Table {
                attrs: h.edge(r as u32).iter().collect(),
                rows: vec![],
            })
            .collect(),
    };
    let caps = Caps {
        true_card_edges: 3,
        ..Caps::default()
    };
    assert!(matches!(
        metadecomp::oracle::true_cardinalities(&h, &db, &caps),
        Err(Error::CapExceeded(_))
    ));
}

/// The perturbation's relative error is log-normal: a Kolmogorov-Smirnov
/// check of ln(perturbed/original) against Normal(0, sigma) over 10^4 draws.
#[test]
fn perturbation_is_log_normal() {
    let sigma = 0.5f64;
    let base = 1.0e9f64;
    // one large entry per provider; 10^4 independent seeded draws
    let _h = Hypergraph::new(
        vec![
            ("R1".into(), vec!["a".into(), "b".into()]),
            ("R2".into(), vec!["b".into()]),
        ],
        vec![],
    )
    .unwrap();
    let mut table = HashMap::new();
    table.insert(RelSet::singleton(0), base);
    table.insert(RelSet::singleton(1), base);
    table.insert(RelSet(0b11), base);
    let cp = CardinalityProvider::from_table(table).unwrap();
    let mut samples: Vec<f64> = Vec::with_capacity(10_000);
    for seed in 0..10_000 / 3 + 1 {
        let p = perturb_cards(&cp, sigma, seed as u64);
        for (s, v) in p.entries() {
            let orig = cp.get(s).unwrap();
            samples.push((v / orig).ln());
        }
    }
    samples.truncate(10_000);
    samples.sort_by(f64::total_cmp);
    let normal = Normal::new(0.0, sigma).unwrap();
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in samples.iter().enumerate() {
        let f = normal.cdf(*x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    // 1% critical value ~ 1.63 / sqrt(n) = 0.0163; allow a little headroom
    // for the ceil-to-integer rounding of the perturbed entries
    assert!(
        d < 0.02,
        "KS statistic {d:.4} too large for log-normal noise"
    );
}
