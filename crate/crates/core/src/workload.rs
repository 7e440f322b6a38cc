//! Workload generation: named example queries, random acyclic instances,
//! random micro-databases and cardinality tables, and log-normal cardinality
//! perturbation.

use crate::hypergraph::{Hypergraph, RelId};
use crate::oracle::{connected_subsets, MicroDatabase, Table};
use crate::plan::CardinalityProvider;
use crate::set::RelSet;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::collections::HashMap;

fn build(spec: &[(&str, &[&str])], output: &[&str]) -> Hypergraph {
    Hypergraph::new(
        spec.iter()
            .map(|(n, attrs)| (n.to_string(), attrs.iter().map(|a| a.to_string()).collect()))
            .collect(),
        output.iter().map(|s| s.to_string()).collect(),
    )
    .expect("example query must be well-formed")
}

/// Star query: n relations R_i[x1, x_{i+1}] all sharing the hub attribute x1.
pub fn star(n: usize) -> Hypergraph {
    let relations: Vec<(String, Vec<String>)> = (1..=n)
        .map(|i| {
            (
                format!("R{i}"),
                vec!["x1".to_string(), format!("x{}", i + 1)],
            )
        })
        .collect();
    Hypergraph::new(relations, vec![]).expect("star query must be well-formed")
}

/// Chain query: R_i[x_i, x_{i+1}].
pub fn chain(n: usize) -> Hypergraph {
    let relations: Vec<(String, Vec<String>)> = (1..=n)
        .map(|i| {
            (
                format!("R{i}"),
                vec![format!("x{i}"), format!("x{}", i + 1)],
            )
        })
        .collect();
    Hypergraph::new(relations, vec![]).expect("chain query must be well-formed")
}

/// Hierarchical Boolean query: every attribute is shared by at most one pair
/// of relations, so a unique tree shape exists.
pub fn hierarchical() -> Hypergraph {
    build(
        &[
            ("R1", &["x1", "x2", "x3"]),
            ("R2", &["x1", "x4", "x5"]),
            ("R3", &["x5", "x6"]),
            ("R4", &["x3", "x7"]),
        ],
        &[],
    )
}

/// Four relations whose query graph is a clique: R1 holds the core x1,x2,x3
/// and the others pairwise overlap it.
pub fn clique_graph() -> Hypergraph {
    build(
        &[
            ("R1", &["x1", "x2", "x3", "x4"]),
            ("R2", &["x1", "x2", "x5"]),
            ("R3", &["x1", "x3", "x6"]),
            ("R4", &["x2", "x3", "x7"]),
        ],
        &[],
    )
}

/// `clique_graph` plus a twin R5 sharing the same core {x1,x2,x3}; the two
/// core-carrying relations are mutually reducible.
pub fn shared_core() -> Hypergraph {
    build(
        &[
            ("R1", &["x1", "x2", "x3", "x4"]),
            ("R2", &["x1", "x2", "x5"]),
            ("R3", &["x1", "x3", "x6"]),
            ("R4", &["x2", "x3", "x7"]),
            ("R5", &["x1", "x2", "x3", "x8"]),
        ],
        &[],
    )
}

/// Five relations where R5's only interface is {x1}, so it may hang under any
/// other relation in a join tree.
pub fn floating_satellite() -> Hypergraph {
    build(
        &[
            ("R1", &["x1", "x2", "x6"]),
            ("R2", &["x1", "x2", "x3", "x7"]),
            ("R3", &["x1", "x3", "x4", "x8"]),
            ("R4", &["x1", "x4", "x9"]),
            ("R5", &["x1", "x5"]),
        ],
        &[],
    )
}

/// The canonical cyclic query.
pub fn triangle() -> Hypergraph {
    build(
        &[("R", &["a", "b"]), ("S", &["b", "c"]), ("T", &["a", "c"])],
        &[],
    )
}

/// Snowflake-shaped relation-dominated query: a single output attribute that
/// lives in one relation (R_n).
pub fn relation_dominated() -> Hypergraph {
    build(
        &[
            ("R_ci", &["x_mid", "x_pid"]),
            ("R_cn", &["x_cid", "x_cc"]),
            ("R_k", &["x_kid", "x_k"]),
            ("R_mc", &["x_mid", "x_cid"]),
            ("R_mk", &["x_mid", "x_kid"]),
            ("R_n", &["x_pid", "x_n"]),
            ("R_t", &["x_mid", "x_t"]),
        ],
        &["x_n"],
    )
}

/// Random connected acyclic instance: sample a tree over relations, give each
/// relation private attributes, and link each edge either through a fresh
/// shared attribute or (with probability `shared_attr_bias`) by reusing the
/// parent's hub attribute, which creates mutually reducible groups.
pub fn gen_acyclic(n: usize, fanout_max: usize, shared_attr_bias: f64, seed: u64) -> Hypergraph {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next_attr = 0usize;
    let mut fresh = |k: usize| -> Vec<usize> {
        let out = (next_attr..next_attr + k).collect();
        next_attr += k;
        out
    };
    let mut attrs: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut hub: Vec<Option<usize>> = vec![None; n];
    let mut fan = vec![0usize; n];
    attrs.push(fresh(1 + rng.gen_range(0..2)));
    for i in 1..n {
        let candidates: Vec<usize> = (0..i).filter(|&p| fan[p] < fanout_max.max(1)).collect();
        let p = candidates[rng.gen_range(0..candidates.len())];
        fan[p] += 1;
        let link = if rng.gen_bool(shared_attr_bias) {
            match hub[p] {
                Some(a) => a,
                None => {
                    let a = fresh(1)[0];
                    attrs[p].push(a);
                    hub[p] = Some(a);
                    a
                }
            }
        } else {
            let a = fresh(1)[0];
            attrs[p].push(a);
            a
        };
        let mut own = fresh(1 + rng.gen_range(0..2));
        own.push(link);
        attrs.push(own);
    }
    let relations: Vec<(String, Vec<String>)> = attrs
        .iter()
        .enumerate()
        .map(|(i, list)| {
            (
                format!("R{}", i + 1),
                list.iter().map(|a| format!("x{}", a + 1)).collect(),
            )
        })
        .collect();
    let h = Hypergraph::new(relations, vec![]).expect("generated query must be well-formed");
    debug_assert!(h.gyo_is_acyclic());
    h
}

/// Random tuples over shared per-attribute integer domains; domain sizes vary
/// per attribute so join selectivities do too. Base rows are deduplicated
/// (set semantics).
pub fn random_db(h: &Hypergraph, seed: u64, max_rows: usize, max_domain: i64) -> MicroDatabase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d_62);
    let domains: Vec<i64> = (0..h.num_attrs())
        .map(|_| rng.gen_range(1..=max_domain.max(1)))
        .collect();
    let mut tables = Vec::with_capacity(h.num_relations());
    for (_, edge) in h.edges() {
        let attrs: Vec<u32> = edge.iter().collect();
        let rows = rng.gen_range(1..=max_rows.max(1));
        let mut seen = std::collections::HashSet::new();
        for _ in 0..rows {
            let row: Vec<i64> = attrs
                .iter()
                .map(|&a| rng.gen_range(0..domains[a as usize]))
                .collect();
            seen.insert(row);
        }
        let mut rows: Vec<Vec<i64>> = seen.into_iter().collect();
        rows.sort_unstable();
        tables.push(Table { attrs, rows });
    }
    MicroDatabase { tables }
}

/// Random integer cardinality table over every connected relation subset.
pub fn random_cards(h: &Hypergraph, seed: u64, max_card: u64) -> CardinalityProvider {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x63_61);
    let mut table = HashMap::new();
    let mut subsets = connected_subsets(h);
    subsets.sort_unstable();
    for s in subsets {
        table.insert(s, rng.gen_range(1..=max_card.max(1)) as f64);
    }
    CardinalityProvider::from_table(table).expect("connected subsets include singletons")
}

/// Multiplies every cardinality by e^ε with ε ~ Normal(0, σ²), clamped up to
/// at least one row. σ = 0 returns the table untouched.
pub fn perturb_cards(cp: &CardinalityProvider, sigma: f64, seed: u64) -> CardinalityProvider {
    if sigma == 0.0 {
        return cp.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x70_63);
    let normal = Normal::new(0.0, sigma).expect("sigma must be nonnegative");
    let mut entries: Vec<(RelSet, f64)> = cp.entries().collect();
    entries.sort_unstable_by_key(|(s, _)| *s);
    let mut table = HashMap::new();
    for (s, c) in entries {
        let eps: f64 = normal.sample(&mut rng);
        table.insert(s, (c * eps.exp()).ceil().max(1.0));
    }
    let mut out = CardinalityProvider::from_table(table).expect("perturb keeps all entries");
    if let Some(domains) = cp.domains() {
        out = out.with_domains(domains.clone());
    }
    out
}

/// Convenience: relation id of the single relation containing all output
/// attributes, when the query is relation-dominated.
pub fn dominating_relation(h: &Hypergraph) -> Option<RelId> {
    (0..h.num_relations() as RelId).find(|&r| h.output_attrs().is_subset_of(h.edge(r)))
}
