//! Binary query plans, interfaces, plan width, the induced-by relation, and
//! the C_out cost model.
//!
//! Every plan node carries an implicit projection: it keeps exactly the
//! attributes that either appear in the query output or serve as join keys
//! with relations not yet joined (the node's interface).

use crate::error::{Error, Result};
use crate::hypergraph::{AttrId, Hypergraph, RelId};
use crate::jointree::JoinTree;
use crate::set::{AttrSet, RelSet};
use itertools::Itertools;
use std::collections::HashMap;

/// Exact minimum-cover search bound; larger widths raise WidthOverflow.
pub const WIDTH_SEARCH_BOUND: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanNode {
    Scan(RelId),
    Join(usize, usize),
}

/// Arena-backed binary plan tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryPlan {
    pub nodes: Vec<PlanNode>,
    pub root: usize,
}

impl QueryPlan {
    pub fn scan(rel: RelId) -> Self {
        QueryPlan {
            nodes: vec![PlanNode::Scan(rel)],
            root: 0,
        }
    }

    /// Joins two plans, merging arenas; the new root is the join node.
    pub fn join(left: &QueryPlan, right: &QueryPlan) -> Self {
        let mut nodes = left.nodes.clone();
        let offset = nodes.len();
        for n in &right.nodes {
            nodes.push(match n {
                PlanNode::Scan(r) => PlanNode::Scan(*r),
                PlanNode::Join(a, b) => PlanNode::Join(a + offset, b + offset),
            });
        }
        let root = nodes.len();
        nodes.push(PlanNode::Join(left.root, right.root + offset));
        QueryPlan { nodes, root }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node indices with children before parents.
    pub fn postorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((n, expanded)) = stack.pop() {
            if expanded {
                out.push(n);
                continue;
            }
            stack.push((n, true));
            if let PlanNode::Join(a, b) = self.nodes[n] {
                stack.push((b, false));
                stack.push((a, false));
            }
        }
        out
    }

    pub fn leaves(&self) -> Vec<RelId> {
        self.postorder()
            .into_iter()
            .filter_map(|n| match self.nodes[n] {
                PlanNode::Scan(r) => Some(r),
                _ => None,
            })
            .collect()
    }

    /// Canonical text form with join children ordered by smallest relation
    /// id; two plans are the same modulo child swaps iff the strings match.
    pub fn canonical_string(&self, h: &Hypergraph) -> String {
        fn go(p: &QueryPlan, h: &Hypergraph, n: usize) -> (u32, String) {
            match p.nodes[n] {
                PlanNode::Scan(r) => (r, h.rel_name(r).to_string()),
                PlanNode::Join(a, b) => {
                    let (ma, sa) = go(p, h, a);
                    let (mb, sb) = go(p, h, b);
                    if ma <= mb {
                        (ma, format!("({sa} {sb})"))
                    } else {
                        (mb, format!("({sb} {sa})"))
                    }
                }
            }
        }
        go(self, h, self.root).1
    }
}

/// Per-node relation sets, interfaces, and kept attributes; building it
/// validates the plan's structural invariants.
#[derive(Clone, Debug)]
pub struct PlanInfo {
    pub rels: Vec<RelSet>,
    pub interface: Vec<AttrSet>,
    pub kept: Vec<AttrSet>,
}

/// I(S): attributes shared between a relation subset and the rest of the
/// query. Depends only on the subset, not on plan shape.
pub fn interface_of(h: &Hypergraph, rels: RelSet) -> AttrSet {
    let residual = h.all_rels().minus(rels);
    h.attrs_of(rels).intersect(&h.attrs_of(residual))
}

/// kept(S) = I(S) ∪ (output ∩ attrs(S)): what survives the node's projection.
pub fn kept_of(h: &Hypergraph, rels: RelSet) -> AttrSet {
    interface_of(h, rels).union(&h.output_attrs().intersect(&h.attrs_of(rels)))
}

pub fn annotate(plan: &QueryPlan, h: &Hypergraph) -> Result<PlanInfo> {
    let n = plan.nodes.len();
    let mut rels = vec![RelSet::empty(); n];
    let mut seen = RelSet::empty();
    for ix in plan.postorder() {
        match plan.nodes[ix] {
            PlanNode::Scan(r) => {
                if (r as usize) >= h.num_relations() {
                    return Err(Error::InvalidArgument(format!("unknown relation id {r}")));
                }
                if seen.contains(r) {
                    return Err(Error::InvalidArgument(format!(
                        "relation {} scanned twice",
                        h.rel_name(r)
                    )));
                }
                seen.insert(r);
                rels[ix] = RelSet::singleton(r);
            }
            PlanNode::Join(a, b) => {
                if !h.attrs_of(rels[a]).intersects(&h.attrs_of(rels[b])) {
                    return Err(Error::InvalidArgument(
                        "join children share no attribute (Cartesian product)".into(),
                    ));
                }
                rels[ix] = rels[a].union(rels[b]);
            }
        }
    }
    if !h.is_connected_subset(rels[plan.root]) {
        return Err(Error::InvalidArgument(
            "plan covers a disconnected relation set".into(),
        ));
    }
    let interface: Vec<AttrSet> = rels.iter().map(|&s| interface_of(h, s)).collect();
    let kept: Vec<AttrSet> = rels.iter().map(|&s| kept_of(h, s)).collect();
    Ok(PlanInfo {
        rels,
        interface,
        kept,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanWidth {
    pub per_node: Vec<usize>,
    pub width: usize,
}

/// w(p): the smallest number of subtree relations covering I(p), found by
/// increasing-size subset search up to WIDTH_SEARCH_BOUND.
pub fn width(plan: &QueryPlan, h: &Hypergraph) -> Result<PlanWidth> {
    let info = annotate(plan, h)?;
    let mut per_node = vec![0usize; plan.nodes.len()];
    for ix in plan.postorder() {
        let iface = &info.interface[ix];
        if iface.is_empty() {
            per_node[ix] = 0;
            continue;
        }
        let members: Vec<RelId> = info.rels[ix].iter().collect();
        let mut found = None;
        'outer: for k in 1..=WIDTH_SEARCH_BOUND.min(members.len()) {
            for combo in members.iter().combinations(k) {
                let mut cover = AttrSet::new();
                for r in combo {
                    cover = cover.union(h.edge(*r));
                }
                if iface.is_subset_of(&cover) {
                    found = Some(k);
                    break 'outer;
                }
            }
        }
        per_node[ix] = found.ok_or(Error::WidthOverflow {
            node: ix,
            bound: WIDTH_SEARCH_BOUND,
        })?;
    }
    let width = per_node.iter().copied().max().unwrap_or(0);
    Ok(PlanWidth { per_node, width })
}

/// Witness for a positive induced-by check.
#[derive(Clone, Debug, Default)]
pub struct InducedWitness {
    /// tree node -> plan node with the same induced query
    pub node_map: Vec<(usize, usize)>,
    /// plan join node -> (covering relation for left child, for right child)
    pub join_covers: Vec<(usize, RelId, RelId)>,
}

/// Whether `plan` is induced by join tree `tree`: every tree node's induced
/// query shows up as a plan node, and every join's child interfaces are
/// covered by tree-adjacent relations.
pub fn is_induced_by(
    plan: &QueryPlan,
    tree: &JoinTree,
    h: &Hypergraph,
) -> Result<(bool, Option<InducedWitness>)> {
    let info = annotate(plan, h)?;
    let mut witness = InducedWitness::default();
    for p in 0..tree.len() {
        let q = (0..plan.nodes.len()).find(|&q| info.rels[q] == tree.induced_query(p));
        match q {
            Some(q) => witness.node_map.push((p, q)),
            None => return Ok((false, None)),
        }
    }
    let tree_edges = tree.undirected_edges();
    let adjacent = |s: RelId, t: RelId| {
        let key = (s.min(t), s.max(t));
        s != t && tree_edges.binary_search(&key).is_ok()
    };
    for ix in 0..plan.nodes.len() {
        let PlanNode::Join(u, v) = plan.nodes[ix] else {
            continue;
        };
        let mut ok = None;
        'search: for s in info.rels[u].iter() {
            if !info.interface[u].is_subset_of(h.edge(s)) {
                continue;
            }
            for t in info.rels[v].iter() {
                if info.interface[v].is_subset_of(h.edge(t)) && adjacent(s, t) {
                    ok = Some((s, t));
                    break 'search;
                }
            }
        }
        match ok {
            Some((s, t)) => witness.join_covers.push((ix, s, t)),
            None => return Ok((false, None)),
        }
    }
    Ok((true, Some(witness)))
}

/// Maps connected relation subsets to output cardinalities (post-selection,
/// post-projection row counts), with an optional independence estimator.
#[derive(Clone, Debug)]
pub struct CardinalityProvider {
    table: HashMap<RelSet, f64>,
    domains: Option<HashMap<AttrId, f64>>,
}

impl CardinalityProvider {
    /// Requires a singleton entry for every relation mentioned in the table.
    pub fn from_table(table: HashMap<RelSet, f64>) -> Result<Self> {
        for (s, v) in &table {
            if s.is_empty() {
                return Err(Error::InvalidArgument(
                    "cardinality of the empty set".into(),
                ));
            }
            if *v < 0.0 {
                return Err(Error::InvalidArgument("negative cardinality".into()));
            }
        }
        Ok(CardinalityProvider {
            table,
            domains: None,
        })
    }

    pub fn with_domains(mut self, domains: HashMap<AttrId, f64>) -> Self {
        self.domains = Some(domains);
        self
    }

    pub fn domains(&self) -> Option<&HashMap<AttrId, f64>> {
        self.domains.as_ref()
    }

    pub fn entries(&self) -> impl Iterator<Item = (RelSet, f64)> + '_ {
        self.table.iter().map(|(s, v)| (*s, *v))
    }

    pub fn insert(&mut self, rels: RelSet, card: f64) {
        self.table.insert(rels, card);
    }

    pub fn get(&self, rels: RelSet) -> Option<f64> {
        self.table.get(&rels).copied()
    }

    /// Exact lookup, or the System-R independence estimate when domains are
    /// configured: Π |R_i| / Π_a domain(a)^(occurrences-1). The flag reports
    /// whether the value was estimated.
    pub fn cardinality(&self, h: &Hypergraph, rels: RelSet) -> Result<(f64, bool)> {
        if rels.is_empty() {
            return Err(Error::InvalidArgument(
                "cardinality of the empty set".into(),
            ));
        }
        if let Some(v) = self.table.get(&rels) {
            return Ok((*v, false));
        }
        let Some(domains) = &self.domains else {
            return Err(Error::UnknownCardinality { rels });
        };
        let mut product = 1.0f64;
        for r in rels.iter() {
            let (v, _) = self.cardinality(h, RelSet::singleton(r))?;
            product *= v;
        }
        for a in h.attrs_of(rels).iter() {
            let occurrences = rels.iter().filter(|&r| h.edge(r).contains(a)).count();
            if occurrences >= 2 {
                let d = domains.get(&a).copied().unwrap_or(1.0).max(1.0);
                product /= d.powi(occurrences as i32 - 1);
            }
        }
        Ok((product.max(0.0), true))
    }
}

#[derive(Clone, Debug)]
pub struct CostReport {
    pub total: f64,
    /// Relation sets whose cardinality came from the estimator.
    pub estimated: Vec<RelSet>,
}

/// C_out: the sum of output cardinalities over all plan nodes, leaves
/// included. Leaf terms are plan-invariant for a fixed query, so they never
/// change the argmin.
pub fn cost(plan: &QueryPlan, h: &Hypergraph, cp: &CardinalityProvider) -> Result<CostReport> {
    let info = annotate(plan, h)?;
    let mut total = 0.0;
    let mut estimated = Vec::new();
    for ix in plan.postorder() {
        let (v, est) = cp.cardinality(h, info.rels[ix])?;
        total += v;
        if est {
            estimated.push(info.rels[ix]);
        }
    }
    Ok(CostReport { total, estimated })
}
