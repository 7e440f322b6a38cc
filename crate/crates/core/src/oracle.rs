//! Independent brute-force references: join-tree enumeration by filtering,
//! exhaustive plan enumeration, global subset DP, and a tiny hash-join
//! executor used to measure true cardinalities and intermediate sizes.
//!
//! Everything here is deliberately simple and kept independent of the
//! meta-decomposition machinery it cross-checks.

use crate::caps::Caps;
use crate::enumerate::enumerate_labeled_trees;
use crate::error::{Error, Result};
use crate::hypergraph::{AttrId, Hypergraph, RelId};
use crate::jointree::{CanonicalTree, JoinTree};
use crate::plan::{kept_of, CardinalityProvider, PlanNode, QueryPlan};
use crate::set::{AttrSet, RelSet};
use std::collections::{BTreeSet, HashMap, HashSet};

#[derive(Clone, Debug)]
pub struct Table {
    /// Column attribute ids, sorted ascending.
    pub attrs: Vec<AttrId>,
    pub rows: Vec<Vec<i64>>,
}

/// Tiny in-memory database: one table per relation, integer values.
#[derive(Clone, Debug)]
pub struct MicroDatabase {
    pub tables: Vec<Table>,
}

impl MicroDatabase {
    pub fn max_base_rows(&self) -> usize {
        self.tables.iter().map(|t| t.rows.len()).max().unwrap_or(0)
    }

    fn check_schema(&self, h: &Hypergraph) -> Result<()> {
        if self.tables.len() != h.num_relations() {
            return Err(Error::Schema(format!(
                "database has {} tables, query has {} relations",
                self.tables.len(),
                h.num_relations()
            )));
        }
        for (r, t) in self.tables.iter().enumerate() {
            let expected: Vec<AttrId> = h.edge(r as RelId).iter().collect();
            if t.attrs != expected {
                return Err(Error::Schema(format!(
                    "table {} columns do not match relation schema",
                    h.rel_name(r as RelId)
                )));
            }
            if t.rows.iter().any(|row| row.len() != t.attrs.len()) {
                return Err(Error::Schema(format!(
                    "table {} has rows of wrong arity",
                    h.rel_name(r as RelId)
                )));
            }
        }
        Ok(())
    }
}

/// Set-semantics relation value during execution.
#[derive(Clone, Debug)]
struct Relation {
    attrs: Vec<AttrId>,
    rows: HashSet<Vec<i64>>,
}

impl Relation {
    fn project(&self, keep: &AttrSet) -> Relation {
        let idx: Vec<usize> = self
            .attrs
            .iter()
            .enumerate()
            .filter(|(_, a)| keep.contains(**a))
            .map(|(i, _)| i)
            .collect();
        let attrs: Vec<AttrId> = idx.iter().map(|&i| self.attrs[i]).collect();
        let rows = self
            .rows
            .iter()
            .map(|r| idx.iter().map(|&i| r[i]).collect())
            .collect();
        Relation { attrs, rows }
    }

    fn distinct_on(&self, keep: &AttrSet) -> usize {
        self.project(keep).rows.len()
    }
}

fn hash_join(left: &Relation, right: &Relation) -> Relation {
    let shared: Vec<AttrId> = left
        .attrs
        .iter()
        .copied()
        .filter(|a| right.attrs.contains(a))
        .collect();
    let l_key: Vec<usize> = shared
        .iter()
        .map(|a| left.attrs.iter().position(|x| x == a).unwrap())
        .collect();
    let r_key: Vec<usize> = shared
        .iter()
        .map(|a| right.attrs.iter().position(|x| x == a).unwrap())
        .collect();
    let r_extra: Vec<usize> = (0..right.attrs.len())
        .filter(|i| !r_key.contains(i))
        .collect();
    let mut out_attrs = left.attrs.clone();
    out_attrs.extend(r_extra.iter().map(|&i| right.attrs[i]));

    let mut built: HashMap<Vec<i64>, Vec<&Vec<i64>>> = HashMap::new();
    for row in &right.rows {
        built
            .entry(r_key.iter().map(|&i| row[i]).collect())
            .or_default()
            .push(row);
    }
    let mut rows = HashSet::new();
    for row in &left.rows {
        let key: Vec<i64> = l_key.iter().map(|&i| row[i]).collect();
        if let Some(matches) = built.get(&key) {
            for m in matches {
                let mut combined = row.clone();
                combined.extend(r_extra.iter().map(|&i| m[i]));
                rows.insert(combined);
            }
        }
    }
    // keep columns sorted by attribute id for stable downstream projections
    let mut order: Vec<usize> = (0..out_attrs.len()).collect();
    order.sort_by_key(|&i| out_attrs[i]);
    let attrs: Vec<AttrId> = order.iter().map(|&i| out_attrs[i]).collect();
    let rows = rows
        .into_iter()
        .map(|r| order.iter().map(|&i| r[i]).collect())
        .collect();
    Relation { attrs, rows }
}

#[derive(Clone, Debug)]
pub struct NodeExec {
    pub rels: RelSet,
    /// Rows materialized at the node (after its kept-attribute projection).
    pub out_rows: usize,
    /// Distinct rows projected onto the node's interface.
    pub interface_rows: usize,
}

#[derive(Clone, Debug)]
pub struct ExecReport {
    pub attrs: Vec<AttrId>,
    pub rows: Vec<Vec<i64>>,
    pub per_node: Vec<NodeExec>,
    pub max_interface_rows: usize,
}

/// Evaluates a plan bottom-up with hash joins, projecting every node to its
/// kept attributes; reports per-node sizes and max |π_I(p) Q(p)|.
pub fn execute(h: &Hypergraph, plan: &QueryPlan, db: &MicroDatabase) -> Result<ExecReport> {
    db.check_schema(h)?;
    let info = crate::plan::annotate(plan, h)?;
    let mut values: Vec<Option<Relation>> = vec![None; plan.nodes.len()];
    let mut per_node = Vec::new();
    for ix in plan.postorder() {
        let rel = match plan.nodes[ix] {
            PlanNode::Scan(r) => {
                let t = &db.tables[r as usize];
                Relation {
                    attrs: t.attrs.clone(),
                    rows: t.rows.iter().cloned().collect(),
                }
            }
            PlanNode::Join(a, b) => {
                let l = values[a].take().unwrap();
                let r = values[b].take().unwrap();
                hash_join(&l, &r)
            }
        };
        let projected = rel.project(&info.kept[ix]);
        per_node.push(NodeExec {
            rels: info.rels[ix],
            out_rows: projected.rows.len(),
            interface_rows: rel.distinct_on(&info.interface[ix]),
        });
        values[ix] = Some(projected);
    }
    let root = values[plan.root].take().unwrap();
    let max_interface_rows = per_node.iter().map(|n| n.interface_rows).max().unwrap_or(0);
    let mut rows: Vec<Vec<i64>> = root.rows.into_iter().collect();
    rows.sort_unstable();
    Ok(ExecReport {
        attrs: root.attrs,
        rows,
        per_node,
        max_interface_rows,
    })
}

/// All connected relation subsets of the query, ascending by bitmask.
pub fn connected_subsets(h: &Hypergraph) -> Vec<RelSet> {
    let n = h.num_relations();
    let mut out: Vec<RelSet> = (0..n as u32).map(RelSet::singleton).collect();
    let mut frontier: Vec<RelSet> = out.clone();
    let mut seen: HashSet<RelSet> = out.iter().copied().collect();
    while let Some(s) = frontier.pop() {
        for r in 0..n as u32 {
            if s.contains(r) {
                continue;
            }
            if h.attrs_of(s).intersects(h.edge(r)) {
                let mut bigger = s;
                bigger.insert(r);
                if seen.insert(bigger) {
                    out.push(bigger);
                    frontier.push(bigger);
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// True cardinality table: |π_kept(S) (⋈ S)| for every connected subset S,
/// computed by executing the joins.
pub fn true_cardinalities(
    h: &Hypergraph,
    db: &MicroDatabase,
    caps: &Caps,
) -> Result<CardinalityProvider> {
    if h.num_relations() > caps.true_card_edges {
        return Err(Error::CapExceeded(format!(
            "true cardinalities capped at {} relations",
            caps.true_card_edges
        )));
    }
    db.check_schema(h)?;
    let mut table = HashMap::new();
    for s in connected_subsets(h) {
        if s.len() == 1 {
            // singleton entries are post-selection base row counts
            let r = s.min_rel().unwrap();
            table.insert(s, db.tables[r as usize].rows.len() as f64);
            continue;
        }
        // fold joins in a connectivity-respecting order, project at the end
        let mut rels: Vec<RelId> = s.iter().collect();
        let mut acc: Option<Relation> = None;
        while !rels.is_empty() {
            let pick = match &acc {
                None => 0,
                Some(a) => rels
                    .iter()
                    .position(|&r| h.edge(r).iter().any(|x| a.attrs.contains(&x)))
                    .expect("subset is connected"),
            };
            let r = rels.remove(pick);
            let t = &db.tables[r as usize];
            let rel = Relation {
                attrs: t.attrs.clone(),
                rows: t.rows.iter().cloned().collect(),
            };
            acc = Some(match acc {
                None => rel,
                Some(a) => {
                    let joined = hash_join(&a, &rel);
                    if joined.rows.len() > caps.max_intermediate_rows {
                        return Err(Error::CapExceeded(
                            "intermediate result too large for true-cardinality scan".into(),
                        ));
                    }
                    joined
                }
            });
        }
        let count = acc.unwrap().distinct_on(&kept_of(h, s));
        table.insert(s, count as f64);
    }
    CardinalityProvider::from_table(table)
}

/// Reference join-tree set: every rooted labeled tree over the relations
/// (Prüfer sequences × roots) that passes validation.
pub fn oracle_join_trees(h: &Hypergraph, caps: &Caps) -> Result<Vec<JoinTree>> {
    let n = h.num_relations();
    if n > caps.oracle_tree_edges {
        return Err(Error::CapExceeded(format!(
            "tree oracle capped at {} relations",
            caps.oracle_tree_edges
        )));
    }
    let mut out = Vec::new();
    for edges in enumerate_labeled_trees(n) {
        for root in 0..n as RelId {
            // orient edges away from the root
            let mut parents = Vec::with_capacity(n.saturating_sub(1));
            let mut placed = vec![false; n];
            placed[root as usize] = true;
            let mut queue = vec![root as usize];
            while let Some(v) = queue.pop() {
                for &(a, b) in &edges {
                    let (x, y) = (a, b);
                    if x == v && !placed[y] {
                        placed[y] = true;
                        parents.push((y as RelId, v as RelId));
                        queue.push(y);
                    } else if y == v && !placed[x] {
                        placed[x] = true;
                        parents.push((x as RelId, v as RelId));
                        queue.push(x);
                    }
                }
            }
            let t = JoinTree::from_parents(h, root, &parents);
            if t.validate(h).is_ok() {
                out.push(t);
            }
        }
    }
    Ok(out)
}

pub fn oracle_join_tree_set(h: &Hypergraph, caps: &Caps) -> Result<BTreeSet<CanonicalTree>> {
    Ok(oracle_join_trees(h, caps)?
        .into_iter()
        .map(|t| t.canonical_key())
        .collect())
}

/// Globally optimal Cartesian-free bushy plan by plain subset DP over
/// connected subsets; the baseline the width-1 optimum is compared against.
pub fn oracle_global_dp(
    h: &Hypergraph,
    cp: &CardinalityProvider,
    caps: &Caps,
) -> Result<(QueryPlan, f64)> {
    let n = h.num_relations();
    if n > caps.oracle_dp_edges {
        return Err(Error::CapExceeded(format!(
            "global DP capped at {} relations",
            caps.oracle_dp_edges
        )));
    }
    let mut best: HashMap<RelSet, (QueryPlan, f64)> = HashMap::new();
    let subsets = connected_subsets(h); // ascending bitmask: subsets precede supersets
    for &s in &subsets {
        if s.len() == 1 {
            let r = s.min_rel().unwrap();
            let (card, _) = cp.cardinality(h, s)?;
            best.insert(s, (QueryPlan::scan(r), card));
            continue;
        }
        let (out_card, _) = cp.cardinality(h, s)?;
        let mut found: Option<(QueryPlan, f64)> = None;
        for a in s.proper_subsets() {
            let b = s.minus(a);
            if a.min_rel() > b.min_rel() {
                continue; // unordered split
            }
            let (Some((pa, ca)), Some((pb, cb))) = (best.get(&a), best.get(&b)) else {
                continue; // one half disconnected
            };
            if !h.attrs_of(a).intersects(&h.attrs_of(b)) {
                continue; // Cartesian product
            }
            let total = ca + cb + out_card;
            if found.as_ref().is_none_or(|(_, c)| total < *c) {
                found = Some((QueryPlan::join(pa, pb), total));
            }
        }
        if let Some(f) = found {
            best.insert(s, f);
        }
    }
    best.remove(&h.all_rels())
        .ok_or_else(|| Error::Internal("global DP found no plan for the full query".into()))
}

/// Every Cartesian-free bushy plan over `rels` (unordered children, one
/// representative per shape). Exponential; test-scale inputs only.
pub fn all_plans(h: &Hypergraph, rels: RelSet) -> Vec<QueryPlan> {
    fn go(
        h: &Hypergraph,
        rels: RelSet,
        memo: &mut HashMap<RelSet, Vec<QueryPlan>>,
    ) -> Vec<QueryPlan> {
        if let Some(v) = memo.get(&rels) {
            return v.clone();
        }
        let mut out = Vec::new();
        if rels.len() == 1 {
            out.push(QueryPlan::scan(rels.min_rel().unwrap()));
        } else {
            for a in rels.proper_subsets() {
                let b = rels.minus(a);
                if a.min_rel() > b.min_rel() {
                    continue;
                }
                if !h.attrs_of(a).intersects(&h.attrs_of(b)) {
                    continue;
                }
                if !h.is_connected_subset(a) || !h.is_connected_subset(b) {
                    continue;
                }
                for pa in go(h, a, memo) {
                    for pb in go(h, b, memo) {
                        out.push(QueryPlan::join(&pa, &pb));
                    }
                }
            }
        }
        memo.insert(rels, out.clone());
        out
    }
    go(h, rels, &mut HashMap::new())
}
