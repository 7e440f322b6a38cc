//! Cost-based width-1 plan selection directly on the meta-decomposition.
//!
//! A bottom-up pass builds the optimal plan for every child-direction
//! subtree, a top-down pass builds the complement plans, and the final plan
//! is the cheapest join of the two halves over any meta edge. The local join
//! with a node's neighbors is a star-join ordering problem solved exactly by
//! subset DP up to a fan-out limit, with greedy operator ordering as the
//! fallback. Re-branching is handled by re-homing each movable subtree onto
//! each candidate host and taking the cheapest variant.

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, RelId};
use crate::jointree::JoinTree;
use crate::meta::MetaDecomposition;
use crate::plan::{width, CardinalityProvider, QueryPlan};
use crate::set::RelSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalMode {
    Exact,
    Greedy,
}

#[derive(Clone, Debug)]
pub struct OptimizerConfig {
    pub local: LocalMode,
    /// Above this fan-out the exact DP hands over to greedy ordering.
    pub exact_fanout_limit: usize,
    pub rebranch: bool,
    /// Restrict the final root join to meta edges touching this relation
    /// (relation-dominated rooting).
    pub root_rel: Option<RelId>,
    /// Cap on the number of unrooted tree shapes the re-branching search
    /// walks; beyond it the best plan so far is kept with a warning.
    pub rebranch_variant_cap: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            local: LocalMode::Exact,
            exact_fanout_limit: 12,
            rebranch: true,
            root_rel: None,
            rebranch_variant_cap: 1_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Optimized {
    pub plan: QueryPlan,
    pub cost: f64,
    pub width: usize,
    pub used_estimates: bool,
    pub warnings: Vec<String>,
    pub dp_cells: u64,
}

/// A plan fragment with its relation set, accumulated C_out, and output size.
#[derive(Clone, Debug)]
pub struct SubPlan {
    pub plan: QueryPlan,
    pub rels: RelSet,
    pub cost: f64,
    pub out_rows: f64,
    pub estimated: bool,
}

fn scan_sub(h: &Hypergraph, cp: &CardinalityProvider, r: RelId) -> Result<SubPlan> {
    let rels = RelSet::singleton(r);
    let (rows, est) = cp.cardinality(h, rels)?;
    Ok(SubPlan {
        plan: QueryPlan::scan(r),
        rels,
        cost: rows,
        out_rows: rows,
        estimated: est,
    })
}

fn join_subs(
    h: &Hypergraph,
    cp: &CardinalityProvider,
    a: &SubPlan,
    b: &SubPlan,
) -> Result<SubPlan> {
    debug_assert!(h.attrs_of(a.rels).intersects(&h.attrs_of(b.rels)));
    let rels = a.rels.union(b.rels);
    let (rows, est) = cp.cardinality(h, rels)?;
    Ok(SubPlan {
        plan: QueryPlan::join(&a.plan, &b.plan),
        rels,
        cost: a.cost + b.cost + rows,
        out_rows: rows,
        estimated: a.estimated || b.estimated || est,
    })
}

fn shares(h: &Hypergraph, a: RelSet, b: RelSet) -> bool {
    h.attrs_of(a).intersects(&h.attrs_of(b))
}

/// Smallest relation id of a fragment; the deterministic tie-break.
fn min_rel(s: &SubPlan) -> RelId {
    s.rels.min_rel().unwrap_or(RelId::MAX)
}

/// Exact local star-join optimization by subset DP. With a hub the optimal
/// induced shape is left-deep with the hub in the deepest join; without one
/// (minor nodes) the cluster satellites may combine in any bushy shape, so
/// the DP considers every split.
pub fn optimize_local_exact(
    h: &Hypergraph,
    cp: &CardinalityProvider,
    hub: Option<&SubPlan>,
    satellites: &[SubPlan],
    fanout_limit: usize,
    dp_cells: &mut u64,
) -> Result<SubPlan> {
    if satellites.len() > fanout_limit {
        return Err(Error::CapExceeded(format!(
            "local fan-out {} exceeds exact DP limit {}",
            satellites.len(),
            fanout_limit
        )));
    }
    let mut sats = satellites.to_vec();
    sats.sort_by_key(min_rel);
    let k = sats.len();
    match (hub, k) {
        (Some(hub), 0) => return Ok(hub.clone()),
        (None, 0) => return Err(Error::Internal("local join with nothing to join".into())),
        (None, 1) => return Ok(sats[0].clone()),
        _ => {}
    }
    let mut cells: Vec<Option<SubPlan>> = vec![None; 1 << k];
    match hub {
        Some(hub) => {
            // left-deep: grow the hub's block one satellite at a time
            cells[0] = Some(hub.clone());
            for mask in 1..(1usize << k) {
                let mut best: Option<SubPlan> = None;
                for i in 0..k {
                    if mask & (1 << i) == 0 {
                        continue;
                    }
                    let Some(prev) = &cells[mask & !(1 << i)] else {
                        continue;
                    };
                    if !shares(h, prev.rels, sats[i].rels) {
                        continue;
                    }
                    *dp_cells += 1;
                    let cand = join_subs(h, cp, prev, &sats[i])?;
                    if best.as_ref().is_none_or(|b| cand.cost < b.cost) {
                        best = Some(cand);
                    }
                }
                cells[mask] = best;
            }
        }
        None => {
            // bushy over cluster blocks: any split of any subset
            for (i, s) in sats.iter().enumerate() {
                cells[1 << i] = Some(s.clone());
            }
            for mask in 1..(1usize << k) {
                if mask.count_ones() < 2 {
                    continue;
                }
                let mut best: Option<SubPlan> = None;
                let mut sub = (mask - 1) & mask;
                while sub > 0 {
                    let rest = mask & !sub;
                    if sub < rest {
                        break; // each unordered split once
                    }
                    if let (Some(a), Some(b)) = (&cells[sub], &cells[rest]) {
                        if shares(h, a.rels, b.rels) {
                            *dp_cells += 1;
                            let cand = join_subs(h, cp, a, b)?;
                            if best.as_ref().is_none_or(|bst| cand.cost < bst.cost) {
                                best = Some(cand);
                            }
                        }
                    }
                    sub = (sub - 1) & mask;
                }
                cells[mask] = best;
            }
        }
    }
    cells[(1 << k) - 1]
        .take()
        .ok_or_else(|| Error::Internal("local DP found no connected order".into()))
}

/// Greedy operator ordering: start from the hub (or the smallest-cardinality
/// satellite for minor nodes), then repeatedly join the satellite that
/// minimizes the next output cardinality.
pub fn optimize_local_greedy(
    h: &Hypergraph,
    cp: &CardinalityProvider,
    hub: Option<&SubPlan>,
    satellites: &[SubPlan],
) -> Result<SubPlan> {
    let mut sats = satellites.to_vec();
    sats.sort_by_key(min_rel);
    let mut acc = match hub {
        Some(hub) => hub.clone(),
        None => {
            if sats.is_empty() {
                return Err(Error::Internal("local join with nothing to join".into()));
            }
            let seed = (0..sats.len())
                .min_by(|&a, &b| {
                    sats[a]
                        .out_rows
                        .total_cmp(&sats[b].out_rows)
                        .then_with(|| min_rel(&sats[a]).cmp(&min_rel(&sats[b])))
                })
                .unwrap();
            sats.remove(seed)
        }
    };
    while !sats.is_empty() {
        let mut best: Option<(usize, f64)> = None;
        for (i, s) in sats.iter().enumerate() {
            if !shares(h, acc.rels, s.rels) {
                continue;
            }
            let (rows, _) = cp.cardinality(h, acc.rels.union(s.rels))?;
            let better = match best {
                None => true,
                Some((bi, brows)) => {
                    rows < brows || (rows == brows && min_rel(s) < min_rel(&sats[bi]))
                }
            };
            if better {
                best = Some((i, rows));
            }
        }
        let (i, _) =
            best.ok_or_else(|| Error::Internal("greedy ordering hit a Cartesian step".into()))?;
        let next = sats.remove(i);
        acc = join_subs(h, cp, &acc, &next)?;
    }
    Ok(acc)
}

struct LocalCtx<'a> {
    h: &'a Hypergraph,
    cp: &'a CardinalityProvider,
    cfg: &'a OptimizerConfig,
    warnings: Vec<String>,
    dp_cells: u64,
}

impl<'a> LocalCtx<'a> {
    fn local(&mut self, hub: Option<&SubPlan>, sats: &[SubPlan]) -> Result<SubPlan> {
        match self.cfg.local {
            LocalMode::Greedy => optimize_local_greedy(self.h, self.cp, hub, sats),
            LocalMode::Exact => {
                match optimize_local_exact(
                    self.h,
                    self.cp,
                    hub,
                    sats,
                    self.cfg.exact_fanout_limit,
                    &mut self.dp_cells,
                ) {
                    Err(Error::CapExceeded(msg)) => {
                        self.warnings
                            .push(format!("{msg}; fell back to greedy ordering"));
                        optimize_local_greedy(self.h, self.cp, hub, sats)
                    }
                    other => other,
                }
            }
        }
    }
}

/// Optimal width-1 plan induced by a fixed join tree: bottom-up, each node's
/// relation is star-joined with its children's completed sub-plans.
pub fn optimize_tree(
    h: &Hypergraph,
    t: &JoinTree,
    cp: &CardinalityProvider,
    cfg: &OptimizerConfig,
) -> Result<Optimized> {
    let mut ctx = LocalCtx {
        h,
        cp,
        cfg,
        warnings: Vec::new(),
        dp_cells: 0,
    };
    let mut full: Vec<Option<SubPlan>> = vec![None; t.len()];
    let mut order: Vec<usize> = Vec::with_capacity(t.len());
    let mut stack = vec![t.root];
    while let Some(v) = stack.pop() {
        order.push(v);
        stack.extend(t.children(v));
    }
    for &v in order.iter().rev() {
        let hub = scan_sub(h, cp, t.nodes[v].rel)?;
        let sats: Vec<SubPlan> = t
            .children(v)
            .into_iter()
            .map(|c| full[c].clone().unwrap())
            .collect();
        full[v] = Some(ctx.local(Some(&hub), &sats)?);
    }
    let best = full[t.root].take().unwrap();
    let w = width(&best.plan, h)?.width;
    Ok(Optimized {
        plan: best.plan,
        cost: best.cost,
        width: w,
        used_estimates: best.estimated,
        warnings: ctx.warnings,
        dp_cells: ctx.dp_cells,
    })
}

fn children_of(parent: &[Option<usize>], q: usize) -> Vec<usize> {
    (0..parent.len())
        .filter(|&c| parent[c] == Some(q))
        .collect()
}

fn order_top_down(parent: &[Option<usize>], root: usize) -> Vec<usize> {
    let mut out = vec![root];
    let mut i = 0;
    while i < out.len() {
        out.extend(children_of(parent, out[i]));
        i += 1;
    }
    out
}

/// One full two-pass optimization over a tree of labeled nodes: a physical
/// node's relation is its hub, a None label is a minor node.
fn run_direction_dp(
    h: &Hypergraph,
    lambdas: &[Option<RelId>],
    parent: &[Option<usize>],
    root: usize,
    cp: &CardinalityProvider,
    ctx: &mut LocalCtx,
    root_rel: Option<RelId>,
) -> Result<SubPlan> {
    if lambdas.len() == 1 {
        return scan_sub(h, cp, lambdas[root].expect("single node is physical"));
    }
    let hub_of = |q: usize| -> Result<Option<SubPlan>> {
        match lambdas[q] {
            Some(r) => Ok(Some(scan_sub(h, cp, r)?)),
            None => Ok(None),
        }
    };
    let top_down = order_top_down(parent, root);

    // Bottom-up: plan for the subtree hanging below each node.
    let mut down: Vec<Option<SubPlan>> = vec![None; lambdas.len()];
    for &q in top_down.iter().rev() {
        let sats: Vec<SubPlan> = children_of(parent, q)
            .into_iter()
            .map(|c| down[c].clone().unwrap())
            .collect();
        let hub = hub_of(q)?;
        down[q] = Some(ctx.local(hub.as_ref(), &sats)?);
    }

    // Top-down: plan for everything outside each node's subtree.
    let mut up: Vec<Option<SubPlan>> = vec![None; lambdas.len()];
    for &q in &top_down {
        let hub = hub_of(q)?;
        let kids = children_of(parent, q);
        let parent_sat: Option<SubPlan> =
            parent[q].map(|_| up[q].clone().expect("parents precede children top-down"));
        for &c in &kids {
            let mut sats: Vec<SubPlan> = kids
                .iter()
                .filter(|&&s| s != c)
                .map(|&s| down[s].clone().unwrap())
                .collect();
            if let Some(p) = &parent_sat {
                sats.push(p.clone());
            }
            if hub.is_none() && sats.is_empty() {
                return Err(Error::Internal("minor node left with no neighbors".into()));
            }
            up[c] = Some(ctx.local(hub.as_ref(), &sats)?);
        }
    }

    // Root join: cheapest down/up pairing over tree edges, optionally pinned
    // to edges touching the dominating relation.
    let pinned = root_rel.map(|r| {
        lambdas
            .iter()
            .position(|l| *l == Some(r))
            .expect("root relation must label a node")
    });
    let mut best: Option<SubPlan> = None;
    for c in 0..lambdas.len() {
        let Some(p) = parent[c] else { continue };
        if let Some(pin) = pinned {
            if c != pin && p != pin {
                continue;
            }
        }
        let cand = join_subs(h, cp, down[c].as_ref().unwrap(), up[c].as_ref().unwrap())?;
        if best.as_ref().is_none_or(|b| cand.cost < b.cost) {
            best = Some(cand);
        }
    }
    best.ok_or_else(|| Error::Internal("no root edge candidate".into()))
}

/// Cost-based width-1 plan selection on the meta-decomposition.
///
/// Without `rebranch` this is the plain two-pass algorithm over the meta's
/// own edges: each neighbor subtree enters the local problem as one unit.
/// That treatment can miss arrangements where a subtree re-homes under a
/// deeper node (or a cluster member hosts a sibling), so with `rebranch` the
/// optimizer instead runs the direction DP once per distinct unrooted join
/// tree streamed from the meta, which is exact: rootings and local orders
/// are still handled by the DP, never enumerated.
pub fn optimize_meta(
    h: &Hypergraph,
    m: &MetaDecomposition,
    cp: &CardinalityProvider,
    cfg: &OptimizerConfig,
) -> Result<Optimized> {
    let mut ctx = LocalCtx {
        h,
        cp,
        cfg,
        warnings: Vec::new(),
        dp_cells: 0,
    };
    let mut best: Option<SubPlan> = None;
    if cfg.rebranch && m.len() > 1 {
        for (shapes, t) in crate::enumerate::enumerate_join_tree_shapes(h, m)?.enumerate() {
            let t = t?;
            if shapes as u64 >= cfg.rebranch_variant_cap {
                ctx.warnings.push(format!(
                    "re-branching shapes capped at {}; best plan so far kept",
                    cfg.rebranch_variant_cap
                ));
                break;
            }
            let lambdas: Vec<Option<RelId>> = t.nodes.iter().map(|n| Some(n.rel)).collect();
            let cand =
                run_direction_dp(h, &lambdas, &t.parent, t.root, cp, &mut ctx, cfg.root_rel)?;
            if best.as_ref().is_none_or(|b| cand.cost < b.cost) {
                best = Some(cand);
            }
        }
    } else {
        let lambdas: Vec<Option<RelId>> = m.nodes.iter().map(|n| n.lambda).collect();
        best = Some(run_direction_dp(
            h,
            &lambdas,
            &m.parent,
            m.root,
            cp,
            &mut ctx,
            cfg.root_rel,
        )?);
    }
    let best = best.ok_or_else(|| Error::Internal("optimizer produced no plan".into()))?;
    let w = width(&best.plan, h)?.width;
    Ok(Optimized {
        plan: best.plan,
        cost: best.cost,
        width: w,
        used_estimates: best.estimated,
        warnings: ctx.warnings,
        dp_cells: ctx.dp_cells,
    })
}

/// Wraps plain QueryPlans into DP fragments; the public entry point for the
/// standalone local-ordering operations.
pub fn sub_plan(h: &Hypergraph, cp: &CardinalityProvider, plan: QueryPlan) -> Result<SubPlan> {
    let info = crate::plan::annotate(&plan, h)?;
    let rels = info.rels[plan.root];
    let mut cost = 0.0;
    let mut estimated = false;
    for ix in plan.postorder() {
        let (v, est) = cp.cardinality(h, info.rels[ix])?;
        cost += v;
        estimated |= est;
    }
    let (out_rows, est) = cp.cardinality(h, rels)?;
    Ok(SubPlan {
        plan,
        rels,
        cost,
        out_rows,
        estimated: estimated || est,
    })
}
