//! Meta-decompositions: a linear-size tree that encodes every join tree of an
//! acyclic query.
//!
//! Construction runs GYO-style reduction rounds. Each round first collapses
//! every class of mutually reducible ears (edges with identical overlap) into
//! nodes hanging off one special hyperedge, then removes all remaining ears
//! simultaneously. Minor nodes (empty λ) stand for the shared interface of
//! two or more nodes with equal κ.

use crate::error::{Error, Result};
use crate::hypergraph::{AttrId, EdgeKey, Hypergraph, RelId, WorkingHypergraph};
use crate::set::AttrSet;
use std::collections::HashMap;

#[derive(Clone, Debug)]
pub struct MetaNode {
    /// Base relation for physical nodes, None for minor nodes.
    pub lambda: Option<RelId>,
    pub chi: AttrSet,
    pub kappa: AttrSet,
    /// Removal sequence; higher means removed later ("higher" in the tree).
    pub seq: u32,
}

#[derive(Clone, Debug)]
pub struct MetaDecomposition {
    pub nodes: Vec<MetaNode>,
    pub parent: Vec<Option<usize>>,
    pub root: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MetaViolation {
    /// C1: a base relation labels zero or several nodes.
    Coverage {
        rel: RelId,
        count: usize,
    },
    /// C2 over χ-labels.
    Connectedness {
        attr: AttrId,
    },
    /// C3'': a physical node whose χ is not its relation's attribute set.
    MinimalWidth {
        node: usize,
    },
    /// C4(a): κ(p) must equal χ(p) ∩ χ(outside subtree) and sit inside χ(parent).
    InterfaceA {
        node: usize,
    },
    /// C4(b): p hangs below the highest node containing κ(p).
    InterfaceB {
        node: usize,
        higher: usize,
    },
    /// κ(root) must be empty.
    RootKappa,
    /// C5: a κ-class of size ≥ 2 without exactly one minor carrying it.
    MinorUniqueness {
        kappa: AttrSet,
        minors: usize,
    },
    Structure(String),
}

impl std::fmt::Display for MetaViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MetaViolation::Coverage { rel, count } => {
                write!(f, "C1 violated: relation {rel} labels {count} nodes")
            }
            MetaViolation::Connectedness { attr } => {
                write!(f, "C2 violated: attribute {attr} disconnected")
            }
            MetaViolation::MinimalWidth { node } => {
                write!(f, "C3'' violated at node {node}")
            }
            MetaViolation::InterfaceA { node } => write!(f, "C4(a) violated at node {node}"),
            MetaViolation::InterfaceB { node, higher } => {
                write!(
                    f,
                    "C4(b) violated: node {node} could hang at {higher} or above"
                )
            }
            MetaViolation::RootKappa => write!(f, "C4 violated: kappa(root) must be empty"),
            MetaViolation::MinorUniqueness { kappa, minors } => {
                write!(f, "C5 violated: kappa class {kappa:?} has {minors} minors")
            }
            MetaViolation::Structure(s) => write!(f, "malformed meta-decomposition: {s}"),
        }
    }
}

impl MetaDecomposition {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_minor(&self, p: usize) -> bool {
        self.nodes[p].lambda.is_none()
    }

    pub fn minor_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.lambda.is_none()).count()
    }

    pub fn children(&self, p: usize) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&c| self.parent[c] == Some(p))
            .collect()
    }

    pub fn subtree(&self, p: usize) -> Vec<usize> {
        let mut out = vec![p];
        let mut i = 0;
        while i < out.len() {
            out.extend(self.children(out[i]));
            i += 1;
        }
        out
    }

    pub fn fanout(&self) -> usize {
        let mut counts = vec![0usize; self.nodes.len()];
        for p in self.parent.iter().flatten() {
            counts[*p] += 1;
        }
        counts.into_iter().max().unwrap_or(0)
    }

    pub fn node_of_rel(&self, r: RelId) -> Option<usize> {
        self.nodes.iter().position(|n| n.lambda == Some(r))
    }

    /// Children ordered by smallest relation id in their subtree (minors sort
    /// by their smallest descendant relation); stable emission order.
    pub fn ordered_children(&self, p: usize) -> Vec<usize> {
        let mut cs = self.children(p);
        cs.sort_by_key(|&c| {
            self.subtree(c)
                .into_iter()
                .filter_map(|n| self.nodes[n].lambda)
                .min()
                .unwrap_or(RelId::MAX)
        });
        cs
    }

    /// Bottom-up node order (children before parents).
    pub fn bottom_up(&self) -> Vec<usize> {
        let mut order = self.top_down();
        order.reverse();
        order
    }

    /// Top-down node order (parents before children), root first.
    pub fn top_down(&self) -> Vec<usize> {
        let mut out = vec![self.root];
        let mut i = 0;
        while i < out.len() {
            out.extend(self.children(out[i]));
            i += 1;
        }
        out
    }

    fn structure_ok(&self) -> std::result::Result<(), MetaViolation> {
        let n = self.nodes.len();
        if self.root >= n || self.parent[self.root].is_some() {
            return Err(MetaViolation::Structure("bad root".into()));
        }
        for start in 0..n {
            let (mut cur, mut steps) = (start, 0usize);
            while let Some(p) = self.parent[cur] {
                cur = p;
                steps += 1;
                if steps > n {
                    return Err(MetaViolation::Structure("cycle in parent map".into()));
                }
            }
            if cur != self.root {
                return Err(MetaViolation::Structure(format!(
                    "node {start} not under root"
                )));
            }
        }
        Ok(())
    }

    /// Checks C1, C2, C3'', C4(a), C4(b), C5 by direct definition.
    pub fn validate(&self, h: &Hypergraph) -> std::result::Result<(), MetaViolation> {
        self.structure_ok()?;
        // C1
        for r in 0..h.num_relations() as RelId {
            let count = self.nodes.iter().filter(|n| n.lambda == Some(r)).count();
            if count != 1 {
                return Err(MetaViolation::Coverage { rel: r, count });
            }
        }
        // C2 over chi
        for a in 0..h.num_attrs() as AttrId {
            let members: Vec<usize> = (0..self.len())
                .filter(|&i| self.nodes[i].chi.contains(a))
                .collect();
            if members.len() <= 1 {
                continue;
            }
            let mut reach = vec![false; self.len()];
            reach[members[0]] = true;
            let mut frontier = vec![members[0]];
            while let Some(x) = frontier.pop() {
                let mut neigh = self.children(x);
                if let Some(p) = self.parent[x] {
                    neigh.push(p);
                }
                for y in neigh {
                    if !reach[y] && members.contains(&y) {
                        reach[y] = true;
                        frontier.push(y);
                    }
                }
            }
            if members.iter().any(|&m| !reach[m]) {
                return Err(MetaViolation::Connectedness { attr: a });
            }
        }
        // C3''
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(r) = n.lambda {
                if &n.chi != h.edge(r) {
                    return Err(MetaViolation::MinimalWidth { node: i });
                }
            }
        }
        // C4
        if !self.nodes[self.root].kappa.is_empty() {
            return Err(MetaViolation::RootKappa);
        }
        for p in 0..self.len() {
            let Some(q) = self.parent[p] else { continue };
            let inside = self.subtree(p);
            let mut outside_chi = AttrSet::new();
            for s in 0..self.len() {
                if !inside.contains(&s) {
                    outside_chi = outside_chi.union(&self.nodes[s].chi);
                }
            }
            let expected = self.nodes[p].chi.intersect(&outside_chi);
            if self.nodes[p].kappa != expected
                || !self.nodes[p].kappa.is_subset_of(&self.nodes[q].chi)
            {
                return Err(MetaViolation::InterfaceA { node: p });
            }
            if self.nodes[p].kappa != self.nodes[q].chi {
                let q_subtree = self.subtree(q);
                for s in 0..self.len() {
                    if !q_subtree.contains(&s)
                        && self.nodes[p].kappa.is_subset_of(&self.nodes[s].chi)
                    {
                        return Err(MetaViolation::InterfaceB { node: p, higher: s });
                    }
                }
            }
        }
        // C5
        let mut by_kappa: HashMap<&AttrSet, Vec<usize>> = HashMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            by_kappa.entry(&n.kappa).or_default().push(i);
        }
        for (kappa, members) in by_kappa {
            if members.len() < 2 {
                continue;
            }
            let minors = self
                .nodes
                .iter()
                .filter(|n| n.lambda.is_none() && &n.chi == kappa)
                .count();
            if minors != 1 {
                return Err(MetaViolation::MinorUniqueness {
                    kappa: kappa.clone(),
                    minors,
                });
            }
        }
        Ok(())
    }
}

/// One reduction round: the mutually-reducible classes collapsed, the ears
/// removed, the special edges added, and the edge held back (if the round
/// would otherwise have emptied the hypergraph).
#[derive(Clone, Debug, Default)]
pub struct ReductionRound {
    pub groups: Vec<(Vec<EdgeKey>, AttrSet)>,
    pub ears: Vec<EdgeKey>,
    pub specials_added: Vec<EdgeKey>,
    pub kept: Option<EdgeKey>,
}

/// Driver for the reduction; owns the working hypergraph and the nodes
/// created so far.
pub struct Reducer {
    work: WorkingHypergraph,
    nodes: Vec<MetaNode>,
    /// χ-set of each minor node → index in `nodes` (dedup by χ).
    minor_ix: HashMap<AttrSet, usize>,
    /// EdgeKey of a base edge → node index.
    base_ix: HashMap<RelId, usize>,
    seq: u32,
}

impl Reducer {
    pub fn new(h: &Hypergraph) -> Self {
        Reducer {
            work: WorkingHypergraph::from_hypergraph(h),
            nodes: Vec::new(),
            minor_ix: HashMap::new(),
            base_ix: HashMap::new(),
            seq: 0,
        }
    }

    pub fn done(&self) -> bool {
        self.work.is_empty()
    }

    fn record_node(&mut self, key: EdgeKey, chi: AttrSet, kappa: AttrSet) {
        self.seq += 1;
        match key {
            EdgeKey::Base(r) => {
                let ix = self.nodes.len();
                self.nodes.push(MetaNode {
                    lambda: Some(r),
                    chi,
                    kappa,
                    seq: self.seq,
                });
                self.base_ix.insert(r, ix);
            }
            EdgeKey::Special(_) => {
                // The special edge's node is the minor with χ = its attrs;
                // the latest removal settles κ and seq.
                if let Some(&ix) = self.minor_ix.get(&chi) {
                    self.nodes[ix].kappa = kappa;
                    self.nodes[ix].seq = self.seq;
                } else {
                    let ix = self.nodes.len();
                    self.minor_ix.insert(chi.clone(), ix);
                    self.nodes.push(MetaNode {
                        lambda: None,
                        chi,
                        kappa,
                        seq: self.seq,
                    });
                }
            }
        }
    }

    /// Ensures a minor node exists for a κ value shared by ≥ 2 nodes.
    fn ensure_minor_for(&mut self, kappa: &AttrSet) {
        let sharers = self.nodes.iter().filter(|n| &n.kappa == kappa).count();
        if sharers >= 2 && !self.minor_ix.contains_key(kappa) {
            self.seq += 1;
            let ix = self.nodes.len();
            self.minor_ix.insert(kappa.clone(), ix);
            self.nodes.push(MetaNode {
                lambda: None,
                chi: kappa.clone(),
                kappa: kappa.clone(),
                seq: self.seq,
            });
        }
    }

    /// Runs one reduction round. |E(H')| strictly decreases.
    pub fn round(&mut self) -> Result<ReductionRound> {
        if self.work.is_empty() {
            return Err(Error::Internal("round on empty hypergraph".into()));
        }
        let mut report = ReductionRound::default();

        // Mutually reducible classes: edges with identical overlap. Members
        // always witness each other, so each class is a class of ears.
        let keys: Vec<EdgeKey> = self.work.keys().collect();
        let mut by_overlap: Vec<(AttrSet, Vec<EdgeKey>)> = Vec::new();
        for &k in &keys {
            let o = self.work.overlap(k)?;
            match by_overlap.iter_mut().find(|(ov, _)| *ov == o) {
                Some((_, members)) => members.push(k),
                None => by_overlap.push((o, vec![k])),
            }
        }
        for (o, members) in by_overlap {
            if members.len() < 2 {
                continue;
            }
            // A terminal pair (the class is the whole remaining hypergraph)
            // collapses only when its shared overlap is a home for some
            // already-placed node; otherwise the pair reduces as plain ears
            // and the survivor becomes the root. Reproduces both the no-minor
            // hierarchical shape and the minor-rooted shapes.
            let fire = self.work.len() > members.len()
                || members.len() >= 3
                || self.nodes.iter().any(|n| n.kappa.is_subset_of(&o));
            if !fire {
                continue;
            }
            for &e in &members {
                let chi = self.work.attrs(e)?.clone();
                self.record_node(e, chi, o.clone());
                self.work.remove(e);
                self.ensure_minor_for(&o.clone());
            }
            let special = self.work.add_special(o.clone());
            report.specials_added.push(special);
            report.groups.push((members, o));
        }

        // Remaining ears, with overlaps snapshotted at phase start. If every
        // edge is an ear, hold back the smallest so the root survives to the
        // next round.
        let keys: Vec<EdgeKey> = self.work.keys().collect();
        let mut ears: Vec<(EdgeKey, AttrSet)> = Vec::new();
        for &k in &keys {
            if self.work.is_ear(k)?.is_some() {
                ears.push((k, self.work.overlap(k)?));
            }
        }
        if ears.is_empty() {
            if report.groups.is_empty() {
                return Err(Error::Internal(
                    "no ear found; input hypergraph was not acyclic".into(),
                ));
            }
            return Ok(report);
        }
        if ears.len() == self.work.len() && self.work.len() >= 2 {
            let (kept, _) = ears.remove(0);
            report.kept = Some(kept);
        }
        for (e, o) in ears {
            let chi = self.work.attrs(e)?.clone();
            self.record_node(e, chi, o.clone());
            self.work.remove(e);
            self.ensure_minor_for(&o);
            report.ears.push(e);
        }
        Ok(report)
    }

    /// Finishes construction: picks the root and resolves every parent.
    pub fn into_meta(self) -> Result<MetaDecomposition> {
        let nodes = self.nodes;
        let roots: Vec<usize> = (0..nodes.len())
            .filter(|&i| nodes[i].kappa.is_empty())
            .collect();
        if roots.len() != 1 {
            return Err(Error::Internal(format!(
                "expected exactly one node with empty kappa, found {}",
                roots.len()
            )));
        }
        let root = roots[0];
        let mut parent = vec![None; nodes.len()];
        for p in 0..nodes.len() {
            if p == root {
                continue;
            }
            // A minor node carrying exactly κ(p) is the parent when it exists.
            let minor = (0..nodes.len())
                .find(|&q| q != p && nodes[q].lambda.is_none() && nodes[q].chi == nodes[p].kappa);
            if let Some(q) = minor {
                parent[p] = Some(q);
                continue;
            }
            // Otherwise the highest node whose χ covers κ(p) without its own
            // κ swallowing it; latest-removed wins, ties to the smallest id.
            let q = (0..nodes.len())
                .filter(|&q| {
                    q != p
                        && nodes[p].kappa.is_subset_of(&nodes[q].chi)
                        && !nodes[p].kappa.is_subset_of(&nodes[q].kappa)
                })
                .max_by_key(|&q| (nodes[q].seq, std::cmp::Reverse(q)))
                .ok_or_else(|| Error::Internal(format!("no parent candidate for node {p}")))?;
            parent[p] = Some(q);
        }
        Ok(MetaDecomposition {
            nodes,
            parent,
            root,
        })
    }
}

/// Algorithm: constructs the meta-decomposition of an acyclic, connected
/// hypergraph by repeated reduction rounds.
pub fn build_meta(h: &Hypergraph) -> Result<MetaDecomposition> {
    if !h.gyo_is_acyclic() {
        return Err(Error::NotAcyclic);
    }
    let mut reducer = Reducer::new(h);
    let mut rounds = 0usize;
    while !reducer.done() {
        reducer.round()?;
        rounds += 1;
        if rounds > h.num_relations() + 1 {
            return Err(Error::Internal("reduction did not terminate".into()));
        }
    }
    reducer.into_meta()
}
