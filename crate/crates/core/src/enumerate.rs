//! Join-tree enumeration from a meta-decomposition.
//!
//! Each minor node's cluster is expanded through Prüfer-sequence skeletons
//! (all labeled trees over the cluster members), sub-results are combined
//! bottom-up with key-filtered rerootings, and the final pass emits every
//! rooting of every combined tree. The iterator keeps an operation counter so
//! enumeration delay can be measured without wall clocks.

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, RelId};
use crate::jointree::JoinTree;
use crate::meta::MetaDecomposition;
use crate::set::AttrSet;
use std::collections::{HashMap, VecDeque};

/// All labeled unrooted trees over `k` vertices as edge lists, decoded from
/// Prüfer sequences in lexicographic order. Cayley: k^(k-2) trees.
pub fn enumerate_labeled_trees(k: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    if k == 1 {
        out.push(Vec::new());
        return out;
    }
    if k == 2 {
        out.push(vec![(0, 1)]);
        return out;
    }
    let mut seq = vec![0usize; k - 2];
    loop {
        out.push(decode_prufer(&seq, k));
        // next sequence in lexicographic order
        let mut i = k - 2;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            seq[i] += 1;
            if seq[i] < k {
                break;
            }
            seq[i] = 0;
        }
    }
}

fn decode_prufer(seq: &[usize], k: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1u32; k];
    for &p in seq {
        degree[p] += 1;
    }
    let mut edges = Vec::with_capacity(k - 1);
    // Leaf pool in increasing order; stable and allocation-light at this scale.
    let mut used = vec![false; k];
    for &p in seq {
        let leaf = (0..k).find(|&v| !used[v] && degree[v] == 1).unwrap();
        used[leaf] = true;
        edges.push((leaf, p));
        degree[p] -= 1;
    }
    let mut last = (0..k).filter(|&v| !used[v]);
    let (a, b) = (last.next().unwrap(), last.next().unwrap());
    edges.push((a, b));
    edges
}

/// Working tree during enumeration. Vertices are relations, except one
/// optional "dummy" vertex standing in for a minor node that the parent will
/// dissolve.
#[derive(Clone, Debug)]
pub(crate) struct Scaffold {
    rels: Vec<Option<RelId>>,
    chis: Vec<AttrSet>,
    parent: Vec<Option<usize>>,
    root: usize,
}

impl Scaffold {
    fn single(rel: Option<RelId>, chi: AttrSet) -> Self {
        Scaffold {
            rels: vec![rel],
            chis: vec![chi],
            parent: vec![None],
            root: 0,
        }
    }

    fn len(&self) -> usize {
        self.rels.len()
    }

    fn children(&self, p: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&c| self.parent[c] == Some(p))
            .collect()
    }

    /// Appends `sub` (rebased) with its root parented at `at`.
    fn attach(&self, sub: &Scaffold, at: usize) -> Scaffold {
        let mut out = self.clone();
        let base = out.len();
        out.rels.extend(sub.rels.iter().copied());
        out.chis.extend(sub.chis.iter().cloned());
        for (i, p) in sub.parent.iter().enumerate() {
            out.parent.push(match p {
                Some(pp) => Some(base + pp),
                None => {
                    debug_assert_eq!(i, sub.root);
                    Some(at)
                }
            });
        }
        out
    }

    /// Extracts the subtree rooted at `v` as a standalone scaffold.
    fn extract(&self, v: usize) -> Scaffold {
        let mut nodes = vec![v];
        let mut i = 0;
        while i < nodes.len() {
            nodes.extend(self.children(nodes[i]));
            i += 1;
        }
        let remap: HashMap<usize, usize> = nodes
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new))
            .collect();
        Scaffold {
            rels: nodes.iter().map(|&n| self.rels[n]).collect(),
            chis: nodes.iter().map(|&n| self.chis[n].clone()).collect(),
            parent: nodes
                .iter()
                .map(|&n| {
                    if n == v {
                        None
                    } else {
                        Some(remap[&self.parent[n].unwrap()])
                    }
                })
                .collect(),
            root: 0,
        }
    }

    fn reroot(&self, new_root: usize) -> Scaffold {
        let mut out = self.clone();
        let mut path = vec![new_root];
        let mut cur = new_root;
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        for w in path.windows(2) {
            out.parent[w[1]] = Some(w[0]);
        }
        out.parent[new_root] = None;
        out.root = new_root;
        out
    }

    /// Valid rerooting targets other than the current root: vertices whose χ
    /// contains `key`, reachable from the root through such vertices.
    fn rerooting_targets(&self, key: &AttrSet) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![(self.root, usize::MAX)];
        while let Some((v, from)) = stack.pop() {
            let mut neigh: Vec<usize> = self.children(v);
            if let Some(p) = self.parent[v] {
                neigh.push(p);
            }
            neigh.sort_unstable();
            // preserve DFS order under stack reversal
            for &u in neigh.iter().rev() {
                if u != from && key.is_subset_of(&self.chis[u]) {
                    out.push(u);
                    stack.push((u, v));
                }
            }
        }
        out.retain(|&u| u != self.root);
        out
    }

    fn to_join_tree(&self, h: &Hypergraph) -> Result<JoinTree> {
        let root_rel = self.rels[self.root]
            .ok_or_else(|| Error::Internal("dummy vertex survived enumeration".into()))?;
        let mut pairs = Vec::with_capacity(self.len().saturating_sub(1));
        for v in 0..self.len() {
            if let Some(p) = self.parent[v] {
                let c = self.rels[v]
                    .ok_or_else(|| Error::Internal("dummy vertex survived enumeration".into()))?;
                let pr = self.rels[p]
                    .ok_or_else(|| Error::Internal("dummy vertex survived enumeration".into()))?;
                pairs.push((c, pr));
            }
        }
        Ok(JoinTree::from_parents(h, root_rel, &pairs))
    }
}

/// All rerootings of `t` whose new root's χ contains `key`, excluding the
/// input rooting (and never crossing vertices that lack `key`). `prev` skips
/// the rooting we arrived from, mirroring the recursive formulation.
pub fn rerootings(t: &JoinTree, prev: Option<usize>, key: &AttrSet) -> Vec<JoinTree> {
    let scaffold = Scaffold {
        rels: t.nodes.iter().map(|n| Some(n.rel)).collect(),
        chis: t.nodes.iter().map(|n| n.chi.clone()).collect(),
        parent: t.parent.clone(),
        root: t.root,
    };
    scaffold
        .rerooting_targets(key)
        .into_iter()
        .filter(|&v| Some(v) != prev)
        .map(|v| {
            let s = scaffold.reroot(v);
            JoinTree {
                nodes: t.nodes.clone(),
                parent: s.parent,
                root: s.root,
            }
        })
        .collect()
}

struct EnumCtx<'a> {
    m: &'a MetaDecomposition,
    memo: HashMap<usize, Vec<Scaffold>>,
    ops: u64,
}

impl<'a> EnumCtx<'a> {
    fn new(m: &'a MetaDecomposition) -> Self {
        EnumCtx {
            m,
            memo: HashMap::new(),
            ops: 0,
        }
    }

    /// Children of `v` sorted by the partial order ⊇ on κ (supersets first),
    /// ties by node id; a linear extension so hosts precede their guests.
    fn sorted_children(&self, v: usize) -> Vec<usize> {
        let mut remaining = self.m.children(v);
        remaining.sort_unstable();
        let mut out = Vec::with_capacity(remaining.len());
        while !remaining.is_empty() {
            let pick = *remaining
                .iter()
                .find(|&&x| {
                    !remaining.iter().any(|&y| {
                        y != x
                            && self.m.nodes[x]
                                .kappa
                                .is_strict_subset_of(&self.m.nodes[y].kappa)
                    })
                })
                .unwrap();
            out.push(pick);
            remaining.retain(|&x| x != pick);
        }
        out
    }

    /// Rootings of `t` admissible under `key`: the identity when its root
    /// already satisfies the key, plus all key-preserving rerootings.
    fn admissible(&mut self, t: &Scaffold, key: &AttrSet) -> Vec<Scaffold> {
        let mut out = Vec::new();
        if key.is_subset_of(&t.chis[t.root]) {
            out.push(t.clone());
        }
        for target in t.rerooting_targets(key) {
            self.ops += t.len() as u64;
            out.push(t.reroot(target));
        }
        out
    }

    fn is_dummy_minor(&self, c: usize) -> bool {
        self.m.is_minor(c) && self.m.nodes[c].kappa == self.m.nodes[c].chi
    }

    fn sub_results(&mut self, c: usize) -> Result<Vec<Scaffold>> {
        if !self.memo.contains_key(&c) {
            let r = self.enum_rec(c)?;
            self.memo.insert(c, r);
        }
        Ok(self.memo[&c].clone())
    }

    /// Combines one skeleton over cluster slots into scaffolds. `slots` maps
    /// skeleton vertices to meta children (None = the dummy vertex standing
    /// for the minor `owner` itself); `edges` is the undirected skeleton.
    fn combine_skeleton(
        &mut self,
        owner: usize,
        slots: &[Option<usize>],
        edges: &[(usize, usize)],
        root_slot: usize,
    ) -> Result<Vec<Scaffold>> {
        let k = slots.len();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); k];
        let mut parent = vec![usize::MAX; k];
        // Orient the skeleton from the root slot.
        let mut order = vec![root_slot];
        let mut seen = vec![false; k];
        seen[root_slot] = true;
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            i += 1;
            let mut neigh: Vec<usize> = edges
                .iter()
                .filter_map(|&(a, b)| {
                    if a == v {
                        Some(b)
                    } else if b == v {
                        Some(a)
                    } else {
                        None
                    }
                })
                .collect();
            neigh.sort_unstable();
            for u in neigh {
                if !seen[u] {
                    seen[u] = true;
                    parent[u] = v;
                    children[v].push(u);
                    order.push(u);
                }
            }
        }
        // Bottom-up combination; each slot yields scaffolds whose first
        // `chunk_len` vertices are the slot's own chunk (attachment hosts for
        // skeleton children live there).
        let mut partial: Vec<Vec<Scaffold>> = vec![Vec::new(); k];
        for &s in order.iter().rev() {
            let bases: Vec<(Scaffold, usize)> = match slots[s] {
                None => {
                    let chi = self.m.nodes[owner].chi.clone();
                    vec![(Scaffold::single(None, chi), 1)]
                }
                Some(c) => {
                    let subs = self.sub_results(c)?;
                    let variants = if s == root_slot {
                        subs
                    } else {
                        let key = self.m.nodes[c].kappa.clone();
                        let mut v = Vec::new();
                        for t in &subs {
                            v.extend(self.admissible(t, &key));
                        }
                        v
                    };
                    variants
                        .into_iter()
                        .map(|t| {
                            let l = t.len();
                            (t, l)
                        })
                        .collect()
                }
            };
            let mut acc: Vec<Scaffold> = Vec::new();
            for (base, chunk_len) in bases {
                let mut here = vec![base];
                for &d in &children[s] {
                    let key = match slots[d] {
                        Some(c) => self.m.nodes[c].kappa.clone(),
                        None => self.m.nodes[owner].chi.clone(),
                    };
                    let mut next = Vec::new();
                    for t in &here {
                        for td in &partial[d] {
                            for u in 0..chunk_len {
                                if key.is_subset_of(&t.chis[u]) {
                                    self.ops += td.len() as u64;
                                    next.push(t.attach(td, u));
                                }
                            }
                        }
                    }
                    here = next;
                }
                acc.extend(here);
            }
            partial[s] = acc;
        }
        Ok(std::mem::take(&mut partial[root_slot]))
    }

    /// Attaches the remaining (proper) children of `v` into each accumulated
    /// tree, in κ-sorted order.
    fn attach_proper(&mut self, acc: Vec<Scaffold>, proper: &[usize]) -> Result<Vec<Scaffold>> {
        let mut acc = acc;
        for &c in proper {
            let mut next = Vec::new();
            if self.is_dummy_minor(c) {
                // The sub-results are rooted at a dummy standing for c; each
                // child chunk of the dummy attaches independently, to hosts
                // that existed before this child's own chunks (chunks that
                // end up adjacent are covered by a different skeleton of c).
                let key = self.m.nodes[c].chi.clone();
                let subs = self.sub_results(c)?;
                for t in &acc {
                    let hosts: Vec<usize> = (0..t.len())
                        .filter(|&u| key.is_subset_of(&t.chis[u]))
                        .collect();
                    for tc in &subs {
                        let chunks: Vec<Scaffold> = tc
                            .children(tc.root)
                            .into_iter()
                            .map(|d| tc.extract(d))
                            .collect();
                        let mut placed = vec![t.clone()];
                        for chunk in &chunks {
                            let mut grown = Vec::new();
                            for p in &placed {
                                for &u in &hosts {
                                    self.ops += chunk.len() as u64;
                                    grown.push(p.attach(chunk, u));
                                }
                            }
                            placed = grown;
                        }
                        next.extend(placed);
                    }
                }
            } else {
                let key = self.m.nodes[c].kappa.clone();
                let subs = self.sub_results(c)?;
                let mut variants = Vec::new();
                for t in &subs {
                    variants.extend(self.admissible(t, &key));
                }
                for t in &acc {
                    for tc in &variants {
                        for u in 0..t.len() {
                            if key.is_subset_of(&t.chis[u]) {
                                self.ops += tc.len() as u64;
                                next.push(t.attach(tc, u));
                            }
                        }
                    }
                }
            }
            acc = next;
        }
        Ok(acc)
    }

    fn enum_rec(&mut self, v: usize) -> Result<Vec<Scaffold>> {
        let children = self.sorted_children(v);
        let (acc, proper): (Vec<Scaffold>, Vec<usize>) = if self.m.is_minor(v) {
            let origin: Vec<usize> = children
                .iter()
                .copied()
                .filter(|&c| self.m.nodes[c].kappa == self.m.nodes[v].chi)
                .collect();
            if origin.is_empty() {
                return Err(Error::Internal(format!(
                    "minor node {v} has no cluster children"
                )));
            }
            let proper: Vec<usize> = children
                .iter()
                .copied()
                .filter(|c| !origin.contains(c))
                .collect();
            let dummy_mode = self.m.nodes[v].kappa == self.m.nodes[v].chi;
            let mut slots: Vec<Option<usize>> = origin.iter().copied().map(Some).collect();
            if dummy_mode {
                slots.push(None);
            }
            let k = slots.len();
            let mut combined = Vec::new();
            for edges in enumerate_labeled_trees(k) {
                self.ops += k as u64;
                let root_slot = if dummy_mode { k - 1 } else { 0 };
                combined.extend(self.combine_skeleton(v, &slots, &edges, root_slot)?);
            }
            (combined, proper)
        } else {
            let rel = self.m.nodes[v].lambda.unwrap();
            (
                vec![Scaffold::single(Some(rel), self.m.nodes[v].chi.clone())],
                children,
            )
        };
        self.attach_proper(acc, &proper)
    }
}

/// Pull-based stream of all join trees of the hypergraph encoded by `m`.
pub struct JoinTreeIter {
    h: Hypergraph,
    m: MetaDecomposition,
    sub: HashMap<usize, Vec<Scaffold>>,
    root_children_proper: Vec<usize>,
    // Skeleton cursor state for a minor root; physical roots emit one batch.
    skeleton_slots: Vec<Option<usize>>,
    skeleton_edges: std::vec::IntoIter<Vec<(usize, usize)>>,
    physical_pending: bool,
    batch: VecDeque<Scaffold>,
    current: Option<(Scaffold, VecDeque<usize>)>,
    /// When set, rerooting expansion is skipped: one tree per distinct
    /// undirected structure.
    shapes_only: bool,
    ops: u64,
    yielded: u64,
}

impl JoinTreeIter {
    /// Cumulative operation counter; the gap between successive yields is the
    /// enumeration delay in abstract operations.
    pub fn ops(&self) -> u64 {
        self.ops
    }

    pub fn yielded(&self) -> u64 {
        self.yielded
    }

    fn refill_batch(&mut self) -> Result<bool> {
        enum Job {
            Physical,
            Skeleton(Vec<(usize, usize)>),
        }
        let job = if self.physical_pending {
            self.physical_pending = false;
            Job::Physical
        } else if let Some(edges) = self.skeleton_edges.next() {
            Job::Skeleton(edges)
        } else {
            return Ok(false);
        };
        let mut ctx = EnumCtx {
            m: &self.m,
            memo: std::mem::take(&mut self.sub),
            ops: self.ops,
        };
        let combined = match job {
            Job::Physical => {
                let rel = self.m.nodes[self.m.root].lambda.unwrap();
                let base = Scaffold::single(Some(rel), self.m.nodes[self.m.root].chi.clone());
                ctx.attach_proper(vec![base], &self.root_children_proper)?
            }
            Job::Skeleton(edges) => {
                ctx.ops += self.skeleton_slots.len() as u64;
                let combined =
                    ctx.combine_skeleton(self.m.root, &self.skeleton_slots, &edges, 0)?;
                ctx.attach_proper(combined, &self.root_children_proper)?
            }
        };
        self.ops = ctx.ops;
        self.sub = ctx.memo;
        self.batch.extend(combined);
        Ok(true)
    }

    fn next_tree(&mut self) -> Result<Option<JoinTree>> {
        loop {
            if let Some((base, targets)) = &mut self.current {
                if let Some(t) = targets.pop_front() {
                    let s = if t == base.root {
                        base.clone()
                    } else {
                        base.reroot(t)
                    };
                    self.ops += s.len() as u64;
                    self.yielded += 1;
                    return Ok(Some(s.to_join_tree(&self.h)?));
                }
                self.current = None;
            }
            if let Some(s) = self.batch.pop_front() {
                // Final step: the tree itself plus every rerooting.
                let mut targets = VecDeque::with_capacity(s.len());
                targets.push_back(s.root);
                if !self.shapes_only {
                    for t in s.rerooting_targets(&AttrSet::new()) {
                        targets.push_back(t);
                    }
                }
                self.ops += s.len() as u64;
                self.current = Some((s, targets));
                continue;
            }
            if !self.refill_batch()? {
                return Ok(None);
            }
        }
    }
}

impl Iterator for JoinTreeIter {
    type Item = Result<JoinTree>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_tree().transpose()
    }
}

/// Streams every join tree of `h` from its meta-decomposition.
pub fn enumerate_join_trees(h: &Hypergraph, m: &MetaDecomposition) -> Result<JoinTreeIter> {
    let mut ctx = EnumCtx::new(m);
    let children = ctx.sorted_children(m.root);
    let (slots, proper, physical): (Vec<Option<usize>>, Vec<usize>, bool) = if m.is_minor(m.root) {
        let origin: Vec<usize> = children
            .iter()
            .copied()
            .filter(|&c| m.nodes[c].kappa == m.nodes[m.root].chi)
            .collect();
        if origin.is_empty() {
            return Err(Error::Internal("minor root has no cluster children".into()));
        }
        let proper = children
            .iter()
            .copied()
            .filter(|c| !origin.contains(c))
            .collect();
        (origin.into_iter().map(Some).collect(), proper, false)
    } else {
        (Vec::new(), children, true)
    };
    // Pre-materialize sub-results for the root's children; per-yield work is
    // then bounded by one skeleton combination.
    for &c in slots.iter().flatten().chain(proper.iter()) {
        ctx.sub_results(c)?;
    }
    let skeletons = if physical {
        Vec::new()
    } else {
        enumerate_labeled_trees(slots.len())
    };
    Ok(JoinTreeIter {
        h: h.clone(),
        m: m.clone(),
        sub: ctx.memo,
        root_children_proper: proper,
        skeleton_slots: slots,
        skeleton_edges: skeletons.into_iter(),
        physical_pending: physical,
        batch: VecDeque::new(),
        current: None,
        shapes_only: false,
        ops: ctx.ops,
        yielded: 0,
    })
}

/// Streams one representative rooting per distinct undirected join tree;
/// rerootings of the same tree are collapsed.
pub fn enumerate_join_tree_shapes(h: &Hypergraph, m: &MetaDecomposition) -> Result<JoinTreeIter> {
    let mut it = enumerate_join_trees(h, m)?;
    it.shapes_only = true;
    Ok(it)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeCount {
    Exact(u64),
    LimitExceeded,
}

/// Counts join trees, bailing out past `limit`.
pub fn count_join_trees(h: &Hypergraph, m: &MetaDecomposition, limit: u64) -> Result<TreeCount> {
    if limit == 0 {
        return Err(Error::InvalidArgument("limit must be >= 1".into()));
    }
    let mut n = 0u64;
    for t in enumerate_join_trees(h, m)? {
        t?;
        n += 1;
        if n > limit {
            return Ok(TreeCount::LimitExceeded);
        }
    }
    Ok(TreeCount::Exact(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jointree::CanonicalTree;
    use crate::meta::build_meta;
    use crate::workload::{clique_graph, floating_satellite, hierarchical, shared_core, star};
    use std::collections::BTreeSet;

    fn all_canonical(h: &Hypergraph) -> BTreeSet<CanonicalTree> {
        let m = build_meta(h).unwrap();
        enumerate_join_trees(h, &m)
            .unwrap()
            .map(|t| t.unwrap().canonical_key())
            .collect()
    }

    #[test]
    fn labeled_tree_counts_follow_cayley() {
        assert_eq!(enumerate_labeled_trees(1).len(), 1);
        assert_eq!(enumerate_labeled_trees(2).len(), 1);
        assert_eq!(enumerate_labeled_trees(3).len(), 3);
        assert_eq!(enumerate_labeled_trees(4).len(), 16);
        // cross-check |V|=3 by exhaustive adjacency enumeration: every pair
        // of distinct edges on 3 vertices forms a tree
        let mut brute = BTreeSet::new();
        let pairs = [(0, 1), (0, 2), (1, 2)];
        for i in 0..3 {
            for j in (i + 1)..3 {
                brute.insert(vec![pairs[i], pairs[j]]);
            }
        }
        let got: BTreeSet<Vec<(usize, usize)>> = enumerate_labeled_trees(3)
            .into_iter()
            .map(|mut es| {
                for e in es.iter_mut() {
                    *e = (e.0.min(e.1), e.0.max(e.1));
                }
                es.sort_unstable();
                es
            })
            .collect();
        assert_eq!(got, brute);
    }

    #[test]
    fn star_law() {
        for n in 2..=5 {
            let h = star(n);
            let m = build_meta(&h).unwrap();
            let count = match count_join_trees(&h, &m, 1_000_000).unwrap() {
                TreeCount::Exact(c) => c,
                _ => panic!("limit hit"),
            };
            assert_eq!(count, (n as u64).pow(n as u32 - 1), "star n={n}");
        }
    }

    #[test]
    fn trees_are_valid_and_distinct() {
        for h in [
            star(4),
            hierarchical(),
            clique_graph(),
            shared_core(),
            floating_satellite(),
        ] {
            let m = build_meta(&h).unwrap();
            let mut seen = BTreeSet::new();
            for t in enumerate_join_trees(&h, &m).unwrap() {
                let t = t.unwrap();
                assert_eq!(t.validate(&h), Ok(()));
                assert!(seen.insert(t.canonical_key()), "duplicate tree yielded");
            }
        }
    }

    #[test]
    fn hier_has_four_rooted_trees() {
        assert_eq!(all_canonical(&hierarchical()).len(), 4);
    }

    #[test]
    fn complicated_has_twenty_rooted_trees() {
        assert_eq!(all_canonical(&floating_satellite()).len(), 20);
    }

    #[test]
    fn single_relation_counts_one() {
        let h = Hypergraph::new(vec![("R1".into(), vec!["a".into()])], vec![]).unwrap();
        let m = build_meta(&h).unwrap();
        assert_eq!(count_join_trees(&h, &m, 10).unwrap(), TreeCount::Exact(1));
    }

    #[test]
    fn count_limit_sentinel() {
        let h = star(5);
        let m = build_meta(&h).unwrap();
        assert_eq!(
            count_join_trees(&h, &m, 10).unwrap(),
            TreeCount::LimitExceeded
        );
        assert_eq!(
            count_join_trees(&h, &m, 1000).unwrap(),
            TreeCount::Exact(625)
        );
    }

    #[test]
    fn rerooting_examples() {
        let h = star(4);
        let chain = JoinTree::from_parents(&h, 0, &[(1, 0), (2, 1), (3, 2)]);
        let x1: AttrSet = AttrSet::singleton(h.attr_by_name("x1").unwrap());
        assert_eq!(rerootings(&chain, None, &x1).len(), 3);
        assert_eq!(rerootings(&chain, None, &AttrSet::new()).len(), 3);

        let hc = floating_satellite();
        // Figure 8c: R2 root, children R1, R3 (child R4), R5.
        let t = JoinTree::from_parents(&hc, 1, &[(0, 1), (2, 1), (3, 2), (4, 1)]);
        let key: AttrSet = [
            hc.attr_by_name("x1").unwrap(),
            hc.attr_by_name("x3").unwrap(),
        ]
        .into_iter()
        .collect();
        let rs = rerootings(&t, None, &key);
        assert_eq!(rs.len(), 1);
        assert_eq!(rs[0].nodes[rs[0].root].rel, hc.rel_by_name("R3").unwrap());
    }
}
