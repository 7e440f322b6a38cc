//! Rooted labeled join trees and their validity conditions.
//!
//! A join tree carries one node per relation (coverage), keeps every
//! attribute's occurrence set connected (connectedness), and pins each node's
//! χ to its relation's attributes (width-1).

use crate::error::{Error, Result};
use crate::hypergraph::{AttrId, Hypergraph, RelId};
use crate::set::{AttrSet, RelSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinTreeNode {
    pub rel: RelId,
    pub chi: AttrSet,
}

#[derive(Clone, Debug)]
pub struct JoinTree {
    pub nodes: Vec<JoinTreeNode>,
    pub parent: Vec<Option<usize>>,
    pub root: usize,
}

/// First violated condition, with witnesses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeViolation {
    /// C1: a relation labels zero or several nodes.
    Coverage { rel: RelId, count: usize },
    /// C2: the nodes containing `attr` do not induce a connected subtree.
    Connectedness { attr: AttrId },
    /// C3: χ(node) differs from the attributes of its relation.
    Width { node: usize },
    /// The parent map is not a tree rooted at `root`.
    Structure(String),
}

impl std::fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TreeViolation::Coverage { rel, count } => {
                write!(f, "C1 violated: relation {rel} labels {count} nodes")
            }
            TreeViolation::Connectedness { attr } => {
                write!(
                    f,
                    "C2 violated: attribute {attr} induces a disconnected set"
                )
            }
            TreeViolation::Width { node } => {
                write!(f, "C3 violated: node {node} has chi != attrs(lambda)")
            }
            TreeViolation::Structure(s) => write!(f, "malformed tree: {s}"),
        }
    }
}

impl JoinTree {
    /// Builds a tree from (relation, parent-relation) pairs; χ is filled from H.
    pub fn from_parents(h: &Hypergraph, root_rel: RelId, parents: &[(RelId, RelId)]) -> Self {
        let n = h.num_relations();
        let mut parent = vec![None; n];
        for &(child, par) in parents {
            parent[child as usize] = Some(par as usize);
        }
        JoinTree {
            nodes: (0..n as RelId)
                .map(|r| JoinTreeNode {
                    rel: r,
                    chi: h.edge(r).clone(),
                })
                .collect(),
            parent,
            root: root_rel as usize,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn children(&self, p: usize) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&c| self.parent[c] == Some(p))
            .collect()
    }

    /// Maximum fan-out over all nodes.
    pub fn fanout(&self) -> usize {
        let mut counts = vec![0usize; self.nodes.len()];
        for p in self.parent.iter().flatten() {
            counts[*p] += 1;
        }
        counts.into_iter().max().unwrap_or(0)
    }

    /// Nodes of the subtree rooted at `p`.
    pub fn subtree(&self, p: usize) -> Vec<usize> {
        let mut out = vec![p];
        let mut i = 0;
        while i < out.len() {
            out.extend(self.children(out[i]));
            i += 1;
        }
        out
    }

    /// Nodes of T_{p→q} for a neighbor q of p: everything whose path to p
    /// passes through q. For a child q this is the subtree at q; for the
    /// parent it is the complement of the subtree at p.
    pub fn directed_subtree(&self, p: usize, q: usize) -> Result<Vec<usize>> {
        if self.parent[q] == Some(p) {
            Ok(self.subtree(q))
        } else if self.parent[p] == Some(q) {
            let inside: Vec<usize> = self.subtree(p);
            Ok((0..self.nodes.len())
                .filter(|n| !inside.contains(n))
                .collect())
        } else {
            Err(Error::InvalidArgument(format!(
                "{q} is not a neighbor of {p}"
            )))
        }
    }

    /// Q(p): relations labeling the subtree rooted at p.
    pub fn induced_query(&self, p: usize) -> RelSet {
        let mut out = RelSet::empty();
        for n in self.subtree(p) {
            out.insert(self.nodes[n].rel);
        }
        out
    }

    pub fn node_of_rel(&self, r: RelId) -> Option<usize> {
        self.nodes.iter().position(|n| n.rel == r)
    }

    fn structure_ok(&self) -> std::result::Result<(), TreeViolation> {
        let n = self.nodes.len();
        if self.root >= n {
            return Err(TreeViolation::Structure("root out of range".into()));
        }
        if self.parent[self.root].is_some() {
            return Err(TreeViolation::Structure("root has a parent".into()));
        }
        let mut seen = 0usize;
        for start in 0..n {
            let (mut cur, mut steps) = (start, 0usize);
            while let Some(p) = self.parent[cur] {
                cur = p;
                steps += 1;
                if steps > n {
                    return Err(TreeViolation::Structure("cycle in parent map".into()));
                }
            }
            if cur != self.root {
                return Err(TreeViolation::Structure(format!(
                    "node {start} not under root"
                )));
            }
            seen += 1;
        }
        debug_assert_eq!(seen, n);
        Ok(())
    }

    /// Checks C1, C2, C3 against `h`; reports the first violation.
    pub fn validate(&self, h: &Hypergraph) -> std::result::Result<(), TreeViolation> {
        self.structure_ok()?;
        // C1
        for r in 0..h.num_relations() as RelId {
            let count = self.nodes.iter().filter(|n| n.rel == r).count();
            if count != 1 {
                return Err(TreeViolation::Coverage { rel: r, count });
            }
        }
        // C3
        for (i, n) in self.nodes.iter().enumerate() {
            if &n.chi != h.edge(n.rel) {
                return Err(TreeViolation::Width { node: i });
            }
        }
        // C2: nodes containing each attribute must induce a connected subtree.
        for a in 0..h.num_attrs() as AttrId {
            let members: Vec<usize> = (0..self.nodes.len())
                .filter(|&i| self.nodes[i].chi.contains(a))
                .collect();
            if members.len() <= 1 {
                continue;
            }
            let mut reach = vec![false; self.nodes.len()];
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
                return Err(TreeViolation::Connectedness { attr: a });
            }
        }
        Ok(())
    }

    /// Rerooting keeps the undirected edge set and flips parents on the path
    /// from the new root up to the old one.
    pub fn reroot(&self, new_root: usize) -> Result<JoinTree> {
        if new_root >= self.nodes.len() {
            return Err(Error::InvalidArgument(format!("unknown node {new_root}")));
        }
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
        Ok(out)
    }

    /// Canonical identity of a rooted labeled tree: since relations label
    /// nodes uniquely, the root relation plus the parent map over relations
    /// pins the tree exactly.
    pub fn canonical_key(&self) -> CanonicalTree {
        let mut parents: Vec<(RelId, RelId)> = self
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| self.parent[i].map(|p| (n.rel, self.nodes[p].rel)))
            .collect();
        parents.sort_unstable();
        CanonicalTree {
            root: self.nodes[self.root].rel,
            parents,
        }
    }

    /// Undirected edge set as sorted relation pairs.
    pub fn undirected_edges(&self) -> Vec<(RelId, RelId)> {
        let mut out: Vec<(RelId, RelId)> = self
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| {
                self.parent[i].map(|p| {
                    let (a, b) = (n.rel, self.nodes[p].rel);
                    (a.min(b), a.max(b))
                })
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Children ordered by the smallest relation id in their subtree; used
    /// for stable emission.
    pub fn ordered_children(&self, p: usize) -> Vec<usize> {
        let mut cs = self.children(p);
        cs.sort_by_key(|&c| self.subtree(c).into_iter().map(|n| self.nodes[n].rel).min());
        cs
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalTree {
    pub root: RelId,
    pub parents: Vec<(RelId, RelId)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::{floating_satellite, hierarchical, star};

    /// The join tree of Figure "hierarchical-jt": R1 root, children R2 (with
    /// child R3) and R4.
    pub fn hier_tree(h: &Hypergraph) -> JoinTree {
        JoinTree::from_parents(h, 0, &[(1, 0), (2, 1), (3, 0)])
    }

    #[test]
    fn validate_hier_tree_ok() {
        let h = hierarchical();
        assert_eq!(hier_tree(&h).validate(&h), Ok(()));
    }

    #[test]
    fn validate_reparented_r3_breaks_c2_on_x5() {
        let h = hierarchical();
        let bad = JoinTree::from_parents(&h, 0, &[(1, 0), (2, 0), (3, 0)]);
        let x5 = h.attr_by_name("x5").unwrap();
        assert_eq!(
            bad.validate(&h),
            Err(TreeViolation::Connectedness { attr: x5 })
        );
    }

    #[test]
    fn validate_single_relation() {
        let h = Hypergraph::new(vec![("R1".into(), vec!["a".into()])], vec![]).unwrap();
        let t = JoinTree::from_parents(&h, 0, &[]);
        assert_eq!(t.validate(&h), Ok(()));
    }

    #[test]
    fn reroot_hier_to_r2() {
        let h = hierarchical();
        let t = hier_tree(&h).reroot(1).unwrap();
        assert_eq!(t.root, 1);
        assert_eq!(t.parent[0], Some(1));
        assert_eq!(t.parent[2], Some(1));
        assert_eq!(t.parent[3], Some(0));
        assert_eq!(t.validate(&h), Ok(()));
    }

    #[test]
    fn reroot_identity_and_roundtrip() {
        let h = hierarchical();
        let t = hier_tree(&h);
        let same = t.reroot(t.root).unwrap();
        assert_eq!(same.canonical_key(), t.canonical_key());
        let back = t.reroot(2).unwrap().reroot(t.root).unwrap();
        assert_eq!(back.canonical_key(), t.canonical_key());
        assert_eq!(back.undirected_edges(), t.undirected_edges());
    }

    #[test]
    fn reroot_chain_reverses() {
        let h = star(4);
        let chain = JoinTree::from_parents(&h, 0, &[(1, 0), (2, 1), (3, 2)]);
        let rev = chain.reroot(3).unwrap();
        assert_eq!(rev.parent[2], Some(3));
        assert_eq!(rev.parent[1], Some(2));
        assert_eq!(rev.parent[0], Some(1));
        assert_eq!(rev.undirected_edges(), chain.undirected_edges());
    }

    #[test]
    fn induced_query_examples() {
        let h = hierarchical();
        let t = hier_tree(&h);
        let q_r2 = t.induced_query(1);
        assert_eq!(q_r2.iter().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(t.induced_query(t.root), h.all_rels());
        assert_eq!(t.induced_query(3), RelSet::singleton(3));
    }

    #[test]
    fn fanout_examples() {
        let h = hierarchical();
        assert_eq!(hier_tree(&h).fanout(), 2);
        let hs = star(5);
        let chain = JoinTree::from_parents(&hs, 0, &[(1, 0), (2, 1), (3, 2), (4, 3)]);
        assert_eq!(chain.fanout(), 1);
        // Figure 8c: R2 root with children R1, R3 (child R4), R5.
        let hc = floating_satellite();
        let t = JoinTree::from_parents(&hc, 1, &[(0, 1), (2, 1), (3, 2), (4, 1)]);
        assert_eq!(t.validate(&hc), Ok(()));
        assert_eq!(t.fanout(), 3);
    }

    #[test]
    fn directed_subtree_views() {
        let h = hierarchical();
        let t = hier_tree(&h);
        assert_eq!(t.directed_subtree(0, 1).unwrap(), vec![1, 2]);
        let up: Vec<usize> = t.directed_subtree(1, 0).unwrap();
        assert_eq!(up, vec![0, 3]);
        assert!(t.directed_subtree(2, 3).is_err());
    }

    /// Lemma: for non-root p with parent q, χ(p) ∩ χ(outside T_p) ⊆ χ(q).
    #[test]
    fn outside_intersection_inside_parent() {
        let h = hierarchical();
        let t = hier_tree(&h);
        for p in 0..t.len() {
            let Some(q) = t.parent[p] else { continue };
            let inside = t.subtree(p);
            let mut outside = AttrSet::new();
            for n in 0..t.len() {
                if !inside.contains(&n) {
                    outside = outside.union(&t.nodes[n].chi);
                }
            }
            assert!(t.nodes[p]
                .chi
                .intersect(&outside)
                .is_subset_of(&t.nodes[q].chi));
        }
    }
}
