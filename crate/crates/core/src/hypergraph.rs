//! Query hypergraph: attributes are vertices, relations are hyperedges.
//!
//! Overlap and ear detection follow the GYO reduction. A hyperedge `e` is an
//! ear when its overlap with the rest of the hypergraph fits inside a single
//! other hyperedge (the witness), or when it is the only edge left.

use crate::error::{Error, Result};
use crate::set::{AttrSet, RelSet};
use std::collections::HashMap;

pub type AttrId = u32;
pub type RelId = u32;

#[derive(Clone, Debug)]
pub struct Hypergraph {
    attr_names: Vec<String>,
    rel_names: Vec<String>,
    edges: Vec<AttrSet>,
    output: AttrSet,
}

impl Hypergraph {
    /// Builds a hypergraph from named relations. Relations must be nonempty,
    /// names unique (self-joins pre-renamed by the caller), and the whole
    /// query connected.
    pub fn new(relations: Vec<(String, Vec<String>)>, output: Vec<String>) -> Result<Self> {
        if relations.is_empty() {
            return Err(Error::Parse("query has no relations".into()));
        }
        if relations.len() > RelSet::MAX_RELATIONS {
            return Err(Error::CapExceeded(format!(
                "at most {} relations supported, got {}",
                RelSet::MAX_RELATIONS,
                relations.len()
            )));
        }
        let mut attr_names = Vec::new();
        let mut attr_index: HashMap<String, AttrId> = HashMap::new();
        let mut rel_names = Vec::new();
        let mut edges = Vec::new();
        for (name, attrs) in relations {
            if rel_names.contains(&name) {
                return Err(Error::Parse(format!(
                    "duplicate relation name {name:?} (rename self-joins before input)"
                )));
            }
            if attrs.is_empty() {
                return Err(Error::Parse(format!("relation {name:?} has no attributes")));
            }
            let mut edge = AttrSet::new();
            for a in attrs {
                let id = *attr_index.entry(a.clone()).or_insert_with(|| {
                    attr_names.push(a);
                    (attr_names.len() - 1) as AttrId
                });
                edge.insert(id);
            }
            rel_names.push(name);
            edges.push(edge);
        }
        let mut output_set = AttrSet::new();
        for a in output {
            match attr_index.get(&a) {
                Some(id) => output_set.insert(*id),
                None => {
                    return Err(Error::Parse(format!(
                        "output attribute {a:?} appears in no relation"
                    )))
                }
            }
        }
        let h = Hypergraph {
            attr_names,
            rel_names,
            edges,
            output: output_set,
        };
        if !h.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(h)
    }

    pub fn num_relations(&self) -> usize {
        self.edges.len()
    }

    pub fn num_attrs(&self) -> usize {
        self.attr_names.len()
    }

    pub fn edge(&self, r: RelId) -> &AttrSet {
        &self.edges[r as usize]
    }

    pub fn edges(&self) -> impl Iterator<Item = (RelId, &AttrSet)> {
        self.edges.iter().enumerate().map(|(i, e)| (i as RelId, e))
    }

    pub fn rel_name(&self, r: RelId) -> &str {
        &self.rel_names[r as usize]
    }

    pub fn attr_name(&self, a: AttrId) -> &str {
        &self.attr_names[a as usize]
    }

    pub fn rel_by_name(&self, name: &str) -> Option<RelId> {
        self.rel_names
            .iter()
            .position(|n| n == name)
            .map(|i| i as RelId)
    }

    pub fn attr_by_name(&self, name: &str) -> Option<AttrId> {
        self.attr_names
            .iter()
            .position(|n| n == name)
            .map(|i| i as AttrId)
    }

    pub fn output_attrs(&self) -> &AttrSet {
        &self.output
    }

    pub fn all_rels(&self) -> RelSet {
        RelSet::full(self.edges.len())
    }

    pub fn all_attrs(&self) -> AttrSet {
        (0..self.attr_names.len() as u32).collect()
    }

    /// Union of the attribute sets of a relation subset.
    pub fn attrs_of(&self, rels: RelSet) -> AttrSet {
        let mut out = AttrSet::new();
        for r in rels.iter() {
            out = out.union(&self.edges[r as usize]);
        }
        out
    }

    /// Whether the given relation subset is connected through shared attributes.
    pub fn is_connected_subset(&self, rels: RelSet) -> bool {
        let Some(first) = rels.min_rel() else {
            return false;
        };
        let mut seen = RelSet::singleton(first);
        let mut frontier = vec![first];
        while let Some(r) = frontier.pop() {
            for s in rels.iter() {
                if !seen.contains(s) && self.edges[r as usize].intersects(&self.edges[s as usize]) {
                    seen.insert(s);
                    frontier.push(s);
                }
            }
        }
        seen == rels
    }

    fn is_connected(&self) -> bool {
        self.is_connected_subset(self.all_rels())
    }

    /// GYO test: repeatedly remove ears; acyclic iff the edge set empties.
    pub fn gyo_is_acyclic(&self) -> bool {
        let mut work = WorkingHypergraph::from_hypergraph(self);
        while !work.is_empty() {
            let ear = work.keys().find(|&k| work.is_ear(k).unwrap().is_some());
            match ear {
                Some(k) => work.remove(k),
                None => return false,
            }
        }
        true
    }
}

/// Identity of an edge in a working hypergraph: a base relation or a special
/// hyperedge added during meta-decomposition construction. Base edges order
/// before special ones, which gives the deterministic witness tie-break.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum EdgeKey {
    Base(RelId),
    Special(u32),
}

/// Mutable edge multiset used by GYO reduction and meta construction.
#[derive(Clone, Debug)]
pub struct WorkingHypergraph {
    edges: Vec<(EdgeKey, AttrSet)>,
    next_special: u32,
}

impl WorkingHypergraph {
    pub fn from_hypergraph(h: &Hypergraph) -> Self {
        WorkingHypergraph {
            edges: h
                .edges()
                .map(|(r, e)| (EdgeKey::Base(r), e.clone()))
                .collect(),
            next_special: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Edge keys in deterministic order (base ids, then special ids).
    pub fn keys(&self) -> impl Iterator<Item = EdgeKey> + '_ {
        self.edges.iter().map(|(k, _)| *k)
    }

    pub fn attrs(&self, key: EdgeKey) -> Result<&AttrSet> {
        self.edges
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, e)| e)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown edge {key:?}")))
    }

    pub fn remove(&mut self, key: EdgeKey) {
        self.edges.retain(|(k, _)| *k != key);
    }

    pub fn add_special(&mut self, attrs: AttrSet) -> EdgeKey {
        let key = EdgeKey::Special(self.next_special);
        self.next_special += 1;
        let pos = self.edges.partition_point(|(k, _)| *k < key);
        self.edges.insert(pos, (key, attrs));
        key
    }

    /// o(e, H) = e ∩ ∪(E(H) \ {e}); empty when `e` is the only edge.
    pub fn overlap(&self, key: EdgeKey) -> Result<AttrSet> {
        let own = self.attrs(key)?;
        let mut rest = AttrSet::new();
        for (k, e) in &self.edges {
            if *k != key {
                rest = rest.union(e);
            }
        }
        Ok(own.intersect(&rest))
    }

    /// Whether `e` is an ear; on success returns the witness (the smallest
    /// other edge containing the overlap), or None for a single-edge graph.
    pub fn is_ear(&self, key: EdgeKey) -> Result<Option<Option<EdgeKey>>> {
        let overlap = self.overlap(key)?;
        if self.edges.len() == 1 {
            return Ok(Some(None));
        }
        for (k, e) in &self.edges {
            if *k != key && overlap.is_subset_of(e) {
                return Ok(Some(Some(*k)));
            }
        }
        Ok(None)
    }
}

/// Convenience wrappers matching the spec surface on whole hypergraphs.
pub fn overlap(h: &Hypergraph, r: RelId) -> Result<AttrSet> {
    if (r as usize) >= h.num_relations() {
        return Err(Error::InvalidArgument(format!("unknown relation id {r}")));
    }
    WorkingHypergraph::from_hypergraph(h).overlap(EdgeKey::Base(r))
}

pub fn is_ear(h: &Hypergraph, r: RelId) -> Result<(bool, Option<RelId>)> {
    if (r as usize) >= h.num_relations() {
        return Err(Error::InvalidArgument(format!("unknown relation id {r}")));
    }
    let work = WorkingHypergraph::from_hypergraph(h);
    match work.is_ear(EdgeKey::Base(r))? {
        Some(witness) => Ok((
            true,
            witness.map(|k| match k {
                EdgeKey::Base(b) => b,
                EdgeKey::Special(_) => unreachable!("no special edges in a base hypergraph"),
            }),
        )),
        None => Ok((false, None)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::{hierarchical, star, triangle};

    #[test]
    fn overlap_star_r1_is_hub() {
        let h = star(4);
        let o = overlap(&h, 0).unwrap();
        assert_eq!(o, AttrSet::singleton(h.attr_by_name("x1").unwrap()));
    }

    #[test]
    fn overlap_single_edge_empty() {
        let h =
            Hypergraph::new(vec![("R1".into(), vec!["x1".into(), "x2".into()])], vec![]).unwrap();
        assert!(overlap(&h, 0).unwrap().is_empty());
    }

    #[test]
    fn overlap_hier_r3() {
        let h = hierarchical();
        let x5 = h.attr_by_name("x5").unwrap();
        assert_eq!(overlap(&h, 2).unwrap(), AttrSet::singleton(x5));
    }

    #[test]
    fn overlap_unknown_edge_errors() {
        let h = star(3);
        assert!(overlap(&h, 9).is_err());
        assert!(is_ear(&h, 9).is_err());
    }

    #[test]
    fn ear_triangle_false() {
        let h = triangle();
        for r in 0..3 {
            assert_eq!(is_ear(&h, r).unwrap(), (false, None));
        }
    }

    #[test]
    fn ear_star_witness_is_first() {
        let h = star(4);
        let (ok, witness) = is_ear(&h, 1).unwrap();
        assert!(ok);
        assert_eq!(witness, Some(0)); // lexicographically first containing x1
    }

    #[test]
    fn ear_hier_r4_witness_r1() {
        let h = hierarchical();
        let (ok, witness) = is_ear(&h, 3).unwrap();
        assert!(ok);
        assert_eq!(witness, Some(0));
    }

    #[test]
    fn gyo_examples() {
        assert!(hierarchical().gyo_is_acyclic());
        assert!(!triangle().gyo_is_acyclic());
        assert!(crate::workload::clique_graph().gyo_is_acyclic());
        assert!(crate::workload::shared_core().gyo_is_acyclic());
        assert!(crate::workload::floating_satellite().gyo_is_acyclic());
        assert!(star(5).gyo_is_acyclic());
    }

    #[test]
    fn disconnected_rejected() {
        let err = Hypergraph::new(
            vec![
                ("R1".into(), vec!["a".into()]),
                ("R2".into(), vec!["b".into()]),
            ],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Disconnected));
    }

    #[test]
    fn duplicate_relation_name_rejected() {
        let err = Hypergraph::new(
            vec![
                ("R1".into(), vec!["a".into()]),
                ("R1".into(), vec!["a".into(), "b".into()]),
            ],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn output_must_be_covered() {
        let err =
            Hypergraph::new(vec![("R1".into(), vec!["a".into()])], vec!["zzz".into()]).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }
}
