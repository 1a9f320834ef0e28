//! The abstract graph of a rooted net.
//!
//! Vertices are the root `r` and one vertex `v_t` per abstract transition `t` that some thread
//! can fire. `M_a(r) = m0` and `M_a(v_t) = Ω(t)`. There is an edge `u → v_t` when a thread started
//! at `M_a(u)` can eventually fire `t`, which is a coverability question on `N̂_el`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::marking::Marking;
use crate::model::{RpnDef, TransitionId};
use crate::petri::{BackwardBasis, PetriNet, PetriStats};
use crate::reduce::{build_hat_el, build_hat_with, ReduceError, DEFAULT_WITNESS_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum GraphVertex {
    Root,
    Abstract(TransitionId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractGraph {
    pub vertices: BTreeSet<GraphVertex>,
    pub edges: BTreeSet<(GraphVertex, GraphVertex)>,
    pub marking: BTreeMap<GraphVertex, Marking>,
    names: BTreeMap<GraphVertex, String>,
}

/// Builds the graph of `def` from `s[r, m0]`.
pub fn build_abstract_graph(def: &RpnDef, m0: &Marking) -> Result<AbstractGraph, ReduceError> {
    let mut stats = PetriStats::default();
    let hat = build_hat_with(def, DEFAULT_WITNESS_CAP, &mut stats)?;
    Ok(build_with(def, &build_hat_el(&hat), m0, &mut stats))
}

/// Builds the graph on a precomputed `N̂_el`. One backward basis is computed per abstract
/// transition; each vertex then costs one membership test per transition.
pub fn build_with(def: &RpnDef, hat_el: &PetriNet, m0: &Marking, stats: &mut PetriStats) -> AbstractGraph {
    let abstracts = def.abstract_ids();
    let bases: Vec<BackwardBasis> = abstracts
        .iter()
        .map(|t| {
            stats.coverability_calls += 1;
            BackwardBasis::compute(hat_el, std::slice::from_ref(&def.transition(*t).pre))
        })
        .collect();

    let mut g = AbstractGraph {
        vertices: BTreeSet::from([GraphVertex::Root]),
        edges: BTreeSet::new(),
        marking: BTreeMap::from([(GraphVertex::Root, m0.clone())]),
        names: BTreeMap::from([(GraphVertex::Root, "r".to_string())]),
    };
    let mut queue = VecDeque::from([GraphVertex::Root]);
    while let Some(u) = queue.pop_front() {
        let mu = g.marking[&u].clone();
        for (t, basis) in abstracts.iter().zip(&bases) {
            if !basis.covers_from(&mu) {
                continue;
            }
            let v = GraphVertex::Abstract(*t);
            g.edges.insert((u, v));
            if g.vertices.insert(v) {
                g.marking.insert(v, def.transition(*t).start().clone());
                g.names.insert(v, format!("v_{}", def.name(*t)));
                queue.push_back(v);
            }
        }
    }
    g
}

impl AbstractGraph {
    pub fn name(&self, v: GraphVertex) -> &str {
        &self.names[&v]
    }

    pub fn successors(&self, v: GraphVertex) -> impl Iterator<Item = GraphVertex> + '_ {
        self.edges.range((v, GraphVertex::Root)..).take_while(move |(a, _)| *a == v).map(|(_, b)| *b)
    }

    /// Vertices sorted by name.
    fn by_name(&self) -> Vec<GraphVertex> {
        let mut vs: Vec<GraphVertex> = self.vertices.iter().copied().collect();
        vs.sort_by(|a, b| self.names[a].cmp(&self.names[b]));
        vs
    }

    /// Distance from every vertex to `target` (number of edges), by backward search.
    fn distances_to(&self, target: GraphVertex) -> BTreeMap<GraphVertex, usize> {
        let mut dist = BTreeMap::from([(target, 0)]);
        let mut queue = VecDeque::from([target]);
        while let Some(v) = queue.pop_front() {
            for (a, _) in self.edges.iter().filter(|(_, b)| *b == v) {
                if !dist.contains_key(a) {
                    dist.insert(*a, dist[&v] + 1);
                    queue.push_back(*a);
                }
            }
        }
        dist
    }

    /// A shortest cycle, if any. Among shortest cycles the one whose vertex names, read from
    /// its smallest vertex, come first lexicographically.
    pub fn has_cycle(&self) -> Option<Vec<GraphVertex>> {
        let mut best: Option<(usize, GraphVertex, BTreeMap<GraphVertex, usize>)> = None;
        for v in self.by_name() {
            let dist = self.distances_to(v);
            let len = self.successors(v).filter_map(|w| dist.get(&w)).map(|d| d + 1).min();
            if let Some(len) = len {
                if best.as_ref().is_none_or(|(l, _, _)| len < *l) {
                    best = Some((len, v, dist));
                }
            }
        }
        let (len, start, dist) = best?;
        let mut cycle = vec![start];
        let mut cur = start;
        for remaining in (1..len).rev() {
            let next = self
                .successors(cur)
                .filter(|w| dist.get(w) == Some(&remaining))
                .min_by(|a, b| self.names[a].cmp(&self.names[b]))
                .expect("on a shortest cycle");
            cycle.push(next);
            cur = next;
        }
        Some(cycle)
    }

    pub fn cycle_names(&self, cycle: &[GraphVertex]) -> Vec<String> {
        cycle.iter().map(|v| self.names[v].clone()).collect()
    }

    pub fn edge_names(&self) -> BTreeSet<(String, String)> {
        self.edges.iter().map(|(a, b)| (self.names[a].clone(), self.names[b].clone())).collect()
    }

    /// Graphviz text. Vertices are annotated with their marking.
    pub fn to_dot(&self, def: &RpnDef) -> String {
        let mut out = String::from("digraph abstract_graph {\n");
        for v in self.by_name() {
            let _ = writeln!(out, "  \"{}\" [label=\"{}\\n{}\"];", self.names[&v], self.names[&v], def.fmt_marking(&self.marking[&v]));
        }
        let mut edges: Vec<(String, String)> = self.edge_names().into_iter().collect();
        edges.sort();
        for (a, b) in edges {
            let _ = writeln!(out, "  \"{a}\" -> \"{b}\";");
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn pairs(list: &[(&str, &str)]) -> BTreeSet<(String, String)> {
        list.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn fig1_graph() {
        let def = fixtures::fig1();
        let g = build_abstract_graph(&def, &def.bag(&[("p_ini", 1)])).unwrap();
        assert_eq!(g.vertices.len(), 4);
        let expected = pairs(&[
            ("r", "v_t_beg"),
            ("v_t_beg", "v_t_a2"),
            ("v_t_beg", "v_t_b2"),
            ("v_t_a2", "v_t_b2"),
            ("v_t_b2", "v_t_a2"),
            ("v_t_a2", "v_t_a2"),
            ("v_t_b2", "v_t_b2"),
        ]);
        assert_eq!(g.edge_names(), expected);
        assert_eq!(g.marking[&GraphVertex::Abstract(def.transition_id("t_a2").unwrap())], def.bag(&[("p_beg", 1)]));
        let cycle = g.has_cycle().unwrap();
        assert_eq!(g.cycle_names(&cycle), vec!["v_t_a2"]);
        let dot = g.to_dot(&def);
        assert!(dot.contains("\"r\" -> \"v_t_beg\";"));
        assert!(dot.contains("p_beg"));
    }

    #[test]
    fn zero_marking_gives_root_only() {
        let def = fixtures::fig1();
        let g = build_abstract_graph(&def, &Marking::new()).unwrap();
        assert_eq!(g.vertices.len(), 1);
        assert!(g.edges.is_empty());
        assert!(g.has_cycle().is_none());
    }

    #[test]
    fn two_cycles_and_dags() {
        let def = fixtures::fig1();
        let mut g = build_abstract_graph(&def, &def.bag(&[("p_ini", 1)])).unwrap();
        let a = GraphVertex::Abstract(def.transition_id("t_a2").unwrap());
        let b = GraphVertex::Abstract(def.transition_id("t_b2").unwrap());
        g.edges.remove(&(a, a));
        g.edges.remove(&(b, b));
        assert_eq!(g.cycle_names(&g.has_cycle().unwrap()), vec!["v_t_a2", "v_t_b2"]);
        g.edges.remove(&(a, b));
        assert!(g.has_cycle().is_none());
    }
}
