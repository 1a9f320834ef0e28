//! The embedding quasi-orders `≼` and `≼_r` on states.
//!
//! `s ≼ s'` holds when some injective map sends every thread of `s` to a thread of `s'` with a
//! larger marking, and every edge to an edge with a larger label. `≼_r` also pins root to root.
//! Both are decided by a memoised top-down check that solves one bipartite matching per pair of
//! vertices.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::model::{abstraction, TreeState, VertexId};

/// A witness for `s ≼ s'`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Embedding {
    pub map: BTreeMap<VertexId, VertexId>,
}

impl Embedding {
    /// Re-checks the embedding conditions directly, independently of how it was found.
    pub fn check(&self, s: &TreeState, t: &TreeState) -> bool {
        if self.map.len() != s.len() || !s.vertices().all(|v| self.map.contains_key(&v)) {
            return false;
        }
        let mut images: Vec<VertexId> = self.map.values().copied().collect();
        images.sort();
        images.dedup();
        if images.len() != self.map.len() {
            return false;
        }
        self.map.iter().all(|(v, fv)| {
            let (Some(m), Some(fm)) = (s.marking(*v), t.marking(*fv)) else { return false };
            if !m.le(fm) {
                return false;
            }
            match s.parent(*v) {
                None => true,
                Some(p) => {
                    t.parent(*fv) == self.map.get(&p).copied()
                        && s.edge_label(*v).zip(t.edge_label(*fv)).is_some_and(|(a, b)| a.le(b))
                }
            }
        })
    }

    /// [`check`](Self::check) plus root-to-root.
    pub fn check_rooted(&self, s: &TreeState, t: &TreeState) -> bool {
        match (s.root(), t.root()) {
            (None, None) => self.map.is_empty(),
            (Some(r), Some(rt)) => self.map.get(&r) == Some(&rt) && self.check(s, t),
            _ => false,
        }
    }
}

struct Embedder<'a> {
    s: &'a TreeState,
    t: &'a TreeState,
    /// `(u, u')` → the image of each child of `u`, in child order, when `u` embeds at `u'`.
    memo: HashMap<(VertexId, VertexId), Option<Vec<VertexId>>>,
}

impl<'a> Embedder<'a> {
    fn new(s: &'a TreeState, t: &'a TreeState) -> Self {
        Embedder { s, t, memo: HashMap::new() }
    }

    fn embeds(&mut self, u: VertexId, ut: VertexId) -> bool {
        if let Some(r) = self.memo.get(&(u, ut)) {
            return r.is_some();
        }
        let result = self.solve(u, ut);
        let ok = result.is_some();
        self.memo.insert((u, ut), result);
        ok
    }

    fn solve(&mut self, u: VertexId, ut: VertexId) -> Option<Vec<VertexId>> {
        if !self.s.marking(u)?.le(self.t.marking(ut)?) {
            return None;
        }
        let kids: Vec<VertexId> = self.s.children(u).to_vec();
        let slots: Vec<VertexId> = self.t.children(ut).to_vec();
        if kids.len() > slots.len() {
            return None;
        }
        let mut adj: Vec<Vec<usize>> = Vec::with_capacity(kids.len());
        for c in &kids {
            let label = self.s.edge_label(*c)?;
            let mut row = Vec::new();
            for (j, ct) in slots.iter().enumerate() {
                if label.le(self.t.edge_label(*ct)?) && self.embeds(*c, *ct) {
                    row.push(j);
                }
            }
            if row.is_empty() {
                return None;
            }
            adj.push(row);
        }
        let assign = max_matching(&adj, slots.len())?;
        Some(assign.into_iter().map(|j| slots[j]).collect())
    }

    fn collect(&self, u: VertexId, ut: VertexId, map: &mut BTreeMap<VertexId, VertexId>) {
        map.insert(u, ut);
        let images = self.memo[&(u, ut)].as_ref().expect("embedding was established");
        for (c, ct) in self.s.children(u).iter().zip(images) {
            self.collect(*c, *ct, map);
        }
    }

    fn anchored(&mut self, ut: VertexId) -> Option<Embedding> {
        let r = self.s.root()?;
        if !self.embeds(r, ut) {
            return None;
        }
        let mut map = BTreeMap::new();
        self.collect(r, ut, &mut map);
        Some(Embedding { map })
    }
}

/// Kuhn's augmenting-path matching. Returns the slot of every left vertex when all of them
/// can be matched.
fn max_matching(adj: &[Vec<usize>], right: usize) -> Option<Vec<usize>> {
    fn augment(i: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none_or(|k| augment(k, adj, seen, owner)) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }
    let mut owner: Vec<Option<usize>> = vec![None; right];
    for i in 0..adj.len() {
        let mut seen = vec![false; right];
        if !augment(i, adj, &mut seen, &mut owner) {
            return None;
        }
    }
    let mut out = vec![0; adj.len()];
    for (j, o) in owner.iter().enumerate() {
        if let Some(i) = o {
            out[*i] = j;
        }
    }
    Some(out)
}

/// `s ≼ s'`, with a witness.
pub fn leq(s: &TreeState, t: &TreeState) -> Option<Embedding> {
    if s.is_empty() {
        return Some(Embedding::default());
    }
    let mut e = Embedder::new(s, t);
    t.vertices().find_map(|ut| e.anchored(ut))
}

/// `s ≼_r s'`, with a witness.
pub fn leq_rooted(s: &TreeState, t: &TreeState) -> Option<Embedding> {
    match (s.root(), t.root()) {
        (None, None) => Some(Embedding::default()),
        (Some(_), Some(rt)) => Embedder::new(s, t).anchored(rt),
        _ => None,
    }
}

/// `s ≃ s'`.
pub fn equivalent(s: &TreeState, t: &TreeState) -> bool {
    abstraction(s) == abstraction(t)
}
