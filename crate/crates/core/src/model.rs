//! Recursive Petri nets: definitions, tree states and the firing rule.
//!
//! A state is a tree of threads. Every thread carries its own marking and
//! every edge carries the output marking `W+(t)` of the abstract transition
//! that spawned the child. Three kinds of transitions exist:
//!
//! * elementary: the usual Petri net rule, applied to the firing thread;
//! * abstract: consumes `W-(t)` from the thread and spawns a child marked
//!   `Ω(t)`, linked by an edge labelled `W+(t)`;
//! * cut: removes the firing thread and all its descendants; the parent (if
//!   any) receives the label of the removed edge.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::marking::{Marking, Place};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TransitionKind {
    Elementary,
    Abstract,
    Cut,
}

impl TransitionKind {
    pub fn keyword(self) -> &'static str {
        match self {
            TransitionKind::Elementary => "elem",
            TransitionKind::Abstract => "abs",
            TransitionKind::Cut => "cut",
        }
    }
}

/// Index of a transition inside its owning net.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TransitionId(pub u32);

impl TransitionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub id: String,
    pub kind: TransitionKind,
    pub pre: Marking,
    /// Absent for cut transitions.
    pub post: Option<Marking>,
    /// The starting marking `Ω(t)`; present exactly for abstract transitions.
    pub start: Option<Marking>,
    pub label: Option<String>,
}

impl Transition {
    pub fn elementary(id: impl Into<String>, pre: Marking, post: Marking) -> Self {
        Transition { id: id.into(), kind: TransitionKind::Elementary, pre, post: Some(post), start: None, label: None }
    }

    pub fn abstract_(id: impl Into<String>, pre: Marking, post: Marking, start: Marking) -> Self {
        Transition {
            id: id.into(),
            kind: TransitionKind::Abstract,
            pre,
            post: Some(post),
            start: Some(start),
            label: None,
        }
    }

    pub fn cut(id: impl Into<String>, pre: Marking) -> Self {
        Transition { id: id.into(), kind: TransitionKind::Cut, pre, post: None, start: None, label: None }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn post(&self) -> &Marking {
        self.post.as_ref().unwrap_or(Marking::zero())
    }

    pub fn start(&self) -> &Marking {
        self.start.as_ref().unwrap_or(Marking::zero())
    }
}

/// A recursive Petri net `⟨P, T = T_el ⊎ T_ab ⊎ T_τ, W-, W+, Ω⟩` with optional labels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RpnDef {
    pub places: Vec<String>,
    pub transitions: Vec<Transition>,
}

/// One broken [`RpnDef`] invariant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Violation {
    DuplicatePlace(String),
    DuplicateTransition(String),
    MissingStart(String),
    StartOnNonAbstract(String),
    CutHasPost(String),
    MissingPost(String),
    UnknownPlace { transition: String, place: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicatePlace(p) => write!(f, "duplicate-place({p})"),
            Violation::DuplicateTransition(t) => write!(f, "duplicate-transition({t})"),
            Violation::MissingStart(t) => write!(f, "missing-start({t})"),
            Violation::StartOnNonAbstract(t) => write!(f, "start-on-non-abstract({t})"),
            Violation::CutHasPost(t) => write!(f, "cut-has-post({t})"),
            Violation::MissingPost(t) => write!(f, "missing-post({t})"),
            Violation::UnknownPlace { transition, place } => {
                write!(f, "unknown-place({transition}, #{place})")
            }
        }
    }
}

impl RpnDef {
    pub fn new() -> Self {
        RpnDef::default()
    }

    pub fn add_place(&mut self, name: impl Into<String>) -> Place {
        self.places.push(name.into());
        Place(self.places.len() as u32 - 1)
    }

    pub fn add_transition(&mut self, t: Transition) -> TransitionId {
        self.transitions.push(t);
        TransitionId(self.transitions.len() as u32 - 1)
    }

    pub fn place(&self, name: &str) -> Option<Place> {
        self.places.iter().position(|p| p == name).map(|i| Place(i as u32))
    }

    pub fn transition_id(&self, name: &str) -> Option<TransitionId> {
        self.transitions.iter().position(|t| t.id == name).map(|i| TransitionId(i as u32))
    }

    pub fn transition(&self, id: TransitionId) -> &Transition {
        &self.transitions[id.index()]
    }

    pub fn get(&self, id: TransitionId) -> Option<&Transition> {
        self.transitions.get(id.index())
    }

    pub fn name(&self, id: TransitionId) -> &str {
        &self.transitions[id.index()].id
    }

    pub fn ids(&self) -> impl Iterator<Item = TransitionId> + '_ {
        (0..self.transitions.len() as u32).map(TransitionId)
    }

    pub fn ids_of(&self, kind: TransitionKind) -> impl Iterator<Item = TransitionId> + '_ {
        self.ids().filter(move |t| self.transition(*t).kind == kind)
    }

    pub fn abstract_ids(&self) -> Vec<TransitionId> {
        self.ids_of(TransitionKind::Abstract).collect()
    }

    pub fn cut_ids(&self) -> Vec<TransitionId> {
        self.ids_of(TransitionKind::Cut).collect()
    }

    /// Builds a marking from `(place name, count)` pairs.
    ///
    /// Panics on unknown place names; meant for fixtures and tests.
    pub fn bag(&self, pairs: &[(&str, u64)]) -> Marking {
        Marking::from_pairs(
            pairs
                .iter()
                .map(|(name, n)| (self.place(name).unwrap_or_else(|| panic!("unknown place {name}")), *n)),
        )
    }

    /// The set `{W+(t) | t ∈ T_ab}` of admissible edge labels.
    pub fn edge_labels(&self) -> BTreeSet<Marking> {
        self.ids_of(TransitionKind::Abstract).map(|t| self.transition(t).post().clone()).collect()
    }

    pub fn is_labelled(&self) -> bool {
        self.transitions.iter().any(|t| t.label.is_some())
    }

    pub fn fmt_marking(&self, m: &Marking) -> String {
        m.display(&self.places).to_string()
    }

    /// Checks every invariant of the definition. The list is empty iff the net is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for p in &self.places {
            if !seen.insert(p.as_str()) {
                out.push(Violation::DuplicatePlace(p.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for t in &self.transitions {
            if !seen.insert(t.id.as_str()) {
                out.push(Violation::DuplicateTransition(t.id.clone()));
            }
            match t.kind {
                TransitionKind::Abstract if t.start.is_none() => out.push(Violation::MissingStart(t.id.clone())),
                TransitionKind::Elementary | TransitionKind::Cut if t.start.is_some() => {
                    out.push(Violation::StartOnNonAbstract(t.id.clone()))
                }
                _ => {}
            }
            match t.kind {
                TransitionKind::Cut if t.post.is_some() => out.push(Violation::CutHasPost(t.id.clone())),
                TransitionKind::Elementary | TransitionKind::Abstract if t.post.is_none() => {
                    out.push(Violation::MissingPost(t.id.clone()))
                }
                _ => {}
            }
            let bags = [Some(&t.pre), t.post.as_ref(), t.start.as_ref()];
            let mut unknown = BTreeSet::new();
            for bag in bags.into_iter().flatten() {
                for p in bag.support() {
                    if p.index() >= self.places.len() {
                        unknown.insert(p.0);
                    }
                }
            }
            for place in unknown {
                out.push(Violation::UnknownPlace { transition: t.id.clone(), place });
            }
        }
        out
    }
}

/// Identifier of a thread. Fresh identifiers come from a per-state counter and are never reused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A firing `(v, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FiringEvent {
    pub vertex: VertexId,
    pub transition: TransitionId,
}

impl FiringEvent {
    pub fn new(vertex: VertexId, transition: TransitionId) -> Self {
        FiringEvent { vertex, transition }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Node {
    marking: Marking,
    parent: Option<VertexId>,
    /// `Λ(prd(v), v)`; zero for the root.
    edge: Marking,
    /// In creation order.
    children: Vec<VertexId>,
}

/// A concrete state: a tree of threads with vertex identities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeState {
    nodes: BTreeMap<VertexId, Node>,
    root: Option<VertexId>,
    next_fresh: u32,
}

impl Default for TreeState {
    fn default() -> Self {
        TreeState::empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FireError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown transition #{}", .0 .0)]
    UnknownTransition(TransitionId),
    #[error("transition #{} is not enabled at vertex {vertex}", .transition.0)]
    NotEnabled { vertex: VertexId, transition: TransitionId },
    #[error("step {step}: {cause}")]
    AtStep { step: usize, cause: Box<FireError> },
}

impl TreeState {
    /// The empty tree `∅`.
    pub fn empty() -> Self {
        TreeState { nodes: BTreeMap::new(), root: None, next_fresh: 0 }
    }

    /// `s[r, m]`: a single root thread `#0`.
    pub fn single(marking: Marking) -> Self {
        let mut s = TreeState::empty();
        s.nodes.insert(VertexId(0), Node { marking, parent: None, edge: Marking::new(), children: Vec::new() });
        s.root = Some(VertexId(0));
        s.next_fresh = 1;
        s
    }

    /// Appends a child with a fresh identifier. Panics if `parent` is unknown.
    pub fn add_child(&mut self, parent: VertexId, edge: Marking, marking: Marking) -> VertexId {
        let id = VertexId(self.next_fresh);
        self.next_fresh += 1;
        self.nodes.get_mut(&parent).expect("unknown parent").children.push(id);
        self.nodes.insert(id, Node { marking, parent: Some(parent), edge, children: Vec::new() });
        id
    }

    pub fn root(&self) -> Option<VertexId> {
        self.root
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn next_fresh(&self) -> u32 {
        self.next_fresh
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.nodes.contains_key(&v)
    }

    /// Vertices in creation order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn marking(&self, v: VertexId) -> Option<&Marking> {
        self.nodes.get(&v).map(|n| &n.marking)
    }

    pub fn set_marking(&mut self, v: VertexId, m: Marking) {
        if let Some(n) = self.nodes.get_mut(&v) {
            n.marking = m;
        }
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.nodes.get(&v).and_then(|n| n.parent)
    }

    /// `Λ(prd(v), v)`, or `None` for the root and unknown vertices.
    pub fn edge_label(&self, v: VertexId) -> Option<&Marking> {
        self.nodes.get(&v).filter(|n| n.parent.is_some()).map(|n| &n.edge)
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        self.nodes.get(&v).map(|n| n.children.as_slice()).unwrap_or(&[])
    }

    /// `Des_s(v)`: `v` and all of its descendants, in preorder.
    pub fn descendants(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = Vec::new();
        if !self.contains(v) {
            return out;
        }
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend(self.children(u).iter().rev());
        }
        out
    }

    /// Number of vertices on the longest root-to-leaf path (0 for `∅`).
    pub fn depth(&self) -> usize {
        fn go(s: &TreeState, v: VertexId) -> usize {
            1 + s.children(v).iter().map(|c| go(s, *c)).max().unwrap_or(0)
        }
        self.root.map(|r| go(self, r)).unwrap_or(0)
    }

    /// Projects every marking and edge label onto the first `dim` places.
    pub fn project(&self, dim: usize) -> TreeState {
        let mut out = self.clone();
        for n in out.nodes.values_mut() {
            n.marking = n.marking.restrict(dim);
            n.edge = n.edge.restrict(dim);
        }
        out
    }

    /// The same tree with every vertex id (and the fresh counter) increased by `offset`.
    pub fn shifted(&self, offset: u32) -> TreeState {
        let sh = |v: VertexId| VertexId(v.0 + offset);
        TreeState {
            nodes: self
                .nodes
                .iter()
                .map(|(v, n)| {
                    let node = Node {
                        marking: n.marking.clone(),
                        parent: n.parent.map(sh),
                        edge: n.edge.clone(),
                        children: n.children.iter().map(|c| sh(*c)).collect(),
                    };
                    (sh(*v), node)
                })
                .collect(),
            root: self.root.map(sh),
            next_fresh: self.next_fresh + offset,
        }
    }

    /// Renames the places of every marking and edge label.
    pub fn map_places(&self, f: impl Fn(Place) -> Place) -> TreeState {
        let mut out = self.clone();
        for n in out.nodes.values_mut() {
            n.marking = n.marking.map_places(&f);
            n.edge = n.edge.map_places(&f);
        }
        out
    }

    /// Adds `extra` to the marking of every vertex.
    pub fn add_to_all(&self, extra: &Marking) -> TreeState {
        let mut out = self.clone();
        for n in out.nodes.values_mut() {
            n.marking += extra;
        }
        out
    }

    /// Edge labels that are not `W+(t)` of any abstract transition of `def`.
    pub fn foreign_edge_labels(&self, def: &RpnDef) -> Vec<VertexId> {
        let labels = def.edge_labels();
        self.vertices().filter(|v| self.edge_label(*v).is_some_and(|m| !labels.contains(m))).collect()
    }

    /// Fires `e` in place and returns the vertex created by an abstract firing.
    pub fn fire_mut(&mut self, def: &RpnDef, e: FiringEvent) -> Result<Option<VertexId>, FireError> {
        let t = def.get(e.transition).ok_or(FireError::UnknownTransition(e.transition))?;
        let node = self.nodes.get_mut(&e.vertex).ok_or(FireError::UnknownVertex(e.vertex))?;
        let Some(rest) = node.marking.checked_sub(&t.pre) else {
            return Err(FireError::NotEnabled { vertex: e.vertex, transition: e.transition });
        };
        match t.kind {
            TransitionKind::Elementary => {
                node.marking = &rest + t.post();
                Ok(None)
            }
            TransitionKind::Abstract => {
                node.marking = rest;
                let child = self.add_child(e.vertex, t.post().clone(), t.start().clone());
                Ok(Some(child))
            }
            TransitionKind::Cut => {
                let parent = node.parent;
                let edge = std::mem::take(&mut node.edge);
                for d in self.descendants(e.vertex) {
                    self.nodes.remove(&d);
                }
                match parent {
                    None => self.root = None,
                    Some(p) => {
                        let pn = self.nodes.get_mut(&p).expect("parent of a live vertex");
                        pn.children.retain(|c| *c != e.vertex);
                        pn.marking += &edge;
                    }
                }
                Ok(None)
            }
        }
    }
}

/// Whether `W-(t) <= M_s(v)`.
pub fn enabled(def: &RpnDef, s: &TreeState, e: FiringEvent) -> Result<bool, FireError> {
    let t = def.get(e.transition).ok_or(FireError::UnknownTransition(e.transition))?;
    let m = s.marking(e.vertex).ok_or(FireError::UnknownVertex(e.vertex))?;
    Ok(t.pre.le(m))
}

/// Fires `e` and returns the successor state plus the vertex it created, if any.
/// The input state is left untouched.
pub fn fire(def: &RpnDef, s: &TreeState, e: FiringEvent) -> Result<(TreeState, Option<VertexId>), FireError> {
    let mut next = s.clone();
    let created = next.fire_mut(def, e)?;
    Ok((next, created))
}

/// Left fold of [`fire`] over `seq`.
pub fn fire_sequence(def: &RpnDef, s: &TreeState, seq: &[FiringEvent]) -> Result<TreeState, FireError> {
    let mut cur = s.clone();
    for (step, e) in seq.iter().enumerate() {
        cur.fire_mut(def, *e).map_err(|cause| FireError::AtStep { step, cause: Box::new(cause) })?;
    }
    Ok(cur)
}

/// Every enabled firing: vertices in creation order, transitions in declaration order.
pub fn enabled_events(def: &RpnDef, s: &TreeState) -> Vec<FiringEvent> {
    let mut out = Vec::new();
    for v in s.vertices() {
        let m = s.marking(v).expect("live vertex");
        for t in def.ids() {
            if def.transition(t).pre.le(m) {
                out.push(FiringEvent::new(v, t));
            }
        }
    }
    out
}

/// A thread of an abstract state: its marking and the multiset of `(edge label, subtree)` children,
/// kept sorted so that structural equality is abstract-state equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbstractNode {
    pub marking: Marking,
    pub children: Vec<(Marking, AbstractNode)>,
}

/// A state with vertex identities forgotten. `AbstractState(None)` is `∅`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbstractState(pub Option<AbstractNode>);

impl AbstractNode {
    pub fn new(marking: Marking, mut children: Vec<(Marking, AbstractNode)>) -> Self {
        children.sort();
        AbstractNode { marking, children }
    }

    fn size(&self) -> usize {
        1 + self.children.iter().map(|(_, c)| c.size()).sum::<usize>()
    }

    fn write_canonical(&self, out: &mut String) {
        write_marking(&self.marking, out);
        out.push('{');
        for (edge, child) in &self.children {
            out.push('(');
            write_marking(edge, out);
            out.push_str("->");
            child.write_canonical(out);
            out.push(')');
        }
        out.push('}');
    }

    fn build(&self, s: &mut TreeState, at: VertexId) {
        for (edge, child) in &self.children {
            let v = s.add_child(at, edge.clone(), child.marking.clone());
            child.build(s, v);
        }
    }
}

fn write_marking(m: &Marking, out: &mut String) {
    out.push('[');
    for (i, (p, n)) in m.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!("{}:{}", p.0, n));
    }
    out.push(']');
}

impl AbstractState {
    pub fn empty() -> Self {
        AbstractState(None)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    pub fn size(&self) -> usize {
        self.0.as_ref().map(AbstractNode::size).unwrap_or(0)
    }

    /// Deterministic text form; equal abstract states have equal serializations.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        match &self.0 {
            None => out.push_str("empty"),
            Some(n) => n.write_canonical(&mut out),
        }
        out
    }

    /// A concrete representative: ids assigned in canonical preorder starting at `#0`.
    pub fn concretize(&self) -> TreeState {
        match &self.0 {
            None => TreeState::empty(),
            Some(n) => {
                let mut s = TreeState::single(n.marking.clone());
                n.build(&mut s, VertexId(0));
                s
            }
        }
    }
}

/// `s̄`: forgets vertex identities and sibling order.
pub fn abstraction(s: &TreeState) -> AbstractState {
    fn go(s: &TreeState, v: VertexId) -> AbstractNode {
        let children = s
            .children(v)
            .iter()
            .map(|c| (s.edge_label(*c).cloned().unwrap_or_default(), go(s, *c)))
            .collect();
        AbstractNode::new(s.marking(v).cloned().unwrap_or_default(), children)
    }
    AbstractState(s.root().map(|r| go(s, r)))
}
