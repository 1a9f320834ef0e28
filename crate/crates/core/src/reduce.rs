//! Net transformations: the rooted net, returning transitions, the shortcut net `N̂` and its
//! single-thread view `N̂_el`, plus the sequence translations between them.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::marking::{Marking, Place};
use crate::model::{FireError, FiringEvent, RpnDef, Transition, TransitionId, TransitionKind, TreeState, VertexId};
use crate::petri::{BackwardBasis, PetriNet, PetriStats, PnTransition};

/// Default cap on the length of extracted witness sequences.
pub const DEFAULT_WITNESS_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("the initial state is empty")]
    EmptyInitialState,
    #[error("generated name `{0}` collides with an existing place or transition")]
    NameCollision(String),
    #[error("sequence is not fireable: {0}")]
    NotFireable(#[from] FireError),
    #[error("no witness stored for returning transition `{0}`")]
    MissingWitness(String),
}

/// Fails if `name` is already used by a place or a transition of `def`.
pub(crate) fn fresh_name(def: &RpnDef, name: String) -> Result<String, ReduceError> {
    if def.place(&name).is_some() || def.transition_id(&name).is_some() {
        Err(ReduceError::NameCollision(name))
    } else {
        Ok(name)
    }
}

/// The rooted net `N̊` and its single-thread initial marking `m̊0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedResult {
    pub net: RpnDef,
    pub initial_marking: Marking,
    /// `v ↦ p_v` for every non-root vertex of the original initial state.
    pub vertex_place: BTreeMap<VertexId, Place>,
    /// `v ↦ t_v`.
    pub vertex_transition: BTreeMap<VertexId, TransitionId>,
    /// The original initial state.
    pub source: TreeState,
}

impl RootedResult {
    pub fn initial_state(&self) -> TreeState {
        TreeState::single(self.initial_marking.clone())
    }

    /// A firing sequence from `s[r, m̊0]` that rebuilds the original tree, together with the map
    /// from original vertices to the vertices it creates. Vertices are unfolded in preorder.
    pub fn unfold(&self) -> (Vec<FiringEvent>, BTreeMap<VertexId, VertexId>) {
        let mut seq = Vec::new();
        let mut map = BTreeMap::new();
        let Some(root) = self.source.root() else { return (seq, map) };
        map.insert(root, VertexId(0));
        let mut next = 1;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for c in self.source.children(v) {
                seq.push(FiringEvent::new(map[&v], self.vertex_transition[c]));
                map.insert(*c, VertexId(next));
                next += 1;
            }
            stack.extend(self.source.children(v).iter().rev());
        }
        (seq, map)
    }

    /// Translates a sequence of the original net from the original initial state into one of
    /// the rooted net from `s[r, m̊0]`: the unfolding followed by the renamed sequence.
    pub fn lift_sequence(&self, seq: &[FiringEvent]) -> Result<Vec<FiringEvent>, ReduceError> {
        let (mut out, mut map) = self.unfold();
        let mut orig = self.source.clone();
        let mut rooted = crate::model::fire_sequence(&self.net, &self.initial_state(), &out)?;
        for (step, e) in seq.iter().enumerate() {
            let at = |err| FireError::AtStep { step, cause: Box::new(err) };
            let v = *map.get(&e.vertex).ok_or(at(FireError::UnknownVertex(e.vertex)))?;
            let created = orig.fire_mut(&self.net, *e).map_err(at)?;
            let created_r = rooted.fire_mut(&self.net, FiringEvent::new(v, e.transition)).map_err(at)?;
            out.push(FiringEvent::new(v, e.transition));
            if let (Some(a), Some(b)) = (created, created_r) {
                map.insert(a, b);
            }
        }
        Ok(out)
    }

    /// Translates a sequence of the rooted net from `s[r, m̊0]` into one of the original net
    /// from the original initial state. Firings of the `t_v` transitions are dropped; the thread
    /// they create stands for the original vertex `v`.
    pub fn lower_sequence(&self, seq: &[FiringEvent]) -> Result<Vec<FiringEvent>, ReduceError> {
        let by_transition: HashMap<TransitionId, VertexId> =
            self.vertex_transition.iter().map(|(v, t)| (*t, *v)).collect();
        let mut map: HashMap<VertexId, VertexId> = HashMap::new();
        if let Some(r) = self.source.root() {
            map.insert(VertexId(0), r);
        }
        let mut rooted = self.initial_state();
        let mut orig = self.source.clone();
        let mut out = Vec::new();
        for (step, e) in seq.iter().enumerate() {
            let at = |err| FireError::AtStep { step, cause: Box::new(err) };
            let created_r = rooted.fire_mut(&self.net, *e).map_err(at)?;
            if let Some(v) = by_transition.get(&e.transition) {
                map.insert(created_r.expect("t_v is abstract"), *v);
                continue;
            }
            let v = *map.get(&e.vertex).ok_or(at(FireError::UnknownVertex(e.vertex)))?;
            let created = orig.fire_mut(&self.net, FiringEvent::new(v, e.transition)).map_err(at)?;
            out.push(FiringEvent::new(v, e.transition));
            if let (Some(a), Some(b)) = (created_r, created) {
                map.insert(a, b);
            }
        }
        Ok(out)
    }
}

/// Builds `N̊`: one place `p_v` and one abstract transition `t_v` per non-root vertex `v` of `s0`.
/// `t_v` consumes `p_v`, has output `Λ(prd(v), v)` and starts its thread with `M(v)` plus one
/// token in `p_c` for every child `c` of `v`.
pub fn make_rooted(def: &RpnDef, s0: &TreeState) -> Result<RootedResult, ReduceError> {
    let root = s0.root().ok_or(ReduceError::EmptyInitialState)?;
    let mut net = def.clone();
    let mut vertex_place = BTreeMap::new();
    let mut vertex_transition = BTreeMap::new();
    let others: Vec<VertexId> = s0.vertices().filter(|v| *v != root).collect();
    for v in &others {
        let name = fresh_name(def, format!("__root.p_{}", v.0))?;
        vertex_place.insert(*v, net.add_place(name));
    }
    let children_places = |v: VertexId| Marking::from_pairs(s0.children(v).iter().map(|c| (vertex_place[c], 1)));
    for v in &others {
        let name = fresh_name(def, format!("__root.t_{}", v.0))?;
        let mut start = s0.marking(*v).cloned().unwrap_or_default();
        start += &children_places(*v);
        let t = Transition::abstract_(
            name,
            Marking::singleton(vertex_place[v], 1),
            s0.edge_label(*v).cloned().unwrap_or_default(),
            start,
        );
        vertex_transition.insert(*v, net.add_transition(t));
    }
    let mut initial_marking = s0.marking(root).cloned().unwrap_or_default();
    initial_marking += &children_places(root);
    Ok(RootedResult { net, initial_marking, vertex_place, vertex_transition, source: s0.clone() })
}

/// `N̂`: the base net plus one elementary shortcut `t^r` per returning transition `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HatNet {
    pub base: RpnDef,
    /// The base transitions keep their ids; shortcuts are appended.
    pub net: RpnDef,
    pub returning: BTreeSet<TransitionId>,
    /// `t ↦ t^r`, ids in [`net`](Self::net).
    pub shortcut: BTreeMap<TransitionId, TransitionId>,
    /// `t ↦ σ_t` with `s[r, Ω(t)] →σ_t ∅` in the base net. The root of `s[r, Ω(t)]` is `#0` and
    /// the threads created along `σ_t` are `#1`, `#2`, ... in creation order. `None` when the
    /// witness is longer than the extraction cap.
    pub witnesses: BTreeMap<TransitionId, Option<Vec<FiringEvent>>>,
}

impl HatNet {
    /// The base transition behind a shortcut.
    pub fn original(&self, shortcut: TransitionId) -> Option<TransitionId> {
        self.shortcut.iter().find(|(_, s)| **s == shortcut).map(|(t, _)| *t)
    }
}

fn hat_net(def: &RpnDef, returning: &BTreeSet<TransitionId>) -> Result<(RpnDef, BTreeMap<TransitionId, TransitionId>), ReduceError> {
    let mut net = def.clone();
    let mut shortcut = BTreeMap::new();
    for t in returning {
        let tr = def.transition(*t);
        let mut r = Transition::elementary(fresh_name(def, format!("__hat.{}", tr.id))?, tr.pre.clone(), tr.post().clone());
        r.label = tr.label.clone();
        shortcut.insert(*t, net.add_transition(r));
    }
    Ok((net, shortcut))
}

/// `N̂_el` of an RPN: cut transitions removed, abstract outputs erased.
pub fn el_net(net: &RpnDef) -> PetriNet {
    PetriNet {
        places: net.places.clone(),
        transitions: net
            .ids()
            .filter_map(|t| {
                let tr = net.transition(t);
                let post = match tr.kind {
                    TransitionKind::Cut => return None,
                    TransitionKind::Abstract => Marking::new(),
                    TransitionKind::Elementary => tr.post().clone(),
                };
                Some(PnTransition { id: tr.id.clone(), pre: tr.pre.clone(), post, source: Some(t) })
            })
            .collect(),
    }
}

/// Translates a covering sequence of `el_net(net)` into firings at vertex `at`.
pub(crate) fn el_events(el: &PetriNet, seq: &[usize], at: VertexId) -> Vec<FiringEvent> {
    seq.iter()
        .map(|i| FiringEvent::new(at, el.transitions[*i].source.expect("derived from the RPN")))
        .collect()
}

/// The least fixpoint of returning transitions, with a replayable witness for each.
pub fn returning_transitions(
    def: &RpnDef,
) -> Result<(BTreeSet<TransitionId>, BTreeMap<TransitionId, Option<Vec<FiringEvent>>>), ReduceError> {
    let hat = build_hat_with(def, DEFAULT_WITNESS_CAP, &mut PetriStats::default())?;
    Ok((hat.returning, hat.witnesses))
}

pub fn build_hat(def: &RpnDef) -> Result<HatNet, ReduceError> {
    build_hat_with(def, DEFAULT_WITNESS_CAP, &mut PetriStats::default())
}

/// Computes `T_ret` round by round. Each round builds `N̂_el` for the current set, saturates the
/// backward basis of all cut guards once and adds every pending `t` whose `Ω(t)` lies in it.
pub fn build_hat_with(def: &RpnDef, witness_cap: usize, stats: &mut PetriStats) -> Result<HatNet, ReduceError> {
    let guards: Vec<Marking> = def.cut_ids().iter().map(|t| def.transition(*t).pre.clone()).collect();
    let cuts = def.cut_ids();
    let mut returning = BTreeSet::new();
    let mut witnesses = BTreeMap::new();
    loop {
        let (net, shortcut) = hat_net(def, &returning)?;
        if guards.is_empty() {
            break;
        }
        let el = el_net(&net);
        let basis = BackwardBasis::compute(&el, &guards);
        stats.coverability_calls += 1;
        let partial = HatNet {
            base: def.clone(),
            net,
            returning: returning.clone(),
            shortcut,
            witnesses: witnesses.clone(),
        };
        let mut found = Vec::new();
        for t in def.abstract_ids() {
            if returning.contains(&t) {
                continue;
            }
            let cov = basis.query(def.transition(t).start(), Some(witness_cap));
            if !cov.covered {
                continue;
            }
            let witness = cov.witness.and_then(|seq| {
                let hat_seq = el_events(&el, &seq, VertexId(0));
                let tau = cuts[cov.target.expect("covered")];
                let s = TreeState::single(def.transition(t).start().clone());
                let mut expanded = expand_hat_sequence(&partial, &s, &hat_seq).ok()??;
                expanded.push(FiringEvent::new(VertexId(0), tau));
                (expanded.len() <= witness_cap).then_some(expanded)
            });
            found.push((t, witness));
        }
        if found.is_empty() {
            break;
        }
        for (t, w) in found {
            returning.insert(t);
            witnesses.insert(t, w);
        }
    }
    let (net, shortcut) = hat_net(def, &returning)?;
    Ok(HatNet { base: def.clone(), net, returning, shortcut, witnesses })
}

/// `N̂_el` of a shortcut net.
pub fn build_hat_el(hat: &HatNet) -> PetriNet {
    el_net(&hat.net)
}

/// Replaces every shortcut firing `(v, t^r)` by `(v, t)` followed by the witness of `t`, moved
/// into the thread that `t` creates.
///
/// Returns `Ok(None)` when a needed witness was not extracted (too long).
pub fn expand_hat_sequence(
    hat: &HatNet,
    s: &TreeState,
    seq: &[FiringEvent],
) -> Result<Option<Vec<FiringEvent>>, ReduceError> {
    let mut a = s.clone();
    let mut b = s.clone();
    let mut map: HashMap<VertexId, VertexId> = s.vertices().map(|v| (v, v)).collect();
    let mut out = Vec::new();
    for (step, e) in seq.iter().enumerate() {
        let at = |err| ReduceError::NotFireable(FireError::AtStep { step, cause: Box::new(err) });
        let v = *map.get(&e.vertex).ok_or(at(FireError::UnknownVertex(e.vertex)))?;
        let created_a = a.fire_mut(&hat.net, *e).map_err(at)?;
        match hat.original(e.transition) {
            Some(t) => {
                let template = match hat.witnesses.get(&t) {
                    None => return Err(ReduceError::MissingWitness(hat.base.name(t).to_string())),
                    Some(None) => return Ok(None),
                    Some(Some(w)) => w,
                };
                out.push(FiringEvent::new(v, t));
                let child = b.fire_mut(&hat.base, FiringEvent::new(v, t)).map_err(at)?.expect("abstract");
                let mut reloc = HashMap::from([(VertexId(0), child)]);
                let mut next_template = 1;
                for te in template {
                    let u = reloc[&te.vertex];
                    let ev = FiringEvent::new(u, te.transition);
                    out.push(ev);
                    if let Some(c) = b.fire_mut(&hat.base, ev).map_err(at)? {
                        reloc.insert(VertexId(next_template), c);
                    }
                    if hat.base.transition(te.transition).kind == TransitionKind::Abstract {
                        next_template += 1;
                    }
                }
            }
            None => {
                let ev = FiringEvent::new(v, e.transition);
                let created_b = b.fire_mut(&hat.base, ev).map_err(at)?;
                out.push(ev);
                if let (Some(x), Some(y)) = (created_a, created_b) {
                    map.insert(x, y);
                }
            }
        }
    }
    Ok(Some(out))
}

/// Rewrites a base-net sequence into an `N̂` sequence with the same final state in which every
/// created thread survives.
///
/// A created thread that is later cut by its own cut firing, and is not inside another such
/// thread, turns into one shortcut firing at its parent at the position of the cut; all firings
/// inside its subtree go away. A created thread that disappears because an ancestor from `s0` is
/// cut is dropped together with its subtree.
pub fn omniscient_normalize(hat: &HatNet, s0: &TreeState, seq: &[FiringEvent]) -> Result<Vec<FiringEvent>, ReduceError> {
    let base = &hat.base;
    let mut s = s0.clone();
    let mut created_at: HashMap<VertexId, usize> = HashMap::new();
    let mut creation: Vec<Option<VertexId>> = Vec::with_capacity(seq.len());
    let mut parent: HashMap<VertexId, VertexId> = HashMap::new();
    // vertex ↦ (step, killer)
    let mut death: HashMap<VertexId, (usize, VertexId)> = HashMap::new();
    for (step, e) in seq.iter().enumerate() {
        let doomed = if base.transition(e.transition).kind == TransitionKind::Cut { s.descendants(e.vertex) } else { vec![] };
        let created = s
            .fire_mut(base, *e)
            .map_err(|err| ReduceError::NotFireable(FireError::AtStep { step, cause: Box::new(err) }))?;
        for d in doomed {
            death.insert(d, (step, e.vertex));
        }
        if let Some(c) = created {
            created_at.insert(c, step);
            parent.insert(c, e.vertex);
        }
        creation.push(created);
    }
    let parent_of = |v: VertexId| parent.get(&v).copied().or_else(|| s0.parent(v));
    let is_doomed_created = |v: VertexId| created_at.contains_key(&v) && death.contains_key(&v);
    // the outermost doomed created ancestor-or-self of `v`
    let outermost = |v: VertexId| {
        let mut found = None;
        let mut cur = Some(v);
        while let Some(x) = cur {
            if is_doomed_created(x) {
                found = Some(x);
            }
            cur = parent_of(x);
        }
        found
    };

    let mut collapsed: BTreeMap<usize, FiringEvent> = BTreeMap::new();
    for (v, step) in &created_at {
        if outermost(*v) != Some(*v) {
            continue;
        }
        let (cut_step, killer) = death[v];
        if killer == *v {
            let t = seq[*step].transition;
            let r = *hat.shortcut.get(&t).ok_or_else(|| ReduceError::MissingWitness(base.name(t).to_string()))?;
            collapsed.insert(cut_step, FiringEvent::new(parent[v], r));
        }
    }

    // (original step, event)
    let mut kept = Vec::new();
    for (step, e) in seq.iter().enumerate() {
        if let Some(ev) = collapsed.get(&step) {
            kept.push((step, *ev));
            continue;
        }
        if outermost(e.vertex).is_some() {
            continue;
        }
        if creation[step].is_some_and(|c| outermost(c) == Some(c)) {
            continue;
        }
        kept.push((step, *e));
    }

    // fewer creations happen, so created threads get other fresh ids
    let mut cur = s0.clone();
    let mut map: HashMap<VertexId, VertexId> = s0.vertices().map(|v| (v, v)).collect();
    let mut out = Vec::with_capacity(kept.len());
    for (i, (step, e)) in kept.iter().enumerate() {
        let ev = FiringEvent::new(map[&e.vertex], e.transition);
        let created = cur
            .fire_mut(&hat.net, ev)
            .map_err(|err| ReduceError::NotFireable(FireError::AtStep { step: i, cause: Box::new(err) }))?;
        out.push(ev);
        if let (Some(c), Some(old)) = (created, creation[*step]) {
            map.insert(old, c);
        }
    }
    Ok(out)
}
