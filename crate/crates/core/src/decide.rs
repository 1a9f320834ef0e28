//! Decision procedures (cut, cover, termination, boundedness, finiteness) and the net
//! constructions that relate cut, coverability and union of languages.
//!
//! Every procedure first replaces the initial tree by a single thread of the rooted net, then
//! asks coverability, boundedness or termination questions on `N̂_el`.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::absgraph::{self, AbstractGraph, GraphVertex};
use crate::marking::{Marking, Place};
use crate::model::{
    fire_sequence, FiringEvent, RpnDef, Transition, TransitionId, TransitionKind, TreeState, VertexId,
};
use crate::order::leq;
use crate::petri::{backward_coverability, pn_bounded_counted, pn_self_covering, PetriStats};
use crate::reduce::{
    build_hat_el, build_hat_with, el_events, expand_hat_sequence, fresh_name, make_rooted, ReduceError,
    RootedResult, DEFAULT_WITNESS_CAP,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("malformed target: {0}")]
    MalformedTarget(String),
    #[error("alphabet mismatch: only one of the nets carries labels")]
    AlphabetMismatch,
    #[error(transparent)]
    Reduce(#[from] ReduceError),
}

/// A finite set `S_f` of states to cover. Vertex ids are made pairwise distinct across states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverTarget {
    states: Vec<TreeState>,
}

impl CoverTarget {
    pub fn new(states: Vec<TreeState>) -> Result<Self, DecideError> {
        if states.is_empty() {
            return Err(DecideError::MalformedTarget("no states".into()));
        }
        let mut offset = 0;
        let mut out = Vec::with_capacity(states.len());
        for s in states {
            let shifted = s.shifted(offset);
            offset = shifted.next_fresh().max(offset);
            out.push(shifted);
        }
        Ok(CoverTarget { states: out })
    }

    pub fn single(s: TreeState) -> Self {
        CoverTarget { states: vec![s] }
    }

    pub fn states(&self) -> &[TreeState] {
        &self.states
    }

    pub fn contains_empty(&self) -> bool {
        self.states.iter().any(TreeState::is_empty)
    }

    /// Whether `s` dominates some target state.
    pub fn covered_by(&self, s: &TreeState) -> bool {
        self.states.iter().any(|f| leq(f, s).is_some())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Problem {
    Cut,
    Cover,
    Termination,
    Boundedness,
    Finiteness,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::Cut => "cut",
            Problem::Cover => "cover",
            Problem::Termination => "terminate",
            Problem::Boundedness => "bounded",
            Problem::Finiteness => "finite",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// Firings of the input net from the input state.
    Sequence(Vec<FiringEvent>),
    /// A cycle of the abstract graph of the rooted net, by vertex name.
    Cycle(Vec<String>),
    /// A self-covering run of `N̂_el` from the marking of an abstract-graph vertex; transitions
    /// are named as in `N̂_el`.
    SelfCover { vertex: String, prefix: Vec<String>, cycle: Vec<String> },
}

/// The outcome of a decision. `answer` reads as the problem name: cut reachable, target
/// coverable, terminating, bounded, finite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub problem: Problem,
    pub answer: bool,
    pub method: &'static str,
    pub witness: Option<Witness>,
    pub stats: PetriStats,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecideOptions {
    pub witness: bool,
    pub witness_cap: usize,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions { witness: true, witness_cap: DEFAULT_WITNESS_CAP }
    }
}

/// Whether `∅` is reachable from `s0`.
pub fn decide_cut(def: &RpnDef, s0: &TreeState) -> Result<Verdict, DecideError> {
    decide_cut_with(def, s0, DecideOptions::default())
}

pub fn decide_cut_with(def: &RpnDef, s0: &TreeState, opts: DecideOptions) -> Result<Verdict, DecideError> {
    let mut stats = PetriStats::default();
    if s0.is_empty() {
        return Ok(Verdict {
            problem: Problem::Cut,
            answer: true,
            method: "empty-initial-state",
            witness: Some(Witness::Sequence(vec![])),
            stats,
        });
    }
    let rooted = make_rooted(def, s0)?;
    let hat = build_hat_with(&rooted.net, opts.witness_cap, &mut stats)?;
    let el = build_hat_el(&hat);
    let cuts = rooted.net.cut_ids();
    let guards: Vec<Marking> = cuts.iter().map(|t| rooted.net.transition(*t).pre.clone()).collect();
    stats.coverability_calls += 1;
    let cov = backward_coverability(&el, &rooted.initial_marking, &guards, opts.witness.then_some(opts.witness_cap));
    let witness = if cov.covered {
        cov.witness.and_then(|seq| {
            let start = rooted.initial_state();
            let mut full = expand_hat_sequence(&hat, &start, &el_events(&el, &seq, VertexId(0))).ok()??;
            full.push(FiringEvent::new(VertexId(0), cuts[cov.target?]));
            let lowered = rooted.lower_sequence(&full).ok()?;
            let ok = lowered.len() <= opts.witness_cap
                && fire_sequence(def, s0, &lowered).is_ok_and(|end| end.is_empty());
            ok.then_some(Witness::Sequence(lowered))
        })
    } else {
        None
    };
    Ok(Verdict { problem: Problem::Cut, answer: cov.covered, method: "rooted+hat-el+backward", witness, stats })
}

/// Whether some state reachable from `s0` dominates a state of `target`.
pub fn decide_cover(def: &RpnDef, s0: &TreeState, target: &CoverTarget) -> Result<Verdict, DecideError> {
    decide_cover_with(def, s0, target, DecideOptions::default())
}

pub fn decide_cover_with(
    def: &RpnDef,
    s0: &TreeState,
    target: &CoverTarget,
    opts: DecideOptions,
) -> Result<Verdict, DecideError> {
    if s0.is_empty() {
        // only `∅` is reachable, and it covers exactly `∅`
        let answer = target.contains_empty();
        return Ok(Verdict {
            problem: Problem::Cover,
            answer,
            method: "empty-initial-state",
            witness: answer.then_some(Witness::Sequence(vec![])),
            stats: PetriStats::default(),
        });
    }
    let cons = CoverToCut::build(def, s0, target)?;
    let inner = decide_cut_with(&cons.net, &cons.initial, opts)?;
    let witness = match inner.witness {
        Some(Witness::Sequence(seq)) if inner.answer => cons.translate(&seq).and_then(|w| {
            let end = fire_sequence(def, s0, &w).ok()?;
            target.covered_by(&end).then_some(Witness::Sequence(w))
        }),
        _ => None,
    };
    Ok(Verdict { problem: Problem::Cover, answer: inner.answer, method: "cover-to-cut", witness, stats: inner.stats })
}

/// The rooted net with its hat and abstract graph, shared by the three graph-based procedures.
struct GraphAnalysis {
    el: crate::petri::PetriNet,
    graph: AbstractGraph,
    stats: PetriStats,
}

impl GraphAnalysis {
    fn new(def: &RpnDef, s0: &TreeState) -> Result<Self, DecideError> {
        let mut stats = PetriStats::default();
        let rooted = make_rooted(def, s0)?;
        let hat = build_hat_with(&rooted.net, DEFAULT_WITNESS_CAP, &mut stats)?;
        let el = build_hat_el(&hat);
        let graph = absgraph::build_with(&rooted.net, &el, &rooted.initial_marking, &mut stats);
        Ok(GraphAnalysis { el, graph, stats })
    }

    fn all_bounded(&mut self) -> bool {
        let vertices: Vec<GraphVertex> = self.graph.vertices.iter().copied().collect();
        vertices.into_iter().all(|v| pn_bounded_counted(&self.el, &self.graph.marking[&v], &mut self.stats))
    }
}

/// Whether every run from `s0` is finite.
pub fn decide_termination(def: &RpnDef, s0: &TreeState) -> Result<Verdict, DecideError> {
    let verdict = |answer, method, witness, stats| Verdict { problem: Problem::Termination, answer, method, witness, stats };
    if s0.is_empty() {
        return Ok(verdict(true, "empty-initial-state", None, PetriStats::default()));
    }
    let mut ga = GraphAnalysis::new(def, s0)?;
    if let Some(cycle) = ga.graph.has_cycle() {
        let names = ga.graph.cycle_names(&cycle);
        return Ok(verdict(false, "abstract-graph-cycle", Some(Witness::Cycle(names)), ga.stats));
    }
    let vertices: Vec<GraphVertex> = ga.graph.vertices.iter().copied().collect();
    for v in vertices {
        if let Some(sc) = pn_self_covering(&ga.el, &ga.graph.marking[&v], &mut ga.stats) {
            let name = |i: &usize| ga.el.transitions[*i].id.clone();
            let witness = Witness::SelfCover {
                vertex: ga.graph.name(v).to_string(),
                prefix: sc.prefix.iter().map(name).collect(),
                cycle: sc.cycle.iter().map(name).collect(),
            };
            return Ok(verdict(false, "self-covering-thread", Some(witness), ga.stats));
        }
    }
    Ok(verdict(true, "abstract-graph+thread-termination", None, ga.stats))
}

/// Whether the markings of all threads of all reachable states form a finite set.
pub fn decide_boundedness(def: &RpnDef, s0: &TreeState) -> Result<Verdict, DecideError> {
    if s0.is_empty() {
        return Ok(Verdict {
            problem: Problem::Boundedness,
            answer: true,
            method: "empty-initial-state",
            witness: None,
            stats: PetriStats::default(),
        });
    }
    let mut ga = GraphAnalysis::new(def, s0)?;
    let answer = ga.all_bounded();
    Ok(Verdict { problem: Problem::Boundedness, answer, method: "abstract-graph+karp-miller", witness: None, stats: ga.stats })
}

/// Whether finitely many abstract states are reachable.
pub fn decide_finiteness(def: &RpnDef, s0: &TreeState) -> Result<Verdict, DecideError> {
    let verdict = |answer, method, witness, stats| Verdict { problem: Problem::Finiteness, answer, method, witness, stats };
    if s0.is_empty() {
        return Ok(verdict(true, "empty-initial-state", None, PetriStats::default()));
    }
    if def.abstract_ids().iter().any(|t| def.transition(*t).pre.is_zero()) {
        return Ok(verdict(false, "unguarded-abstract-transition", None, PetriStats::default()));
    }
    let mut ga = GraphAnalysis::new(def, s0)?;
    if let Some(cycle) = ga.graph.has_cycle() {
        let names = ga.graph.cycle_names(&cycle);
        return Ok(verdict(false, "abstract-graph-cycle", Some(Witness::Cycle(names)), ga.stats));
    }
    let answer = ga.all_bounded();
    Ok(verdict(answer, "abstract-graph+karp-miller", None, ga.stats))
}

/// The cut instance built from a cover instance, with what is needed to map witnesses back.
struct CoverToCut {
    net: RpnDef,
    initial: TreeState,
    rooted: RootedResult,
    /// Transition of the final net ↦ how it maps back to the rooted net.
    back: HashMap<TransitionId, Back>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Back {
    /// A transition of the rooted net (possibly a copy of one).
    Rooted(TransitionId),
    /// `t_start` or one of its copies: creates the thread standing for the rooted root.
    Start,
    /// Bookkeeping only (`t_run`, `τ_done`, `τ_v`, `t_root`).
    Skip,
}

impl CoverToCut {
    fn build(def: &RpnDef, s0: &TreeState, target: &CoverTarget) -> Result<Self, DecideError> {
        let rooted = make_rooted(def, s0)?;
        let base = &rooted.net;
        let name = |n: &str| fresh_name(base, format!("__cov.{n}"));
        let mut back: HashMap<TransitionId, Back> = base.ids().map(|t| (t, Back::Rooted(t))).collect();

        if target.contains_empty() {
            let mut net = base.clone();
            let root = net.add_place(name("root")?);
            let t = net.add_transition(Transition::cut(name("t_root")?, Marking::singleton(root, 1)));
            back.insert(t, Back::Skip);
            let mut m0 = rooted.initial_marking.clone();
            m0.add_tokens(root, 1);
            return Ok(CoverToCut { net, initial: TreeState::single(m0), rooted, back });
        }

        // the star net: a fresh root that spawns the real one, and a `run` budget in every thread
        let mut star = base.clone();
        let start = star.add_place(name("start")?);
        let run = star.add_place(name("run")?);
        let one_run = Marking::singleton(run, 1);
        for t in star.transitions.iter_mut() {
            t.pre += &one_run;
            if t.kind == TransitionKind::Abstract {
                t.post = Some(t.post() + &one_run);
                t.start = Some(t.start() + &one_run);
            }
        }
        let t_run = star.add_transition(Transition::elementary(name("t_run")?, one_run.clone(), Marking::singleton(run, 2)));
        back.insert(t_run, Back::Skip);
        let t_start = star.add_transition(Transition::abstract_(
            name("t_start")?,
            Marking::singleton(start, 1),
            Marking::new(),
            &rooted.initial_marking + &one_run,
        ));
        back.insert(t_start, Back::Start);
        let star_abstract = star.abstract_ids();
        let star_cuts = star.cut_ids();

        let mut net = star.clone();
        let todo = net.add_place(name("todo")?);
        let done = net.add_place(name("done")?);
        let cut = net.add_place(name("cut")?);
        let mut p_v: BTreeMap<VertexId, Place> = BTreeMap::new();
        let mut p_uv: BTreeMap<VertexId, Place> = BTreeMap::new();
        for s in target.states() {
            for v in s.vertices() {
                p_v.insert(v, net.add_place(name(&format!("p_{}", v.0))?));
            }
            for v in s.vertices() {
                if let Some(u) = s.parent(v) {
                    p_uv.insert(v, net.add_place(name(&format!("p_{}_{}", u.0, v.0))?));
                }
            }
        }
        let one = |p: Place| Marking::singleton(p, 1);
        for t in &star_abstract {
            let tr = &mut net.transitions[t.index()];
            tr.start = Some(tr.start() + &one(cut));
        }
        for t in &star_cuts {
            net.transitions[t.index()].pre += &one(cut);
        }
        for t in &star_abstract {
            let tr = star.transition(*t).clone();
            let origin = back[t];
            let mut add = |net: &mut RpnDef, n: String, pre: Marking, post: Marking, omega: Marking| -> Result<(), DecideError> {
                let mut copy = Transition::abstract_(fresh_name(base, n)?, pre, post, omega);
                copy.label = tr.label.clone();
                let id = net.add_transition(copy);
                back.insert(id, origin);
                Ok(())
            };
            add(&mut net, format!("__cov.{}.br", tr.id), &tr.pre + &one(todo), one(done), tr.start() + &one(todo))?;
            for s in target.states() {
                let r = s.root().expect("nonempty target");
                let k = s.children(r).len() as u64 + 1;
                add(
                    &mut net,
                    format!("__cov.{}.r{}", tr.id, r.0),
                    &tr.pre + &one(todo),
                    one(done),
                    tr.start() + &Marking::singleton(p_v[&r], k),
                )?;
                for v in s.vertices() {
                    let (Some(u), Some(label)) = (s.parent(v), s.edge_label(v)) else { continue };
                    if !label.le(tr.post()) {
                        continue;
                    }
                    let k = s.children(v).len() as u64 + 1;
                    add(
                        &mut net,
                        format!("__cov.{}.v{}", tr.id, v.0),
                        &tr.pre + &one(p_v[&u]),
                        one(p_uv[&v]),
                        tr.start() + &Marking::singleton(p_v[&v], k),
                    )?;
                }
            }
        }
        let tau_done = net.add_transition(Transition::cut(name("tau_done")?, one(done)));
        back.insert(tau_done, Back::Skip);
        for s in target.states() {
            for v in s.vertices() {
                let mut pre = s.marking(v).cloned().unwrap_or_default();
                pre += &one_run;
                pre += &one(p_v[&v]);
                for c in s.children(v) {
                    pre += &one(p_uv[c]);
                }
                let t = net.add_transition(Transition::cut(name(&format!("tau_{}", v.0))?, pre));
                back.insert(t, Back::Skip);
            }
        }
        let mut m0 = one(start);
        m0 += &one(todo);
        Ok(CoverToCut { net, initial: TreeState::single(m0), rooted, back })
    }

    /// Maps a cut witness of the constructed net to a sequence of the input net.
    fn translate(&self, seq: &[FiringEvent]) -> Option<Vec<FiringEvent>> {
        let mut big = self.initial.clone();
        let mut small = self.rooted.initial_state();
        let mut map: HashMap<VertexId, VertexId> = HashMap::new();
        // without `t_start` the single thread of the constructed net is the rooted root
        if !self.back.values().any(|b| *b == Back::Start) {
            map.insert(VertexId(0), VertexId(0));
        }
        let mut out = Vec::new();
        for e in seq {
            let created = big.fire_mut(&self.net, *e).ok()?;
            let Some(v) = map.get(&e.vertex).copied() else {
                if self.back[&e.transition] == Back::Start {
                    map.insert(created?, VertexId(0));
                }
                continue;
            };
            match self.back[&e.transition] {
                Back::Rooted(t) => {
                    let ev = FiringEvent::new(v, t);
                    let created_small = small.fire_mut(&self.rooted.net, ev).ok()?;
                    out.push(ev);
                    if let (Some(a), Some(b)) = (created, created_small) {
                        map.insert(a, b);
                    }
                }
                Back::Start | Back::Skip => {}
            }
        }
        self.rooted.lower_sequence(&out).ok()
    }
}

/// Builds a net and a single-thread initial state from which `∅` is reachable iff some state
/// reachable from `s0` in `def` covers `target`.
pub fn cover_to_cut_construct(def: &RpnDef, s0: &TreeState, target: &CoverTarget) -> Result<(RpnDef, TreeState), DecideError> {
    if s0.is_empty() {
        return Err(ReduceError::EmptyInitialState.into());
    }
    let c = CoverToCut::build(def, s0, target)?;
    Ok((c.net, c.initial))
}

/// Builds a net, initial state and target such that the target is coverable iff `∅` is
/// reachable from `s0` in `def`.
pub fn cut_to_cover_construct(def: &RpnDef, s0: &TreeState) -> Result<(RpnDef, TreeState, CoverTarget), DecideError> {
    let rooted = make_rooted(def, s0)?;
    let mut net = rooted.net.clone();
    let name = |n: &str| fresh_name(&rooted.net, format!("__cut.{n}"));
    let todo = net.add_place(name("todo")?);
    let done = net.add_place(name("done")?);
    net.add_transition(Transition::abstract_(
        name("start")?,
        Marking::singleton(todo, 1),
        Marking::singleton(done, 1),
        rooted.initial_marking.clone(),
    ));
    let target = CoverTarget::single(TreeState::single(Marking::singleton(done, 1)));
    Ok((net, TreeState::single(Marking::singleton(todo, 1)), target))
}

/// A labelled net with an initial state and a target, as taken and returned by [`union_construct`].
pub type LanguageInstance = (RpnDef, TreeState, CoverTarget);

/// A net whose coverability language is the union of the two input languages.
///
/// Places and transitions of the inputs are renamed `L.<id>` and `R.<id>`.
pub fn union_construct(a: &LanguageInstance, b: &LanguageInstance) -> Result<LanguageInstance, DecideError> {
    if a.0.is_labelled() != b.0.is_labelled() {
        return Err(DecideError::AlphabetMismatch);
    }
    let mut net = RpnDef::new();
    let p0 = net.add_place("__un.p0");
    let mut init_parts = Vec::new();
    let mut targets = Vec::new();
    for (side, (def, s0, target)) in [("L", a), ("R", b)] {
        let rooted = make_rooted(def, s0)?;
        let offset = net.places.len() as u32;
        for p in &rooted.net.places {
            net.add_place(format!("{side}.{p}"));
        }
        let branch = net.add_place(format!("__un.p_{side}"));
        let shift = |m: &Marking| m.map_places(|p| Place(p.0 + offset));
        let one = Marking::singleton(branch, 1);
        for t in &rooted.net.transitions {
            let mut copy = t.clone();
            copy.id = format!("{side}.{}", t.id);
            copy.pre = &shift(&t.pre) + &one;
            copy.post = t.post.as_ref().map(shift);
            copy.start = t.start.as_ref().map(|m| &shift(m) + &one);
            net.add_transition(copy);
        }
        // ∅ is covered by every state, including those of the other side; such a side runs below
        // a fresh root holding a marker, and the marker is its only target
        let marker = target.contains_empty().then(|| {
            let m = net.add_place(format!("__un.m_{side}"));
            let go = net.add_place(format!("__un.go_{side}"));
            targets.push(TreeState::single(Marking::singleton(m, 1)));
            (m, go)
        });
        init_parts.push((side, branch, shift(&rooted.initial_marking), marker));
        if marker.is_none() {
            for s in target.states() {
                targets.push(s.map_places(|p| Place(p.0 + offset)).add_to_all(&one));
            }
        }
    }
    for (side, branch, m0, marker) in init_parts {
        let one = Marking::singleton(branch, 1);
        let start = &m0 + &one;
        match marker {
            None => net.add_transition(Transition::elementary(format!("__un.t_b_{side}"), Marking::singleton(p0, 1), start)),
            Some((m, go)) => {
                let out = &Marking::singleton(m, 1) + &Marking::singleton(go, 1);
                net.add_transition(Transition::elementary(format!("__un.t_b_{side}"), Marking::singleton(p0, 1), out));
                net.add_transition(Transition::abstract_(format!("__un.t_go_{side}"), Marking::singleton(go, 1), Marking::new(), start))
            }
        };
        net.add_transition(Transition::elementary(format!("__un.t_c_{side}"), one.clone(), Marking::singleton(branch, 2)));
    }
    let errors = net.validate();
    if let Some(v) = errors.first() {
        return Err(DecideError::Reduce(ReduceError::NameCollision(v.to_string())));
    }
    Ok((net, TreeState::single(Marking::singleton(p0, 1)), CoverTarget::new(targets)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn fig1_state(def: &RpnDef, p: &str) -> TreeState {
        TreeState::single(def.bag(&[(p, 1)]))
    }

    #[test]
    fn fig1_quadruple() {
        let def = fixtures::fig1();
        let s = fig1_state(&def, "p_ini");
        let term = decide_termination(&def, &s).unwrap();
        assert!(!term.answer);
        assert_eq!(term.witness, Some(Witness::Cycle(vec!["v_t_a2".into()])));
        assert!(decide_boundedness(&def, &s).unwrap().answer);
        assert!(!decide_finiteness(&def, &s).unwrap().answer);
        let cut = decide_cut(&def, &s).unwrap();
        assert!(!cut.answer);
        assert!(cut.witness.is_none());
    }

    #[test]
    fn root_cut_witness() {
        let def = fixtures::fig1();
        let v = decide_cut(&def, &fig1_state(&def, "p_beg")).unwrap();
        assert!(v.answer);
        let tau1 = def.transition_id("t_tau1").unwrap();
        assert_eq!(v.witness, Some(Witness::Sequence(vec![FiringEvent::new(VertexId(0), tau1)])));
    }

    #[test]
    fn fig5_cut_witness_goes_bottom_up() {
        let def = fixtures::fig5();
        let s2 = fixtures::fig5_state(&def, 2);
        let v = decide_cut(&def, &s2).unwrap();
        assert!(v.answer);
        let Some(Witness::Sequence(seq)) = v.witness else { panic!("no witness") };
        assert!(fire_sequence(&def, &s2, &seq).unwrap().is_empty());
        let tau_l = def.transition_id("tau_l").unwrap();
        let tau_r = def.transition_id("tau_r").unwrap();
        let expected: Vec<FiringEvent> = vec![
            FiringEvent::new(VertexId(3), tau_l),
            FiringEvent::new(VertexId(2), tau_l),
            FiringEvent::new(VertexId(1), tau_l),
            FiringEvent::new(VertexId(0), tau_r),
        ];
        assert_eq!(seq, expected);
    }

    #[test]
    fn cover_examples() {
        let def = fixtures::fig1();
        let s = fig1_state(&def, "p_ini");
        let single = |p: &str| CoverTarget::single(fig1_state(&def, p));
        for (p, expect) in [("p_fin", true), ("p_beg", true), ("p_a2", true), ("p_ini", true)] {
            let v = decide_cover(&def, &s, &single(p)).unwrap();
            assert_eq!(v.answer, expect, "{p}");
            let Some(Witness::Sequence(w)) = v.witness else { panic!("no witness for {p}") };
            assert!(single(p).covered_by(&fire_sequence(&def, &s, &w).unwrap()));
        }
        let two_ini = CoverTarget::single(TreeState::single(def.bag(&[("p_ini", 2)])));
        assert!(!decide_cover(&def, &s, &two_ini).unwrap().answer);
        let zero = CoverTarget::single(TreeState::single(Marking::new()));
        assert!(decide_cover(&def, &s, &zero).unwrap().answer);
    }

    #[test]
    fn cover_with_a_two_vertex_target() {
        let def = fixtures::fig1();
        let s = fig1_state(&def, "p_ini");
        let mut f = TreeState::single(Marking::new());
        f.add_child(VertexId(0), def.bag(&[("p_fin", 1)]), def.bag(&[("p_end", 1)]));
        let target = CoverTarget::single(f);
        let (net, _) = cover_to_cut_construct(&def, &s, &target).unwrap();
        assert!(net.place("__cov.p_0").is_some() && net.place("__cov.p_1").is_some());
        assert!(net.place("__cov.p_0_1").is_some());
        assert!(net.transition_id("__cov.tau_1").is_some());
        assert!(net.transition_id("__cov.t_beg.v1").is_some());
        let v = decide_cover(&def, &s, &target).unwrap();
        assert!(v.answer);
        assert!(v.witness.is_some());
    }

    #[test]
    fn empty_target_adds_one_place_and_one_cut() {
        let def = fixtures::fig3();
        let s = TreeState::single(def.bag(&[("p1", 1)]));
        let target = CoverTarget::new(vec![TreeState::empty()]).unwrap();
        let (net, init) = cover_to_cut_construct(&def, &s, &target).unwrap();
        assert_eq!(net.places.len(), def.places.len() + 1);
        assert_eq!(net.transitions.len(), def.transitions.len() + 1);
        assert_eq!(net.cut_ids().len(), 1);
        assert!(decide_cut(&net, &init).unwrap().answer);
        assert!(decide_cover(&def, &s, &target).unwrap().answer);
        assert!(CoverTarget::new(vec![]).is_err());
    }

    #[test]
    fn cut_to_cover_on_fig1() {
        let def = fixtures::fig1();
        for (p, expect) in [("p_beg", true), ("p_ini", false)] {
            let (net, init, target) = cut_to_cover_construct(&def, &fig1_state(&def, p)).unwrap();
            assert_eq!(decide_cover(&net, &init, &target).unwrap().answer, expect, "{p}");
        }
    }

    #[test]
    fn termination_shallow_branch() {
        let mut def = RpnDef::new();
        let p = def.add_place("p");
        def.add_transition(Transition::elementary("grow", Marking::singleton(p, 1), Marking::singleton(p, 2)));
        let s = TreeState::single(Marking::singleton(p, 1));
        let v = decide_termination(&def, &s).unwrap();
        assert!(!v.answer);
        assert!(matches!(v.witness, Some(Witness::SelfCover { .. })));
        assert!(!decide_boundedness(&def, &s).unwrap().answer);
        assert!(!decide_finiteness(&def, &s).unwrap().answer);

        let empty = RpnDef { places: vec!["p".into()], transitions: vec![] };
        assert!(decide_termination(&empty, &s).unwrap().answer);
        assert!(decide_finiteness(&empty, &s).unwrap().answer);
    }

    #[test]
    fn unboundedness_in_a_child_thread() {
        // the root only spawns; the spawned thread pumps q
        let mut def = RpnDef::new();
        let p = def.add_place("p");
        let q = def.add_place("q");
        def.add_transition(Transition::abstract_("spawn", Marking::singleton(p, 1), Marking::new(), Marking::singleton(q, 1)));
        def.add_transition(Transition::elementary("pump", Marking::singleton(q, 1), Marking::singleton(q, 2)));
        let s = TreeState::single(Marking::singleton(p, 1));
        assert!(!decide_boundedness(&def, &s).unwrap().answer);
        let hat = crate::reduce::build_hat(&def).unwrap();
        assert!(crate::petri::pn_bounded(&build_hat_el(&hat), &Marking::singleton(p, 1)));
    }

    #[test]
    fn finiteness_pre_checks() {
        let def = fixtures::fig1();
        assert!(decide_finiteness(&def, &TreeState::empty()).unwrap().answer);
        let mut free = RpnDef::new();
        let p = free.add_place("p");
        free.add_transition(Transition::abstract_("t", Marking::new(), Marking::new(), Marking::singleton(p, 1)));
        let v = decide_finiteness(&free, &TreeState::single(Marking::new())).unwrap();
        assert!(!v.answer);
        assert_eq!(v.method, "unguarded-abstract-transition");
    }

    #[test]
    fn union_shape() {
        let def = fixtures::fig4();
        let s = TreeState::single(def.bag(&[("p1", 1)]));
        let t = CoverTarget::single(TreeState::single(def.bag(&[("p3", 1)])));
        let (net, init, target) = union_construct(&(def.clone(), s.clone(), t.clone()), &(def.clone(), s, t)).unwrap();
        assert_eq!(net.places.len(), 2 * def.places.len() + 3);
        assert_eq!(net.transitions.len(), 2 * def.transitions.len() + 4);
        assert_eq!(net.validate(), vec![]);
        assert_eq!(init.len(), 1);
        assert_eq!(target.states().len(), 2);
        let l = net.place("__un.p_L").unwrap();
        assert_eq!(target.states()[0].marking(target.states()[0].root().unwrap()).unwrap().get(l), 1);
        let unlabelled = fixtures::fig1();
        let u = (unlabelled.clone(), fig1_state(&unlabelled, "p_ini"), CoverTarget::single(TreeState::empty()));
        let l4 = (def.clone(), TreeState::single(def.bag(&[("p1", 1)])), CoverTarget::single(TreeState::empty()));
        assert_eq!(union_construct(&u, &l4), Err(DecideError::AlphabetMismatch));
    }
}
