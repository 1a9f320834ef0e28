//! Randomized laws of the orders, the reductions and the explorer, one function per law.
//!
//! Shared by the property suite and the acceptance test; each law takes a seed.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use rpnkit::absgraph::{build_abstract_graph, GraphVertex};
use rpnkit::explore::explore;
use rpnkit::generate::{random_net, random_run, random_state, rng, GenParams};
use rpnkit::marking::{Marking, Place};
use rpnkit::model::{abstraction, enabled_events, fire, fire_sequence, RpnDef, TreeState, VertexId};
use rpnkit::order::{equivalent, leq, leq_rooted};
use rpnkit::petri::PetriNet;
use rpnkit::reduce::{build_hat, build_hat_el, expand_hat_sequence, make_rooted, omniscient_normalize};

pub type Law = Result<(), String>;

macro_rules! ensure {
    ($c:expr) => {
        if !$c {
            return Err(format!("{} ({}:{})", stringify!($c), file!(), line!()));
        }
    };
    ($c:expr, $($fmt:tt)+) => {
        if !$c {
            return Err(format!("{} ({}:{})", format!($($fmt)+), file!(), line!()));
        }
    };
}

macro_rules! ensure_eq {
    ($a:expr, $b:expr) => {{
        let (a, b) = (&$a, &$b);
        if a != b {
            return Err(format!("{} != {}: {:?} vs {:?} ({}:{})", stringify!($a), stringify!($b), a, b, file!(), line!()));
        }
    }};
}

fn small_bag(r: &mut impl Rng, places: usize, max: u64) -> Marking {
    let mut m = Marking::new();
    for _ in 0..r.gen_range(0..=max) {
        m.add_tokens(Place(r.gen_range(0..places) as u32), 1);
    }
    m
}

fn copy_subtree(from: &TreeState, v: VertexId, into: &mut TreeState, at: VertexId) {
    for c in from.children(v) {
        let n = into.add_child(at, from.edge_label(*c).unwrap().clone(), from.marking(*c).unwrap().clone());
        copy_subtree(from, *c, into, n);
    }
}

/// A state above `s`: more tokens, extra threads and, unless `rooted`, possibly a new root.
fn extend(r: &mut impl Rng, def: &RpnDef, s: &TreeState, rooted: bool) -> TreeState {
    let places = def.places.len();
    let mut t = s.clone();
    if t.is_empty() {
        return random_state(r, def, 3, 2);
    }
    let vs: Vec<VertexId> = t.vertices().collect();
    for v in &vs {
        if r.gen_bool(0.3) {
            let m = t.marking(*v).unwrap() + &small_bag(r, places, 2);
            t.set_marking(*v, m);
        }
    }
    for _ in 0..r.gen_range(0..3) {
        let vs: Vec<VertexId> = t.vertices().collect();
        let at = *vs.choose(r).unwrap();
        t.add_child(at, small_bag(r, places, 2), small_bag(r, places, 2));
    }
    if !rooted && r.gen_bool(0.3) {
        let mut w = TreeState::single(small_bag(r, places, 2));
        let root = t.root().unwrap();
        let top = w.add_child(VertexId(0), small_bag(r, places, 1), t.marking(root).unwrap().clone());
        copy_subtree(&t, root, &mut w, top);
        t = w;
    }
    t
}

fn instance(seed: u64) -> (RpnDef, TreeState, rand_chacha::ChaCha8Rng) {
    let mut r = rng(seed);
    let def = random_net(&mut r, &GenParams::default());
    let s = random_state(&mut r, &def, 3, 2);
    (def, s, r)
}

pub fn quasi_order_laws(seed: u64) -> Law {
    let (def, s, mut r) = instance(seed);
    for rooted in [false, true] {
        let le = |a: &TreeState, b: &TreeState| if rooted { leq_rooted(a, b) } else { leq(a, b) };
        let e = le(&s, &s).expect("reflexive");
        ensure!(e.check(&s, &s));
        let s1 = extend(&mut r, &def, &s, rooted);
        let s2 = extend(&mut r, &def, &s1, rooted);
        let e1 = le(&s, &s1).expect("extension is above");
        let checked = if rooted { e1.check_rooted(&s, &s1) } else { e1.check(&s, &s1) };
        ensure!(checked);
        ensure!(le(&s1, &s2).is_some());
        ensure!(le(&s, &s2).is_some(), "transitivity");
        // unrelated triples: the implication must hold whatever the answers
        let a = random_state(&mut r, &def, 3, 1);
        let b = random_state(&mut r, &def, 3, 1);
        let c = random_state(&mut r, &def, 3, 1);
        if le(&a, &b).is_some() && le(&b, &c).is_some() {
            ensure!(le(&a, &c).is_some());
        }
        if le(&a, &b).is_some() && le(&b, &a).is_some() {
            ensure!(equivalent(&a, &b));
        }
        if equivalent(&a, &b) {
            ensure!(le(&a, &b).is_some());
        }
    }
    Ok(())
}

pub fn strong_compatibility(seed: u64) -> Law {
    let (def, s, mut r) = instance(seed);
    for rooted in [false, true] {
        let big = extend(&mut r, &def, &s, rooted);
        let f = if rooted { leq_rooted(&s, &big) } else { leq(&s, &big) };
        let f = f.expect("extension is above");
        for e in enabled_events(&def, &s) {
            let image = rpnkit::FiringEvent::new(f.map[&e.vertex], e.transition);
            let (small_next, _) = fire(&def, &s, e).unwrap();
            let big_next = fire(&def, &big, image);
            ensure!(big_next.is_ok(), "image of an enabled event is enabled");
            let (big_next, _) = big_next.unwrap();
            let ok = if rooted { leq_rooted(&small_next, &big_next) } else { leq(&small_next, &big_next) };
            ensure!(ok.is_some(), "order kept after firing {:?}", e);
        }
    }
    Ok(())
}

pub fn omniscient_normalization(seed: u64) -> Law {
    let (def, s0, mut r) = instance(seed);
    let hat = build_hat(&def).unwrap();
    let seq = random_run(&mut r, &def, &s0, 25);
    let end = fire_sequence(&def, &s0, &seq).unwrap();
    let norm = omniscient_normalize(&hat, &s0, &seq).unwrap();
    // replay, recording every created thread
    let mut s = s0.clone();
    let mut created = Vec::new();
    for e in &norm {
        if let Some(c) = s.fire_mut(&hat.net, *e).unwrap() {
            created.push(c);
        }
    }
    ensure_eq!(abstraction(&s), abstraction(&end));
    // fewer threads are created, so fresh ids differ; the trees agree up to renaming
    ensure_eq!(s.len(), end.len());
    for c in created {
        ensure!(s.contains(c), "created thread {} does not survive", c);
    }
    Ok(())
}

pub fn shortcut_expansion(seed: u64) -> Law {
    let (def, s0, mut r) = instance(seed);
    let hat = build_hat(&def).unwrap();
    let seq = random_run(&mut r, &hat.net, &s0, 25);
    let end = fire_sequence(&hat.net, &s0, &seq).unwrap();
    let full = expand_hat_sequence(&hat, &s0, &seq).unwrap().expect("witnesses are short here");
    ensure!(full.iter().all(|e| def.get(e.transition).is_some()));
    ensure_eq!(abstraction(&fire_sequence(&def, &s0, &full).unwrap()), abstraction(&end));
    // base sequences are hat sequences verbatim
    let base = random_run(&mut r, &def, &s0, 25);
    ensure_eq!(fire_sequence(&hat.net, &s0, &base).unwrap(), fire_sequence(&def, &s0, &base).unwrap());
    Ok(())
}

pub fn rooted_round_trip(seed: u64) -> Law {
    let (def, s0, mut r) = instance(seed);
    let rooted = make_rooted(&def, &s0).unwrap();
    let dim = def.places.len();
    let (unfold, _) = rooted.unfold();
    let rebuilt = fire_sequence(&rooted.net, &rooted.initial_state(), &unfold).unwrap();
    ensure!(equivalent(&rebuilt.project(dim), &s0));
    let seq = random_run(&mut r, &def, &s0, 20);
    let lifted = rooted.lift_sequence(&seq).unwrap();
    let end = fire_sequence(&rooted.net, &rooted.initial_state(), &lifted).unwrap();
    ensure!(equivalent(&end.project(dim), &fire_sequence(&def, &s0, &seq).unwrap()));
    ensure_eq!(rooted.lower_sequence(&lifted).unwrap(), seq);
    // any run of the rooted net lowers to a run of the original net
    let free = random_run(&mut r, &rooted.net, &rooted.initial_state(), 20);
    let lowered = rooted.lower_sequence(&free).unwrap();
    ensure!(fire_sequence(&def, &s0, &lowered).is_ok());
    Ok(())
}

pub fn hat_has_the_same_reachable_states(seed: u64) -> Law {
    let (def, s0, _) = instance(seed);
    let hat = build_hat(&def).unwrap();
    let a = explore(&def, &s0, 10_000, 2_000);
    let b = explore(&hat.net, &s0, 10_000, 2_000);
    if a.exhausted && b.exhausted {
        ensure_eq!(a.state_set(), b.state_set());
    }
    // exhausted results are closed under one more round
    if a.exhausted {
        for st in &a.states {
            for e in enabled_events(&def, &st.concretize()) {
                let (next, _) = fire(&def, &st.concretize(), e).unwrap();
                ensure!(a.contains(&abstraction(&next)));
            }
        }
    }
    Ok(())
}

pub fn hat_el_observation(seed: u64) -> Law {
    let (def, _, mut r) = instance(seed);
    let hat = build_hat(&def).unwrap();
    let el: PetriNet = build_hat_el(&hat);
    let m0 = small_bag(&mut r, def.places.len(), 3);
    let mut m = m0.clone();
    let mut seq = Vec::new();
    for _ in 0..15 {
        let en: Vec<usize> = (0..el.transitions.len()).filter(|i| el.fire(&m, *i).is_some()).collect();
        let Some(i) = en.choose(&mut r) else { break };
        m = el.fire(&m, *i).unwrap();
        seq.push(*i);
    }
    let events: Vec<_> = seq.iter().map(|i| rpnkit::FiringEvent::new(VertexId(0), el.transitions[*i].source.unwrap())).collect();
    let s = fire_sequence(&hat.net, &TreeState::single(m0), &events).unwrap();
    ensure_eq!(s.marking(VertexId(0)).unwrap(), &m);
    let mut expected: BTreeMap<(Marking, Marking), usize> = BTreeMap::new();
    for e in &events {
        let t = hat.net.transition(e.transition);
        if t.kind == rpnkit::TransitionKind::Abstract {
            *expected.entry((t.post().clone(), t.start().clone())).or_default() += 1;
        }
    }
    let mut actual: BTreeMap<(Marking, Marking), usize> = BTreeMap::new();
    for c in s.children(VertexId(0)) {
        ensure!(s.children(*c).is_empty());
        *actual.entry((s.edge_label(*c).unwrap().clone(), s.marking(*c).unwrap().clone())).or_default() += 1;
    }
    ensure_eq!(actual, expected);
    Ok(())
}

pub fn abstract_graph_soundness(seed: u64) -> Law {
    let (def, s0, _) = instance(seed);
    let rooted = make_rooted(&def, &s0).unwrap();
    let g = build_abstract_graph(&rooted.net, &rooted.initial_marking).unwrap();
    let r = explore(&rooted.net, &rooted.initial_state(), 10_000, 3_000);
    for t in rooted.net.abstract_ids() {
        let in_graph = g.vertices.contains(&GraphVertex::Abstract(t));
        if r.fired.contains(&t) {
            ensure!(in_graph, "fired but missing from the graph");
        } else if r.exhausted {
            ensure!(!in_graph, "never fired but in the graph");
        }
    }
    Ok(())
}

pub const LAWS: &[(&str, fn(u64) -> Law)] = &[
    ("quasi-order laws", quasi_order_laws),
    ("strong compatibility", strong_compatibility),
    ("omniscient normalization", omniscient_normalization),
    ("shortcut expansion", shortcut_expansion),
    ("rooted round trip", rooted_round_trip),
    ("same reachable states with shortcuts", hat_has_the_same_reachable_states),
    ("observation through the thread net", hat_el_observation),
    ("abstract graph soundness", abstract_graph_soundness),
];
