//! Seeded random nets, states and targets for the oracle and property suites.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decide::CoverTarget;
use crate::marking::{Marking, Place};
use crate::model::{enabled_events, FiringEvent, RpnDef, Transition, TransitionKind, TreeState, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Labels {
    None,
    /// Each transition is labelled with probability one half.
    Some,
    All,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub max_places: usize,
    pub max_transitions: usize,
    /// Bound on the total weight of each pre, post and start bag.
    pub max_weight: u64,
    /// Probability that the net is token-decreasing (see [`random_net`]).
    pub conservative: f64,
    pub labels: Labels,
    pub alphabet: Vec<String>,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            max_places: 4,
            max_transitions: 6,
            max_weight: 2,
            conservative: 0.85,
            labels: Labels::None,
            alphabet: vec!["a".into(), "b".into()],
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_bag(rng: &mut impl Rng, places: usize, min: u64, max: u64) -> Marking {
    let total = if max <= min { min } else { rng.gen_range(min..=max) };
    let mut m = Marking::new();
    for _ in 0..total {
        m.add_tokens(Place(rng.gen_range(0..places) as u32), 1);
    }
    m
}

/// A random net. Conservative nets have finitely many reachable abstract states from any
/// state: elementary firings never increase the token count and abstract ones strictly
/// decrease it (counting the tokens of the new thread).
pub fn random_net(rng: &mut impl Rng, params: &GenParams) -> RpnDef {
    let mut def = RpnDef::new();
    let places = rng.gen_range(1..=params.max_places);
    for i in 0..places {
        def.add_place(format!("p{i}"));
    }
    let conservative = rng.gen_bool(params.conservative);
    let w = params.max_weight;
    let count = rng.gen_range(1..=params.max_transitions);
    for i in 0..count {
        let roll: f64 = rng.gen();
        let kind = if roll < 0.45 {
            TransitionKind::Elementary
        } else if roll < 0.75 {
            TransitionKind::Abstract
        } else {
            TransitionKind::Cut
        };
        let min_pre = if conservative || rng.gen_bool(0.9) { 1 } else { 0 };
        let pre = random_bag(rng, places, min_pre, w);
        let name = format!("t{i}");
        let mut t = match kind {
            TransitionKind::Elementary => {
                let cap = if conservative { pre.total() } else { w };
                Transition::elementary(name, pre, random_bag(rng, places, 0, cap))
            }
            TransitionKind::Abstract => {
                let (post, start) = if conservative {
                    let budget = pre.total().saturating_sub(1);
                    let post = random_bag(rng, places, 0, budget);
                    let start = random_bag(rng, places, 0, budget - post.total());
                    (post, start)
                } else {
                    (random_bag(rng, places, 0, w), random_bag(rng, places, 0, w))
                };
                Transition::abstract_(name, pre, post, start)
            }
            TransitionKind::Cut => Transition::cut(name, pre),
        };
        let labelled = match params.labels {
            Labels::None => false,
            Labels::Some => rng.gen_bool(0.5),
            Labels::All => true,
        };
        if labelled {
            t.label = params.alphabet.choose(rng).cloned();
        }
        def.add_transition(t);
    }
    def
}

/// A random state of 1 to `max_vertices` threads. Edge labels are outputs of abstract
/// transitions, so the state could occur in a run; without abstract transitions it is a
/// single thread.
pub fn random_state(rng: &mut impl Rng, def: &RpnDef, max_vertices: usize, max_tokens: u64) -> TreeState {
    let places = def.places.len();
    let labels: Vec<Marking> = def.edge_labels().into_iter().collect();
    let mut s = TreeState::single(random_bag(rng, places, 0, max_tokens));
    if labels.is_empty() {
        return s;
    }
    let n = rng.gen_range(1..=max_vertices);
    for _ in 1..n {
        let vs: Vec<VertexId> = s.vertices().collect();
        let parent = *vs.choose(rng).expect("nonempty");
        let edge = labels.choose(rng).expect("nonempty").clone();
        s.add_child(parent, edge, random_bag(rng, places, 0, max_tokens));
    }
    s
}

/// A random target of one or two small states; with probability 1/20 it is `{∅}`.
pub fn random_target(rng: &mut impl Rng, def: &RpnDef) -> CoverTarget {
    if rng.gen_bool(0.05) {
        return CoverTarget::single(TreeState::empty());
    }
    let n = rng.gen_range(1..=2);
    let states = (0..n).map(|_| random_state(rng, def, 2, 2)).collect();
    CoverTarget::new(states).expect("nonempty")
}

/// Fires up to `steps` uniformly chosen enabled events; stops early in a deadlock.
pub fn random_run(rng: &mut impl Rng, def: &RpnDef, s0: &TreeState, steps: usize) -> Vec<FiringEvent> {
    let mut s = s0.clone();
    let mut seq = Vec::new();
    for _ in 0..steps {
        let events = enabled_events(def, &s);
        let Some(e) = events.choose(rng) else { break };
        s.fire_mut(def, *e).expect("enabled");
        seq.push(*e);
    }
    seq
}

/// Net, initial state and target: one random instance.
pub fn random_instance(seed: u64, params: &GenParams) -> (RpnDef, TreeState, CoverTarget) {
    let mut r = rng(seed);
    let def = random_net(&mut r, params);
    let s0 = random_state(&mut r, &def, 3, 2);
    let target = random_target(&mut r, &def);
    (def, s0, target)
}
