//! Bounded brute-force search over abstract states: the oracle every decision procedure is
//! checked against, and bounded membership in coverability languages.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::decide::CoverTarget;
use crate::marking::Marking;
use crate::model::{abstraction, enabled_events, AbstractState, FiringEvent, RpnDef, TransitionId, TreeState, VertexId};

pub const DEFAULT_EPS_BUDGET: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CapReason {
    Steps,
    States,
}

impl CapReason {
    pub fn name(self) -> &'static str {
        match self {
            CapReason::Steps => "step-cap",
            CapReason::States => "state-cap",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExploreResult {
    /// Stored states in discovery order; the initial state comes first.
    pub states: Vec<AbstractState>,
    /// `(source, label, target)` as indices into `states`; unlabelled firings carry `None`.
    pub transitions: BTreeSet<(usize, Option<String>, usize)>,
    /// Every transition fired at least once.
    pub fired: BTreeSet<TransitionId>,
    pub exhausted: bool,
    pub frontier_cut: Option<CapReason>,
    index: HashMap<AbstractState, usize>,
}

impl ExploreResult {
    pub fn contains(&self, a: &AbstractState) -> bool {
        self.index.contains_key(a)
    }

    pub fn contains_empty(&self) -> bool {
        self.contains(&AbstractState::empty())
    }

    pub fn state_set(&self) -> BTreeSet<AbstractState> {
        self.states.iter().cloned().collect()
    }

    /// Canonical serializations of the stored states, sorted.
    pub fn serialized(&self) -> Vec<String> {
        let mut out: Vec<String> = self.states.iter().map(AbstractState::serialize).collect();
        out.sort();
        out
    }
}

/// Vertices whose subtree is not an exact copy of an earlier sibling's (same edge, same abstract
/// subtree), and whose ancestors are all such vertices. Firing at the other vertices leads to
/// the same abstract states, so the search only fires here.
fn representatives(s: &TreeState) -> HashSet<VertexId> {
    let mut class: HashMap<VertexId, usize> = HashMap::new();
    let mut intern: HashMap<(Marking, Vec<(Marking, usize)>), usize> = HashMap::new();
    let order: Vec<VertexId> = s.root().map(|r| s.descendants(r)).unwrap_or_default();
    for v in order.iter().rev() {
        let mut kids: Vec<(Marking, usize)> =
            s.children(*v).iter().map(|c| (s.edge_label(*c).expect("child").clone(), class[c])).collect();
        kids.sort();
        let key = (s.marking(*v).expect("vertex").clone(), kids);
        let n = intern.len();
        class.insert(*v, *intern.entry(key).or_insert(n));
    }
    let mut reps = HashSet::new();
    let mut stack: Vec<VertexId> = s.root().into_iter().collect();
    while let Some(v) = stack.pop() {
        reps.insert(v);
        let mut seen = HashSet::new();
        for c in s.children(v) {
            if seen.insert((s.edge_label(*c).expect("child"), class[c])) {
                stack.push(*c);
            }
        }
    }
    reps
}

fn successors(def: &RpnDef, s: &TreeState) -> Vec<(FiringEvent, TreeState)> {
    let reps = representatives(s);
    enabled_events(def, s)
        .into_iter()
        .filter(|e| reps.contains(&e.vertex))
        .map(|e| {
            let mut next = s.clone();
            next.fire_mut(def, e).expect("enabled");
            (e, next)
        })
        .collect()
}

/// Breadth-first search up to `cap_steps` firings from `s0`, storing at most `cap_states`
/// abstract states.
pub fn explore(def: &RpnDef, s0: &TreeState, cap_steps: usize, cap_states: usize) -> ExploreResult {
    let start = abstraction(s0);
    let mut res = ExploreResult {
        states: vec![start.clone()],
        transitions: BTreeSet::new(),
        fired: BTreeSet::new(),
        exhausted: false,
        frontier_cut: None,
        index: HashMap::from([(start, 0)]),
    };
    let mut queue = VecDeque::from([(0usize, 0usize)]);
    while let Some((a, depth)) = queue.pop_front() {
        let s = res.states[a].concretize();
        let succ = successors(def, &s);
        if depth >= cap_steps {
            if !succ.is_empty() {
                res.frontier_cut.get_or_insert(CapReason::Steps);
            }
            continue;
        }
        for (e, next) in succ {
            let b = abstraction(&next);
            let b = match res.index.get(&b) {
                Some(i) => *i,
                None if res.states.len() >= cap_states => {
                    res.frontier_cut.get_or_insert(CapReason::States);
                    continue;
                }
                None => {
                    let i = res.states.len();
                    res.index.insert(b.clone(), i);
                    res.states.push(b);
                    queue.push_back((i, depth + 1));
                    i
                }
            };
            res.fired.insert(e.transition);
            res.transitions.insert((a, def.transition(e.transition).label.clone(), b));
        }
    }
    res.exhausted = res.frontier_cut.is_none();
    res
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    /// A firing sequence from `s0` whose label projection is the word and whose last state covers
    /// the target.
    Yes(Vec<FiringEvent>),
    NoWithinBound,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchCaps {
    /// Maximal number of firings in a run.
    pub steps: usize,
    /// Maximal number of unlabelled firings between two letters.
    pub eps_budget: usize,
    /// Maximal number of configurations visited.
    pub states: usize,
}

impl Default for SearchCaps {
    fn default() -> Self {
        SearchCaps { steps: 10_000, eps_budget: DEFAULT_EPS_BUDGET, states: 100_000 }
    }
}

struct Config<K> {
    state: TreeState,
    key: K,
    depth: usize,
    eps: usize,
    parent: Option<(usize, FiringEvent)>,
}

/// Breadth-first search of the product of the net with a word automaton. `advance(key, label)`
/// gives the successor key or `None` when the label cannot be read; `visit` sees every stored
/// configuration and stops the search by returning true.
/// Configurations are deduplicated by `(abstract state, key)` at their first (shallowest) visit.
/// Since that visit may carry a longer unlabelled run than a later one, any pruning marks the
/// search as truncated and a negative answer is never given from a truncated search.
struct Product<K> {
    configs: Vec<Config<K>>,
    truncated: bool,
}

impl<K: Clone + Eq + std::hash::Hash> Product<K> {
    fn run(
        def: &RpnDef,
        s0: &TreeState,
        init: K,
        caps: SearchCaps,
        advance: impl Fn(&K, Option<&str>) -> Option<K>,
        mut visit: impl FnMut(&TreeState, &K, usize) -> bool,
    ) -> Self {
        let mut p = Product { configs: Vec::new(), truncated: false };
        let mut seen: HashSet<(AbstractState, K)> = HashSet::new();
        seen.insert((abstraction(s0), init.clone()));
        p.configs.push(Config { state: s0.clone(), key: init, depth: 0, eps: 0, parent: None });
        let mut next = 0;
        while next < p.configs.len() {
            let id = next;
            next += 1;
            let c = &p.configs[id];
            if visit(&c.state, &c.key, id) {
                return p;
            }
            let (depth, eps, key) = (c.depth, c.eps, c.key.clone());
            for (e, s) in successors(def, &p.configs[id].state) {
                let label = def.transition(e.transition).label.as_deref();
                let Some(k) = advance(&key, label) else { continue };
                let eps = if label.is_none() { eps + 1 } else { 0 };
                if depth + 1 > caps.steps || eps > caps.eps_budget {
                    p.truncated = true;
                    continue;
                }
                if !seen.insert((abstraction(&s), k.clone())) {
                    continue;
                }
                if seen.len() > caps.states {
                    p.truncated = true;
                    continue;
                }
                p.configs.push(Config { state: s, key: k, depth: depth + 1, eps, parent: Some((id, e)) });
            }
        }
        p
    }

    fn path(&self, mut id: usize) -> Vec<FiringEvent> {
        let mut out = Vec::new();
        while let Some((parent, e)) = self.configs[id].parent {
            out.push(e);
            id = parent;
        }
        out.reverse();
        out
    }
}

/// Whether `word` is in the coverability language of `(def, s0, target)`, by bounded search.
pub fn member(def: &RpnDef, s0: &TreeState, target: &CoverTarget, word: &[String], caps: SearchCaps) -> Membership {
    let mut hit = None;
    let p = Product::run(
        def,
        s0,
        0usize,
        caps,
        |pos, label| match label {
            None => Some(*pos),
            Some(l) => (word.get(*pos).map(String::as_str) == Some(l)).then_some(pos + 1),
        },
        |s, pos, id| {
            let ok = *pos == word.len() && target.covered_by(s);
            if ok {
                hit = Some(id);
            }
            ok
        },
    );
    match hit {
        Some(id) => Membership::Yes(p.path(id)),
        None if p.truncated => Membership::Unknown,
        None => Membership::NoWithinBound,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LanguageSample {
    pub words: BTreeSet<Vec<String>>,
    /// False when some branch was cut by a cap, so that words may be missing.
    pub complete: bool,
}

/// All words of length at most `max_len` in the coverability language, up to the caps.
pub fn language_sample(def: &RpnDef, s0: &TreeState, target: &CoverTarget, max_len: usize, caps: SearchCaps) -> LanguageSample {
    let mut words = BTreeSet::new();
    // covering is decided once per (abstract state, word) configuration, but abstract states recur
    // under many words
    let mut covers: HashMap<AbstractState, bool> = HashMap::new();
    let p = Product::run(
        def,
        s0,
        Vec::<String>::new(),
        caps,
        |w, label| match label {
            None => Some(w.clone()),
            Some(_) if w.len() >= max_len => None,
            Some(l) => {
                let mut w = w.clone();
                w.push(l.to_string());
                Some(w)
            }
        },
        |s, w, _| {
            if !words.contains(w) {
                let ok = *covers.entry(abstraction(s)).or_insert_with(|| target.covered_by(s));
                if ok {
                    words.insert(w.clone());
                }
            }
            false
        },
    );
    LanguageSample { words, complete: !p.truncated }
}

/// Splits a word given as text: symbols separated by whitespace or commas, or one symbol per
/// character when there is no separator.
pub fn parse_word(text: &str) -> Vec<String> {
    if text.contains(|c: char| c.is_whitespace() || c == ',') {
        text.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).map(str::to_string).collect()
    } else {
        text.chars().map(|c| c.to_string()).collect()
    }
}

/// Renders a word; single-character symbols are concatenated, `ε` stands for the empty word.
pub fn format_word(word: &[String]) -> String {
    if word.is_empty() {
        "ε".to_string()
    } else if word.iter().all(|s| s.chars().count() == 1) {
        word.concat()
    } else {
        word.join(" ")
    }
}
