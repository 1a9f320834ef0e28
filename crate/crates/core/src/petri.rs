//! Place/transition nets: backward coverability, Karp–Miller trees, termination and a bounded
//! reachability oracle.
//!
//! Markings are converted to dense vectors at the start of every algorithm; the nets handled
//! here are small, the number of markings visited is not.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use crate::marking::Marking;
use crate::model::{RpnDef, TransitionId, TransitionKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PnTransition {
    pub id: String,
    pub pre: Marking,
    pub post: Marking,
    /// The RPN transition this one was derived from, when there is one.
    pub source: Option<TransitionId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PetriNet {
    pub places: Vec<String>,
    pub transitions: Vec<PnTransition>,
}

impl PetriNet {
    /// The elementary part of an RPN; abstract and cut transitions are dropped.
    pub fn from_elementary(def: &RpnDef) -> Self {
        PetriNet {
            places: def.places.clone(),
            transitions: def
                .ids_of(TransitionKind::Elementary)
                .map(|t| {
                    let tr = def.transition(t);
                    PnTransition { id: tr.id.clone(), pre: tr.pre.clone(), post: tr.post().clone(), source: Some(t) }
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        let max_place = self
            .transitions
            .iter()
            .flat_map(|t| t.pre.support().chain(t.post.support()))
            .map(|p| p.index() + 1)
            .max()
            .unwrap_or(0);
        self.places.len().max(max_place)
    }

    pub fn transition_index(&self, id: &str) -> Option<usize> {
        self.transitions.iter().position(|t| t.id == id)
    }

    /// Fires transition `t` from `m`, or `None` if it is not enabled.
    pub fn fire(&self, m: &Marking, t: usize) -> Option<Marking> {
        let tr = &self.transitions[t];
        m.checked_sub(&tr.pre).map(|rest| &rest + &tr.post)
    }

    pub fn fire_sequence(&self, m: &Marking, seq: &[usize]) -> Option<Marking> {
        seq.iter().try_fold(m.clone(), |cur, t| self.fire(&cur, *t))
    }
}

/// Dense copy of a net; every algorithm below works on this.
struct Dense {
    dim: usize,
    pre: Vec<Vec<u64>>,
    post: Vec<Vec<u64>>,
}

impl Dense {
    fn new(net: &PetriNet, extra: &[&Marking]) -> Self {
        let dim = extra
            .iter()
            .flat_map(|m| m.support())
            .map(|p| p.index() + 1)
            .max()
            .unwrap_or(0)
            .max(net.dim());
        Dense {
            dim,
            pre: net.transitions.iter().map(|t| t.pre.to_dense(dim)).collect(),
            post: net.transitions.iter().map(|t| t.post.to_dense(dim)).collect(),
        }
    }

    fn fire(&self, m: &[u64], t: usize) -> Option<Vec<u64>> {
        let pre = &self.pre[t];
        if m.iter().zip(pre).any(|(a, b)| a < b) {
            return None;
        }
        Some(m.iter().zip(pre).zip(&self.post[t]).map(|((a, b), c)| a - b + c).collect())
    }
}

fn dense_le(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// An upward-closed set of markings, represented by its antichain of minimal elements.
#[derive(Clone, Debug, Default)]
pub struct UpwardClosedSet {
    dim: usize,
    /// `(minimal element, caller tag)`.
    basis: Vec<(Vec<u64>, usize)>,
}

impl UpwardClosedSet {
    pub fn new(dim: usize) -> Self {
        UpwardClosedSet { dim, basis: Vec::new() }
    }

    /// Adds `↑m`. Returns false if `m` was already a member.
    pub fn insert(&mut self, m: &Marking) -> bool {
        let tag = self.basis.len();
        self.insert_dense(m.to_dense(self.dim), tag).is_some()
    }

    pub fn contains(&self, m: &Marking) -> bool {
        let d = m.restrict(self.dim).to_dense(self.dim);
        self.covering(&d).is_some()
    }

    pub fn basis(&self) -> Vec<Marking> {
        self.basis.iter().map(|(b, _)| Marking::from_dense(b)).collect()
    }

    pub fn is_antichain(&self) -> bool {
        self.basis
            .iter()
            .enumerate()
            .all(|(i, (a, _))| self.basis.iter().enumerate().all(|(j, (b, _))| i == j || !dense_le(a, b)))
    }

    /// Tag of some basis element below `m`.
    fn covering(&self, m: &[u64]) -> Option<usize> {
        self.basis.iter().find(|(b, _)| dense_le(b, m)).map(|(_, tag)| *tag)
    }

    /// Inserts unless already covered; returns the tags of the elements it displaced.
    fn insert_dense(&mut self, m: Vec<u64>, tag: usize) -> Option<Vec<usize>> {
        if self.covering(&m).is_some() {
            return None;
        }
        let mut removed = Vec::new();
        self.basis.retain(|(b, t)| {
            let keep = !dense_le(&m, b);
            if !keep {
                removed.push(*t);
            }
            keep
        });
        self.basis.push((m, tag));
        Some(removed)
    }
}

/// Counters shared by the decision procedures; reported in verdict statistics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PetriStats {
    pub coverability_calls: u64,
    pub km_nodes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coverability {
    pub covered: bool,
    /// Index of the covered target.
    pub target: Option<usize>,
    /// Transition indices from `m0` to a marking above the target, when requested and not
    /// longer than the cap.
    pub witness: Option<Vec<usize>>,
}

/// The backward fixpoint: a basis of the set of markings from which some target is coverable.
///
/// Every element remembers the transition and the element it was obtained from, so a covering
/// sequence is read off the chain starting at an element below the initial marking.
pub struct BackwardBasis {
    dim: usize,
    arena: Vec<BackNode>,
    set: UpwardClosedSet,
}

struct BackNode {
    m: Vec<u64>,
    next: Option<(usize, usize)>,
    target: usize,
}

impl BackwardBasis {
    /// Runs to saturation.
    pub fn compute(net: &PetriNet, targets: &[Marking]) -> Self {
        Self::run(net, targets, None).0
    }

    /// Runs until an element below `start` appears, or to saturation.
    fn run(net: &PetriNet, targets: &[Marking], start: Option<&Marking>) -> (Self, Option<usize>) {
        let refs: Vec<&Marking> = targets.iter().chain(start).collect();
        let dn = Dense::new(net, &refs);
        let start = start.map(|m| m.to_dense(dn.dim));
        let mut bb = BackwardBasis { dim: dn.dim, arena: Vec::new(), set: UpwardClosedSet::new(dn.dim) };
        let mut alive: Vec<bool> = Vec::new();
        let mut queue = VecDeque::new();

        let push = |bb: &mut BackwardBasis, node: BackNode, alive: &mut Vec<bool>, queue: &mut VecDeque<usize>| {
            let id = bb.arena.len();
            let removed = bb.set.insert_dense(node.m.clone(), id)?;
            for r in removed {
                alive[r] = false;
            }
            bb.arena.push(node);
            alive.push(true);
            queue.push_back(id);
            Some(id)
        };
        let hits = |bb: &BackwardBasis, id: usize| start.as_ref().is_some_and(|s| dense_le(&bb.arena[id].m, s));

        for (i, t) in targets.iter().enumerate() {
            let node = BackNode { m: t.to_dense(dn.dim), next: None, target: i };
            if let Some(id) = push(&mut bb, node, &mut alive, &mut queue) {
                if hits(&bb, id) {
                    return (bb, Some(id));
                }
            }
        }
        while let Some(b) = queue.pop_front() {
            if !alive[b] {
                continue;
            }
            for t in 0..dn.pre.len() {
                let m: Vec<u64> = bb.arena[b]
                    .m
                    .iter()
                    .zip(&dn.pre[t])
                    .zip(&dn.post[t])
                    .map(|((need, pre), post)| pre + need.saturating_sub(*post))
                    .collect();
                let node = BackNode { m, next: Some((t, b)), target: bb.arena[b].target };
                if let Some(id) = push(&mut bb, node, &mut alive, &mut queue) {
                    if hits(&bb, id) {
                        return (bb, Some(id));
                    }
                }
            }
        }
        (bb, None)
    }

    pub fn basis(&self) -> Vec<Marking> {
        self.set.basis()
    }

    pub fn covers_from(&self, m0: &Marking) -> bool {
        self.set.contains(m0)
    }

    /// The answer for `m0`, with a witness when `witness_cap` is given and the chain fits in it.
    pub fn query(&self, m0: &Marking, witness_cap: Option<usize>) -> Coverability {
        let d = m0.restrict(self.dim).to_dense(self.dim);
        match self.set.covering(&d) {
            None => Coverability { covered: false, target: None, witness: None },
            Some(id) => self.answer(id, witness_cap),
        }
    }

    fn answer(&self, first: usize, witness_cap: Option<usize>) -> Coverability {
        let mut seq = Vec::new();
        let mut cur = first;
        let mut within_cap = true;
        while let Some((t, next)) = self.arena[cur].next {
            if witness_cap.is_some_and(|cap| seq.len() >= cap) {
                within_cap = false;
                break;
            }
            seq.push(t);
            cur = next;
        }
        Coverability {
            covered: true,
            target: Some(self.arena[first].target),
            witness: (witness_cap.is_some() && within_cap).then_some(seq),
        }
    }
}

/// Backward coverability against several targets at once, stopping as soon as `m0` is known
/// to be covered.
pub fn backward_coverability(
    net: &PetriNet,
    m0: &Marking,
    targets: &[Marking],
    witness_cap: Option<usize>,
) -> Coverability {
    let (bb, found) = BackwardBasis::run(net, targets, Some(m0));
    match found {
        Some(id) => bb.answer(id, witness_cap),
        None => Coverability { covered: false, target: None, witness: None },
    }
}

/// Whether some marking reachable from `m0` is `>= target`.
pub fn pn_coverable(net: &PetriNet, m0: &Marking, target: &Marking) -> bool {
    backward_coverability(net, m0, std::slice::from_ref(target), None).covered
}

/// A count that may be `ω`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OmegaCount {
    Fin(u64),
    Omega,
}

impl OmegaCount {
    pub fn add(self, k: u64) -> Self {
        match self {
            OmegaCount::Fin(n) => OmegaCount::Fin(n + k),
            OmegaCount::Omega => OmegaCount::Omega,
        }
    }

    /// `None` if a finite count would go negative.
    pub fn sub(self, k: u64) -> Option<Self> {
        match self {
            OmegaCount::Fin(n) => n.checked_sub(k).map(OmegaCount::Fin),
            OmegaCount::Omega => Some(OmegaCount::Omega),
        }
    }

    pub fn at_least(self, k: u64) -> bool {
        match self {
            OmegaCount::Fin(n) => n >= k,
            OmegaCount::Omega => true,
        }
    }
}

/// A dense marking over `N ∪ {ω}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OmegaMarking(pub Vec<OmegaCount>);

impl OmegaMarking {
    pub fn from_marking(m: &Marking, dim: usize) -> Self {
        OmegaMarking(m.to_dense(dim).into_iter().map(OmegaCount::Fin).collect())
    }

    pub fn le(&self, other: &OmegaMarking) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn has_omega(&self) -> bool {
        self.0.contains(&OmegaCount::Omega)
    }

    /// Whether `m <= self`.
    pub fn covers(&self, m: &Marking) -> bool {
        m.iter().all(|(p, n)| self.0.get(p.index()).is_some_and(|c| c.at_least(n)))
    }

    fn fire(&self, pre: &[u64], post: &[u64]) -> Option<OmegaMarking> {
        self.0
            .iter()
            .zip(pre)
            .zip(post)
            .map(|((c, a), b)| c.sub(*a).map(|c| c.add(*b)))
            .collect::<Option<Vec<_>>>()
            .map(OmegaMarking)
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        OmegaDisplay(self, names)
    }
}

struct OmegaDisplay<'a>(&'a OmegaMarking, &'a [String]);

impl fmt::Display for OmegaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.0 .0.iter().enumerate() {
            let name = self.1.get(i).map(String::as_str).unwrap_or("?");
            let text = match c {
                OmegaCount::Fin(0) => continue,
                OmegaCount::Fin(1) => name.to_string(),
                OmegaCount::Fin(n) => format!("{name}:{n}"),
                OmegaCount::Omega => format!("{name}:w"),
            };
            if !first {
                f.write_str(" ")?;
            }
            f.write_str(&text)?;
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct KmNode {
    pub marking: OmegaMarking,
    pub parent: Option<usize>,
    pub via: Option<usize>,
}

/// A Karp–Miller tree. Nodes whose marking already occurs elsewhere in the tree are leaves.
#[derive(Clone, Debug)]
pub struct KmTree {
    pub nodes: Vec<KmNode>,
}

impl KmTree {
    pub fn build(net: &PetriNet, m0: &Marking) -> KmTree {
        km_build(net, m0, false).0
    }

    pub fn has_omega(&self) -> bool {
        self.nodes.iter().any(|n| n.marking.has_omega())
    }

    /// Text dump, one node per line, children indented under their parent.
    pub fn dump(&self, names: &[String]) -> String {
        let mut children: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(p) = n.parent {
                children.entry(p).or_default().push(i);
            }
        }
        let mut out = String::new();
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, depth)) = stack.pop() {
            if i >= self.nodes.len() {
                break;
            }
            out.push_str(&"  ".repeat(depth));
            out.push_str(&self.nodes[i].marking.display(names).to_string());
            out.push('\n');
            for c in children.get(&i).into_iter().flatten().rev() {
                stack.push((*c, depth + 1));
            }
        }
        out
    }
}

/// Builds the tree breadth first. With `stop_on_omega` the construction halts at the first
/// acceleration and reports it.
fn km_build(net: &PetriNet, m0: &Marking, stop_on_omega: bool) -> (KmTree, bool) {
    let dn = Dense::new(net, &[m0]);
    let mut nodes = vec![KmNode { marking: OmegaMarking::from_marking(m0, dn.dim), parent: None, via: None }];
    let mut seen: HashSet<OmegaMarking> = HashSet::new();
    seen.insert(nodes[0].marking.clone());
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for t in 0..dn.pre.len() {
            let Some(mut m) = nodes[i].marking.fire(&dn.pre[t], &dn.post[t]) else { continue };
            let mut accelerated = false;
            let mut anc = Some(i);
            while let Some(a) = anc {
                let am = &nodes[a].marking;
                if am.le(&m) && *am != m {
                    for (x, y) in m.0.iter_mut().zip(&am.0) {
                        if *x > *y {
                            *x = OmegaCount::Omega;
                            accelerated = true;
                        }
                    }
                }
                anc = nodes[a].parent;
            }
            nodes.push(KmNode { marking: m.clone(), parent: Some(i), via: Some(t) });
            if accelerated && stop_on_omega {
                return (KmTree { nodes }, true);
            }
            if seen.insert(m) {
                queue.push_back(nodes.len() - 1);
            }
        }
    }
    let omega = nodes.iter().any(|n| n.marking.has_omega());
    (KmTree { nodes }, omega)
}

/// Forward coverability through the Karp–Miller tree; the cross-check for [`pn_coverable`].
pub fn km_coverable(net: &PetriNet, m0: &Marking, target: &Marking) -> bool {
    KmTree::build(net, m0).nodes.iter().any(|n| n.marking.covers(target))
}

/// Whether the reachability set from `m0` is finite.
pub fn pn_bounded(net: &PetriNet, m0: &Marking) -> bool {
    pn_bounded_counted(net, m0, &mut PetriStats::default())
}

pub fn pn_bounded_counted(net: &PetriNet, m0: &Marking, stats: &mut PetriStats) -> bool {
    let (tree, omega) = km_build(net, m0, true);
    stats.km_nodes += tree.nodes.len() as u64;
    !omega
}

/// A reachable marking and a nonempty sequence from it to a marking that covers it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelfCover {
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
}

/// Depth-first search for a self-covering run. Markings whose whole subtree has been
/// explored without success are remembered and never expanded again.
pub fn pn_self_covering(net: &PetriNet, m0: &Marking, stats: &mut PetriStats) -> Option<SelfCover> {
    let dn = Dense::new(net, &[m0]);
    let start = m0.to_dense(dn.dim);
    let mut done: HashSet<Vec<u64>> = HashSet::new();
    // (marking, next transition to try, transition used to reach it)
    let mut path: Vec<(Vec<u64>, usize, Option<usize>)> = vec![(start, 0, None)];
    while let Some(top) = path.last_mut() {
        let t = top.1;
        if t >= dn.pre.len() {
            let (m, _, _) = path.pop().expect("nonempty");
            done.insert(m);
            continue;
        }
        top.1 += 1;
        let Some(next) = dn.fire(&top.0, t) else { continue };
        stats.km_nodes += 1;
        if let Some(a) = path.iter().position(|(m, _, _)| dense_le(m, &next)) {
            let mut seq: Vec<usize> = path.iter().filter_map(|(_, _, via)| *via).collect();
            seq.push(t);
            let cycle = seq.split_off(a);
            return Some(SelfCover { prefix: seq, cycle });
        }
        if done.contains(&next) {
            continue;
        }
        path.push((next, 0, Some(t)));
    }
    None
}

/// Whether every run from `m0` is finite.
pub fn pn_terminates(net: &PetriNet, m0: &Marking) -> bool {
    pn_self_covering(net, m0, &mut PetriStats::default()).is_none()
}

/// Breadth-first reachability within `cap_steps` firings and `cap_states` markings.
/// `exhausted` is true iff the whole reachability set was enumerated.
pub fn pn_reach_bounded(net: &PetriNet, m0: &Marking, cap_steps: usize, cap_states: usize) -> (BTreeSet<Marking>, bool) {
    let mut seen = BTreeSet::from([m0.clone()]);
    let mut level = vec![m0.clone()];
    let mut depth = 0;
    while !level.is_empty() {
        let mut next = Vec::new();
        for m in &level {
            for t in 0..net.transitions.len() {
                let Some(m2) = net.fire(m, t) else { continue };
                if seen.contains(&m2) {
                    continue;
                }
                if depth >= cap_steps || seen.len() >= cap_states {
                    return (seen, false);
                }
                seen.insert(m2.clone());
                next.push(m2);
            }
        }
        level = next;
        depth += 1;
    }
    (seen, true)
}

/// Shortest firing sequence reaching a marking `>= target`, by breadth-first search. Used as an
/// independent oracle in tests.
pub fn bfs_cover_path(net: &PetriNet, m0: &Marking, target: &Marking, cap_states: usize) -> Option<Vec<usize>> {
    let mut parent: HashMap<Marking, Option<(Marking, usize)>> = HashMap::from([(m0.clone(), None)]);
    let mut queue = VecDeque::from([m0.clone()]);
    while let Some(m) = queue.pop_front() {
        if target.le(&m) {
            let mut seq = Vec::new();
            let mut cur = m;
            while let Some(Some((prev, t))) = parent.get(&cur).cloned() {
                seq.push(t);
                cur = prev;
            }
            seq.reverse();
            return Some(seq);
        }
        if parent.len() >= cap_states {
            continue;
        }
        for t in 0..net.transitions.len() {
            if let Some(m2) = net.fire(&m, t) {
                if !parent.contains_key(&m2) {
                    parent.insert(m2.clone(), Some((m.clone(), t)));
                    queue.push_back(m2);
                }
            }
        }
    }
    None
}
