//! The problem-to-problem constructions preserve answers and languages on random instances.
//!
//! Shared by the construction suite and the acceptance test.

use rpnkit::decide::{cover_to_cut_construct, cut_to_cover_construct, decide_cover, decide_cut, union_construct, CoverTarget};
use rpnkit::explore::{explore, language_sample, SearchCaps};
use rpnkit::generate::{random_instance, GenParams, Labels};
use rpnkit::model::{RpnDef, TreeState};

pub const INSTANCES: u64 = 25;

/// Brute force: whether some explored state satisfies `pred`, when exploration exhausts.
fn brute(def: &RpnDef, s0: &TreeState, pred: impl Fn(&TreeState) -> bool) -> Option<bool> {
    let r = explore(def, s0, 1_000, 10_000);
    let hit = r.states.iter().any(|a| pred(&a.concretize()));
    (hit || r.exhausted).then_some(hit)
}

pub fn cut_to_cover_preserves_the_answer() -> Result<(), String> {
    let mut checked = 0;
    for seed in 0..INSTANCES {
        let (def, s0, _) = random_instance(seed, &GenParams::default());
        let source = decide_cut(&def, &s0).map_err(|e| e.to_string())?.answer;
        let (net, init, target) = cut_to_cover_construct(&def, &s0).map_err(|e| e.to_string())?;
        let image = decide_cover(&net, &init, &target).map_err(|e| e.to_string())?.answer;
        if image != source {
            return Err(format!("seed {seed}: the construction answers {image}, the source {source}"));
        }
        if let Some(b) = brute(&def, &s0, |s| s.is_empty()) {
            if source != b {
                return Err(format!("seed {seed}: decided {source}, brute force {b}"));
            }
            checked += 1;
        }
    }
    if checked * 5 < INSTANCES * 4 {
        return Err(format!("only {checked} instances exhausted"));
    }
    Ok(())
}

pub fn cover_to_cut_preserves_the_answer() -> Result<(), String> {
    let mut checked = 0;
    for seed in 0..INSTANCES {
        let (def, s0, target) = random_instance(1_000 + seed, &GenParams::default());
        let source = decide_cover(&def, &s0, &target).map_err(|e| e.to_string())?.answer;
        let (net, init) = cover_to_cut_construct(&def, &s0, &target).map_err(|e| e.to_string())?;
        let image = decide_cut(&net, &init).map_err(|e| e.to_string())?.answer;
        if image != source {
            return Err(format!("seed {seed}: the construction answers {image}, the source {source}"));
        }
        if let Some(b) = brute(&def, &s0, |s| target.covered_by(s)) {
            if source != b {
                return Err(format!("seed {seed}: decided {source}, brute force {b}"));
            }
            checked += 1;
        }
    }
    if checked * 5 < INSTANCES * 4 {
        return Err(format!("only {checked} instances exhausted"));
    }
    Ok(())
}

pub fn union_samples_are_unions_of_samples() -> Result<(), String> {
    let params = GenParams { labels: Labels::All, ..GenParams::default() };
    let caps = SearchCaps { steps: 64, eps_budget: 6, states: 200_000 };
    let max_len = 4;
    for i in 0..10 {
        let a = random_instance(2_000 + 2 * i, &params);
        let b = random_instance(2_001 + 2 * i, &params);
        let sample = |(def, s0, t): &(RpnDef, TreeState, CoverTarget)| language_sample(def, s0, t, max_len, caps);
        let (la, lb) = (sample(&a), sample(&b));
        if !(la.complete && lb.complete) {
            return Err(format!("pair {i}: a component sample is incomplete"));
        }
        let u = union_construct(&a, &b).map_err(|e| e.to_string())?;
        let lu = sample(&u);
        let expected: std::collections::BTreeSet<_> = la.words.union(&lb.words).cloned().collect();
        if lu.words != expected {
            return Err(format!("pair {i}: union sample {:?}, expected {:?}", lu.words, expected));
        }
    }
    Ok(())
}
