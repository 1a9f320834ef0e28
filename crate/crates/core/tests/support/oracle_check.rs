//! Decision procedures against the brute-force explorer on seeded random nets.

use std::collections::BTreeMap;

use rpnkit::decide::{decide_boundedness, decide_cover, decide_cut, decide_finiteness, decide_termination, Witness};
use rpnkit::explore::{explore, ExploreResult};
use rpnkit::generate::{random_instance, GenParams};
use rpnkit::model::fire_sequence;

pub const CAP_STATES: usize = 10_000;
pub const CAP_STEPS: usize = 1_000;

/// Whether the explored graph has a cycle; only meaningful on exhausted results.
fn has_cycle(r: &ExploreResult) -> bool {
    let mut succ: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (a, _, b) in &r.transitions {
        succ.entry(*a).or_default().push(*b);
    }
    // iterative three-colour DFS
    let mut colour: BTreeMap<usize, u8> = BTreeMap::new();
    for root in 0..r.states.len() {
        if colour.contains_key(&root) {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        colour.insert(root, 1);
        while let Some((v, i)) = stack.pop() {
            let next = succ.get(&v).and_then(|s| s.get(i)).copied();
            match next {
                Some(w) => {
                    stack.push((v, i + 1));
                    match colour.get(&w) {
                        Some(1) => return true,
                        Some(_) => {}
                        None => {
                            colour.insert(w, 1);
                            stack.push((w, 0));
                        }
                    }
                }
                None => {
                    colour.insert(v, 2);
                }
            }
        }
    }
    false
}

fn covered(r: &ExploreResult, target: &rpnkit::CoverTarget) -> bool {
    r.states.iter().any(|a| target.covered_by(&a.concretize()))
}

/// Checks one instance; `Ok(true)` when the explorer exhausted and every answer was compared.
pub fn check_seed(seed: u64) -> Result<bool, String> {
    let (def, s0, target) = random_instance(seed, &GenParams::default());
    let r = explore(&def, &s0, CAP_STEPS, CAP_STATES);
    let fail = |what: &str| Err(format!("seed {seed}: {what}"));

    let cut = decide_cut(&def, &s0).map_err(|e| e.to_string())?;
    if let Some(Witness::Sequence(seq)) = &cut.witness {
        if !fire_sequence(&def, &s0, seq).is_ok_and(|s| s.is_empty()) {
            return fail("cut witness does not reach the empty state");
        }
    }
    let cover = decide_cover(&def, &s0, &target).map_err(|e| e.to_string())?;
    if let Some(Witness::Sequence(seq)) = &cover.witness {
        if !fire_sequence(&def, &s0, seq).is_ok_and(|s| target.covered_by(&s)) {
            return fail("cover witness does not cover the target");
        }
    }
    // positive answers found by the explorer must be matched even when it did not exhaust
    if r.contains_empty() && !cut.answer {
        return fail("explorer reaches the empty state");
    }
    if covered(&r, &target) && !cover.answer {
        return fail("explorer covers the target");
    }
    if !r.exhausted {
        return Ok(false);
    }
    if cut.answer != r.contains_empty() {
        return fail("cut");
    }
    if cover.answer != covered(&r, &target) {
        return fail("cover");
    }
    if cut.answer && cut.witness.is_none() {
        return fail("cut without witness");
    }
    if !decide_boundedness(&def, &s0).map_err(|e| e.to_string())?.answer {
        return fail("bounded");
    }
    if !decide_finiteness(&def, &s0).map_err(|e| e.to_string())?.answer {
        return fail("finite");
    }
    if decide_termination(&def, &s0).map_err(|e| e.to_string())?.answer == has_cycle(&r) {
        return fail("terminate");
    }
    Ok(true)
}
