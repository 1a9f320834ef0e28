//! Hand-transcribed nets and states used by the tests, the CLI examples and the benches.
//!
//! The `.rpn` files under `fixtures/` of the same names hold the same data; tests check that both
//! agree.

use crate::marking::Marking;
use crate::model::{FiringEvent, RpnDef, Transition, TreeState, VertexId};
use crate::petri::PetriNet;

fn net(places: &[&str]) -> RpnDef {
    let mut def = RpnDef::new();
    for p in places {
        def.add_place(*p);
    }
    def
}

/// The running example: a thread either runs the `a` branch or the `b` branch,
/// each of which may recursively spawn a fresh `p_beg` thread.
pub fn fig1() -> RpnDef {
    let mut def = net(&["p_ini", "p_fin", "p_beg", "p_end", "p_a1", "p_a2", "p_b1", "p_b2"]);
    let b = |def: &RpnDef, p: &str| def.bag(&[(p, 1)]);
    let ts = vec![
        Transition::abstract_("t_beg", b(&def, "p_ini"), b(&def, "p_fin"), b(&def, "p_beg")),
        Transition::elementary("t_a1", b(&def, "p_beg"), b(&def, "p_a1")),
        Transition::abstract_("t_a2", b(&def, "p_a1"), b(&def, "p_a2"), b(&def, "p_beg")),
        Transition::elementary("t_a3", b(&def, "p_a2"), b(&def, "p_end")),
        Transition::elementary("t_b1", b(&def, "p_beg"), b(&def, "p_b1")),
        Transition::abstract_("t_b2", b(&def, "p_b1"), b(&def, "p_b2"), b(&def, "p_beg")),
        Transition::elementary("t_b3", b(&def, "p_b2"), b(&def, "p_end")),
        Transition::elementary("t_sa", b(&def, "p_beg"), b(&def, "p_end")),
        Transition::elementary("t_sb", b(&def, "p_beg"), b(&def, "p_end")),
        Transition::cut("t_tau1", b(&def, "p_beg")),
        Transition::cut("t_tau2", b(&def, "p_end")),
    ];
    for t in ts {
        def.add_transition(t);
    }
    def
}

/// Root `0` with child `0` (edge `p_fin`) with grandchild `p_end` (edge `p_b2`).
pub fn fig1_right_state(def: &RpnDef) -> TreeState {
    let mut s = TreeState::single(Marking::new());
    let v = s.add_child(VertexId(0), def.bag(&[("p_fin", 1)]), Marking::new());
    s.add_child(v, def.bag(&[("p_b2", 1)]), def.bag(&[("p_end", 1)]));
    s
}

/// The seven firings from `s[r, p_ini]` to `s[r, p_fin]`, with `r = #0`, `v = #1`, `w = #2`.
pub fn fig2_sequence(def: &RpnDef) -> Vec<FiringEvent> {
    let e = |v: u32, t: &str| FiringEvent::new(VertexId(v), def.transition_id(t).unwrap());
    vec![
        e(0, "t_beg"),
        e(1, "t_b1"),
        e(1, "t_b2"),
        e(2, "t_sa"),
        e(2, "t_tau2"),
        e(1, "t_b3"),
        e(1, "t_tau2"),
    ]
}

/// The intermediate trees after each step of [`fig2_sequence`], as drawn.
pub fn fig2_states(def: &RpnDef) -> Vec<TreeState> {
    let m = |p: &str| def.bag(&[(p, 1)]);
    let z = Marking::new;
    let mut out = Vec::new();

    out.push(TreeState::single(m("p_ini")));

    let mut s = TreeState::single(z());
    s.add_child(VertexId(0), m("p_fin"), m("p_beg"));
    out.push(s);

    let mut s = TreeState::single(z());
    s.add_child(VertexId(0), m("p_fin"), m("p_b1"));
    out.push(s);

    let mut s = TreeState::single(z());
    let v = s.add_child(VertexId(0), m("p_fin"), z());
    s.add_child(v, m("p_b2"), m("p_beg"));
    out.push(s);

    out.push(fig1_right_state(def));

    let mut s = TreeState::single(z());
    s.add_child(VertexId(0), m("p_fin"), m("p_b2"));
    out.push(s);

    let mut s = TreeState::single(z());
    s.add_child(VertexId(0), m("p_fin"), m("p_end"));
    out.push(s);

    out.push(TreeState::single(m("p_fin")));
    out
}

/// A net whose abstract posts are exactly the edge labels needed by the order example.
pub fn fig3() -> RpnDef {
    let mut def = net(&["p1", "p2"]);
    let p1 = def.bag(&[("p1", 1)]);
    let p12 = def.bag(&[("p1", 1), ("p2", 1)]);
    def.add_transition(Transition::abstract_("t_a", p1.clone(), p1.clone(), p1.clone()));
    def.add_transition(Transition::abstract_("t_b", p1.clone(), p12, p1.clone()));
    def.add_transition(Transition::abstract_("t_c", p1.clone(), Marking::new(), p1));
    def
}

/// `(s, s')` with `s ≼ s'` but not `s ≼_r s'`.
pub fn fig3_states(def: &RpnDef) -> (TreeState, TreeState) {
    let mut s = TreeState::single(def.bag(&[("p1", 1)]));
    s.add_child(VertexId(0), def.bag(&[("p1", 1)]), def.bag(&[("p2", 1)]));

    let mut t = TreeState::single(Marking::new());
    t.add_child(VertexId(0), Marking::new(), Marking::new());
    let mid = t.add_child(VertexId(0), Marking::new(), def.bag(&[("p1", 2)]));
    t.add_child(mid, def.bag(&[("p1", 1), ("p2", 1)]), def.bag(&[("p2", 1)]));
    t.add_child(mid, Marking::new(), Marking::new());
    (s, t)
}

/// The Petri net whose coverability language from `p1` to `p3` is `a^m b^n c^p`, `m ≥ n ≥ p`,
/// written as an RPN with elementary transitions only.
pub fn fig4() -> RpnDef {
    let mut def = net(&["p1", "p2", "p3", "p4", "p5"]);
    let b = |def: &RpnDef, ps: &[&str]| def.bag(&ps.iter().map(|p| (*p, 1)).collect::<Vec<_>>());
    let ts = vec![
        Transition::elementary("t1", b(&def, &["p1"]), b(&def, &["p2"])),
        Transition::elementary("t2", b(&def, &["p2"]), b(&def, &["p3"])),
        Transition::elementary("t3", b(&def, &["p1"]), b(&def, &["p1", "p4"])).with_label("a"),
        Transition::elementary("t4", b(&def, &["p2", "p4"]), b(&def, &["p2", "p5"])).with_label("b"),
        Transition::elementary("t5", b(&def, &["p3", "p5"]), b(&def, &["p3"])).with_label("c"),
    ];
    for t in ts {
        def.add_transition(t);
    }
    def
}

pub fn fig4_petri() -> PetriNet {
    PetriNet::from_elementary(&fig4())
}

/// The antichain net. Starting markings are not drawn in the figure; both are `p_ℓ` here.
pub fn fig5() -> RpnDef {
    let mut def = net(&["p_r", "p_l"]);
    let pr = def.bag(&[("p_r", 1)]);
    let pl = def.bag(&[("p_l", 1)]);
    def.add_transition(Transition::cut("tau_r", pr.clone()));
    def.add_transition(Transition::abstract_("t_r", pr.clone(), pr, pl.clone()));
    def.add_transition(Transition::cut("tau_l", pl.clone()));
    def.add_transition(Transition::abstract_("t_l", pl.clone(), pl.clone(), pl));
    def
}

/// `s_n`: a chain `v_0 -p_r-> v_1 -p_l-> ... -p_l-> v_{n+1}` with only the leaf marked `p_l`.
/// Vertex `v_i` has id `#i`.
pub fn fig5_state(def: &RpnDef, n: usize) -> TreeState {
    let mut s = TreeState::single(Marking::new());
    let mut cur = s.add_child(VertexId(0), def.bag(&[("p_r", 1)]), Marking::new());
    for _ in 0..n {
        cur = s.add_child(cur, def.bag(&[("p_l", 1)]), Marking::new());
    }
    s.set_marking(cur, def.bag(&[("p_l", 1)]));
    s
}

/// Net and four-vertex initial state used to illustrate the rooted construction.
pub fn rooted_example() -> (RpnDef, TreeState) {
    let mut def = net(&["p1", "p2"]);
    let p1 = def.bag(&[("p1", 1)]);
    let p2 = def.bag(&[("p2", 1)]);
    def.add_transition(Transition::abstract_("t1", p1.clone(), p1.clone(), p1.clone()));
    def.add_transition(Transition::abstract_("t2", p1.clone(), p2.clone(), p1.clone()));
    let mut s = TreeState::single(p1.clone());
    let v1 = s.add_child(VertexId(0), p1.clone(), p1.clone());
    s.add_child(v1, p2.clone(), p2.clone());
    s.add_child(v1, p2, p1);
    (def, s)
}

/// One returning abstract transition (`t1`) and one that is not (`t2`).
pub fn hat_example() -> RpnDef {
    let mut def = net(&["p1", "p2"]);
    let p1 = def.bag(&[("p1", 1)]);
    let p2 = def.bag(&[("p2", 1)]);
    def.add_transition(Transition::cut("t_tau", p1.clone()));
    def.add_transition(Transition::abstract_("t1", p1.clone(), p2.clone(), p1.clone()));
    def.add_transition(Transition::abstract_("t2", p1, p2.clone(), p2));
    def
}
