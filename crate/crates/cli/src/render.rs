//! Text and JSON renderings shared by the commands.

use serde_json::{json, Value};

use rpnkit::decide::Witness;
use rpnkit::io::{format_bag, NamedState};
use rpnkit::model::{AbstractNode, AbstractState, FiringEvent, RpnDef, VertexId};

/// Names vertices after the input state; vertices created later are called `v<id>`, as in
/// simulation scripts.
pub struct Namer<'a> {
    pub state: &'a NamedState,
}

impl Namer<'_> {
    pub fn name(&self, v: VertexId) -> String {
        self.state.nodes.get(&v).cloned().unwrap_or_else(|| format!("v{}", v.0))
    }
}

pub fn event_json(def: &RpnDef, namer: &Namer, e: &FiringEvent) -> Value {
    json!({ "vertex": namer.name(e.vertex), "transition": def.name(e.transition) })
}

pub fn event_text(def: &RpnDef, namer: &Namer, e: &FiringEvent) -> String {
    format!("{} {}", namer.name(e.vertex), def.name(e.transition))
}

pub fn witness_json(def: &RpnDef, namer: &Namer, w: &Witness) -> Value {
    match w {
        Witness::Sequence(seq) => json!({
            "kind": "sequence",
            "events": seq.iter().map(|e| event_json(def, namer, e)).collect::<Vec<_>>(),
        }),
        Witness::Cycle(c) => json!({ "kind": "cycle", "cycle": c }),
        Witness::SelfCover { vertex, prefix, cycle } => json!({
            "kind": "self-cover",
            "vertex": vertex,
            "prefix": prefix,
            "cycle": cycle,
        }),
    }
}

/// One line per event, or a short description of a graph witness.
pub fn witness_text(def: &RpnDef, namer: &Namer, w: &Witness) -> String {
    match w {
        Witness::Sequence(seq) if seq.is_empty() => "(empty sequence)\n".into(),
        Witness::Sequence(seq) => seq.iter().map(|e| event_text(def, namer, e) + "\n").collect(),
        Witness::Cycle(c) => format!("cycle: {}\n", c.join(" ")),
        Witness::SelfCover { vertex, prefix, cycle } => {
            format!("thread {vertex}\nprefix: {}\ncycle: {}\n", words(prefix), words(cycle))
        }
    }
}

fn words(ws: &[String]) -> String {
    if ws.is_empty() {
        "(none)".into()
    } else {
        ws.join(" ")
    }
}

pub fn state_json(def: &RpnDef, s: &NamedState) -> Value {
    let namer = Namer { state: s };
    let nodes: Vec<Value> = s
        .state
        .vertices()
        .map(|v| {
            let mut node = json!({ "name": namer.name(v), "marking": format_bag(def, s.state.marking(v).expect("vertex")) });
            if let (Some(p), Some(e)) = (s.state.parent(v), s.state.edge_label(v)) {
                node["parent"] = json!(namer.name(p));
                node["edge"] = json!(format_bag(def, e));
            }
            node
        })
        .collect();
    json!({ "name": s.name, "nodes": nodes })
}

/// `marking [edge -> child, ...]`, children in canonical order; `empty` for `∅`.
pub fn abstract_text(def: &RpnDef, a: &AbstractState) -> String {
    fn go(def: &RpnDef, n: &AbstractNode, out: &mut String) {
        out.push_str(&format_bag(def, &n.marking));
        if n.children.is_empty() {
            return;
        }
        out.push_str(" [");
        for (i, (edge, c)) in n.children.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&format_bag(def, edge));
            out.push_str(" -> ");
            go(def, c, out);
        }
        out.push(']');
    }
    match &a.0 {
        None => "empty".into(),
        Some(n) => {
            let mut out = String::new();
            go(def, n, &mut out);
            out
        }
    }
}
