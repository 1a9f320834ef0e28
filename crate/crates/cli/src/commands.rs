use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use rpnkit::absgraph::build_abstract_graph;
use rpnkit::decide::{
    cover_to_cut_construct, cut_to_cover_construct, decide_boundedness, decide_cover_with, decide_cut_with,
    decide_finiteness, decide_termination, union_construct, CoverTarget, DecideOptions, Verdict, Witness,
};
use rpnkit::explore::{self as ex, format_word, parse_word, Membership, SearchCaps};
use rpnkit::io::{format_bag, parse, print_file, run_script, NamedState, NamedTarget, RpnFile, ScriptError};
use rpnkit::model::{FireError, RpnDef, Transition, TreeState};
use rpnkit::order::{leq, leq_rooted};
use rpnkit::reduce::{self, build_hat_el, make_rooted};

use crate::render::{abstract_text, event_json, event_text, state_json, witness_json, witness_text, Namer};
use crate::{CapArgs, Output, ProblemArg};

/// A command's result in both renderings, with its exit status.
pub struct Out {
    pub text: String,
    pub json: Value,
    pub code: u8,
}

impl Out {
    fn ok(text: String, json: Value) -> Self {
        Out { text, json, code: 0 }
    }

    pub fn set_timing(&mut self, ms: u64) {
        match self.json.get_mut("stats") {
            Some(stats) => stats["wallclock_ms"] = json!(ms),
            None => self.json["wallclock_ms"] = json!(ms),
        }
    }
}

type Res = Result<Out, String>;

fn load(path: &Path) -> Result<RpnFile, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn pick_state<'a>(file: &'a RpnFile, name: Option<&str>) -> Result<&'a NamedState, String> {
    match name {
        Some(n) => file.state(n).ok_or_else(|| format!("no state named `{n}`")),
        None => file.states.first().ok_or_else(|| "the file declares no state".to_string()),
    }
}

fn pick_target(file: &RpnFile, name: Option<&str>) -> Result<CoverTarget, String> {
    let t = match name {
        Some(n) => file.target(n).ok_or_else(|| format!("no target named `{n}`"))?,
        None => file.targets.first().ok_or_else(|| "the file declares no target".to_string())?,
    };
    file.cover_target(&t.name).ok_or_else(|| format!("target `{}` is malformed", t.name))
}

fn verdict_word(v: &Verdict) -> &'static str {
    match (v.problem.name(), v.answer) {
        ("cut" | "cover", true) => "YES",
        ("cut" | "cover", false) => "NO",
        ("terminate", true) => "TERMINATING",
        ("terminate", false) => "NONTERMINATING",
        ("bounded", true) => "BOUNDED",
        ("bounded", false) => "UNBOUNDED",
        ("finite", true) => "FINITE",
        _ => "INFINITE",
    }
}

pub fn check(problem: ProblemArg, path: &Path, state: Option<&str>, target: Option<&str>, witness: bool) -> Res {
    let file = load(path)?;
    let s0 = pick_state(&file, state)?;
    let def = &file.net;
    let opts = DecideOptions { witness, ..DecideOptions::default() };
    let v = match problem {
        ProblemArg::Cut => decide_cut_with(def, &s0.state, opts),
        ProblemArg::Cover => decide_cover_with(def, &s0.state, &pick_target(&file, target)?, opts),
        ProblemArg::Terminate => decide_termination(def, &s0.state),
        ProblemArg::Bounded => decide_boundedness(def, &s0.state),
        ProblemArg::Finite => decide_finiteness(def, &s0.state),
    }
    .map_err(|e| e.to_string())?;
    let namer = Namer { state: s0 };
    let mut text = verdict_word(&v).to_string();
    match &v.witness {
        Some(Witness::Cycle(c)) => {
            let _ = write!(text, " (cycle: {})", c.join(" "));
        }
        Some(Witness::SelfCover { vertex, .. }) => {
            let _ = write!(text, " (self-covering thread: {vertex})");
        }
        _ => {}
    }
    text.push('\n');
    let mut j = json!({
        "problem": v.problem.name(),
        "answer": v.answer,
        "verdict": verdict_word(&v),
        "method": v.method,
        "stats": { "coverability_calls": v.stats.coverability_calls, "km_nodes": v.stats.km_nodes },
    });
    if witness {
        if let Some(w) = &v.witness {
            text.push_str(&witness_text(def, &namer, w));
            j["witness"] = witness_json(def, &namer, w);
        }
    }
    Ok(Out::ok(text, j))
}

pub fn graph(path: &Path, state: Option<&str>, dot: Option<&Path>) -> Res {
    let file = load(path)?;
    let s0 = pick_state(&file, state)?;
    let rooted = make_rooted(&file.net, &s0.state).map_err(|e| e.to_string())?;
    let g = build_abstract_graph(&rooted.net, &rooted.initial_marking).map_err(|e| e.to_string())?;
    let net = &rooted.net;
    let mut vertices: Vec<(String, String)> =
        g.vertices.iter().map(|v| (g.name(*v).to_string(), format_bag(net, &g.marking[v]))).collect();
    vertices.sort();
    let edges = g.edge_names();
    let cycle = g.has_cycle().map(|c| g.cycle_names(&c));

    let mut text = format!("vertices: {}\n", vertices.len());
    for (n, m) in &vertices {
        let _ = writeln!(text, "  {n}: {m}");
    }
    let _ = writeln!(text, "edges: {}", edges.len());
    for (a, b) in &edges {
        let _ = writeln!(text, "  {a} -> {b}");
    }
    match &cycle {
        Some(c) => {
            let _ = writeln!(text, "cycle: {}", c.join(" "));
        }
        None => text.push_str("acyclic\n"),
    }
    let dot_text = g.to_dot(net);
    match dot {
        Some(p) if p == Path::new("-") => text = dot_text.clone(),
        Some(p) => std::fs::write(p, &dot_text).map_err(|e| format!("{}: {e}", p.display()))?,
        None => {}
    }
    let j = json!({
        "vertices": vertices.iter().map(|(n, m)| json!({ "name": n, "marking": m })).collect::<Vec<_>>(),
        "edges": edges.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
        "cycle": cycle,
    });
    Ok(Out::ok(text, j))
}

pub fn order(path: &Path, a: &str, b: &str, rooted: bool) -> Res {
    let file = load(path)?;
    let sa = pick_state(&file, Some(a))?;
    let sb = pick_state(&file, Some(b))?;
    let emb = if rooted { leq_rooted(&sa.state, &sb.state) } else { leq(&sa.state, &sb.state) };
    let (na, nb) = (Namer { state: sa }, Namer { state: sb });
    let map: Option<BTreeMap<String, String>> =
        emb.as_ref().map(|e| e.map.iter().map(|(x, y)| (na.name(*x), nb.name(*y))).collect());
    let mut text = String::from(if map.is_some() { "YES\n" } else { "NO\n" });
    if let Some(e) = &emb {
        for (x, y) in &e.map {
            let _ = writeln!(text, "  {} -> {}", na.name(*x), nb.name(*y));
        }
    }
    let j = json!({
        "relation": if rooted { "leq_rooted" } else { "leq" },
        "left": a,
        "right": b,
        "answer": map.is_some(),
        "embedding": map,
    });
    Ok(Out::ok(text, j))
}

fn script_error(def: &RpnDef, e: ScriptError) -> String {
    match e {
        ScriptError::Fire { line, node, cause: FireError::NotEnabled { transition, .. } } => {
            format!("line {line}: transition `{}` is not enabled at `{node}`", def.name(transition))
        }
        other => other.to_string(),
    }
}

pub fn sim(path: &Path, state: Option<&str>, fire: &str) -> Res {
    let file = load(path)?;
    let s0 = pick_state(&file, state)?;
    let script = if Path::new(fire).is_file() {
        std::fs::read_to_string(fire).map_err(|e| format!("{fire}: {e}"))?
    } else {
        fire.to_string()
    };
    let def = &file.net;
    let run = run_script(def, s0, &script).map_err(|e| script_error(def, e))?;
    let names = NamedState { nodes: run.names.clone(), ..s0.clone() };
    let namer = Namer { state: &names };
    let mut end = run.end.clone();
    end.name = "end".into();
    let mut text = String::new();
    for e in &run.events {
        let _ = writeln!(text, "# {}", event_text(def, &namer, e));
    }
    text.push_str(&rpnkit::io::print_state(def, &end));
    let j = json!({
        "events": run.events.iter().map(|e| event_json(def, &namer, e)).collect::<Vec<_>>(),
        "end": state_json(def, &end),
    });
    Ok(Out::ok(text, j))
}

fn emit(kind: &str, file: &RpnFile, header: &str, out: &Output, mut extra: Value) -> Res {
    let rpn = format!("{header}{}", print_file(file));
    let text = match &out.output {
        Some(p) => {
            std::fs::write(p, &rpn).map_err(|e| format!("{}: {e}", p.display()))?;
            format!("wrote {}\n", p.display())
        }
        None => rpn.clone(),
    };
    extra["kind"] = json!(kind);
    extra["rpn"] = json!(rpn);
    Ok(Out::ok(text, extra))
}

fn with_states(net: RpnDef, states: Vec<(&str, TreeState)>, target: Option<&str>) -> RpnFile {
    let named: Vec<NamedState> = states.into_iter().map(|(n, s)| NamedState::anonymous(n, s)).collect();
    let targets = match target {
        Some(t) => vec![NamedTarget { name: t.into(), states: named[1..].iter().map(|s| s.name.clone()).collect() }],
        None => Vec::new(),
    };
    RpnFile { net, states: named, targets }
}

pub fn build_rooted(path: &Path, state: Option<&str>, out: &Output) -> Res {
    let file = load(path)?;
    let s0 = pick_state(&file, state)?;
    let r = make_rooted(&file.net, &s0.state).map_err(|e| e.to_string())?;
    let f = with_states(r.net.clone(), vec![("s0", r.initial_state())], None);
    emit("rooted", &f, "", out, json!({}))
}

fn returning_names(file: &RpnFile) -> Result<(rpnkit::HatNet, Vec<String>), String> {
    let hat = reduce::build_hat(&file.net).map_err(|e| e.to_string())?;
    let mut names: Vec<String> = hat.returning.iter().map(|t| file.net.name(*t).to_string()).collect();
    names.sort();
    Ok((hat, names))
}

pub fn build_hat(path: &Path, out: &Output) -> Res {
    let file = load(path)?;
    let (hat, names) = returning_names(&file)?;
    let f = RpnFile { net: hat.net.clone(), states: file.states.clone(), targets: file.targets.clone() };
    let header = format!("# returning: {}\n", names.join(" "));
    emit("hat", &f, &header, out, json!({ "returning": names }))
}

pub fn build_hatel(path: &Path, out: &Output) -> Res {
    let file = load(path)?;
    let (hat, names) = returning_names(&file)?;
    let el = build_hat_el(&hat);
    let mut net = RpnDef::new();
    for p in &el.places {
        net.add_place(p.clone());
    }
    for t in &el.transitions {
        let mut tr = Transition::elementary(t.id.clone(), t.pre.clone(), t.post.clone());
        tr.label = t.source.and_then(|s| hat.net.get(s)).and_then(|s| s.label.clone());
        net.add_transition(tr);
    }
    let f = RpnFile { net, states: Vec::new(), targets: Vec::new() };
    emit("hatel", &f, "", out, json!({ "returning": names }))
}

pub fn build_cov2cut(path: &Path, state: Option<&str>, target: Option<&str>, out: &Output) -> Res {
    let file = load(path)?;
    let s0 = pick_state(&file, state)?;
    let t = pick_target(&file, target)?;
    let (net, init) = cover_to_cut_construct(&file.net, &s0.state, &t).map_err(|e| e.to_string())?;
    emit("cov2cut", &with_states(net, vec![("s0", init)], None), "", out, json!({}))
}

pub fn build_cut2cov(path: &Path, state: Option<&str>, out: &Output) -> Res {
    let file = load(path)?;
    let s0 = pick_state(&file, state)?;
    let (net, init, t) = cut_to_cover_construct(&file.net, &s0.state).map_err(|e| e.to_string())?;
    let f = target_file(net, init, &t);
    emit("cut2cov", &f, "", out, json!({}))
}

fn target_file(net: RpnDef, init: TreeState, t: &CoverTarget) -> RpnFile {
    let names: Vec<String> = (0..t.states().len()).map(|i| format!("f{i}")).collect();
    let mut states = vec![("s0", init)];
    states.extend(names.iter().map(String::as_str).zip(t.states().iter().cloned()));
    with_states(net, states, Some("f"))
}

pub fn build_union(left: (&Path, Option<&str>, Option<&str>), right: (&Path, Option<&str>, Option<&str>), out: &Output) -> Res {
    let instance = |(path, state, target): (&Path, Option<&str>, Option<&str>)| -> Result<_, String> {
        let file = load(path)?;
        let s0 = pick_state(&file, state)?.state.clone();
        let t = pick_target(&file, target)?;
        Ok((file.net, s0, t))
    };
    let (net, init, t) = union_construct(&instance(left)?, &instance(right)?).map_err(|e| e.to_string())?;
    emit("union", &target_file(net, init, &t), "", out, json!({}))
}

/// Defaults, then `RPNKIT_CAPS`, then the flags.
fn caps(args: &CapArgs, default: SearchCaps) -> Result<SearchCaps, String> {
    let mut c = default;
    if let Ok(env) = std::env::var("RPNKIT_CAPS") {
        for item in env.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let bad = || format!("RPNKIT_CAPS: cannot read `{item}` (expected steps=N, states=N or eps=N)");
            let (k, v) = item.split_once('=').ok_or_else(bad)?;
            let n: usize = v.trim().parse().map_err(|_| bad())?;
            match k.trim() {
                "steps" => c.steps = n,
                "states" => c.states = n,
                "eps" => c.eps_budget = n,
                _ => return Err(bad()),
            }
        }
    }
    c.steps = args.cap_steps.unwrap_or(c.steps);
    c.states = args.cap_states.unwrap_or(c.states);
    c.eps_budget = args.eps_budget.unwrap_or(c.eps_budget);
    Ok(c)
}

fn caps_json(c: &SearchCaps) -> Value {
    json!({ "steps": c.steps, "states": c.states, "eps": c.eps_budget })
}

pub fn explore(path: &Path, state: Option<&str>, list: bool, args: &CapArgs) -> Res {
    let file = load(path)?;
    let s0 = pick_state(&file, state)?;
    let c = caps(args, SearchCaps { states: 10_000, ..SearchCaps::default() })?;
    let r = ex::explore(&file.net, &s0.state, c.steps, c.states);
    let mut rendered: Vec<String> = r.states.iter().map(|a| abstract_text(&file.net, a)).collect();
    rendered.sort();
    let yes = |b: bool| if b { "yes" } else { "no" };
    let mut text = format!(
        "states: {}\ntransitions: {}\nexhausted: {}\nempty reachable: {}\n",
        r.states.len(),
        r.transitions.len(),
        match r.frontier_cut {
            None => "yes".to_string(),
            Some(reason) => format!("no ({})", reason.name()),
        },
        yes(r.contains_empty()),
    );
    if list {
        for s in &rendered {
            let _ = writeln!(text, "  {s}");
        }
    }
    let mut j = json!({
        "states": r.states.len(),
        "transitions": r.transitions.len(),
        "exhausted": r.exhausted,
        "frontier_cut": r.frontier_cut.map(|c| c.name()),
        "contains_empty": r.contains_empty(),
        "caps": caps_json(&c),
    });
    if list {
        j["list"] = json!(rendered);
    }
    Ok(Out { text, json: j, code: if r.exhausted { 0 } else { 3 } })
}

pub fn member(path: &Path, word: &str, state: Option<&str>, target: Option<&str>, args: &CapArgs) -> Res {
    let file = load(path)?;
    let s0 = pick_state(&file, state)?;
    let t = pick_target(&file, target)?;
    let c = caps(args, SearchCaps::default())?;
    let w = parse_word(word);
    let m = ex::member(&file.net, &s0.state, &t, &w, c);
    let namer = Namer { state: s0 };
    let (answer, code) = match &m {
        Membership::Yes(_) => ("yes", 0),
        Membership::NoWithinBound => ("no-within-bound", 0),
        Membership::Unknown => ("unknown", 3),
    };
    let mut text = format!("{}\n", answer.to_uppercase());
    let mut j = json!({ "word": format_word(&w), "answer": answer, "caps": caps_json(&c) });
    if let Membership::Yes(seq) = &m {
        for e in seq {
            let _ = writeln!(text, "  {}", event_text(&file.net, &namer, e));
        }
        j["witness"] = json!(seq.iter().map(|e| event_json(&file.net, &namer, e)).collect::<Vec<_>>());
    }
    Ok(Out { text, json: j, code })
}

pub fn sample(path: &Path, max_len: usize, state: Option<&str>, target: Option<&str>, args: &CapArgs) -> Res {
    let file = load(path)?;
    let s0 = pick_state(&file, state)?;
    let t = pick_target(&file, target)?;
    let c = caps(args, SearchCaps::default())?;
    let s = ex::language_sample(&file.net, &s0.state, &t, max_len, c);
    let mut words: Vec<&Vec<String>> = s.words.iter().collect();
    words.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    let rendered: Vec<String> = words.iter().map(|w| format_word(w)).collect();
    let mut text: String = rendered.iter().map(|w| format!("{w}\n")).collect();
    if !s.complete {
        text.push_str("# incomplete: a search cap was hit\n");
    }
    let j = json!({ "max_len": max_len, "complete": s.complete, "words": rendered, "caps": caps_json(&c) });
    Ok(Out { text, json: j, code: if s.complete { 0 } else { 3 } })
}
