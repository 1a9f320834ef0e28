//! The `.rpn` text format: a net, named states and named targets in one file.
//!
//! ```text
//! net {
//!   places p q;
//!   abs t { in: p; out: q; start: p:2; label: a; }
//!   cut tau { in: q; }
//! }
//! state s0 {
//!   node r marking p;
//!   node v parent r edge q marking 0;
//! }
//! target f { s0 }
//! ```
//!
//! `#` and `//` start comments. A state block with no node is the empty state.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::decide::CoverTarget;
use crate::marking::Marking;
use crate::model::{FireError, FiringEvent, RpnDef, Transition, TransitionKind, TreeState, VertexId, Violation};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("invalid net: {}", list(.0))]
    Invalid(Vec<Violation>),
}

fn list(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// A state together with the names of its nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedState {
    pub name: String,
    pub state: TreeState,
    pub nodes: BTreeMap<VertexId, String>,
}

impl NamedState {
    /// Names the root `r` and every other vertex `v<id>`.
    pub fn anonymous(name: impl Into<String>, state: TreeState) -> Self {
        let nodes = state
            .vertices()
            .map(|v| (v, if Some(v) == state.root() { "r".to_string() } else { format!("v{}", v.0) }))
            .collect();
        NamedState { name: name.into(), state, nodes }
    }

    pub fn vertex(&self, node: &str) -> Option<VertexId> {
        self.nodes.iter().find(|(_, n)| *n == node).map(|(v, _)| *v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedTarget {
    pub name: String,
    pub states: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RpnFile {
    pub net: RpnDef,
    pub states: Vec<NamedState>,
    pub targets: Vec<NamedTarget>,
}

impl RpnFile {
    pub fn state(&self, name: &str) -> Option<&NamedState> {
        self.states.iter().find(|s| s.name == name)
    }

    pub fn target(&self, name: &str) -> Option<&NamedTarget> {
        self.targets.iter().find(|t| t.name == name)
    }

    /// The target as a [`CoverTarget`] over the referenced states.
    pub fn cover_target(&self, name: &str) -> Option<CoverTarget> {
        let t = self.target(name)?;
        let states = t.states.iter().map(|s| self.state(s).map(|n| n.state.clone())).collect::<Option<Vec<_>>>()?;
        CoverTarget::new(states).ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Sym(char),
    Eof,
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | '\'' | '-' | '$')
}

impl Lexer {
    fn new(text: &str) -> Result<Self, ParseError> {
        let mut toks = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let chars: Vec<char> = line.chars().collect();
            let mut i = 0;
            while i < chars.len() {
                let c = chars[i];
                if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
                    break;
                }
                if c.is_whitespace() {
                    i += 1;
                } else if is_word_char(c) {
                    let start = i;
                    while i < chars.len() && is_word_char(chars[i]) {
                        i += 1;
                    }
                    toks.push((Tok::Word(chars[start..i].iter().collect()), ln + 1, start + 1));
                } else if matches!(c, '{' | '}' | ';' | ':') {
                    toks.push((Tok::Sym(c), ln + 1, i + 1));
                    i += 1;
                } else {
                    return Err(ParseError::Syntax { line: ln + 1, col: i + 1, msg: format!("unexpected character `{c}`") });
                }
            }
        }
        let end_line = text.lines().count().max(1);
        toks.push((Tok::Eof, end_line, text.lines().last().map_or(1, |l| l.chars().count() + 1)));
        Ok(Lexer { toks, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (_, line, col) = self.toks[self.pos];
        Err(ParseError::Syntax { line, col, msg: msg.into() })
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn word(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Word(w) => {
                self.pos += 1;
                Ok(w)
            }
            _ => self.err(format!("expected {what}, found {}", self.describe())),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.at_word(kw) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{kw}`, found {}", self.describe()))
        }
    }

    fn sym(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Sym(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{c}`, found {}", self.describe()))
        }
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Word(x) if x == w)
    }

    fn at_sym(&self, c: char) -> bool {
        *self.peek() == Tok::Sym(c)
    }
}

/// `(id [":" nat])* | "0"`, up to the next `;` or keyword in `stop`.
fn parse_bag(lx: &mut Lexer, def: &RpnDef, stop: &[&str]) -> Result<Marking, ParseError> {
    let mut m = Marking::new();
    if lx.at_word("0") {
        lx.pos += 1;
        return Ok(m);
    }
    while let Tok::Word(w) = lx.peek().clone() {
        if stop.contains(&w.as_str()) {
            break;
        }
        let Some(p) = def.place(&w) else { return lx.err(format!("unknown place `{w}`")) };
        lx.pos += 1;
        let mut n = 1;
        if lx.at_sym(':') {
            lx.pos += 1;
            let num = lx.word("a count")?;
            n = match num.parse::<u64>() {
                Ok(n) => n,
                Err(_) => {
                    lx.pos -= 1;
                    return lx.err(format!("expected a count, found `{num}`"));
                }
            };
        }
        m.add_tokens(p, n);
    }
    Ok(m)
}

fn parse_transition(lx: &mut Lexer, def: &RpnDef, kind: TransitionKind) -> Result<Transition, ParseError> {
    let id = lx.word("a transition name")?;
    lx.sym('{')?;
    let mut t = Transition { id, kind, pre: Marking::new(), post: None, start: None, label: None };
    let mut seen_in = false;
    while !lx.at_sym('}') {
        let field = lx.word("`in`, `out`, `start` or `label`")?;
        lx.sym(':')?;
        match field.as_str() {
            "in" => {
                t.pre = parse_bag(lx, def, &[])?;
                seen_in = true;
            }
            "out" => t.post = Some(parse_bag(lx, def, &[])?),
            "start" => t.start = Some(parse_bag(lx, def, &[])?),
            "label" => t.label = Some(lx.word("a label")?),
            other => {
                lx.pos -= 2;
                return lx.err(format!("unknown field `{other}`"));
            }
        }
        lx.sym(';')?;
    }
    if !seen_in {
        return lx.err(format!("transition `{}` has no `in:` field", t.id));
    }
    lx.sym('}')?;
    // an elementary or abstract transition without `out:` outputs nothing
    if kind != TransitionKind::Cut && t.post.is_none() {
        t.post = Some(Marking::new());
    }
    Ok(t)
}

fn parse_net(lx: &mut Lexer) -> Result<RpnDef, ParseError> {
    lx.keyword("net")?;
    lx.sym('{')?;
    lx.keyword("places")?;
    let mut def = RpnDef::new();
    while let Tok::Word(w) = lx.peek().clone() {
        lx.pos += 1;
        def.add_place(w);
    }
    lx.sym(';')?;
    loop {
        let kind = match lx.peek() {
            Tok::Word(w) if w == "elem" => TransitionKind::Elementary,
            Tok::Word(w) if w == "abs" => TransitionKind::Abstract,
            Tok::Word(w) if w == "cut" => TransitionKind::Cut,
            Tok::Sym('}') => break,
            _ => return lx.err(format!("expected `elem`, `abs`, `cut` or `}}`, found {}", lx.describe())),
        };
        lx.pos += 1;
        let t = parse_transition(lx, &def, kind)?;
        def.add_transition(t);
    }
    lx.sym('}')?;
    Ok(def)
}

fn parse_state(lx: &mut Lexer, def: &RpnDef) -> Result<NamedState, ParseError> {
    let name = lx.word("a state name")?;
    lx.sym('{')?;
    let mut state = TreeState::empty();
    let mut nodes: BTreeMap<VertexId, String> = BTreeMap::new();
    let mut by_name: HashMap<String, VertexId> = HashMap::new();
    let labels = def.edge_labels();
    while !lx.at_sym('}') {
        lx.keyword("node")?;
        let node = lx.word("a node name")?;
        if by_name.contains_key(&node) {
            lx.pos -= 1;
            return lx.err(format!("duplicate node `{node}`"));
        }
        let parent = if lx.at_word("parent") {
            lx.pos += 1;
            let p = lx.word("a node name")?;
            let Some(pv) = by_name.get(&p).copied() else {
                lx.pos -= 1;
                return lx.err(format!("parent `{p}` is not declared before `{node}`"));
            };
            lx.keyword("edge")?;
            let at = lx.pos;
            let edge = parse_bag(lx, def, &["marking"])?;
            if !labels.contains(&edge) {
                lx.pos = at;
                return lx.err(format!("edge of `{node}` is not the output of an abstract transition"));
            }
            Some((pv, edge))
        } else {
            None
        };
        lx.keyword("marking")?;
        let marking = parse_bag(lx, def, &[])?;
        lx.sym(';')?;
        let v = match parent {
            None if state.is_empty() => {
                state = TreeState::single(marking);
                VertexId(0)
            }
            None => return lx.err(format!("second root `{node}`")),
            Some((p, edge)) => state.add_child(p, edge, marking),
        };
        nodes.insert(v, node.clone());
        by_name.insert(node, v);
    }
    lx.sym('}')?;
    Ok(NamedState { name, state, nodes })
}

/// Parses a whole file and validates the net.
pub fn parse(text: &str) -> Result<RpnFile, ParseError> {
    let mut lx = Lexer::new(text)?;
    let net = parse_net(&mut lx)?;
    let violations = net.validate();
    if !violations.is_empty() {
        return Err(ParseError::Invalid(violations));
    }
    let mut file = RpnFile { net, states: Vec::new(), targets: Vec::new() };
    loop {
        if lx.at_word("state") {
            lx.pos += 1;
            let s = parse_state(&mut lx, &file.net)?;
            if file.state(&s.name).is_some() {
                return lx.err(format!("duplicate state `{}`", s.name));
            }
            file.states.push(s);
        } else if lx.at_word("target") {
            lx.pos += 1;
            let name = lx.word("a target name")?;
            lx.sym('{')?;
            let mut states = Vec::new();
            while !lx.at_sym('}') {
                let s = lx.word("a state name")?;
                if file.state(&s).is_none() {
                    lx.pos -= 1;
                    return lx.err(format!("unknown state `{s}`"));
                }
                states.push(s);
            }
            if states.is_empty() {
                return lx.err("a target needs at least one state");
            }
            lx.sym('}')?;
            if file.target(&name).is_some() {
                return lx.err(format!("duplicate target `{name}`"));
            }
            file.targets.push(NamedTarget { name, states });
        } else if *lx.peek() == Tok::Eof {
            return Ok(file);
        } else {
            return lx.err(format!("expected `state`, `target` or end of input, found {}", lx.describe()));
        }
    }
}

/// Bag text: places sorted by name, counts of 1 omitted, `0` for the empty bag.
pub fn format_bag(def: &RpnDef, m: &Marking) -> String {
    let mut parts: Vec<(String, u64)> = m.iter().map(|(p, n)| (def.places[p.index()].clone(), n)).collect();
    if parts.is_empty() {
        return "0".into();
    }
    parts.sort();
    parts.iter().map(|(p, n)| if *n == 1 { p.clone() } else { format!("{p}:{n}") }).collect::<Vec<_>>().join(" ")
}

/// The canonical net text: places and transitions sorted by name.
pub fn print_net(def: &RpnDef) -> String {
    let mut out = String::from("net {\n");
    let mut places = def.places.clone();
    places.sort();
    let _ = writeln!(out, "  places {};", places.join(" "));
    let mut ts: Vec<&Transition> = def.transitions.iter().collect();
    ts.sort_by(|a, b| a.id.cmp(&b.id));
    for t in ts {
        let _ = write!(out, "  {} {} {{ in: {};", t.kind.keyword(), t.id, format_bag(def, &t.pre));
        if let Some(post) = &t.post {
            let _ = write!(out, " out: {};", format_bag(def, post));
        }
        if let Some(start) = &t.start {
            let _ = write!(out, " start: {};", format_bag(def, start));
        }
        if let Some(l) = &t.label {
            let _ = write!(out, " label: {l};");
        }
        out.push_str(" }\n");
    }
    out.push_str("}\n");
    out
}

pub fn print_state(def: &RpnDef, s: &NamedState) -> String {
    let mut out = format!("state {} {{\n", s.name);
    for v in s.state.vertices() {
        let name = |v: VertexId| s.nodes.get(&v).cloned().unwrap_or_else(|| format!("v{}", v.0));
        let _ = write!(out, "  node {}", name(v));
        if let (Some(p), Some(edge)) = (s.state.parent(v), s.state.edge_label(v)) {
            let _ = write!(out, " parent {} edge {}", name(p), format_bag(def, edge));
        }
        let _ = writeln!(out, " marking {};", format_bag(def, s.state.marking(v).expect("vertex")));
    }
    out.push_str("}\n");
    out
}

pub fn print_file(file: &RpnFile) -> String {
    let mut out = print_net(&file.net);
    for s in &file.states {
        out.push_str(&print_state(&file.net, s));
    }
    for t in &file.targets {
        let _ = writeln!(out, "target {} {{ {} }}", t.name, t.states.join(" "));
    }
    out
}

impl fmt::Display for RpnFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_file(self))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ScriptError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: at `{node}`: {cause}")]
    Fire { line: usize, node: String, cause: FireError },
}

/// The outcome of a simulation script.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimRun {
    pub events: Vec<FiringEvent>,
    /// The final state, its nodes named after the input state and the aliases.
    pub end: NamedState,
    /// Names of every vertex that existed during the run.
    pub names: BTreeMap<VertexId, String>,
}

/// Runs a script of events `<node> <transition> [as <alias>]`, one per line or separated by `;`.
/// Nodes are named as in the initial state; `as` names the thread an abstract firing creates.
pub fn run_script(def: &RpnDef, s0: &NamedState, script: &str) -> Result<SimRun, ScriptError> {
    let mut state = s0.state.clone();
    let mut names: BTreeMap<VertexId, String> = s0.nodes.clone();
    let mut events = Vec::new();
    for (ln, line) in script.lines().enumerate() {
        let line_no = ln + 1;
        let code = line.split('#').next().unwrap_or("");
        for stmt in code.split(';') {
            let words: Vec<&str> = stmt.split_whitespace().collect();
            if words.is_empty() {
                continue;
            }
            let syntax = |msg: String| ScriptError::Syntax { line: line_no, msg };
            let (node, tname, alias) = match words.as_slice() {
                [n, t] => (*n, *t, None),
                [n, t, "as", a] => (*n, *t, Some(*a)),
                _ => return Err(syntax(format!("expected `<node> <transition> [as <alias>]`, found `{}`", stmt.trim()))),
            };
            let v = names
                .iter()
                .find(|(v, n)| *n == node && state.contains(**v))
                .map(|(v, _)| *v)
                .ok_or_else(|| syntax(format!("unknown node `{node}`")))?;
            let t = def.transition_id(tname).ok_or_else(|| syntax(format!("unknown transition `{tname}`")))?;
            if alias.is_some() && def.transition(t).kind != TransitionKind::Abstract {
                return Err(syntax(format!("`as` needs an abstract transition, `{tname}` is not one")));
            }
            let e = FiringEvent::new(v, t);
            let created = state.fire_mut(def, e).map_err(|cause| ScriptError::Fire { line: line_no, node: node.to_string(), cause })?;
            events.push(e);
            if let Some(c) = created {
                let name = match alias {
                    Some(a) if names.values().any(|n| n == a) => return Err(syntax(format!("alias `{a}` already used"))),
                    Some(a) => a.to_string(),
                    None => format!("v{}", c.0),
                };
                names.insert(c, name);
            }
        }
    }
    let all = names.clone();
    names.retain(|v, _| state.contains(*v));
    Ok(SimRun { events, end: NamedState { name: format!("{}_end", s0.name), state, nodes: names }, names: all })
}
