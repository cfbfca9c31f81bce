//! Text format:
//!
//! ```text
//! # comment
//! automaton k=3 alphabet=2 initial=q0
//! q0 0,-,0 q1
//! q1 -,0,0 q0
//! ```
//!
//! Each label component is a word over the alphabet or `-` for ε. `initial=` may
//! list several comma-separated states. A line `state <name>` declares a state
//! without transitions.

use std::collections::HashMap;
use std::fmt::Write;

use super::{AutomatonError, KAutomaton, StateId};
use crate::word::{Alphabet, Symbol};

fn err(line: usize, msg: impl Into<String>) -> AutomatonError {
    AutomatonError::Parse { line, msg: msg.into() }
}

struct Builder {
    m: KAutomaton,
    ids: HashMap<String, StateId>,
}

impl Builder {
    fn state(&mut self, name: &str) -> StateId {
        if let Some(&q) = self.ids.get(name) {
            return q;
        }
        let q = self.m.add_state(name);
        self.ids.insert(name.to_string(), q);
        q
    }
}

fn parse_header(line: usize, rest: &str) -> Result<(usize, u32, Vec<String>), AutomatonError> {
    let (mut k, mut b, mut init) = (None, None, None);
    for tok in rest.split_whitespace() {
        let (key, val) = tok.split_once('=').ok_or_else(|| err(line, format!("expected key=value, got `{tok}`")))?;
        match key {
            "k" => k = Some(val.parse::<usize>().map_err(|_| err(line, format!("bad tape count `{val}`")))?),
            "alphabet" => b = Some(val.parse::<u32>().map_err(|_| err(line, format!("bad alphabet size `{val}`")))?),
            "initial" => init = Some(val.split(',').map(str::to_string).collect::<Vec<_>>()),
            _ => return Err(err(line, format!("unknown header key `{key}`"))),
        }
    }
    let k = k.ok_or_else(|| err(line, "header is missing k="))?;
    let b = b.ok_or_else(|| err(line, "header is missing alphabet="))?;
    let init = init.ok_or_else(|| err(line, "header is missing initial="))?;
    if init.iter().any(String::is_empty) {
        return Err(err(line, "empty initial state name"));
    }
    Ok((k, b, init))
}

fn parse_component(line: usize, alphabet: Alphabet, text: &str) -> Result<Vec<Symbol>, AutomatonError> {
    if text == "-" {
        return Ok(Vec::new());
    }
    if text.is_empty() {
        return Err(err(line, "empty label component (use `-` for the empty word)"));
    }
    text.chars()
        .map(|c| alphabet.parse_char(c).map_err(|e| err(line, e.to_string())))
        .collect()
}

pub(super) fn parse(text: &str) -> Result<KAutomaton, AutomatonError> {
    let mut builder: Option<Builder> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens[0] == "automaton" {
            if builder.is_some() {
                return Err(err(line, "duplicate header"));
            }
            let (k, b, init) = parse_header(line, &content["automaton".len()..])?;
            let alphabet = Alphabet::new(b).map_err(|e| err(line, e.to_string()))?;
            let m = KAutomaton::new(k, alphabet).map_err(|e| err(line, e.to_string()))?;
            let mut bld = Builder { m, ids: HashMap::new() };
            let init: Vec<StateId> = init.iter().map(|n| bld.state(n)).collect();
            bld.m.set_initial(init)?;
            builder = Some(bld);
            continue;
        }
        let bld = builder.as_mut().ok_or_else(|| err(line, "transition before header"))?;
        if tokens[0] == "state" {
            if tokens.len() != 2 {
                return Err(err(line, "expected `state <name>`"));
            }
            bld.state(tokens[1]);
            continue;
        }
        if tokens.len() != 3 {
            return Err(err(line, "expected `<from> <labels> <to>`"));
        }
        let alphabet = bld.m.alphabet();
        let label = tokens[1]
            .split(',')
            .map(|c| parse_component(line, alphabet, c))
            .collect::<Result<Vec<_>, _>>()?;
        if label.len() != bld.m.tapes() {
            return Err(err(line, format!("label has {} components, expected {}", label.len(), bld.m.tapes())));
        }
        let from = bld.state(tokens[0]);
        let to = bld.state(tokens[2]);
        bld.m.add_transition(from, label, to)?;
    }
    let bld = builder.ok_or_else(|| err(0, "missing `automaton` header"))?;
    Ok(bld.m)
}

pub(super) fn to_text(m: &KAutomaton) -> String {
    let init: Vec<&str> = m.initial().iter().map(|&q| m.state_name(q)).collect();
    let mut out = format!("automaton k={} alphabet={} initial={}\n", m.tapes(), m.alphabet().size(), init.join(","));
    for q in 0..m.state_count() {
        let incoming = m.transitions().iter().any(|t| t.to == q);
        if m.outgoing(q).is_empty() && !incoming && !m.initial().contains(&q) {
            let _ = writeln!(out, "state {}", m.state_name(q));
        }
    }
    for t in m.transitions() {
        let label: Vec<String> = t.label.iter().map(|c| m.component_text(c)).collect();
        let _ = writeln!(out, "{} {} {}", m.state_name(t.from), label.join(","), m.state_name(t.to));
    }
    out
}
