//! Multi-tape automata.
//!
//! A k-automaton has k tapes and transitions labelled by k-tuples of words
//! (the empty word is written `-`). When the first `ell` tapes are treated as
//! inputs, the remaining `k - ell` tapes are outputs and the automaton acts as a
//! transducer; see [`check_l_deterministic`] and [`run`].

mod determinism;
mod eliminate;
mod forward;
mod parse;
mod run;

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::word::{Alphabet, Symbol, WordError};

pub use determinism::{check_l_deterministic, DeterminismReport, Violation, ViolationKind};
pub use eliminate::eliminate_eps_input_transitions;
pub use forward::{accepts_prefixes, find_forward_word, forward_pairs, forward_pairs_within, ForwardSearch};
pub use run::{run, run_compiled, Checkpoint, Compiled, Executor, HaltReason, RunOptions, RunTrace, StepOutcome, TransducerSource};

pub type StateId = usize;

/// Largest number of tapes supported.
pub const MAX_TAPES: usize = 3;

#[derive(Debug, Error)]
pub enum AutomatonError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported number of tapes {0} (expected 1..=3)")]
    Tapes(usize),
    #[error("label has {got} components, automaton has {tapes} tapes")]
    Arity { got: usize, tapes: usize },
    #[error("unknown state id {0}")]
    UnknownState(StateId),
    #[error("input tape count {ell} out of range 1..={tapes}")]
    BadEll { ell: usize, tapes: usize },
    #[error("automaton is not {ell}-deterministic")]
    NotDeterministic { ell: usize },
    #[error("every run from the initial state enters a cycle that never reads input")]
    InitialRemoved,
    #[error("expected {expected} input sources, got {got}")]
    InputCount { expected: usize, got: usize },
    #[error("instance too large: {what} = {size} exceeds {cap}")]
    TooLarge { what: &'static str, size: u128, cap: u64 },
    #[error("the empty word has no forward pairs")]
    EmptyWord,
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A transition `from --(l_1, ..., l_k)--> to`; an empty component is ε.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub from: StateId,
    pub label: Vec<Vec<Symbol>>,
    pub to: StateId,
}

impl Transition {
    /// Bitmask of the non-empty components among the first `ell`.
    pub fn input_pattern(&self, ell: usize) -> u32 {
        self.label[..ell]
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .fold(0, |m, (i, _)| m | (1 << i))
    }

    pub fn reads_nothing(&self, ell: usize) -> bool {
        self.input_pattern(ell) == 0
    }
}

#[derive(Clone, Debug)]
pub struct KAutomaton {
    tapes: usize,
    alphabet: Alphabet,
    names: Vec<String>,
    initial: Vec<StateId>,
    transitions: Vec<Transition>,
    outgoing: Vec<Vec<usize>>,
}

impl KAutomaton {
    pub fn new(tapes: usize, alphabet: Alphabet) -> Result<Self, AutomatonError> {
        if tapes == 0 || tapes > MAX_TAPES {
            return Err(AutomatonError::Tapes(tapes));
        }
        Ok(KAutomaton {
            tapes,
            alphabet,
            names: Vec::new(),
            initial: Vec::new(),
            transitions: Vec::new(),
            outgoing: Vec::new(),
        })
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> StateId {
        self.names.push(name.into());
        self.outgoing.push(Vec::new());
        self.names.len() - 1
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn set_initial(&mut self, initial: Vec<StateId>) -> Result<(), AutomatonError> {
        if let Some(&bad) = initial.iter().find(|&&q| q >= self.names.len()) {
            return Err(AutomatonError::UnknownState(bad));
        }
        let mut seen = HashSet::new();
        self.initial = initial.into_iter().filter(|q| seen.insert(*q)).collect();
        Ok(())
    }

    /// Adds a transition. Exact duplicates are ignored.
    pub fn add_transition(&mut self, from: StateId, label: Vec<Vec<Symbol>>, to: StateId) -> Result<(), AutomatonError> {
        let n = self.names.len();
        for q in [from, to] {
            if q >= n {
                return Err(AutomatonError::UnknownState(q));
            }
        }
        if label.len() != self.tapes {
            return Err(AutomatonError::Arity { got: label.len(), tapes: self.tapes });
        }
        for &s in label.iter().flatten() {
            self.alphabet.check(s)?;
        }
        let t = Transition { from, label, to };
        if self.outgoing[from].iter().any(|&i| self.transitions[i] == t) {
            return Ok(());
        }
        self.outgoing[from].push(self.transitions.len());
        self.transitions.push(t);
        Ok(())
    }

    pub fn tapes(&self) -> usize {
        self.tapes
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.names[q]
    }

    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Indices into [`transitions`](Self::transitions) of the transitions leaving `q`.
    pub fn outgoing(&self, q: StateId) -> &[usize] {
        &self.outgoing[q]
    }

    /// Parses the line-oriented text format (see the crate README).
    pub fn parse(text: &str) -> Result<Self, AutomatonError> {
        parse::parse(text)
    }

    /// Serializes to the text format; `parse(to_text())` reproduces the automaton.
    pub fn to_text(&self) -> String {
        parse::to_text(self)
    }

    pub(crate) fn check_ell(&self, ell: usize) -> Result<(), AutomatonError> {
        if ell == 0 || ell > self.tapes {
            return Err(AutomatonError::BadEll { ell, tapes: self.tapes });
        }
        Ok(())
    }

    /// Label text for one component, `-` for ε.
    pub fn component_text(&self, c: &[Symbol]) -> String {
        if c.is_empty() {
            return "-".to_string();
        }
        c.iter().map(|&s| self.alphabet.symbol_char(s).unwrap_or('?')).collect()
    }
}

impl fmt::Display for KAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// The automata shipped with the crate.
pub mod fixtures {
    use super::KAutomaton;

    pub const JOIN: &str = include_str!("../../fixtures/join.aut");
    pub const SHUFFLE: &str = include_str!("../../fixtures/shuffle.aut");
    pub const COPY: &str = include_str!("../../fixtures/copy.aut");
    pub const ODD: &str = include_str!("../../fixtures/odd.aut");

    fn load(text: &str) -> KAutomaton {
        KAutomaton::parse(text).expect("bundled fixture parses")
    }

    /// 2-deterministic 3-automaton accepting `<x, y, join(x, y)>`.
    pub fn join() -> KAutomaton {
        load(JOIN)
    }

    /// Non-deterministic 3-automaton accepting `<x, y, z>` when `z` shuffles `x` and `y`.
    pub fn shuffle() -> KAutomaton {
        load(SHUFFLE)
    }

    /// Binary copy transducer: ratio 1 on every word.
    pub fn copy() -> KAutomaton {
        load(COPY)
    }

    /// Binary transducer computing the odd track.
    pub fn odd() -> KAutomaton {
        load(ODD)
    }

    /// Copy transducer over an arbitrary alphabet.
    pub fn copy_over(alphabet: crate::word::Alphabet) -> KAutomaton {
        let mut m = KAutomaton::new(2, alphabet).expect("two tapes");
        let c = m.add_state("c");
        m.set_initial(vec![c]).expect("state exists");
        for a in alphabet.symbols() {
            m.add_transition(c, vec![vec![a], vec![a]], c).expect("valid label");
        }
        m
    }
}
