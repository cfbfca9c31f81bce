use std::collections::HashMap;
use std::hash::Hash;
use std::sync::Arc;

use super::{CompressionError, TABLE_CAP};
use crate::automata::{eliminate_eps_input_transitions, Compiled, KAutomaton, StateId};
use crate::word::Symbol;

/// A machine that reads one input symbol at a time and appends output.
pub trait SequentialCoder {
    type State: Clone + Eq + Hash;

    fn alphabet_size(&self) -> u32;

    fn start(&self) -> Self::State;

    /// Next state after reading `c`, appending to `out`; `None` if the machine is stuck.
    fn feed(&self, state: &Self::State, c: Symbol, out: &mut Vec<Symbol>) -> Option<Self::State>;
}

/// A 1-deterministic 2-automaton viewed as a sequential coder.
pub struct AutomatonCoder {
    compiled: Arc<Compiled>,
    next: Vec<Vec<Option<usize>>>,
}

impl AutomatonCoder {
    /// Input-free transitions are eliminated first.
    pub fn new(m: &KAutomaton) -> Result<Self, CompressionError> {
        let m = eliminate_eps_input_transitions(m, 1)?;
        if m.tapes() != 2 {
            return Err(crate::automata::AutomatonError::Tapes(m.tapes()).into());
        }
        let compiled = Arc::new(Compiled::new(&m, 1)?);
        let b = m.alphabet().size() as usize;
        let mut next = vec![vec![None; b]; m.state_count()];
        for (i, t) in m.transitions().iter().enumerate() {
            next[t.from][t.label[0][0] as usize] = Some(i);
        }
        Ok(AutomatonCoder { compiled, next })
    }
}

impl SequentialCoder for AutomatonCoder {
    type State = StateId;

    fn alphabet_size(&self) -> u32 {
        self.compiled.alphabet().size()
    }

    fn start(&self) -> StateId {
        self.compiled.initial()
    }

    fn feed(&self, q: &StateId, c: Symbol, out: &mut Vec<Symbol>) -> Option<StateId> {
        let t = self.compiled.transition(self.next[*q][c as usize]?);
        out.extend_from_slice(&t.label[1]);
        Some(t.to)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LosslessReport {
    pub max_len: usize,
    /// No two inputs of equal length up to `max_len` share output and final state.
    pub lossless: bool,
    /// Two distinct inputs of equal length with the same output and final state.
    pub counterexample: Option<(Vec<Symbol>, Vec<Symbol>)>,
    /// Inputs on which the machine got stuck are skipped.
    pub stuck_inputs: u64,
}

/// Checks that `(output, final state)` determines the input among all inputs of each
/// length `1..=max_len`. This is a bounded test, not a decision procedure.
pub fn bounded_losslessness_check<C: SequentialCoder>(coder: &C, max_len: usize) -> Result<LosslessReport, CompressionError> {
    let b = coder.alphabet_size() as u128;
    let total: u128 = (1..=max_len as u32).map(|l| b.saturating_pow(l)).fold(0, u128::saturating_add);
    if total > TABLE_CAP as u128 {
        return Err(CompressionError::TooLarge { what: "enumerated inputs", size: total, cap: TABLE_CAP });
    }
    // Level-by-level expansion: each entry is (input, output, state).
    let mut level: Vec<(Vec<Symbol>, Vec<Symbol>, C::State)> = vec![(Vec::new(), Vec::new(), coder.start())];
    let mut stuck = 0u64;
    for len in 1..=max_len {
        let mut next = Vec::with_capacity(level.len() * b as usize);
        for (input, output, state) in &level {
            for c in 0..b as Symbol {
                let mut out = output.clone();
                match coder.feed(state, c, &mut out) {
                    Some(s) => {
                        let mut inp = input.clone();
                        inp.push(c);
                        next.push((inp, out, s));
                    }
                    None => stuck += b.pow((max_len - len) as u32) as u64,
                }
            }
        }
        let mut seen: HashMap<(&[Symbol], &C::State), &[Symbol]> = HashMap::with_capacity(next.len());
        for (input, output, state) in &next {
            if let Some(prev) = seen.insert((output, state), input) {
                return Ok(LosslessReport {
                    max_len,
                    lossless: false,
                    counterexample: Some((prev.to_vec(), input.clone())),
                    stuck_inputs: stuck,
                });
            }
        }
        level = next;
    }
    Ok(LosslessReport { max_len, lossless: true, counterexample: None, stuck_inputs: stuck })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::fixtures;

    #[test]
    fn copy_is_lossless() {
        let r = bounded_losslessness_check(&AutomatonCoder::new(&fixtures::copy()).unwrap(), 10).unwrap();
        assert!(r.lossless);
        assert_eq!(r.stuck_inputs, 0);
    }

    #[test]
    fn merging_symbols_collides() {
        let m = KAutomaton::parse("automaton k=2 alphabet=2 initial=a\na 0,0 a\na 1,0 a\n").unwrap();
        let r = bounded_losslessness_check(&AutomatonCoder::new(&m).unwrap(), 4).unwrap();
        assert!(!r.lossless);
        assert_eq!(r.counterexample, Some((vec![0], vec![1])));
    }

    #[test]
    fn last_symbol_state_collides() {
        // Final state only remembers the last symbol, so 00 and 10 collide.
        let m = KAutomaton::parse("automaton k=2 alphabet=2 initial=a\na 0,- a\na 1,- b\nb 0,- a\nb 1,- b\n").unwrap();
        let r = bounded_losslessness_check(&AutomatonCoder::new(&m).unwrap(), 3).unwrap();
        assert!(!r.lossless);
        let odd = bounded_losslessness_check(&AutomatonCoder::new(&fixtures::odd()).unwrap(), 1).unwrap();
        assert!(odd.lossless);
    }
}
