//! Compressing `y` given `x` when `y` tends to agree with `f(x)` for a transducer `f`.
//!
//! The compressor cuts `y` into windows of `k` symbols. Each window that equals the
//! corresponding window of `f(x)` costs one `0`. At the first disagreement, in window
//! `p` (0-based), it writes `1` followed by `y[kp+1..]` verbatim.

use std::collections::{HashMap, VecDeque};

use super::{CheckpointLog, CompressionError, RatioEstimate, SequentialCoder};
use crate::automata::{eliminate_eps_input_transitions, Compiled, KAutomaton, StateId, TransducerSource};
use crate::source::WordSource;
use crate::word::{FiniteWord, Symbol};

#[derive(Clone, Debug)]
pub struct MatchRunOutput {
    pub output: FiniteWord,
    pub estimate: RatioEstimate,
    /// 1-based position of the first disagreement between `y` and `f(x)`.
    pub first_mismatch: Option<usize>,
}

/// Compresses `y[1..n]` against `f(x)`, where `f` is the 1-deterministic transducer `t`.
pub fn match_run_compress(
    t: &KAutomaton,
    k: usize,
    y: Box<dyn WordSource>,
    x: Box<dyn WordSource>,
    n: usize,
) -> Result<MatchRunOutput, CompressionError> {
    let fx = TransducerSource::from_automaton(t, x)?;
    match_run_compress_stream(Box::new(fx), k, y, n)
}

/// As [`match_run_compress`], with `f(x)` supplied directly. A source that ends early
/// counts as a disagreement.
pub fn match_run_compress_stream(
    mut fx: Box<dyn WordSource>,
    k: usize,
    mut y: Box<dyn WordSource>,
    n: usize,
) -> Result<MatchRunOutput, CompressionError> {
    if k == 0 {
        return Err(CompressionError::ZeroBlock);
    }
    let mut out = FiniteWord::with_capacity(y.alphabet(), n / k + 1);
    let mut log = CheckpointLog::new();
    let mut window: Vec<Symbol> = Vec::with_capacity(k);
    let mut mismatch = None;
    for i in 1..=n {
        let c = y.next_symbol().ok_or(CompressionError::SourceEnded(i - 1))?;
        if mismatch.is_some() {
            out.push(c)?;
        } else if fx.next_symbol() == Some(c) {
            window.push(c);
            if window.len() == k {
                out.push(0)?;
                window.clear();
            }
        } else {
            mismatch = Some(i);
            out.push(1)?;
            for &s in &window {
                out.push(s)?;
            }
            out.push(c)?;
        }
        if i < n {
            log.observe(i, out.len());
        }
    }
    if mismatch.is_none() && !window.is_empty() {
        out.push(0)?;
    }
    let estimate = log.finish(n, out.len(), None);
    Ok(MatchRunOutput { output: out, estimate, first_mismatch: mismatch })
}

/// Recovers `y[1..n]` from the compressed output and `f(x)`.
pub fn match_run_decode(
    output: &FiniteWord,
    mut fx: Box<dyn WordSource>,
    k: usize,
    n: usize,
) -> Result<FiniteWord, CompressionError> {
    if k == 0 {
        return Err(CompressionError::ZeroBlock);
    }
    let mut y = FiniteWord::with_capacity(output.alphabet(), n);
    let mut pos = 0;
    while y.len() < n {
        let flag = (pos < output.len()).then(|| output.get0(pos));
        match flag {
            None => return Err(CompressionError::Truncated { expected: n }),
            Some(0) => {
                pos += 1;
                for _ in 0..k.min(n - y.len()) {
                    let s = fx.next_symbol().ok_or(CompressionError::SourceEnded(y.len()))?;
                    y.push(s)?;
                }
            }
            Some(1) => {
                pos += 1;
                let rest = n - y.len();
                if output.len() - pos < rest {
                    return Err(CompressionError::Truncated { expected: n });
                }
                for j in 0..rest {
                    y.push(output.get0(pos + j))?;
                }
                pos += rest;
            }
            Some(_) => return Err(CompressionError::DeadEnd { position: pos + 1 }),
        }
    }
    if pos != output.len() {
        return Err(CompressionError::TrailingOutput { extra: output.len() - pos });
    }
    Ok(y)
}

/// The match-run compressor as a sequential coder of `y` with `f(x)` fixed in advance.
/// The state is (position, whether copying has started).
pub struct MatchRunCoder {
    fx: Vec<Symbol>,
    alphabet_size: u32,
    k: usize,
}

impl MatchRunCoder {
    pub fn new(fx: &FiniteWord, k: usize) -> Result<Self, CompressionError> {
        if k == 0 {
            return Err(CompressionError::ZeroBlock);
        }
        Ok(MatchRunCoder { fx: fx.to_vec(), alphabet_size: fx.alphabet().size(), k })
    }
}

impl SequentialCoder for MatchRunCoder {
    type State = (usize, bool);

    fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }

    fn start(&self) -> Self::State {
        (0, false)
    }

    fn feed(&self, (pos, copying): &Self::State, c: Symbol, out: &mut Vec<Symbol>) -> Option<Self::State> {
        if *copying {
            out.push(c);
            return Some((pos + 1, true));
        }
        if self.fx.get(*pos) == Some(&c) {
            if (pos + 1) % self.k == 0 {
                out.push(0);
            }
            return Some((pos + 1, false));
        }
        let start = pos - pos % self.k;
        out.push(1);
        out.extend_from_slice(&self.fx[start..*pos]);
        out.push(c);
        Some((pos + 1, true))
    }
}

/// Builds the match-run compressor as a 2-deterministic 3-automaton (tape 1: `y`,
/// tape 2: `x`, tape 3: output), for `k <= 3`. States hold the transducer state, the
/// symbols of `f(x)` computed but not yet compared, and the agreeing part of the
/// current window.
pub fn materialize_match_run(t: &KAutomaton, k: usize) -> Result<KAutomaton, CompressionError> {
    if k == 0 {
        return Err(CompressionError::ZeroBlock);
    }
    if k > 3 {
        return Err(CompressionError::TooLarge { what: "window length", size: k as u128, cap: 3 });
    }
    let t = eliminate_eps_input_transitions(t, 1)?;
    let compiled = Compiled::new(&t, 1)?;
    let alphabet = t.alphabet();
    let b = alphabet.size();
    type Key = (StateId, Vec<Symbol>, Vec<Symbol>);
    let mut c = KAutomaton::new(3, alphabet)?;
    let mut ids: HashMap<Key, StateId> = HashMap::new();
    let mut queue: VecDeque<Key> = VecDeque::new();
    let name = |(q, pending, window): &Key| {
        let w = |v: &Vec<Symbol>| v.iter().map(|&s| alphabet.symbol_char(s).unwrap_or('?')).collect::<String>();
        format!("{}[{}|{}]", t.state_name(*q), w(pending), w(window))
    };
    let intern = |c: &mut KAutomaton, ids: &mut HashMap<Key, StateId>, key: Key, queue: &mut VecDeque<Key>| -> StateId {
        if let Some(&id) = ids.get(&key) {
            return id;
        }
        let id = c.add_state(name(&key));
        ids.insert(key.clone(), id);
        queue.push_back(key);
        id
    };
    let start = intern(&mut c, &mut ids, (compiled.initial(), Vec::new(), Vec::new()), &mut queue);
    c.set_initial(vec![start])?;
    let copy = c.add_state("copy");
    for a in alphabet.symbols() {
        c.add_transition(copy, vec![vec![a], vec![], vec![a]], copy)?;
    }
    while let Some(key) = queue.pop_front() {
        let from = ids[&key];
        let (q, pending, window) = key;
        if pending.is_empty() {
            // Advance the transducer on the next oracle symbol.
            for &i in t.outgoing(q) {
                let tr = &t.transitions()[i];
                let a = tr.label[0][0];
                let to = intern(&mut c, &mut ids, (tr.to, tr.label[1].clone(), window.clone()), &mut queue);
                c.add_transition(from, vec![vec![], vec![a], vec![]], to)?;
            }
            continue;
        }
        for s in 0..b {
            if s == pending[0] {
                let mut w = window.clone();
                w.push(s);
                let (w, out) = if w.len() == k { (Vec::new(), vec![0]) } else { (w, Vec::new()) };
                let to = intern(&mut c, &mut ids, (q, pending[1..].to_vec(), w), &mut queue);
                c.add_transition(from, vec![vec![s], vec![], out], to)?;
            } else {
                let mut out = vec![1];
                out.extend_from_slice(&window);
                out.push(s);
                c.add_transition(from, vec![vec![s], vec![], out], copy)?;
            }
        }
        if ids.len() as u64 > super::TABLE_CAP {
            return Err(CompressionError::TooLarge { what: "compressor states", size: ids.len() as u128, cap: super::TABLE_CAP });
        }
    }
    Ok(c)
}
