//! Compression ratios.
//!
//! Ratios are output length over the number of symbols consumed from the
//! compressed word (tape 1). Symbols read from an oracle are never charged.
//! Infinite-word quantities such as `liminf` are approximated on prefixes: see
//! [`RatioEstimate`].

mod block;
mod lossless;
mod match_run;
mod report;

use thiserror::Error;

use crate::automata::{run, AutomatonError, Checkpoint, HaltReason, KAutomaton, RunOptions};
use crate::source::WordSource;
use crate::word::WordError;

pub use block::{build_prefix_code, cond_decode, cond_encode, train_model, ConditionalModel, PrefixCode};
pub use lossless::{bounded_losslessness_check, AutomatonCoder, LosslessReport, SequentialCoder};
pub use match_run::{
    match_run_compress, match_run_compress_stream, match_run_decode, materialize_match_run, MatchRunCoder, MatchRunOutput,
};
pub use report::{independence_report, IndependenceReport};

/// Largest table (conditions × blocks, or enumerated inputs) built in memory.
pub const TABLE_CAP: u64 = 1 << 24;

#[derive(Debug, Error)]
pub enum CompressionError {
    #[error("block length must be at least 1")]
    ZeroBlock,
    #[error("length {n} is not a multiple of the block length {k}")]
    NotMultiple { n: usize, k: usize },
    #[error("instance too large: {what} = {size} exceeds {cap}")]
    TooLarge { what: &'static str, size: u128, cap: u64 },
    #[error("block {block} has probability zero under condition {condition} and no codeword")]
    Unencodable { block: u64, condition: u64 },
    #[error("no codeword matches the output at position {position}")]
    DeadEnd { position: usize },
    #[error("output ended inside a codeword or before {expected} symbols were decoded")]
    Truncated { expected: usize },
    #[error("output has {extra} symbols past the last decoded block")]
    TrailingOutput { extra: usize },
    #[error("condition {0} has total weight zero")]
    ZeroCondition(u64),
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("codebook violates the Kraft inequality for condition {0}")]
    Kraft(u64),
    #[error("the source ended after {0} symbols")]
    SourceEnded(usize),
    #[error("alphabet of size {0} is too large for codeword digits")]
    AlphabetTooLarge(u32),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Ratio measurements along a prefix.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioEstimate {
    /// Strictly increasing in `input`.
    pub checkpoints: Vec<Checkpoint>,
    pub final_ratio: f64,
    /// Minimum over the checkpoints with `input >= n_total / 16`; stands in for the liminf.
    pub min_ratio: f64,
    /// Input symbols actually consumed.
    pub n_total: usize,
    /// Set when the run stopped before the requested budget.
    pub halt: Option<HaltReason>,
    /// Oracle symbols consumed, for conditional compressors.
    pub oracle_consumed: Option<usize>,
}

impl RatioEstimate {
    pub fn from_checkpoints(checkpoints: Vec<Checkpoint>, halt: Option<HaltReason>) -> Self {
        let n_total = checkpoints.last().map_or(0, |c| c.input);
        let final_ratio = checkpoints.last().map_or(0.0, Checkpoint::ratio);
        let min_ratio = checkpoints
            .iter()
            .filter(|c| c.input.saturating_mul(16) >= n_total)
            .map(Checkpoint::ratio)
            .fold(f64::INFINITY, f64::min);
        let min_ratio = if min_ratio.is_finite() { min_ratio } else { final_ratio };
        RatioEstimate { checkpoints, final_ratio, min_ratio, n_total, halt, oracle_consumed: None }
    }

    pub fn halted(&self) -> bool {
        self.halt.is_some()
    }
}

/// Collects checkpoints at powers of two and at the end of a streaming computation.
#[derive(Debug, Default)]
pub(crate) struct CheckpointLog {
    points: Vec<Checkpoint>,
    next_power: usize,
}

impl CheckpointLog {
    pub(crate) fn new() -> Self {
        CheckpointLog { points: Vec::new(), next_power: 1 }
    }

    /// Records a checkpoint when `input` has reached the next power of two.
    pub(crate) fn observe(&mut self, input: usize, output: usize) {
        if input >= self.next_power {
            self.push(input, output);
            while self.next_power <= input {
                self.next_power *= 2;
            }
        }
    }

    pub(crate) fn finish(mut self, input: usize, output: usize, halt: Option<HaltReason>) -> RatioEstimate {
        self.push(input, output);
        RatioEstimate::from_checkpoints(self.points, halt)
    }

    fn push(&mut self, input: usize, output: usize) {
        if input > 0 && self.points.last().is_none_or(|c| c.input < input) {
            self.points.push(Checkpoint { input, output });
        }
    }
}

/// Compression ratio of a 1-deterministic 2-automaton on the first `n` symbols of `x`.
pub fn plain_ratio(m: &KAutomaton, x: Box<dyn WordSource>, n: usize) -> Result<RatioEstimate, CompressionError> {
    if m.tapes() != 2 {
        return Err(AutomatonError::Tapes(m.tapes()).into());
    }
    let trace = run(m, 1, vec![x], RunOptions::new(n).without_path())?;
    Ok(RatioEstimate::from_checkpoints(trace.checkpoints, trace.halt))
}

/// Conditional ratio of a 2-deterministic 3-automaton compressing `x` with oracle `y`.
/// Only tape-1 symbols enter the denominator.
pub fn conditional_ratio(
    c: &KAutomaton,
    x: Box<dyn WordSource>,
    y: Box<dyn WordSource>,
    n: usize,
) -> Result<RatioEstimate, CompressionError> {
    if c.tapes() != 3 {
        return Err(AutomatonError::Tapes(c.tapes()).into());
    }
    let trace = run(c, 2, vec![x, y], RunOptions::new(n).without_path())?;
    let mut est = RatioEstimate::from_checkpoints(trace.checkpoints, trace.halt);
    est.oracle_consumed = Some(trace.consumed[1]);
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::fixtures;
    use crate::source::{PeriodicSource, RandomSource};
    use crate::word::{Alphabet, FiniteWord};

    #[test]
    fn copy_has_ratio_one() {
        let x = RandomSource::new(Alphabet::BINARY, 1, 0);
        let r = plain_ratio(&fixtures::copy(), Box::new(x), 4096).unwrap();
        assert_eq!(r.final_ratio, 1.0);
        assert_eq!(r.min_ratio, 1.0);
        assert_eq!(r.n_total, 4096);
        assert!(!r.halted());
    }

    #[test]
    fn grouping_transducer_on_zeros() {
        // Writes one symbol per 4 zeros read.
        let m = KAutomaton::parse(
            "automaton k=2 alphabet=2 initial=s0\ns0 0,- s1\ns1 0,- s2\ns2 0,- s3\ns3 0,0 s0\n",
        )
        .unwrap();
        let zeros = PeriodicSource::constant(Alphabet::BINARY, 0).unwrap();
        let r = plain_ratio(&m, Box::new(zeros), 1 << 12).unwrap();
        assert!(r.final_ratio <= 2.0 / 4.0);
        assert_eq!(r.final_ratio, 0.25);
    }

    #[test]
    fn oracle_reads_are_free() {
        // Reads one x symbol and three y symbols per round, writes the x symbol.
        let c = KAutomaton::parse(
            "automaton k=3 alphabet=2 initial=a\n\
             a 0,-,0 b\na 1,-,1 b\n\
             b -,0,- c\nb -,1,- c\nc -,0,- d\nc -,1,- d\nd -,0,- a\nd -,1,- a\n",
        )
        .unwrap();
        let x = RandomSource::new(Alphabet::BINARY, 2, 0);
        let y = RandomSource::new(Alphabet::BINARY, 3, 0);
        let r = conditional_ratio(&c, Box::new(x), Box::new(y), 1000).unwrap();
        assert_eq!(r.final_ratio, 1.0);
        assert_eq!(r.oracle_consumed, Some(3000));
    }

    #[test]
    fn single_step() {
        let w = FiniteWord::parse(Alphabet::BINARY, "1").unwrap();
        let r = plain_ratio(&fixtures::odd(), Box::new(PeriodicSource::new(w).unwrap()), 1).unwrap();
        assert_eq!(r.checkpoints, vec![Checkpoint { input: 1, output: 1 }]);
    }

    #[test]
    fn liminf_proxy_ignores_burn_in() {
        let cps = [(1, 0), (2, 0), (4, 4), (64, 32), (100, 60)]
            .iter()
            .map(|&(input, output)| Checkpoint { input, output })
            .collect();
        let r = RatioEstimate::from_checkpoints(cps, None);
        assert_eq!(r.min_ratio, 0.5);
        assert_eq!(r.final_ratio, 0.6);
    }
}
