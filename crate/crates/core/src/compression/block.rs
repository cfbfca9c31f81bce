//! Block-entropy conditional compressor.
//!
//! `x` and the oracle `y` are read in blocks of `k` symbols. For each pair of blocks
//! `(u, v)` the compressor writes the codeword `w(u, v)` of a prefix-free code chosen
//! for condition `v`. Codeword lengths follow `ceil(-log_b nu(u/v))`, where
//! `nu(u/v) = prod nu(u_i/v_i)` is estimated from symbol pair counts.

use std::sync::OnceLock;

use num_bigint::BigUint;

use super::{CheckpointLog, CompressionError, RatioEstimate, TABLE_CAP};
use crate::source::WordSource;
use crate::word::{decode_block, Alphabet, FiniteWord, Symbol};

/// Conditional symbol distribution `nu(a/c)` given by integer weights.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalModel {
    alphabet: Alphabet,
    k: usize,
    /// `weights[a * b + c]` is the weight of `a` given `c`.
    weights: Vec<u64>,
    totals: Vec<u64>,
    ln_weights: Vec<f64>,
    ln_totals: Vec<f64>,
}

impl ConditionalModel {
    /// Builds a model from weights indexed `a * b + c`. Zero weights are allowed, but
    /// every condition `c` needs a positive total.
    pub fn from_weights(alphabet: Alphabet, k: usize, weights: Vec<u64>) -> Result<Self, CompressionError> {
        if k == 0 {
            return Err(CompressionError::ZeroBlock);
        }
        let b = alphabet.size() as usize;
        if weights.len() != b * b {
            return Err(CompressionError::WeightCount { expected: b * b, got: weights.len() });
        }
        let totals: Vec<u64> = (0..b).map(|c| (0..b).map(|a| weights[a * b + c]).sum()).collect();
        if let Some(c) = totals.iter().position(|&t| t == 0) {
            return Err(CompressionError::ZeroCondition(c as u64));
        }
        let ln_weights = weights.iter().map(|&w| (w as f64).ln()).collect();
        let ln_totals = totals.iter().map(|&t| (t as f64).ln()).collect();
        Ok(ConditionalModel { alphabet, k, weights, totals, ln_weights, ln_totals })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn block_length(&self) -> usize {
        self.k
    }

    pub fn weight(&self, a: Symbol, c: Symbol) -> u64 {
        self.weights[(a * self.alphabet.size() + c) as usize]
    }

    /// `nu(a/c)`.
    pub fn nu(&self, a: Symbol, c: Symbol) -> f64 {
        self.weight(a, c) as f64 / self.totals[c as usize] as f64
    }

    /// `nu(u/v)` for blocks given by their base-`b` codes.
    pub fn block_nu(&self, u: u64, v: u64) -> f64 {
        (-self.neg_log(u, v) * (self.alphabet.size() as f64).ln()).exp()
    }

    /// `-log_b nu(u/v)`; infinite when the probability is zero.
    pub fn neg_log(&self, mut u: u64, mut v: u64) -> f64 {
        let b = self.alphabet.size() as u64;
        let mut acc = 0.0;
        for _ in 0..self.k {
            let (a, c) = ((u % b) as usize, (v % b) as usize);
            acc += self.ln_totals[c] - self.ln_weights[a * b as usize + c];
            u /= b;
            v /= b;
        }
        acc / (b as f64).ln()
    }

    /// `ceil(-log_b nu(u/v))`, exact, or `None` when the probability is zero.
    pub fn shannon_length(&self, u: u64, v: u64) -> Option<u32> {
        let x = self.neg_log(u, v);
        if !x.is_finite() {
            return None;
        }
        let r = x.round();
        if (x - r).abs() > 1e-6 {
            return Some(x.ceil().max(0.0) as u32);
        }
        // Too close to an integer for floating point: compare den * b^m >= num exactly.
        let b = self.alphabet.size() as u64;
        let (mut num, mut den) = (BigUint::from(1u32), BigUint::from(1u32));
        let (mut uu, mut vv) = (u, v);
        for _ in 0..self.k {
            let (a, c) = (uu % b, vv % b);
            num *= self.totals[c as usize];
            den *= self.weight(a as Symbol, c as Symbol);
            uu /= b;
            vv /= b;
        }
        let mut m = (r as u32).saturating_sub(1);
        let mut scaled = den * BigUint::from(b).pow(m);
        while scaled < num {
            scaled *= b;
            m += 1;
        }
        Some(m)
    }
}

/// Trains `nu(a/c)` on aligned symbol pairs of `x` and `y` with add-one smoothing.
pub fn train_model(x: &FiniteWord, y: &FiniteWord, k: usize) -> Result<ConditionalModel, CompressionError> {
    if x.len() != y.len() {
        return Err(crate::word::WordError::LengthMismatch(x.len(), y.len()).into());
    }
    if x.alphabet() != y.alphabet() {
        return Err(crate::word::WordError::AlphabetMismatch(x.alphabet().size(), y.alphabet().size()).into());
    }
    let b = x.alphabet().size() as usize;
    let mut weights = vec![1u64; b * b];
    for (a, c) in x.iter().zip(y.iter()) {
        weights[a as usize * b + c as usize] += 1;
    }
    ConditionalModel::from_weights(x.alphabet(), k, weights)
}

#[derive(Debug, Default)]
struct Trie {
    /// `b` slots per node: 0 empty, `LEAF | u` a codeword end, otherwise a child index.
    nodes: Vec<u32>,
    /// Block with the empty codeword, when the condition has a single possible block.
    empty: Option<u32>,
}

const LEAF: u32 = 1 << 31;

/// Per-condition prefix-free codebooks over the alphabet of the model.
#[derive(Debug)]
pub struct PrefixCode {
    alphabet: Alphabet,
    k: usize,
    blocks: usize,
    /// Indexed `v * blocks + u`; `None` for blocks of probability zero.
    codewords: Vec<Option<Box<[u8]>>>,
    bounds: Vec<Option<u32>>,
    tries: Vec<OnceLock<Trie>>,
}

impl PrefixCode {
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn block_length(&self) -> usize {
        self.k
    }

    /// Number of blocks (and of conditions), `b^k`.
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn codeword(&self, u: u64, v: u64) -> Option<&[u8]> {
        self.codewords[v as usize * self.blocks + u as usize].as_deref()
    }

    /// `ceil(-log_b nu(u/v))` as used to size the codeword, before clamping.
    pub fn shannon_length(&self, u: u64, v: u64) -> Option<u32> {
        self.bounds[v as usize * self.blocks + u as usize]
    }

    /// Exact Kraft check for condition `v`: `sum_u b^-|w(u,v)| <= 1`.
    pub fn kraft_holds(&self, v: u64) -> bool {
        let lengths = (0..self.blocks as u64).filter_map(|u| self.codeword(u, v).map(|w| w.len()));
        kraft_ok(self.alphabet.size() as u64, lengths)
    }

    fn trie(&self, v: u64) -> &Trie {
        self.tries[v as usize].get_or_init(|| {
            let b = self.alphabet.size() as usize;
            let mut t = Trie { nodes: vec![0; b], empty: None };
            for u in 0..self.blocks {
                let Some(w) = self.codeword(u as u64, v) else { continue };
                if w.is_empty() {
                    t.empty = Some(u as u32);
                    continue;
                }
                let mut node = 0usize;
                for (i, &d) in w.iter().enumerate() {
                    let slot = node * b + d as usize;
                    if i + 1 == w.len() {
                        t.nodes[slot] = LEAF | u as u32;
                    } else {
                        if t.nodes[slot] == 0 {
                            t.nodes[slot] = (t.nodes.len() / b) as u32;
                            t.nodes.extend(std::iter::repeat_n(0, b));
                        }
                        node = t.nodes[slot] as usize;
                    }
                }
            }
            t
        })
    }

    /// Decodes one block under condition `v` starting at `pos`; returns the block and
    /// the position after its codeword.
    pub fn decode_block(&self, output: &FiniteWord, pos: usize, v: u64) -> Result<(u64, usize), CompressionError> {
        let t = self.trie(v);
        if let Some(u) = t.empty {
            return Ok((u as u64, pos));
        }
        let b = self.alphabet.size() as usize;
        let (mut node, mut p) = (0usize, pos);
        loop {
            if p >= output.len() {
                return Err(CompressionError::Truncated { expected: 0 });
            }
            let slot = t.nodes[node * b + output.get0(p) as usize];
            p += 1;
            if slot == 0 {
                return Err(CompressionError::DeadEnd { position: p });
            }
            if slot & LEAF != 0 {
                return Ok(((slot & !LEAF) as u64, p));
            }
            node = slot as usize;
        }
    }
}

/// `sum b^-l <= 1`, evaluated exactly by carrying ceilings from the longest length down.
fn kraft_ok(b: u64, lengths: impl Iterator<Item = usize>) -> bool {
    let mut counts: Vec<u64> = Vec::new();
    for l in lengths {
        if counts.len() <= l {
            counts.resize(l + 1, 0);
        }
        counts[l] += 1;
    }
    let mut carry = 0u64;
    for l in (0..counts.len()).rev() {
        carry = counts[l] + carry.div_ceil(b);
    }
    carry <= 1
}

/// Builds the codebooks: lengths `ceil(-log_b nu(u/v))`, raised to 1 unless `v` admits a
/// single block, then canonical codewords assigned in order of length.
pub fn build_prefix_code(model: &ConditionalModel) -> Result<PrefixCode, CompressionError> {
    let alphabet = model.alphabet();
    let b = alphabet.size();
    if b > 256 {
        return Err(CompressionError::AlphabetTooLarge(b));
    }
    let k = model.block_length();
    let blocks = alphabet
        .pow(k)
        .filter(|&n| (n as u128) * (n as u128) <= TABLE_CAP as u128)
        .ok_or(CompressionError::TooLarge {
            what: "codebook entries",
            size: (b as u128).saturating_pow(2 * k as u32),
            cap: TABLE_CAP,
        })? as usize;
    let mut codewords = Vec::with_capacity(blocks * blocks);
    let mut bounds = Vec::with_capacity(blocks * blocks);
    for v in 0..blocks as u64 {
        let lens: Vec<Option<u32>> = (0..blocks as u64).map(|u| model.shannon_length(u, v)).collect();
        let support = lens.iter().filter(|l| l.is_some()).count();
        let mut order: Vec<(u32, u64)> = lens
            .iter()
            .enumerate()
            .filter_map(|(u, l)| l.map(|l| (if support == 1 { 0 } else { l.max(1) }, u as u64)))
            .collect();
        order.sort_unstable();
        if !kraft_ok(b as u64, order.iter().map(|&(l, _)| l as usize)) {
            return Err(CompressionError::Kraft(v));
        }
        let mut words: Vec<Option<Box<[u8]>>> = vec![None; blocks];
        let mut code: Vec<u8> = Vec::new();
        let mut first = true;
        for &(l, u) in &order {
            if !first {
                increment(&mut code, b as u8).ok_or(CompressionError::Kraft(v))?;
            }
            first = false;
            code.resize(l as usize, 0);
            words[u as usize] = Some(code.clone().into_boxed_slice());
        }
        codewords.extend(words);
        bounds.extend(lens);
    }
    let tries = (0..blocks).map(|_| OnceLock::new()).collect();
    Ok(PrefixCode { alphabet, k, blocks, codewords, bounds, tries })
}

/// Adds one to a base-`b` digit string; `None` on overflow.
fn increment(code: &mut [u8], b: u8) -> Option<()> {
    for d in code.iter_mut().rev() {
        if *d + 1 < b {
            *d += 1;
            return Some(());
        }
        *d = 0;
    }
    None
}

fn next_block(src: &mut dyn WordSource, k: usize, b: u64, read: usize) -> Result<u64, CompressionError> {
    let mut code = 0u64;
    for i in 0..k {
        let s = src.next_symbol().ok_or(CompressionError::SourceEnded(read + i))?;
        code = code * b + s as u64;
    }
    Ok(code)
}

/// Encodes `x[1..n]` given `y[1..n]`; `n` must be a multiple of the block length.
pub fn cond_encode(
    mut x: Box<dyn WordSource>,
    mut y: Box<dyn WordSource>,
    code: &PrefixCode,
    n: usize,
) -> Result<(FiniteWord, RatioEstimate), CompressionError> {
    let k = code.block_length();
    if !n.is_multiple_of(k) {
        return Err(CompressionError::NotMultiple { n, k });
    }
    let b = code.alphabet().size() as u64;
    let mut out = FiniteWord::with_capacity(code.alphabet(), n + n / 8);
    let mut log = CheckpointLog::new();
    for i in (0..n).step_by(k) {
        let u = next_block(&mut *x, k, b, i)?;
        let v = next_block(&mut *y, k, b, i)?;
        let w = code.codeword(u, v).ok_or(CompressionError::Unencodable { block: u, condition: v })?;
        for &d in w {
            out.push(d as Symbol)?;
        }
        if i + k < n {
            log.observe(i + k, out.len());
        }
    }
    let est = log.finish(n, out.len(), None);
    Ok((out, est))
}

/// Inverts [`cond_encode`] given the same oracle. A wrong oracle either stops at a
/// dead end or yields a different word; the latter cannot be detected.
pub fn cond_decode(
    output: &FiniteWord,
    mut y: Box<dyn WordSource>,
    code: &PrefixCode,
    n: usize,
) -> Result<FiniteWord, CompressionError> {
    let k = code.block_length();
    if !n.is_multiple_of(k) {
        return Err(CompressionError::NotMultiple { n, k });
    }
    let alphabet = code.alphabet();
    let b = alphabet.size() as u64;
    let mut x = FiniteWord::with_capacity(alphabet, n);
    let mut pos = 0;
    for i in (0..n).step_by(k) {
        let v = next_block(&mut *y, k, b, i)?;
        let (u, next) = code.decode_block(output, pos, v).map_err(|e| match e {
            CompressionError::Truncated { .. } => CompressionError::Truncated { expected: n },
            e => e,
        })?;
        pos = next;
        for s in decode_block(alphabet, u, k) {
            x.push(s)?;
        }
    }
    if pos != output.len() {
        return Err(CompressionError::TrailingOutput { extra: output.len() - pos });
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{FiniteSource, RandomSource};

    fn uniform(k: usize) -> ConditionalModel {
        ConditionalModel::from_weights(Alphabet::BINARY, k, vec![1; 4]).unwrap()
    }

    #[test]
    fn uniform_model_gives_identity_lengths() {
        let code = build_prefix_code(&uniform(3)).unwrap();
        for v in 0..8 {
            assert!(code.kraft_holds(v));
            for u in 0..8 {
                assert_eq!(code.codeword(u, v).unwrap().len(), 3);
                assert_eq!(code.shannon_length(u, v), Some(3));
            }
        }
        // Canonical assignment in block order reproduces the blocks themselves.
        assert_eq!(code.codeword(5, 0).unwrap(), &[1, 0, 1]);
    }

    #[test]
    fn deterministic_condition_uses_empty_codeword() {
        // nu(a/c) = 1 if a == c else 0.
        let m = ConditionalModel::from_weights(Alphabet::BINARY, 2, vec![1, 0, 0, 1]).unwrap();
        let code = build_prefix_code(&m).unwrap();
        assert_eq!(code.codeword(2, 2).unwrap().len(), 0);
        assert!(code.codeword(1, 2).is_none());
        let y = FiniteWord::parse(Alphabet::BINARY, "011011").unwrap();
        let (out, est) = cond_encode(Box::new(FiniteSource::new(y.clone())), Box::new(FiniteSource::new(y.clone())), &code, 6).unwrap();
        assert_eq!(out.len(), 0);
        assert_eq!(est.final_ratio, 0.0);
        assert_eq!(cond_decode(&out, Box::new(FiniteSource::new(y.clone())), &code, 6).unwrap(), y);
    }

    #[test]
    fn exact_length_at_integer_boundary() {
        // nu(a/c) = 1/4 for b = 4 gives exactly 1 per symbol.
        let b4 = Alphabet::new(4).unwrap();
        let m = ConditionalModel::from_weights(b4, 3, vec![1; 16]).unwrap();
        for (u, v) in [(0, 0), (17, 63), (63, 5)] {
            assert_eq!(m.shannon_length(u, v), Some(3));
        }
        // Weights 1:3 over b = 2: -log2(3/4) = 0.415..., so a block of 4 likely symbols
        // has length ceil(1.66) = 2.
        let m = ConditionalModel::from_weights(Alphabet::BINARY, 4, vec![3, 1, 1, 3]).unwrap();
        assert_eq!(m.shannon_length(0, 0), Some(2));
        assert_eq!(m.shannon_length(15, 0), Some(8));
    }

    #[test]
    fn kraft_carry() {
        assert!(kraft_ok(2, [1, 2, 2].into_iter()));
        assert!(!kraft_ok(2, [1, 2, 2, 3].into_iter()));
        assert!(kraft_ok(3, [1, 1, 2, 2, 2].into_iter()));
        assert!(!kraft_ok(2, [0, 1].into_iter()));
        assert!(kraft_ok(2, [0].into_iter()));
    }

    #[test]
    fn round_trip_trained_model() {
        let x = RandomSource::new(Alphabet::BINARY, 11, 0);
        let y = RandomSource::new(Alphabet::BINARY, 12, 0);
        let m = train_model(&x.prefix(4000).unwrap(), &y.prefix(4000).unwrap(), 4).unwrap();
        let code = build_prefix_code(&m).unwrap();
        let (out, _) = cond_encode(x.restart(), y.restart(), &code, 4000).unwrap();
        assert_eq!(cond_decode(&out, y.restart(), &code, 4000).unwrap(), x.prefix(4000).unwrap());
        assert!(cond_encode(x.restart(), y.restart(), &code, 4001).is_err());
    }

    #[test]
    fn normalization() {
        let x = RandomSource::new(Alphabet::new(3).unwrap(), 1, 0).prefix(999).unwrap();
        let y = RandomSource::new(Alphabet::new(3).unwrap(), 2, 0).prefix(999).unwrap();
        let m = train_model(&x, &y, 2).unwrap();
        for c in 0..3 {
            let s: f64 = (0..3).map(|a| m.nu(a, c)).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }
}
