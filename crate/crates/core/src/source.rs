//! Deterministic generators of unbounded symbol streams.
//!
//! A [`WordSource`] is a single-consumer cursor over an infinite (or, for
//! file-backed sources, finite) word. [`WordSource::restart`] returns a fresh
//! cursor positioned at symbol 1, so `prefix(n)` never disturbs the caller's
//! cursor and `prefix(n)` is always a prefix of `prefix(m)` for `n ≤ m`.
//!
//! Random sources use ChaCha8 (RFC 7539 block function reduced to 8 rounds,
//! as implemented by `rand_chacha`), keyed with `seed_from_u64(seed)` and
//! selecting stream `stream`. Symbols are drawn as follows:
//!
//! * binary alphabet: each 64-bit output is emitted least significant bit first;
//! * alphabet of size `b > 2`: 32-bit outputs `v` are rejected while
//!   `v ≥ 2^32 - (2^32 mod b)`, otherwise `v mod b` is emitted;
//! * Bernoulli(p): a 64-bit output `v` yields symbol 1 iff `(v >> 11) · 2^-53 < p`.

use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::word::{Alphabet, FiniteWord, Symbol, WordError};

pub trait WordSource: Send {
    fn alphabet(&self) -> Alphabet;

    /// Next symbol, or `None` when a finite source is exhausted.
    fn next_symbol(&mut self) -> Option<Symbol>;

    /// A fresh cursor over the same word, positioned at symbol 1.
    fn restart(&self) -> Box<dyn WordSource>;

    /// Consumes the next `n` symbols.
    fn take_word(&mut self, n: usize) -> Result<FiniteWord, WordError> {
        let mut w = FiniteWord::with_capacity(self.alphabet(), n);
        for i in 0..n {
            match self.next_symbol() {
                Some(s) => w.push(s)?,
                None => return Err(WordError::SourceExhausted { requested: n, available: i }),
            }
        }
        Ok(w)
    }

    /// `x[1..n]`, independent of this cursor's position.
    fn prefix(&self, n: usize) -> Result<FiniteWord, WordError> {
        self.restart().take_word(n)
    }
}

impl WordSource for Box<dyn WordSource> {
    fn alphabet(&self) -> Alphabet {
        (**self).alphabet()
    }

    fn next_symbol(&mut self) -> Option<Symbol> {
        (**self).next_symbol()
    }

    fn restart(&self) -> Box<dyn WordSource> {
        (**self).restart()
    }
}

/// The periodic word `p p p ...`.
#[derive(Clone, Debug)]
pub struct PeriodicSource {
    period: Arc<FiniteWord>,
    pos: usize,
}

impl PeriodicSource {
    pub fn new(period: FiniteWord) -> Result<Self, WordError> {
        if period.is_empty() {
            return Err(WordError::EmptyPattern);
        }
        Ok(PeriodicSource { period: Arc::new(period), pos: 0 })
    }

    /// `s^ω`.
    pub fn constant(alphabet: Alphabet, s: Symbol) -> Result<Self, WordError> {
        Self::new(FiniteWord::new(alphabet, [s])?)
    }
}

impl WordSource for PeriodicSource {
    fn alphabet(&self) -> Alphabet {
        self.period.alphabet()
    }

    fn next_symbol(&mut self) -> Option<Symbol> {
        let s = self.period.get0(self.pos);
        self.pos = (self.pos + 1) % self.period.len();
        Some(s)
    }

    fn restart(&self) -> Box<dyn WordSource> {
        Box::new(PeriodicSource { period: Arc::clone(&self.period), pos: 0 })
    }
}

/// A finite word exposed as a source; it runs out after its last symbol.
/// Used for file-backed words.
#[derive(Clone, Debug)]
pub struct FiniteSource {
    word: Arc<FiniteWord>,
    pos: usize,
}

impl FiniteSource {
    pub fn new(word: FiniteWord) -> Self {
        FiniteSource { word: Arc::new(word), pos: 0 }
    }

    pub fn word(&self) -> &FiniteWord {
        &self.word
    }
}

impl WordSource for FiniteSource {
    fn alphabet(&self) -> Alphabet {
        self.word.alphabet()
    }

    fn next_symbol(&mut self) -> Option<Symbol> {
        let s = self.word.at(self.pos + 1)?;
        self.pos += 1;
        Some(s)
    }

    fn restart(&self) -> Box<dyn WordSource> {
        Box::new(FiniteSource { word: Arc::clone(&self.word), pos: 0 })
    }
}

/// Uniform i.i.d. symbols from ChaCha8.
#[derive(Clone, Debug)]
pub struct RandomSource {
    alphabet: Alphabet,
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
    bits: u64,
    bits_left: u32,
}

impl RandomSource {
    pub fn new(alphabet: Alphabet, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RandomSource { alphabet, seed, stream, rng, bits: 0, bits_left: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl WordSource for RandomSource {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn next_symbol(&mut self) -> Option<Symbol> {
        let b = self.alphabet.size();
        if b == 2 {
            if self.bits_left == 0 {
                self.bits = self.rng.next_u64();
                self.bits_left = 64;
            }
            let s = (self.bits & 1) as Symbol;
            self.bits >>= 1;
            self.bits_left -= 1;
            return Some(s);
        }
        let zone = u32::MAX - (u32::MAX % b + 1) % b;
        loop {
            let v = self.rng.next_u32();
            if v <= zone {
                return Some(v % b);
            }
        }
    }

    fn restart(&self) -> Box<dyn WordSource> {
        Box::new(RandomSource::new(self.alphabet, self.seed, self.stream))
    }
}

/// Binary i.i.d. symbols with `P(1) = p`.
#[derive(Clone, Debug)]
pub struct BernoulliSource {
    p: f64,
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl BernoulliSource {
    pub fn new(p: f64, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        BernoulliSource { p, seed, stream, rng }
    }
}

impl WordSource for BernoulliSource {
    fn alphabet(&self) -> Alphabet {
        Alphabet::BINARY
    }

    fn next_symbol(&mut self) -> Option<Symbol> {
        let v = self.rng.next_u64() >> 11;
        let u = v as f64 * (1.0 / (1u64 << 53) as f64);
        Some((u < self.p) as Symbol)
    }

    fn restart(&self) -> Box<dyn WordSource> {
        Box::new(BernoulliSource::new(self.p, self.seed, self.stream))
    }
}

/// Every `step`-th symbol of an inner source, starting at position `t`
/// (1-indexed). `even` is `(2, 2)`, `odd` is `(2, 1)`. Pulls `step` symbols
/// per emitted symbol and never materializes a prefix.
pub struct TrackSource {
    inner: Box<dyn WordSource>,
    step: usize,
    t: usize,
}

impl TrackSource {
    pub fn new(inner: Box<dyn WordSource>, step: usize, t: usize) -> Self {
        assert!(step >= 1 && (1..=step).contains(&t));
        TrackSource { inner, step, t }
    }

    pub fn even(inner: Box<dyn WordSource>) -> Self {
        Self::new(inner, 2, 2)
    }

    pub fn odd(inner: Box<dyn WordSource>) -> Self {
        Self::new(inner, 2, 1)
    }
}

impl WordSource for TrackSource {
    fn alphabet(&self) -> Alphabet {
        self.inner.alphabet()
    }

    fn next_symbol(&mut self) -> Option<Symbol> {
        let mut keep = None;
        for j in 1..=self.step {
            let s = self.inner.next_symbol()?;
            if j == self.t {
                keep = Some(s);
            }
        }
        keep
    }

    fn restart(&self) -> Box<dyn WordSource> {
        Box::new(TrackSource::new(self.inner.restart(), self.step, self.t))
    }
}

/// `x ∨ y = x[1] y[1] x[2] y[2] ...`.
pub struct JoinSource {
    left: Box<dyn WordSource>,
    right: Box<dyn WordSource>,
    right_next: bool,
}

impl JoinSource {
    pub fn new(left: Box<dyn WordSource>, right: Box<dyn WordSource>) -> Result<Self, WordError> {
        if left.alphabet() != right.alphabet() {
            return Err(WordError::AlphabetMismatch(left.alphabet().size(), right.alphabet().size()));
        }
        Ok(JoinSource { left, right, right_next: false })
    }
}

impl WordSource for JoinSource {
    fn alphabet(&self) -> Alphabet {
        self.left.alphabet()
    }

    fn next_symbol(&mut self) -> Option<Symbol> {
        let s = if self.right_next { self.right.next_symbol() } else { self.left.next_symbol() };
        self.right_next = !self.right_next;
        s
    }

    fn restart(&self) -> Box<dyn WordSource> {
        Box::new(JoinSource { left: self.left.restart(), right: self.right.restart(), right_next: false })
    }
}

/// Symbol-wise sum modulo the alphabet size; over `{0,1}` this is XOR.
/// The second source may be binary noise over a larger alphabet.
pub struct SumSource {
    base: Box<dyn WordSource>,
    noise: Box<dyn WordSource>,
}

impl SumSource {
    pub fn new(base: Box<dyn WordSource>, noise: Box<dyn WordSource>) -> Result<Self, WordError> {
        if noise.alphabet().size() > base.alphabet().size() {
            return Err(WordError::AlphabetMismatch(base.alphabet().size(), noise.alphabet().size()));
        }
        Ok(SumSource { base, noise })
    }
}

impl WordSource for SumSource {
    fn alphabet(&self) -> Alphabet {
        self.base.alphabet()
    }

    fn next_symbol(&mut self) -> Option<Symbol> {
        let a = self.base.next_symbol()?;
        let e = self.noise.next_symbol()?;
        Some((a + e) % self.base.alphabet().size())
    }

    fn restart(&self) -> Box<dyn WordSource> {
        Box::new(SumSource { base: self.base.restart(), noise: self.noise.restart() })
    }
}
