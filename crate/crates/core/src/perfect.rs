//! Perfect words and the self-similar normal word `x` with `x[2n] = x[n]`.
//!
//! A word `w` is ℓ-perfect when `ℓ` divides `|w|` and every block of length
//! `ℓ` has exactly `|w| / (ℓ b^ℓ)` aligned occurrences. The doubling
//! extension turns an ℓ-perfect `w` into a 2ℓ-perfect `z` of twice the length
//! whose even track is `w`; iterating it yields stages `w_1, w_2, ...` with
//! `even(w_{n+1}) = w_n`, and `x = 1 1 w_1 w_2 w_3 ...`.
//!
//! Which free track is glued to which occurrence of a block is a free choice.
//! Here the occurrences of each block value are taken left to right and given
//! the free-track contents in lexicographic order, cycling.
//!
//! Alphabets of size `k > 2` use the analogous `k`-fold construction
//! (`x[kn] = x[n]`): the block of `k` tracks around each copied symbol is
//! filled the same way, and the layout runs `k - 1` stage chains side by side
//! so each segment `(k^j, k^(j+1)]` has the right length. This generalization
//! is our own layout; only its perfection and self-similarity are checked.

use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::normality::block_counts;
use crate::source::WordSource;
use crate::word::{block_code, decode_block, track, Alphabet, FiniteWord, Symbol, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PerfectError {
    #[error("word is not {ell}-perfect")]
    NotPerfect { ell: usize },
    #[error("|w| = {len} is not a multiple of {required}")]
    Divisibility { len: usize, required: u128 },
    #[error("block length {0} must be even")]
    OddBlockLength(usize),
    #[error("block length must be at least 1")]
    ZeroBlockLength,
    #[error("at least {min} stages are required, got {got}")]
    TooFewStages { min: usize, got: usize },
    #[error("base must be at least 2, got {0}")]
    BadBase(u32),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Whether every block of length `ell` has exactly `|w| / (ell b^ell)` aligned occurrences.
pub fn is_perfect(w: &FiniteWord, ell: usize) -> bool {
    if ell == 0 || w.is_empty() || !w.len().is_multiple_of(ell) {
        return false;
    }
    let blocks = (w.len() / ell) as u64;
    let kinds = match w.alphabet().pow(ell) {
        Some(k) if k <= blocks => k,
        _ => return false,
    };
    if !blocks.is_multiple_of(kinds) {
        return false;
    }
    let per = blocks / kinds;
    match block_counts(w, ell, true) {
        Ok(t) => t.counts().iter().all(|&c| c == per),
        Err(_) => false,
    }
}

/// `z` of length `factor·|w|` with `track(z, factor, factor) = w`; each
/// aligned `factor·ell` block of `z` interleaves `factor - 1` free tracks with
/// one block of `w`. Requires `w` ell-perfect and `|w| ≡ 0 mod ell·b^(factor·ell)`.
pub(crate) fn track_extend(w: &FiniteWord, ell: usize, factor: usize) -> Result<FiniteWord, PerfectError> {
    if ell == 0 {
        return Err(PerfectError::ZeroBlockLength);
    }
    let alphabet = w.alphabet();
    let b = alphabet.size() as u128;
    let required = (ell as u128).saturating_mul(b.saturating_pow((factor * ell) as u32));
    if w.is_empty() || !(w.len() as u128).is_multiple_of(required) {
        return Err(PerfectError::Divisibility { len: w.len(), required });
    }
    if !is_perfect(w, ell) {
        return Err(PerfectError::NotPerfect { ell });
    }
    let r = w.len() / ell;
    let free_len = (factor - 1) * ell;
    let free_kinds = alphabet.pow(free_len).expect("bounded by |w|");
    let block_kinds = alphabet.pow(ell).expect("bounded by |w|") as usize;
    let mut seen = vec![0u64; block_kinds];
    let mut z = FiniteWord::with_capacity(alphabet, factor * w.len());
    for blk in 0..r {
        let u: Vec<Symbol> = (0..ell).map(|j| w.get0(blk * ell + j)).collect();
        let code = block_code(alphabet, u.iter().copied()) as usize;
        let free = decode_block(alphabet, seen[code] % free_kinds, free_len);
        seen[code] += 1;
        for s in 0..ell {
            for t in 0..factor - 1 {
                z.push(free[t * ell + s])?;
            }
            z.push(u[s])?;
        }
    }
    Ok(z)
}

/// Doubling extension: a 2ℓ-perfect `z` with `|z| = 2|w|` and `even(z) = w`.
/// Requires `w` ℓ-perfect and `|w| ≡ 0 mod ℓ·b^(2ℓ)`.
pub fn double_length_extend(w: &FiniteWord, ell: usize) -> Result<FiniteWord, PerfectError> {
    track_extend(w, ell, 2)
}

/// Same-length extension for even ℓ: an ℓ-perfect `z` with `|z| = 2|w|` and
/// `even(z) = w`, obtained by doubling at `ℓ/2`.
pub fn same_length_extend(w: &FiniteWord, ell: usize) -> Result<FiniteWord, PerfectError> {
    if ell == 0 {
        return Err(PerfectError::ZeroBlockLength);
    }
    if !ell.is_multiple_of(2) {
        return Err(PerfectError::OddBlockLength(ell));
    }
    if !is_perfect(w, ell) {
        return Err(PerfectError::NotPerfect { ell });
    }
    double_length_extend(w, ell / 2)
}

/// 1-perfect `z` of length `factor·|w|` whose last track is `w`; the free
/// positions cycle through the alphabet. Used by the `k > 2` chains before the
/// first `k`-fold step is available.
fn balanced_fill(w: &FiniteWord, factor: usize) -> Result<FiniteWord, PerfectError> {
    let alphabet = w.alphabet();
    let b = alphabet.size();
    let mut z = FiniteWord::with_capacity(alphabet, factor * w.len());
    let mut next: Symbol = 0;
    for s in w.iter() {
        for _ in 0..factor - 1 {
            z.push(next)?;
            next = (next + 1) % b;
        }
        z.push(s)?;
    }
    if !is_perfect(&z, 1) {
        return Err(PerfectError::NotPerfect { ell: 1 });
    }
    Ok(z)
}

/// One stage `(n, w_n, ℓ_n)` of the perfect-word sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerfectStage {
    pub n: usize,
    pub word: FiniteWord,
    pub ell: usize,
}

/// Advances a stage: multiply ℓ by `factor` when `ℓ·b^(factor·ℓ)` divides
/// `|w|`, otherwise keep ℓ (extending at `ℓ/factor`).
fn next_stage(stage: &PerfectStage, factor: usize) -> Result<PerfectStage, PerfectError> {
    let w = &stage.word;
    let ell = stage.ell;
    let b = w.alphabet().size() as u128;
    let grow = b
        .checked_pow((factor * ell) as u32)
        .and_then(|p| p.checked_mul(ell as u128))
        .is_some_and(|m| (w.len() as u128).is_multiple_of(m));
    let (word, new_ell) = if grow {
        (track_extend(w, ell, factor)?, ell * factor)
    } else if ell.is_multiple_of(factor) {
        (track_extend(w, ell / factor, factor)?, ell)
    } else if ell == 1 {
        (balanced_fill(w, factor)?, 1)
    } else {
        return Err(PerfectError::NotPerfect { ell });
    };
    Ok(PerfectStage { n: stage.n + 1, word, ell: new_ell })
}

/// The binary sequence `(w_n, ℓ_n)` for `n = 1..=n_max`, starting from
/// `w_1 = 01, ℓ_1 = 1` and `w_2 = 1001, ℓ_2 = 1`.
pub fn build_sequence(n_max: usize) -> Result<Vec<PerfectStage>, PerfectError> {
    if n_max < 2 {
        return Err(PerfectError::TooFewStages { min: 2, got: n_max });
    }
    let mut stages = vec![
        PerfectStage { n: 1, word: FiniteWord::parse(Alphabet::BINARY, "01")?, ell: 1 },
        PerfectStage { n: 2, word: FiniteWord::parse(Alphabet::BINARY, "1001")?, ell: 1 },
    ];
    while stages.len() < n_max {
        let next = next_stage(stages.last().expect("nonempty"), 2)?;
        stages.push(next);
    }
    Ok(stages)
}

/// Stage chains of a base-`b` construction; chain `j` (0-based) starts from
/// the rotation of `0 1 .. b-1` by `j`. Binary uses the literal first stages.
#[derive(Debug)]
struct StageCache {
    base: Alphabet,
    /// `stages[n - 1][chain]` for `n ≥ 1`.
    stages: Vec<Arc<Vec<PerfectStage>>>,
}

impl StageCache {
    fn new(base: Alphabet) -> Result<Self, PerfectError> {
        let b = base.size();
        let first = if b == 2 {
            build_sequence(2)?.into_iter().map(|s| vec![s]).collect()
        } else {
            let chains = (0..b - 1)
                .map(|j| {
                    let w = FiniteWord::new(base, (0..b).map(|i| (i + j) % b))?;
                    Ok(PerfectStage { n: 1, word: w, ell: 1 })
                })
                .collect::<Result<Vec<_>, PerfectError>>()?;
            vec![chains]
        };
        Ok(StageCache { base, stages: first.into_iter().map(Arc::new).collect() })
    }

    fn stage(&mut self, n: usize) -> Result<Arc<Vec<PerfectStage>>, PerfectError> {
        let factor = self.base.size() as usize;
        while self.stages.len() < n {
            let last = self.stages.last().expect("nonempty");
            let next = last.iter().map(|s| next_stage(s, factor)).collect::<Result<Vec<_>, _>>()?;
            self.stages.push(Arc::new(next));
        }
        Ok(Arc::clone(&self.stages[n - 1]))
    }
}

/// The self-similar word over an alphabet of size `base`, with
/// `x[base·n] = x[n]` for every `n ≥ 1`. For `base = 2` this is
/// `x = 1 1 w_1 w_2 w_3 ...` with `x[2^k+1 .. 2^(k+1)] = w_k`.
///
/// Stages are built on demand and shared between restarted cursors.
pub struct SelfSimilarSource {
    cache: Arc<Mutex<StageCache>>,
    base: Alphabet,
    /// Number of symbols emitted so far.
    emitted: usize,
    /// Segment currently being read: stage index and its chain words.
    segment: Option<(usize, Arc<Vec<PerfectStage>>)>,
    offset: usize,
}

impl SelfSimilarSource {
    pub fn new(base: u32) -> Result<Self, PerfectError> {
        let base = Alphabet::new(base).map_err(|_| PerfectError::BadBase(base))?;
        let cache = Arc::new(Mutex::new(StageCache::new(base)?));
        Ok(SelfSimilarSource { cache, base, emitted: 0, segment: None, offset: 0 })
    }

    /// The binary construction.
    pub fn binary() -> Self {
        Self::new(2).expect("base 2 is valid")
    }

    fn stage(&self, n: usize) -> Arc<Vec<PerfectStage>> {
        self.cache
            .lock()
            .expect("stage cache poisoned")
            .stage(n)
            .expect("stage construction preserves its own preconditions")
    }

    /// Last symbol of each chain's first stage; segment 0 is positions `2..=b`.
    fn seed_symbols(&self) -> Vec<Symbol> {
        let first = self.stage(1);
        first.iter().map(|s| s.word.get0(s.word.len() - 1)).collect()
    }
}

impl WordSource for SelfSimilarSource {
    fn alphabet(&self) -> Alphabet {
        self.base
    }

    fn next_symbol(&mut self) -> Option<Symbol> {
        let b = self.base.size() as usize;
        let pos = self.emitted + 1;
        self.emitted += 1;
        if pos <= b {
            // x[1] = x[b] closes the self-similarity at n = 1.
            let seeds = self.seed_symbols();
            let idx = if pos == 1 { b - 2 } else { pos - 2 };
            return Some(seeds[idx]);
        }
        loop {
            if let Some((_, chains)) = &self.segment {
                let chain_len = chains[0].word.len();
                if self.offset < chain_len * chains.len() {
                    let c = self.offset / chain_len;
                    let s = chains[c].word.get0(self.offset % chain_len);
                    self.offset += 1;
                    return Some(s);
                }
            }
            let next = self.segment.as_ref().map_or(1, |(n, _)| n + 1);
            self.segment = Some((next, self.stage(next)));
            self.offset = 0;
        }
    }

    fn restart(&self) -> Box<dyn WordSource> {
        Box::new(SelfSimilarSource {
            cache: Arc::clone(&self.cache),
            base: self.base,
            emitted: 0,
            segment: None,
            offset: 0,
        })
    }
}

/// Checks `track(w_{n+1}, b, b) = w_n` between consecutive stages.
pub fn tracks_chain(stages: &[PerfectStage], factor: usize) -> bool {
    stages.windows(2).all(|p| track(&p[1].word, factor, factor) == p[0].word)
}
