//! Block statistics of finite prefixes.
//!
//! Normality is a limit property; everything here measures a finite prefix.
//! Verdict flags in [`NormalityReport`] are heuristics against configurable
//! thresholds, not decisions.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::word::{block_code, decode_block, Alphabet, FiniteWord, Symbol, WordError};

/// Largest `b^ℓ` (dense table size) or `b^k` (enumeration size) accepted.
pub const ENUMERATION_CAP: u64 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("block length must be at least 1")]
    ZeroBlockLength,
    #[error("block length {ell} exceeds word length {len}")]
    BlockLongerThanWord { ell: usize, len: usize },
    #[error("{what} needs {size} entries, above the cap of {cap}")]
    TooLarge { what: &'static str, size: u128, cap: u64 },
    #[error("epsilon {eps} is outside [{lo}, {hi}]")]
    EpsilonOutOfRange { eps: f64, lo: f64, hi: f64 },
    #[error("r must satisfy 1 <= r <= k (r = {r}, k = {k})")]
    BadLengths { k: usize, r: usize },
    #[error(transparent)]
    Word(#[from] WordError),
}

fn dense_size(alphabet: Alphabet, ell: usize, what: &'static str) -> Result<usize, StatsError> {
    match alphabet.pow(ell) {
        Some(n) if n <= ENUMERATION_CAP => Ok(n as usize),
        other => Err(StatsError::TooLarge {
            what,
            size: other.map(u128::from).unwrap_or(u128::MAX),
            cap: ENUMERATION_CAP,
        }),
    }
}

/// Counts of every block of one length over a word prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockCountTable {
    alphabet: Alphabet,
    block_length: usize,
    aligned: bool,
    counts: Vec<u64>,
    total_positions: u64,
}

impl BlockCountTable {
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn aligned(&self) -> bool {
        self.aligned
    }

    /// `⌊N/ℓ⌋` when aligned, `N - ℓ + 1` otherwise.
    pub fn total_positions(&self) -> u64 {
        self.total_positions
    }

    pub fn count(&self, u: &FiniteWord) -> u64 {
        if u.len() != self.block_length || u.alphabet() != self.alphabet {
            return 0;
        }
        self.counts[block_code(self.alphabet, u.iter()) as usize]
    }

    /// Count of the block with base-`b` code `code` (lexicographic index).
    pub fn count_by_index(&self, code: usize) -> u64 {
        self.counts[code]
    }

    pub fn frequency(&self, u: &FiniteWord) -> f64 {
        self.count(u) as f64 / self.total_positions as f64
    }

    /// All blocks in lexicographic order with their counts, including zeros.
    pub fn iter(&self) -> impl Iterator<Item = (FiniteWord, u64)> + '_ {
        self.counts.iter().enumerate().map(move |(code, &c)| {
            let syms = decode_block(self.alphabet, code as u64, self.block_length);
            (FiniteWord::new(self.alphabet, syms).expect("decoded symbols are in range"), c)
        })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `max_u |count(u)/total - b^-ℓ|`, with the first maximizing block.
    pub fn max_deviation(&self) -> (f64, usize) {
        let expected = 1.0 / self.counts.len() as f64;
        let total = self.total_positions.max(1) as f64;
        let mut best = (0.0f64, 0usize);
        for (code, &c) in self.counts.iter().enumerate() {
            let d = (c as f64 / total - expected).abs();
            if d > best.0 {
                best = (d, code);
            }
        }
        best
    }
}

/// Aligned or overlapping counts of all blocks of length `ell` in one pass.
pub fn block_counts(w: &FiniteWord, ell: usize, aligned: bool) -> Result<BlockCountTable, StatsError> {
    if ell == 0 {
        return Err(StatsError::ZeroBlockLength);
    }
    if ell > w.len() {
        return Err(StatsError::BlockLongerThanWord { ell, len: w.len() });
    }
    let alphabet = w.alphabet();
    let size = dense_size(alphabet, ell, "block count table")?;
    let mut counts = vec![0u64; size];
    let total_positions;
    if aligned {
        let blocks = w.len() / ell;
        for blk in 0..blocks {
            let code = block_code(alphabet, (0..ell).map(|j| w.get0(blk * ell + j)));
            counts[code as usize] += 1;
        }
        total_positions = blocks as u64;
    } else {
        let b = alphabet.size() as u64;
        let lead = size as u64 / b;
        let mut code = 0u64;
        for (idx, s) in w.iter().enumerate() {
            if idx >= ell {
                code -= w.get0(idx - ell) as u64 * lead;
            }
            code = code * b + s as u64;
            if idx + 1 >= ell {
                counts[code as usize] += 1;
            }
        }
        total_positions = (w.len() - ell + 1) as u64;
    }
    Ok(BlockCountTable { alphabet, block_length: ell, aligned, counts, total_positions })
}

/// `max_u | alocc(w,u) / ⌊|w|/ℓ⌋ - b^-ℓ |`; a trailing partial block is dropped.
pub fn discrepancy(w: &FiniteWord, ell: usize) -> Result<f64, StatsError> {
    Ok(block_counts(w, ell, true)?.max_deviation().0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LengthStats {
    pub ell: usize,
    pub discrepancy: f64,
    /// Block attaining the discrepancy (first in lexicographic order).
    pub worst_block: FiniteWord,
    /// Largest aligned frequency `alocc(w,u) / ⌊|w|/ℓ⌋` over all blocks.
    pub max_frequency: f64,
    /// Heuristic: `max_frequency < C · b^-ℓ`.
    pub below_bound: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalityReport {
    pub prefix_len: usize,
    pub bound_constant: f64,
    pub lengths: Vec<LengthStats>,
}

impl NormalityReport {
    /// Heuristic verdict: every measured length stayed below its bound.
    pub fn all_below_bound(&self) -> bool {
        self.lengths.iter().all(|l| l.below_bound)
    }
}

/// Aligned statistics for `ℓ = 1..=max_ell`, comparing the largest block
/// frequency against `bound_constant · b^-ℓ`.
pub fn normality_report(w: &FiniteWord, max_ell: usize, bound_constant: f64) -> Result<NormalityReport, StatsError> {
    let mut lengths = Vec::new();
    for ell in 1..=max_ell.min(w.len()) {
        let table = block_counts(w, ell, true)?;
        let (disc, code) = table.max_deviation();
        let total = table.total_positions().max(1) as f64;
        let max_count = table.counts().iter().copied().max().unwrap_or(0);
        let max_frequency = max_count as f64 / total;
        let bound = bound_constant / table.counts().len() as f64;
        lengths.push(LengthStats {
            ell,
            discrepancy: disc,
            worst_block: FiniteWord::new(w.alphabet(), decode_block(w.alphabet(), code as u64, ell))?,
            max_frequency,
            below_bound: max_frequency < bound,
        });
    }
    Ok(NormalityReport { prefix_len: w.len(), bound_constant, lengths })
}

fn check_enumeration(k: usize, b: Alphabet) -> Result<u64, StatsError> {
    match b.pow(k) {
        Some(n) if n <= ENUMERATION_CAP => Ok(n),
        other => Err(StatsError::TooLarge {
            what: "word enumeration",
            size: other.map(u128::from).unwrap_or(u128::MAX),
            cap: ENUMERATION_CAP,
        }),
    }
}

fn fill_digits(b: u64, mut idx: u64, out: &mut [Symbol]) {
    for slot in out.iter_mut().rev() {
        *slot = (idx % b) as Symbol;
        idx /= b;
    }
}

/// `p(k, r, j)`: the number of words of length `k` in which SOME block of
/// length `r` occurs exactly `j` times (union over blocks). Only nonzero
/// entries are returned.
pub fn occurrence_profile(k: usize, r: usize, b: Alphabet) -> Result<BTreeMap<usize, u64>, StatsError> {
    if r == 0 || r > k {
        return Err(StatsError::BadLengths { k, r });
    }
    let total = check_enumeration(k, b)?;
    let blocks = dense_size(b, r, "block table")?;
    let base = b.size() as u64;
    let lead = blocks as u64 / base;
    let chunk = 1u64 << 12;
    let chunks = total.div_ceil(chunk);

    let merged = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut profile = vec![0u64; k + 1];
            let mut digits = vec![0 as Symbol; k];
            let mut counts = vec![0usize; blocks];
            let mut seen = vec![false; k + 1];
            for idx in c * chunk..((c + 1) * chunk).min(total) {
                fill_digits(base, idx, &mut digits);
                counts.iter_mut().for_each(|x| *x = 0);
                let mut code = 0u64;
                for (i, &s) in digits.iter().enumerate() {
                    if i >= r {
                        code -= digits[i - r] as u64 * lead;
                    }
                    code = code * base + s as u64;
                    if i + 1 >= r {
                        counts[code as usize] += 1;
                    }
                }
                seen.iter_mut().for_each(|x| *x = false);
                for &j in &counts {
                    seen[j] = true;
                }
                for (j, &hit) in seen.iter().enumerate() {
                    if hit {
                        profile[j] += 1;
                    }
                }
            }
            profile
        })
        .reduce(
            || vec![0u64; k + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    Ok(merged.into_iter().enumerate().filter(|&(_, c)| c > 0).collect())
}

/// `|{ w ∈ A^k : occ(w,u) = j }|` for one fixed block `u` (no union).
pub fn occurrence_distribution(k: usize, u: &FiniteWord) -> Result<BTreeMap<usize, u64>, StatsError> {
    let r = u.len();
    if r == 0 || r > k {
        return Err(StatsError::BadLengths { k, r });
    }
    let b = u.alphabet();
    let total = check_enumeration(k, b)?;
    let base = b.size() as u64;
    let target = block_code(b, u.iter());
    let modulus = b.pow(r).expect("r <= k and b^k fits");
    let lead = modulus / base;
    let counts = (0..total)
        .into_par_iter()
        .fold(
            || vec![0u64; k + 1],
            |mut acc, idx| {
                let mut digits = vec![0 as Symbol; k];
                fill_digits(base, idx, &mut digits);
                let mut code = 0u64;
                let mut j = 0;
                for (i, &s) in digits.iter().enumerate() {
                    if i >= r {
                        code -= digits[i - r] as u64 * lead;
                    }
                    code = code * base + s as u64;
                    if i + 1 >= r && code == target {
                        j += 1;
                    }
                }
                acc[j] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; k + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(counts.into_iter().enumerate().filter(|&(_, c)| c > 0).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct HardyEvaluation {
    pub k: usize,
    pub r: usize,
    pub epsilon: f64,
    /// `Σ_{|j - k/b^r| ≥ εk} p(k, r, j)`.
    pub tail_sum: u64,
    /// `2 b^(k+2r-2) r exp(-b^r ε² k / 6r)`.
    pub bound: f64,
    /// `tail_sum < bound`. The inequality is only guaranteed for large `k`,
    /// so `false` at small `k` is a measurement, not an error.
    pub holds: bool,
}

/// Evaluates both sides of the occurrence tail inequality by brute force.
/// `epsilon` must lie in `[6/⌊k/r⌋, 1/b^r]`.
pub fn hardy_bound_eval(k: usize, r: usize, epsilon: f64, b: Alphabet) -> Result<HardyEvaluation, StatsError> {
    if r == 0 || r > k {
        return Err(StatsError::BadLengths { k, r });
    }
    let br = b.pow(r).map(|v| v as f64).unwrap_or(f64::INFINITY);
    let lo = 6.0 / (k / r) as f64;
    let hi = 1.0 / br;
    if !(lo..=hi).contains(&epsilon) {
        return Err(StatsError::EpsilonOutOfRange { eps: epsilon, lo, hi });
    }
    let profile = occurrence_profile(k, r, b)?;
    let center = k as f64 / br;
    let radius = epsilon * k as f64;
    // Tolerate rounding in ε·k so that e.g. ε = 0.45, k = 20 includes |j - 10| = 9.
    let tol = 1e-9 * radius.max(1.0);
    let tail_sum = profile
        .iter()
        .filter(|&(&j, _)| (j as f64 - center).abs() >= radius - tol)
        .map(|(_, &c)| c)
        .sum();
    let bf = b.size() as f64;
    let bound = 2.0
        * bf.powi((k + 2 * r - 2) as i32)
        * r as f64
        * (-br * epsilon * epsilon * k as f64 / (6.0 * r as f64)).exp();
    Ok(HardyEvaluation { k, r, epsilon, tail_sum, bound, holds: (tail_sum as f64) < bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::alocc;

    fn bin(s: &str) -> FiniteWord {
        FiniteWord::parse(Alphabet::BINARY, s).unwrap()
    }

    #[test]
    fn aligned_pairs_of_uniform_word() {
        let t = block_counts(&bin("00011011"), 2, true).unwrap();
        assert_eq!(t.counts(), &[1, 1, 1, 1]);
        assert_eq!(t.total_positions(), 4);
        assert_eq!(discrepancy(&bin("00011011"), 2).unwrap(), 0.0);
    }

    #[test]
    fn unaligned_counts() {
        let t = block_counts(&bin("00011011"), 2, false).unwrap();
        // 00,00,01,11,10,01,11
        assert_eq!(t.counts(), &[2, 2, 1, 2]);
        assert_eq!(t.total_positions(), 7);
    }

    #[test]
    fn single_symbol_table_sums_to_length() {
        let w = bin("0110100110");
        let t = block_counts(&w, 1, true).unwrap();
        assert_eq!(t.counts().iter().sum::<u64>(), w.len() as u64);
    }

    #[test]
    fn discrepancy_of_constant_word() {
        assert_eq!(discrepancy(&bin("0000"), 1).unwrap(), 0.5);
    }

    #[test]
    fn trailing_partial_block_dropped() {
        let w = bin("01101");
        let t = block_counts(&w, 2, true).unwrap();
        assert_eq!(t.total_positions(), 2);
        assert_eq!(t.count(&bin("01")), alocc(&w, &bin("01")).unwrap() as u64);
    }

    #[test]
    fn block_errors() {
        assert_eq!(block_counts(&bin("01"), 0, true), Err(StatsError::ZeroBlockLength));
        assert_eq!(
            block_counts(&bin("01"), 3, true),
            Err(StatsError::BlockLongerThanWord { ell: 3, len: 2 })
        );
    }

    #[test]
    fn report_fields() {
        let rep = normality_report(&bin("00011011"), 3, 3.0).unwrap();
        assert_eq!(rep.lengths.len(), 3);
        assert_eq!(rep.lengths[1].discrepancy, 0.0);
        assert!(rep.lengths[0].below_bound);
        assert!(rep.lengths.iter().all(|l| (0.0..=1.0).contains(&l.discrepancy)));
    }

    #[test]
    fn profile_of_length_three() {
        let p = occurrence_profile(3, 1, Alphabet::BINARY).unwrap();
        let expected: BTreeMap<usize, u64> = [(0, 2), (1, 6), (2, 6), (3, 2)].into_iter().collect();
        assert_eq!(p, expected);
    }

    #[test]
    fn profile_has_no_mass_beyond_max_occurrences() {
        let k = 9;
        for r in 1..=3 {
            let p = occurrence_profile(k, r, Alphabet::BINARY).unwrap();
            assert!(p.keys().all(|&j| j <= k - r + 1));
        }
    }

    #[test]
    fn fixed_block_distribution_partitions() {
        let u = bin("01");
        let d = occurrence_distribution(10, &u).unwrap();
        assert_eq!(d.values().sum::<u64>(), 1 << 10);
    }

    #[test]
    fn hardy_epsilon_range_enforced() {
        assert!(matches!(
            hardy_bound_eval(20, 1, 0.1, Alphabet::BINARY),
            Err(StatsError::EpsilonOutOfRange { .. })
        ));
        assert!(matches!(
            hardy_bound_eval(20, 1, 0.6, Alphabet::BINARY),
            Err(StatsError::EpsilonOutOfRange { .. })
        ));
    }

    #[test]
    fn hardy_tail_monotone_in_epsilon() {
        let mut prev = u64::MAX;
        for eps in [0.375, 0.4, 0.45, 0.5] {
            let h = hardy_bound_eval(16, 1, eps, Alphabet::BINARY).unwrap();
            assert!(h.tail_sum <= 1 << 16);
            assert!(h.tail_sum <= prev);
            prev = h.tail_sum;
        }
    }
}
