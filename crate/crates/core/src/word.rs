//! Alphabets, finite words and the basic combinatorics on words.
//!
//! Positions in the public API are 1-indexed: `w.at(1)` is the first symbol and
//! `w.factor(i, j)` is `w[i..j]` inclusive. Storage is 0-indexed internally.
//! Words over the binary alphabet are bit-packed, other words use one byte per
//! symbol (or four for power alphabets larger than 256 symbols).

use std::fmt;
use std::hash::{Hash, Hasher};

use thiserror::Error;

/// A symbol is an integer in `0..alphabet.size()`.
pub type Symbol = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("alphabet size must be at least 2, got {0}")]
    AlphabetTooSmall(u64),
    #[error("alphabet of size {0} is too large")]
    AlphabetTooLarge(u64),
    #[error("symbol {symbol} is outside an alphabet of size {size}")]
    SymbolOutOfRange { symbol: Symbol, size: u32 },
    #[error("character {0:?} is not a symbol of this alphabet")]
    BadChar(char),
    #[error("the pattern word must be nonempty")]
    EmptyPattern,
    #[error("alphabets differ ({0} vs {1} symbols)")]
    AlphabetMismatch(u32, u32),
    #[error("word length {len} is not a multiple of {block}")]
    NotDivisible { len: usize, block: usize },
    #[error("words have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("source exhausted after {available} symbols, {requested} requested")]
    SourceExhausted { requested: usize, available: usize },
    #[error("position range {start}..{end} is outside a word of length {len}")]
    OutOfBounds { start: usize, end: usize, len: usize },
}

const DIGITS: &[u8; 36] = b"0123456789abcdefghijklmnopqrstuvwxyz";

/// Finite alphabet `{0, .., size-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alphabet(u32);

impl Alphabet {
    pub const BINARY: Alphabet = Alphabet(2);
    /// Largest alphabet with a text rendering (`0-9a-z`).
    pub const MAX_TEXT: u32 = 36;

    pub fn new(size: u32) -> Result<Self, WordError> {
        if size < 2 {
            return Err(WordError::AlphabetTooSmall(size as u64));
        }
        Ok(Alphabet(size))
    }

    pub fn size(self) -> u32 {
        self.0
    }

    pub fn contains(self, s: Symbol) -> bool {
        s < self.0
    }

    pub fn check(self, s: Symbol) -> Result<Symbol, WordError> {
        if self.contains(s) {
            Ok(s)
        } else {
            Err(WordError::SymbolOutOfRange { symbol: s, size: self.0 })
        }
    }

    /// `size^exp`, or `None` on overflow.
    pub fn pow(self, exp: usize) -> Option<u64> {
        let exp = u32::try_from(exp).ok()?;
        (self.0 as u64).checked_pow(exp)
    }

    /// The alphabet `A^r` of blocks of length `r`.
    pub fn power(self, r: usize) -> Result<Alphabet, WordError> {
        match self.pow(r) {
            Some(n) if n <= u32::MAX as u64 => Alphabet::new(n as u32),
            _ => Err(WordError::AlphabetTooLarge(u64::MAX)),
        }
    }

    pub fn symbol_char(self, s: Symbol) -> Option<char> {
        if s < self.0 && s < Self::MAX_TEXT {
            Some(DIGITS[s as usize] as char)
        } else {
            None
        }
    }

    pub fn parse_char(self, c: char) -> Result<Symbol, WordError> {
        let v = c.to_digit(36).ok_or(WordError::BadChar(c))?;
        if c.is_ascii_uppercase() || !self.contains(v) {
            return Err(WordError::BadChar(c));
        }
        Ok(v)
    }

    pub fn symbols(self) -> impl Iterator<Item = Symbol> {
        0..self.0
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug)]
enum Storage {
    Bits(Vec<u64>),
    Bytes(Vec<u8>),
    Wide(Vec<u32>),
}

/// A finite word over an [`Alphabet`].
#[derive(Clone)]
pub struct FiniteWord {
    alphabet: Alphabet,
    len: usize,
    storage: Storage,
}

impl FiniteWord {
    pub fn empty(alphabet: Alphabet) -> Self {
        Self::with_capacity(alphabet, 0)
    }

    pub fn with_capacity(alphabet: Alphabet, cap: usize) -> Self {
        let storage = if alphabet.size() == 2 {
            Storage::Bits(Vec::with_capacity(cap.div_ceil(64)))
        } else if alphabet.size() <= 256 {
            Storage::Bytes(Vec::with_capacity(cap))
        } else {
            Storage::Wide(Vec::with_capacity(cap))
        };
        FiniteWord { alphabet, len: 0, storage }
    }

    pub fn new(alphabet: Alphabet, symbols: impl IntoIterator<Item = Symbol>) -> Result<Self, WordError> {
        let mut w = Self::empty(alphabet);
        for s in symbols {
            w.push(s)?;
        }
        Ok(w)
    }

    /// Same as [`FiniteWord::new`] but never bit-packs; used as a reference
    /// representation when checking the packed code paths.
    pub fn unpacked(alphabet: Alphabet, symbols: impl IntoIterator<Item = Symbol>) -> Result<Self, WordError> {
        let mut data = Vec::new();
        for s in symbols {
            data.push(alphabet.check(s)?);
        }
        Ok(FiniteWord { alphabet, len: data.len(), storage: Storage::Wide(data) })
    }

    /// Parses the text form: one character per symbol, `0-9` then `a-z`.
    pub fn parse(alphabet: Alphabet, text: &str) -> Result<Self, WordError> {
        let mut w = Self::with_capacity(alphabet, text.len());
        for c in text.chars() {
            w.push(alphabet.parse_char(c)?)?;
        }
        Ok(w)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_packed(&self) -> bool {
        matches!(self.storage, Storage::Bits(_))
    }

    pub fn push(&mut self, s: Symbol) -> Result<(), WordError> {
        self.alphabet.check(s)?;
        match &mut self.storage {
            Storage::Bits(v) => {
                let (q, r) = (self.len / 64, self.len % 64);
                if r == 0 {
                    v.push(0);
                }
                v[q] |= (s as u64) << r;
            }
            Storage::Bytes(v) => v.push(s as u8),
            Storage::Wide(v) => v.push(s),
        }
        self.len += 1;
        Ok(())
    }

    pub fn extend_from(&mut self, other: &FiniteWord) -> Result<(), WordError> {
        if other.alphabet != self.alphabet {
            return Err(WordError::AlphabetMismatch(self.alphabet.size(), other.alphabet.size()));
        }
        for s in other.iter() {
            self.push(s)?;
        }
        Ok(())
    }

    /// Symbol at 0-based index `idx`. Panics when out of range.
    #[inline]
    pub fn get0(&self, idx: usize) -> Symbol {
        assert!(idx < self.len, "index {idx} out of range for length {}", self.len);
        match &self.storage {
            Storage::Bits(v) => ((v[idx / 64] >> (idx % 64)) & 1) as Symbol,
            Storage::Bytes(v) => v[idx] as Symbol,
            Storage::Wide(v) => v[idx],
        }
    }

    /// `w[i]` with 1-indexed `i`.
    pub fn at(&self, i: usize) -> Option<Symbol> {
        if i == 0 || i > self.len {
            None
        } else {
            Some(self.get0(i - 1))
        }
    }

    /// `w[i..j]`, 1-indexed and inclusive. `factor(i, i - 1)` is the empty word.
    pub fn factor(&self, i: usize, j: usize) -> Result<FiniteWord, WordError> {
        if i == 0 || j > self.len || i > j + 1 {
            return Err(WordError::OutOfBounds { start: i, end: j, len: self.len });
        }
        self.slice0(i - 1, j)
    }

    pub(crate) fn slice0(&self, start: usize, end: usize) -> Result<FiniteWord, WordError> {
        if start > end || end > self.len {
            return Err(WordError::OutOfBounds { start: start + 1, end, len: self.len });
        }
        let mut w = FiniteWord::with_capacity(self.alphabet, end - start);
        for idx in start..end {
            w.push(self.get0(idx))?;
        }
        Ok(w)
    }

    pub fn iter(&self) -> Symbols<'_> {
        Symbols { word: self, pos: 0 }
    }

    pub fn to_vec(&self) -> Vec<Symbol> {
        self.iter().collect()
    }

    pub fn is_prefix_of(&self, other: &FiniteWord) -> bool {
        self.alphabet == other.alphabet && self.len <= other.len && self.iter().zip(other.iter()).all(|(a, b)| a == b)
    }

    /// Text form, or `None` when the alphabet has more than 36 symbols.
    pub fn to_text(&self) -> Option<String> {
        self.iter().map(|s| self.alphabet.symbol_char(s)).collect()
    }
}

impl PartialEq for FiniteWord {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet && self.len == other.len && self.iter().eq(other.iter())
    }
}

impl Eq for FiniteWord {}

impl Hash for FiniteWord {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.alphabet.hash(state);
        self.len.hash(state);
        for s in self.iter() {
            s.hash(state);
        }
    }
}

impl fmt::Display for FiniteWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_text() {
            Some(t) => f.write_str(&t),
            None => {
                let parts: Vec<String> = self.iter().map(|s| s.to_string()).collect();
                write!(f, "<{}>", parts.join(","))
            }
        }
    }
}

impl fmt::Debug for FiniteWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteWord(b={}, \"{}\")", self.alphabet, self)
    }
}

pub struct Symbols<'a> {
    word: &'a FiniteWord,
    pos: usize,
}

impl Iterator for Symbols<'_> {
    type Item = Symbol;

    fn next(&mut self) -> Option<Symbol> {
        if self.pos < self.word.len {
            self.pos += 1;
            Some(self.word.get0(self.pos - 1))
        } else {
            None
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.word.len - self.pos;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Symbols<'_> {}

fn check_pattern(w: &FiniteWord, u: &FiniteWord) -> Result<(), WordError> {
    if u.is_empty() {
        return Err(WordError::EmptyPattern);
    }
    if w.alphabet != u.alphabet {
        return Err(WordError::AlphabetMismatch(w.alphabet.size(), u.alphabet.size()));
    }
    Ok(())
}

/// Base-`b` code of a block, most significant symbol first, when `b^len` fits in a `u64`.
pub(crate) fn block_code(alphabet: Alphabet, symbols: impl Iterator<Item = Symbol>) -> u64 {
    let b = alphabet.size() as u64;
    symbols.fold(0u64, |acc, s| acc * b + s as u64)
}

/// Inverse of [`block_code`].
pub(crate) fn decode_block(alphabet: Alphabet, mut code: u64, len: usize) -> Vec<Symbol> {
    let b = alphabet.size() as u64;
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = (code % b) as Symbol;
        code /= b;
    }
    out
}

/// Number of occurrences of `u` in `w`: `|{ i : w[i..i+|u|-1] = u }|`.
pub fn occ(w: &FiniteWord, u: &FiniteWord) -> Result<usize, WordError> {
    check_pattern(w, u)?;
    let m = u.len();
    if m > w.len() {
        return Ok(0);
    }
    match w.alphabet.pow(m) {
        Some(modulus) => {
            // Rolling base-b code of the last m symbols.
            let b = w.alphabet.size() as u64;
            let target = block_code(u.alphabet, u.iter());
            let lead = modulus / b;
            let mut code = 0u64;
            let mut count = 0;
            for (idx, s) in w.iter().enumerate() {
                if idx >= m {
                    code -= w.get0(idx - m) as u64 * lead;
                }
                code = code * b + s as u64;
                if idx + 1 >= m && code == target {
                    count += 1;
                }
            }
            Ok(count)
        }
        None => {
            let ws = w.to_vec();
            let us = u.to_vec();
            Ok(ws.windows(m).filter(|win| *win == us.as_slice()).count())
        }
    }
}

/// Number of aligned occurrences of `u` in `w`: occurrences starting at a
/// 1-indexed position `i ≡ 1 mod |u|`. A trailing partial block never matches.
pub fn alocc(w: &FiniteWord, u: &FiniteWord) -> Result<usize, WordError> {
    check_pattern(w, u)?;
    let m = u.len();
    let blocks = w.len() / m;
    let count = (0..blocks)
        .filter(|&blk| (0..m).all(|j| w.get0(blk * m + j) == u.get0(j)))
        .count();
    Ok(count)
}

/// Regroups `w` into a word over the power alphabet `A^r`; each length-`r`
/// block becomes one symbol, its base-`b` value.
pub fn regroup(w: &FiniteWord, r: usize) -> Result<FiniteWord, WordError> {
    if r == 0 || !w.len().is_multiple_of(r) {
        return Err(WordError::NotDivisible { len: w.len(), block: r });
    }
    if r == 1 {
        return Ok(w.clone());
    }
    let power = w.alphabet.power(r)?;
    let mut out = FiniteWord::with_capacity(power, w.len() / r);
    for blk in 0..w.len() / r {
        let code = block_code(w.alphabet, (0..r).map(|j| w.get0(blk * r + j)));
        out.push(code as Symbol)?;
    }
    Ok(out)
}

/// Symbols at even positions: `w[2] w[4] ...`.
pub fn even(w: &FiniteWord) -> FiniteWord {
    track(w, 2, 2)
}

/// Symbols at odd positions: `w[1] w[3] ...`.
pub fn odd(w: &FiniteWord) -> FiniteWord {
    track(w, 2, 1)
}

/// Symbols at positions `≡ t mod step` (1-indexed, `1 ≤ t ≤ step`).
pub fn track(w: &FiniteWord, step: usize, t: usize) -> FiniteWord {
    assert!(step >= 1 && (1..=step).contains(&t));
    let mut out = FiniteWord::with_capacity(w.alphabet, w.len() / step + 1);
    let mut idx = t - 1;
    while idx < w.len() {
        out.push(w.get0(idx)).expect("same alphabet");
        idx += step;
    }
    out
}

/// The join `x ∨ y = x[1] y[1] x[2] y[2] ...` of two words of equal length.
pub fn join(x: &FiniteWord, y: &FiniteWord) -> Result<FiniteWord, WordError> {
    if x.alphabet != y.alphabet {
        return Err(WordError::AlphabetMismatch(x.alphabet.size(), y.alphabet.size()));
    }
    if x.len() != y.len() {
        return Err(WordError::LengthMismatch(x.len(), y.len()));
    }
    let mut out = FiniteWord::with_capacity(x.alphabet, 2 * x.len());
    for (a, b) in x.iter().zip(y.iter()) {
        out.push(a)?;
        out.push(b)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(s: &str) -> FiniteWord {
        FiniteWord::parse(Alphabet::BINARY, s).unwrap()
    }

    #[test]
    fn occurrence_example() {
        let a = Alphabet::new(2).unwrap();
        // "aaaaa" with a = 0
        let w = FiniteWord::parse(a, "00000").unwrap();
        let u = FiniteWord::parse(a, "00").unwrap();
        assert_eq!(occ(&w, &u).unwrap(), 4);
        assert_eq!(alocc(&w, &u).unwrap(), 2);
    }

    #[test]
    fn small_counts() {
        assert_eq!(occ(&bin("0110"), &bin("1")).unwrap(), 2);
        assert_eq!(alocc(&bin("00011011"), &bin("01")).unwrap(), 1);
        // alignment starts at position 1, not 0: "01" at 1-indexed position 2 is not aligned
        assert_eq!(alocc(&bin("0010"), &bin("01")).unwrap(), 0);
        assert_eq!(occ(&bin("0010"), &bin("01")).unwrap(), 1);
        let w = bin("1011001");
        assert_eq!(occ(&w, &w).unwrap(), 1);
        assert_eq!(alocc(&w, &w).unwrap(), 1);
    }

    #[test]
    fn empty_pattern_rejected() {
        let w = bin("0101");
        let e = FiniteWord::empty(Alphabet::BINARY);
        assert_eq!(occ(&w, &e), Err(WordError::EmptyPattern));
        assert_eq!(alocc(&w, &e), Err(WordError::EmptyPattern));
    }

    #[test]
    fn regroup_examples() {
        let g = regroup(&bin("0110"), 2).unwrap();
        assert_eq!(g.alphabet().size(), 4);
        assert_eq!(g.to_vec(), vec![1, 2]);
        assert_eq!(regroup(&bin("0110"), 1).unwrap(), bin("0110"));
        assert!(matches!(regroup(&bin("011"), 2), Err(WordError::NotDivisible { .. })));
        let w = bin("00011011");
        let lhs = alocc(&w, &bin("01")).unwrap();
        let rhs = occ(&regroup(&w, 2).unwrap(), &regroup(&bin("01"), 2).unwrap()).unwrap();
        assert_eq!((lhs, rhs), (1, 1));
    }

    #[test]
    fn even_odd_join() {
        assert_eq!(join(&bin("01"), &bin("10")).unwrap(), bin("0110"));
        assert_eq!(even(&bin("1101")), bin("11"));
        assert_eq!(odd(&bin("1101")), bin("10"));
        assert_eq!(even(&bin("110")).len(), 1);
        assert_eq!(odd(&bin("110")).len(), 2);
        let t = FiniteWord::parse(Alphabet::new(3).unwrap(), "01").unwrap();
        assert!(matches!(join(&bin("01"), &t), Err(WordError::AlphabetMismatch(2, 3))));
    }

    #[test]
    fn one_indexed_access() {
        let w = bin("1101");
        assert_eq!(w.at(0), None);
        assert_eq!(w.at(1), Some(1));
        assert_eq!(w.at(3), Some(0));
        assert_eq!(w.at(5), None);
        assert_eq!(w.factor(2, 3).unwrap(), bin("10"));
        assert_eq!(w.factor(3, 2).unwrap().len(), 0);
        assert!(w.factor(0, 2).is_err());
    }

    #[test]
    fn text_round_trip_and_bad_chars() {
        let a = Alphabet::new(12).unwrap();
        let w = FiniteWord::parse(a, "09ab").unwrap();
        assert_eq!(w.to_vec(), vec![0, 9, 10, 11]);
        assert_eq!(w.to_string(), "09ab");
        assert_eq!(FiniteWord::parse(a, "0c"), Err(WordError::BadChar('c')));
        assert_eq!(FiniteWord::parse(a, "A"), Err(WordError::BadChar('A')));
        assert!(Alphabet::new(1).is_err());
    }

    #[test]
    fn packed_and_unpacked_compare_equal() {
        let syms: Vec<Symbol> = (0..200).map(|i| (i * 7 % 3 == 0) as Symbol).collect();
        let p = FiniteWord::new(Alphabet::BINARY, syms.clone()).unwrap();
        let u = FiniteWord::unpacked(Alphabet::BINARY, syms).unwrap();
        assert!(p.is_packed());
        assert!(!u.is_packed());
        assert_eq!(p, u);
    }
}
