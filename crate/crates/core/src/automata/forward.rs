use std::collections::BTreeSet;

use super::{AutomatonError, KAutomaton, StateId};
use crate::word::{FiniteWord, Symbol};

const SEARCH_CAP: u64 = 1 << 24;

/// Pairs `(p, a)` such that some finite run from `p` reads exactly `v` on tape 2 and a
/// tape-1 word starting with `a`. The tape-1 read may happen before, during or after
/// the reading of `v`.
pub fn forward_pairs(m: &KAutomaton, v: &FiniteWord) -> Result<BTreeSet<(StateId, Symbol)>, AutomatonError> {
    pairs(m, v, false)
}

/// Like [`forward_pairs`], but `a` must be read before the last symbol of `v` is.
pub fn forward_pairs_within(m: &KAutomaton, v: &FiniteWord) -> Result<BTreeSet<(StateId, Symbol)>, AutomatonError> {
    pairs(m, v, true)
}

fn pairs(m: &KAutomaton, v: &FiniteWord, within: bool) -> Result<BTreeSet<(StateId, Symbol)>, AutomatonError> {
    if m.tapes() < 2 {
        return Err(AutomatonError::Tapes(m.tapes()));
    }
    if v.is_empty() {
        return Err(AutomatonError::EmptyWord);
    }
    if v.alphabet() != m.alphabet() {
        return Err(crate::word::WordError::AlphabetMismatch(v.alphabet().size(), m.alphabet().size()).into());
    }
    let v = v.to_vec();
    let mut out = BTreeSet::new();
    for p in 0..m.state_count() {
        for a in reachable_first_symbols(m, &v, p, within) {
            out.insert((p, a));
        }
    }
    Ok(out)
}

/// Product-graph search over (state, position in v, first tape-1 symbol or none).
fn reachable_first_symbols(m: &KAutomaton, v: &[Symbol], p: StateId, within: bool) -> Vec<Symbol> {
    let b = m.alphabet().size() as usize;
    let none = b;
    let len = v.len();
    let idx = |q: usize, pos: usize, f: usize| (q * (len + 1) + pos) * (b + 1) + f;
    let mut seen = vec![false; m.state_count() * (len + 1) * (b + 1)];
    let mut stack = vec![(p, 0usize, none)];
    seen[idx(p, 0, none)] = true;
    let mut found = vec![false; b];
    while let Some((q, pos, f)) = stack.pop() {
        if pos == len && f != none {
            found[f] = true;
        }
        for &i in m.outgoing(q) {
            let t = &m.transitions()[i];
            let (c1, c2) = (&t.label[0], &t.label[1]);
            if pos + c2.len() > len || v[pos..pos + c2.len()] != c2[..] {
                continue;
            }
            let mut nf = f;
            if f == none && !c1.is_empty() {
                if within && pos >= len {
                    continue;
                }
                nf = c1[0] as usize;
            }
            let next = (t.to, pos + c2.len(), nf);
            let k = idx(next.0, next.1, next.2);
            if !seen[k] {
                seen[k] = true;
                stack.push(next);
            }
        }
    }
    (0..b).filter(|&a| found[a]).map(|a| a as Symbol).collect()
}

#[derive(Clone, Debug)]
pub struct ForwardSearch {
    /// Shortest, then lexicographically first, word with the most forward pairs.
    pub word: FiniteWord,
    pub pair_count: usize,
    /// Longest word length examined. The result is only maximal up to this length.
    pub horizon: usize,
}

/// Exhaustive search for a word of length at most `max_len` with the most forward pairs.
/// With `within`, pairs are counted as in [`forward_pairs_within`].
pub fn find_forward_word(m: &KAutomaton, max_len: usize, within: bool) -> Result<ForwardSearch, AutomatonError> {
    let alphabet = m.alphabet();
    let b = alphabet.size() as u128;
    let total: u128 = (1..=max_len as u32).map(|l| b.saturating_pow(l)).fold(0u128, u128::saturating_add);
    if total > SEARCH_CAP as u128 {
        return Err(AutomatonError::TooLarge { what: "forward word candidates", size: total, cap: SEARCH_CAP });
    }
    let ceiling = m.state_count() * alphabet.size() as usize;
    let mut best: Option<(FiniteWord, usize)> = None;
    'outer: for len in 1..=max_len {
        let mut digits = vec![0 as Symbol; len];
        loop {
            let w = FiniteWord::new(alphabet, digits.iter().copied())?;
            let count = pairs(m, &w, within)?.len();
            if best.as_ref().is_none_or(|(_, c)| count > *c) {
                best = Some((w, count));
                if count == ceiling {
                    break 'outer;
                }
            }
            // Next word of the same length in lexicographic order.
            let mut i = len;
            loop {
                if i == 0 {
                    continue 'outer;
                }
                i -= 1;
                digits[i] += 1;
                if digits[i] < alphabet.size() {
                    break;
                }
                digits[i] = 0;
            }
        }
    }
    let (word, pair_count) = best.ok_or(AutomatonError::EmptyWord)?;
    Ok(ForwardSearch { word, pair_count, horizon: max_len })
}

/// Whether some partial run from an initial state reads exactly `words[i]` on tape `i`
/// for every tape. A finite-prefix substitute for acceptance of infinite tuples.
pub fn accepts_prefixes(m: &KAutomaton, words: &[FiniteWord]) -> Result<bool, AutomatonError> {
    if words.len() != m.tapes() {
        return Err(AutomatonError::InputCount { expected: m.tapes(), got: words.len() });
    }
    let tapes: Vec<Vec<Symbol>> = words.iter().map(FiniteWord::to_vec).collect();
    let size = tapes.iter().fold(m.state_count() as u128, |s, w| s.saturating_mul(w.len() as u128 + 1));
    if size > SEARCH_CAP as u128 {
        return Err(AutomatonError::TooLarge { what: "product graph", size, cap: SEARCH_CAP });
    }
    let encode = |q: usize, pos: &[usize]| tapes.iter().zip(pos).fold(q, |c, (w, &p)| c * (w.len() + 1) + p);
    let mut seen = vec![false; size as usize];
    let mut stack: Vec<(StateId, Vec<usize>)> = Vec::new();
    for &q in m.initial() {
        let pos = vec![0; tapes.len()];
        let key = encode(q, &pos);
        if !seen[key] {
            seen[key] = true;
            stack.push((q, pos));
        }
    }
    while let Some((q, pos)) = stack.pop() {
        if pos.iter().zip(&tapes).all(|(&p, w)| p == w.len()) {
            return Ok(true);
        }
        'trans: for &i in m.outgoing(q) {
            let t = &m.transitions()[i];
            let mut next = pos.clone();
            for ((c, w), np) in t.label.iter().zip(&tapes).zip(next.iter_mut()) {
                if *np + c.len() > w.len() || w[*np..*np + c.len()] != c[..] {
                    continue 'trans;
                }
                *np += c.len();
            }
            let key = encode(t.to, &next);
            if !seen[key] {
                seen[key] = true;
                stack.push((t.to, next));
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures;
    use super::*;
    use crate::word::Alphabet;

    fn w(s: &str) -> FiniteWord {
        FiniteWord::parse(Alphabet::BINARY, s).unwrap()
    }

    #[test]
    fn join_pairs_for_single_zero() {
        let m = fixtures::join();
        assert_eq!(forward_pairs(&m, &w("0")).unwrap().len(), 4);
        let strict = forward_pairs_within(&m, &w("0")).unwrap();
        let q0 = m.state_id("q0").unwrap();
        assert_eq!(strict, BTreeSet::from([(q0, 0), (q0, 1)]));
        assert_eq!(forward_pairs_within(&m, &w("00")).unwrap().len(), 4);
    }

    #[test]
    fn forward_word_search() {
        let m = fixtures::join();
        let r = find_forward_word(&m, 2, false).unwrap();
        assert_eq!((r.word.to_text().unwrap().as_str(), r.pair_count), ("0", 4));
        let r = find_forward_word(&m, 3, true).unwrap();
        assert_eq!((r.word.to_text().unwrap().as_str(), r.pair_count), ("00", 4));
    }

    #[test]
    fn trap_state_has_no_pairs() {
        let m = KAutomaton::parse("automaton k=3 alphabet=2 initial=t\nt 0,-,0 t\nt 1,-,1 t\n").unwrap();
        assert!(forward_pairs(&m, &w("1")).unwrap().is_empty());
        let r = find_forward_word(&m, 3, false).unwrap();
        assert_eq!((r.word.len(), r.pair_count), (1, 0));
        assert!(forward_pairs(&m, &FiniteWord::empty(Alphabet::BINARY)).is_err());
    }

    #[test]
    fn shuffle_accepts_interleavings() {
        let m = fixtures::shuffle();
        assert!(accepts_prefixes(&m, &[w("01"), w("1"), w("011")]).unwrap());
        assert!(accepts_prefixes(&m, &[w("01"), w("1"), w("101")]).unwrap());
        assert!(!accepts_prefixes(&m, &[w("01"), w("1"), w("000")]).unwrap());
        let j = fixtures::join();
        assert!(accepts_prefixes(&j, &[w("01"), w("10"), w("0110")]).unwrap());
        assert!(!accepts_prefixes(&j, &[w("01"), w("10"), w("1001")]).unwrap());
    }
}
