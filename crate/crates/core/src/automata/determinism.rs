use std::collections::HashMap;

use super::{AutomatonError, KAutomaton, StateId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    /// The automaton does not have exactly one initial state.
    SingletonInitial,
    /// Two transitions leaving the same state read different subsets of the input tapes.
    EpsilonPattern,
    /// Two transitions with the same input labels differ in output labels or target.
    SameLabel,
    /// An input component is longer than one symbol.
    LongInputLabel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// `None` only for [`ViolationKind::SingletonInitial`].
    pub state: Option<StateId>,
    /// Indices into [`KAutomaton::transitions`]; the second is absent for single-transition kinds.
    pub transitions: Option<(usize, Option<usize>)>,
    pub kind: ViolationKind,
}

#[derive(Clone, Debug)]
pub struct DeterminismReport {
    pub ell: usize,
    pub deterministic: bool,
    pub violations: Vec<Violation>,
}

impl DeterminismReport {
    pub fn describe(&self, m: &KAutomaton) -> Vec<String> {
        self.violations
            .iter()
            .map(|v| {
                let show = |i: usize| {
                    let t = &m.transitions()[i];
                    let label: Vec<String> = t.label.iter().map(|c| m.component_text(c)).collect();
                    format!("{} --({})--> {}", m.state_name(t.from), label.join(","), m.state_name(t.to))
                };
                let what = match v.kind {
                    ViolationKind::SingletonInitial => return format!("{} initial states, expected 1", m.initial().len()),
                    ViolationKind::EpsilonPattern => "inconsistent input pattern",
                    ViolationKind::SameLabel => "same input labels, different continuation",
                    ViolationKind::LongInputLabel => "input label longer than one symbol",
                };
                match v.transitions {
                    Some((a, Some(b))) => format!("{what}: {} / {}", show(a), show(b)),
                    Some((a, None)) => format!("{what}: {}", show(a)),
                    None => what.to_string(),
                }
            })
            .collect()
    }
}

/// Checks whether the run of `m` is determined by the contents of its first `ell` tapes:
/// a single initial state, and for every state a common set of read input tapes
/// plus a function from input labels to (output labels, target).
pub fn check_l_deterministic(m: &KAutomaton, ell: usize) -> Result<DeterminismReport, AutomatonError> {
    m.check_ell(ell)?;
    let mut violations = Vec::new();
    if m.initial().len() != 1 {
        violations.push(Violation { state: None, transitions: None, kind: ViolationKind::SingletonInitial });
    }
    let ts = m.transitions();
    for q in 0..m.state_count() {
        let out = m.outgoing(q);
        let Some(&first) = out.first() else { continue };
        let pattern = ts[first].input_pattern(ell);
        let mut by_input: HashMap<&[Vec<u32>], usize> = HashMap::new();
        for &i in out {
            let t = &ts[i];
            if t.label[..ell].iter().any(|c| c.len() > 1) {
                violations.push(Violation { state: Some(q), transitions: Some((i, None)), kind: ViolationKind::LongInputLabel });
            }
            if t.input_pattern(ell) != pattern {
                violations.push(Violation { state: Some(q), transitions: Some((first, Some(i))), kind: ViolationKind::EpsilonPattern });
            }
            match by_input.get(&t.label[..ell]) {
                Some(&j) => {
                    let u = &ts[j];
                    if u.label[ell..] != t.label[ell..] || u.to != t.to {
                        violations.push(Violation { state: Some(q), transitions: Some((j, Some(i))), kind: ViolationKind::SameLabel });
                    }
                }
                None => {
                    by_input.insert(&t.label[..ell], i);
                }
            }
        }
    }
    Ok(DeterminismReport { ell, deterministic: violations.is_empty(), violations })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures;
    use super::*;

    #[test]
    fn join_is_two_deterministic() {
        let r = check_l_deterministic(&fixtures::join(), 2).unwrap();
        assert!(r.deterministic, "{:?}", r.violations);
    }

    #[test]
    fn shuffle_violates_at_q0() {
        let m = fixtures::shuffle();
        let r = check_l_deterministic(&m, 2).unwrap();
        assert!(!r.deterministic);
        let q0 = m.state_id("q0").unwrap();
        let v = r.violations.iter().find(|v| v.kind == ViolationKind::EpsilonPattern).unwrap();
        assert_eq!(v.state, Some(q0));
        let (a, b) = v.transitions.unwrap();
        let labels = [m.transitions()[a].label.clone(), m.transitions()[b.unwrap()].label.clone()];
        assert!(labels.contains(&vec![vec![0], vec![], vec![0]]));
        assert!(r.describe(&m)[0].contains("q0"));
    }

    #[test]
    fn copy_is_one_deterministic() {
        assert!(check_l_deterministic(&fixtures::copy(), 1).unwrap().deterministic);
        assert!(check_l_deterministic(&fixtures::odd(), 1).unwrap().deterministic);
    }

    #[test]
    fn detects_label_conflict_and_initials() {
        let mut m = KAutomaton::parse("automaton k=2 alphabet=2 initial=a,b\na 0,0 a\na 0,1 a\n").unwrap();
        let r = check_l_deterministic(&m, 1).unwrap();
        let kinds: Vec<_> = r.violations.iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::SingletonInitial));
        assert!(kinds.contains(&ViolationKind::SameLabel));
        m.set_initial(vec![0]).unwrap();
        assert_eq!(check_l_deterministic(&m, 1).unwrap().violations.len(), 1);
        assert!(check_l_deterministic(&m, 3).is_err());
    }
}
