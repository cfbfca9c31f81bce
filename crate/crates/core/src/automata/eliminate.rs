use super::{check_l_deterministic, AutomatonError, KAutomaton, StateId};
use crate::word::Symbol;

enum Closure {
    /// First state reading input, and the outputs written on the way there.
    Reaches(StateId, Vec<Vec<Symbol>>),
    /// The chain of input-free transitions loops forever.
    Cycle,
}

/// Follows the unique input-free transitions out of `p` until a state that reads input.
fn closure(m: &KAutomaton, ell: usize, silent: &[bool], p: StateId) -> Closure {
    let mut out = vec![Vec::new(); m.tapes() - ell];
    let mut seen = vec![false; m.state_count()];
    let mut q = p;
    while silent[q] {
        if seen[q] {
            return Closure::Cycle;
        }
        seen[q] = true;
        let t = &m.transitions()[m.outgoing(q)[0]];
        for (o, c) in out.iter_mut().zip(&t.label[ell..]) {
            o.extend_from_slice(c);
        }
        q = t.to;
    }
    Closure::Reaches(q, out)
}

fn prepend(prefix: &[Vec<Symbol>], label: &[Vec<Symbol>], ell: usize) -> Vec<Vec<Symbol>> {
    let mut l = label.to_vec();
    for (c, p) in l[ell..].iter_mut().zip(prefix) {
        let mut v = p.clone();
        v.extend_from_slice(c);
        *c = v;
    }
    l
}

/// Removes every transition that reads none of the first `ell` tapes.
///
/// A transition into a state whose input-free chain reaches a reading state `q` is
/// redirected to `q`, with the chain's outputs appended. States whose chain loops
/// without reading are deleted together with the transitions into them. The
/// remaining states keep their names and relative order.
pub fn eliminate_eps_input_transitions(m: &KAutomaton, ell: usize) -> Result<KAutomaton, AutomatonError> {
    if !check_l_deterministic(m, ell)?.deterministic {
        return Err(AutomatonError::NotDeterministic { ell });
    }
    let n = m.state_count();
    let silent: Vec<bool> = (0..n)
        .map(|q| m.outgoing(q).first().is_some_and(|&i| m.transitions()[i].reads_nothing(ell)))
        .collect();
    if !silent.contains(&true) {
        return Ok(m.clone());
    }
    let closures: Vec<Option<Closure>> = (0..n).map(|q| silent[q].then(|| closure(m, ell, &silent, q))).collect();

    let mut out = KAutomaton::new(m.tapes(), m.alphabet())?;
    let mut new_id = vec![None; n];
    for q in (0..n).filter(|&q| !silent[q]) {
        new_id[q] = Some(out.add_state(m.state_name(q)));
    }
    let p0 = m.initial()[0];
    let initial = match &closures[p0] {
        None => new_id[p0].expect("reading state kept"),
        Some(Closure::Cycle) => return Err(AutomatonError::InitialRemoved),
        Some(Closure::Reaches(q, prefix)) => {
            if prefix.iter().all(Vec::is_empty) || m.outgoing(*q).is_empty() {
                new_id[*q].expect("reading state kept")
            } else {
                // The outputs written before the first read move onto a fresh initial state.
                let fresh = out.add_state(format!("{}'", m.state_name(p0)));
                for &i in m.outgoing(*q) {
                    let t = &m.transitions()[i];
                    let (to, tail) = target(&closures, &new_id, t.to);
                    let Some(to) = to else { continue };
                    let label = prepend(prefix, &append(&t.label, &tail, ell), ell);
                    out.add_transition(fresh, label, to)?;
                }
                fresh
            }
        }
    };
    for t in m.transitions() {
        let Some(from) = new_id[t.from] else { continue };
        let (to, tail) = target(&closures, &new_id, t.to);
        if let Some(to) = to {
            out.add_transition(from, append(&t.label, &tail, ell), to)?;
        }
    }
    out.set_initial(vec![initial])?;
    Ok(out)
}

fn target(closures: &[Option<Closure>], new_id: &[Option<StateId>], to: StateId) -> (Option<StateId>, Vec<Vec<Symbol>>) {
    match &closures[to] {
        None => (new_id[to], Vec::new()),
        Some(Closure::Cycle) => (None, Vec::new()),
        Some(Closure::Reaches(q, tail)) => (new_id[*q], tail.clone()),
    }
}

fn append(label: &[Vec<Symbol>], tail: &[Vec<Symbol>], ell: usize) -> Vec<Vec<Symbol>> {
    let mut l = label.to_vec();
    for (c, s) in l[ell..].iter_mut().zip(tail) {
        c.extend_from_slice(s);
    }
    l
}

#[cfg(test)]
mod tests {
    use super::super::fixtures;
    use super::*;

    fn labels(m: &KAutomaton) -> Vec<String> {
        m.to_text().lines().skip(1).map(str::to_string).collect()
    }

    #[test]
    fn composes_outputs() {
        let m = KAutomaton::parse(
            "automaton k=3 alphabet=2 initial=r\nr 0,1,1 p\np -,-,0 q\nq 1,0,1 r\n",
        )
        .unwrap();
        let e = eliminate_eps_input_transitions(&m, 2).unwrap();
        assert_eq!(labels(&e), ["r 0,1,10 q", "q 1,0,1 r"]);
    }

    #[test]
    fn drops_dead_end_cycles() {
        let m = KAutomaton::parse(
            "automaton k=2 alphabet=2 initial=a\na 0,0 a\na 1,1 c1\nc1 -,0 c2\nc2 -,1 c1\n",
        )
        .unwrap();
        let e = eliminate_eps_input_transitions(&m, 1).unwrap();
        assert_eq!(e.state_count(), 1);
        assert_eq!(labels(&e), ["a 0,0 a"]);
    }

    #[test]
    fn silent_initial_state() {
        let m = KAutomaton::parse("automaton k=2 alphabet=2 initial=s\ns -,11 a\na 0,0 a\na 1,1 a\n").unwrap();
        let e = eliminate_eps_input_transitions(&m, 1).unwrap();
        assert_eq!(e.state_name(e.initial()[0]), "s'");
        assert!(labels(&e).contains(&"s' 0,110 a".to_string()));
        let cyc = KAutomaton::parse("automaton k=2 alphabet=2 initial=s\ns -,1 s\n").unwrap();
        assert!(matches!(eliminate_eps_input_transitions(&cyc, 1), Err(AutomatonError::InitialRemoved)));
    }

    #[test]
    fn fixed_point_on_input_free_automata() {
        let m = fixtures::join();
        let e = eliminate_eps_input_transitions(&m, 2).unwrap();
        assert_eq!(e.to_text(), m.to_text());
        assert!(eliminate_eps_input_transitions(&fixtures::shuffle(), 2).is_err());
    }
}
