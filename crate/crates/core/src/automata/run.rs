use std::collections::VecDeque;
use std::sync::Arc;

use super::{check_l_deterministic, AutomatonError, KAutomaton, StateId, Transition};
use crate::source::WordSource;
use crate::word::{Alphabet, FiniteWord, Symbol};

const TABLE_CAP: u64 = 1 << 16;

/// An ℓ-deterministic automaton prepared for execution: per state, the input tapes it
/// reads and a dense table from the symbols read to the transition that fires.
#[derive(Debug)]
pub struct Compiled {
    automaton: KAutomaton,
    ell: usize,
    reads: Vec<Vec<usize>>,
    table: Vec<Vec<u32>>,
}

impl Compiled {
    pub fn new(m: &KAutomaton, ell: usize) -> Result<Self, AutomatonError> {
        let report = check_l_deterministic(m, ell)?;
        if !report.deterministic {
            return Err(AutomatonError::NotDeterministic { ell });
        }
        let b = m.alphabet().size() as u64;
        let mut reads = Vec::with_capacity(m.state_count());
        let mut table = Vec::with_capacity(m.state_count());
        for q in 0..m.state_count() {
            let out = m.outgoing(q);
            let Some(&first) = out.first() else {
                reads.push(Vec::new());
                table.push(Vec::new());
                continue;
            };
            let r: Vec<usize> = (0..ell).filter(|&i| !m.transitions()[first].label[i].is_empty()).collect();
            let size = b.pow(r.len() as u32);
            if size > TABLE_CAP {
                return Err(AutomatonError::TooLarge { what: "transition table", size: size as u128, cap: TABLE_CAP });
            }
            let mut tab = vec![0u32; size as usize];
            for &i in out {
                let t = &m.transitions()[i];
                let code = r.iter().rev().fold(0u64, |c, &tape| c * b + t.label[tape][0] as u64);
                tab[code as usize] = i as u32 + 1;
            }
            reads.push(r);
            table.push(tab);
        }
        Ok(Compiled { automaton: m.clone(), ell, reads, table })
    }

    pub fn automaton(&self) -> &KAutomaton {
        &self.automaton
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn alphabet(&self) -> Alphabet {
        self.automaton.alphabet()
    }

    pub fn output_tapes(&self) -> usize {
        self.automaton.tapes() - self.ell
    }

    /// Input tapes (0-based) read by every transition leaving `q`.
    pub fn reads(&self, q: StateId) -> &[usize] {
        &self.reads[q]
    }

    pub fn initial(&self) -> StateId {
        self.automaton.initial()[0]
    }

    pub fn transition(&self, i: usize) -> &Transition {
        &self.automaton.transitions()[i]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HaltReason {
    /// No transition matches the symbols under the input heads.
    NoTransition,
    /// The step budget ran out before the input budget was reached.
    StepBudget,
    /// A finite input tape (0-based index) ran out of symbols.
    InputExhausted { tape: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Fired(usize),
    Halted(HaltReason),
}

/// Step-by-step execution of a compiled automaton over input sources.
pub struct Executor {
    compiled: Arc<Compiled>,
    inputs: Vec<Box<dyn WordSource>>,
    lookahead: Vec<Option<Symbol>>,
    state: StateId,
    consumed: Vec<usize>,
}

impl Executor {
    pub fn new(compiled: Arc<Compiled>, inputs: Vec<Box<dyn WordSource>>) -> Result<Self, AutomatonError> {
        let ell = compiled.ell();
        if inputs.len() != ell {
            return Err(AutomatonError::InputCount { expected: ell, got: inputs.len() });
        }
        for s in &inputs {
            if s.alphabet() != compiled.alphabet() {
                return Err(crate::word::WordError::AlphabetMismatch(s.alphabet().size(), compiled.alphabet().size()).into());
            }
        }
        let state = compiled.initial();
        Ok(Executor { compiled, inputs, lookahead: vec![None; ell], state, consumed: vec![0; ell] })
    }

    pub fn state(&self) -> StateId {
        self.state
    }

    pub fn consumed(&self) -> &[usize] {
        &self.consumed
    }

    pub fn compiled(&self) -> &Compiled {
        &self.compiled
    }

    /// Whether the next transition (if any) reads input tape `tape`.
    pub fn next_reads(&self, tape: usize) -> bool {
        self.compiled.reads[self.state].contains(&tape)
    }

    pub fn step(&mut self) -> StepOutcome {
        let c = &*self.compiled;
        let q = self.state;
        if c.table[q].is_empty() {
            return StepOutcome::Halted(HaltReason::NoTransition);
        }
        let b = c.alphabet().size() as u64;
        let mut code = 0u64;
        for &tape in c.reads[q].iter().rev() {
            if self.lookahead[tape].is_none() {
                self.lookahead[tape] = self.inputs[tape].next_symbol();
            }
            match self.lookahead[tape] {
                Some(s) => code = code * b + s as u64,
                None => return StepOutcome::Halted(HaltReason::InputExhausted { tape }),
            }
        }
        let i = c.table[q][code as usize];
        if i == 0 {
            return StepOutcome::Halted(HaltReason::NoTransition);
        }
        for &tape in &c.reads[q] {
            self.lookahead[tape] = None;
            self.consumed[tape] += 1;
        }
        let i = i as usize - 1;
        self.state = c.transition(i).to;
        StepOutcome::Fired(i)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Checkpoint {
    /// Symbols consumed from input tape 1.
    pub input: usize,
    /// Symbols written on all output tapes.
    pub output: usize,
}

impl Checkpoint {
    pub fn ratio(&self) -> f64 {
        self.output as f64 / self.input as f64
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    /// Stop once this many symbols have been consumed from input tape 1.
    pub input_symbols: usize,
    /// Defaults to `16 * input_symbols + 4096`.
    pub max_steps: Option<usize>,
    /// Keep the visited states and fired transitions.
    pub record_path: bool,
}

impl RunOptions {
    pub fn new(input_symbols: usize) -> Self {
        RunOptions { input_symbols, max_steps: None, record_path: true }
    }

    pub fn without_path(mut self) -> Self {
        self.record_path = false;
        self
    }

    pub fn max_steps(mut self, steps: usize) -> Self {
        self.max_steps = Some(steps);
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    /// Visited states, starting with the initial one (empty unless the path is recorded).
    pub states: Vec<StateId>,
    /// Fired transitions, as indices into the automaton's transition list.
    pub transitions: Vec<usize>,
    /// Symbols consumed per input tape.
    pub consumed: Vec<usize>,
    /// Contents written per output tape.
    pub outputs: Vec<FiniteWord>,
    /// Taken at powers of two and at the budget, just before tape 1 is read again.
    pub checkpoints: Vec<Checkpoint>,
    pub halt: Option<HaltReason>,
    pub steps: usize,
}

impl RunTrace {
    pub fn halted(&self) -> bool {
        self.halt.is_some()
    }

    pub fn output_len(&self) -> usize {
        self.outputs.iter().map(FiniteWord::len).sum()
    }
}

/// Executes the unique run of an ℓ-deterministic automaton on `inputs` until `n`
/// symbols of tape 1 are consumed and the next transition would read tape 1 again,
/// or until the run halts.
pub fn run(m: &KAutomaton, ell: usize, inputs: Vec<Box<dyn WordSource>>, options: RunOptions) -> Result<RunTrace, AutomatonError> {
    let compiled = Arc::new(Compiled::new(m, ell)?);
    run_compiled(compiled, inputs, options)
}

pub fn run_compiled(compiled: Arc<Compiled>, inputs: Vec<Box<dyn WordSource>>, options: RunOptions) -> Result<RunTrace, AutomatonError> {
    let n = options.input_symbols;
    let max_steps = options.max_steps.unwrap_or(n.saturating_mul(16).saturating_add(4096));
    let alphabet = compiled.alphabet();
    let out_tapes = compiled.output_tapes();
    let ell = compiled.ell();
    let mut exec = Executor::new(compiled.clone(), inputs)?;
    let mut trace = RunTrace {
        states: Vec::new(),
        transitions: Vec::new(),
        consumed: Vec::new(),
        outputs: vec![FiniteWord::empty(alphabet); out_tapes],
        checkpoints: Vec::new(),
        halt: None,
        steps: 0,
    };
    if options.record_path {
        trace.states.push(exec.state());
    }
    let mut out_len = 0usize;
    let mut next_power = 1usize;
    loop {
        if exec.next_reads(0) {
            let c = exec.consumed()[0];
            if c >= next_power || c >= n {
                if c > 0 && trace.checkpoints.last().is_none_or(|l| l.input < c) {
                    trace.checkpoints.push(Checkpoint { input: c, output: out_len });
                }
                while next_power <= c {
                    next_power *= 2;
                }
            }
            if c >= n {
                break;
            }
        }
        if trace.steps >= max_steps {
            trace.halt = Some(HaltReason::StepBudget);
            break;
        }
        match exec.step() {
            StepOutcome::Fired(i) => {
                trace.steps += 1;
                let t = compiled.transition(i);
                for (tape, comp) in t.label[ell..].iter().enumerate() {
                    for &s in comp {
                        trace.outputs[tape].push(s)?;
                    }
                    out_len += comp.len();
                }
                if options.record_path {
                    trace.transitions.push(i);
                    trace.states.push(t.to);
                }
            }
            StepOutcome::Halted(reason) => {
                trace.halt = Some(reason);
                break;
            }
        }
    }
    let c = exec.consumed()[0];
    if trace.halt.is_some() && c > 0 && trace.checkpoints.last().is_none_or(|l| l.input < c) {
        trace.checkpoints.push(Checkpoint { input: c, output: out_len });
    }
    trace.consumed = exec.consumed().to_vec();
    Ok(trace)
}

/// The first output tape of a 1-deterministic 2-automaton run on `x`, as a lazy source.
/// The source ends when the run halts.
pub struct TransducerSource {
    exec: Executor,
    template: Box<dyn WordSource>,
    buffer: VecDeque<Symbol>,
    done: bool,
}

/// Silent steps tolerated before the transducer is considered stuck.
const MAX_SILENT_STEPS: usize = 1 << 20;

impl TransducerSource {
    pub fn new(compiled: Arc<Compiled>, x: Box<dyn WordSource>) -> Result<Self, AutomatonError> {
        if compiled.ell() != 1 || compiled.output_tapes() != 1 {
            return Err(AutomatonError::BadEll { ell: compiled.ell(), tapes: compiled.automaton().tapes() });
        }
        let template = x.restart();
        Ok(TransducerSource { exec: Executor::new(compiled, vec![x])?, template, buffer: VecDeque::new(), done: false })
    }

    pub fn from_automaton(m: &KAutomaton, x: Box<dyn WordSource>) -> Result<Self, AutomatonError> {
        Self::new(Arc::new(Compiled::new(m, 1)?), x)
    }

    /// Input symbols consumed so far.
    pub fn consumed(&self) -> usize {
        self.exec.consumed()[0]
    }
}

impl WordSource for TransducerSource {
    fn alphabet(&self) -> Alphabet {
        self.exec.compiled().alphabet()
    }

    fn next_symbol(&mut self) -> Option<Symbol> {
        let mut silent = 0;
        while self.buffer.is_empty() && !self.done {
            match self.exec.step() {
                StepOutcome::Fired(i) => {
                    let out = &self.exec.compiled().transition(i).label[1];
                    self.buffer.extend(out.iter().copied());
                    silent += 1;
                    if silent >= MAX_SILENT_STEPS && self.buffer.is_empty() {
                        self.done = true;
                    }
                }
                StepOutcome::Halted(_) => self.done = true,
            }
        }
        self.buffer.pop_front()
    }

    fn restart(&self) -> Box<dyn WordSource> {
        let compiled = self.exec.compiled.clone();
        Box::new(TransducerSource::new(compiled, self.template.restart()).expect("validated on construction"))
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures;
    use super::*;
    use crate::source::{FiniteSource, PeriodicSource, RandomSource};

    fn finite(text: &str) -> Box<dyn WordSource> {
        Box::new(FiniteSource::new(FiniteWord::parse(Alphabet::BINARY, text).unwrap()))
    }

    #[test]
    fn join_hand_simulation() {
        let m = fixtures::join();
        let t = run(&m, 2, vec![finite("01"), finite("10")], RunOptions::new(2)).unwrap();
        assert_eq!(t.outputs[0].to_text().unwrap(), "0110");
        let names: Vec<&str> = t.states.iter().map(|&q| m.state_name(q)).collect();
        assert_eq!(names, ["q0", "q1", "q0", "q1", "q0"]);
        assert_eq!(t.consumed, vec![2, 2]);
        assert_eq!(t.halt, None);
    }

    #[test]
    fn copy_reproduces_prefix() {
        let x = RandomSource::new(Alphabet::BINARY, 5, 0);
        let t = run(&fixtures::copy(), 1, vec![Box::new(x.restart())], RunOptions::new(1000)).unwrap();
        assert_eq!(t.outputs[0], x.prefix(1000).unwrap());
        let inputs: Vec<usize> = t.checkpoints.iter().map(|c| c.input).collect();
        assert_eq!(inputs, [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1000]);
        assert!(t.checkpoints.iter().all(|c| c.output == c.input));
    }

    #[test]
    fn missing_transition_halts_with_counts() {
        let m = KAutomaton::parse("automaton k=2 alphabet=2 initial=a\na 0,1 a\n").unwrap();
        let t = run(&m, 1, vec![finite("0010")], RunOptions::new(4)).unwrap();
        assert_eq!(t.halt, Some(HaltReason::NoTransition));
        assert_eq!(t.consumed, vec![2]);
        assert_eq!(t.outputs[0].to_text().unwrap(), "11");
        assert_eq!(t.checkpoints.last().unwrap().input, 2);
    }

    #[test]
    fn exhaustion_and_step_budget() {
        let t = run(&fixtures::copy(), 1, vec![finite("01")], RunOptions::new(5)).unwrap();
        assert_eq!(t.halt, Some(HaltReason::InputExhausted { tape: 0 }));
        let spin = KAutomaton::parse("automaton k=2 alphabet=2 initial=a\na -,0 a\n").unwrap();
        let t = run(&spin, 1, vec![finite("0")], RunOptions::new(1).max_steps(10)).unwrap();
        assert_eq!(t.halt, Some(HaltReason::StepBudget));
        assert_eq!(t.outputs[0].len(), 10);
    }

    #[test]
    fn rejects_nondeterministic() {
        let e = run(&fixtures::shuffle(), 2, vec![finite("0"), finite("0")], RunOptions::new(1)).unwrap_err();
        assert!(matches!(e, AutomatonError::NotDeterministic { ell: 2 }));
    }

    #[test]
    fn transducer_source_computes_odd_track() {
        let x = PeriodicSource::new(FiniteWord::parse(Alphabet::BINARY, "0111").unwrap()).unwrap();
        let mut f = TransducerSource::from_automaton(&fixtures::odd(), Box::new(x)).unwrap();
        assert_eq!(f.take_word(6).unwrap().to_text().unwrap(), "010101");
        assert_eq!(f.prefix(2).unwrap().to_text().unwrap(), "01");
    }
}
