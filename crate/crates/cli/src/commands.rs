use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fsindep_core::automata::{
    check_l_deterministic, eliminate_eps_input_transitions, find_forward_word, forward_pairs, forward_pairs_within, KAutomaton,
};
use fsindep_core::compression::{build_prefix_code, cond_decode, cond_encode, independence_report, plain_ratio, train_model};
use fsindep_core::normality::block_counts;
use fsindep_core::perfect::{build_sequence, SelfSimilarSource};
use fsindep_core::source::{FiniteSource, RandomSource};
use fsindep_core::word::even;
use fsindep_core::{Alphabet, FiniteWord, WordSource};

use crate::error::CliError;
use crate::experiments::{independence_csv, independence_trials, run_experiment, ExperimentConfig, ExperimentName};
use crate::io::{check_memory, emit, fmt_f, read_word, take_prefix, text, word_text};
use crate::spec::GeneratorSpec;

#[derive(Debug, Parser)]
#[command(name = "fsindep", version, about = "Finite-state independence of infinite words")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a prefix of a generated word to a word file.
    Generate(GenerateArgs),
    /// Block statistics of a word file as CSV.
    Stats(StatsArgs),
    /// Check ℓ-determinism of an automaton file and optionally transform or probe it.
    CheckAutomaton(CheckArgs),
    /// Compression ratio of a word under a 1-deterministic 2-automaton.
    Compress(CompressArgs),
    /// Conditional block-entropy compression of x given y.
    Condcompress(CondArgs),
    /// Independence estimates over seeded trials as CSV.
    Independence(IndependenceArgs),
    /// Run a named experiment and emit its CSV report.
    Experiment(ExperimentArgs),
    /// Stages of the perfect-word construction as CSV.
    PerfectSequence(PerfectArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GenerateKind {
    SelfSimilar,
    Random,
    Spec,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub kind: GenerateKind,
    #[arg(long)]
    pub length: usize,
    #[arg(long, default_value_t = 2)]
    pub base: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// Generator spec, required for `spec`.
    #[arg(long)]
    pub spec: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub word: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub alphabet: u32,
    #[arg(long, default_value_t = 8)]
    pub max_block: usize,
    /// Count aligned occurrences only.
    #[arg(long)]
    pub aligned: bool,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub automaton: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub ell: usize,
    /// Print the automaton with ε-input transitions removed.
    #[arg(long)]
    pub eliminate: bool,
    /// Print the forward pairs of this word.
    #[arg(long)]
    pub forward_pairs: Option<String>,
    /// Search words up to this length for the most forward pairs.
    #[arg(long)]
    pub forward_word: Option<usize>,
    /// Only count pairs whose input read happens strictly inside the word.
    #[arg(long)]
    pub within: bool,
}

#[derive(Debug, Args)]
pub struct CompressArgs {
    #[arg(long)]
    pub automaton: PathBuf,
    #[arg(long)]
    pub word: PathBuf,
    #[arg(short = 'n', long)]
    pub n: usize,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CondArgs {
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub y: PathBuf,
    #[arg(short = 'k', long, default_value_t = 8)]
    pub k: usize,
    #[arg(short = 'n', long)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub alphabet: u32,
    /// Write the code of the second half of x to this word file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IndependenceArgs {
    #[arg(long, default_value = "rand:seed=0,stream=0,b=2")]
    pub x_gen: String,
    #[arg(long, default_value = "rand:seed=0,stream=1,b=2")]
    pub y_gen: String,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short = 'n', long, default_value_t = 1 << 20)]
    pub n: usize,
    #[arg(short = 'k', long, default_value_t = 8)]
    pub k: usize,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ExperimentKind {
    JoinDependence,
    MeasureOne,
    JoinNormal,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    pub name: ExperimentKind,
    #[arg(short = 'n', long)]
    pub n: Option<usize>,
    #[arg(short = 'k', long, default_value_t = 8)]
    pub k: usize,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PerfectArgs {
    #[arg(long, default_value_t = 12)]
    pub stages: usize,
    /// Include each stage word (stages up to 16 only).
    #[arg(long)]
    pub words: bool,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

impl Command {
    pub fn execute(self, stdout: &mut dyn Write) -> Result<(), CliError> {
        match self {
            Command::Generate(a) => generate(a, stdout),
            Command::Stats(a) => stats(a, stdout),
            Command::CheckAutomaton(a) => check_automaton(a, stdout),
            Command::Compress(a) => compress(a, stdout),
            Command::Condcompress(a) => condcompress(a, stdout),
            Command::Independence(a) => independence(a, stdout),
            Command::Experiment(a) => experiment(a, stdout),
            Command::PerfectSequence(a) => perfect_sequence(a, stdout),
        }
    }
}

fn alphabet(b: u32) -> Result<Alphabet, CliError> {
    let a = Alphabet::new(b)?;
    if b > Alphabet::MAX_TEXT {
        return Err(CliError::Usage(format!("alphabet size {b} has no text form (max {})", Alphabet::MAX_TEXT)));
    }
    Ok(a)
}

fn generate(a: GenerateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let src: Box<dyn WordSource> = match a.kind {
        GenerateKind::SelfSimilar => Box::new(SelfSimilarSource::new(alphabet(a.base)?.size())?),
        GenerateKind::Random => Box::new(RandomSource::new(alphabet(a.base)?, a.seed, a.stream)),
        GenerateKind::Spec => {
            let spec: GeneratorSpec = a.spec.as_deref().ok_or_else(|| CliError::Usage("--spec is required".into()))?.parse()?;
            spec.build()?
        }
    };
    let w = take_prefix(&*src, a.length)?;
    emit(a.out.as_deref(), &word_text(&w)?, stdout)
}

fn stats(a: StatsArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let w = read_word(&a.word, alphabet(a.alphabet)?)?;
    if a.max_block == 0 {
        return Err(CliError::Usage("--max-block must be at least 1".into()));
    }
    let mut out = String::from("row,ell,block,count,value\n");
    for ell in 1..=a.max_block.min(w.len()) {
        let t = block_counts(&w, ell, a.aligned)?;
        let total = t.total_positions();
        for (u, c) in t.iter() {
            let _ = writeln!(out, "block,{ell},{},{c},{}", text(&u)?, fmt_f(c as f64 / total.max(1) as f64));
        }
        let (dev, code) = t.max_deviation();
        let worst = t.iter().nth(code).map(|(u, _)| text(&u)).transpose()?.unwrap_or_default();
        let _ = writeln!(out, "summary,{ell},{worst},{total},{}", fmt_f(dev));
    }
    emit(a.csv.as_deref(), &out, stdout)
}

fn load_automaton(path: &Path) -> Result<KAutomaton, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    KAutomaton::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn check_automaton(a: CheckArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let m = load_automaton(&a.automaton)?;
    let report = check_l_deterministic(&m, a.ell)?;
    let mut out = String::new();
    let _ = writeln!(out, "states: {}", m.state_count());
    let _ = writeln!(out, "transitions: {}", m.transitions().len());
    let _ = writeln!(out, "{}-deterministic: {}", a.ell, if report.deterministic { "yes" } else { "no" });
    for line in report.describe(&m) {
        let _ = writeln!(out, "violation: {line}");
    }
    if !report.deterministic {
        emit(None, &out, stdout)?;
        return Err(CliError::Domain(format!("automaton is not {}-deterministic", a.ell)));
    }
    if a.eliminate {
        let e = eliminate_eps_input_transitions(&m, a.ell)?;
        let _ = writeln!(out, "eliminated:");
        out.push_str(&e.to_text());
    }
    if let Some(v) = &a.forward_pairs {
        let v = FiniteWord::parse(m.alphabet(), v)?;
        let pairs = if a.within { forward_pairs_within(&m, &v)? } else { forward_pairs(&m, &v)? };
        let _ = writeln!(out, "forward pairs of {}: {}", text(&v)?, pairs.len());
        for (q, s) in pairs {
            let _ = writeln!(out, "  ({}, {})", m.state_name(q), m.alphabet().symbol_char(s).unwrap_or('?'));
        }
    }
    if let Some(max_len) = a.forward_word {
        let r = find_forward_word(&m, max_len, a.within)?;
        let _ = writeln!(out, "forward word: {} ({} pairs, horizon {})", text(&r.word)?, r.pair_count, r.horizon);
    }
    emit(None, &out, stdout)
}

fn compress(a: CompressArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let m = load_automaton(&a.automaton)?;
    let w = read_word(&a.word, m.alphabet())?;
    if w.len() < a.n {
        return Err(CliError::Usage(format!("word has {} symbols, fewer than n = {}", w.len(), a.n)));
    }
    let est = plain_ratio(&m, Box::new(FiniteSource::new(w)), a.n)?;
    let mut csv = String::from("input,output,ratio\n");
    for c in &est.checkpoints {
        let _ = writeln!(csv, "{},{},{}", c.input, c.output, fmt_f(c.ratio()));
    }
    if let Some(h) = &est.halt {
        return Err(CliError::Domain(format!(
            "automaton halted ({h:?}) after {} of {} symbols; ratio so far {}",
            est.checkpoints.last().map_or(0, |c| c.input),
            a.n,
            fmt_f(est.final_ratio)
        )));
    }
    let summary = format!("n: {}\nratio: {}\nmin_ratio: {}\n", est.n_total, fmt_f(est.final_ratio), fmt_f(est.min_ratio));
    match &a.csv {
        Some(p) => {
            emit(Some(p), &csv, stdout)?;
            emit(None, &summary, stdout)
        }
        None => emit(None, &summary, stdout),
    }
}

fn condcompress(a: CondArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let b = alphabet(a.alphabet)?;
    let (x, y) = (read_word(&a.x, b)?, read_word(&a.y, b)?);
    if x.len() < a.n || y.len() < a.n {
        return Err(CliError::Usage(format!("both words need at least n = {} symbols", a.n)));
    }
    let xs = FiniteSource::new(x.clone());
    let ys = FiniteSource::new(y.clone());
    let r = independence_report(&xs, &ys, a.n, a.k)?;
    check_memory(4 * a.n)?;
    let model = train_model(&x.factor(1, r.train_len)?, &y.factor(1, r.train_len)?, a.k)?;
    let code = build_prefix_code(&model)?;
    let test = |w: &FiniteWord| -> Result<Box<dyn WordSource>, CliError> {
        Ok(Box::new(FiniteSource::new(w.factor(r.train_len + 1, r.train_len + r.test_len)?)))
    };
    let (output, _) = cond_encode(test(&x)?, test(&y)?, &code, r.test_len)?;
    let decoded = cond_decode(&output, test(&y)?, &code, r.test_len)?;
    if decoded != x.factor(r.train_len + 1, r.train_len + r.test_len)? {
        return Err(CliError::Domain("decoding did not reproduce x".into()));
    }
    let summary = format!(
        "train: {}\ntest: {}\nrho_x: {}\nrho_y: {}\nrho_x_given_y: {}\nrho_y_given_x: {}\nround_trip: ok\n",
        r.train_len,
        r.test_len,
        fmt_f(r.rho_x),
        fmt_f(r.rho_y),
        fmt_f(r.rho_x_given_y),
        fmt_f(r.rho_y_given_x)
    );
    if let Some(p) = &a.out {
        emit(Some(p), &word_text(&output)?, stdout)?;
    }
    emit(None, &summary, stdout)
}

fn independence(a: IndependenceArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let x: GeneratorSpec = a.x_gen.parse()?;
    let y: GeneratorSpec = a.y_gen.parse()?;
    let reports = independence_trials(&x, &y, a.n, a.k, a.trials, a.seed)?;
    emit(a.csv.as_deref(), &independence_csv(&reports, a.n, a.k), stdout)
}

fn experiment(a: ExperimentArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (name, n, trials) = match a.name {
        ExperimentKind::JoinDependence => (ExperimentName::JoinDependence, 1 << 20, 1),
        ExperimentKind::MeasureOne => (ExperimentName::MeasureOne, 1_000_000, 50),
        ExperimentKind::JoinNormal => (ExperimentName::JoinNormal, 1_000_000, 1),
    };
    let cfg = ExperimentConfig {
        name,
        n: a.n.unwrap_or(n),
        k: a.k,
        trials: a.trials.unwrap_or(trials),
        seed: a.seed,
        output: a.csv,
    };
    let csv = run_experiment(&cfg)?;
    emit(cfg.output.as_deref(), &csv, stdout)
}

fn perfect_sequence(a: PerfectArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    if a.words && a.stages > 16 {
        return Err(CliError::Usage("--words is limited to 16 stages".into()));
    }
    if a.stages > 40 {
        return Err(CliError::Resource(format!("{} stages need 2^{} symbols", a.stages, a.stages)));
    }
    check_memory(2usize << a.stages)?;
    let stages = build_sequence(a.stages)?;
    let mut out = String::from(if a.words { "n,ell,length,extends_previous,word\n" } else { "n,ell,length,extends_previous\n" });
    for (i, s) in stages.iter().enumerate() {
        let extends = i == 0 || even(&s.word) == stages[i - 1].word;
        let _ = write!(out, "{},{},{},{}", s.n, s.ell, s.word.len(), extends as u8);
        if a.words {
            let _ = write!(out, ",{}", text(&s.word)?);
        }
        out.push('\n');
    }
    emit(a.csv.as_deref(), &out, stdout)
}
