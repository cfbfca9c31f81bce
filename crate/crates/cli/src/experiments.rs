//! Experiment drivers. Each returns its CSV report as a string.

use std::fmt::Write as _;
use std::path::PathBuf;

use fsindep_core::automata::fixtures;
use fsindep_core::compression::{independence_report, match_run_compress, match_run_decode, IndependenceReport};
use fsindep_core::normality::{block_counts, discrepancy};
use fsindep_core::perfect::SelfSimilarSource;
use fsindep_core::source::{PeriodicSource, RandomSource, TrackSource};
use fsindep_core::word::{even, join, odd};
use fsindep_core::{Alphabet, WordSource};
use rayon::prelude::*;

use crate::error::CliError;
use crate::io::{check_memory, fmt_f, take_prefix};
use crate::spec::GeneratorSpec;

pub const INDEPENDENCE_HEADER: &str = "trial,n,k,rho_x,rho_y,rho_x_given_y,rho_y_given_x";
pub const QUANTITY_HEADER: &str = "quantity,subject,param,value";

/// Longest block length reported by the normality experiments.
pub const MAX_ELL: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentName {
    JoinDependence,
    MeasureOne,
    JoinNormal,
}

impl ExperimentName {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::JoinDependence => "join-dependence",
            ExperimentName::MeasureOne => "measure-one",
            ExperimentName::JoinNormal => "join-normal",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub name: ExperimentName,
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.k == 0 || self.n == 0 {
            return Err(CliError::Usage("n and k must be positive".into()));
        }
        if !self.n.is_multiple_of(self.k) {
            return Err(CliError::Usage(format!("n = {} is not a multiple of k = {}", self.n, self.k)));
        }
        if self.trials == 0 {
            return Err(CliError::Usage("trials must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<String, CliError> {
    match cfg.name {
        ExperimentName::JoinDependence => exp_join_dependence(cfg),
        ExperimentName::MeasureOne => exp_measure_one(cfg),
        ExperimentName::JoinNormal => exp_join_normal(cfg),
    }
}

/// `5 · sqrt(b^ℓ / len)`: a loose central-limit band for the discrepancy of a random word.
pub fn random_band(b: u32, ell: usize, len: usize) -> f64 {
    5.0 * ((b as f64).powi(ell as i32) / len as f64).sqrt()
}

fn row(out: &mut String, quantity: &str, subject: &str, param: impl std::fmt::Display, value: f64) {
    let _ = writeln!(out, "{quantity},{subject},{param},{}", fmt_f(value));
}

/// The self-similar word split into its odd and even tracks: the tracks join back into
/// a normal word while the odd track is compressible given the even one.
pub fn exp_join_dependence(cfg: &ExperimentConfig) -> Result<String, CliError> {
    cfg.validate()?;
    let n = cfg.n;
    check_memory(4 * n)?;
    let source = SelfSimilarSource::binary();
    let x2 = take_prefix(&source, 2 * n)?;
    let y = odd(&x2);
    let z = even(&x2);
    let joined = join(&y, &z)?;
    let mut out = format!("{QUANTITY_HEADER}\n");
    row(&mut out, "join_equals_x", "x", joined.len(), (joined == x2) as u8 as f64);
    row(&mut out, "even_equals_x", "z", n, (z == x2.factor(1, n)?) as u8 as f64);
    for (name, w) in [("y", &y), ("z", &z), ("x", &joined)] {
        for ell in 1..=MAX_ELL.min(w.len()) {
            row(&mut out, "discrepancy", name, ell, discrepancy(w, ell)?);
        }
    }
    for ell in 1..=MAX_ELL.min(joined.len()) {
        let t = block_counts(&joined, ell, true)?;
        let max = t.counts().iter().copied().max().unwrap_or(0);
        row(&mut out, "max_frequency", "x", ell, max as f64 / t.total_positions().max(1) as f64);
        row(&mut out, "frequency_bound", "x", ell, 3.0 / (1u64 << ell) as f64 + 0.02);
    }
    let t = fixtures::odd();
    let mut ks = vec![1, 2, 4, 8, 16, 32, cfg.k];
    ks.sort_unstable();
    ks.dedup();
    for k in ks {
        let r = match_run_compress(&t, k, Box::new(TrackSource::odd(source.restart())), source.restart(), n)?;
        let fx = Box::new(TrackSource::odd(source.restart()));
        let decoded = match_run_decode(&r.output, fx, k, n)?;
        row(&mut out, "match_run_ratio", "y_given_z", k, r.estimate.final_ratio);
        row(&mut out, "match_run_mismatch", "y_given_z", k, r.first_mismatch.is_some() as u8 as f64);
        row(&mut out, "match_run_decodes", "y_given_z", k, (decoded == y) as u8 as f64);
    }
    Ok(out)
}

/// Default generators for random pairs: two streams of one ChaCha key.
pub fn default_pair() -> (GeneratorSpec, GeneratorSpec) {
    (
        GeneratorSpec::Random { seed: 0, stream: 0, base: 2 },
        GeneratorSpec::Random { seed: 0, stream: 1, base: 2 },
    )
}

/// One report per trial. Trial `t` shifts every random seed in both specs by
/// `seed + t`; trials run in parallel and come back in trial order.
pub fn independence_trials(
    x: &GeneratorSpec,
    y: &GeneratorSpec,
    n: usize,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<IndependenceReport>, CliError> {
    if k == 0 || !n.is_multiple_of(k) {
        return Err(CliError::Usage(format!("n = {n} must be a positive multiple of k = {k}")));
    }
    if trials == 0 {
        return Err(CliError::Usage("trials must be at least 1".into()));
    }
    check_memory(2 * n * trials.min(rayon::current_num_threads()))?;
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let offset = seed.wrapping_add(t);
            let xs = x.reseeded(offset).build()?;
            let ys = y.reseeded(offset).build()?;
            Ok(independence_report(&*xs, &*ys, n, k)?)
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 }
}

pub fn independence_csv(reports: &[IndependenceReport], n: usize, k: usize) -> String {
    let mut out = format!("{INDEPENDENCE_HEADER}\n");
    let cols = |r: &IndependenceReport| [r.rho_x, r.rho_y, r.rho_x_given_y, r.rho_y_given_x];
    for (t, r) in reports.iter().enumerate() {
        let [a, b, c, d] = cols(r).map(fmt_f);
        let _ = writeln!(out, "{t},{n},{k},{a},{b},{c},{d}");
    }
    let column = |i: usize| reports.iter().map(|r| cols(r)[i]).collect::<Vec<f64>>();
    let mins = [0, 1, 2, 3].map(|i| fmt_f(column(i).into_iter().fold(f64::INFINITY, f64::min)));
    let meds = [0, 1, 2, 3].map(|i| fmt_f(median(column(i))));
    let _ = writeln!(out, "min,{n},{k},{}", mins.join(","));
    let _ = writeln!(out, "median,{n},{k},{}", meds.join(","));
    out
}

/// Seeded random pairs: per-trial independence estimates with min/median summary.
pub fn exp_measure_one(cfg: &ExperimentConfig) -> Result<String, CliError> {
    cfg.validate()?;
    let (x, y) = default_pair();
    let reports = independence_trials(&x, &y, cfg.n, cfg.k, cfg.trials, cfg.seed)?;
    Ok(independence_csv(&reports, cfg.n, cfg.k))
}

/// Discrepancy of the join of two seeded random words, with a constant-word control.
pub fn exp_join_normal(cfg: &ExperimentConfig) -> Result<String, CliError> {
    cfg.validate()?;
    let n = cfg.n;
    check_memory(6 * n)?;
    let x = take_prefix(&RandomSource::new(Alphabet::BINARY, cfg.seed, 0), n)?;
    let y = take_prefix(&RandomSource::new(Alphabet::BINARY, cfg.seed, 1), n)?;
    let z = join(&x, &y)?;
    let mut out = format!("{QUANTITY_HEADER}\n");
    row(&mut out, "odd_recovers", "join", z.len(), (odd(&z) == x) as u8 as f64);
    row(&mut out, "even_recovers", "join", z.len(), (even(&z) == y) as u8 as f64);
    for ell in 1..=MAX_ELL.min(z.len()) {
        row(&mut out, "discrepancy", "join", ell, discrepancy(&z, ell)?);
        row(&mut out, "band", "join", ell, random_band(2, ell, z.len()));
    }
    let zero = take_prefix(&PeriodicSource::constant(Alphabet::BINARY, 0)?, n)?;
    let c = join(&zero, &zero)?;
    for ell in 1..=MAX_ELL.min(c.len()) {
        row(&mut out, "discrepancy", "join_constant", ell, discrepancy(&c, ell)?);
    }
    Ok(out)
}
