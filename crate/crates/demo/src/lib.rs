//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export returns plain text; failures come back as a line starting with `error:`.

use std::fmt::Write as _;

use fsindep_core::compression::independence_report;
use fsindep_core::normality::normality_report;
use fsindep_core::perfect::SelfSimilarSource;
use fsindep_core::source::{BernoulliSource, RandomSource, SumSource};
use fsindep_core::{Alphabet, FiniteWord, WordSource};
use wasm_bindgen::prelude::*;

/// Longest word the page will generate or analyse.
pub const MAX_LENGTH: usize = 1 << 20;

fn render(r: Result<String, String>) -> String {
    r.unwrap_or_else(|e| format!("error: {e}"))
}

fn check_length(n: usize) -> Result<(), String> {
    if n == 0 || n > MAX_LENGTH {
        return Err(format!("length must be in 1..={MAX_LENGTH}"));
    }
    Ok(())
}

pub fn self_similar_text(base: u32, length: usize) -> Result<String, String> {
    check_length(length)?;
    let x = SelfSimilarSource::new(base).map_err(|e| e.to_string())?;
    let w = x.prefix(length).map_err(|e| e.to_string())?;
    w.to_text().ok_or_else(|| "alphabet has no text form".into())
}

pub fn block_table_text(word: &str, base: u32, max_ell: usize) -> Result<String, String> {
    let a = Alphabet::new(base).map_err(|e| e.to_string())?;
    let w = FiniteWord::parse(a, word.trim()).map_err(|e| e.to_string())?;
    check_length(w.len())?;
    let r = normality_report(&w, max_ell.min(12), 3.0).map_err(|e| e.to_string())?;
    let mut out = String::from("ell  discrepancy  max_freq     worst_block\n");
    for l in &r.lengths {
        let worst = l.worst_block.to_text().unwrap_or_default();
        let _ = writeln!(out, "{:<4} {:<12.6} {:<12.6} {worst}", l.ell, l.discrepancy, l.max_frequency);
    }
    Ok(out)
}

pub fn independence_text(seed: u64, noise: f64, n: usize, k: usize) -> Result<String, String> {
    check_length(n)?;
    if !(0.0..=1.0).contains(&noise) {
        return Err("noise must lie in [0, 1]".into());
    }
    let x = RandomSource::new(Alphabet::BINARY, seed, 0);
    let y = SumSource::new(Box::new(x.clone()), Box::new(BernoulliSource::new(noise, seed, 1))).map_err(|e| e.to_string())?;
    let r = independence_report(&x, &y, n, k).map_err(|e| e.to_string())?;
    Ok(format!(
        "train {} / test {}\nrho(x)   = {:.4}\nrho(y)   = {:.4}\nrho(x|y) = {:.4}\nrho(y|x) = {:.4}\n",
        r.train_len, r.test_len, r.rho_x, r.rho_y, r.rho_x_given_y, r.rho_y_given_x
    ))
}

/// Prefix of the self-similar normal word over `base` symbols.
#[wasm_bindgen]
pub fn self_similar(base: u32, length: u32) -> String {
    render(self_similar_text(base, length as usize))
}

/// Aligned block statistics of `word` for block lengths up to `max_ell`.
#[wasm_bindgen]
pub fn block_table(word: &str, base: u32, max_ell: u32) -> String {
    render(block_table_text(word, base, max_ell as usize))
}

/// Compression estimates for a random `x` and `y = x` XOR Bernoulli(`noise`).
#[wasm_bindgen]
pub fn independence(seed: u32, noise: f64, n: u32, k: u32) -> String {
    render(independence_text(seed as u64, noise, n as usize, k as usize))
}
