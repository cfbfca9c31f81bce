use std::path::Path;

use fsindep_core::{Alphabet, FiniteWord, WordSource};

use crate::error::CliError;

pub const MEM_ENV: &str = "FSINDEP_MAX_MEM_MB";

/// Reads a word file: symbol characters with at most one trailing newline.
pub fn read_word(path: &Path, alphabet: Alphabet) -> Result<FiniteWord, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    check_memory(text.len())?;
    let body = text.strip_suffix('\n').unwrap_or(&text);
    FiniteWord::parse(alphabet, body).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Text form of a word; alphabets above 36 symbols have none.
pub fn text(w: &FiniteWord) -> Result<String, CliError> {
    w.to_text().ok_or_else(|| CliError::Usage(format!("alphabet of size {} has no text form", w.alphabet().size())))
}

pub fn word_text(w: &FiniteWord) -> Result<String, CliError> {
    let mut s = text(w)?;
    s.push('\n');
    Ok(s)
}

/// Writes `contents` to `path`, or to stdout when there is no path.
pub fn emit(path: Option<&Path>, contents: &str, stdout: &mut dyn std::io::Write) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, contents).map_err(|e| CliError::io(p, e)),
        None => stdout.write_all(contents.as_bytes()).map_err(|e| CliError::io("<stdout>", e)),
    }
}

/// Byte budget from the environment, if set.
pub fn memory_cap() -> Result<Option<u64>, CliError> {
    match std::env::var(MEM_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map(|mb| Some(mb.saturating_mul(1 << 20)))
            .map_err(|_| CliError::Usage(format!("{MEM_ENV} must be a whole number of megabytes, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

/// Materialized prefixes are budgeted at one byte per symbol.
pub fn check_memory(symbols: usize) -> Result<(), CliError> {
    if let Some(cap) = memory_cap()? {
        if symbols as u64 > cap {
            return Err(CliError::Resource(format!(
                "materializing {symbols} symbols exceeds {MEM_ENV}={}",
                cap >> 20
            )));
        }
    }
    Ok(())
}

pub fn take_prefix(src: &dyn WordSource, n: usize) -> Result<FiniteWord, CliError> {
    check_memory(n)?;
    Ok(src.prefix(n)?)
}

pub fn fmt_f(v: f64) -> String {
    format!("{v:.9}")
}
