//! Compact string form for word generators, e.g. `join(rand:seed=1,stream=0,odd(selfsim:b=2))`.
//!
//! Leaves: `selfsim:b=B`, `rand:seed=S,stream=T,b=B`, `bern:p=P,seed=S,stream=T`,
//! `periodic:w=WORD,b=B`, `file:path=PATH,b=B`. Combinators: `odd(S)`, `even(S)`,
//! `join(S,S)`, `xor(S,S)` (symbol-wise sum modulo the alphabet size).

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use fsindep_core::perfect::SelfSimilarSource;
use fsindep_core::source::{BernoulliSource, FiniteSource, JoinSource, PeriodicSource, RandomSource, SumSource, TrackSource};
use fsindep_core::{Alphabet, FiniteWord, WordSource};

use crate::error::CliError;
use crate::io::read_word;

#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorSpec {
    SelfSimilar { base: u32 },
    Random { seed: u64, stream: u64, base: u32 },
    Bernoulli { p: f64, seed: u64, stream: u64 },
    Periodic { word: String, base: u32 },
    File { path: PathBuf, base: u32 },
    Odd(Box<GeneratorSpec>),
    Even(Box<GeneratorSpec>),
    Join(Box<GeneratorSpec>, Box<GeneratorSpec>),
    Xor(Box<GeneratorSpec>, Box<GeneratorSpec>),
}

impl GeneratorSpec {
    /// The same spec with every random seed shifted by `offset`.
    pub fn reseeded(&self, offset: u64) -> Self {
        use GeneratorSpec::*;
        match self {
            Random { seed, stream, base } => Random { seed: seed.wrapping_add(offset), stream: *stream, base: *base },
            Bernoulli { p, seed, stream } => Bernoulli { p: *p, seed: seed.wrapping_add(offset), stream: *stream },
            Odd(s) => Odd(Box::new(s.reseeded(offset))),
            Even(s) => Even(Box::new(s.reseeded(offset))),
            Join(a, b) => Join(Box::new(a.reseeded(offset)), Box::new(b.reseeded(offset))),
            Xor(a, b) => Xor(Box::new(a.reseeded(offset)), Box::new(b.reseeded(offset))),
            other => other.clone(),
        }
    }

    pub fn build(&self) -> Result<Box<dyn WordSource>, CliError> {
        use GeneratorSpec::*;
        Ok(match self {
            SelfSimilar { base } => Box::new(SelfSimilarSource::new(*base)?),
            Random { seed, stream, base } => Box::new(RandomSource::new(Alphabet::new(*base)?, *seed, *stream)),
            Bernoulli { p, seed, stream } => Box::new(BernoulliSource::new(*p, *seed, *stream)),
            Periodic { word, base } => Box::new(PeriodicSource::new(FiniteWord::parse(Alphabet::new(*base)?, word)?)?),
            File { path, base } => Box::new(FiniteSource::new(read_word(path, Alphabet::new(*base)?)?)),
            Odd(s) => Box::new(TrackSource::odd(s.build()?)),
            Even(s) => Box::new(TrackSource::even(s.build()?)),
            Join(a, b) => Box::new(JoinSource::new(a.build()?, b.build()?)?),
            Xor(a, b) => Box::new(SumSource::new(a.build()?, b.build()?)?),
        })
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use GeneratorSpec::*;
        match self {
            SelfSimilar { base } => write!(f, "selfsim:b={base}"),
            Random { seed, stream, base } => write!(f, "rand:seed={seed},stream={stream},b={base}"),
            Bernoulli { p, seed, stream } => write!(f, "bern:p={p},seed={seed},stream={stream}"),
            Periodic { word, base } => write!(f, "periodic:w={word},b={base}"),
            File { path, base } => write!(f, "file:path={},b={base}", path.display()),
            Odd(s) => write!(f, "odd({s})"),
            Even(s) => write!(f, "even({s})"),
            Join(a, b) => write!(f, "join({a},{b})"),
            Xor(a, b) => write!(f, "xor({a},{b})"),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        parse(s.trim())
    }
}

fn bad(s: &str, msg: impl fmt::Display) -> CliError {
    CliError::Usage(format!("generator spec `{s}`: {msg}"))
}

fn parse(s: &str) -> Result<GeneratorSpec, CliError> {
    if let Some(open) = s.find('(') {
        let head = &s[..open];
        if !s.ends_with(')') || !head.chars().all(|c| c.is_ascii_lowercase()) {
            return Err(bad(s, "malformed combinator"));
        }
        let args = split_args(s, &s[open + 1..s.len() - 1])?;
        let arity = |n: usize| if args.len() == n { Ok(()) } else { Err(bad(s, format!("`{head}` takes {n} argument(s)"))) };
        let mut inner = args.iter().map(|a| parse(a));
        return match head {
            "odd" | "even" => {
                arity(1)?;
                let a = Box::new(inner.next().unwrap()?);
                Ok(if head == "odd" { GeneratorSpec::Odd(a) } else { GeneratorSpec::Even(a) })
            }
            "join" | "xor" => {
                arity(2)?;
                let a = Box::new(inner.next().unwrap()?);
                let b = Box::new(inner.next().unwrap()?);
                Ok(if head == "join" { GeneratorSpec::Join(a, b) } else { GeneratorSpec::Xor(a, b) })
            }
            _ => Err(bad(s, format!("unknown combinator `{head}`"))),
        };
    }
    parse_leaf(s)
}

/// Splits at top-level commas. A piece of the form `key=value` continues the
/// parameter list of the leaf before it.
fn split_args(whole: &str, inner: &str) -> Result<Vec<String>, CliError> {
    let mut pieces = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in inner.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                pieces.push(&inner[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(bad(whole, "unbalanced parentheses"));
        }
    }
    if depth != 0 {
        return Err(bad(whole, "unbalanced parentheses"));
    }
    pieces.push(&inner[start..]);
    let mut args: Vec<String> = Vec::new();
    for p in pieces {
        let p = p.trim();
        let is_param = p.split_once('=').is_some_and(|(k, _)| !k.is_empty() && k.chars().all(|c| c.is_ascii_lowercase()));
        match args.last_mut() {
            Some(last) if is_param && !last.ends_with(')') => {
                last.push(',');
                last.push_str(p);
            }
            _ => args.push(p.to_string()),
        }
    }
    Ok(args)
}

fn parse_leaf(s: &str) -> Result<GeneratorSpec, CliError> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let mut params: Vec<(&str, &str)> = Vec::new();
    for kv in rest.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(|| bad(s, format!("expected key=value, got `{kv}`")))?;
        if params.iter().any(|(seen, _)| *seen == k) {
            return Err(bad(s, format!("duplicate parameter `{k}`")));
        }
        params.push((k, v));
    }
    let allowed: &[&str] = match kind {
        "selfsim" => &["b"],
        "rand" => &["seed", "stream", "b"],
        "bern" => &["p", "seed", "stream"],
        "periodic" => &["w", "b"],
        "file" => &["path", "b"],
        _ => return Err(bad(s, format!("unknown generator `{kind}`"))),
    };
    if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(k)) {
        return Err(bad(s, format!("`{kind}` has no parameter `{k}`")));
    }
    let get = |k: &str| params.iter().find(|(key, _)| *key == k).map(|(_, v)| *v);
    let num = |k: &str, default: Option<u64>| -> Result<u64, CliError> {
        match get(k) {
            Some(v) => v.parse().map_err(|_| bad(s, format!("`{k}` must be a non-negative integer"))),
            None => default.ok_or_else(|| bad(s, format!("missing parameter `{k}`"))),
        }
    };
    let base = || -> Result<u32, CliError> {
        let b = num("b", Some(2))?;
        u32::try_from(b).ok().filter(|b| (2..=Alphabet::MAX_TEXT).contains(b)).ok_or_else(|| bad(s, "`b` must be in 2..=36"))
    };
    let required = |k: &str| get(k).filter(|v| !v.is_empty()).ok_or_else(|| bad(s, format!("missing parameter `{k}`")));
    Ok(match kind {
        "selfsim" => GeneratorSpec::SelfSimilar { base: base()? },
        "rand" => GeneratorSpec::Random { seed: num("seed", Some(0))?, stream: num("stream", Some(0))?, base: base()? },
        "bern" => {
            let p: f64 = required("p")?.parse().map_err(|_| bad(s, "`p` must be a number"))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(bad(s, "`p` must lie in [0, 1]"));
            }
            GeneratorSpec::Bernoulli { p, seed: num("seed", Some(0))?, stream: num("stream", Some(0))? }
        }
        "periodic" => {
            let (word, base) = (required("w")?.to_string(), base()?);
            FiniteWord::parse(Alphabet::new(base)?, &word).map_err(|e| bad(s, e))?;
            GeneratorSpec::Periodic { word, base }
        }
        _ => GeneratorSpec::File { path: PathBuf::from(required("path")?), base: base()? },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> GeneratorSpec {
        s.parse().unwrap()
    }

    #[test]
    fn defaults_and_canonical_form() {
        assert_eq!(p("rand:seed=42").to_string(), "rand:seed=42,stream=0,b=2");
        assert_eq!(p("selfsim").to_string(), "selfsim:b=2");
        assert_eq!(p("odd(selfsim:b=2)"), GeneratorSpec::Odd(Box::new(GeneratorSpec::SelfSimilar { base: 2 })));
    }

    #[test]
    fn nested_arguments_keep_their_parameters() {
        let s = p("join(rand:seed=1,stream=3,xor(rand:seed=2,bern:p=0.1,seed=9))");
        assert_eq!(s.to_string(), "join(rand:seed=1,stream=3,b=2,xor(rand:seed=2,stream=0,b=2,bern:p=0.1,seed=9,stream=0))");
        assert_eq!(p(&s.to_string()), s);
    }

    #[test]
    fn rejects_malformed() {
        for s in ["", "rand:seed=x", "odd(rand", "join(rand)", "bern:p=2", "periodic:w=012,b=2", "rand:speed=1", "rand:seed=1,seed=2", "foo(rand)"] {
            assert!(s.parse::<GeneratorSpec>().is_err(), "{s}");
        }
    }

    #[test]
    fn reseeding_shifts_leaves() {
        let s = p("xor(rand:seed=1,bern:p=0.5,seed=10)").reseeded(5);
        assert_eq!(s.to_string(), "xor(rand:seed=6,stream=0,b=2,bern:p=0.5,seed=15,stream=0)");
    }

    #[test]
    fn built_sources_compose() {
        let x = p("join(periodic:w=0,periodic:w=1)").build().unwrap();
        assert_eq!(x.prefix(6).unwrap().to_text().unwrap(), "010101");
        let y = p("even(selfsim)").build().unwrap();
        let z = p("selfsim").build().unwrap();
        assert_eq!(y.prefix(64).unwrap(), z.prefix(64).unwrap());
    }
}
