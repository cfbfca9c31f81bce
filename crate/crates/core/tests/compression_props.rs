use fsindep_core::compression::{
    bounded_losslessness_check, build_prefix_code, cond_decode, cond_encode, match_run_compress_stream, train_model, CompressionError,
    ConditionalModel, MatchRunCoder, PrefixCode,
};
use fsindep_core::source::{BernoulliSource, FiniteSource, RandomSource, SumSource};
use fsindep_core::word::{Alphabet, FiniteWord};
use fsindep_core::WordSource;
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn digits(mut code: u64, b: u64, k: usize) -> Vec<u64> {
    let mut d = vec![0; k];
    for slot in d.iter_mut().rev() {
        *slot = code % b;
        code /= b;
    }
    d
}

/// Exact `ceil(-log_b nu(u/v))` from the integer weights, or `None` when nu = 0.
fn exact_length(m: &ConditionalModel, u: u64, v: u64) -> Option<u32> {
    let b = m.alphabet().size() as u64;
    let k = m.block_length();
    let (mut num, mut den) = (BigUint::from(1u32), BigUint::from(1u32));
    for (a, c) in digits(u, b, k).into_iter().zip(digits(v, b, k)) {
        let total: u64 = (0..b).map(|x| m.weight(x as u32, c as u32)).sum();
        num *= total;
        den *= m.weight(a as u32, c as u32);
    }
    if den == BigUint::from(0u32) {
        return None;
    }
    let mut l = 0;
    while den.clone() * BigUint::from(b).pow(l) < num {
        l += 1;
    }
    Some(l)
}

/// Kraft sum `sum b^-l <= 1` as an exact rational comparison.
fn exact_kraft(lengths: &[usize], b: u64) -> bool {
    let max = lengths.iter().copied().max().unwrap_or(0) as u32;
    let sum: BigUint = lengths.iter().map(|&l| BigUint::from(b).pow(max - l as u32)).sum();
    sum <= BigUint::from(b).pow(max)
}

fn check_codebook(m: &ConditionalModel, code: &PrefixCode, conditions: impl Iterator<Item = u64>, blocks: &[u64]) {
    let b = m.alphabet().size() as u64;
    for v in conditions {
        let lengths: Vec<usize> = (0..code.blocks() as u64).filter_map(|u| code.codeword(u, v).map(<[u8]>::len)).collect();
        assert!(exact_kraft(&lengths, b), "v={v}");
        assert!(code.kraft_holds(v));
        let support = (0..code.blocks() as u64).filter(|&u| exact_length(m, u, v).is_some()).count();
        for &u in blocks {
            let exact = exact_length(m, u, v);
            assert_eq!(code.shannon_length(u, v), exact, "u={u} v={v}");
            match (code.codeword(u, v), exact) {
                (None, None) => {}
                (Some(w), Some(l)) => {
                    let allowed = if support == 1 { 0 } else { l.max(1) };
                    assert!(w.len() as u32 <= allowed, "u={u} v={v} len={} bound={allowed}", w.len());
                }
                other => panic!("codeword/probability mismatch {other:?}"),
            }
        }
    }
}

fn models(rng: &mut ChaCha8Rng, b: u32, k: usize) -> Vec<ConditionalModel> {
    let alphabet = Alphabet::new(b).unwrap();
    let bb = (b * b) as usize;
    let mut out = vec![
        ConditionalModel::from_weights(alphabet, k, vec![1; bb]).unwrap(),
        // Identity-like: heavy diagonal.
        ConditionalModel::from_weights(alphabet, k, (0..bb).map(|i| if i % (b as usize + 1) == 0 { 5000 } else { 1 }).collect()).unwrap(),
        // Deterministic: nu(a/c) = [a == c].
        ConditionalModel::from_weights(alphabet, k, (0..bb).map(|i| (i % (b as usize + 1) == 0) as u64).collect()).unwrap(),
    ];
    for _ in 0..3 {
        let n = rng.random_range(1..3000);
        let x = FiniteWord::new(alphabet, (0..n).map(|_| rng.random_range(0..b))).unwrap();
        let y = FiniteWord::new(alphabet, x.iter().map(|s| if rng.random_bool(0.2) { rng.random_range(0..b) } else { s })).unwrap();
        out.push(train_model(&x, &y, k).unwrap());
    }
    out
}

#[test]
fn codebooks_satisfy_kraft_and_length_bounds_exhaustively() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for (b, kmax) in [(2u32, 4usize), (3, 3)] {
        for k in 1..=kmax {
            for m in models(&mut rng, b, k) {
                let code = build_prefix_code(&m).unwrap();
                let blocks: Vec<u64> = (0..code.blocks() as u64).collect();
                check_codebook(&m, &code, 0..code.blocks() as u64, &blocks);
            }
        }
    }
}

#[test]
fn codebooks_satisfy_kraft_and_length_bounds_sampled_k8() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in models(&mut rng, 2, 8) {
        let code = build_prefix_code(&m).unwrap();
        let blocks: Vec<u64> = (0..40).map(|_| rng.random_range(0..256)).collect();
        let conditions: Vec<u64> = (0..24).map(|_| rng.random_range(0..256)).collect();
        check_codebook(&m, &code, conditions.into_iter(), &blocks);
    }
}

#[test]
fn codebooks_are_prefix_free_and_decode() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in 1..=4 {
        for m in models(&mut rng, 2, k) {
            let code = build_prefix_code(&m).unwrap();
            for v in 0..code.blocks() as u64 {
                let words: Vec<(u64, &[u8])> = (0..code.blocks() as u64).filter_map(|u| code.codeword(u, v).map(|w| (u, w))).collect();
                for (i, (_, a)) in words.iter().enumerate() {
                    for (j, (_, b)) in words.iter().enumerate() {
                        if i != j {
                            assert!(!b.starts_with(a), "v={v}: {a:?} prefixes {b:?}");
                        }
                    }
                }
                for &(u, w) in &words {
                    let out = FiniteWord::new(Alphabet::BINARY, w.iter().map(|&d| d as u32)).unwrap();
                    assert_eq!(code.decode_block(&out, 0, v).unwrap(), (u, w.len()));
                }
            }
        }
    }
}

#[test]
fn round_trip_on_500_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for i in 0..500 {
        let b = if i % 5 == 0 { 3 } else { 2 };
        let alphabet = Alphabet::new(b).unwrap();
        let k = rng.random_range(1..=4);
        let n = k * rng.random_range(1..300);
        let noise = rng.random_range(0.0..1.0);
        let x: Vec<u32> = (0..n).map(|_| rng.random_range(0..b)).collect();
        let y: Vec<u32> = x.iter().map(|&s| if rng.random_bool(noise) { rng.random_range(0..b) } else { s }).collect();
        let (x, y) = (FiniteWord::new(alphabet, x).unwrap(), FiniteWord::new(alphabet, y).unwrap());
        let train = n / 2;
        let model = train_model(&x.factor(1, train.max(1)).unwrap(), &y.factor(1, train.max(1)).unwrap(), k).unwrap();
        let code = build_prefix_code(&model).unwrap();
        let src = |w: &FiniteWord| -> Box<dyn WordSource> { Box::new(FiniteSource::new(w.clone())) };
        let (out, est) = cond_encode(src(&x), src(&y), &code, n).unwrap();
        assert_eq!(est.n_total, n);
        assert_eq!(cond_decode(&out, src(&y), &code, n).unwrap(), x, "instance {i}");
        // A wrong oracle never panics: it either fails or decodes to some word.
        let flipped = FiniteWord::new(alphabet, y.iter().map(|s| (s + 1) % b)).unwrap();
        match cond_decode(&out, src(&flipped), &code, n) {
            Ok(w) => assert_eq!(w.len(), n),
            Err(CompressionError::DeadEnd { .. } | CompressionError::Truncated { .. } | CompressionError::TrailingOutput { .. }) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}

#[test]
fn ratio_sits_between_cross_entropy_and_ceiling() {
    for (k, noise) in [(4usize, 0.1), (8, 0.5), (8, 0.1), (6, 0.0)] {
        let n = (1 << 16) / k * k;
        let x = RandomSource::new(Alphabet::BINARY, 21, 0);
        let y = SumSource::new(Box::new(x.clone()), Box::new(BernoulliSource::new(noise, 21, 1))).unwrap();
        let m = train_model(&x.prefix(n).unwrap(), &y.prefix(n).unwrap(), k).unwrap();
        let code = build_prefix_code(&m).unwrap();
        let (_, est) = cond_encode(x.restart(), y.restart(), &code, n).unwrap();
        let (xp, yp) = (x.prefix(n).unwrap().to_vec(), y.prefix(n).unwrap().to_vec());
        let block = |w: &[u32]| w.iter().fold(0u64, |c, &s| c * 2 + s as u64);
        let entropy: f64 = xp.chunks(k).zip(yp.chunks(k)).map(|(u, v)| m.neg_log(block(u), block(v))).sum::<f64>() / n as f64;
        assert!(est.final_ratio >= entropy - 1e-9, "k={k} ratio={} H={entropy}", est.final_ratio);
        assert!(est.final_ratio <= entropy + 1.0 / k as f64 + 1e-9, "k={k} ratio={} H={entropy}", est.final_ratio);
    }
}

#[test]
fn match_run_coder_is_lossless_on_bounded_inputs() {
    for seed in 0..4 {
        let fx = RandomSource::new(Alphabet::BINARY, seed, 0).prefix(12).unwrap();
        for k in 1..=4 {
            let r = bounded_losslessness_check(&MatchRunCoder::new(&fx, k).unwrap(), 12).unwrap();
            assert!(r.lossless, "seed={seed} k={k} {:?}", r.counterexample);
        }
    }
}

#[test]
fn match_run_estimates_are_reproducible() {
    let go = || {
        let x = RandomSource::new(Alphabet::BINARY, 5, 0);
        let noise = BernoulliSource::new(0.001, 5, 1);
        let y = SumSource::new(Box::new(x.clone()), Box::new(noise)).unwrap();
        match_run_compress_stream(Box::new(x), 8, Box::new(y), 1 << 14).unwrap()
    };
    let (a, b) = (go(), go());
    assert_eq!(a.output, b.output);
    assert_eq!(a.estimate, b.estimate);
}
