use super::{build_prefix_code, cond_encode, train_model, CompressionError};
use crate::source::{FiniteSource, PeriodicSource, WordSource};
use crate::word::FiniteWord;

/// Block-entropy estimates of plain and conditional ratios for a pair of words.
///
/// Each estimate is an upper bound given by one particular compressor; no verdict is
/// drawn from them. The unconditional ratio of `x` is the conditional ratio given the
/// constant word `000...`.
#[derive(Clone, Debug, PartialEq)]
pub struct IndependenceReport {
    pub n: usize,
    pub k: usize,
    /// Symbols used to train the models.
    pub train_len: usize,
    /// Symbols compressed, following the training part.
    pub test_len: usize,
    pub rho_x: f64,
    pub rho_y: f64,
    pub rho_x_given_y: f64,
    pub rho_y_given_x: f64,
}

fn ratio(x_train: &FiniteWord, y_train: &FiniteWord, x_test: &FiniteWord, y_test: &FiniteWord, k: usize) -> Result<f64, CompressionError> {
    let model = train_model(x_train, y_train, k)?;
    let code = build_prefix_code(&model)?;
    let n = x_test.len();
    let (_, est) = cond_encode(Box::new(FiniteSource::new(x_test.clone())), Box::new(FiniteSource::new(y_test.clone())), &code, n)?;
    Ok(est.final_ratio)
}

/// Trains on the first half of `x[1..n]`, `y[1..n]` and compresses the second half.
/// Both halves are rounded down to multiples of `k`.
pub fn independence_report(
    x: &dyn WordSource,
    y: &dyn WordSource,
    n: usize,
    k: usize,
) -> Result<IndependenceReport, CompressionError> {
    if k == 0 {
        return Err(CompressionError::ZeroBlock);
    }
    let train_len = (n / 2) / k * k;
    let test_len = (n - train_len) / k * k;
    if train_len == 0 || test_len == 0 {
        return Err(CompressionError::NotMultiple { n, k });
    }
    let mut xs = x.restart();
    let mut ys = y.restart();
    let x_train = xs.take_word(train_len)?;
    let y_train = ys.take_word(train_len)?;
    let x_test = xs.take_word(test_len)?;
    let y_test = ys.take_word(test_len)?;
    let alphabet = x.alphabet();
    let zeros = PeriodicSource::constant(alphabet, 0)?;
    let z_train = zeros.prefix(train_len)?;
    let z_test = zeros.prefix(test_len)?;
    Ok(IndependenceReport {
        n,
        k,
        train_len,
        test_len,
        rho_x: ratio(&x_train, &z_train, &x_test, &z_test, k)?,
        rho_y: ratio(&y_train, &z_train, &y_test, &z_test, k)?,
        rho_x_given_y: ratio(&x_train, &y_train, &x_test, &y_test, k)?,
        rho_y_given_x: ratio(&y_train, &x_train, &y_test, &x_test, k)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::RandomSource;
    use crate::word::Alphabet;

    #[test]
    fn self_dependence_detected() {
        let x = RandomSource::new(Alphabet::BINARY, 3, 0);
        let r = independence_report(&x, &x, 1 << 14, 8).unwrap();
        assert!(r.rho_x_given_y <= 0.2, "{r:?}");
        assert!(r.rho_x > 0.9, "{r:?}");
        assert_eq!((r.train_len, r.test_len), (1 << 13, 1 << 13));
    }

    #[test]
    fn rejects_tiny_prefixes() {
        let x = RandomSource::new(Alphabet::BINARY, 3, 0);
        assert!(independence_report(&x, &x, 8, 8).is_err());
    }
}
