use super::BrlError;

/// Potential scale reduction factor over the second half of each trace.
///
/// With `n` retained values per chain, `W` the mean within-chain variance and
/// `B/n` the variance of the chain means, returns
/// `sqrt(((n − 1)/n · W + B/n) / W)`. All-constant input gives 1.0; constant
/// chains that disagree give infinity.
pub fn gelman_rubin<T: AsRef<[f64]>>(traces: &[T]) -> Result<f64, BrlError> {
    if traces.len() < 2 {
        return Err(BrlError::TooFewChains(traces.len()));
    }
    let lengths: Vec<usize> = traces.iter().map(|t| t.as_ref().len()).collect();
    if lengths.iter().any(|&l| l != lengths[0] || l < 4) {
        return Err(BrlError::BadTraceLengths(lengths));
    }
    let len = lengths[0];
    let n = len / 2;
    let halves: Vec<&[f64]> = traces.iter().map(|t| &t.as_ref()[len - n..]).collect();
    let means: Vec<f64> = halves
        .iter()
        .map(|h| h.iter().sum::<f64>() / n as f64)
        .collect();
    let w = halves
        .iter()
        .zip(&means)
        .map(|(h, &mean)| h.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64)
        .sum::<f64>()
        / halves.len() as f64;
    let grand = means.iter().sum::<f64>() / means.len() as f64;
    let b_over_n =
        means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
    if w == 0.0 {
        return Ok(if b_over_n == 0.0 { 1.0 } else { f64::INFINITY });
    }
    let nf = n as f64;
    Ok((((nf - 1.0) / nf * w + b_over_n) / w).sqrt())
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn identical_chains() {
        let trace: Vec<f64> = (0..20).map(|i| (i % 3) as f64).collect();
        let rhat = gelman_rubin(&[trace.clone(), trace]).unwrap();
        let n = 10.0f64;
        assert!((rhat - ((n - 1.0) / n).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn constant_traces() {
        assert_eq!(gelman_rubin(&[vec![2.0; 8], vec![2.0; 8]]).unwrap(), 1.0);
        assert_eq!(
            gelman_rubin(&[vec![2.0; 8], vec![3.0; 8]]).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn separated_chains_are_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..1000).map(|_| 100.0 + rng.random::<f64>()).collect();
        assert!(gelman_rubin(&[a, b]).unwrap() > 10.0);
    }

    #[test]
    fn iid_chains_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        assert!(gelman_rubin(&[a, b]).unwrap() < 1.05);
    }

    #[test]
    fn bad_inputs() {
        assert_eq!(
            gelman_rubin(&[vec![1.0; 8]]),
            Err(BrlError::TooFewChains(1))
        );
        assert_eq!(
            gelman_rubin(&[vec![1.0; 8], vec![1.0; 6]]),
            Err(BrlError::BadTraceLengths(vec![8, 6]))
        );
        assert!(gelman_rubin(&[vec![1.0; 3], vec![1.0; 3]]).is_err());
    }
}
