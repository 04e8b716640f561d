use super::EvalError;

/// Median of the draws (average of the two middle values for even counts).
pub fn posterior_median(draws: &[f64]) -> Result<f64, EvalError> {
    if draws.is_empty() {
        return Err(EvalError::EmptyChain);
    }
    let s = sorted(draws);
    let m = s.len() / 2;
    Ok(if s.len() % 2 == 1 { s[m] } else { 0.5 * (s[m - 1] + s[m]) })
}

/// Shortest window of sorted draws that holds `ceil(level * S)` of them;
/// among equally short windows the one with the smallest lower end wins.
pub fn hpd_interval(draws: &[f64], level: f64) -> Result<(f64, f64), EvalError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(EvalError::BadLevel(level));
    }
    if draws.len() < 2 {
        return Err(EvalError::TooFewDraws(draws.len()));
    }
    let s = sorted(draws);
    let m = ((level * s.len() as f64 - 1e-9).ceil() as usize).clamp(1, s.len());
    let mut best = 0;
    for i in 1..=s.len() - m {
        if s[i + m - 1] - s[i] < s[best + m - 1] - s[best] {
            best = i;
        }
    }
    Ok((s[best], s[best + m - 1]))
}

/// Effective sample size by Geyer's initial monotone positive sequence.
/// Constant input returns the number of draws.
pub fn effective_sample_size(draws: &[f64]) -> f64 {
    let n = draws.len();
    if n < 4 {
        return n as f64;
    }
    let mean = draws.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = draws.iter().map(|v| v - mean).collect();
    let autocov = |lag: usize| centered[..n - lag].iter().zip(&centered[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    let c0 = autocov(0);
    if !(c0 > 0.0) {
        return n as f64;
    }
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = (autocov(lag) + autocov(lag + 1)) / c0;
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev);
        sum += pair;
        prev = pair;
        lag += 2;
    }
    // tau = -1 + 2 * sum of pairs
    let tau = (2.0 * sum - 1.0).max(1.0 / n as f64);
    n as f64 / tau
}

fn sorted(draws: &[f64]) -> Vec<f64> {
    let mut s = draws.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn hpd_of_uniform_grid_takes_lowest_tie() {
        let draws: Vec<f64> = (1..=100).rev().map(f64::from).collect();
        assert_eq!(hpd_interval(&draws, 0.95).unwrap(), (1.0, 95.0));
    }

    #[test]
    fn hpd_of_constant_draws_is_a_point() {
        assert_eq!(hpd_interval(&[2.5; 10], 0.9).unwrap(), (2.5, 2.5));
    }

    #[test]
    fn hpd_of_normal_draws_is_nearly_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws: Vec<f64> = (0..200_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let (lo, hi) = hpd_interval(&draws, 0.95).unwrap();
        assert!((lo + 1.96).abs() < 0.03 && (hi - 1.96).abs() < 0.03, "({lo}, {hi})");
    }

    #[test]
    fn hpd_rejects_bad_input() {
        assert!(matches!(hpd_interval(&[1.0], 0.9), Err(EvalError::TooFewDraws(1))));
        assert!(matches!(hpd_interval(&[1.0, 2.0], 1.0), Err(EvalError::BadLevel(_))));
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(posterior_median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(posterior_median(&[4.0, 1.0, 2.0, 3.0]).unwrap(), 2.5);
    }

    #[test]
    fn ess_of_iid_and_ar1() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let iid: Vec<f64> = (0..20_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let ess = effective_sample_size(&iid);
        assert!((ess / 20_000.0 - 1.0).abs() < 0.1, "{ess}");
        // AR(1) with rho = 0.9: ess/n = (1 - rho)/(1 + rho)
        let mut x = 0.0;
        let ar: Vec<f64> = (0..200_000)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                x = 0.9 * x + z;
                x
            })
            .collect();
        let ratio = effective_sample_size(&ar) / 200_000.0;
        assert!((ratio - 0.1 / 1.9).abs() < 0.008, "{ratio}");
    }
}
