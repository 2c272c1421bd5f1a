//! Scalar-series effective sample size kernels: the sum-of-correlations
//! estimator with adjacent-pair smoothing, an AR-spectral estimator
//! (autoregressive fit, power spectrum at frequency zero), and batch-means
//! limiting-variance machinery. Every tree ESS measure reduces to one of
//! these.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Estimated autocorrelation function of one scalar series.
#[derive(Debug, Clone)]
pub struct AutocorrSeries {
    /// `rho[0]` = 1, then increasing lags.
    pub rho: Vec<f64>,
    /// length of the underlying series
    pub n: usize,
}

/// An effective sample size with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct EssEstimate {
    pub value: f64,
    pub method: &'static str,
    pub n: usize,
}

impl EssEstimate {
    fn clamped(value: f64, method: &'static str, n: usize) -> Self {
        let value = if value.is_finite() { value } else { 1.0 };
        EssEstimate {
            value: value.clamp(1.0, n as f64),
            method,
            n,
        }
    }
}

fn is_constant(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[0] == w[1])
}

/// Empirical autocorrelations at lags 0..n-2 (biased autocovariance over
/// empirical variance, both with the global mean).
pub fn autocorrelations(x: &[f64]) -> Result<AutocorrSeries> {
    let n = x.len();
    if n < 4 {
        return Err(Error::SeriesTooShort { need: 4, got: n });
    }
    if is_constant(x) {
        return Err(Error::ConstantSeries);
    }
    let m = math::mean(x);
    let centered: Vec<f64> = x.iter().map(|&v| v - m).collect();
    let gamma0: f64 = centered.iter().map(|&c| c * c).sum::<f64>() / n as f64;
    let mut rho = Vec::with_capacity(n - 1);
    rho.push(1.0);
    for s in 1..=n - 2 {
        let cov: f64 = centered[..n - s]
            .iter()
            .zip(&centered[s..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64;
        rho.push(cov / gamma0);
    }
    Ok(AutocorrSeries { rho, n })
}

/// The sum-of-correlations ESS: adjacent autocorrelations are summed in
/// pairs, the pair sums are made monotone by a running minimum, the series is
/// truncated at the first non-positive smoothed pair (scanning from the
/// second pair; the first is always kept), and the truncated sum gives
/// n / (-1 + 2 * sum). Clamped to [1, n].
pub fn sum_of_correlations_ess(a: &AutocorrSeries) -> EssEstimate {
    let n = a.n;
    let mut pairs: Vec<f64> = a.rho.chunks_exact(2).map(|w| w[0] + w[1]).collect();
    if pairs.is_empty() {
        // n = 4 leaves a single unpaired lag beyond rho_0; fall back to the
        // leading pair alone
        pairs.push(a.rho[0] + a.rho.get(1).copied().unwrap_or(0.0));
    }
    for i in 1..pairs.len() {
        if pairs[i] > pairs[i - 1] {
            pairs[i] = pairs[i - 1];
        }
    }
    let mut k = pairs.len() - 1;
    for (i, &p) in pairs.iter().enumerate().skip(1) {
        if p <= 0.0 {
            k = i - 1;
            break;
        }
    }
    let sum: f64 = pairs[..=k].iter().sum();
    EssEstimate::clamped(n as f64 / (-1.0 + 2.0 * sum), "sumOfCorrelations", n)
}

/// Convenience composition of [`autocorrelations`] and
/// [`sum_of_correlations_ess`]; a constant series yields ESS = 1.
pub fn sum_of_correlations_ess_of(x: &[f64]) -> Result<EssEstimate> {
    match autocorrelations(x) {
        Ok(a) => Ok(sum_of_correlations_ess(&a)),
        Err(Error::ConstantSeries) => Ok(EssEstimate {
            value: 1.0,
            method: "sumOfCorrelations",
            n: x.len(),
        }),
        Err(e) => Err(e),
    }
}

struct ArFit {
    coefs: Vec<f64>,
    noise_variance: f64,
}

/// Yule-Walker AR fit via Levinson-Durbin, order selected by AIC over
/// 0..=max_order.
fn fit_ar(acov: &[f64], n: usize, max_order: usize) -> ArFit {
    let mut best = ArFit {
        coefs: Vec::new(),
        noise_variance: acov[0],
    };
    let mut best_aic = n as f64 * math::ln(acov[0]);
    let mut phi: Vec<f64> = Vec::new();
    let mut err = acov[0];
    for m in 1..=max_order {
        let mut acc = acov[m];
        for (j, &p) in phi.iter().enumerate() {
            acc -= p * acov[m - 1 - j];
        }
        if err <= 0.0 {
            break;
        }
        let k = acc / err;
        let mut next: Vec<f64> = Vec::with_capacity(m);
        for j in 0..m - 1 {
            next.push(phi[j] - k * phi[m - 2 - j]);
        }
        next.push(k);
        err *= 1.0 - k * k;
        phi = next;
        if err <= 0.0 {
            break;
        }
        let aic = n as f64 * math::ln(err) + 2.0 * m as f64;
        if aic < best_aic {
            best_aic = aic;
            best = ArFit {
                coefs: phi.clone(),
                noise_variance: err,
            };
        }
    }
    best
}

/// AR-spectral ESS: fit an autoregressive model, estimate the power spectrum
/// at frequency zero as noise_variance / (1 - sum of coefficients)^2, and
/// return n * sample_variance / spectrum, clamped to [1, n]. Constant series
/// yield ESS = 1.
pub fn ar_spectrum_ess(x: &[f64]) -> Result<EssEstimate> {
    let n = x.len();
    if n < 8 {
        return Err(Error::SeriesTooShort { need: 8, got: n });
    }
    if is_constant(x) {
        return Ok(EssEstimate {
            value: 1.0,
            method: "arSpectrum",
            n,
        });
    }
    let max_order = (10.0 * math::log10(n as f64)) as usize;
    let max_order = max_order.min(n - 2);
    let m = math::mean(x);
    let centered: Vec<f64> = x.iter().map(|&v| v - m).collect();
    let mut acov = Vec::with_capacity(max_order + 1);
    for s in 0..=max_order {
        let c: f64 = centered[..n - s]
            .iter()
            .zip(&centered[s..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64;
        acov.push(c);
    }
    let fit = fit_ar(&acov, n, max_order);
    let denom = 1.0 - fit.coefs.iter().sum::<f64>();
    let spectrum0 = fit.noise_variance / (denom * denom);
    let var = math::sample_variance(x);
    Ok(EssEstimate::clamped(
        n as f64 * var / spectrum0,
        "arSpectrum",
        n,
    ))
}

fn batch_means_lambda(x: &[f64], grand_mean: f64, batch: usize) -> f64 {
    let n = x.len();
    let a = n / batch;
    debug_assert!(a >= 2);
    let mut sum = 0.0;
    for i in 0..a {
        let y = math::mean(&x[i * batch..(i + 1) * batch]);
        sum += (y - grand_mean) * (y - grand_mean);
    }
    batch as f64 / (a as f64 - 1.0) * sum
}

/// Floor applied to the lobed batch-means estimate so downstream ratios stay
/// finite.
pub const LAMBDA_FLOOR: f64 = 1e-12;

/// Lobed batch-means estimate of the limiting variance: with b = floor(sqrt n),
/// lambda_L^2 = 2*lambda_b^2 - lambda_{b/3}^2, floored at a small positive
/// constant. Each lambda uses floor(n/B) batches over the first a*B samples
/// and deviations from the full-series mean.
pub fn batch_means_limiting_variance(x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < 16 {
        return Err(Error::SeriesTooShort { need: 16, got: n });
    }
    let grand_mean = math::mean(x);
    let b = math::floor(math::sqrt(n as f64)) as usize;
    let lambda_b = batch_means_lambda(x, grand_mean, b);
    let lambda_b3 = batch_means_lambda(x, grand_mean, (b / 3).max(1));
    Ok((2.0 * lambda_b - lambda_b3).max(LAMBDA_FLOOR))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{ar1_series, rng, white_noise};

    #[test]
    fn autocorr_lag0_is_one_and_short_series_rejected() {
        let a = autocorrelations(&[1.0, 2.0, 0.5, 1.5, 0.2]).unwrap();
        assert_eq!(a.rho[0], 1.0);
        assert_eq!(a.rho.len(), 4);
        assert!(matches!(
            autocorrelations(&[1.0, 2.0, 3.0]),
            Err(Error::SeriesTooShort { .. })
        ));
        assert!(matches!(
            autocorrelations(&[2.0; 10]),
            Err(Error::ConstantSeries)
        ));
    }

    #[test]
    fn autocorr_white_noise_near_zero() {
        let mut rng = rng(1);
        let x = white_noise(10_000, &mut rng);
        let a = autocorrelations(&x).unwrap();
        assert!(a.rho[1].abs() < 0.03, "rho1 = {}", a.rho[1]);
    }

    #[test]
    fn autocorr_ar1_matches_coefficient() {
        let mut rng = rng(2);
        let x = ar1_series(0.8, 10_000, &mut rng);
        let a = autocorrelations(&x).unwrap();
        assert!((a.rho[1] - 0.8).abs() < 0.03, "rho1 = {}", a.rho[1]);
    }

    #[test]
    fn sum_of_correlations_iid_identity() {
        // rho_s = 0 for s >= 1 gives exactly n
        let n = 1000;
        let mut rho = alloc::vec![0.0; n - 1];
        rho[0] = 1.0;
        let ess = sum_of_correlations_ess(&AutocorrSeries { rho, n });
        assert_eq!(ess.value, n as f64);
    }

    #[test]
    fn sum_of_correlations_ar1_analytic() {
        // ESS of AR(1) is n(1-phi)/(1+phi); phi = 0.5 gives n/3
        let mut rng = rng(3);
        let n = 20_000;
        let x = ar1_series(0.5, n, &mut rng);
        let ess = sum_of_correlations_ess(&autocorrelations(&x).unwrap());
        let want = n as f64 / 3.0;
        assert!(
            (ess.value - want).abs() < 0.10 * want,
            "ess {} want {want}",
            ess.value
        );
    }

    #[test]
    fn sum_of_correlations_random_walk_clamps_low() {
        // a deterministic ramp has rho near 1 everywhere
        let x: Vec<f64> = (0..2000).map(|i| i as f64).collect();
        let ess = sum_of_correlations_ess(&autocorrelations(&x).unwrap());
        assert!(ess.value < 5.0, "ess {}", ess.value);
        assert!(ess.value >= 1.0);
    }

    #[test]
    fn ar_spectrum_white_noise() {
        let mut rng = rng(4);
        let n = 10_000;
        let x = white_noise(n, &mut rng);
        let ess = ar_spectrum_ess(&x).unwrap();
        assert!(
            ess.value >= 0.8 * n as f64 && ess.value <= n as f64,
            "ess {}",
            ess.value
        );
    }

    #[test]
    fn ar_spectrum_ar1_analytic() {
        let mut rng = rng(5);
        let n = 20_000;
        let x = ar1_series(0.8, n, &mut rng);
        let ess = ar_spectrum_ess(&x).unwrap();
        let want = n as f64 / 9.0;
        assert!(
            (ess.value - want).abs() < 0.15 * want,
            "ess {} want {want}",
            ess.value
        );
    }

    #[test]
    fn ar_spectrum_constant_is_one() {
        let x = alloc::vec![3.25; 100];
        assert_eq!(ar_spectrum_ess(&x).unwrap().value, 1.0);
    }

    #[test]
    fn both_estimators_recover_ar1_over_phi_grid() {
        // the two kernels agree with theory and with each other within 1.5x
        let n = 20_000;
        for (seed, phi) in [(10u64, 0.2), (11, 0.5), (12, 0.8)] {
            let mut rng = rng(seed);
            let x = ar1_series(phi, n, &mut rng);
            let want = n as f64 * (1.0 - phi) / (1.0 + phi);
            let soc = sum_of_correlations_ess(&autocorrelations(&x).unwrap()).value;
            let ars = ar_spectrum_ess(&x).unwrap().value;
            assert!(
                (soc - want).abs() < 0.15 * want,
                "phi={phi} soc={soc} want={want}"
            );
            assert!(
                (ars - want).abs() < 0.15 * want,
                "phi={phi} ars={ars} want={want}"
            );
            let ratio = soc / ars;
            assert!(
                (1.0 / 1.5..=1.5).contains(&ratio),
                "phi={phi} ratio {ratio}"
            );
        }
    }

    #[test]
    fn batch_means_iid_unit_variance() {
        let mut rng = rng(6);
        let x = white_noise(40_000, &mut rng);
        let lambda = batch_means_limiting_variance(&x).unwrap();
        assert!((lambda - 1.0).abs() < 0.15, "lambda {lambda}");
    }

    #[test]
    fn batch_means_ar1_limiting_variance() {
        // sigma_lim^2 = sigma_pi^2 (1+phi)/(1-phi); with unit innovations and
        // phi = 0.5 that is (1/0.75) * 3 = 4. The estimator converges at
        // n^(1/4), so average a few independent runs.
        let mut acc = 0.0;
        for seed in 0..4 {
            let mut rng = rng(seed);
            let x = ar1_series(0.5, 100_000, &mut rng);
            acc += batch_means_limiting_variance(&x).unwrap();
        }
        let lambda = acc / 4.0;
        assert!((lambda - 4.0).abs() < 0.2 * 4.0, "lambda {lambda}");
    }

    #[test]
    fn batch_means_floor_and_length_guard() {
        assert_eq!(
            batch_means_limiting_variance(&alloc::vec![1.0; 64]).unwrap(),
            LAMBDA_FLOOR
        );
        assert!(matches!(
            batch_means_limiting_variance(&[1.0; 15]),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn ess_within_bounds_and_affine_invariant() {
        let mut rng = rng(8);
        for trial in 0..10 {
            let x = ar1_series(0.3 + 0.05 * trial as f64, 2000, &mut rng);
            let y: Vec<f64> = x.iter().map(|&v| -2.5 * v + 7.0).collect();
            let ex = sum_of_correlations_ess(&autocorrelations(&x).unwrap());
            let ey = sum_of_correlations_ess(&autocorrelations(&y).unwrap());
            assert!(ex.value >= 1.0 && ex.value <= 2000.0);
            assert!((ex.value - ey.value).abs() < 1e-6 * ex.value);
            let ax = ar_spectrum_ess(&x).unwrap();
            let ay = ar_spectrum_ess(&y).unwrap();
            assert!(ax.value >= 1.0 && ax.value <= 2000.0);
            assert!((ax.value - ay.value).abs() < 1e-6 * ax.value);
        }
    }

    #[test]
    fn iid_permutations_score_high() {
        // shuffling an autocorrelated series should look iid to both kernels
        use rand::seq::SliceRandom;
        let mut rng = rng(9);
        let base = ar1_series(0.9, 2000, &mut rng);
        let n = base.len() as f64;
        let trials = 50;
        let mut ok_soc = 0;
        let mut ok_ars = 0;
        for _ in 0..trials {
            let mut x = base.clone();
            x.shuffle(&mut rng);
            if sum_of_correlations_ess(&autocorrelations(&x).unwrap()).value >= 0.7 * n {
                ok_soc += 1;
            }
            if ar_spectrum_ess(&x).unwrap().value >= 0.7 * n {
                ok_ars += 1;
            }
        }
        assert!(
            ok_soc >= 45,
            "sum-of-correlations passed only {ok_soc}/{trials}"
        );
        assert!(ok_ars >= 45, "ar-spectrum passed only {ok_ars}/{trials}");
    }
}
