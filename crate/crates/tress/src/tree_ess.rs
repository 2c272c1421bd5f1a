//! Topological effective sample size measures over a chain and its RF
//! distance matrix, plus the two baseline measures.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha20Rng;

use crate::chain::Chain;
use crate::dist::{medoid_indices, DistanceMatrix};
use crate::error::{Error, Result};
use crate::ess::{
    ar_spectrum_ess, sum_of_correlations_ess, sum_of_correlations_ess_of, AutocorrSeries,
    EssEstimate, LAMBDA_FLOOR,
};
use crate::math;
use crate::summary::split_indicator_columns;

/// The closed roster of tree ESS measures. The `Display`/`FromStr` strings
/// are the canonical command-line identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TreeEssMethod {
    FrechetCorrelation,
    SplitFrequency,
    MedianPseudo,
    MinPseudo,
    FoldedRankMedoid,
    TotalDistance,
    Cmds,
    JumpDistanceBootstrap,
    JumpDistanceBootstrapUnsmoothed,
    FixedN,
    LogPosterior,
}

impl TreeEssMethod {
    pub const ALL: [TreeEssMethod; 11] = [
        TreeEssMethod::FrechetCorrelation,
        TreeEssMethod::SplitFrequency,
        TreeEssMethod::MedianPseudo,
        TreeEssMethod::MinPseudo,
        TreeEssMethod::FoldedRankMedoid,
        TreeEssMethod::TotalDistance,
        TreeEssMethod::Cmds,
        TreeEssMethod::JumpDistanceBootstrap,
        TreeEssMethod::JumpDistanceBootstrapUnsmoothed,
        TreeEssMethod::FixedN,
        TreeEssMethod::LogPosterior,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TreeEssMethod::FrechetCorrelation => "frechetCorrelation",
            TreeEssMethod::SplitFrequency => "splitFrequency",
            TreeEssMethod::MedianPseudo => "medianPseudo",
            TreeEssMethod::MinPseudo => "minPseudo",
            TreeEssMethod::FoldedRankMedoid => "foldedRankMedoid",
            TreeEssMethod::TotalDistance => "totalDistance",
            TreeEssMethod::Cmds => "cmds",
            TreeEssMethod::JumpDistanceBootstrap => "jumpDistanceBootstrap",
            TreeEssMethod::JumpDistanceBootstrapUnsmoothed => "jumpDistanceBootstrapUnsmoothed",
            TreeEssMethod::FixedN => "fixedN",
            TreeEssMethod::LogPosterior => "logPosterior",
        }
    }

    /// True for the measures that draw bootstrap replicates and therefore
    /// need a seed.
    pub fn is_randomized(&self) -> bool {
        matches!(
            self,
            TreeEssMethod::JumpDistanceBootstrap | TreeEssMethod::JumpDistanceBootstrapUnsmoothed
        )
    }

    /// True for the one measure that needs a log-density trace.
    pub fn needs_log_density(&self) -> bool {
        matches!(self, TreeEssMethod::LogPosterior)
    }
}

impl core::fmt::Display for TreeEssMethod {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for TreeEssMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(alloc::format!("unknown ESS method {s:?}")))
    }
}

/// Settings for the randomized (jump-distance) measures.
#[derive(Debug, Clone, Copy)]
pub struct JumpDistanceConfig {
    pub alpha: f64,
    pub n_boot: usize,
    pub seed: u64,
}

impl Default for JumpDistanceConfig {
    fn default() -> Self {
        JumpDistanceConfig {
            alpha: 0.05,
            n_boot: 200,
            seed: 0,
        }
    }
}

/// Dispatch a method over a chain and its distance matrix.
pub fn tree_ess(
    method: TreeEssMethod,
    chain: &Chain,
    d: &DistanceMatrix,
    jump: &JumpDistanceConfig,
) -> Result<EssEstimate> {
    match method {
        TreeEssMethod::FrechetCorrelation => frechet_correlation_ess(d),
        TreeEssMethod::SplitFrequency => split_frequency_ess(chain),
        TreeEssMethod::MedianPseudo => pseudo_ess(d, PseudoAggregate::Median),
        TreeEssMethod::MinPseudo => pseudo_ess(d, PseudoAggregate::Min),
        TreeEssMethod::FoldedRankMedoid => folded_rank_medoid_ess(d),
        TreeEssMethod::TotalDistance => total_distance_ess(d),
        TreeEssMethod::Cmds => cmds_ess(d),
        TreeEssMethod::JumpDistanceBootstrap => jump_distance_ess(d, true, *jump),
        TreeEssMethod::JumpDistanceBootstrapUnsmoothed => jump_distance_ess(d, false, *jump),
        TreeEssMethod::FixedN => Ok(fixed_n_ess(chain)),
        TreeEssMethod::LogPosterior => log_posterior_ess(chain),
    }
}

/// Fréchet correlation ESS: lag autocorrelations are estimated from Fréchet
/// variances of the leading and trailing windows and the mean squared
/// lag-distance, then fed through the sum-of-correlations estimator.
pub fn frechet_correlation_ess(d: &DistanceMatrix) -> Result<EssEstimate> {
    let n = d.n();
    if n < 4 {
        return Err(Error::SeriesTooShort { need: 4, got: n });
    }
    if d.is_zero() {
        return Ok(EssEstimate {
            value: 1.0,
            method: "frechetCorrelation",
            n,
        });
    }

    // prefix[k] = sum of squared distances over pairs i < j < k,
    // suffix[s] = the same over pairs s <= i < j < n
    let mut prefix = alloc::vec![0.0f64; n + 1];
    for k in 1..n {
        let mut row = 0.0;
        for i in 0..k {
            row += d.sq(i, k);
        }
        prefix[k + 1] = prefix[k] + row;
    }
    let mut suffix = alloc::vec![0.0f64; n + 1];
    for s in (0..n - 1).rev() {
        let mut row = 0.0;
        for j in s + 1..n {
            row += d.sq(s, j);
        }
        suffix[s] = suffix[s + 1] + row;
    }

    let mut rho = Vec::with_capacity(n - 1);
    rho.push(1.0);
    for s in 1..=n - 2 {
        let w = (n - s) as f64;
        let norm = w * (w - 1.0);
        let var_lead = prefix[n - s] / norm;
        let var_trail = suffix[s] / norm;
        if var_lead <= 0.0 || var_trail <= 0.0 {
            break; // a window collapsed to a single topology
        }
        let mut delta_sq = 0.0;
        for i in 0..n - s {
            delta_sq += d.sq(i, i + s);
        }
        delta_sq /= w;
        let cov = 0.5 * (var_lead + var_trail - delta_sq);
        rho.push(cov / math::sqrt(var_lead * var_trail));
    }

    let mut est = sum_of_correlations_ess(&AutocorrSeries { rho, n });
    est.method = "frechetCorrelation";
    Ok(est)
}

/// Split frequency ESS: the batch-means ESS of the split indicator embedding.
/// Per-batch means are batch split frequencies; squared Euclidean deviations
/// from the whole-chain frequencies feed the lobed batch-means estimator.
pub fn split_frequency_ess(chain: &Chain) -> Result<EssEstimate> {
    let n = chain.len();
    if n < 16 {
        return Err(Error::SeriesTooShort { need: 16, got: n });
    }
    let columns = split_indicator_columns(chain);
    let b = math::floor(math::sqrt(n as f64)) as usize;
    let b3 = (b / 3).max(1);
    let mut sigma_sq = 0.0;
    let mut lambda_b = 0.0;
    let mut lambda_b3 = 0.0;
    for col in &columns {
        let grand = math::mean(col);
        sigma_sq += col.iter().map(|&x| (x - grand) * (x - grand)).sum::<f64>();
        for (batch, acc) in [(b, &mut lambda_b), (b3, &mut lambda_b3)] {
            let a = n / batch;
            let mut s = 0.0;
            for i in 0..a {
                let y = math::mean(&col[i * batch..(i + 1) * batch]);
                s += (y - grand) * (y - grand);
            }
            *acc += batch as f64 / (a as f64 - 1.0) * s;
        }
    }
    sigma_sq /= (n - 1) as f64;
    if sigma_sq == 0.0 {
        // no split varies: the all-identical degenerate policy
        return Ok(EssEstimate {
            value: 1.0,
            method: "splitFrequency",
            n,
        });
    }
    let lambda = (2.0 * lambda_b - lambda_b3).max(LAMBDA_FLOOR);
    Ok(EssEstimate {
        value: (n as f64 * sigma_sq / lambda).clamp(1.0, n as f64),
        method: "splitFrequency",
        n,
    })
}

#[derive(Debug, Clone, Copy)]
pub enum PseudoAggregate {
    Median,
    Min,
}

/// Pseudo-ESS: for every reference tree, the chain is projected to its
/// distance from the reference and the AR-spectral ESS of that series is
/// computed; the median or minimum over all n references is returned.
/// References in the same topology class share a series, so only one ESS per
/// distinct topology is actually computed.
pub fn pseudo_ess(d: &DistanceMatrix, aggregate: PseudoAggregate) -> Result<EssEstimate> {
    let n = d.n();
    if n < 8 {
        return Err(Error::SeriesTooShort { need: 8, got: n });
    }
    let method = match aggregate {
        PseudoAggregate::Median => "medianPseudo",
        PseudoAggregate::Min => "minPseudo",
    };
    let mut per_class: Vec<(f64, u32)> = Vec::with_capacity(d.n_classes());
    for class in 0..d.n_classes() {
        let series: Vec<f64> = (0..n)
            .map(|i| d.class_get(d.class_of(i), class) as f64)
            .collect();
        let ess = ar_spectrum_ess(&series)?.value;
        per_class.push((ess, d.class_count(class)));
    }
    let value = match aggregate {
        PseudoAggregate::Min => per_class
            .iter()
            .map(|&(e, _)| e)
            .fold(f64::INFINITY, f64::min),
        PseudoAggregate::Median => weighted_median(&mut per_class, n),
    };
    Ok(EssEstimate { value, method, n })
}

/// Median of the multiset where entry (value, count) appears count times.
fn weighted_median(entries: &mut [(f64, u32)], total: usize) -> f64 {
    entries.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("ESS values are finite"));
    let lower_pos = (total - 1) / 2;
    let upper_pos = total / 2;
    let mut cum = 0usize;
    let mut lower = None;
    let mut upper = None;
    for &(v, c) in entries.iter() {
        let next = cum + c as usize;
        if lower.is_none() && lower_pos < next {
            lower = Some(v);
        }
        if upper.is_none() && upper_pos < next {
            upper = Some(v);
        }
        cum = next;
    }
    0.5 * (lower.expect("non-empty") + upper.expect("non-empty"))
}

/// Folded rank-medoid ESS: distances to the medoid are rank-transformed
/// (average ranks for ties), mapped through the normal quantile with the
/// (r - 3/8)/(n - 1/4) offset, and the sum-of-correlations ESS of the
/// transformed series is taken; the minimum over all tied medoids (one per
/// distinct topology) is returned.
pub fn folded_rank_medoid_ess(d: &DistanceMatrix) -> Result<EssEstimate> {
    let n = d.n();
    if n < 8 {
        return Err(Error::SeriesTooShort { need: 8, got: n });
    }
    let method = "foldedRankMedoid";
    if d.is_zero() {
        return Ok(EssEstimate {
            value: 1.0,
            method,
            n,
        });
    }
    let medoids = medoid_indices(d);
    let mut classes: Vec<usize> = medoids.iter().map(|&i| d.class_of(i)).collect();
    classes.sort_unstable();
    classes.dedup();

    let mut best = f64::INFINITY;
    for class in classes {
        let zeta: Vec<f64> = (0..n)
            .map(|i| d.class_get(d.class_of(i), class) as f64)
            .collect();
        let z = folded_rank_transform(&zeta);
        best = best.min(sum_of_correlations_ess_of(&z)?.value);
    }
    Ok(EssEstimate {
        value: best,
        method,
        n,
    })
}

/// Average-tie ranks followed by the offset normal quantile transform.
fn folded_rank_transform(zeta: &[f64]) -> Vec<f64> {
    let n = zeta.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| zeta[a].partial_cmp(&zeta[b]).expect("finite distances"));
    let mut ranks = alloc::vec![0.0f64; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && zeta[order[j + 1]] == zeta[order[i]] {
            j += 1;
        }
        // 1-based average rank over the tie run i..=j
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
        .iter()
        .map(|&r| math::norm_quantile((r - 0.375) / (n as f64 - 0.25)))
        .collect()
}

/// Total distance ESS: the AR-spectral ESS of each sample's total distance
/// to the rest of the chain.
pub fn total_distance_ess(d: &DistanceMatrix) -> Result<EssEstimate> {
    let n = d.n();
    if n < 8 {
        return Err(Error::SeriesTooShort { need: 8, got: n });
    }
    let y: Vec<f64> = (0..n).map(|i| d.row_sum(i) as f64).collect();
    let mut est = ar_spectrum_ess(&y)?;
    est.method = "totalDistance";
    Ok(est)
}

/// Classical multidimensional scaling ESS: double-center the squared distance
/// matrix, take the leading eigenvector's coordinates as a scalar series, and
/// compute its AR-spectral ESS. The kernel's affine invariance makes the
/// eigenvector's sign irrelevant.
pub fn cmds_ess(d: &DistanceMatrix) -> Result<EssEstimate> {
    let n = d.n();
    if n < 8 {
        return Err(Error::SeriesTooShort { need: 8, got: n });
    }
    let method = "cmds";
    if d.is_zero() {
        return Ok(EssEstimate {
            value: 1.0,
            method,
            n,
        });
    }
    let coords = cmds_first_coordinate(d);
    let mut est = ar_spectrum_ess(&coords)?;
    est.method = method;
    Ok(est)
}

/// Leading eigenvector coordinates of B = -1/2 J D^2 J by power iteration
/// (tolerance 1e-10, at most 10000 iterations). Entries of B depend only on
/// the topology classes of their indices, so the multiply is carried out on
/// the class-level kernel in O(n + classes^2) per step. The operator is
/// shifted by its infinity norm so the iteration converges to the
/// algebraically largest eigenvalue. The start vector is a centered linear
/// ramp: B annihilates constant vectors, so the all-ones direction carries
/// no signal.
fn cmds_first_coordinate(d: &DistanceMatrix) -> Vec<f64> {
    let n = d.n();
    let u = d.n_classes();
    let counts: Vec<f64> = (0..u).map(|c| d.class_count(c) as f64).collect();

    // class-level squared distances, row means, and grand mean
    let sq = |a: usize, b: usize| {
        let v = d.class_get(a, b) as f64;
        v * v
    };
    let mut row_mean = alloc::vec![0.0f64; u];
    let mut grand = 0.0;
    for a in 0..u {
        let s: f64 = counts.iter().enumerate().map(|(c, &w)| w * sq(a, c)).sum();
        row_mean[a] = s / n as f64;
        grand += counts[a] * s;
    }
    grand /= (n * n) as f64;
    let kernel = |a: usize, c: usize| -0.5 * (sq(a, c) - row_mean[a] - row_mean[c] + grand);

    // infinity norm of the full B bounds |lambda_min|
    let mut shift = 0.0f64;
    for a in 0..u {
        let row: f64 = (0..u).map(|c| counts[c] * math::abs(kernel(a, c))).sum();
        shift = shift.max(row);
    }

    let mut v: Vec<f64> = (0..n).map(|i| i as f64 - (n as f64 - 1.0) / 2.0).collect();
    normalize(&mut v);
    let mut next = alloc::vec![0.0f64; n];
    let mut class_sums = alloc::vec![0.0f64; u];
    let mut class_out = alloc::vec![0.0f64; u];
    for _ in 0..10_000 {
        class_sums.iter_mut().for_each(|s| *s = 0.0);
        for (i, &vi) in v.iter().enumerate() {
            class_sums[d.class_of(i)] += vi;
        }
        for (a, out) in class_out.iter_mut().enumerate() {
            *out = (0..u).map(|c| kernel(a, c) * class_sums[c]).sum();
        }
        for (i, slot) in next.iter_mut().enumerate() {
            *slot = class_out[d.class_of(i)] + shift * v[i];
        }
        normalize(&mut next);
        let delta: f64 = v
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
        core::mem::swap(&mut v, &mut next);
        if math::sqrt(delta) < 1e-10 {
            break;
        }
    }
    v
}

fn normalize(v: &mut [f64]) {
    let norm = math::sqrt(v.iter().map(|&x| x * x).sum::<f64>());
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// Jump-distance bootstrap ESS. The median RF distance at each lag is made
/// monotone by a running maximum; the threshold is the (1 - alpha) percentile
/// of that statistic at lag 1 under bootstrap resampling of the sample order;
/// the ESS is n over the first lag where the curve crosses the threshold
/// (linearly interpolated between change points when `smoothed`).
pub fn jump_distance_ess(
    d: &DistanceMatrix,
    smoothed: bool,
    cfg: JumpDistanceConfig,
) -> Result<EssEstimate> {
    let n = d.n();
    if n < 8 {
        return Err(Error::SeriesTooShort { need: 8, got: n });
    }
    if !(0.0 < cfg.alpha && cfg.alpha < 1.0) {
        return Err(Error::InvalidLevel(cfg.alpha));
    }
    if cfg.n_boot < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 bootstrap replicates".into(),
        ));
    }
    let method: &'static str = if smoothed {
        "jumpDistanceBootstrap"
    } else {
        "jumpDistanceBootstrapUnsmoothed"
    };
    if d.is_zero() {
        return Ok(EssEstimate {
            value: 1.0,
            method,
            n,
        });
    }

    // G(s): running maximum of the median lag-s distance
    let mut g = Vec::with_capacity(n - 1);
    let mut running = f64::NEG_INFINITY;
    let mut buf = Vec::with_capacity(n - 1);
    for s in 1..n {
        buf.clear();
        buf.extend((0..n - s).map(|i| d.get(i, i + s) as f64));
        buf.sort_by(|a, b| a.partial_cmp(b).unwrap());
        running = running.max(math::quantile_sorted(&buf, 0.5));
        g.push(running);
    }

    // threshold: (1 - alpha) percentile of G(1) over bootstrap reorderings
    use rand::SeedableRng;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut boot = Vec::with_capacity(cfg.n_boot);
    let mut lag1 = Vec::with_capacity(n - 1);
    for _ in 0..cfg.n_boot {
        let mut prev = rng.gen_range(0..n);
        lag1.clear();
        for _ in 0..n - 1 {
            let cur = rng.gen_range(0..n);
            lag1.push(d.get(prev, cur) as f64);
            prev = cur;
        }
        lag1.sort_by(|a, b| a.partial_cmp(b).unwrap());
        boot.push(math::quantile_sorted(&lag1, 0.5));
    }
    boot.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let epsilon = math::quantile_sorted(&boot, 1.0 - cfg.alpha);

    let s0 = if smoothed {
        first_crossing_interpolated(&g, epsilon)
    } else {
        g.iter()
            .position(|&v| v > epsilon)
            .map(|idx| (idx + 1) as f64)
    };
    let value = match s0 {
        Some(s0) => n as f64 / s0,
        None => 1.0,
    };
    Ok(EssEstimate {
        value: value.clamp(1.0, n as f64),
        method,
        n,
    })
}

/// First (possibly fractional) lag where the piecewise-linear interpolation
/// of G through its change points reaches `epsilon`. The curve is anchored at
/// (0, 0) since the lag-zero distance is zero.
fn first_crossing_interpolated(g: &[f64], epsilon: f64) -> Option<f64> {
    if epsilon <= 0.0 {
        return Some(f64::MIN_POSITIVE);
    }
    let mut prev_s = 0.0f64;
    let mut prev_v = 0.0f64;
    for (i, &v) in g.iter().enumerate() {
        let s = (i + 1) as f64;
        if v > prev_v {
            if v >= epsilon {
                return Some(prev_s + (epsilon - prev_v) / (v - prev_v) * (s - prev_s));
            }
            prev_s = s;
            prev_v = v;
        }
    }
    None
}

/// The sample count, unconditionally.
pub fn fixed_n_ess(chain: &Chain) -> EssEstimate {
    EssEstimate {
        value: (chain.len() as f64).max(1.0),
        method: "fixedN",
        n: chain.len(),
    }
}

/// AR-spectral ESS of the log-density trace.
pub fn log_posterior_ess(chain: &Chain) -> Result<EssEstimate> {
    let ld = chain.log_density().ok_or(Error::MissingLogDensity)?;
    let mut est = ar_spectrum_ess(ld)?;
    est.method = "logPosterior";
    Ok(est)
}
