//! Posterior summaries (split and tree probabilities, consensus trees) and
//! the Monte Carlo standard error machinery built on them: ASDSF/MSDSF,
//! multi-run standard errors, and the RMCE/ITMCE comparison statistics.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::chain::Chain;
use crate::consensus::mrc_tree;
use crate::dist::rf_distance;
use crate::error::{Error, Result};
use crate::math;
use crate::taxa::TaxonMap;
use crate::topology::{Split, Topology};

/// Estimated split probabilities from one sample of topologies. Splits never
/// observed are simply absent (probability zero).
#[derive(Debug, Clone)]
pub struct SplitProbabilities {
    pub taxa: Arc<TaxonMap>,
    pub probs: BTreeMap<Split, f64>,
    pub counts: BTreeMap<Split, u64>,
    pub n: usize,
}

impl SplitProbabilities {
    pub fn prob(&self, s: &Split) -> f64 {
        self.probs.get(s).copied().unwrap_or(0.0)
    }

    /// The majority-rule consensus of these probabilities.
    pub fn consensus(&self, threshold: f64) -> Result<Topology> {
        mrc_tree(&self.probs, &self.taxa, threshold)
    }
}

/// Estimated topology probabilities from one sample.
#[derive(Debug, Clone)]
pub struct TreeProbabilities {
    pub probs: BTreeMap<Topology, f64>,
    pub counts: BTreeMap<Topology, u64>,
    pub n: usize,
}

impl TreeProbabilities {
    pub fn prob(&self, t: &Topology) -> f64 {
        self.probs.get(t).copied().unwrap_or(0.0)
    }
}

/// Occurrence fraction of every observed non-trivial split.
pub fn split_probabilities(chain: &Chain) -> Result<SplitProbabilities> {
    if chain.is_empty() {
        return Err(Error::EmptyChain);
    }
    let n = chain.len();
    let mut counts: BTreeMap<Split, u64> = BTreeMap::new();
    for t in chain.samples() {
        for s in t.splits() {
            *counts.entry(s.clone()).or_insert(0) += 1;
        }
    }
    let probs = counts
        .iter()
        .map(|(s, &c)| (s.clone(), c as f64 / n as f64))
        .collect();
    Ok(SplitProbabilities {
        taxa: chain.taxa().clone(),
        probs,
        counts,
        n,
    })
}

/// Occurrence fraction of every sampled topology; fractions sum to one.
pub fn tree_probabilities(chain: &Chain) -> Result<TreeProbabilities> {
    if chain.is_empty() {
        return Err(Error::EmptyChain);
    }
    let n = chain.len();
    let mut counts: BTreeMap<Topology, u64> = BTreeMap::new();
    for t in chain.samples() {
        *counts.entry(t.clone()).or_insert(0) += 1;
    }
    let probs = counts
        .iter()
        .map(|(t, &c)| (t.clone(), c as f64 / n as f64))
        .collect();
    Ok(TreeProbabilities { probs, counts, n })
}

/// Per-split 0/1 indicator series over the chain, one column per observed
/// non-trivial split (the RF-space embedding). Column order follows the
/// canonical split order.
pub fn split_indicator_columns(chain: &Chain) -> Vec<Vec<f64>> {
    let mut splits: BTreeMap<&Split, usize> = BTreeMap::new();
    for t in chain.samples() {
        for s in t.splits() {
            let next = splits.len();
            splits.entry(s).or_insert(next);
        }
    }
    let mut columns = alloc::vec![alloc::vec![0.0f64; chain.len()]; splits.len()];
    for (i, t) in chain.samples().iter().enumerate() {
        for s in t.splits() {
            columns[splits[s]][i] = 1.0;
        }
    }
    columns
}

/// Average and maximum across-chain standard deviation of split frequencies.
/// Only splits reaching `min_freq` in at least one chain participate; the
/// standard deviation is the population form (divisor m). With no qualifying
/// splits both values are zero.
pub fn asdsf_msdsf(chains: &[Chain], min_freq: f64) -> Result<(f64, f64)> {
    if chains.len() < 2 {
        return Err(Error::SubsetTooSmall {
            need: 2,
            got: chains.len(),
        });
    }
    for c in &chains[1..] {
        if !c.taxa().same_as(chains[0].taxa()) {
            return Err(Error::TaxonMismatch);
        }
    }
    let per_chain: Vec<SplitProbabilities> = chains
        .iter()
        .map(split_probabilities)
        .collect::<Result<_>>()?;
    let mut union: BTreeMap<&Split, f64> = BTreeMap::new();
    for sp in &per_chain {
        for (s, &p) in &sp.probs {
            let best = union.entry(s).or_insert(0.0);
            if p > *best {
                *best = p;
            }
        }
    }
    let m = chains.len() as f64;
    let mut sum = 0.0;
    let mut max = 0.0f64;
    let mut kept = 0usize;
    for (s, &best) in &union {
        if best < min_freq {
            continue;
        }
        let freqs: Vec<f64> = per_chain.iter().map(|sp| sp.prob(s)).collect();
        let mean = math::mean(&freqs);
        let sd = math::sqrt(freqs.iter().map(|&f| (f - mean) * (f - mean)).sum::<f64>() / m);
        sum += sd;
        max = max.max(sd);
        kept += 1;
    }
    if kept == 0 {
        return Ok((0.0, 0.0));
    }
    Ok((sum / kept as f64, max))
}

/// Brute-force Monte Carlo standard error across m independent estimates:
/// the population standard deviation (divisor m) around the plain mean.
pub fn se_scalar(estimates: &[f64]) -> Result<f64> {
    let m = estimates.len();
    if m < 2 {
        return Err(Error::SubsetTooSmall { need: 2, got: m });
    }
    let mean = math::mean(estimates);
    Ok(math::sqrt(
        estimates
            .iter()
            .map(|&x| (x - mean) * (x - mean))
            .sum::<f64>()
            / m as f64,
    ))
}

/// Fréchet standard error of the consensus tree: the root mean squared RF
/// distance from each run's consensus to the consensus of the pooled runs.
pub fn frechet_se_mrc(per_run_mrc: &[Topology], pooled_mrc: &Topology) -> Result<f64> {
    let m = per_run_mrc.len();
    if m < 2 {
        return Err(Error::SubsetTooSmall { need: 2, got: m });
    }
    let mut sum = 0.0;
    for t in per_run_mrc {
        let d = rf_distance(t, pooled_mrc)? as f64;
        sum += d * d;
    }
    Ok(math::sqrt(sum / m as f64))
}

/// Relative and inflation-style comparisons of an ESS-implied standard error
/// against the brute-force multi-chain one. `rmce` is undefined when the
/// brute-force SE is zero and `itmce` when the ESS-implied SE is zero; both
/// zero marks the record fully degenerate.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorComparison {
    pub se_mcmc: f64,
    pub se_mcess: f64,
    pub rmce: Option<f64>,
    pub itmce: Option<f64>,
}

impl ErrorComparison {
    pub fn is_degenerate(&self) -> bool {
        self.se_mcmc == 0.0 && self.se_mcess == 0.0
    }
}

/// RMCE = (se_mcmc - se_mcess) / se_mcmc and ITMCE = se_mcmc / se_mcess.
/// Positive RMCE (ITMCE above one) means the ESS was overestimated.
pub fn compare_errors(se_mcmc: f64, se_mcess: f64) -> ErrorComparison {
    let rmce = (se_mcmc > 0.0).then(|| (se_mcmc - se_mcess) / se_mcmc);
    let itmce = (se_mcess > 0.0).then(|| se_mcmc / se_mcess);
    ErrorComparison {
        se_mcmc,
        se_mcess,
        rmce,
        itmce,
    }
}
