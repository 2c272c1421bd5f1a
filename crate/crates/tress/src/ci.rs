//! ESS-based confidence intervals for split probabilities, difference
//! intervals between chains, and the pairwise split comparison report.

use alloc::vec::Vec;

use crate::chain::Chain;
use crate::dist::distance_matrix;
use crate::error::{Error, Result};
use crate::math;
use crate::summary::{asdsf_msdsf, split_probabilities, SplitProbabilities};
use crate::topology::Split;
use crate::tree_ess::{tree_ess, JumpDistanceConfig, TreeEssMethod};

fn check_level(level: f64) -> Result<()> {
    if !(0.0 < level && level < 1.0) {
        return Err(Error::InvalidLevel(level));
    }
    Ok(())
}

/// Jeffreys interval for a proportion with a real-valued effective count:
/// Beta(x + 1/2, n - x + 1/2) quantiles with x = p_hat * ess and n = ess.
/// The lower endpoint is 0 when x = 0 and the upper is 1 when x = n.
pub fn jeffreys_ci(p_hat: f64, ess: f64, level: f64) -> Result<(f64, f64)> {
    check_level(level)?;
    if !(0.0..=1.0).contains(&p_hat) {
        return Err(Error::InvalidArgument(alloc::format!(
            "probability {p_hat} outside [0, 1]"
        )));
    }
    if ess < 1.0 || !ess.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!(
            "effective sample size {ess} below 1"
        )));
    }
    let x = p_hat * ess;
    let alpha = 1.0 - level;
    let a = x + 0.5;
    let b = ess - x + 0.5;
    let lower = if x <= 0.0 {
        0.0
    } else {
        math::beta_quantile(alpha / 2.0, a, b)
    };
    let upper = if x >= ess {
        1.0
    } else {
        math::beta_quantile(1.0 - alpha / 2.0, a, b)
    };
    Ok((lower, upper))
}

/// Agresti-Caffo interval for a difference of proportions: one success and
/// one failure are added to each sample (x + 1 over ess + 2) and a Wald
/// interval is built on the adjusted estimates.
pub fn agresti_caffo_diff_ci(
    p1: f64,
    ess1: f64,
    p2: f64,
    ess2: f64,
    level: f64,
) -> Result<(f64, f64)> {
    check_level(level)?;
    for (p, e) in [(p1, ess1), (p2, ess2)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(alloc::format!(
                "probability {p} outside [0, 1]"
            )));
        }
        if e < 1.0 || !e.is_finite() {
            return Err(Error::InvalidArgument(alloc::format!(
                "effective sample size {e} below 1"
            )));
        }
    }
    let n1 = ess1 + 2.0;
    let n2 = ess2 + 2.0;
    let q1 = (p1 * ess1 + 1.0) / n1;
    let q2 = (p2 * ess2 + 1.0) / n2;
    let z = math::norm_quantile(1.0 - (1.0 - level) / 2.0);
    let half = z * math::sqrt(q1 * (1.0 - q1) / n1 + q2 * (1.0 - q2) / n2);
    let center = q1 - q2;
    Ok((center - half, center + half))
}

/// One split compared between one ordered pair of chains.
#[derive(Debug, Clone)]
pub struct SplitComparisonRow {
    pub chain_i: usize,
    pub chain_j: usize,
    pub split: Split,
    pub p_i: f64,
    pub p_j: f64,
    pub ci_i: (f64, f64),
    pub ci_j: (f64, f64),
    pub diff_ci: (f64, f64),
    /// true when the difference interval contains zero
    pub pass: bool,
}

/// Per-pair aggregate: between-chain split frequency deviations and the
/// count of distinctly different splits (difference CI excluding zero).
#[derive(Debug, Clone)]
pub struct PairSummary {
    pub chain_i: usize,
    pub chain_j: usize,
    pub asdsf: f64,
    pub msdsf: f64,
    pub n_fail: usize,
}

#[derive(Debug, Clone)]
pub struct SplitComparisonReport {
    pub rows: Vec<SplitComparisonRow>,
    pub pairs: Vec<PairSummary>,
    /// ESS per chain under the requested method
    pub ess: Vec<f64>,
}

/// Pairwise split-probability comparison with explicitly supplied per-chain
/// ESS values (one per chain). Splits absent from a chain count as
/// probability zero there.
pub fn compare_chains_with_ess(
    chains: &[Chain],
    ess: &[f64],
    level: f64,
    asdsf_min_freq: f64,
) -> Result<SplitComparisonReport> {
    check_level(level)?;
    if chains.len() < 2 {
        return Err(Error::SubsetTooSmall {
            need: 2,
            got: chains.len(),
        });
    }
    if ess.len() != chains.len() {
        return Err(Error::InvalidArgument(
            "one ESS value per chain required".into(),
        ));
    }
    for c in &chains[1..] {
        if !c.taxa().same_as(chains[0].taxa()) {
            return Err(Error::TaxonMismatch);
        }
    }
    let probs: Vec<SplitProbabilities> = chains
        .iter()
        .map(split_probabilities)
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut pairs = Vec::new();
    for i in 0..chains.len() {
        for j in i + 1..chains.len() {
            let mut union: Vec<&Split> = probs[i].probs.keys().collect();
            union.extend(probs[j].probs.keys());
            union.sort_unstable();
            union.dedup();

            let mut n_fail = 0;
            for split in union {
                let p_i = probs[i].prob(split);
                let p_j = probs[j].prob(split);
                let ci_i = jeffreys_ci(p_i, ess[i], level)?;
                let ci_j = jeffreys_ci(p_j, ess[j], level)?;
                let diff_ci = agresti_caffo_diff_ci(p_i, ess[i], p_j, ess[j], level)?;
                let pass = diff_ci.0 <= 0.0 && 0.0 <= diff_ci.1;
                if !pass {
                    n_fail += 1;
                }
                rows.push(SplitComparisonRow {
                    chain_i: i,
                    chain_j: j,
                    split: split.clone(),
                    p_i,
                    p_j,
                    ci_i,
                    ci_j,
                    diff_ci,
                    pass,
                });
            }
            let (asdsf, msdsf) =
                asdsf_msdsf(&[chains[i].clone(), chains[j].clone()], asdsf_min_freq)?;
            pairs.push(PairSummary {
                chain_i: i,
                chain_j: j,
                asdsf,
                msdsf,
                n_fail,
            });
        }
    }
    Ok(SplitComparisonReport {
        rows,
        pairs,
        ess: ess.to_vec(),
    })
}

/// Pairwise split-probability comparison using the given tree ESS method for
/// each chain's interval widths.
pub fn compare_chains(
    chains: &[Chain],
    method: TreeEssMethod,
    level: f64,
    jump: &JumpDistanceConfig,
    asdsf_min_freq: f64,
) -> Result<SplitComparisonReport> {
    let mut ess = Vec::with_capacity(chains.len());
    for c in chains {
        let d = distance_matrix(c)?;
        ess.push(tree_ess(method, c, &d, jump)?.value);
    }
    compare_chains_with_ess(chains, &ess, level, asdsf_min_freq)
}
