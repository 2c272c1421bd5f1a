//! Single-chain convergence traces via block bootstrap: how much would the
//! split probabilities, tree probabilities, or consensus tree move if the
//! chain were resampled block-wise at each prefix length?

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::chain::Chain;
use crate::dist::rf_distance;
use crate::error::{Error, Result};
use crate::math;
use crate::summary::{asdsf_msdsf, split_probabilities, tree_probabilities};
use crate::topology::Topology;
use crate::tree_ess::split_frequency_ess;

/// Which summary the trace tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BootstrapKind {
    /// ASDSF between replicate and reference split probabilities
    /// (no frequency filter).
    Asdsf,
    /// Euclidean distance between the union-keyed tree probability vectors.
    TreeProbEuclidean,
    /// RF distance between consensus trees, one trace per threshold.
    ConsensusRf,
}

impl BootstrapKind {
    pub fn name(&self) -> &'static str {
        match self {
            BootstrapKind::Asdsf => "asdsf",
            BootstrapKind::TreeProbEuclidean => "tree_prob_euclidean",
            BootstrapKind::ConsensusRf => "consensus_rf",
        }
    }
}

impl core::str::FromStr for BootstrapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asdsf" => Ok(BootstrapKind::Asdsf),
            "tree_prob_euclidean" => Ok(BootstrapKind::TreeProbEuclidean),
            "consensus_rf" => Ok(BootstrapKind::ConsensusRf),
            _ => Err(Error::InvalidArgument(alloc::format!(
                "unknown bootstrap kind {s:?}"
            ))),
        }
    }
}

/// One row of the convergence trace: the quantiles of the replicate-versus-
/// reference discrepancy at prefix length `n_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub n_i: usize,
    /// split-frequency ESS of the first n_i samples (needs at least 16)
    pub prefix_split_frequency_ess: Option<f64>,
    pub kind: BootstrapKind,
    /// consensus threshold for the consensus_rf kind, absent otherwise
    pub threshold: Option<f64>,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

/// Ten logarithmically spaced prefix sizes from 100 (or smaller chains' full
/// length) up to n.
pub fn default_subsample_sizes(n: usize) -> Vec<usize> {
    let lo = 100usize.min(n);
    let steps = 10;
    let mut out = Vec::with_capacity(steps);
    let (lo_f, hi_f) = (math::ln(lo as f64), math::ln(n as f64));
    for k in 0..steps {
        let f = k as f64 / (steps - 1) as f64;
        let v = math::round(math::exp(lo_f + f * (hi_f - lo_f))) as usize;
        out.push(v.clamp(lo, n));
    }
    out.dedup();
    out
}

/// Block-bootstrap convergence trace. For each prefix length the reference
/// summary uses the first a*b samples; each replicate concatenates `a` blocks
/// of length b = floor(sqrt(n_i)) with starting indices drawn uniformly, and
/// the 5th/50th/95th percentiles of the discrepancies are recorded.
pub fn block_bootstrap_trace(
    chain: &Chain,
    subsample_sizes: &[usize],
    replicates: usize,
    kind: BootstrapKind,
    consensus_thresholds: &[f64],
    seed: u64,
) -> Result<Vec<TraceRow>> {
    if replicates < 10 {
        return Err(Error::InvalidArgument(
            "need at least 10 bootstrap replicates".into(),
        ));
    }
    if subsample_sizes.is_empty() {
        return Err(Error::InvalidArgument("no subsample sizes given".into()));
    }
    for w in subsample_sizes.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidArgument(
                "subsample sizes must be strictly increasing".into(),
            ));
        }
    }
    if *subsample_sizes.last().unwrap() > chain.len() {
        return Err(Error::InvalidArgument(alloc::format!(
            "subsample size {} exceeds chain length {}",
            subsample_sizes.last().unwrap(),
            chain.len()
        )));
    }
    if subsample_sizes[0] < 4 {
        return Err(Error::InvalidArgument(
            "subsample sizes below 4 degenerate the block size".into(),
        ));
    }
    if kind == BootstrapKind::ConsensusRf {
        for &t in consensus_thresholds {
            if !(0.5..=1.0).contains(&t) {
                return Err(Error::InvalidThreshold(t));
            }
        }
        if consensus_thresholds.is_empty() {
            return Err(Error::InvalidArgument("no consensus thresholds".into()));
        }
    }

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for &n_i in subsample_sizes {
        let b = math::floor(math::sqrt(n_i as f64)) as usize;
        let a = n_i / b;
        let used = a * b;
        let reference = subchain(chain, (0..used).collect());
        let prefix_ess = if n_i >= 16 {
            Some(split_frequency_ess(&subchain(chain, (0..n_i).collect()))?.value)
        } else {
            None
        };

        // per replicate: one discrepancy for scalar kinds, one per threshold
        // for the consensus kind
        let n_series = match kind {
            BootstrapKind::ConsensusRf => consensus_thresholds.len(),
            _ => 1,
        };
        let mut discrepancies = alloc::vec![Vec::with_capacity(replicates); n_series];
        for _ in 0..replicates {
            let mut idx = Vec::with_capacity(used);
            for _ in 0..a {
                let start = rng.gen_range(0..=n_i - b);
                idx.extend(start..start + b);
            }
            let replicate = subchain(chain, idx);
            match kind {
                BootstrapKind::Asdsf => {
                    let (asdsf, _) = asdsf_msdsf(&[replicate, reference.clone()], 0.0)?;
                    discrepancies[0].push(asdsf);
                }
                BootstrapKind::TreeProbEuclidean => {
                    discrepancies[0].push(tree_prob_euclidean(&replicate, &reference)?);
                }
                BootstrapKind::ConsensusRf => {
                    let rep_probs = split_probabilities(&replicate)?;
                    let ref_probs = split_probabilities(&reference)?;
                    for (k, &t) in consensus_thresholds.iter().enumerate() {
                        let c_rep = rep_probs.consensus(t)?;
                        let c_ref = ref_probs.consensus(t)?;
                        discrepancies[k].push(rf_distance(&c_rep, &c_ref)? as f64);
                    }
                }
            }
        }

        for (k, series) in discrepancies.iter_mut().enumerate() {
            series.sort_by(|a, b| a.partial_cmp(b).expect("finite discrepancies"));
            rows.push(TraceRow {
                n_i,
                prefix_split_frequency_ess: prefix_ess,
                kind,
                threshold: match kind {
                    BootstrapKind::ConsensusRf => Some(consensus_thresholds[k]),
                    _ => None,
                },
                q05: math::quantile_sorted(series, 0.05),
                q50: math::quantile_sorted(series, 0.50),
                q95: math::quantile_sorted(series, 0.95),
            });
        }
    }
    Ok(rows)
}

fn subchain(chain: &Chain, idx: Vec<usize>) -> Chain {
    let samples: Vec<Topology> = idx.iter().map(|&i| chain.samples()[i].clone()).collect();
    let log_density = chain
        .log_density()
        .map(|ld| idx.iter().map(|&i| ld[i]).collect());
    Chain::new(chain.taxa().clone(), samples, log_density).expect("indices are in range")
}

fn tree_prob_euclidean(a: &Chain, b: &Chain) -> Result<f64> {
    let pa = tree_probabilities(a)?;
    let pb = tree_probabilities(b)?;
    let mut sum = 0.0;
    for (t, &p) in &pa.probs {
        let q = pb.prob(t);
        sum += (p - q) * (p - q);
    }
    for (t, &q) in &pb.probs {
        if !pa.probs.contains_key(t) {
            sum += q * q;
        }
    }
    Ok(math::sqrt(sum))
}
