//! The ESS validation protocol: run replicate chains against a known target,
//! compute brute-force Monte Carlo standard errors for split probabilities,
//! tree probabilities, and the consensus tree, redo the same computation on
//! ESS-equivalent iid draws, and compare the two via RMCE/ITMCE. Also the
//! multi-chain brute-force comparator and the scalar Normal(0,1) calibration
//! testbed.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::chain::Chain;
use crate::dist::distance_matrix;
use crate::error::{Error, Result};
use crate::ess::ar_spectrum_ess;
use crate::fake::{iid_sample, run_chain_with_stats, CategoricalTreeDistribution, McmcStats};
use crate::math;
use crate::newick::serialize_newick;
use crate::summary::{
    compare_errors, frechet_se_mrc, se_scalar, split_probabilities, tree_probabilities,
    ErrorComparison,
};
use crate::topology::{Split, Topology};
use crate::tree_ess::{tree_ess, JumpDistanceConfig, TreeEssMethod};

/// Which posterior summary a benchmark record concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummaryKind {
    Split,
    Tree,
    Mrc,
}

impl SummaryKind {
    pub fn name(&self) -> &'static str {
        match self {
            SummaryKind::Split => "split",
            SummaryKind::Tree => "tree",
            SummaryKind::Mrc => "mrc",
        }
    }
}

/// Full benchmark configuration.
#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub m: usize,
    pub iterations: u64,
    pub thin: u64,
    pub methods: Vec<TreeEssMethod>,
    pub seed: u64,
    /// pooled-probability filter for split items
    pub split_prob_min: f64,
    /// cap on reported tree items, highest pooled probability first
    pub max_tree_items: usize,
    pub jump_alpha: f64,
    pub jump_n_boot: usize,
}

impl BenchmarkConfig {
    pub fn new(
        m: usize,
        iterations: u64,
        thin: u64,
        methods: Vec<TreeEssMethod>,
        seed: u64,
    ) -> Self {
        BenchmarkConfig {
            m,
            iterations,
            thin,
            methods,
            seed,
            split_prob_min: 0.01,
            max_tree_items: 1000,
            jump_alpha: 0.05,
            jump_n_boot: 200,
        }
    }
}

/// One (method, summary kind, item) comparison.
#[derive(Debug, Clone)]
pub struct BenchmarkRecord {
    pub method: String,
    pub summary_kind: SummaryKind,
    pub item_id: String,
    /// pooled probability of the item (absent for the consensus tree)
    pub item_prob: Option<f64>,
    pub comparison: ErrorComparison,
    /// mean ESS of this method across the m chains
    pub mean_ess: f64,
}

#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub records: Vec<BenchmarkRecord>,
    /// per-method, per-chain ESS values in chain order
    pub per_chain_ess: Vec<(String, Vec<f64>)>,
    pub chain_stats: Vec<McmcStats>,
    pub kept_samples: usize,
    pub iterations: u64,
}

impl BenchmarkReport {
    pub fn degenerate_count(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.comparison.is_degenerate())
            .count()
    }
}

/// The items whose standard errors the benchmark tracks, fixed by the pooled
/// MCMC estimates so that both sides of the comparison score the same set.
#[derive(Debug, Clone)]
pub struct ItemSet {
    pub splits: Vec<(Split, f64)>,
    pub trees: Vec<(Topology, f64)>,
}

/// Build the tracked item set from pooled chains: splits with pooled
/// probability at least `split_prob_min`, and the `max_tree_items`
/// highest-probability topologies.
pub fn select_items(
    chains: &[Chain],
    split_prob_min: f64,
    max_tree_items: usize,
) -> Result<ItemSet> {
    let pooled = pool_chains(chains)?;
    let sp = split_probabilities(&pooled)?;
    let tp = tree_probabilities(&pooled)?;
    let splits: Vec<(Split, f64)> = sp
        .probs
        .iter()
        .filter(|(_, &p)| p >= split_prob_min)
        .map(|(s, &p)| (s.clone(), p))
        .collect();
    let mut trees: Vec<(Topology, f64)> = tp.probs.iter().map(|(t, &p)| (t.clone(), p)).collect();
    // highest probability first; ties in canonical topology order
    trees.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    trees.truncate(max_tree_items);
    Ok(ItemSet { splits, trees })
}

fn pool_chains(chains: &[Chain]) -> Result<Chain> {
    if chains.is_empty() {
        return Err(Error::EmptyChain);
    }
    let taxa = chains[0].taxa().clone();
    let mut samples = Vec::new();
    for c in chains {
        if !c.taxa().same_as(&taxa) {
            return Err(Error::TaxonMismatch);
        }
        samples.extend_from_slice(c.samples());
    }
    Chain::new(taxa, samples, None)
}

/// Brute-force standard errors for every tracked item across m runs: the
/// population SD of per-run probabilities per item, plus the Fréchet SE of
/// the consensus tree around the pooled consensus.
#[derive(Debug, Clone)]
pub struct MultiChainSes {
    pub split_ses: Vec<f64>,
    pub tree_ses: Vec<f64>,
    pub mrc_se: f64,
}

/// Apply the multi-run SE formulas to the given chains for the given items.
/// This is both step 2 of the protocol (on MCMC chains) and step 4 (on the
/// ESS-equivalent iid sets), as well as the nRuns brute-force comparator when
/// handed a subset of the runs.
pub fn multi_chain_ses(chains: &[Chain], items: &ItemSet) -> Result<MultiChainSes> {
    if chains.len() < 2 {
        return Err(Error::SubsetTooSmall {
            need: 2,
            got: chains.len(),
        });
    }
    let per_chain_splits: Vec<_> = chains
        .iter()
        .map(split_probabilities)
        .collect::<Result<Vec<_>>>()?;
    let per_chain_trees: Vec<_> = chains
        .iter()
        .map(tree_probabilities)
        .collect::<Result<Vec<_>>>()?;

    let mut split_ses = Vec::with_capacity(items.splits.len());
    for (s, _) in &items.splits {
        let estimates: Vec<f64> = per_chain_splits.iter().map(|sp| sp.prob(s)).collect();
        split_ses.push(se_scalar(&estimates)?);
    }
    let mut tree_ses = Vec::with_capacity(items.trees.len());
    for (t, _) in &items.trees {
        let estimates: Vec<f64> = per_chain_trees.iter().map(|tp| tp.prob(t)).collect();
        tree_ses.push(se_scalar(&estimates)?);
    }

    let per_run_mrc: Vec<Topology> = per_chain_splits
        .iter()
        .map(|sp| sp.consensus(0.5))
        .collect::<Result<_>>()?;
    let pooled = pool_chains(chains)?;
    let pooled_mrc = split_probabilities(&pooled)?.consensus(0.5)?;
    let mrc_se = frechet_se_mrc(&per_run_mrc, &pooled_mrc)?;

    Ok(MultiChainSes {
        split_ses,
        tree_ses,
        mrc_se,
    })
}

/// nRuns brute-force comparison: the step-2 standard errors recomputed from a
/// subset of the chains.
pub fn nruns_bruteforce(subset: &[Chain], items: &ItemSet) -> Result<MultiChainSes> {
    multi_chain_ses(subset, items)
}

/// Steps 2-5 of the protocol with externally supplied per-chain ESS values:
/// each labelled column is rounded to integer draw counts, matching iid sets
/// are drawn from the target, and each tracked item yields one RMCE/ITMCE
/// record per label.
pub fn benchmark_with_ess(
    target: &CategoricalTreeDistribution,
    chains: &[Chain],
    labelled_ess: &[(String, Vec<f64>)],
    items: &ItemSet,
    iid_seed: u64,
) -> Result<Vec<BenchmarkRecord>> {
    let m = chains.len();
    if m < 2 {
        return Err(Error::SubsetTooSmall { need: 2, got: m });
    }
    for (label, ess) in labelled_ess {
        if ess.len() != m {
            return Err(Error::InvalidArgument(alloc::format!(
                "method {label}: {} ESS values for {m} chains",
                ess.len()
            )));
        }
    }
    let mcmc = multi_chain_ses(chains, items)?;

    let mut seed_rng = ChaCha20Rng::seed_from_u64(iid_seed);
    let mut records = Vec::new();
    for (label, ess) in labelled_ess {
        let mean_ess = math::mean(ess);
        let iid_sets: Vec<Chain> = ess
            .iter()
            .map(|&e| {
                let k = math::round(e).max(1.0) as usize;
                iid_sample(target, k, seed_rng.gen())
            })
            .collect::<Result<_>>()?;
        let mcess = multi_chain_ses(&iid_sets, items)?;

        for (i, (s, p)) in items.splits.iter().enumerate() {
            records.push(BenchmarkRecord {
                method: label.clone(),
                summary_kind: SummaryKind::Split,
                item_id: s.smaller_side_id(chains[0].taxa()),
                item_prob: Some(*p),
                comparison: compare_errors(mcmc.split_ses[i], mcess.split_ses[i]),
                mean_ess,
            });
        }
        for (i, (t, p)) in items.trees.iter().enumerate() {
            records.push(BenchmarkRecord {
                method: label.clone(),
                summary_kind: SummaryKind::Tree,
                item_id: serialize_newick(t),
                item_prob: Some(*p),
                comparison: compare_errors(mcmc.tree_ses[i], mcess.tree_ses[i]),
                mean_ess,
            });
        }
        records.push(BenchmarkRecord {
            method: label.clone(),
            summary_kind: SummaryKind::Mrc,
            item_id: "mrc".to_string(),
            item_prob: None,
            comparison: compare_errors(mcmc.mrc_se, mcess.mrc_se),
            mean_ess,
        });
    }
    Ok(records)
}

/// The full five-step protocol: run m replicate chains against the target,
/// estimate every requested method's ESS per chain, and score each method's
/// ESS-equivalent iid error against the brute-force one.
pub fn run_benchmark(
    target: &CategoricalTreeDistribution,
    cfg: &BenchmarkConfig,
) -> Result<BenchmarkReport> {
    if cfg.m < 2 {
        return Err(Error::SubsetTooSmall {
            need: 2,
            got: cfg.m,
        });
    }
    let kept = (cfg.iterations / cfg.thin) as usize;
    if kept < 16 {
        return Err(Error::InvalidArgument(alloc::format!(
            "only {kept} kept samples per chain; need at least 16"
        )));
    }
    let mut seed_rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let chain_seeds: Vec<u64> = (0..cfg.m).map(|_| seed_rng.gen()).collect();
    let jump_seeds: Vec<u64> = (0..cfg.m).map(|_| seed_rng.gen()).collect();
    let iid_seed: u64 = seed_rng.gen();

    let mut chains = Vec::with_capacity(cfg.m);
    let mut chain_stats = Vec::with_capacity(cfg.m);
    let mut matrices = Vec::with_capacity(cfg.m);
    for &seed in &chain_seeds {
        let (chain, stats) = run_chain_with_stats(target, cfg.iterations, cfg.thin, seed)?;
        matrices.push(distance_matrix(&chain)?);
        chains.push(chain);
        chain_stats.push(stats);
    }

    let mut labelled_ess: Vec<(String, Vec<f64>)> = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let mut column = Vec::with_capacity(cfg.m);
        for (i, chain) in chains.iter().enumerate() {
            let jump = JumpDistanceConfig {
                alpha: cfg.jump_alpha,
                n_boot: cfg.jump_n_boot,
                seed: jump_seeds[i],
            };
            column.push(tree_ess(method, chain, &matrices[i], &jump)?.value);
        }
        labelled_ess.push((method.name().to_string(), column));
    }

    let items = select_items(&chains, cfg.split_prob_min, cfg.max_tree_items)?;
    let records = benchmark_with_ess(target, &chains, &labelled_ess, &items, iid_seed)?;
    Ok(BenchmarkReport {
        records,
        per_chain_ess: labelled_ess,
        chain_stats,
        kept_samples: kept,
        iterations: cfg.iterations,
    })
}

/// Configuration of the scalar Normal(0,1) calibration testbed.
#[derive(Debug, Clone)]
pub struct NormalCalibrationConfig {
    pub n_lengths: usize,
    pub min_length: u64,
    pub max_length: u64,
    pub kept: usize,
    pub proposal_sd: f64,
    pub m: usize,
    pub seed: u64,
}

impl Default for NormalCalibrationConfig {
    fn default() -> Self {
        NormalCalibrationConfig {
            n_lengths: 50,
            min_length: 1_000,
            max_length: 100_000,
            kept: 1_000,
            proposal_sd: 0.3,
            m: 100,
            seed: 0,
        }
    }
}

/// One chain length's result in the calibration run.
#[derive(Debug, Clone)]
pub struct CalibrationRow {
    pub chain_length: u64,
    pub thin: u64,
    pub mean_ess: f64,
    pub comparison: ErrorComparison,
}

/// The protocol applied to estimating the mean of a Normal(0,1) variable with
/// a random-walk Metropolis sampler: per chain length, m replicate chains
/// keep `kept` samples each, the AR-spectral ESS sizes the iid comparison
/// sets, and the standard errors of the mean are compared.
pub fn normal_calibration(cfg: &NormalCalibrationConfig) -> Result<Vec<CalibrationRow>> {
    if cfg.m < 2 || cfg.n_lengths == 0 || cfg.kept < 8 {
        return Err(Error::InvalidArgument(
            "calibration needs m >= 2, kept >= 8, and at least one length".into(),
        ));
    }
    if cfg.min_length > cfg.max_length {
        return Err(Error::InvalidArgument(
            "min_length must not exceed max_length".into(),
        ));
    }
    let mut seed_rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::with_capacity(cfg.n_lengths);
    for j in 0..cfg.n_lengths {
        let f = if cfg.n_lengths == 1 {
            0.0
        } else {
            j as f64 / (cfg.n_lengths - 1) as f64
        };
        let log_len = math::ln(cfg.min_length as f64)
            + f * (math::ln(cfg.max_length as f64) - math::ln(cfg.min_length as f64));
        let requested = math::round(math::exp(log_len)) as u64;
        let thin = (requested / cfg.kept as u64).max(1);
        let iterations = thin * cfg.kept as u64;

        let mut mcmc_means = Vec::with_capacity(cfg.m);
        let mut ess_values = Vec::with_capacity(cfg.m);
        let mut iid_means = Vec::with_capacity(cfg.m);
        for _ in 0..cfg.m {
            let mut rng = ChaCha20Rng::seed_from_u64(seed_rng.gen());
            let samples = normal_random_walk(&mut rng, iterations, thin, cfg.proposal_sd);
            mcmc_means.push(math::mean(&samples));
            let ess = ar_spectrum_ess(&samples)?.value;
            ess_values.push(ess);
            let k = math::round(ess).max(1.0) as usize;
            let mut iid_rng = ChaCha20Rng::seed_from_u64(seed_rng.gen());
            let draws: Vec<f64> = (0..k)
                .map(|_| iid_rng.sample(rand_distr::StandardNormal))
                .collect();
            iid_means.push(math::mean(&draws));
        }
        let se_mcmc = se_scalar(&mcmc_means)?;
        let se_mcess = se_scalar(&iid_means)?;
        rows.push(CalibrationRow {
            chain_length: iterations,
            thin,
            mean_ess: math::mean(&ess_values),
            comparison: compare_errors(se_mcmc, se_mcess),
        });
    }
    Ok(rows)
}

/// Random-walk Metropolis targeting Normal(0,1), started at stationarity,
/// keeping every thin-th state.
fn normal_random_walk(rng: &mut ChaCha20Rng, iterations: u64, thin: u64, sd: f64) -> Vec<f64> {
    let mut x: f64 = rng.sample(rand_distr::StandardNormal);
    let mut out = Vec::with_capacity((iterations / thin) as usize);
    for iter in 1..=iterations {
        let step: f64 = rng.sample(rand_distr::StandardNormal);
        let proposal = x + sd * step;
        let log_ratio = 0.5 * (x * x - proposal * proposal);
        if log_ratio >= 0.0 || rng.gen::<f64>() < math::exp(log_ratio) {
            x = proposal;
        }
        if iter % thin == 0 {
            out.push(x);
        }
    }
    out
}
