//! Subcommand implementations. Each returns whether the run produced
//! degenerate statistics (escalated to a dedicated exit code under
//! `--strict`).

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::anyhow;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use tress::bench::{normal_calibration, run_benchmark, BenchmarkConfig, NormalCalibrationConfig};
use tress::bootstrap::{block_bootstrap_trace, default_subsample_sizes, BootstrapKind};
use tress::chain::Chain;
use tress::ci::compare_chains_with_ess;
use tress::dist::distance_matrix;
use tress::fake::run_chain_with_stats;
use tress::summary::{split_probabilities, tree_probabilities};
use tress::taxa::TaxonMap;
use tress::tree_ess::{tree_ess, JumpDistanceConfig, TreeEssMethod};

use crate::cli::{BenchmarkArgs, BootstrapArgs, CompareArgs, EssArgs, SimulateArgs};
use crate::io::{
    read_log_file, read_target_file, read_tree_file, write_log_file, write_tree_file, LoadOptions,
};
use crate::report;

/// Errors are split by exit code: 1 for bad invocations, 2 for data problems.
pub enum CmdError {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for CmdError {
    fn from(e: anyhow::Error) -> Self {
        CmdError::Data(e)
    }
}

impl From<tress::Error> for CmdError {
    fn from(e: tress::Error) -> Self {
        CmdError::Data(anyhow::Error::new(e))
    }
}

pub type CmdResult = Result<bool, CmdError>;

fn usage(msg: impl Into<String>) -> CmdError {
    CmdError::Usage(msg.into())
}

fn parse_methods(names: &[String]) -> Result<Vec<TreeEssMethod>, CmdError> {
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        let m: TreeEssMethod = name
            .parse()
            .map_err(|e: tress::Error| usage(e.to_string()))?;
        out.push(m);
    }
    if out.is_empty() {
        return Err(usage("no ESS methods requested"));
    }
    Ok(out)
}

fn load_chains(
    trees: &[PathBuf],
    log_files: &[PathBuf],
    log_column: &str,
    opts: LoadOptions,
) -> Result<Vec<Chain>, CmdError> {
    if !log_files.is_empty() && log_files.len() != trees.len() {
        return Err(usage(format!(
            "{} tree files but {} log files",
            trees.len(),
            log_files.len()
        )));
    }
    let mut chains = Vec::with_capacity(trees.len());
    let mut map: Option<Arc<TaxonMap>> = None;
    for (i, path) in trees.iter().enumerate() {
        let ld = if log_files.is_empty() {
            None
        } else {
            Some(read_log_file(&log_files[i], log_column)?)
        };
        let chain = read_tree_file(path, map.as_ref(), ld, opts)?;
        if map.is_none() {
            map = Some(chain.taxa().clone());
        }
        chains.push(chain);
    }
    Ok(chains)
}

fn derived_seeds(master: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha20Rng::seed_from_u64(master);
    (0..count).map(|_| rng.gen()).collect()
}

const DEGENERATE_NOTE: &str =
    "warning: degenerate statistics (a chain or target carries a single topology)";

pub fn cmd_ess(args: &EssArgs) -> CmdResult {
    let methods = parse_methods(&args.methods)?;
    if methods.iter().any(|m| m.needs_log_density()) && args.log_files.is_empty() {
        return Err(usage("logPosterior requires --log-files"));
    }
    let randomized = methods.iter().any(|m| m.is_randomized());
    if randomized && args.seed.is_none() {
        return Err(usage("jump-distance methods require an explicit --seed"));
    }
    let opts = LoadOptions {
        burnin: args.burnin,
        thin: args.thin,
    };
    let chains = load_chains(&args.trees, &args.log_files, &args.log_column, opts)?;
    let jump_seeds = derived_seeds(args.seed.unwrap_or(0), chains.len());

    let mut degenerate = false;
    let mut rows = Vec::with_capacity(chains.len());
    for (i, chain) in chains.iter().enumerate() {
        let d = distance_matrix(chain)?;
        if d.is_zero() {
            degenerate = true;
        }
        if let Some(prefix) = &args.dump_matrix {
            let path = matrix_path(prefix, i);
            report::write_matrix(&path, &d)?;
        }
        let jump = JumpDistanceConfig {
            alpha: args.jump_alpha,
            n_boot: args.jump_boot,
            seed: jump_seeds[i],
        };
        let mut row = Vec::with_capacity(methods.len());
        for &m in &methods {
            row.push(tree_ess(m, chain, &d, &jump)?.value);
        }
        rows.push(row);
    }

    let names: Vec<String> = args.trees.iter().map(|p| p.display().to_string()).collect();
    let method_names: Vec<String> = methods.iter().map(|m| m.name().to_string()).collect();
    report::write_ess_table(&args.out, &names, &method_names, &rows)?;

    if args.split_summary.is_some() || args.tree_summary.is_some() {
        let pooled = pool(&chains)?;
        if let Some(path) = &args.split_summary {
            report::write_split_summary(path, &split_probabilities(&pooled)?)?;
        }
        if let Some(path) = &args.tree_summary {
            report::write_tree_summary(path, &tree_probabilities(&pooled)?)?;
        }
    }
    if degenerate {
        eprintln!("{DEGENERATE_NOTE}");
    }
    Ok(degenerate)
}

fn matrix_path(prefix: &Path, index: usize) -> PathBuf {
    let mut name = prefix.as_os_str().to_os_string();
    name.push(format!("{index}.tsv"));
    PathBuf::from(name)
}

fn pool(chains: &[Chain]) -> Result<Chain, CmdError> {
    let taxa = chains[0].taxa().clone();
    let mut samples = Vec::new();
    for c in chains {
        samples.extend_from_slice(c.samples());
    }
    Ok(Chain::new(taxa, samples, None)?)
}

pub fn cmd_compare(args: &CompareArgs) -> CmdResult {
    let method: TreeEssMethod = args
        .method
        .parse()
        .map_err(|e: tress::Error| usage(e.to_string()))?;
    if args.trees.len() < 2 {
        return Err(usage("compare needs at least two tree files"));
    }
    if method.needs_log_density() && args.log_files.is_empty() {
        return Err(usage("logPosterior requires --log-files"));
    }
    if method.is_randomized() && args.seed.is_none() {
        return Err(usage("jump-distance methods require an explicit --seed"));
    }
    let opts = LoadOptions {
        burnin: args.burnin,
        thin: args.thin,
    };
    let chains = load_chains(&args.trees, &args.log_files, &args.log_column, opts)?;
    let jump_seeds = derived_seeds(args.seed.unwrap_or(0), chains.len());

    let mut ess = Vec::with_capacity(chains.len());
    let mut degenerate = false;
    for (i, chain) in chains.iter().enumerate() {
        let d = distance_matrix(chain)?;
        if d.is_zero() {
            degenerate = true;
        }
        let jump = JumpDistanceConfig {
            alpha: args.jump_alpha,
            n_boot: args.jump_boot,
            seed: jump_seeds[i],
        };
        ess.push(tree_ess(method, chain, &d, &jump)?.value);
    }
    let report = compare_chains_with_ess(&chains, &ess, args.level, args.asdsf_min_freq)?;
    report::write_compare_rows(&args.out, &report, &chains)?;
    let pairs_out = args
        .pairs_out
        .clone()
        .unwrap_or_else(|| default_pairs_path(&args.out));
    report::write_compare_pairs(&pairs_out, &report)?;
    if degenerate {
        eprintln!("{DEGENERATE_NOTE}");
    }
    Ok(degenerate)
}

fn default_pairs_path(out: &Path) -> PathBuf {
    match out.extension() {
        Some(ext) => out.with_extension(format!("pairs.{}", ext.to_string_lossy())),
        None => out.with_extension("pairs"),
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> CmdResult {
    let target = read_target_file(&args.target, args.hpd_mass, args.max_support)?;
    if args.chains == 0 {
        return Err(usage("need at least one chain"));
    }
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CmdError::Data(anyhow!("creating {}: {e}", args.out_dir.display())))?;
    let seeds = derived_seeds(args.seed, args.chains);
    let mut stats = Vec::with_capacity(args.chains);
    for (i, &seed) in seeds.iter().enumerate() {
        let (chain, s) = run_chain_with_stats(&target, args.iterations, args.thin, seed)?;
        let name = format!("chain_{i:02}");
        write_tree_file(&args.out_dir.join(format!("{name}.trees")), &chain)?;
        write_log_file(&args.out_dir.join(format!("{name}.log")), &chain, args.thin)?;
        stats.push((name, s));
    }
    report::write_sim_stats(&args.out_dir.join("stats.tsv"), &stats)?;
    let degenerate = target.len() == 1;
    if degenerate {
        eprintln!("{DEGENERATE_NOTE}");
    }
    Ok(degenerate)
}

pub fn cmd_benchmark(args: &BenchmarkArgs) -> CmdResult {
    if args.normal_calibration {
        let cfg = NormalCalibrationConfig {
            n_lengths: args.n_lengths,
            min_length: args.min_length,
            max_length: args.max_length,
            kept: args.kept,
            proposal_sd: args.proposal_sd,
            m: args.m,
            seed: args.seed,
        };
        let rows = normal_calibration(&cfg)?;
        report::write_calibration(&args.out, &rows)?;
        return Ok(false);
    }

    let target_path = args
        .target
        .as_ref()
        .ok_or_else(|| usage("--target is required unless --normal-calibration"))?;
    let iterations = args
        .iterations
        .ok_or_else(|| usage("--iterations is required"))?;
    let methods = parse_methods(&args.methods)?;
    let target = read_target_file(target_path, args.hpd_mass, args.max_support)?;
    let mut cfg = BenchmarkConfig::new(args.m, iterations, args.thin, methods, args.seed);
    cfg.split_prob_min = args.split_prob_min;
    cfg.max_tree_items = args.max_tree_items;
    cfg.jump_alpha = args.jump_alpha;
    cfg.jump_n_boot = args.jump_boot;
    let report_data = run_benchmark(&target, &cfg)?;
    report::write_benchmark_report(&args.out, &report_data)?;
    let degenerate = report_data.degenerate_count() > 0;
    if degenerate {
        eprintln!(
            "warning: {} of {} records degenerate (zero standard error on both sides)",
            report_data.degenerate_count(),
            report_data.records.len()
        );
    }
    Ok(degenerate)
}

pub fn cmd_bootstrap(args: &BootstrapArgs) -> CmdResult {
    let kind: BootstrapKind = args
        .kind
        .parse()
        .map_err(|e: tress::Error| usage(e.to_string()))?;
    let opts = LoadOptions {
        burnin: args.burnin,
        thin: args.thin,
    };
    let chain = read_tree_file(&args.trees, None, None, opts)?;
    let sizes = match &args.sizes {
        Some(s) => s.clone(),
        None => default_subsample_sizes(chain.len()),
    };
    let rows = block_bootstrap_trace(
        &chain,
        &sizes,
        args.replicates,
        kind,
        &args.thresholds,
        args.seed,
    )?;
    report::write_bootstrap_trace(&args.out, &rows)?;
    let degenerate = distance_matrix(&chain)?.is_zero();
    if degenerate {
        eprintln!("{DEGENERATE_NOTE}");
    }
    Ok(degenerate)
}
