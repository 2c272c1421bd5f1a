//! Deterministic TSV writers for every command's output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use tress::bench::{BenchmarkReport, CalibrationRow};
use tress::bootstrap::TraceRow;
use tress::chain::Chain;
use tress::ci::SplitComparisonReport;
use tress::dist::DistanceMatrix;
use tress::newick::serialize_newick;
use tress::summary::{SplitProbabilities, TreeProbabilities};

fn opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => "NA".to_string(),
    }
}

fn write_out(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

/// chain-by-method ESS table.
pub fn write_ess_table(
    path: &Path,
    chain_names: &[String],
    methods: &[String],
    values: &[Vec<f64>],
) -> Result<()> {
    let mut out = String::from("chain");
    for m in methods {
        write!(out, "\t{m}").unwrap();
    }
    out.push('\n');
    for (name, row) in chain_names.iter().zip(values) {
        write!(out, "{name}").unwrap();
        for v in row {
            write!(out, "\t{v}").unwrap();
        }
        out.push('\n');
    }
    write_out(path, &out)
}

/// Per-split comparison rows for every chain pair.
pub fn write_compare_rows(
    path: &Path,
    report: &SplitComparisonReport,
    chains: &[Chain],
) -> Result<()> {
    let taxa = chains[0].taxa();
    let mut out = String::from(
        "chain_i\tchain_j\tsplit_id\tp_i\tp_j\tlo_i\thi_i\tlo_j\thi_j\tdiff_lo\tdiff_hi\tflag\n",
    );
    for row in &report.rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            row.chain_i,
            row.chain_j,
            row.split.smaller_side_id(taxa),
            row.p_i,
            row.p_j,
            row.ci_i.0,
            row.ci_i.1,
            row.ci_j.0,
            row.ci_j.1,
            row.diff_ci.0,
            row.diff_ci.1,
            if row.pass { "pass" } else { "fail" },
        )
        .unwrap();
    }
    write_out(path, &out)
}

/// Per-pair summary block: ASDSF, MSDSF, and the distinctly-different count.
pub fn write_compare_pairs(path: &Path, report: &SplitComparisonReport) -> Result<()> {
    let mut out = String::from("chain_i\tchain_j\tasdsf\tmsdsf\tn_fail\n");
    for pair in &report.pairs {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            pair.chain_i, pair.chain_j, pair.asdsf, pair.msdsf, pair.n_fail
        )
        .unwrap();
    }
    write_out(path, &out)
}

/// The benchmark report, one row per (method, summary kind, item).
pub fn write_benchmark_report(path: &Path, report: &BenchmarkReport) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# kept_samples={}", report.kept_samples).unwrap();
    writeln!(out, "# iterations={}", report.iterations).unwrap();
    writeln!(
        out,
        "# note: fixedN rows always carry mean_ess = kept_samples; group them by iterations instead"
    )
    .unwrap();
    out.push_str(
        "method\tsummary_kind\titem_id\titem_prob\tse_mcmc\tse_mcess\trmce\titmce\tmean_ess\n",
    );
    for r in &report.records {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.method,
            r.summary_kind.name(),
            r.item_id,
            opt(r.item_prob),
            r.comparison.se_mcmc,
            r.comparison.se_mcess,
            opt(r.comparison.rmce),
            opt(r.comparison.itmce),
            r.mean_ess,
        )
        .unwrap();
    }
    write_out(path, &out)
}

/// The Normal(0,1) calibration table.
pub fn write_calibration(path: &Path, rows: &[CalibrationRow]) -> Result<()> {
    let mut out = String::from("chain_length\tthin\tmean_ess\tse_mcmc\tse_mcess\trmce\titmce\n");
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.chain_length,
            r.thin,
            r.mean_ess,
            r.comparison.se_mcmc,
            r.comparison.se_mcess,
            opt(r.comparison.rmce),
            opt(r.comparison.itmce),
        )
        .unwrap();
    }
    write_out(path, &out)
}

/// The block-bootstrap convergence trace.
pub fn write_bootstrap_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut out = String::from("n_i\tprefix_split_frequency_ess\tkind\tthreshold\tq05\tq50\tq95\n");
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.n_i,
            opt(r.prefix_split_frequency_ess),
            r.kind.name(),
            r.threshold.map(|t| format!("{t}")).unwrap_or_default(),
            r.q05,
            r.q50,
            r.q95,
        )
        .unwrap();
    }
    write_out(path, &out)
}

/// Pooled split summary: split_id, probability, count.
pub fn write_split_summary(path: &Path, probs: &SplitProbabilities) -> Result<()> {
    let mut out = String::from("split_id\tprobability\tcount\n");
    for (s, p) in &probs.probs {
        writeln!(
            out,
            "{}\t{}\t{}",
            s.smaller_side_id(&probs.taxa),
            p,
            probs.counts[s]
        )
        .unwrap();
    }
    write_out(path, &out)
}

/// Pooled topology summary keyed by Newick string.
pub fn write_tree_summary(path: &Path, probs: &TreeProbabilities) -> Result<()> {
    let mut out = String::from("newick\tprobability\tcount\n");
    for (t, p) in &probs.probs {
        writeln!(out, "{}\t{}\t{}", serialize_newick(t), p, probs.counts[t]).unwrap();
    }
    write_out(path, &out)
}

/// Full symmetric distance matrix dump for debugging.
pub fn write_matrix(path: &Path, d: &DistanceMatrix) -> Result<()> {
    let mut out = String::new();
    for i in 0..d.n() {
        for j in 0..d.n() {
            if j > 0 {
                out.push('\t');
            }
            write!(out, "{}", d.get(i, j)).unwrap();
        }
        out.push('\n');
    }
    write_out(path, &out)
}

/// Per-chain sampler statistics for simulated runs.
pub fn write_sim_stats(path: &Path, stats: &[(String, tress::fake::McmcStats)]) -> Result<()> {
    let mut out =
        String::from("chain\titerations\tproposals_in_support\taccepted\tacceptance_rate\n");
    for (name, s) in stats {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            name,
            s.iterations,
            s.proposals_in_support,
            s.accepted,
            s.acceptance_rate(),
        )
        .unwrap();
    }
    write_out(path, &out)
}
