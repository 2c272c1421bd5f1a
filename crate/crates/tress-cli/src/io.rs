//! File formats: Newick-per-line tree files, TSV log traces, and TSV target
//! distributions.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};

use tress::chain::Chain;
use tress::fake::{build_target, CategoricalTreeDistribution, TargetConfig};
use tress::newick::{parse_newick, serialize_newick};
use tress::taxa::TaxonMap;
use tress::topology::Topology;

/// Burn-in and thinning applied to user-supplied chains at load time.
#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    pub burnin: usize,
    pub thin: usize,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { burnin: 0, thin: 1 }
    }
}

fn tree_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

/// Read one tree file: UTF-8, one Newick string per line, blank lines and
/// `#` comments ignored. The first tree fixes the taxon map (sorted labels)
/// unless one is supplied; later trees must match it.
pub fn read_tree_file(
    path: &Path,
    taxa: Option<&Arc<TaxonMap>>,
    log_density: Option<Vec<f64>>,
    opts: LoadOptions,
) -> Result<Chain> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading tree file {}", path.display()))?;
    let lines = tree_lines(&text);
    if lines.is_empty() {
        bail!("{}: no trees found", path.display());
    }
    if let Some(ld) = &log_density {
        if ld.len() != lines.len() {
            bail!(
                "{}: log file has {} rows but the tree file has {} trees",
                path.display(),
                ld.len(),
                lines.len()
            );
        }
    }
    if opts.thin == 0 {
        bail!("thinning interval must be at least 1");
    }
    if opts.burnin >= lines.len() {
        bail!(
            "{}: burn-in {} leaves no samples (file has {})",
            path.display(),
            opts.burnin,
            lines.len()
        );
    }

    let mut samples = Vec::new();
    let mut kept_ld = log_density.as_ref().map(|_| Vec::new());
    let mut map: Option<Arc<TaxonMap>> = taxa.cloned();
    for (kept_idx, (line_no, line)) in lines
        .iter()
        .skip(opts.burnin)
        .step_by(opts.thin)
        .enumerate()
    {
        let t = parse_newick(line, map.as_ref())
            .with_context(|| format!("{}:{line_no}", path.display()))?;
        if map.is_none() {
            map = Some(t.taxa().clone());
        }
        samples.push(t);
        if let (Some(out), Some(ld)) = (&mut kept_ld, &log_density) {
            out.push(ld[opts.burnin + kept_idx * opts.thin]);
        }
    }
    let map = map.expect("at least one tree parsed");
    Ok(Chain::new(map, samples, kept_ld)?)
}

/// Read the log-density column from a TSV trace with a header row.
pub fn read_log_file(path: &Path, column: &str) -> Result<Vec<f64>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading log file {}", path.display()))?;
    let mut rows = text
        .lines()
        .map(str::trim_end)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = rows
        .next()
        .ok_or_else(|| anyhow!("{}: empty log file", path.display()))?;
    let col = header
        .split('\t')
        .position(|h| h == column)
        .ok_or_else(|| {
            anyhow!(
                "{}: no column named {column:?} in header {header:?}",
                path.display()
            )
        })?;
    let mut out = Vec::new();
    for (i, row) in rows.enumerate() {
        let field = row
            .split('\t')
            .nth(col)
            .ok_or_else(|| anyhow!("{}: row {} has no column {col}", path.display(), i + 2))?;
        let value: f64 = field
            .parse()
            .with_context(|| format!("{}: row {}: bad value {field:?}", path.display(), i + 2))?;
        out.push(value);
    }
    Ok(out)
}

/// Load a categorical tree target from TSV columns `newick` and
/// `probability`. Probabilities must sum to 1 within 1e-6 and are
/// renormalized; the NNI connectivity filter still applies.
pub fn read_target_file(
    path: &Path,
    hpd_mass: f64,
    max_support: usize,
) -> Result<CategoricalTreeDistribution> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading target file {}", path.display()))?;
    let mut rows = text
        .lines()
        .map(str::trim_end)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = rows
        .next()
        .ok_or_else(|| anyhow!("{}: empty target file", path.display()))?;
    let cols: Vec<&str> = header.split('\t').collect();
    let newick_col = cols
        .iter()
        .position(|&h| h == "newick")
        .ok_or_else(|| anyhow!("{}: missing 'newick' column", path.display()))?;
    let prob_col = cols
        .iter()
        .position(|&h| h == "probability")
        .ok_or_else(|| anyhow!("{}: missing 'probability' column", path.display()))?;

    let mut entries: Vec<(Topology, f64)> = Vec::new();
    let mut map: Option<Arc<TaxonMap>> = None;
    let mut total = 0.0;
    for (i, row) in rows.enumerate() {
        let fields: Vec<&str> = row.split('\t').collect();
        let line = i + 2;
        let newick = fields
            .get(newick_col)
            .ok_or_else(|| anyhow!("{}: row {line} missing newick", path.display()))?;
        let prob: f64 = fields
            .get(prob_col)
            .ok_or_else(|| anyhow!("{}: row {line} missing probability", path.display()))?
            .parse()
            .with_context(|| format!("{}: row {line}: bad probability", path.display()))?;
        let t = parse_newick(newick, map.as_ref())
            .with_context(|| format!("{}: row {line}", path.display()))?;
        if map.is_none() {
            map = Some(t.taxa().clone());
        }
        total += prob;
        entries.push((t, prob));
    }
    if entries.is_empty() {
        bail!("{}: no target rows", path.display());
    }
    if (total - 1.0).abs() > 1e-6 {
        bail!(
            "{}: probabilities sum to {total}, expected 1 within 1e-6",
            path.display()
        );
    }
    let cfg = TargetConfig {
        hpd_mass,
        max_support,
    };
    Ok(build_target(&entries, &cfg)?)
}

/// Write a target distribution in the TSV interchange format.
pub fn write_target_file(path: &Path, target: &CategoricalTreeDistribution) -> Result<()> {
    let mut out = String::from("newick\tprobability\n");
    for (t, p) in target.support().iter().zip(target.probs()) {
        out.push_str(&serialize_newick(t));
        out.push('\t');
        out.push_str(&format!("{p}"));
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Write one chain as a Newick-per-line tree file.
pub fn write_tree_file(path: &Path, chain: &Chain) -> Result<()> {
    let mut out = String::new();
    for t in chain.samples() {
        out.push_str(&serialize_newick(t));
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Write a chain's log-density trace as a TSV with `state` and `lnP` columns;
/// row i aligns with tree line i.
pub fn write_log_file(path: &Path, chain: &Chain, thin: u64) -> Result<()> {
    let ld = chain
        .log_density()
        .ok_or_else(|| anyhow!("chain has no log-density trace"))?;
    let mut out = String::from("state\tlnP\n");
    for (i, v) in ld.iter().enumerate() {
        out.push_str(&format!("{}\t{v}\n", (i as u64 + 1) * thin));
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
