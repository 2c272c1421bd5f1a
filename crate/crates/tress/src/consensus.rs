//! Majority-rule consensus trees.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::taxa::TaxonMap;
use crate::topology::{Split, Topology};

/// Build the consensus topology containing exactly the splits whose
/// probability strictly exceeds `threshold`. Any threshold of at least 0.5
/// guarantees the retained splits are pairwise compatible; smaller thresholds
/// are rejected. A split at exactly the threshold is excluded.
pub fn mrc_tree(
    split_probs: &BTreeMap<Split, f64>,
    taxa: &Arc<TaxonMap>,
    threshold: f64,
) -> Result<Topology> {
    if !(0.5..=1.0).contains(&threshold) {
        return Err(Error::InvalidThreshold(threshold));
    }
    for &p in split_probs.values() {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(alloc::format!(
                "split probability {p} outside [0, 1]"
            )));
        }
    }
    let retained: Vec<Split> = split_probs
        .iter()
        .filter(|(_, &p)| p > threshold)
        .map(|(s, _)| s.clone())
        .collect();
    Topology::new(taxa.clone(), retained)
}
