//! Shared taxon index.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Hard cap on taxon count; splits are fixed-width bitmasks per map.
pub const MAX_TAXA: usize = 4096;

/// An ordered set of taxon labels. Every `Split` and `Topology` refers to
/// taxa by their 0-based position in one of these maps, so all values being
/// compared must share a map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaxonMap {
    names: Vec<String>,
    index: BTreeMap<String, u32>,
}

impl TaxonMap {
    /// Build a map from labels in the given order. Labels must be unique and
    /// non-empty, and there must be at least three of them.
    pub fn new<I, S>(labels: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut names = Vec::new();
        let mut index = BTreeMap::new();
        for label in labels {
            let label = label.as_ref();
            if label.is_empty() {
                return Err(Error::InvalidArgument("empty taxon label".to_string()));
            }
            if index
                .insert(label.to_string(), names.len() as u32)
                .is_some()
            {
                return Err(Error::DuplicateTaxon(label.to_string()));
            }
            names.push(label.to_string());
        }
        if names.len() < 3 {
            return Err(Error::TooFewTaxa(names.len()));
        }
        if names.len() > MAX_TAXA {
            return Err(Error::InvalidArgument(alloc::format!(
                "taxon count {} exceeds the supported maximum {MAX_TAXA}",
                names.len()
            )));
        }
        Ok(Arc::new(TaxonMap { names, index }))
    }

    /// Build a map with labels in sorted order, the canonical choice when no
    /// ordering is imposed from outside.
    pub fn from_labels_sorted<I, S>(labels: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut v: Vec<String> = labels.into_iter().map(|s| s.as_ref().to_string()).collect();
        v.sort();
        Self::new(v)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Number of 64-bit words in a split mask for this map.
    pub fn words(&self) -> usize {
        self.names.len().div_ceil(64)
    }

    pub fn name(&self, idx: u32) -> &str {
        &self.names[idx as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn position(&self, label: &str) -> Option<u32> {
        self.index.get(label).copied()
    }

    /// True if `other` indexes exactly the same labels in the same order.
    pub fn same_as(&self, other: &TaxonMap) -> bool {
        core::ptr::eq(self, other) || self.names == other.names
    }
}
