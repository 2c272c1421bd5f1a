//! Splits (bipartitions of the taxon set) and topologies (canonical split
//! sets of unrooted trees).

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::taxa::TaxonMap;

/// One bipartition of the taxon set, stored canonically as the side that does
/// not contain taxon 0. Complementing a bipartition therefore yields the same
/// `Split` value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Split {
    bits: SmallVec<[u64; 1]>,
}

fn universe_last_word_mask(n_taxa: usize) -> u64 {
    let rem = n_taxa % 64;
    if rem == 0 {
        u64::MAX
    } else {
        (1u64 << rem) - 1
    }
}

impl Split {
    /// Canonicalize an arbitrary mask over `n_taxa` bits: bits beyond the
    /// taxon count are cleared and the side containing taxon 0 is flipped
    /// away.
    pub fn from_mask(mut bits: SmallVec<[u64; 1]>, n_taxa: usize) -> Self {
        let words = n_taxa.div_ceil(64);
        bits.resize(words, 0);
        if let Some(last) = bits.last_mut() {
            *last &= universe_last_word_mask(n_taxa);
        }
        if bits[0] & 1 != 0 {
            for (w, b) in bits.iter_mut().enumerate() {
                *b = !*b;
                if w == words - 1 {
                    *b &= universe_last_word_mask(n_taxa);
                }
            }
        }
        Split { bits }
    }

    /// The split separating `members` from the rest of the taxon set.
    pub fn from_members(members: &[u32], n_taxa: usize) -> Self {
        let words = n_taxa.div_ceil(64);
        let mut bits: SmallVec<[u64; 1]> = SmallVec::new();
        bits.resize(words, 0);
        for &m in members {
            debug_assert!((m as usize) < n_taxa);
            bits[m as usize / 64] |= 1u64 << (m % 64);
        }
        Self::from_mask(bits, n_taxa)
    }

    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    pub fn contains(&self, taxon: u32) -> bool {
        self.bits[taxon as usize / 64] & (1u64 << (taxon % 64)) != 0
    }

    /// Size of the stored (taxon-0-free) side.
    pub fn popcount(&self) -> u32 {
        self.bits.iter().map(|w| w.count_ones()).sum()
    }

    /// Non-trivial means both sides have at least two taxa.
    pub fn is_nontrivial(&self, n_taxa: usize) -> bool {
        let k = self.popcount() as usize;
        k >= 2 && n_taxa - k >= 2
    }

    /// True if the stored side of `self` is a subset of the stored side of
    /// `other`.
    pub fn subset_of(&self, other: &Split) -> bool {
        self.bits
            .iter()
            .zip(other.bits.iter())
            .all(|(a, b)| a & !b == 0)
    }

    /// Four-intersection compatibility test: two bipartitions are compatible
    /// (can coexist in one tree) iff at least one of A∩B, A∩Bᶜ, Aᶜ∩B, Aᶜ∩Bᶜ
    /// is empty.
    pub fn compatible_with(&self, other: &Split, n_taxa: usize) -> bool {
        let words = self.bits.len();
        let last_mask = universe_last_word_mask(n_taxa);
        let mut any_ab = false;
        let mut any_a_not_b = false;
        let mut any_b_not_a = false;
        let mut any_neither = false;
        for w in 0..words {
            let a = self.bits[w];
            let b = other.bits[w];
            let universe = if w == words - 1 { last_mask } else { u64::MAX };
            any_ab |= a & b != 0;
            any_a_not_b |= a & !b != 0;
            any_b_not_a |= b & !a != 0;
            any_neither |= !a & !b & universe != 0;
        }
        !(any_ab && any_a_not_b && any_b_not_a && any_neither)
    }

    /// Taxon indices of the stored side, ascending.
    pub fn members(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.popcount() as usize);
        for (w, &word) in self.bits.iter().enumerate() {
            let mut word = word;
            while word != 0 {
                let bit = word.trailing_zeros();
                out.push(w as u32 * 64 + bit);
                word &= word - 1;
            }
        }
        out
    }

    /// Smallest taxon index on the stored side.
    pub fn min_member(&self) -> u32 {
        for (w, &word) in self.bits.iter().enumerate() {
            if word != 0 {
                return w as u32 * 64 + word.trailing_zeros();
            }
        }
        unreachable!("split has an empty side")
    }

    /// Semicolon-joined labels of the smaller side (ties keep the stored
    /// side), used as a stable item identifier in reports.
    pub fn smaller_side_id(&self, taxa: &TaxonMap) -> String {
        let n = taxa.len();
        let k = self.popcount() as usize;
        let members = if 2 * k <= n {
            self.members()
        } else {
            let mut v: Vec<u32> = (0..n as u32).filter(|&t| !self.contains(t)).collect();
            v.sort_unstable();
            v
        };
        let mut out = String::new();
        for (i, m) in members.iter().enumerate() {
            if i > 0 {
                out.push(';');
            }
            out.push_str(taxa.name(*m));
        }
        out
    }
}

/// An unrooted tree topology: a taxon map plus a sorted set of pairwise
/// compatible non-trivial splits. Topology equality is split-set equality;
/// callers are responsible for only comparing topologies that share a map.
#[derive(Debug, Clone)]
pub struct Topology {
    taxa: Arc<TaxonMap>,
    splits: Arc<[Split]>,
}

impl PartialEq for Topology {
    fn eq(&self, other: &Self) -> bool {
        self.splits == other.splits
    }
}

impl Eq for Topology {}

impl PartialOrd for Topology {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Topology {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.splits.cmp(&other.splits)
    }
}

impl core::hash::Hash for Topology {
    fn hash<H: core::hash::Hasher>(&self, state: &mut H) {
        self.splits.hash(state);
    }
}

impl Topology {
    /// Build a topology from splits, validating canonical form, non-triviality,
    /// pairwise compatibility, and the resolution bound.
    pub fn new(taxa: Arc<TaxonMap>, mut splits: Vec<Split>) -> Result<Self> {
        let n = taxa.len();
        splits.sort_unstable();
        splits.dedup();
        for s in &splits {
            if s.words().len() != taxa.words() {
                return Err(Error::InvalidArgument(alloc::format!(
                    "split width {} does not match taxon map ({} words)",
                    s.words().len(),
                    taxa.words()
                )));
            }
            if s.contains(0) {
                return Err(Error::InvalidArgument(
                    "split is not canonical (contains taxon 0)".into(),
                ));
            }
            if !s.is_nontrivial(n) {
                return Err(Error::InvalidArgument("trivial split in topology".into()));
            }
        }
        for i in 0..splits.len() {
            for j in i + 1..splits.len() {
                if !splits[i].compatible_with(&splits[j], n) {
                    return Err(Error::InvalidArgument("incompatible splits".into()));
                }
            }
        }
        if splits.len() > n - 3 {
            return Err(Error::InvalidArgument(alloc::format!(
                "{} splits exceed the resolution bound {} for {n} taxa",
                splits.len(),
                n - 3
            )));
        }
        Ok(Topology {
            taxa,
            splits: splits.into(),
        })
    }

    /// The star topology (no internal edges).
    pub fn star(taxa: Arc<TaxonMap>) -> Self {
        Topology {
            taxa,
            splits: Vec::new().into(),
        }
    }

    pub fn taxa(&self) -> &Arc<TaxonMap> {
        &self.taxa
    }

    pub fn n_taxa(&self) -> usize {
        self.taxa.len()
    }

    pub fn splits(&self) -> &[Split] {
        &self.splits
    }

    /// Fully resolved topologies have exactly n - 3 non-trivial splits.
    pub fn is_binary(&self) -> bool {
        self.splits.len() == self.n_taxa() - 3
    }

    pub fn has_split(&self, s: &Split) -> bool {
        self.splits.binary_search(s).is_ok()
    }

    pub fn same_taxa(&self, other: &Topology) -> bool {
        Arc::ptr_eq(&self.taxa, &other.taxa) || self.taxa.same_as(&other.taxa)
    }

    /// The rooted clade structure seen from taxon 0's pendant edge. Shared by
    /// the serializer and the NNI enumeration.
    pub(crate) fn clade_structure(&self) -> CladeStructure {
        let k = self.splits.len();
        // order splits by ascending popcount so parents come after children
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_unstable_by_key(|&i| (self.splits[i].popcount(), i));
        let by_size = order;

        let mut parent_of_split: Vec<Option<usize>> = alloc::vec![None; k];
        for (pos, &i) in by_size.iter().enumerate() {
            for &j in by_size[pos + 1..].iter() {
                if self.splits[i].popcount() < self.splits[j].popcount()
                    && self.splits[i].subset_of(&self.splits[j])
                {
                    parent_of_split[i] = Some(j);
                    break;
                }
            }
        }

        let n = self.n_taxa();
        let mut children: Vec<Vec<CladeItem>> = alloc::vec![Vec::new(); k];
        let mut root: Vec<CladeItem> = alloc::vec![CladeItem::Leaf(0)];
        for t in 1..n as u32 {
            // smallest split containing the leaf
            let mut best: Option<usize> = None;
            for &i in &by_size {
                if self.splits[i].contains(t) {
                    best = Some(i);
                    break;
                }
            }
            match best {
                Some(i) => children[i].push(CladeItem::Clade(usize::MAX)), // placeholder
                None => root.push(CladeItem::Leaf(t)),
            }
            if let Some(i) = best {
                *children[i].last_mut().unwrap() = CladeItem::Leaf(t);
            }
        }
        for (i, parent) in parent_of_split.iter().enumerate() {
            match parent {
                Some(p) => children[*p].push(CladeItem::Clade(i)),
                None => root.push(CladeItem::Clade(i)),
            }
        }
        let min_key = |item: &CladeItem| match *item {
            CladeItem::Leaf(t) => t,
            CladeItem::Clade(i) => self.splits[i].min_member(),
        };
        root.sort_by_key(min_key);
        for ch in &mut children {
            ch.sort_by_key(min_key);
        }
        CladeStructure { root, children }
    }
}

/// Child item of a clade node: either a leaf taxon or a nested split (by index
/// into the topology's split list).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CladeItem {
    Leaf(u32),
    Clade(usize),
}

/// The topology rooted at the internal vertex adjacent to taxon 0: that
/// vertex's items are `root`, and `children[i]` are the items directly inside
/// split `i`.
pub(crate) struct CladeStructure {
    pub root: Vec<CladeItem>,
    pub children: Vec<Vec<CladeItem>>,
}
