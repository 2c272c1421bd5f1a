//! Known-target simulated phylogenetic MCMC: categorical distributions over
//! binary topologies with NNI adjacency, a Metropolis sampler over them, and
//! iid draws from the same target.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use smallvec::SmallVec;

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::math;
use crate::taxa::TaxonMap;
use crate::topology::{CladeItem, Split, Topology};

/// All topologies one nearest-neighbor interchange away from a binary
/// topology: for each internal edge, the two alternative exchanges of
/// subtrees across it. Exactly 2(n_taxa - 3) distinct neighbors, never
/// including the input itself.
pub fn nni_neighbors(t: &Topology) -> Result<Vec<Topology>> {
    if !t.is_binary() {
        return Err(Error::NotBinary);
    }
    let n = t.n_taxa();
    let structure = t.clade_structure();
    let words = t.taxa().words();

    let item_mask = |item: CladeItem| -> SmallVec<[u64; 1]> {
        match item {
            CladeItem::Leaf(taxon) => {
                let mut bits: SmallVec<[u64; 1]> = SmallVec::new();
                bits.resize(words, 0);
                bits[taxon as usize / 64] |= 1u64 << (taxon % 64);
                bits
            }
            CladeItem::Clade(j) => SmallVec::from_slice(t.splits()[j].words()),
        }
    };

    // the subtree on the taxon-0 side of each split's edge, excluding the
    // taxon-0 direction itself
    let mut sibling: Vec<Option<CladeItem>> = alloc::vec![None; t.splits().len()];
    let non_zero_root: Vec<CladeItem> = structure
        .root
        .iter()
        .copied()
        .filter(|it| !matches!(it, CladeItem::Leaf(0)))
        .collect();
    debug_assert_eq!(
        non_zero_root.len(),
        2,
        "binary root has taxon 0 plus two items"
    );
    for (pos, item) in non_zero_root.iter().enumerate() {
        if let CladeItem::Clade(i) = item {
            sibling[*i] = Some(non_zero_root[1 - pos]);
        }
    }
    for children in structure.children.iter() {
        debug_assert_eq!(children.len(), 2, "binary clades have two children");
        for (pos, child) in children.iter().enumerate() {
            if let CladeItem::Clade(i) = child {
                sibling[*i] = Some(children[1 - pos]);
            }
        }
    }

    let mut out = Vec::with_capacity(2 * (n - 3));
    for (i, _) in t.splits().iter().enumerate() {
        let children = &structure.children[i];
        let sib = sibling[i].expect("every split has a sibling subtree");
        let sib_mask = item_mask(sib);
        for child in children {
            let mut union = item_mask(*child);
            for (w, s) in union.iter_mut().zip(sib_mask.iter()) {
                *w |= s;
            }
            let new_split = Split::from_mask(union, n);
            let mut splits: Vec<Split> = t
                .splits()
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, s)| s.clone())
                .collect();
            splits.push(new_split);
            let neighbor = Topology::new(t.taxa().clone(), splits)
                .expect("an NNI exchange yields a valid binary topology");
            debug_assert!(neighbor.is_binary());
            debug_assert_ne!(&neighbor, t);
            out.push(neighbor);
        }
    }
    Ok(out)
}

/// Counters from one simulated MCMC run. Proposals that fall outside the
/// supported neighbor set count as rejected iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McmcStats {
    pub iterations: u64,
    pub proposals_in_support: u64,
    pub accepted: u64,
}

impl McmcStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.iterations == 0 {
            0.0
        } else {
            self.accepted as f64 / self.iterations as f64
        }
    }
}

/// A finite distribution over binary topologies with its NNI adjacency
/// restricted to the support.
#[derive(Debug, Clone)]
pub struct CategoricalTreeDistribution {
    taxa: Arc<TaxonMap>,
    support: Vec<Topology>,
    probs: Vec<f64>,
    log_probs: Vec<f64>,
    cumulative: Vec<f64>,
    neighbors: Vec<Vec<u32>>,
    index: BTreeMap<Topology, u32>,
    total_nni_degree: usize,
}

/// Truncation settings for [`build_target`].
#[derive(Debug, Clone, Copy)]
pub struct TargetConfig {
    pub hpd_mass: f64,
    pub max_support: usize,
}

impl Default for TargetConfig {
    fn default() -> Self {
        TargetConfig {
            hpd_mass: 0.95,
            max_support: 4096,
        }
    }
}

/// Build a categorical target from (topology, probability) entries.
///
/// Entries are sorted by descending probability (ties keep input order), the
/// smallest prefix reaching `hpd_mass` is kept, the prefix is further capped
/// at `max_support` entries, the NNI adjacency is built over the retained
/// set, only the largest connected component survives (ties broken by larger
/// total probability, then by lowest entry index), and probabilities are
/// renormalized.
pub fn build_target(
    entries: &[(Topology, f64)],
    cfg: &TargetConfig,
) -> Result<CategoricalTreeDistribution> {
    if entries.is_empty() {
        return Err(Error::EmptySupport);
    }
    if !(0.0 < cfg.hpd_mass && cfg.hpd_mass <= 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "hpd_mass must lie in (0, 1], got {}",
            cfg.hpd_mass
        )));
    }
    if cfg.max_support == 0 {
        return Err(Error::InvalidArgument(
            "max_support must be positive".into(),
        ));
    }
    let taxa = entries[0].0.taxa().clone();

    // merge duplicate topologies into their first occurrence, keeping input order
    let mut merged: Vec<(Topology, f64)> = Vec::new();
    let mut seen: BTreeMap<Topology, usize> = BTreeMap::new();
    let mut total = 0.0;
    for (t, p) in entries {
        if !t.taxa().same_as(&taxa) {
            return Err(Error::TaxonMismatch);
        }
        if !t.is_binary() {
            return Err(Error::NotBinary);
        }
        if !p.is_finite() || *p < 0.0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "invalid probability {p}"
            )));
        }
        total += p;
        match seen.get(t) {
            Some(&at) => merged[at].1 += p,
            None => {
                seen.insert(t.clone(), merged.len());
                merged.push((t.clone(), *p));
            }
        }
    }
    if total <= 0.0 {
        return Err(Error::EmptySupport);
    }
    for (_, p) in &mut merged {
        *p /= total;
    }

    // descending probability, stable in input order
    let mut order: Vec<usize> = (0..merged.len()).collect();
    order.sort_by(|&a, &b| {
        merged[b]
            .1
            .partial_cmp(&merged[a].1)
            .expect("probabilities are finite")
    });

    let mut kept: Vec<usize> = Vec::new();
    let mut mass = 0.0;
    for &i in &order {
        if merged[i].1 == 0.0 {
            break;
        }
        kept.push(i);
        mass += merged[i].1;
        if mass >= cfg.hpd_mass - 1e-12 {
            break;
        }
    }
    kept.truncate(cfg.max_support);
    if kept.is_empty() {
        return Err(Error::EmptySupport);
    }

    let support: Vec<Topology> = kept.iter().map(|&i| merged[i].0.clone()).collect();
    let probs: Vec<f64> = kept.iter().map(|&i| merged[i].1).collect();

    let index: BTreeMap<Topology, u32> = support
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i as u32))
        .collect();
    let neighbors: Vec<Vec<u32>> = support
        .iter()
        .map(|t| {
            nni_neighbors(t).map(|ns| {
                ns.iter()
                    .filter_map(|u| index.get(u).copied())
                    .collect::<Vec<u32>>()
            })
        })
        .collect::<Result<_>>()?;

    // connected components of the restricted NNI graph
    let k = support.len();
    let mut component = alloc::vec![usize::MAX; k];
    let mut n_components = 0;
    for start in 0..k {
        if component[start] != usize::MAX {
            continue;
        }
        let id = n_components;
        n_components += 1;
        let mut queue = alloc::vec![start];
        component[start] = id;
        while let Some(v) = queue.pop() {
            for &w in &neighbors[v] {
                if component[w as usize] == usize::MAX {
                    component[w as usize] = id;
                    queue.push(w as usize);
                }
            }
        }
    }
    let mut best = 0usize;
    if n_components > 1 {
        // most members, then most probability mass, then lowest entry index
        let mut stats: Vec<(usize, f64, usize)> = alloc::vec![(0, 0.0, usize::MAX); n_components];
        for i in 0..k {
            let c = component[i];
            stats[c].0 += 1;
            stats[c].1 += probs[i];
            stats[c].2 = stats[c].2.min(i);
        }
        for c in 1..n_components {
            let better = stats[c].0 > stats[best].0
                || (stats[c].0 == stats[best].0 && stats[c].1 > stats[best].1)
                || (stats[c].0 == stats[best].0
                    && stats[c].1 == stats[best].1
                    && stats[c].2 < stats[best].2);
            if better {
                best = c;
            }
        }
    }

    let keep: Vec<usize> = (0..k).filter(|&i| component[i] == best).collect();
    let mut remap = alloc::vec![u32::MAX; k];
    for (new, &old) in keep.iter().enumerate() {
        remap[old] = new as u32;
    }
    let support: Vec<Topology> = keep.iter().map(|&i| support[i].clone()).collect();
    let mut probs: Vec<f64> = keep.iter().map(|&i| probs[i]).collect();
    let neighbors: Vec<Vec<u32>> = keep
        .iter()
        .map(|&i| {
            neighbors[i]
                .iter()
                .filter(|&&w| remap[w as usize] != u32::MAX)
                .map(|&w| remap[w as usize])
                .collect()
        })
        .collect();

    let mass: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= mass;
    }
    let log_probs: Vec<f64> = probs.iter().map(|&p| math::ln(p)).collect();
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in &probs {
        acc += p;
        cumulative.push(acc);
    }
    *cumulative.last_mut().expect("non-empty support") = 1.0;

    let index: BTreeMap<Topology, u32> = support
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i as u32))
        .collect();
    let total_nni_degree = 2 * (taxa.len() - 3);

    Ok(CategoricalTreeDistribution {
        taxa,
        support,
        probs,
        log_probs,
        cumulative,
        neighbors,
        index,
        total_nni_degree,
    })
}

/// Build a target from the empirical topology frequencies of a chain.
pub fn build_target_from_chain(
    chain: &Chain,
    cfg: &TargetConfig,
) -> Result<CategoricalTreeDistribution> {
    let tp = crate::summary::tree_probabilities(chain)?;
    let entries: Vec<(Topology, f64)> = tp.probs.iter().map(|(t, &p)| (t.clone(), p)).collect();
    build_target(&entries, cfg)
}

impl CategoricalTreeDistribution {
    pub fn taxa(&self) -> &Arc<TaxonMap> {
        &self.taxa
    }

    pub fn support(&self) -> &[Topology] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob_of(&self, t: &Topology) -> f64 {
        self.index
            .get(t)
            .map(|&i| self.probs[i as usize])
            .unwrap_or(0.0)
    }

    pub fn contains(&self, t: &Topology) -> bool {
        self.index.contains_key(t)
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[i]
    }

    /// The full NNI degree 2(n_taxa - 3) of any binary topology.
    pub fn total_nni_degree(&self) -> usize {
        self.total_nni_degree
    }

    /// True if every support topology can reach every other via supported
    /// NNI moves (holds by construction; exposed for verification).
    pub fn is_connected(&self) -> bool {
        let k = self.support.len();
        let mut seen = alloc::vec![false; k];
        let mut queue = alloc::vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop() {
            for &w in &self.neighbors[v] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    count += 1;
                    queue.push(w as usize);
                }
            }
        }
        count == k
    }

    fn draw_index(&self, rng: &mut ChaCha20Rng) -> usize {
        let u: f64 = rng.gen();
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.support.len() - 1)
    }

    /// Total-variation distance between an empirical topology distribution
    /// and this target (mass outside the support counts in full).
    pub fn tv_distance(&self, empirical: &crate::summary::TreeProbabilities) -> f64 {
        let mut tv = 0.0;
        for (i, t) in self.support.iter().enumerate() {
            tv += math::abs(self.probs[i] - empirical.prob(t));
        }
        for (t, &p) in &empirical.probs {
            if !self.index.contains_key(t) {
                tv += p;
            }
        }
        tv / 2.0
    }
}

/// Run the NNI Metropolis sampler against a categorical target, keeping every
/// `thin`-th state. The proposal is simulated in two steps: a uniform draw
/// first decides whether the proposal lands in the supported neighbor list
/// (probability |N|/total degree); otherwise the proposed tree has zero
/// target probability and is rejected without materializing it. Supported
/// proposals are accepted with min(1, p*/p). The starting state is drawn
/// from the target itself.
pub fn run_chain(
    target: &CategoricalTreeDistribution,
    iterations: u64,
    thin: u64,
    seed: u64,
) -> Result<Chain> {
    run_chain_with_stats(target, iterations, thin, seed).map(|(c, _)| c)
}

/// [`run_chain`] plus acceptance counters.
pub fn run_chain_with_stats(
    target: &CategoricalTreeDistribution,
    iterations: u64,
    thin: u64,
    seed: u64,
) -> Result<(Chain, McmcStats)> {
    if thin == 0 || iterations < thin {
        return Err(Error::InvalidArgument(
            "need iterations >= thin >= 1".into(),
        ));
    }
    if target.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut state = target.draw_index(&mut rng);
    let mut stats = McmcStats {
        iterations,
        proposals_in_support: 0,
        accepted: 0,
    };
    let keep = (iterations / thin) as usize;
    let mut samples = Vec::with_capacity(keep);
    let mut log_density = Vec::with_capacity(keep);
    let degree = target.total_nni_degree as f64;
    for iter in 1..=iterations {
        let gate: f64 = rng.gen();
        let nbrs = &target.neighbors[state];
        if gate < nbrs.len() as f64 / degree {
            stats.proposals_in_support += 1;
            let proposal = nbrs[rng.gen_range(0..nbrs.len())] as usize;
            let ratio = target.probs[proposal] / target.probs[state];
            if ratio >= 1.0 || rng.gen::<f64>() < ratio {
                state = proposal;
                stats.accepted += 1;
            }
        }
        if iter % thin == 0 {
            samples.push(target.support[state].clone());
            log_density.push(target.log_probs[state]);
        }
    }
    let chain = Chain::new(target.taxa.clone(), samples, Some(log_density))?;
    Ok((chain, stats))
}

/// Draw k topologies independently from the target by inverse-CDF sampling.
pub fn iid_sample(target: &CategoricalTreeDistribution, k: usize, seed: u64) -> Result<Chain> {
    if k < 1 {
        return Err(Error::InvalidArgument("need at least one draw".into()));
    }
    if target.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(k);
    let mut log_density = Vec::with_capacity(k);
    for _ in 0..k {
        let i = target.draw_index(&mut rng);
        samples.push(target.support[i].clone());
        log_density.push(target.log_probs[i]);
    }
    Chain::new(target.taxa.clone(), samples, Some(log_density))
}
