//! Helpers shared by unit tests: seeded RNG, random tree generation, and
//! split enumeration oracles.

use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;

use crate::taxa::TaxonMap;
use crate::topology::{Split, Topology};

pub type TestRng = rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> TestRng {
    TestRng::seed_from_u64(seed)
}

/// Random fully resolved unrooted topology, built by inserting leaves one at
/// a time on a uniformly chosen edge.
pub fn random_binary_topology(taxa: &Arc<TaxonMap>, rng: &mut TestRng) -> Topology {
    let n = taxa.len();
    assert!(n >= 3);
    // node ids: leaves 0..n, internal nodes n..
    let mut next_internal = n;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    edges.push((0, next_internal));
    edges.push((1, next_internal));
    edges.push((2, next_internal));
    next_internal += 1;
    for leaf in 3..n {
        let e = rng.gen_range(0..edges.len());
        let (a, b) = edges[e];
        let m = next_internal;
        next_internal += 1;
        edges[e] = (a, m);
        edges.push((m, b));
        edges.push((leaf, m));
    }

    // adjacency lists over all nodes
    let mut adj: Vec<Vec<usize>> = alloc::vec![Vec::new(); next_internal];
    for &(a, b) in &edges {
        adj[a].push(b);
        adj[b].push(a);
    }

    // each internal edge yields the split of leaves on one side
    let mut splits = Vec::new();
    for &(a, b) in &edges {
        if a < n || b < n {
            continue; // pendant edge
        }
        let mut members = Vec::new();
        let mut stack = alloc::vec![(b, a)];
        while let Some((node, from)) = stack.pop() {
            if node < n {
                members.push(node as u32);
                continue;
            }
            for &next in &adj[node] {
                if next != from {
                    stack.push((next, node));
                }
            }
        }
        let s = Split::from_members(&members, n);
        if s.is_nontrivial(n) {
            splits.push(s);
        }
    }
    Topology::new(Arc::clone(taxa), splits).expect("tree-derived splits are compatible")
}

/// All canonical non-trivial splits of an `n`-taxon set (only practical for
/// small n). Serves as the indicator-vector space for RF oracles.
pub fn all_nontrivial_splits(n: usize) -> Vec<Split> {
    assert!(n <= 20, "exhaustive split enumeration is exponential");
    let mut out = Vec::new();
    for mask in 0u64..(1 << (n - 1)) {
        let mask = mask << 1; // taxon 0 stays clear
        let members: Vec<u32> = (0..n as u32).filter(|&t| mask >> t & 1 == 1).collect();
        let k = members.len();
        if k >= 2 && n - k >= 2 {
            out.push(Split::from_members(&members, n));
        }
    }
    out.sort_unstable();
    out
}

/// All fully resolved topologies on the given taxa, by exhaustive sequential
/// leaf insertion; (2n-5)!! of them, so keep n tiny.
pub fn all_binary_topologies(taxa: &Arc<TaxonMap>) -> Vec<Topology> {
    let n = taxa.len();
    assert!(n <= 8, "topology enumeration is doubly factorial");
    // state: edge list as in random_binary_topology
    let mut states: Vec<(Vec<(usize, usize)>, usize)> =
        alloc::vec![(alloc::vec![(0, n), (1, n), (2, n)], n + 1)];
    for leaf in 3..n {
        let mut next_states = Vec::new();
        for (edges, next_internal) in &states {
            for e in 0..edges.len() {
                let mut new_edges = edges.clone();
                let (a, b) = new_edges[e];
                let m = *next_internal;
                new_edges[e] = (a, m);
                new_edges.push((m, b));
                new_edges.push((leaf, m));
                next_states.push((new_edges, m + 1));
            }
        }
        states = next_states;
    }

    let mut out = Vec::new();
    for (edges, n_nodes) in &states {
        let mut adj: Vec<Vec<usize>> = alloc::vec![Vec::new(); *n_nodes];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut splits = Vec::new();
        for &(a, b) in edges {
            if a < n || b < n {
                continue;
            }
            let mut members = Vec::new();
            let mut stack = alloc::vec![(b, a)];
            while let Some((node, from)) = stack.pop() {
                if node < n {
                    members.push(node as u32);
                    continue;
                }
                for &next in &adj[node] {
                    if next != from {
                        stack.push((next, node));
                    }
                }
            }
            let s = Split::from_members(&members, n);
            if s.is_nontrivial(n) {
                splits.push(s);
            }
        }
        out.push(Topology::new(Arc::clone(taxa), splits).unwrap());
    }
    out.sort();
    out.dedup();
    out
}

/// The bundled 6-taxon validation target: 25 NNI-connected topologies with
/// uneven probabilities (0.85^rank, renormalized), collected breadth-first
/// from a caterpillar start. The CLI crate ships the same distribution as a
/// TSV fixture.
pub fn demo_target_6taxa() -> crate::fake::CategoricalTreeDistribution {
    let start = crate::newick::parse_newick("(t1,t2,(t3,(t4,(t5,t6))));", None).unwrap();
    let mut seen: Vec<Topology> = alloc::vec![start.clone()];
    let mut queue: Vec<Topology> = alloc::vec![start];
    let mut at = 0;
    while seen.len() < 25 {
        let t = queue[at].clone();
        at += 1;
        for u in crate::fake::nni_neighbors(&t).unwrap() {
            if seen.len() == 25 {
                break;
            }
            if !seen.contains(&u) {
                seen.push(u.clone());
                queue.push(u);
            }
        }
    }
    let entries: Vec<(Topology, f64)> = seen
        .into_iter()
        .enumerate()
        .map(|(rank, t)| (t, libm::pow(0.7, rank as f64)))
        .collect();
    let cfg = crate::fake::TargetConfig {
        hpd_mass: 1.0,
        max_support: 25,
    };
    crate::fake::build_target(&entries, &cfg).unwrap()
}

/// AR(1) series with the given coefficient and unit innovation variance.
pub fn ar1_series(phi: f64, n: usize, rng: &mut TestRng) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    // start at stationarity
    let stationary_sd = 1.0 / crate::math::sqrt(1.0 - phi * phi);
    let z0: f64 = rng.sample(rand_distr::StandardNormal);
    let mut x = z0 * stationary_sd;
    for _ in 0..n {
        out.push(x);
        let e: f64 = rng.sample(rand_distr::StandardNormal);
        x = phi * x + e;
    }
    out
}

/// White noise of unit variance.
pub fn white_noise(n: usize, rng: &mut TestRng) -> Vec<f64> {
    (0..n)
        .map(|_| rng.sample(rand_distr::StandardNormal))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxa::TaxonMap;

    #[test]
    fn enumeration_counts() {
        let taxa4 = TaxonMap::new(["a", "b", "c", "d"]).unwrap();
        assert_eq!(all_binary_topologies(&taxa4).len(), 3);
        let taxa5 = TaxonMap::new(["a", "b", "c", "d", "e"]).unwrap();
        assert_eq!(all_binary_topologies(&taxa5).len(), 15);
        let taxa6 = TaxonMap::new(["a", "b", "c", "d", "e", "f"]).unwrap();
        assert_eq!(all_binary_topologies(&taxa6).len(), 105);
    }

    #[test]
    fn random_topology_is_binary() {
        let taxa = TaxonMap::new(["a", "b", "c", "d", "e", "f", "g"]).unwrap();
        let mut rng = rng(1);
        for _ in 0..20 {
            let t = random_binary_topology(&taxa, &mut rng);
            assert!(t.is_binary());
            assert_eq!(t.splits().len(), 4);
        }
    }
}
