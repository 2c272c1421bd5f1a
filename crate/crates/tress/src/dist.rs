//! Robinson-Foulds distances, distance matrices over chains, Fréchet
//! variances, and medoids.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::topology::{Split, Topology};

fn symmetric_difference_size(a: &[Split], b: &[Split]) -> u32 {
    let mut i = 0;
    let mut j = 0;
    let mut diff = 0;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => {
                diff += 1;
                i += 1;
            }
            core::cmp::Ordering::Greater => {
                diff += 1;
                j += 1;
            }
            core::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    diff + (a.len() - i) as u32 + (b.len() - j) as u32
}

/// Robinson-Foulds distance: the number of splits present in exactly one of
/// the two topologies. Unresolved topologies are allowed; for two binary
/// trees the result is even.
pub fn rf_distance(a: &Topology, b: &Topology) -> Result<u32> {
    if !a.same_taxa(b) {
        return Err(Error::TaxonMismatch);
    }
    Ok(symmetric_difference_size(a.splits(), b.splits()))
}

/// Symmetric pairwise RF distances for one chain. Identical topologies are
/// deduplicated internally, so the pairwise cost scales with the square of
/// the number of distinct topologies rather than the sample count.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    n_classes: usize,
    /// distinct-topology class of each sample
    classes: Vec<u32>,
    /// samples per class
    class_counts: Vec<u32>,
    /// dense n_classes x n_classes distances
    class_dist: Vec<u32>,
}

impl DistanceMatrix {
    /// Number of samples.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of distinct topologies.
    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn class_of(&self, i: usize) -> usize {
        self.classes[i] as usize
    }

    pub fn class_count(&self, class: usize) -> u32 {
        self.class_counts[class]
    }

    /// Distance between samples `i` and `j`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.class_dist[self.classes[i] as usize * self.n_classes + self.classes[j] as usize]
    }

    /// Distance between distinct-topology classes.
    #[inline]
    pub fn class_get(&self, a: usize, b: usize) -> u32 {
        self.class_dist[a * self.n_classes + b]
    }

    /// Squared distance between samples, as a float.
    #[inline]
    pub fn sq(&self, i: usize, j: usize) -> f64 {
        let d = self.get(i, j) as f64;
        d * d
    }

    /// True when every pairwise distance is zero (all samples identical).
    pub fn is_zero(&self) -> bool {
        self.n_classes <= 1
    }

    /// Sum of distances from sample `i` to all samples (including itself).
    pub fn row_sum(&self, i: usize) -> u64 {
        let ci = self.classes[i] as usize;
        (0..self.n_classes)
            .map(|c| self.class_counts[c] as u64 * self.class_dist[ci * self.n_classes + c] as u64)
            .sum()
    }

    /// Build a matrix from an explicit distance function (each sample its own
    /// class). Intended for tests and for plugging in non-RF distances; the
    /// function is only evaluated for `i < j` and symmetry is implied.
    pub fn from_fn<F: FnMut(usize, usize) -> u32>(n: usize, mut f: F) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyChain);
        }
        let mut class_dist = alloc::vec![0u32; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = f(i, j);
                class_dist[i * n + j] = d;
                class_dist[j * n + i] = d;
            }
        }
        Ok(DistanceMatrix {
            n,
            n_classes: n,
            classes: (0..n as u32).collect(),
            class_counts: alloc::vec![1; n],
            class_dist,
        })
    }

    /// Rescale all distances by a positive integer factor (rank-based
    /// estimators must be invariant to this).
    pub fn scaled(&self, factor: u32) -> DistanceMatrix {
        let mut out = self.clone();
        for d in &mut out.class_dist {
            *d *= factor;
        }
        out
    }
}

/// Compute the full RF distance matrix of a chain.
pub fn distance_matrix(chain: &Chain) -> Result<DistanceMatrix> {
    if chain.is_empty() {
        return Err(Error::EmptyChain);
    }
    let mut class_of: BTreeMap<&Topology, u32> = BTreeMap::new();
    let mut reps: Vec<&Topology> = Vec::new();
    let mut classes = Vec::with_capacity(chain.len());
    let mut class_counts: Vec<u32> = Vec::new();
    for t in chain.samples() {
        let next = reps.len() as u32;
        let c = *class_of.entry(t).or_insert_with(|| {
            reps.push(t);
            class_counts.push(0);
            next
        });
        class_counts[c as usize] += 1;
        classes.push(c);
    }
    let u = reps.len();
    let mut class_dist = alloc::vec![0u32; u * u];
    for a in 0..u {
        for b in a + 1..u {
            let d = symmetric_difference_size(reps[a].splits(), reps[b].splits());
            class_dist[a * u + b] = d;
            class_dist[b * u + a] = d;
        }
    }
    Ok(DistanceMatrix {
        n: chain.len(),
        n_classes: u,
        classes,
        class_counts,
        class_dist,
    })
}

/// Fréchet variance of the samples selected by `idx`: the sum of squared
/// pairwise distances over the subset divided by n(n-1), the metric-space
/// analogue of the unbiased sample variance.
pub fn frechet_variance(d: &DistanceMatrix, idx: &[usize]) -> Result<f64> {
    let k = idx.len();
    if k < 2 {
        return Err(Error::SubsetTooSmall { need: 2, got: k });
    }
    let mut sum = 0.0;
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            sum += d.sq(i, j);
        }
    }
    Ok(sum / (k as f64 * (k as f64 - 1.0)))
}

/// All sample indices attaining the minimum total distance to the rest of
/// the sample (the medoid tie set).
pub fn medoid_indices(d: &DistanceMatrix) -> Vec<usize> {
    let sums: Vec<u64> = (0..d.n()).map(|i| d.row_sum(i)).collect();
    let min = *sums.iter().min().expect("non-empty matrix");
    (0..d.n()).filter(|&i| sums[i] == min).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::parse_newick;
    use crate::taxa::TaxonMap;
    use alloc::sync::Arc;
    use alloc::vec;

    fn chain_of(texts: &[&str]) -> Chain {
        let first = parse_newick(texts[0], None).unwrap();
        let taxa = first.taxa().clone();
        let mut samples = vec![first];
        for t in &texts[1..] {
            samples.push(parse_newick(t, Some(&taxa)).unwrap());
        }
        Chain::new(taxa, samples, None).unwrap()
    }

    #[test]
    fn distance_to_self_is_zero() {
        let t = parse_newick("((A,B),(C,D),E);", None).unwrap();
        assert_eq!(rf_distance(&t, &t).unwrap(), 0);
    }

    #[test]
    fn one_nni_apart_is_two() {
        // swapping D and E across the edge above (C,D) changes one split
        let a = parse_newick("((A,B),(C,D),E);", None).unwrap();
        let b = parse_newick("((A,B),(C,E),D);", Some(a.taxa())).unwrap();
        assert_eq!(rf_distance(&a, &b).unwrap(), 2);
    }

    #[test]
    fn nni_neighbors_at_distance_two() {
        // swapping C and E across the internal edge above (C,D)
        let a = parse_newick("((A,B),((C,D),E),F);", None).unwrap();
        let b = parse_newick("((A,B),((E,D),C),F);", None).unwrap();
        assert_eq!(rf_distance(&a, &b).unwrap(), 2);
    }

    #[test]
    fn maximum_distance_on_ten_taxa() {
        // two caterpillars with no shared splits: 2*10 - 6 = 14
        let a = parse_newick("(t0,t1,(t2,(t3,(t4,(t5,(t6,(t7,(t8,t9))))))));", None).unwrap();
        let b = parse_newick(
            "(t0,t2,(t4,(t6,(t8,(t1,(t3,(t5,(t7,t9))))))));",
            Some(a.taxa()),
        )
        .unwrap();
        assert!(a.is_binary() && b.is_binary());
        assert_eq!(rf_distance(&a, &b).unwrap(), 14);
    }

    #[test]
    fn taxon_mismatch_rejected() {
        let a = parse_newick("(A,B,(C,D));", None).unwrap();
        let b = parse_newick("(A,B,(C,E));", None).unwrap();
        assert!(matches!(rf_distance(&a, &b), Err(Error::TaxonMismatch)));
    }

    #[test]
    fn matrix_of_identical_trees_is_zero() {
        let c = chain_of(&["(A,B,(C,D));", "(A,B,(C,D));", "(A,B,(C,D));"]);
        let d = distance_matrix(&c).unwrap();
        assert!(d.is_zero());
        assert_eq!(d.n_classes(), 1);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d.get(i, j), 0);
            }
        }
    }

    #[test]
    fn alternating_chain_matrix() {
        let c = chain_of(&["(A,B,(C,D));", "(A,C,(B,D));", "(A,B,(C,D));"]);
        let d = distance_matrix(&c).unwrap();
        assert_eq!(d.n_classes(), 2);
        let expect = [[0, 2, 0], [2, 0, 2], [0, 2, 0]];
        for (i, row) in expect.iter().enumerate() {
            for (j, want) in row.iter().enumerate() {
                assert_eq!(d.get(i, j), *want);
            }
        }
    }

    #[test]
    fn frechet_variance_examples() {
        let c = chain_of(&["(A,B,(C,D));", "(A,C,(B,D));"]);
        let d = distance_matrix(&c).unwrap();
        // two trees at distance 2: (1/(2*1)) * 4 = 2
        assert_eq!(frechet_variance(&d, &[0, 1]).unwrap(), 2.0);
        // identical subset
        let c2 = chain_of(&["(A,B,(C,D));", "(A,B,(C,D));"]);
        let d2 = distance_matrix(&c2).unwrap();
        assert_eq!(frechet_variance(&d2, &[0, 1]).unwrap(), 0.0);
        assert!(frechet_variance(&d, &[0]).is_err());
    }

    #[test]
    fn frechet_variance_matches_classical_variance_on_scalars() {
        // quantized iid standard normals with Euclidean distance
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
        let scale = 1000.0;
        let n = 1500;
        let xs: Vec<i64> = (0..n)
            .map(|_| {
                let u: f64 = rng.sample(rand_distr::StandardNormal);
                (u * scale) as i64
            })
            .collect();
        let d = DistanceMatrix::from_fn(n, |i, j| (xs[i] - xs[j]).unsigned_abs() as u32).unwrap();
        let idx: Vec<usize> = (0..n).collect();
        let v = frechet_variance(&d, &idx).unwrap() / (scale * scale);
        assert!((v - 1.0).abs() < 0.1, "variance {v} should be near 1");
        // and it matches the direct unbiased variance of the same values
        let xf: Vec<f64> = xs.iter().map(|&x| x as f64 / scale).collect();
        let direct = crate::math::sample_variance(&xf);
        assert!((v - direct).abs() < 1e-9);
    }

    #[test]
    fn medoids_and_ties() {
        let c = chain_of(&[
            "(A,B,(C,D));",
            "(A,B,(C,D));",
            "(A,B,(C,D));",
            "(A,C,(B,D));",
        ]);
        let d = distance_matrix(&c).unwrap();
        assert_eq!(medoid_indices(&d), vec![0, 1, 2]);

        let all_same = chain_of(&["(A,B,(C,D));", "(A,B,(C,D));"]);
        let d2 = distance_matrix(&all_same).unwrap();
        assert_eq!(medoid_indices(&d2), vec![0, 1]);
    }

    #[test]
    fn dedup_matches_direct_pairwise_distances() {
        // 100 random 8-taxon trees, against direct rf_distance with no dedup
        let labels: Vec<&str> = vec!["a", "b", "c", "d", "e", "f", "g", "h"];
        let taxa = TaxonMap::new(labels).unwrap();
        let mut rng = crate::testutil::rng(42);
        let samples: Vec<Topology> = (0..100)
            .map(|_| crate::testutil::random_binary_topology(&taxa, &mut rng))
            .collect();
        let chain = Chain::new(Arc::clone(&taxa), samples.clone(), None).unwrap();
        let d = distance_matrix(&chain).unwrap();
        for i in 0..samples.len() {
            for j in 0..samples.len() {
                assert_eq!(d.get(i, j), rf_distance(&samples[i], &samples[j]).unwrap());
            }
        }
    }

    #[test]
    fn rf_triangle_inequality_on_random_triples() {
        let taxa = TaxonMap::new(["a", "b", "c", "d", "e", "f", "g", "h", "i"]).unwrap();
        let mut rng = crate::testutil::rng(5);
        for _ in 0..200 {
            let x = crate::testutil::random_binary_topology(&taxa, &mut rng);
            let y = crate::testutil::random_binary_topology(&taxa, &mut rng);
            let z = crate::testutil::random_binary_topology(&taxa, &mut rng);
            let xy = rf_distance(&x, &y).unwrap();
            let yz = rf_distance(&y, &z).unwrap();
            let xz = rf_distance(&x, &z).unwrap();
            assert!(xz <= xy + yz);
        }
    }

    #[test]
    fn rf_equals_indicator_hamming_distance() {
        // brute-force oracle: enumerate all canonical non-trivial splits of 8
        // taxa and compare indicator vectors
        let taxa = TaxonMap::new(["a", "b", "c", "d", "e", "f", "g", "h"]).unwrap();
        let mut rng = crate::testutil::rng(11);
        let all_splits = crate::testutil::all_nontrivial_splits(8);
        assert_eq!(all_splits.len(), 119); // 2^7 - 8 - 1
        for _ in 0..50 {
            let x = crate::testutil::random_binary_topology(&taxa, &mut rng);
            let y = crate::testutil::random_binary_topology(&taxa, &mut rng);
            let hamming: u32 = all_splits
                .iter()
                .map(|s| (x.has_split(s) != y.has_split(s)) as u32)
                .sum();
            assert_eq!(rf_distance(&x, &y).unwrap(), hamming);
        }
    }
}
