//! Regenerates the bundled target distributions in `data/`.
//!
//! `target6.tsv` holds 25 NNI-connected 6-taxon topologies with uneven
//! probabilities (0.85^rank, renormalized), collected breadth-first from a
//! caterpillar start. `target6_bimodal.tsv` holds two 10-topology
//! high-probability regions joined only through a low-probability bridge
//! path, which makes chains mix badly between the modes.

use std::collections::VecDeque;
use std::path::Path;

use tress::fake::{build_target, nni_neighbors, CategoricalTreeDistribution, TargetConfig};
use tress::newick::{parse_newick, serialize_newick};
use tress::topology::Topology;

fn bfs_ball(start: &Topology, size: usize, exclude: &[Topology]) -> Vec<Topology> {
    let mut ball = vec![start.clone()];
    let mut queue = VecDeque::from([start.clone()]);
    while ball.len() < size {
        let t = queue.pop_front().expect("connected space");
        for u in nni_neighbors(&t).unwrap() {
            if ball.len() == size {
                break;
            }
            if ball.contains(&u) || exclude.contains(&u) {
                continue;
            }
            ball.push(u.clone());
            queue.push_back(u);
        }
    }
    ball
}

fn adjacent_to_any(t: &Topology, set: &[Topology]) -> bool {
    nni_neighbors(t).unwrap().iter().any(|u| set.contains(u))
}

/// Shortest NNI path from any member of `from` to any member of `to`,
/// returning only the strictly interior topologies.
fn bridge_path(from: &[Topology], to: &[Topology]) -> Vec<Topology> {
    let mut seen: Vec<Topology> = from.to_vec();
    let mut parents: Vec<(Topology, Option<usize>)> =
        from.iter().map(|t| (t.clone(), None)).collect();
    let mut queue: VecDeque<usize> = (0..from.len()).collect();
    while let Some(at) = queue.pop_front() {
        let t = parents[at].0.clone();
        for u in nni_neighbors(&t).unwrap() {
            if seen.contains(&u) {
                continue;
            }
            seen.push(u.clone());
            parents.push((u.clone(), Some(at)));
            let idx = parents.len() - 1;
            if to.contains(&u) {
                // walk back, dropping the endpoints
                let mut path = Vec::new();
                let mut cur = parents[idx].1;
                while let Some(p) = cur {
                    if parents[p].1.is_some() {
                        path.push(parents[p].0.clone());
                    }
                    cur = parents[p].1;
                }
                path.reverse();
                return path;
            }
            queue.push_back(idx);
        }
    }
    panic!("NNI space is connected; a path must exist");
}

fn write_target(path: &Path, entries: &[(Topology, f64)]) {
    let target = verify(entries);
    let mut out = String::from("newick\tprobability\n");
    for (t, p) in target.support().iter().zip(target.probs()) {
        out.push_str(&format!("{}\t{p}\n", serialize_newick(t)));
    }
    std::fs::write(path, out).unwrap();
    println!("wrote {} ({} topologies)", path.display(), target.len());
}

fn verify(entries: &[(Topology, f64)]) -> CategoricalTreeDistribution {
    let cfg = TargetConfig {
        hpd_mass: 1.0,
        max_support: 4096,
    };
    let target = build_target(entries, &cfg).unwrap();
    assert_eq!(target.len(), entries.len(), "no topology may be dropped");
    assert!(target.is_connected());
    target
}

fn main() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&data).unwrap();

    // 25 connected topologies, probability proportional to 0.7^rank
    let start = parse_newick("(t1,t2,(t3,(t4,(t5,t6))));", None).unwrap();
    let ball = bfs_ball(&start, 25, &[]);
    let entries: Vec<(Topology, f64)> = ball
        .into_iter()
        .enumerate()
        .map(|(rank, t)| (t, 0.7f64.powi(rank as i32)))
        .collect();
    let total: f64 = entries.iter().map(|(_, p)| p).sum();
    let entries: Vec<(Topology, f64)> = entries.into_iter().map(|(t, p)| (t, p / total)).collect();
    write_target(&data.join("target6.tsv"), &entries);

    // two modes of unequal size joined only through a low-probability
    // bridge; the asymmetry keeps mode switches visible to every projection
    let c1 = parse_newick("(t1,t2,(t3,(t4,(t5,t6))));", None).unwrap();
    let mode_a = bfs_ball(&c1, 8, &[]);
    let c2 = parse_newick("((t1,t4),(t2,t6),(t3,t5));", Some(c1.taxa())).unwrap();
    assert!(!mode_a.contains(&c2) && !adjacent_to_any(&c2, &mode_a));
    // grow mode B away from mode A and its NNI boundary
    let mut forbidden = mode_a.clone();
    for t in &mode_a {
        for u in nni_neighbors(t).unwrap() {
            if !forbidden.contains(&u) {
                forbidden.push(u);
            }
        }
    }
    let mode_b = bfs_ball(&c2, 4, &forbidden);
    for b in &mode_b {
        assert!(!adjacent_to_any(b, &mode_a), "modes must not touch");
    }
    let bridge = bridge_path(&mode_a, &mode_b);
    assert!(!bridge.is_empty());

    let mut entries: Vec<(Topology, f64)> = Vec::new();
    for t in &mode_a {
        entries.push((t.clone(), 0.63 / mode_a.len() as f64));
    }
    for t in &mode_b {
        entries.push((t.clone(), 0.32 / mode_b.len() as f64));
    }
    for t in &bridge {
        entries.push((t.clone(), 0.05 / bridge.len() as f64));
    }
    write_target(&data.join("target6_bimodal.tsv"), &entries);
}
