//! Exhaustive references for spectrum search and path enumeration.

use eonplan_core::netgraph::{Band, FiberSpec, LinkId, NodeId, SpectrumGrid, Topology, SLOTS_PER_BAND};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn below(rng: &mut ChaCha8Rng, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

/// Slot-by-slot scan: band C then L, lowest start first.
pub fn first_fit_scan(grid: &SpectrumGrid, path: &[LinkId], width: usize) -> Option<(Band, usize)> {
    for band in Band::ALL {
        for start in 0..=SLOTS_PER_BAND.saturating_sub(width) {
            let free = path
                .iter()
                .all(|&l| (start..start + width).all(|s| !grid.is_occupied(l, band, s)));
            if free {
                return Some((band, start));
            }
        }
    }
    None
}

/// Random connected graph on `n` nodes with integer lengths (ties likely).
pub fn random_topology(rng: &mut ChaCha8Rng, n: usize) -> Topology {
    let names: Vec<String> = (0..n).map(|i| format!("N{i}")).collect();
    let mut edges = Vec::new();
    let mut has = std::collections::BTreeSet::new();
    for i in 1..n {
        let j = below(rng, i);
        has.insert((j, i));
        edges.push((j, i));
    }
    let extra = below(rng, n * 2);
    for _ in 0..extra {
        let a = below(rng, n);
        let b = below(rng, n);
        if a != b && has.insert((a.min(b), a.max(b))) {
            edges.push((a.min(b), a.max(b)));
        }
    }
    let links: Vec<(String, String, f64)> = edges
        .into_iter()
        .map(|(a, b)| (names[a].clone(), names[b].clone(), (1 + below(rng, 5)) as f64 * 50.0))
        .collect();
    Topology::from_links(&names, &links, &FiberSpec::default()).expect("random graph is valid")
}

/// All simple paths from `s` to `t` with their lengths, by DFS.
pub fn all_simple_paths(topo: &Topology, s: NodeId, t: NodeId) -> Vec<(f64, Vec<NodeId>)> {
    fn dfs(
        topo: &Topology,
        at: NodeId,
        t: NodeId,
        stack: &mut Vec<NodeId>,
        len: f64,
        out: &mut Vec<(f64, Vec<NodeId>)>,
    ) {
        if at == t {
            out.push((len, stack.clone()));
            return;
        }
        for &(next, link) in topo.neighbors(at) {
            if stack.contains(&next) {
                continue;
            }
            stack.push(next);
            dfs(topo, next, t, stack, len + topo.link(link).length_km, out);
            stack.pop();
        }
    }
    let mut out = Vec::new();
    dfs(topo, s, t, &mut vec![s], 0.0, &mut out);
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    out
}
