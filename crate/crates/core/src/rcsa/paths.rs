use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::{LinkId, NodeId, Topology};

/// A loopless route with its links and length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkId>,
    pub length_km: f64,
}

impl Path {
    pub fn from_nodes(topo: &Topology, nodes: Vec<NodeId>) -> Self {
        let links: Vec<LinkId> = nodes
            .windows(2)
            .map(|w| topo.link_between(w[0], w[1]).expect("consecutive nodes are adjacent"))
            .collect();
        let length_km = links.iter().map(|&l| topo.link(l).length_km).sum();
        Self {
            nodes,
            links,
            length_km,
        }
    }

    pub fn hop_count(&self) -> usize {
        self.links.len()
    }
}

/// (length, node sequence) ordering used everywhere paths are ranked.
fn path_order(a: &Path, b: &Path) -> Ordering {
    a.length_km.total_cmp(&b.length_km).then_with(|| a.nodes.cmp(&b.nodes))
}

#[derive(Debug, Clone)]
struct Key(Path);

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        path_order(&self.0, &other.0) == Ordering::Equal
    }
}
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        path_order(&self.0, &other.0)
    }
}

/// Shortest path from `s` to `t` avoiding the given nodes and links. Among
/// equal-length paths the lexicographically smallest node sequence wins.
fn dijkstra(
    topo: &Topology,
    s: NodeId,
    t: NodeId,
    banned_nodes: &HashSet<NodeId>,
    banned_links: &HashSet<LinkId>,
) -> Option<Vec<NodeId>> {
    let n = topo.node_count();
    let mut best: Vec<Option<(f64, Vec<NodeId>)>> = vec![None; n];
    let mut done = vec![false; n];
    best[s.0] = Some((0.0, vec![s]));
    loop {
        let u = (0..n).filter(|&i| !done[i] && best[i].is_some()).min_by(|&a, &b| {
            let (da, pa) = best[a].as_ref().unwrap();
            let (db, pb) = best[b].as_ref().unwrap();
            da.total_cmp(db).then_with(|| pa.cmp(pb))
        })?;
        done[u] = true;
        if u == t.0 {
            return best[u].take().map(|(_, p)| p);
        }
        let (du, pu) = best[u].clone().unwrap();
        for &(v, l) in topo.neighbors(NodeId(u)) {
            if done[v.0] || banned_nodes.contains(&v) || banned_links.contains(&l) {
                continue;
            }
            let dv = du + topo.link(l).length_km;
            let mut pv = pu.clone();
            pv.push(v);
            let better = match &best[v.0] {
                None => true,
                Some((d, p)) => match dv.total_cmp(d) {
                    Ordering::Less => true,
                    Ordering::Equal => pv < *p,
                    Ordering::Greater => false,
                },
            };
            if better {
                best[v.0] = Some((dv, pv));
            }
        }
    }
}

/// Path length summed link by link along the node sequence, so that equal
/// sequences always produce bit-identical lengths.
fn length_of(topo: &Topology, nodes: &[NodeId]) -> f64 {
    nodes
        .windows(2)
        .map(|w| topo.link(topo.link_between(w[0], w[1]).unwrap()).length_km)
        .sum()
}

/// Yen's algorithm: up to `k` loopless paths ordered by length, ties by node
/// sequence.
pub fn k_shortest_paths(topo: &Topology, s: NodeId, t: NodeId, k: usize) -> Vec<Path> {
    if s == t || k == 0 {
        return Vec::new();
    }
    let Some(first) = dijkstra(topo, s, t, &HashSet::new(), &HashSet::new()) else {
        return Vec::new();
    };
    let mut found: Vec<Path> = vec![Path::from_nodes(topo, first)];
    let mut candidates: BTreeSet<Key> = BTreeSet::new();

    while found.len() < k {
        let last = found.last().unwrap().nodes.clone();
        for i in 0..last.len() - 1 {
            let spur = last[i];
            let root = &last[..=i];
            let mut banned_links = HashSet::new();
            for p in &found {
                if p.nodes.len() > i + 1 && p.nodes[..=i] == *root {
                    banned_links.insert(topo.link_between(p.nodes[i], p.nodes[i + 1]).unwrap());
                }
            }
            let banned_nodes: HashSet<NodeId> = root[..i].iter().copied().collect();
            if let Some(spur_path) = dijkstra(topo, spur, t, &banned_nodes, &banned_links) {
                let mut nodes = root[..i].to_vec();
                nodes.extend(spur_path);
                let length_km = length_of(topo, &nodes);
                let mut cand = Path::from_nodes(topo, nodes);
                cand.length_km = length_km;
                if !found.iter().any(|p| p.nodes == cand.nodes) {
                    candidates.insert(Key(cand));
                }
            }
        }
        match candidates.pop_first() {
            Some(Key(p)) => found.push(p),
            None => break,
        }
    }
    found
}

pub fn shortest_path_km(topo: &Topology, s: NodeId, t: NodeId) -> Option<f64> {
    dijkstra(topo, s, t, &HashSet::new(), &HashSet::new()).map(|p| length_of(topo, &p))
}

/// Candidate paths per unordered node pair.
#[derive(Debug, Clone, Default)]
pub struct RouteTable {
    routes: BTreeMap<(NodeId, NodeId), Vec<Path>>,
}

impl RouteTable {
    pub fn build(topo: &Topology, pairs: impl IntoIterator<Item = (NodeId, NodeId)>, k: usize) -> Self {
        let mut routes = BTreeMap::new();
        for (s, t) in pairs {
            routes.entry((s, t)).or_insert_with(|| k_shortest_paths(topo, s, t, k));
        }
        Self { routes }
    }

    pub fn paths(&self, s: NodeId, t: NodeId) -> &[Path] {
        self.routes.get(&(s, t)).map_or(&[], Vec::as_slice)
    }
}

/// Sorts demands by descending shortest-path length; ties by id.
pub fn order_demands<I>(demands: I, topo: &Topology) -> Result<Vec<usize>>
where
    I: IntoIterator<Item = (usize, NodeId, NodeId)>,
{
    let mut keyed = Vec::new();
    for (id, s, t) in demands {
        let len = shortest_path_km(topo, s, t).ok_or_else(|| {
            Error::Validation(format!(
                "no path between `{}` and `{}`",
                topo.node(s).name,
                topo.node(t).name
            ))
        })?;
        keyed.push((len, id));
    }
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(keyed.into_iter().map(|(_, id)| id).collect())
}
