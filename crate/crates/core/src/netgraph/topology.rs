use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Band, BandPair};
use crate::error::{Error, Result};

pub const SPAN_LENGTH_KM: f64 = 80.0;
const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LinkId(pub usize);

/// Per-band fiber and amplifier characteristics applied to every span.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberSpec {
    pub attenuation_db_per_km: BandPair<f64>,
    pub noise_figure_db: BandPair<f64>,
}

impl Default for FiberSpec {
    fn default() -> Self {
        Self {
            attenuation_db_per_km: BandPair::new(0.20, 0.22),
            noise_figure_db: BandPair::new(5.0, 6.0),
        }
    }
}

/// One fiber span followed by an amplifier that exactly compensates its loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub length_km: f64,
    pub attenuation_db_per_km: BandPair<f64>,
    pub noise_figure_db: BandPair<f64>,
}

impl Span {
    pub fn new(length_km: f64, fiber: &FiberSpec) -> Self {
        Self {
            length_km,
            attenuation_db_per_km: fiber.attenuation_db_per_km,
            noise_figure_db: fiber.noise_figure_db,
        }
    }

    pub fn gain_db(&self, band: Band) -> f64 {
        self.length_km * self.attenuation_db_per_km.get(band)
    }
}

/// Splits a link into `ceil(length / 80)` equal spans.
pub fn build_spans(length_km: f64, fiber: &FiberSpec) -> Result<Vec<Span>> {
    if !(length_km > 0.0) || !length_km.is_finite() {
        return Err(Error::Validation(format!(
            "link length must be positive, got {length_km} km"
        )));
    }
    // Guard against 160.00000000001 style inputs producing an extra span.
    let n = ((length_km / SPAN_LENGTH_KM) - 1e-9).ceil().max(1.0) as usize;
    let each = length_km / n as f64;
    Ok(vec![Span::new(each, fiber); n])
}

/// Haversine distance between two (longitude, latitude) points in degrees,
/// rounded to 0.1 km.
pub fn great_circle_km(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (lon1, lat1) = (a.0.to_radians(), a.1.to_radians());
    let (lon2, lat2) = (b.0.to_radians(), b.1.to_radians());
    let h = ((lat2 - lat1) / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * ((lon2 - lon1) / 2.0).sin().powi(2);
    let d = 2.0 * EARTH_RADIUS_KM * h.sqrt().asin();
    (d * 10.0).round() / 10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub name: String,
    /// (longitude, latitude) in degrees.
    pub coords: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub name: String,
    pub a: NodeId,
    pub b: NodeId,
    pub length_km: f64,
    pub spans: Vec<Span>,
}

impl Link {
    pub fn other(&self, n: NodeId) -> NodeId {
        if n == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Undirected physical graph. Nodes are sorted by name, links by their
/// (lower name, higher name) endpoint pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    nodes: Vec<Node>,
    links: Vec<Link>,
    adjacency: Vec<Vec<(NodeId, LinkId)>>,
    by_name: BTreeMap<String, NodeId>,
}

/// Raw link description handed to [`Topology::build`].
#[derive(Debug, Clone)]
pub(crate) struct RawLink {
    pub name: String,
    pub a: String,
    pub b: String,
    pub length_km: Option<f64>,
    pub line: usize,
}

impl Topology {
    pub(crate) fn build(mut nodes: Vec<Node>, raw_links: Vec<RawLink>, fiber: &FiberSpec) -> Result<Self> {
        nodes.sort_by(|x, y| x.name.cmp(&y.name));
        let mut by_name = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if by_name.insert(n.name.clone(), NodeId(i)).is_some() {
                return Err(Error::Validation(format!("duplicate node `{}`", n.name)));
            }
        }
        if nodes.is_empty() {
            return Err(Error::Validation("topology has no nodes".into()));
        }

        let mut keyed = BTreeMap::new();
        for raw in raw_links {
            let lookup = |name: &str| {
                by_name.get(name).copied().ok_or_else(|| Error::Parse {
                    line: raw.line,
                    message: format!("link `{}` references unknown node `{name}`", raw.name),
                })
            };
            let (a, b) = (lookup(&raw.a)?, lookup(&raw.b)?);
            if a == b {
                return Err(Error::Validation(format!(
                    "link `{}` is a self-loop on `{}`",
                    raw.name, raw.a
                )));
            }
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            let length_km = match raw.length_km {
                Some(l) => l,
                None => match (nodes[a.0].coords, nodes[b.0].coords) {
                    (Some(ca), Some(cb)) => great_circle_km(ca, cb),
                    _ => {
                        return Err(Error::Parse {
                            line: raw.line,
                            message: format!("link `{}` has no length and its endpoints lack coordinates", raw.name),
                        })
                    }
                },
            };
            let spans = build_spans(length_km, fiber)?;
            let link = Link {
                name: raw.name.clone(),
                a,
                b,
                length_km,
                spans,
            };
            if keyed.insert((a, b), link).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate link between `{}` and `{}`",
                    nodes[a.0].name, nodes[b.0].name
                )));
            }
        }

        let links: Vec<Link> = keyed.into_values().collect();
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (i, l) in links.iter().enumerate() {
            adjacency[l.a.0].push((l.b, LinkId(i)));
            adjacency[l.b.0].push((l.a, LinkId(i)));
        }
        for adj in &mut adjacency {
            adj.sort();
        }
        let topo = Self {
            nodes,
            links,
            adjacency,
            by_name,
        };
        topo.check_connected()?;
        Ok(topo)
    }

    /// Builds a topology from node names and `(a, b, length_km)` triples.
    pub fn from_links<S: AsRef<str>>(nodes: &[S], links: &[(S, S, f64)], fiber: &FiberSpec) -> Result<Self> {
        let nodes = nodes
            .iter()
            .map(|n| Node {
                name: n.as_ref().to_string(),
                coords: None,
            })
            .collect();
        let raw = links
            .iter()
            .enumerate()
            .map(|(i, (a, b, len))| RawLink {
                name: format!("L{}", i + 1),
                a: a.as_ref().to_string(),
                b: b.as_ref().to_string(),
                length_km: Some(*len),
                line: 0,
            })
            .collect();
        Self::build(nodes, raw, fiber)
    }

    fn check_connected(&self) -> Result<()> {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([NodeId(0)]);
        seen[0] = true;
        while let Some(n) = queue.pop_front() {
            for &(m, _) in &self.adjacency[n.0] {
                if !seen[m.0] {
                    seen[m.0] = true;
                    queue.push_back(m);
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Validation(format!(
                "topology is disconnected: `{}` unreachable from `{}`",
                self.nodes[i].name, self.nodes[0].name
            )));
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.0]
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.by_name.get(name).copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Neighbors of `n` with the connecting link, sorted by neighbor id.
    pub fn neighbors(&self, n: NodeId) -> &[(NodeId, LinkId)] {
        &self.adjacency[n.0]
    }

    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<LinkId> {
        self.adjacency[a.0].iter().find(|(m, _)| *m == b).map(|&(_, l)| l)
    }

    /// Canonical plain-text listing used for golden comparisons.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "nodes {}", self.nodes.len());
        for n in &self.nodes {
            match n.coords {
                Some((lon, lat)) => {
                    let _ = writeln!(out, "node {} {lon:.2} {lat:.2}", n.name);
                }
                None => {
                    let _ = writeln!(out, "node {}", n.name);
                }
            }
        }
        let _ = writeln!(out, "links {}", self.links.len());
        for l in &self.links {
            let _ = writeln!(
                out,
                "link {} {} {} {:.1} km {} spans",
                l.name,
                self.nodes[l.a.0].name,
                self.nodes[l.b.0].name,
                l.length_km,
                l.spans.len()
            );
        }
        out
    }
}
