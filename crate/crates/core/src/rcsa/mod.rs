//! Single-period routing, configuration and spectrum assignment.

mod paths;
mod place;

use serde::{Deserialize, Serialize};

use crate::netgraph::{Band, LinkId, NodeId, SpectrumAssignment};
use crate::xcvr::{GroupId, XcvrConfig};

pub use paths::{k_shortest_paths, order_demands, shortest_path_km, Path, RouteTable};
pub use place::{
    form_mws, place_demand, select_configuration, ActivationOrder, PlacementResult, PlanContext, PlanOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DemandId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LpId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SelectionMode {
    /// Highest rate while several lightpaths are needed, otherwise the
    /// narrowest configuration that covers the remainder.
    JustEnough,
    /// Always the highest-rate feasible configuration.
    Highest,
}

/// Aggregate requested traffic between two nodes and the lightpaths serving it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demand {
    pub id: DemandId,
    pub source: NodeId,
    pub destination: NodeId,
    /// Requested rate for the current period, Gbit/s.
    pub art_gbps: f64,
    /// In placement order.
    pub lightpaths: Vec<LpId>,
    pub underprovisioned: bool,
    pub shortfall_gbps: f64,
}

impl Demand {
    pub fn new(id: DemandId, source: NodeId, destination: NodeId, art_gbps: f64) -> Self {
        Self {
            id,
            source,
            destination,
            art_gbps,
            lightpaths: Vec::new(),
            underprovisioned: false,
            shortfall_gbps: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lightpath {
    pub id: LpId,
    pub demand: DemandId,
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkId>,
    pub config: XcvrConfig,
    /// Held spectrum; `None` only for inactive lightpaths whose spectrum was released.
    pub assignment: Option<SpectrumAssignment>,
    pub active: bool,
    /// Comb group and line index.
    pub group: Option<(GroupId, usize)>,
    pub placed_period: u32,
}

impl Lightpath {
    pub fn rate(&self) -> f64 {
        self.config.net_rate_gbps as f64
    }

    pub fn band(&self) -> Option<Band> {
        self.assignment.map(|a| a.band)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceEvent {
    Place,
    SpareLine,
    Activate,
    Deactivate,
}

/// One placement-level event, written as a JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub event: TraceEvent,
    pub period: u32,
    pub demand: DemandId,
    pub lightpath: LpId,
    pub path: Vec<String>,
    pub bandwidth_ghz: f64,
    pub net_rate_gbps: u32,
    pub band: Option<Band>,
    pub start: Option<usize>,
    pub width: usize,
    pub mws: bool,
}
