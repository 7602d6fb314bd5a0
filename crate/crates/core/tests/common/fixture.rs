//! Small networks with everything needed to call the planner directly.

use eonplan_core::netgraph::{NodeId, Topology};
use eonplan_core::planner::PlanState;
use eonplan_core::qot::QotParams;
use eonplan_core::rcsa::{Demand, DemandId, PlanContext, PlanOptions, RouteTable};
use eonplan_core::xcvr::{Catalog, CatalogParams};

pub struct Net {
    pub topo: Topology,
    pub routes: RouteTable,
    pub catalog: Catalog,
    pub qot: QotParams,
}

impl Net {
    pub fn new(nodes: &[&str], links: &[(&str, &str, f64)], qot: QotParams) -> Self {
        let topo = Topology::from_links(nodes, links, &qot.fiber()).expect("valid topology");
        let n = topo.node_count();
        let pairs = (0..n).flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (NodeId(a), NodeId(b))));
        let routes = RouteTable::build(&topo, pairs, 3);
        let catalog = Catalog::new(&CatalogParams::default()).expect("default catalog");
        Self {
            topo,
            routes,
            catalog,
            qot,
        }
    }

    /// Two nodes joined by one link of `km`.
    pub fn pair(km: f64) -> Self {
        Self::new(&["A", "B"], &[("A", "B", km)], QotParams::default())
    }

    pub fn triangle() -> Self {
        Self::new(
            &["A", "B", "C"],
            &[("A", "B", 240.0), ("B", "C", 320.0), ("A", "C", 400.0)],
            QotParams::default(),
        )
    }

    pub fn ctx(&self, options: PlanOptions) -> PlanContext<'_> {
        PlanContext::new(&self.topo, &self.routes, &self.catalog, &self.qot, options)
    }

    pub fn node(&self, name: &str) -> NodeId {
        self.topo.node_id(name).expect("known node")
    }

    /// Plan state with one demand per `(src, dst, gbps)`.
    pub fn state(&self, demands: &[(&str, &str, f64)]) -> PlanState {
        let ds = demands
            .iter()
            .enumerate()
            .map(|(i, (s, t, g))| Demand::new(DemandId(i), self.node(s), self.node(t), *g))
            .collect();
        PlanState::new(&self.topo, ds)
    }
}
