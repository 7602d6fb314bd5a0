//! Multi-period orchestration of the three planning flows.

mod flows;
mod growth;
mod state;

pub use flows::{
    activate_inactive, deactivate_overprovisioned, run_flow, traffic_trajectory, DemandSpec, Flow, FlowParams, FlowRun,
};
pub use growth::{estimate_final_traffic, grow_traffic, GrowthModel};
pub use state::{PlanState, Snapshot};
