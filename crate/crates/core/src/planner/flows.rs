use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::growth::{estimate_final_traffic, grow_traffic, GrowthModel};
use super::state::{PlanState, Snapshot};
use crate::error::{Error, Result};
use crate::netgraph::{NodeId, SpectrumAssignment};
use crate::rcsa::{
    order_demands, place_demand, ActivationOrder, Demand, DemandId, LpId, PlanContext, SelectionMode, TraceRecord,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flow {
    Proactive,
    Incremental,
    IncrementalMax,
}

impl Flow {
    pub const ALL: [Flow; 3] = [Flow::Proactive, Flow::Incremental, Flow::IncrementalMax];

    pub fn name(self) -> &'static str {
        match self {
            Flow::Proactive => "proactive",
            Flow::Incremental => "incremental",
            Flow::IncrementalMax => "incremental-max",
        }
    }
}

impl fmt::Display for Flow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Flow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Flow::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown flow `{s}`")))
    }
}

/// One source-destination pair with its first-period ART.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandSpec {
    pub source: NodeId,
    pub destination: NodeId,
    pub gbps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowParams {
    pub periods: u32,
    pub overhead: f64,
    pub growth: GrowthModel,
    pub seed: u64,
    pub realization: u64,
    pub trace: bool,
}

#[derive(Debug, Clone)]
pub struct FlowRun {
    /// State at the end of each period, period 1 first.
    pub snapshots: Vec<Snapshot>,
    pub trace: Vec<TraceRecord>,
}

/// ART of every demand for periods 1..=periods.
pub fn traffic_trajectory(initial: &[f64], params: &FlowParams) -> Vec<Vec<f64>> {
    let mut out = vec![initial.to_vec()];
    for t in 2..=params.periods {
        let next = grow_traffic(out.last().unwrap(), t, &params.growth, params.seed, params.realization);
        out.push(next);
    }
    out
}

/// Keeps the leading lightpaths (placement order) whose cumulative rate first
/// reaches the demand's ART and deactivates the rest.
pub fn deactivate_overprovisioned(state: &mut PlanState, demand: DemandId, reserve: bool) -> Result<()> {
    let art = state.demand(demand).art_gbps;
    let lps = state.demand(demand).lightpaths.clone();
    let mut acc = 0.0;
    for lp in lps {
        if !state.lightpath(lp).active {
            continue;
        }
        if acc >= art {
            state.deactivate(lp, reserve)?;
        } else {
            acc += state.lightpath(lp).rate();
        }
    }
    state.refresh_shortfall(demand);
    Ok(())
}

/// Activates inactive lightpaths of `demand` until its ART is covered.
/// Lightpaths whose spectrum was released get the first feasible position;
/// those with none available stay inactive.
pub fn activate_inactive(ctx: &PlanContext<'_>, state: &mut PlanState, demand: DemandId) -> Result<Vec<LpId>> {
    let mut inactive: Vec<LpId> = state
        .demand(demand)
        .lightpaths
        .iter()
        .copied()
        .filter(|&lp| !state.lightpath(lp).active)
        .collect();
    if ctx.options.activation_order == ActivationOrder::DescendingRate {
        // Stable sort keeps placement order among equal rates.
        inactive.sort_by(|a, b| state.lightpath(*b).rate().total_cmp(&state.lightpath(*a).rate()));
    }
    let mut activated = Vec::new();
    for lp in inactive {
        if state.active_rate(demand) >= state.demand(demand).art_gbps {
            break;
        }
        if activate_one(ctx, state, lp)? {
            activated.push(lp);
        }
    }
    state.refresh_shortfall(demand);
    Ok(activated)
}

fn activate_one(ctx: &PlanContext<'_>, state: &mut PlanState, lp: LpId) -> Result<bool> {
    let l = state.lightpath(lp);
    if l.assignment.is_some() {
        state.activate_reserved(lp)?;
        return Ok(true);
    }
    if ctx.options.reserve_inactive_spectrum {
        return Err(Error::Validation(format!(
            "inactive lightpath {} lost its reservation",
            lp.0
        )));
    }
    let (links, config) = (l.links.clone(), l.config);
    match l.group {
        Some((gid, _)) => {
            let Some(block) = ctx.feasible_block(state.grid(), &links, &config)? else {
                return Ok(false);
            };
            state.rehome_group(gid, block)?;
            state.activate_reserved(lp)?;
        }
        None => {
            let Some((band, start)) = ctx.feasible_fit(state.grid(), &links, &config)? else {
                return Ok(false);
            };
            state.activate_at(lp, SpectrumAssignment::new(band, start, config.width_slots()))?;
        }
    }
    Ok(true)
}

/// Releases all spectrum and re-activates the active lightpaths in placement
/// order at their first feasible positions. Without reservations the initial
/// plan's positions are provisional; this packs the first-period deployment.
fn reassign_active(ctx: &PlanContext<'_>, state: &mut PlanState) -> Result<()> {
    let active: Vec<LpId> = state.lightpaths().iter().filter(|l| l.active).map(|l| l.id).collect();
    for &lp in &active {
        state.deactivate(lp, false)?;
    }
    for &lp in &active {
        activate_one(ctx, state, lp)?;
    }
    for d in 0..state.demands().len() {
        state.refresh_shortfall(DemandId(d));
    }
    Ok(())
}

fn set_arts(state: &mut PlanState, arts: &[f64]) {
    for (d, &a) in arts.iter().enumerate() {
        state.set_art(DemandId(d), a);
        state.refresh_shortfall(DemandId(d));
    }
}

/// Runs one flow over all periods for one traffic realization.
pub fn run_flow(ctx: &PlanContext<'_>, flow: Flow, demands: &[DemandSpec], params: &FlowParams) -> Result<FlowRun> {
    if params.periods == 0 {
        return Err(Error::Validation("periods must be at least 1".into()));
    }
    params.growth.validate()?;
    if !(params.overhead >= 0.0) {
        return Err(Error::Validation(format!(
            "overhead must be >= 0, got {}",
            params.overhead
        )));
    }
    for d in demands {
        if d.source == d.destination || !(d.gbps >= 0.0) {
            return Err(Error::Validation(format!(
                "invalid demand {}-{} of {} Gbit/s",
                d.source.0, d.destination.0, d.gbps
            )));
        }
    }

    let initial: Vec<f64> = demands.iter().map(|d| d.gbps).collect();
    let arts = traffic_trajectory(&initial, params);
    let order = order_demands(
        demands.iter().enumerate().map(|(i, d)| (i, d.source, d.destination)),
        ctx.topology,
    )?;
    let table = demands
        .iter()
        .enumerate()
        .map(|(i, d)| Demand::new(DemandId(i), d.source, d.destination, d.gbps))
        .collect();
    let mut state = PlanState::new(ctx.topology, table);
    if params.trace {
        state.enable_trace();
    }

    let mode = match flow {
        Flow::IncrementalMax => SelectionMode::Highest,
        _ => SelectionMode::JustEnough,
    };
    let reserve = ctx.options.reserve_inactive_spectrum;

    if flow == Flow::Proactive {
        for (d, &a) in initial.iter().enumerate() {
            let target = estimate_final_traffic(a, params.periods, params.growth.mean, params.overhead);
            state.set_art(DemandId(d), target);
        }
        for &d in &order {
            place_demand(ctx, &mut state, DemandId(d), mode)?;
        }
        set_arts(&mut state, &arts[0]);
        for &d in &order {
            deactivate_overprovisioned(&mut state, DemandId(d), reserve)?;
        }
        if !reserve {
            reassign_active(ctx, &mut state)?;
        }
    }

    let mut snapshots = Vec::with_capacity(params.periods as usize);
    for t in 1..=params.periods {
        state.set_period(t);
        set_arts(&mut state, &arts[t as usize - 1]);
        if flow == Flow::Proactive {
            for &d in &order {
                activate_inactive(ctx, &mut state, DemandId(d))?;
            }
        }
        for &d in &order {
            let id = DemandId(d);
            if state.active_rate(id) < state.demand(id).art_gbps {
                place_demand(ctx, &mut state, id, mode)?;
            }
        }
        state.check_integrity()?;
        snapshots.push(state.snapshot());
    }
    Ok(FlowRun {
        snapshots,
        trace: state.take_trace(),
    })
}
