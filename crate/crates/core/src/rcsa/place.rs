use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{DemandId, LpId, Path, RouteTable, SelectionMode};
use crate::error::Result;
use crate::netgraph::{Band, LinkId, SpectrumAssignment, SpectrumGrid, Topology, MAX_WIDTH, MIN_WIDTH, SLOTS_PER_BAND};
use crate::planner::PlanState;
use crate::qot::{eol_link_noise_ratio, eol_snr_db, QotParams};
use crate::xcvr::{feasible_configs, Catalog, GroupId, XcvrConfig, MWS_LINES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationOrder {
    /// Highest net rate first, ties by placement order.
    DescendingRate,
    Placement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanOptions {
    /// Allow comb (multi-wavelength) sources.
    pub mws: bool,
    pub k_paths: usize,
    /// Inactive lightpaths keep their slots. When false, spectrum is released
    /// on deactivation and searched again on activation.
    pub reserve_inactive_spectrum: bool,
    pub activation_order: ActivationOrder,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            mws: true,
            k_paths: 3,
            reserve_inactive_spectrum: false,
            activation_order: ActivationOrder::DescendingRate,
        }
    }
}

/// Per-(link, band, start, width) end-of-life noise-to-signal ratios,
/// filled on first use. Safe to share between concurrent runs.
#[derive(Debug)]
struct EolTable {
    cells: Vec<OnceLock<f64>>,
}

const WIDTHS: usize = MAX_WIDTH - MIN_WIDTH + 1;

impl EolTable {
    fn new(link_count: usize) -> Self {
        let n = link_count * 2 * SLOTS_PER_BAND * WIDTHS;
        Self {
            cells: (0..n).map(|_| OnceLock::new()).collect(),
        }
    }

    fn get(&self, topo: &Topology, qot: &QotParams, link: LinkId, a: &SpectrumAssignment) -> Result<f64> {
        debug_assert!((MIN_WIDTH..=MAX_WIDTH).contains(&a.width));
        let idx = ((link.0 * 2 + a.band.index()) * SLOTS_PER_BAND + a.start) * WIDTHS + a.width - MIN_WIDTH;
        let cell = &self.cells[idx];
        if let Some(v) = cell.get() {
            return Ok(*v);
        }
        let v = eol_link_noise_ratio(&topo.link(link).spans, a, qot)?;
        Ok(*cell.get_or_init(|| v))
    }
}

/// Read-only inputs shared by every placement of a run.
#[derive(Debug)]
pub struct PlanContext<'a> {
    pub topology: &'a Topology,
    pub routes: &'a RouteTable,
    pub catalog: &'a Catalog,
    pub qot: &'a QotParams,
    pub options: PlanOptions,
    eol: EolTable,
}

impl<'a> PlanContext<'a> {
    pub fn new(
        topology: &'a Topology,
        routes: &'a RouteTable,
        catalog: &'a Catalog,
        qot: &'a QotParams,
        options: PlanOptions,
    ) -> Self {
        Self {
            topology,
            routes,
            catalog,
            qot,
            options,
            eol: EolTable::new(topology.link_count()),
        }
    }

    /// End-of-life SNR (dB, reference bandwidth) of a channel at `a` on `links`.
    pub fn eol_snr(&self, links: &[LinkId], a: &SpectrumAssignment, mws_line: bool) -> Result<f64> {
        let mut ratio = 0.0;
        for &l in links {
            ratio += self.eol.get(self.topology, self.qot, l, a)?;
        }
        Ok(eol_snr_db(ratio, mws_line, self.qot))
    }

    fn comb_feasible(&self, links: &[LinkId], config: &XcvrConfig, block: (Band, usize)) -> Result<bool> {
        let w = config.width_slots();
        for line in 0..MWS_LINES {
            let a = SpectrumAssignment::new(block.0, block.1 + line * w, w);
            if self.eol_snr(links, &a, true)? < config.req_snr_db {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// First position, in first-fit order, where `config` fits and meets its
    /// required SNR.
    pub fn feasible_fit(
        &self,
        grid: &SpectrumGrid,
        links: &[LinkId],
        config: &XcvrConfig,
    ) -> Result<Option<(Band, usize)>> {
        let w = config.width_slots();
        for (band, start) in grid.fit_positions(links, w) {
            let a = SpectrumAssignment::new(band, start, w);
            if self.eol_snr(links, &a, false)? >= config.req_snr_db {
                return Ok(Some((band, start)));
            }
        }
        Ok(None)
    }

    /// First comb block position where all four lines are feasible.
    pub fn feasible_block(
        &self,
        grid: &SpectrumGrid,
        links: &[LinkId],
        config: &XcvrConfig,
    ) -> Result<Option<(Band, usize)>> {
        for pos in grid.fit_positions(links, MWS_LINES * config.width_slots()) {
            if self.comb_feasible(links, config, pos)? {
                return Ok(Some(pos));
            }
        }
        Ok(None)
    }
}

/// Picks a configuration from a nonempty feasible set; `None` if it is empty.
pub fn select_configuration(mode: SelectionMode, remaining_gbps: f64, feasible: &[XcvrConfig]) -> Option<XcvrConfig> {
    let highest = || {
        feasible.iter().copied().min_by(|a, b| {
            b.net_rate_gbps
                .cmp(&a.net_rate_gbps)
                .then(a.bandwidth_ghz.total_cmp(&b.bandwidth_ghz))
                .then(a.req_snr_db.total_cmp(&b.req_snr_db))
        })
    };
    match mode {
        SelectionMode::Highest => highest(),
        SelectionMode::JustEnough => feasible
            .iter()
            .copied()
            .filter(|c| c.net_rate_gbps as f64 >= remaining_gbps)
            .min_by(|a, b| {
                a.bandwidth_ghz
                    .total_cmp(&b.bandwidth_ghz)
                    .then(a.net_rate_gbps.cmp(&b.net_rate_gbps))
                    .then(a.req_snr_db.total_cmp(&b.req_snr_db))
            })
            .or_else(highest),
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlacementResult {
    pub placed: Vec<LpId>,
    pub groups: Vec<GroupId>,
    pub provisioned_gbps: f64,
    pub shortfall_gbps: f64,
}

/// Places lightpaths for `demand` until its requested rate is covered by
/// active lightpaths or its candidate paths are exhausted.
pub fn place_demand(
    ctx: &PlanContext<'_>,
    state: &mut PlanState,
    demand: DemandId,
    mode: SelectionMode,
) -> Result<PlacementResult> {
    let d = state.demand(demand);
    let (s, t, art) = (d.source, d.destination, d.art_gbps);
    let mut result = PlacementResult::default();
    let mut remaining = art - state.active_rate(demand);

    for path in ctx.routes.paths(s, t).iter().take(ctx.options.k_paths) {
        while remaining > 0.0 {
            if ctx.options.mws {
                if let Some((gid, line)) = state.spare_line(demand, &path.links) {
                    // The block passed the penalized check when it was formed.
                    let lp = state.light_spare_line(gid, line, path)?;
                    remaining -= state.lightpath(lp).rate();
                    result.placed.push(lp);
                    continue;
                }
            }

            let mut positions = [None; MAX_WIDTH + 1];
            let feasible = feasible_configs(ctx.catalog, |w| {
                let Some((band, start)) = state.grid().first_fit(&path.links, w) else {
                    return Ok(None);
                };
                positions[w] = Some((band, start));
                ctx.eol_snr(&path.links, &SpectrumAssignment::new(band, start, w), false)
                    .map(Some)
            })?;
            let Some(config) = select_configuration(mode, remaining, &feasible) else {
                break;
            };
            let rate = config.net_rate_gbps as f64;

            let needed = (remaining / rate).ceil() as usize;
            if ctx.options.mws && needed >= 3 {
                let lines = needed.min(MWS_LINES);
                if let Some(gid) = form_mws(ctx, state, demand, path, config, lines)? {
                    remaining -= lines as f64 * rate;
                    result.placed.extend(state.group(gid).lines.iter().flatten());
                    result.groups.push(gid);
                    continue;
                }
            }

            let (band, start) = positions[config.width_slots()].expect("selected width has a fit");
            let a = SpectrumAssignment::new(band, start, config.width_slots());
            result.placed.push(state.place_single(demand, path, config, a)?);
            remaining -= rate;
        }
        if remaining <= 0.0 {
            break;
        }
    }

    state.refresh_shortfall(demand);
    result.provisioned_gbps = state.active_rate(demand);
    result.shortfall_gbps = state.demand(demand).shortfall_gbps;
    Ok(result)
}

/// Binds `lines` (3 or 4) lightpaths of `config` into one comb group at the
/// first-fit block on `path`, if every line stays feasible with the comb
/// penalty. Unused lines keep their slots for later growth.
pub fn form_mws(
    ctx: &PlanContext<'_>,
    state: &mut PlanState,
    demand: DemandId,
    path: &Path,
    config: XcvrConfig,
    lines: usize,
) -> Result<Option<GroupId>> {
    debug_assert!((3..=MWS_LINES).contains(&lines));
    let Some(block) = state.grid().first_fit(&path.links, MWS_LINES * config.width_slots()) else {
        return Ok(None);
    };
    if !ctx.comb_feasible(&path.links, &config, block)? {
        return Ok(None);
    }
    state.place_group(demand, path, config, block, lines).map(Some)
}
