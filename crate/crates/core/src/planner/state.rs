use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::{Band, LinkId, SpectrumAssignment, SpectrumGrid, Topology, SLOTS_PER_BAND};
use crate::qot::{Channel, QotParams};
use crate::rcsa::{Demand, DemandId, Lightpath, LpId, Path, TraceEvent, TraceRecord};
use crate::xcvr::{GroupId, MwsGroup, XcvrConfig, MWS_LINES};

/// Full network state of one planning run: occupancy, every lightpath ever
/// placed (active or not), comb groups and the demand table.
///
/// Spectrum ownership: a standalone lightpath with an assignment holds its
/// slots; a comb group with a block holds the whole block, and its member
/// lightpaths share it.
#[derive(Debug, Clone)]
pub struct PlanState {
    grid: SpectrumGrid,
    lightpaths: Vec<Lightpath>,
    groups: Vec<MwsGroup>,
    demands: Vec<Demand>,
    period: u32,
    trace: Option<Vec<TraceRecord>>,
    node_names: Vec<String>,
}

impl PlanState {
    pub fn new(topo: &Topology, demands: Vec<Demand>) -> Self {
        debug_assert!(demands.iter().enumerate().all(|(i, d)| d.id == DemandId(i)));
        Self {
            grid: SpectrumGrid::new(topo.link_count()),
            lightpaths: Vec::new(),
            groups: Vec::new(),
            demands,
            period: 1,
            trace: None,
            node_names: topo.nodes().iter().map(|n| n.name.clone()).collect(),
        }
    }

    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn take_trace(&mut self) -> Vec<TraceRecord> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn grid(&self) -> &SpectrumGrid {
        &self.grid
    }

    pub fn lightpaths(&self) -> &[Lightpath] {
        &self.lightpaths
    }

    pub fn lightpath(&self, id: LpId) -> &Lightpath {
        &self.lightpaths[id.0]
    }

    pub fn groups(&self) -> &[MwsGroup] {
        &self.groups
    }

    pub fn group(&self, id: GroupId) -> &MwsGroup {
        &self.groups[id.0]
    }

    pub fn demands(&self) -> &[Demand] {
        &self.demands
    }

    pub fn demand(&self, id: DemandId) -> &Demand {
        &self.demands[id.0]
    }

    pub fn period(&self) -> u32 {
        self.period
    }

    pub fn set_period(&mut self, period: u32) {
        self.period = period;
    }

    pub fn set_art(&mut self, id: DemandId, art_gbps: f64) {
        self.demands[id.0].art_gbps = art_gbps;
    }

    pub(crate) fn set_shortfall(&mut self, id: DemandId, shortfall_gbps: f64) {
        let d = &mut self.demands[id.0];
        d.underprovisioned = shortfall_gbps > 0.0;
        d.shortfall_gbps = shortfall_gbps.max(0.0);
    }

    /// Sum of active lightpath rates of a demand.
    pub fn active_rate(&self, id: DemandId) -> f64 {
        self.demands[id.0]
            .lightpaths
            .iter()
            .map(|&lp| &self.lightpaths[lp.0])
            .filter(|lp| lp.active)
            .map(Lightpath::rate)
            .sum()
    }

    /// Records the demand's shortfall against its current ART.
    pub fn refresh_shortfall(&mut self, id: DemandId) {
        let short = self.demands[id.0].art_gbps - self.active_rate(id);
        self.set_shortfall(id, short);
    }

    fn record(&mut self, event: TraceEvent, lp: LpId) {
        if self.trace.is_none() {
            return;
        }
        let l = &self.lightpaths[lp.0];
        let rec = TraceRecord {
            event,
            period: self.period,
            demand: l.demand,
            lightpath: l.id,
            path: l.nodes.iter().map(|n| self.node_names[n.0].clone()).collect(),
            bandwidth_ghz: l.config.bandwidth_ghz,
            net_rate_gbps: l.config.net_rate_gbps,
            band: l.assignment.map(|a| a.band),
            start: l.assignment.map(|a| a.start),
            width: l.config.width_slots(),
            mws: l.group.is_some(),
        };
        self.trace.as_mut().unwrap().push(rec);
    }

    fn push_lightpath(
        &mut self,
        demand: DemandId,
        path: &Path,
        config: XcvrConfig,
        assignment: SpectrumAssignment,
        group: Option<(GroupId, usize)>,
    ) -> LpId {
        let id = LpId(self.lightpaths.len());
        self.lightpaths.push(Lightpath {
            id,
            demand,
            nodes: path.nodes.clone(),
            links: path.links.clone(),
            config,
            assignment: Some(assignment),
            active: true,
            group,
            placed_period: self.period,
        });
        self.demands[demand.0].lightpaths.push(id);
        id
    }

    /// Allocates spectrum for and appends a standalone active lightpath.
    pub fn place_single(
        &mut self,
        demand: DemandId,
        path: &Path,
        config: XcvrConfig,
        assignment: SpectrumAssignment,
    ) -> Result<LpId> {
        self.grid.allocate(&path.links, &assignment)?;
        let id = self.push_lightpath(demand, path, config, assignment, None);
        self.record(TraceEvent::Place, id);
        Ok(id)
    }

    /// Allocates a comb block at `(band, start)` and lights `lines` lines.
    pub fn place_group(
        &mut self,
        demand: DemandId,
        path: &Path,
        config: XcvrConfig,
        block: (Band, usize),
        lines: usize,
    ) -> Result<GroupId> {
        debug_assert!((1..=MWS_LINES).contains(&lines));
        let gid = GroupId(self.groups.len());
        let group = MwsGroup {
            id: gid,
            demand,
            source: self.demands[demand.0].source,
            path: path.links.clone(),
            config,
            block: Some(block),
            lines: [None; MWS_LINES],
        };
        self.grid.allocate(&path.links, &group.block_assignment().unwrap())?;
        self.groups.push(group);
        for line in 0..lines {
            self.light_spare_line(gid, line, path)?;
        }
        Ok(gid)
    }

    /// Creates an active lightpath on an unused line of a held comb block.
    pub fn light_spare_line(&mut self, gid: GroupId, line: usize, path: &Path) -> Result<LpId> {
        let g = &self.groups[gid.0];
        if g.lines[line].is_some() {
            return Err(Error::Validation(format!("comb line {line} of group {} in use", gid.0)));
        }
        let assignment = g
            .line_assignment(line)
            .ok_or_else(|| Error::Validation(format!("comb group {} holds no spectrum", gid.0)))?;
        let (demand, config) = (g.demand, g.config);
        let id = self.push_lightpath(demand, path, config, assignment, Some((gid, line)));
        self.groups[gid.0].lines[line] = Some(id);
        self.record(TraceEvent::SpareLine, id);
        Ok(id)
    }

    /// Held comb blocks of `demand` on `links` with an unused line.
    pub fn spare_line(&self, demand: DemandId, links: &[LinkId]) -> Option<(GroupId, usize)> {
        self.groups
            .iter()
            .filter(|g| g.demand == demand && g.block.is_some() && g.path == links)
            .find_map(|g| g.free_line().map(|line| (g.id, line)))
    }

    fn group_has_active_line(&self, gid: GroupId) -> bool {
        self.groups[gid.0]
            .lines
            .iter()
            .flatten()
            .any(|lp| self.lightpaths[lp.0].active)
    }

    /// Marks a lightpath inactive. Without reservation its spectrum (or its
    /// comb block, once no line is active) is released.
    pub fn deactivate(&mut self, lp: LpId, reserve: bool) -> Result<()> {
        if !self.lightpaths[lp.0].active {
            return Ok(());
        }
        self.lightpaths[lp.0].active = false;
        self.record(TraceEvent::Deactivate, lp);
        if reserve {
            return Ok(());
        }
        let l = self.lightpaths[lp.0].clone();
        match l.group {
            None => {
                if let Some(a) = l.assignment {
                    self.grid.release(&l.links, &a)?;
                    self.lightpaths[lp.0].assignment = None;
                }
            }
            Some((gid, _)) => {
                if !self.group_has_active_line(gid) {
                    self.release_group_block(gid)?;
                }
            }
        }
        Ok(())
    }

    fn release_group_block(&mut self, gid: GroupId) -> Result<()> {
        let g = &self.groups[gid.0];
        if let Some(block) = g.block_assignment() {
            let links = g.path.clone();
            self.grid.release(&links, &block)?;
            self.groups[gid.0].block = None;
            for lp in self.groups[gid.0].lines.into_iter().flatten() {
                self.lightpaths[lp.0].assignment = None;
            }
        }
        Ok(())
    }

    /// Activates a lightpath that still holds its spectrum.
    pub fn activate_reserved(&mut self, lp: LpId) -> Result<()> {
        let l = &self.lightpaths[lp.0];
        if l.assignment.is_none() {
            return Err(Error::Validation(format!(
                "lightpath {} has no spectrum to activate on",
                lp.0
            )));
        }
        self.lightpaths[lp.0].active = true;
        self.record(TraceEvent::Activate, lp);
        Ok(())
    }

    /// Gives a released standalone lightpath a new position and activates it.
    pub fn activate_at(&mut self, lp: LpId, assignment: SpectrumAssignment) -> Result<()> {
        let links = self.lightpaths[lp.0].links.clone();
        self.grid.allocate(&links, &assignment)?;
        let l = &mut self.lightpaths[lp.0];
        l.assignment = Some(assignment);
        l.active = true;
        self.record(TraceEvent::Activate, lp);
        Ok(())
    }

    /// Re-allocates a released comb block at a new position.
    pub fn rehome_group(&mut self, gid: GroupId, block: (Band, usize)) -> Result<()> {
        let g = &mut self.groups[gid.0];
        debug_assert!(g.block.is_none());
        g.block = Some(block);
        let a = g.block_assignment().unwrap();
        let links = g.path.clone();
        if let Err(e) = self.grid.allocate(&links, &a) {
            self.groups[gid.0].block = None;
            return Err(e);
        }
        let g = &self.groups[gid.0];
        for (line, lp) in g.lines.iter().enumerate() {
            if let Some(lp) = lp {
                self.lightpaths[lp.0].assignment = g.line_assignment(line);
            }
        }
        Ok(())
    }

    /// Active channels crossing `link`, for beginning-of-life estimates.
    pub fn channels_on_link(&self, link: LinkId, qot: &QotParams) -> Result<Vec<Channel>> {
        self.lightpaths
            .iter()
            .filter(|l| l.active && l.links.contains(&link))
            .filter_map(|l| l.assignment)
            .map(|a| qot.channel(&a))
            .collect()
    }

    /// Rebuilds occupancy from lightpaths and groups with a per-slot counter
    /// and compares it with the grid. Fails on any double booking or drift.
    pub fn check_integrity(&self) -> Result<()> {
        let links = self.grid.link_count();
        let mut count = vec![[[0u8; SLOTS_PER_BAND]; 2]; links];
        let mut mark = |path: &[LinkId], a: &SpectrumAssignment| {
            for l in path {
                for s in a.slots() {
                    count[l.0][a.band.index()][s] += 1;
                }
            }
        };
        for lp in &self.lightpaths {
            if lp.active && lp.assignment.is_none() {
                return Err(Error::Validation(format!(
                    "active lightpath {} holds no spectrum",
                    lp.id.0
                )));
            }
            if lp.group.is_none() {
                if let Some(a) = lp.assignment {
                    mark(&lp.links, &a);
                }
            }
        }
        for g in &self.groups {
            if let Some(a) = g.block_assignment() {
                mark(&g.path, &a);
            }
        }
        for (l, bands) in count.iter().enumerate() {
            for band in Band::ALL {
                for (s, &c) in bands[band.index()].iter().enumerate() {
                    let occupied = self.grid.is_occupied(LinkId(l), band, s);
                    if c > 1 || (c == 1) != occupied {
                        return Err(Error::Occupancy {
                            link: l,
                            band,
                            slot: s,
                            message: if c > 1 {
                                "slot double-booked"
                            } else {
                                "grid out of sync"
                            },
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            period: self.period,
            demands: self.demands.clone(),
            lightpaths: self.lightpaths.clone(),
            groups: self.groups.clone(),
        }
    }
}

/// Immutable copy of a plan state at the end of a period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub period: u32,
    pub demands: Vec<Demand>,
    pub lightpaths: Vec<Lightpath>,
    pub groups: Vec<MwsGroup>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum SnapshotLine {
    Period { period: u32 },
    Demand(Demand),
    Lightpath(Lightpath),
    Group(MwsGroup),
}

impl Snapshot {
    /// Line-delimited JSON: a period header followed by one record per
    /// demand, lightpath and comb group.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |line: &SnapshotLine| {
            out.push_str(&serde_json::to_string(line).expect("snapshot records serialize"));
            out.push('\n');
        };
        push(&SnapshotLine::Period { period: self.period });
        for d in &self.demands {
            push(&SnapshotLine::Demand(d.clone()));
        }
        for l in &self.lightpaths {
            push(&SnapshotLine::Lightpath(l.clone()));
        }
        for g in &self.groups {
            push(&SnapshotLine::Group(g.clone()));
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut snap = Snapshot {
            period: 0,
            demands: Vec::new(),
            lightpaths: Vec::new(),
            groups: Vec::new(),
        };
        let mut saw_header = false;
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let rec: SnapshotLine = serde_json::from_str(line).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            match rec {
                SnapshotLine::Period { period } => {
                    snap.period = period;
                    saw_header = true;
                }
                SnapshotLine::Demand(d) => snap.demands.push(d),
                SnapshotLine::Lightpath(l) => snap.lightpaths.push(l),
                SnapshotLine::Group(g) => snap.groups.push(g),
            }
        }
        if !saw_header {
            return Err(Error::Parse {
                line: 1,
                message: "snapshot lacks a period header".into(),
            });
        }
        Ok(snap)
    }
}
