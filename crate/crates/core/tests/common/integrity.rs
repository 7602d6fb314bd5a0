//! Post-hoc checks of a plan snapshot, rebuilt from scratch.

use eonplan_core::netgraph::{LinkId, Span, Topology, SLOTS_PER_BAND};
use eonplan_core::planner::Snapshot;
use eonplan_core::qot::{estimate_snr, QotParams, SnrQuery};

/// Slots held by more than one lightpath or comb block.
pub fn double_bookings(snap: &Snapshot, links: usize) -> usize {
    let mut count = vec![[[0u32; SLOTS_PER_BAND]; 2]; links];
    let mut mark = |path: &[LinkId], band: usize, slots: std::ops::Range<usize>| {
        for l in path {
            for s in slots.clone() {
                count[l.0][band][s] += 1;
            }
        }
    };
    for lp in &snap.lightpaths {
        if lp.group.is_none() {
            if let Some(a) = lp.assignment {
                mark(&lp.links, a.band.index(), a.slots());
            }
        }
    }
    for g in &snap.groups {
        if let Some(a) = g.block_assignment() {
            mark(&g.path, a.band.index(), a.slots());
        }
    }
    count.iter().flatten().flatten().filter(|&&c| c > 1).count()
}

/// Active lightpaths whose EOL SNR, recomputed from the QoT model, is below
/// the required SNR of their configuration.
pub fn snr_violations(snap: &Snapshot, topo: &Topology, qot: &QotParams) -> Vec<(usize, f64, f64)> {
    let mut bad = Vec::new();
    for lp in snap.lightpaths.iter().filter(|l| l.active) {
        let Some(a) = lp.assignment else {
            bad.push((lp.id.0, f64::NAN, lp.config.req_snr_db));
            continue;
        };
        let spans: Vec<&[Span]> = lp.links.iter().map(|l| topo.link(*l).spans.as_slice()).collect();
        let q = SnrQuery {
            links: &spans,
            assignment: a,
            mws_line: lp.group.is_some(),
            interferers: None,
        };
        let snr = estimate_snr(&q, qot, true)
            .expect("assignment inside a band")
            .snr_total_db;
        if snr + 1e-9 < lp.config.req_snr_db {
            bad.push((lp.id.0, snr, lp.config.req_snr_db));
        }
    }
    bad
}

/// Demands neither met by active lightpaths nor flagged with the right shortfall.
pub fn unaccounted_demands(snap: &Snapshot) -> usize {
    snap.demands
        .iter()
        .filter(|d| {
            let active: f64 = d
                .lightpaths
                .iter()
                .map(|lp| &snap.lightpaths[lp.0])
                .filter(|l| l.active)
                .map(|l| l.rate())
                .sum();
            let met = active + 1e-9 >= d.art_gbps;
            let flagged = d.underprovisioned && (d.shortfall_gbps - (d.art_gbps - active)).abs() < 1e-6;
            !(met && !d.underprovisioned) && !flagged
        })
        .count()
}
