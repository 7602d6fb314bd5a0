mod common;

use common::fixture::Net;
use eonplan_core::netgraph::{Band, Span, SpectrumAssignment};
use eonplan_core::qot::{estimate_snr, QotParams, SnrQuery};
use eonplan_core::rcsa::{form_mws, place_demand, select_configuration, DemandId, PlanOptions, SelectionMode};
use eonplan_core::xcvr::XcvrConfig;
use proptest::prelude::*;

fn cfg(bw: f64, rate: u32, snr: f64) -> XcvrConfig {
    XcvrConfig {
        bandwidth_ghz: bw,
        symbol_rate_gbd: bw / 1.25,
        entropy: 4.0,
        net_rate_gbps: rate,
        req_snr_symbol_db: snr,
        req_snr_db: snr,
    }
}

/// Configurations that meet their EOL SNR at the bottom of band C on `net`'s
/// first link, evaluated directly with the QoT model.
fn feasible_at_start(net: &Net) -> Vec<XcvrConfig> {
    let spans: Vec<&[Span]> = vec![net.topo.links()[0].spans.as_slice()];
    net.catalog
        .configs()
        .iter()
        .copied()
        .filter(|c| {
            let q = SnrQuery {
                links: &spans,
                assignment: SpectrumAssignment::new(Band::C, 0, c.width_slots()),
                mws_line: false,
                interferers: None,
            };
            estimate_snr(&q, &net.qot, true).unwrap().snr_total_db >= c.req_snr_db
        })
        .collect()
}

fn top_rate(net: &Net) -> u32 {
    feasible_at_start(net).iter().map(|c| c.net_rate_gbps).max().unwrap()
}

#[test]
fn highest_prefers_rate_then_narrow() {
    let set = [
        cfg(37.5, 200, 10.0),
        cfg(150.0, 800, 14.0),
        cfg(137.5, 800, 15.0),
        cfg(50.0, 300, 11.0),
    ];
    let c = select_configuration(SelectionMode::Highest, 100.0, &set).unwrap();
    assert_eq!((c.bandwidth_ghz, c.net_rate_gbps), (137.5, 800));
}

#[test]
fn just_enough_takes_narrowest_cover() {
    let set = [
        cfg(37.5, 200, 10.0),
        cfg(50.0, 300, 11.0),
        cfg(50.0, 400, 12.0),
        cfg(150.0, 800, 14.0),
    ];
    let pick = |r: f64| select_configuration(SelectionMode::JustEnough, r, &set).unwrap();
    assert_eq!(pick(150.0).net_rate_gbps, 200);
    assert_eq!(pick(250.0).net_rate_gbps, 300);
    assert_eq!(pick(350.0).net_rate_gbps, 400);
    // Nothing covers the remainder: fall back to the highest rate.
    assert_eq!(pick(1000.0).net_rate_gbps, 800);
}

#[test]
fn empty_feasible_set_selects_nothing() {
    assert_eq!(select_configuration(SelectionMode::JustEnough, 100.0, &[]), None);
    assert_eq!(select_configuration(SelectionMode::Highest, 100.0, &[]), None);
}

#[test]
fn single_link_200g_gets_one_narrow_lightpath() {
    let net = Net::pair(240.0);
    let ctx = net.ctx(PlanOptions::default());
    let mut st = net.state(&[("A", "B", 200.0)]);
    let r = place_demand(&ctx, &mut st, DemandId(0), SelectionMode::JustEnough).unwrap();

    let expect = feasible_at_start(&net)
        .into_iter()
        .filter(|c| c.net_rate_gbps >= 200)
        .min_by(|a, b| {
            a.bandwidth_ghz
                .total_cmp(&b.bandwidth_ghz)
                .then(a.net_rate_gbps.cmp(&b.net_rate_gbps))
        })
        .unwrap();
    assert_eq!(r.placed.len(), 1);
    let lp = st.lightpath(r.placed[0]);
    assert_eq!(lp.config.bandwidth_ghz, expect.bandwidth_ghz);
    assert_eq!(lp.config.net_rate_gbps, expect.net_rate_gbps);
    assert_eq!(
        lp.assignment,
        Some(SpectrumAssignment::new(Band::C, 0, expect.width_slots()))
    );
    assert!(r.shortfall_gbps == 0.0 && !st.demand(DemandId(0)).underprovisioned);
}

#[test]
fn zero_demand_places_nothing() {
    let net = Net::pair(240.0);
    let ctx = net.ctx(PlanOptions::default());
    let mut st = net.state(&[("A", "B", 0.0)]);
    let r = place_demand(&ctx, &mut st, DemandId(0), SelectionMode::JustEnough).unwrap();
    assert!(r.placed.is_empty());
    assert_eq!(r.provisioned_gbps, 0.0);
    assert!(!st.demand(DemandId(0)).underprovisioned);
}

#[test]
fn saturated_path_flags_shortfall() {
    let net = Net::pair(240.0);
    let ctx = net.ctx(PlanOptions::default());
    let mut st = net.state(&[("A", "B", 1.0e7)]);
    let r = place_demand(&ctx, &mut st, DemandId(0), SelectionMode::Highest).unwrap();
    let d = st.demand(DemandId(0));
    assert!(d.underprovisioned);
    assert!((r.shortfall_gbps - (1.0e7 - r.provisioned_gbps)).abs() < 1e-6);
    let l0 = st.lightpath(r.placed[0]).links.clone();
    assert_eq!(st.grid().first_fit(&l0, 3), None);

    // A second attempt has nowhere to go.
    let again = place_demand(&ctx, &mut st, DemandId(0), SelectionMode::Highest).unwrap();
    assert!(again.placed.is_empty());
}

#[test]
fn four_lightpaths_share_one_comb() {
    let net = Net::pair(240.0);
    let rate = top_rate(&net) as f64;
    let ctx = net.ctx(PlanOptions::default());
    let mut st = net.state(&[("A", "B", 4.0 * rate)]);
    let r = place_demand(&ctx, &mut st, DemandId(0), SelectionMode::JustEnough).unwrap();
    assert_eq!(r.groups.len(), 1);
    assert_eq!(r.placed.len(), 4);
    let g = st.group(r.groups[0]);
    let block = g.block_assignment().unwrap();
    for (i, lp) in g.lines.iter().enumerate() {
        let a = st.lightpath(lp.unwrap()).assignment.unwrap();
        assert_eq!(a.start, block.start + i * g.line_width());
        assert_eq!(a.band, block.band);
    }
    assert_eq!(g.lasers_saved(|id| st.lightpath(id).active), 3);
    assert_eq!(r.provisioned_gbps, 4.0 * rate);
}

#[test]
fn three_lines_leave_a_spare_for_growth() {
    let net = Net::pair(240.0);
    let rate = top_rate(&net) as f64;
    let ctx = net.ctx(PlanOptions::default());
    let mut st = net.state(&[("A", "B", 3.0 * rate)]);
    let r = place_demand(&ctx, &mut st, DemandId(0), SelectionMode::JustEnough).unwrap();
    let gid = r.groups[0];
    assert_eq!(st.group(gid).used_lines(), 3);
    assert_eq!(st.group(gid).free_line(), Some(3));
    assert_eq!(st.group(gid).lasers_saved(|id| st.lightpath(id).active), 2);

    st.set_art(DemandId(0), 4.0 * rate);
    let grown = place_demand(&ctx, &mut st, DemandId(0), SelectionMode::JustEnough).unwrap();
    assert!(grown.groups.is_empty());
    assert_eq!(grown.placed.len(), 1);
    assert_eq!(st.lightpath(grown.placed[0]).group, Some((gid, 3)));
    assert_eq!(st.groups().len(), 1);
}

#[test]
fn comb_rejected_when_penalty_breaks_snr() {
    let qot = QotParams {
        mws_penalty_db: 40.0,
        ..QotParams::default()
    };
    let net = Net::new(&["A", "B"], &[("A", "B", 240.0)], qot);
    let rate = top_rate(&net) as f64;
    let ctx = net.ctx(PlanOptions::default());
    let mut st = net.state(&[("A", "B", 4.0 * rate)]);
    let path = net.routes.paths(net.node("A"), net.node("B"))[0].clone();
    let config = *feasible_at_start(&net).iter().max_by_key(|c| c.net_rate_gbps).unwrap();
    assert_eq!(form_mws(&ctx, &mut st, DemandId(0), &path, config, 4).unwrap(), None);

    let r = place_demand(&ctx, &mut st, DemandId(0), SelectionMode::JustEnough).unwrap();
    assert!(r.groups.is_empty());
    assert_eq!(r.placed.len(), 4);
    assert!(r.placed.iter().all(|&lp| st.lightpath(lp).group.is_none()));
}

#[test]
fn comb_disabled_by_option() {
    let net = Net::pair(240.0);
    let rate = top_rate(&net) as f64;
    let ctx = net.ctx(PlanOptions {
        mws: false,
        ..PlanOptions::default()
    });
    let mut st = net.state(&[("A", "B", 4.0 * rate)]);
    let r = place_demand(&ctx, &mut st, DemandId(0), SelectionMode::JustEnough).unwrap();
    assert!(r.groups.is_empty() && st.groups().is_empty());
}

#[test]
fn long_path_prefers_alternate_when_first_is_full() {
    let net = Net::triangle();
    let ctx = net.ctx(PlanOptions::default());
    let mut st = net.state(&[("A", "C", 1.0e6)]);
    let r = place_demand(&ctx, &mut st, DemandId(0), SelectionMode::Highest).unwrap();
    let routes = net.routes.paths(net.node("A"), net.node("C"));
    assert!(routes.len() >= 2);
    let used: std::collections::BTreeSet<_> = r.placed.iter().map(|&lp| st.lightpath(lp).links.clone()).collect();
    assert!(used.contains(&routes[0].links) && used.contains(&routes[1].links));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn just_enough_never_overshoots_by_a_whole_lightpath(steps in 1u32..400) {
        let art = steps as f64 * 25.0;
        let net = Net::pair(400.0);
        let ctx = net.ctx(PlanOptions { mws: false, ..PlanOptions::default() });
        let mut st = net.state(&[("A", "B", art)]);
        let r = place_demand(&ctx, &mut st, DemandId(0), SelectionMode::JustEnough).unwrap();
        let total: f64 = r.placed.iter().map(|&lp| st.lightpath(lp).rate()).sum();
        let last = st.lightpath(*r.placed.last().unwrap()).rate();
        prop_assert!(total >= art);
        prop_assert!(total - last < art);
    }
}
