mod common;

use common::fixture::Net;
use eonplan_core::experiment::{Experiment, RunConfig};
use eonplan_core::netgraph::Band;
use eonplan_core::planner::{
    activate_inactive, deactivate_overprovisioned, run_flow, traffic_trajectory, DemandSpec, Flow, FlowParams,
    GrowthModel, Snapshot,
};
use eonplan_core::rcsa::{place_demand, DemandId, PlanOptions, SelectionMode, TraceEvent};
use eonplan_core::report::{aggregate, compute_metrics, emit, panel_a, panel_b, panel_c, panel_d};

fn params(periods: u32, growth: GrowthModel, overhead: f64) -> FlowParams {
    FlowParams {
        periods,
        overhead,
        growth,
        seed: 42,
        realization: 0,
        trace: false,
    }
}

fn specs(net: &Net, demands: &[(&str, &str, f64)]) -> Vec<DemandSpec> {
    demands
        .iter()
        .map(|(s, t, g)| DemandSpec {
            source: net.node(s),
            destination: net.node(t),
            gbps: *g,
        })
        .collect()
}

#[test]
fn deactivation_keeps_leading_cover_and_frees_rest() {
    let net = Net::pair(240.0);
    let ctx = net.ctx(PlanOptions {
        mws: false,
        ..PlanOptions::default()
    });
    let mut st = net.state(&[("A", "B", 5000.0)]);
    let r = place_demand(&ctx, &mut st, DemandId(0), SelectionMode::Highest).unwrap();
    assert!(r.placed.len() >= 3);
    let first = st.lightpath(r.placed[0]).rate();

    st.set_art(DemandId(0), first);
    deactivate_overprovisioned(&mut st, DemandId(0), false).unwrap();
    assert!(st.lightpath(r.placed[0]).active);
    for &lp in &r.placed[1..] {
        let l = st.lightpath(lp);
        assert!(!l.active && l.assignment.is_none());
    }
    let links = st.lightpath(r.placed[0]).links.clone();
    let w = st.lightpath(r.placed[0]).config.width_slots();
    assert!(!st.grid().is_occupied(links[0], Band::C, w));
    assert_eq!(st.active_rate(DemandId(0)), first);
    st.check_integrity().unwrap();

    st.set_art(DemandId(0), 5000.0);
    let back = activate_inactive(&ctx, &mut st, DemandId(0)).unwrap();
    assert_eq!(back.len(), r.placed.len() - 1);
    assert!(st.active_rate(DemandId(0)) >= 5000.0);
    st.check_integrity().unwrap();
}

#[test]
fn reserved_deactivation_keeps_slots() {
    let net = Net::pair(240.0);
    let ctx = net.ctx(PlanOptions {
        mws: false,
        reserve_inactive_spectrum: true,
        ..PlanOptions::default()
    });
    let mut st = net.state(&[("A", "B", 5000.0)]);
    let r = place_demand(&ctx, &mut st, DemandId(0), SelectionMode::Highest).unwrap();
    let last = *r.placed.last().unwrap();
    let a = st.lightpath(last).assignment.unwrap();
    st.deactivate(last, true).unwrap();
    assert!(!st.lightpath(last).active);
    assert_eq!(st.lightpath(last).assignment, Some(a));
    assert!(st.grid().is_occupied(st.lightpath(last).links[0], a.band, a.start));
    st.activate_reserved(last).unwrap();
    assert!(st.lightpath(last).active);

    st.deactivate(last, false).unwrap();
    assert!(st.activate_reserved(last).is_err());
}

#[test]
fn comb_block_released_only_with_last_line() {
    let net = Net::pair(240.0);
    let ctx = net.ctx(PlanOptions::default());
    let mut st = net.state(&[("A", "B", 1.0)]);
    st.set_art(DemandId(0), 4.0 * 1000.0);
    let r = place_demand(&ctx, &mut st, DemandId(0), SelectionMode::Highest).unwrap();
    let gid = *r.groups.first().expect("a comb is formed");
    let lines: Vec<_> = st.group(gid).lines.iter().flatten().copied().collect();
    for &lp in &lines[1..] {
        st.deactivate(lp, false).unwrap();
        assert!(st.group(gid).block.is_some());
    }
    st.deactivate(lines[0], false).unwrap();
    assert!(st.group(gid).block.is_none());
    st.check_integrity().unwrap();
}

#[test]
fn incremental_max_uses_widest_on_empty_network() {
    let net = Net::triangle();
    let ctx = net.ctx(PlanOptions::default());
    let demands = specs(&net, &[("A", "B", 300.0), ("B", "C", 500.0), ("A", "C", 100.0)]);
    let run = run_flow(
        &ctx,
        Flow::IncrementalMax,
        &demands,
        &params(3, GrowthModel::default(), 0.0),
    )
    .unwrap();
    for s in &run.snapshots {
        assert!(s
            .lightpaths
            .iter()
            .filter(|l| l.active)
            .all(|l| l.config.bandwidth_ghz == 150.0));
    }
}

#[test]
fn proactive_without_variance_places_nothing_after_start() {
    let net = Net::triangle();
    let ctx = net.ctx(PlanOptions::default());
    let demands = specs(&net, &[("A", "B", 400.0), ("B", "C", 700.0), ("A", "C", 250.0)]);
    let growth = GrowthModel { mean: 0.25, std: 0.0 };
    let mut p = params(6, growth, 0.25);
    p.trace = true;
    let run = run_flow(&ctx, Flow::Proactive, &demands, &p).unwrap();
    let first = run.snapshots[0].lightpaths.len();
    assert!(run.snapshots.iter().all(|s| s.lightpaths.len() == first));
    assert!(run
        .trace
        .iter()
        .filter(|t| t.period >= 2)
        .all(|t| t.event == TraceEvent::Activate || t.event == TraceEvent::Deactivate));
    assert!(run
        .snapshots
        .iter()
        .all(|s| s.demands.iter().all(|d| !d.underprovisioned)));
}

#[test]
fn trajectory_follows_zero_variance_growth() {
    let p = params(4, GrowthModel { mean: 0.5, std: 0.0 }, 0.0);
    let t = traffic_trajectory(&[100.0, 40.0], &p);
    assert_eq!(
        t,
        vec![
            vec![100.0, 40.0],
            vec![150.0, 60.0],
            vec![225.0, 90.0],
            vec![337.5, 135.0]
        ]
    );
}

#[test]
fn every_flow_covers_art_on_small_network() {
    let net = Net::triangle();
    let ctx = net.ctx(PlanOptions::default());
    let demands = specs(&net, &[("A", "B", 400.0), ("B", "C", 700.0), ("A", "C", 250.0)]);
    for flow in Flow::ALL {
        let run = run_flow(&ctx, flow, &demands, &params(5, GrowthModel::default(), 0.25)).unwrap();
        for s in &run.snapshots {
            for d in &s.demands {
                let active: f64 = d
                    .lightpaths
                    .iter()
                    .map(|i| &s.lightpaths[i.0])
                    .filter(|l| l.active)
                    .map(|l| l.rate())
                    .sum();
                assert!(active >= d.art_gbps, "{flow} period {} demand {}", s.period, d.id.0);
            }
        }
    }
}

#[test]
fn invalid_flow_inputs_rejected() {
    let net = Net::pair(240.0);
    let ctx = net.ctx(PlanOptions::default());
    let demands = specs(&net, &[("A", "B", 100.0)]);
    assert!(run_flow(
        &ctx,
        Flow::Incremental,
        &demands,
        &params(0, GrowthModel::default(), 0.0)
    )
    .is_err());
    assert!(run_flow(
        &ctx,
        Flow::Incremental,
        &demands,
        &params(2, GrowthModel::default(), -0.1)
    )
    .is_err());
    let neg = GrowthModel { mean: 0.1, std: -1.0 };
    assert!(run_flow(&ctx, Flow::Incremental, &demands, &params(2, neg, 0.0)).is_err());
    let self_loop = specs(&net, &[("A", "A", 100.0)]);
    assert!(run_flow(
        &ctx,
        Flow::Incremental,
        &self_loop,
        &params(2, GrowthModel::default(), 0.0)
    )
    .is_err());
}

#[test]
fn snapshot_jsonl_round_trip() {
    let net = Net::triangle();
    let ctx = net.ctx(PlanOptions::default());
    let demands = specs(&net, &[("A", "B", 4000.0), ("B", "C", 700.0)]);
    let run = run_flow(
        &ctx,
        Flow::Proactive,
        &demands,
        &params(3, GrowthModel::default(), 0.25),
    )
    .unwrap();
    for s in &run.snapshots {
        let back = Snapshot::from_jsonl(&s.to_jsonl()).unwrap();
        assert_eq!(&back, s);
    }
    assert!(Snapshot::from_jsonl("{\"kind\":\"nope\"}\n").is_err());
}

#[test]
fn reports_rebuild_from_saved_snapshots() {
    let exp = Experiment::new(RunConfig {
        realizations: 3,
        periods: 4,
        ..RunConfig::default()
    })
    .unwrap();
    let snaps = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let results = exp.run(Some(2), Some(snaps.path())).unwrap();
    let pairs: Vec<_> = results.iter().map(|r| (r.flow, r.aggregate.clone())).collect();
    emit(out.path(), &pairs).unwrap();

    for flow in Flow::ALL {
        let metrics: Vec<Vec<_>> = (0..3)
            .map(|r| {
                (1..=4)
                    .map(|t| {
                        let p = snaps
                            .path()
                            .join(flow.name())
                            .join(format!("r{r}"))
                            .join(format!("period-{t}.jsonl"));
                        compute_metrics(&Snapshot::from_jsonl(&std::fs::read_to_string(p).unwrap()).unwrap())
                    })
                    .collect()
            })
            .collect();
        let agg = aggregate(&metrics).unwrap();
        let read =
            |panel: &str| std::fs::read_to_string(out.path().join(format!("{}_{panel}.csv", flow.name()))).unwrap();
        assert_eq!(panel_a(&agg), read("a_traffic"));
        assert_eq!(panel_b(&agg), read("b_lightpaths"));
        assert_eq!(panel_c(&agg), read("c_lasers"));
        assert_eq!(panel_d(&agg), read("d_bandwidth"));
    }
}
