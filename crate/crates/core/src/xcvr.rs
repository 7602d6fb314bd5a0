//! Bandwidth-variable transceiver catalog and multi-wavelength (comb) sources.
//!
//! Rates follow a gap-adjusted Shannon law for probabilistically shaped QAM:
//! `rate = 2 * Rs * (H - fec)` floored to the rate granularity, with
//! `SNR_sym = 2^H - 1` plus the implementation gap.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::{Band, LinkId, NodeId, SpectrumAssignment, MAX_WIDTH, MIN_WIDTH, SLOT_GHZ};
use crate::qot::lin_to_db;
use crate::rcsa::{DemandId, LpId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatalogParams {
    pub roll_off: f64,
    pub entropy_min: f64,
    pub entropy_max: f64,
    pub entropy_step: f64,
    /// FEC and framing overhead in bit/symbol per polarization.
    pub fec_overhead_bits: f64,
    pub snr_gap_db: f64,
    pub rate_granularity_gbps: u32,
}

impl Default for CatalogParams {
    fn default() -> Self {
        Self {
            roll_off: 0.0625,
            entropy_min: 2.0,
            entropy_max: 6.0,
            entropy_step: 0.25,
            fec_overhead_bits: 0.8,
            snr_gap_db: 1.5,
            rate_granularity_gbps: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XcvrConfig {
    pub bandwidth_ghz: f64,
    pub symbol_rate_gbd: f64,
    pub entropy: f64,
    pub net_rate_gbps: u32,
    /// Required SNR at the symbol rate.
    pub req_snr_symbol_db: f64,
    /// Required SNR in the reference-bandwidth convention used by `qot`.
    pub req_snr_db: f64,
}

impl XcvrConfig {
    pub fn width_slots(&self) -> usize {
        (self.bandwidth_ghz / SLOT_GHZ).round() as usize
    }

    /// Index of the bandwidth option, 0 for 37.5 GHz up to 9 for 150 GHz.
    pub fn bandwidth_index(&self) -> usize {
        self.width_slots() - MIN_WIDTH
    }
}

/// Pre-selected configurations ordered by (bandwidth, rate).
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    configs: Vec<XcvrConfig>,
}

impl Catalog {
    pub fn new(params: &CatalogParams) -> Result<Self> {
        let configs = preselect(&generate_catalog(params)?);
        Ok(Self { configs })
    }

    pub fn from_configs(mut configs: Vec<XcvrConfig>) -> Self {
        sort_configs(&mut configs);
        Self { configs }
    }

    pub fn configs(&self) -> &[XcvrConfig] {
        &self.configs
    }

    /// Distinct slot widths, ascending.
    pub fn widths(&self) -> Vec<usize> {
        let mut w: Vec<usize> = self.configs.iter().map(|c| c.width_slots()).collect();
        w.dedup();
        w
    }

    pub fn with_width(&self, width: usize) -> impl Iterator<Item = &XcvrConfig> {
        self.configs.iter().filter(move |c| c.width_slots() == width)
    }

    pub fn to_csv(&self) -> String {
        catalog_csv(&self.configs)
    }
}

fn sort_configs(configs: &mut [XcvrConfig]) {
    configs.sort_by(|a, b| {
        a.bandwidth_ghz
            .total_cmp(&b.bandwidth_ghz)
            .then(a.net_rate_gbps.cmp(&b.net_rate_gbps))
            .then(a.req_snr_db.total_cmp(&b.req_snr_db))
    });
}

pub fn generate_catalog(params: &CatalogParams) -> Result<Vec<XcvrConfig>> {
    let p = params;
    if !(0.0..=0.2).contains(&p.roll_off) {
        return Err(Error::Validation(format!("roll-off {} outside [0, 0.2]", p.roll_off)));
    }
    if !(p.entropy_step > 0.0) || p.entropy_min < 2.0 || p.entropy_max > 6.0 || p.entropy_min > p.entropy_max {
        return Err(Error::Validation(format!(
            "entropy grid {}..{} step {} must lie within [2, 6] with a positive step",
            p.entropy_min, p.entropy_max, p.entropy_step
        )));
    }
    if p.rate_granularity_gbps == 0 {
        return Err(Error::Validation("rate granularity must be positive".into()));
    }
    let steps = ((p.entropy_max - p.entropy_min) / p.entropy_step + 1e-9).floor() as usize;
    let gran = p.rate_granularity_gbps as f64;
    let mut out = Vec::new();
    for width in MIN_WIDTH..=MAX_WIDTH {
        let bandwidth_ghz = width as f64 * SLOT_GHZ;
        let symbol_rate_gbd = bandwidth_ghz / (1.0 + p.roll_off);
        for i in 0..=steps {
            let entropy = p.entropy_min + i as f64 * p.entropy_step;
            let raw = 2.0 * symbol_rate_gbd * (entropy - p.fec_overhead_bits);
            let net_rate_gbps = ((raw / gran + 1e-9).floor() * gran) as u32;
            if net_rate_gbps == 0 {
                continue;
            }
            let req_snr_symbol_db = lin_to_db(2f64.powf(entropy) - 1.0) + p.snr_gap_db;
            let req_snr_db = req_snr_symbol_db - lin_to_db(1.0 + p.roll_off);
            out.push(XcvrConfig {
                bandwidth_ghz,
                symbol_rate_gbd,
                entropy,
                net_rate_gbps,
                req_snr_symbol_db,
                req_snr_db,
            });
        }
    }
    sort_configs(&mut out);
    Ok(out)
}

/// Keeps, per bandwidth, the configurations not dominated by another with a
/// rate at least as high and a required SNR at most as high. Among equal
/// (bandwidth, rate) pairs the lowest required SNR survives.
pub fn preselect(catalog: &[XcvrConfig]) -> Vec<XcvrConfig> {
    let mut sorted = catalog.to_vec();
    // Bandwidth asc, rate desc, SNR asc: a config survives iff its SNR is
    // strictly below every SNR seen so far in its bandwidth.
    sorted.sort_by(|a, b| {
        a.bandwidth_ghz
            .total_cmp(&b.bandwidth_ghz)
            .then(b.net_rate_gbps.cmp(&a.net_rate_gbps))
            .then(a.req_snr_db.total_cmp(&b.req_snr_db))
    });
    let mut out = Vec::new();
    let mut current_bw = f64::NAN;
    let mut best_snr = f64::INFINITY;
    for c in sorted {
        if c.bandwidth_ghz != current_bw {
            current_bw = c.bandwidth_ghz;
            best_snr = f64::INFINITY;
        }
        if c.req_snr_db < best_snr {
            best_snr = c.req_snr_db;
            out.push(c);
        }
    }
    sort_configs(&mut out);
    out
}

/// Filters the catalog by SNR feasibility. `snr_for_width` returns the
/// estimated SNR of the candidate at its tentative position for a slot width,
/// or `None` when no spectrum of that width is available.
pub fn feasible_configs<F>(catalog: &Catalog, mut snr_for_width: F) -> Result<Vec<XcvrConfig>>
where
    F: FnMut(usize) -> Result<Option<f64>>,
{
    let mut out = Vec::new();
    for width in catalog.widths() {
        let Some(snr) = snr_for_width(width)? else {
            continue;
        };
        out.extend(catalog.with_width(width).filter(|c| c.req_snr_db <= snr).copied());
    }
    Ok(out)
}

pub fn catalog_csv(configs: &[XcvrConfig]) -> String {
    let mut s = String::from("bandwidth_ghz,symbol_rate_gbd,entropy,net_rate_gbps,req_snr_db\n");
    for c in configs {
        let _ = writeln!(
            s,
            "{},{:.4},{:.2},{},{:.4}",
            c.bandwidth_ghz, c.symbol_rate_gbd, c.entropy, c.net_rate_gbps, c.req_snr_db
        );
    }
    s
}

pub const MWS_LINES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupId(pub usize);

/// A 4-line fixed-FSR comb source feeding lightpaths of one demand on one
/// path. The FSR equals the line bandwidth, so the lines tile a contiguous
/// block of `4 * line_width` slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MwsGroup {
    pub id: GroupId,
    pub demand: DemandId,
    pub source: NodeId,
    pub path: Vec<LinkId>,
    pub config: XcvrConfig,
    /// Block position; `None` while no line is active and the block is released.
    pub block: Option<(Band, usize)>,
    pub lines: [Option<LpId>; MWS_LINES],
}

impl MwsGroup {
    pub fn line_width(&self) -> usize {
        self.config.width_slots()
    }

    pub fn fsr_ghz(&self) -> f64 {
        self.config.bandwidth_ghz
    }

    pub fn block_assignment(&self) -> Option<SpectrumAssignment> {
        self.block
            .map(|(band, start)| SpectrumAssignment::new(band, start, MWS_LINES * self.line_width()))
    }

    pub fn line_assignment(&self, line: usize) -> Option<SpectrumAssignment> {
        let w = self.line_width();
        self.block
            .map(|(band, start)| SpectrumAssignment::new(band, start + line * w, w))
    }

    pub fn used_lines(&self) -> usize {
        self.lines.iter().flatten().count()
    }

    pub fn free_line(&self) -> Option<usize> {
        self.lines.iter().position(Option::is_none)
    }

    /// Lasers saved on the transmitter side: active lines share one laser.
    pub fn lasers_saved(&self, is_active: impl Fn(LpId) -> bool) -> usize {
        let active = self.lines.iter().flatten().filter(|&&lp| is_active(lp)).count();
        active.saturating_sub(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(bw: f64, rate: u32, snr: f64) -> XcvrConfig {
        XcvrConfig {
            bandwidth_ghz: bw,
            symbol_rate_gbd: bw / 1.0625,
            entropy: 0.0,
            net_rate_gbps: rate,
            req_snr_symbol_db: snr,
            req_snr_db: snr,
        }
    }

    #[test]
    fn catalog_has_ten_bandwidths() {
        let cat = generate_catalog(&CatalogParams::default()).unwrap();
        let mut bws: Vec<f64> = cat.iter().map(|c| c.bandwidth_ghz).collect();
        bws.dedup();
        let expected: Vec<f64> = (0..10).map(|i| 37.5 + 12.5 * i as f64).collect();
        assert_eq!(bws, expected);
        assert_eq!(Catalog::new(&CatalogParams::default()).unwrap().widths().len(), 10);
    }

    #[test]
    fn shannon_inverse_at_two_bits() {
        let p = CatalogParams {
            snr_gap_db: 0.0,
            ..Default::default()
        };
        let cat = generate_catalog(&p).unwrap();
        let c = cat.iter().find(|c| c.entropy == 2.0).unwrap();
        assert!((c.req_snr_symbol_db - 10.0 * 3f64.log10()).abs() < 1e-12);
        assert!((c.req_snr_symbol_db - 4.77).abs() < 0.005);
    }

    #[test]
    fn rates_are_granular_and_snr_grows_with_entropy() {
        let cat = generate_catalog(&CatalogParams::default()).unwrap();
        for c in &cat {
            assert_eq!(c.net_rate_gbps % 50, 0);
        }
        for w in cat.windows(2) {
            if w[0].bandwidth_ghz == w[1].bandwidth_ghz && w[0].entropy < w[1].entropy {
                assert!(w[0].req_snr_db < w[1].req_snr_db);
            }
        }
    }

    #[test]
    fn preselected_rate_sorts_with_snr() {
        let cat = Catalog::new(&CatalogParams::default()).unwrap();
        let mut wide: Vec<_> = cat.with_width(12).copied().collect();
        let by_rate: Vec<u32> = wide.iter().map(|c| c.net_rate_gbps).collect();
        wide.sort_by(|a, b| a.req_snr_db.total_cmp(&b.req_snr_db));
        let by_snr: Vec<u32> = wide.iter().map(|c| c.net_rate_gbps).collect();
        assert_eq!(by_rate, by_snr);
        assert!(by_rate.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn invalid_grid_rejected() {
        for p in [
            CatalogParams {
                roll_off: 0.3,
                ..Default::default()
            },
            CatalogParams {
                entropy_min: 1.0,
                ..Default::default()
            },
            CatalogParams {
                entropy_step: 0.0,
                ..Default::default()
            },
            CatalogParams {
                entropy_max: 7.0,
                ..Default::default()
            },
        ] {
            assert!(matches!(generate_catalog(&p), Err(Error::Validation(_))));
        }
    }

    #[test]
    fn dominance_examples() {
        let a = cfg(50.0, 200, 10.0);
        let b = cfg(50.0, 200, 12.0);
        assert_eq!(preselect(&[a, b]), vec![a]);

        let pareto = vec![cfg(50.0, 100, 5.0), cfg(50.0, 200, 10.0), cfg(75.0, 300, 9.0)];
        assert_eq!(preselect(&pareto), pareto);

        let mixed = vec![cfg(50.0, 100, 5.0), cfg(50.0, 100, 6.0), cfg(50.0, 200, 8.0)];
        assert_eq!(preselect(&mixed).len(), 2);
    }

    #[test]
    fn feasibility_filter_uses_per_width_snr() {
        let cat = Catalog::new(&CatalogParams::default()).unwrap();
        let none = feasible_configs(&cat, |_| Ok(Some(-10.0))).unwrap();
        assert!(none.is_empty());
        let all = feasible_configs(&cat, |_| Ok(Some(100.0))).unwrap();
        assert_eq!(all.len(), cat.configs().len());
        let only_narrow = feasible_configs(&cat, |w| Ok((w == 3).then_some(100.0))).unwrap();
        assert!(only_narrow.iter().all(|c| c.width_slots() == 3));
        let csv = cat.to_csv();
        assert!(csv.starts_with("bandwidth_ghz,symbol_rate_gbd,entropy,net_rate_gbps,req_snr_db\n"));
        assert_eq!(csv.lines().count(), cat.configs().len() + 1);
    }

    proptest::proptest! {
        #[test]
        fn preselect_is_antichain(raw in proptest::collection::vec((0usize..3, 1u32..8, 0.0f64..20.0), 1..40)) {
            let configs: Vec<XcvrConfig> = raw
                .iter()
                .map(|&(b, r, s)| cfg(37.5 + 12.5 * b as f64, r * 50, s))
                .collect();
            let kept = preselect(&configs);
            for (i, a) in kept.iter().enumerate() {
                for (j, b) in kept.iter().enumerate() {
                    if i != j && a.bandwidth_ghz == b.bandwidth_ghz {
                        proptest::prop_assert!(!(b.net_rate_gbps >= a.net_rate_gbps && b.req_snr_db <= a.req_snr_db));
                    }
                }
            }
            // every dropped config is dominated by a kept one
            for c in &configs {
                proptest::prop_assert!(kept.iter().any(|k| k.bandwidth_ghz == c.bandwidth_ghz
                    && k.net_rate_gbps >= c.net_rate_gbps && k.req_snr_db <= c.req_snr_db));
            }
        }
    }
}
