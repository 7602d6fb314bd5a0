//! Per-period metrics, aggregation over realizations and CSV emission.
//!
//! Emitted files, per flow `<f>`:
//!
//! | file | columns |
//! |------|---------|
//! | `<f>_a_traffic.csv` | `period`, ART and provisioned traffic (mean, std), provisioned / mean ART, underprovisioning |
//! | `<f>_b_lightpaths.csv` | `period`, active lightpaths (mean, std), share of realizations using band L |
//! | `<f>_c_lasers.csv` | `period`, lasers saved by comb sources (mean, std) |
//! | `<f>_d_bandwidth.csv` | `period`, mean active lightpath count per bandwidth, 37.5 to 150 GHz |
//!
//! plus one `summary.txt`. Numbers carry at most 6 significant digits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::{Band, MIN_WIDTH, SLOT_GHZ};
use crate::planner::{Flow, Snapshot};

pub const BANDWIDTH_BINS: usize = 10;

pub fn bin_bandwidth_ghz(bin: usize) -> f64 {
    (MIN_WIDTH + bin) as f64 * SLOT_GHZ
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodMetrics {
    pub period: u32,
    pub art_gbps: f64,
    pub provisioned_gbps: f64,
    /// Provisioned over ART of this realization; 0 without traffic.
    pub provisioned_ratio: f64,
    pub active_lps: usize,
    /// Transmitter side: active lines minus one, summed over comb groups.
    pub lasers_saved: usize,
    pub bandwidth_hist: [usize; BANDWIDTH_BINS],
    pub l_band_in_use: bool,
    pub underprovisioned_demands: usize,
    pub shortfall_gbps: f64,
}

pub fn compute_metrics(snap: &Snapshot) -> PeriodMetrics {
    let active = || snap.lightpaths.iter().filter(|l| l.active);
    let art: f64 = snap.demands.iter().map(|d| d.art_gbps).sum();
    let provisioned: f64 = active().map(|l| l.rate()).sum();
    let mut hist = [0; BANDWIDTH_BINS];
    for l in active() {
        hist[l.config.bandwidth_index()] += 1;
    }
    let lasers_saved = snap
        .groups
        .iter()
        .map(|g| g.lasers_saved(|lp| snap.lightpaths[lp.0].active))
        .sum();
    PeriodMetrics {
        period: snap.period,
        art_gbps: art,
        provisioned_gbps: provisioned,
        provisioned_ratio: if art > 0.0 { provisioned / art } else { 0.0 },
        active_lps: active().count(),
        lasers_saved,
        bandwidth_hist: hist,
        l_band_in_use: active().any(|l| l.band() == Some(Band::L)),
        underprovisioned_demands: snap.demands.iter().filter(|d| d.underprovisioned).count(),
        shortfall_gbps: snap.demands.iter().map(|d| d.shortfall_gbps).sum(),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single sample.
    pub std: f64,
}

impl Stat {
    pub fn of(xs: impl IntoIterator<Item = f64>) -> Self {
        let xs: Vec<f64> = xs.into_iter().collect();
        let n = xs.len() as f64;
        if xs.is_empty() {
            return Self::default();
        }
        let mean = xs.iter().sum::<f64>() / n;
        let std = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodAggregate {
    pub period: u32,
    pub art_gbps: Stat,
    pub provisioned_gbps: Stat,
    /// Provisioned traffic over the ART averaged across realizations.
    pub provisioned_over_mean_art: Stat,
    pub active_lps: Stat,
    pub lasers_saved: Stat,
    pub bandwidth_hist: [Stat; BANDWIDTH_BINS],
    pub l_band_share: f64,
    pub underprovisioned_demands: Stat,
    pub shortfall_gbps: Stat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub realizations: usize,
    pub periods: Vec<PeriodAggregate>,
    /// First period using band L per realization; `periods + 1` when never.
    pub onsets: Vec<u32>,
    pub onset_mean: f64,
    /// Realizations with an underprovisioned demand in any period.
    pub underprovisioned_realizations: usize,
}

/// Onset period of band L, `None` if it is never used.
pub fn l_band_onset(metrics: &[PeriodMetrics]) -> Option<u32> {
    metrics.iter().find(|m| m.l_band_in_use).map(|m| m.period)
}

pub fn aggregate(runs: &[Vec<PeriodMetrics>]) -> Result<Aggregate> {
    let Some(first) = runs.first() else {
        return Err(Error::Validation("no realizations to aggregate".into()));
    };
    let periods = first.len();
    if let Some(bad) = runs.iter().position(|r| r.len() != periods) {
        return Err(Error::Validation(format!(
            "realization {bad} has {} periods, expected {periods}",
            runs[bad].len()
        )));
    }
    let col = |p: usize, f: &dyn Fn(&PeriodMetrics) -> f64| Stat::of(runs.iter().map(|r| f(&r[p])));
    let mut out = Vec::with_capacity(periods);
    for p in 0..periods {
        let art = col(p, &|m| m.art_gbps);
        let ratio = if art.mean > 0.0 {
            col(p, &|m| m.provisioned_gbps / art.mean)
        } else {
            Stat::default()
        };
        out.push(PeriodAggregate {
            period: first[p].period,
            art_gbps: art,
            provisioned_gbps: col(p, &|m| m.provisioned_gbps),
            provisioned_over_mean_art: ratio,
            active_lps: col(p, &|m| m.active_lps as f64),
            lasers_saved: col(p, &|m| m.lasers_saved as f64),
            bandwidth_hist: std::array::from_fn(|b| col(p, &|m| m.bandwidth_hist[b] as f64)),
            l_band_share: col(p, &|m| m.l_band_in_use as u8 as f64).mean,
            underprovisioned_demands: col(p, &|m| m.underprovisioned_demands as f64),
            shortfall_gbps: col(p, &|m| m.shortfall_gbps),
        });
    }
    let censored = periods as u32 + 1;
    let onsets: Vec<u32> = runs.iter().map(|r| l_band_onset(r).unwrap_or(censored)).collect();
    Ok(Aggregate {
        realizations: runs.len(),
        onset_mean: Stat::of(onsets.iter().map(|&o| o as f64)).mean,
        onsets,
        periods: out,
        underprovisioned_realizations: runs
            .iter()
            .filter(|r| r.iter().any(|m| m.underprovisioned_demands > 0))
            .count(),
    })
}

/// Final-period headline numbers of one flow.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSummary {
    pub flow: Flow,
    pub active_lps: f64,
    pub lasers_saved: f64,
    pub onset_mean: f64,
    pub provisioned_over_mean_art: f64,
    /// Mean share of active lightpaths per bandwidth bin.
    pub bandwidth_share: [f64; BANDWIDTH_BINS],
    pub underprovisioned_realizations: usize,
}

impl FlowSummary {
    pub fn new(flow: Flow, agg: &Aggregate) -> Self {
        let last = agg.periods.last().expect("aggregates hold at least one period");
        let total: f64 = last.bandwidth_hist.iter().map(|s| s.mean).sum();
        Self {
            flow,
            active_lps: last.active_lps.mean,
            lasers_saved: last.lasers_saved.mean,
            onset_mean: agg.onset_mean,
            provisioned_over_mean_art: last.provisioned_over_mean_art.mean,
            bandwidth_share: std::array::from_fn(|b| {
                if total > 0.0 {
                    last.bandwidth_hist[b].mean / total
                } else {
                    0.0
                }
            }),
            underprovisioned_realizations: agg.underprovisioned_realizations,
        }
    }

    /// Bin with the largest mean count; lowest bandwidth wins ties.
    pub fn modal_bin(&self) -> usize {
        let mut best = 0;
        for b in 1..BANDWIDTH_BINS {
            if self.bandwidth_share[b] > self.bandwidth_share[best] {
                best = b;
            }
        }
        best
    }

    pub fn occupied_bins(&self) -> usize {
        self.bandwidth_share.iter().filter(|&&s| s > 0.0).count()
    }

    pub fn line(&self) -> String {
        format!(
            "{}: final-period LPs {} lasers saved {} L-band onset {}",
            self.flow,
            num(self.active_lps),
            num(self.lasers_saved),
            num(self.onset_mean)
        )
    }
}

/// At most 6 significant digits, shortest form, '.' separator.
pub fn num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x.is_infinite() {
            format!("{x}")
        } else {
            "0".into()
        };
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

fn row(out: &mut String, period: u32, vals: &[f64]) {
    out.push_str(&period.to_string());
    for v in vals {
        out.push(',');
        out.push_str(&num(*v));
    }
    out.push('\n');
}

pub fn panel_a(agg: &Aggregate) -> String {
    let mut s = String::from(
        "period,art_mean_gbps,art_std_gbps,provisioned_mean_gbps,provisioned_std_gbps,\
         provisioned_over_mean_art_mean,provisioned_over_mean_art_std,\
         underprovisioned_demands_mean,shortfall_mean_gbps\n",
    );
    for p in &agg.periods {
        row(
            &mut s,
            p.period,
            &[
                p.art_gbps.mean,
                p.art_gbps.std,
                p.provisioned_gbps.mean,
                p.provisioned_gbps.std,
                p.provisioned_over_mean_art.mean,
                p.provisioned_over_mean_art.std,
                p.underprovisioned_demands.mean,
                p.shortfall_gbps.mean,
            ],
        );
    }
    s
}

pub fn panel_b(agg: &Aggregate) -> String {
    let mut s = String::from("period,active_lps_mean,active_lps_std,l_band_share\n");
    for p in &agg.periods {
        row(&mut s, p.period, &[p.active_lps.mean, p.active_lps.std, p.l_band_share]);
    }
    s
}

pub fn panel_c(agg: &Aggregate) -> String {
    let mut s = String::from("period,lasers_saved_mean,lasers_saved_std\n");
    for p in &agg.periods {
        row(&mut s, p.period, &[p.lasers_saved.mean, p.lasers_saved.std]);
    }
    s
}

pub fn panel_d(agg: &Aggregate) -> String {
    let mut s = String::from("period");
    for b in 0..BANDWIDTH_BINS {
        let _ = write!(s, ",bw_{}", bin_bandwidth_ghz(b));
    }
    s.push('\n');
    for p in &agg.periods {
        let vals: Vec<f64> = p.bandwidth_hist.iter().map(|s| s.mean).collect();
        row(&mut s, p.period, &vals);
    }
    s
}

pub fn summary_text(results: &[(Flow, Aggregate)]) -> String {
    let mut s = String::new();
    let sums: Vec<FlowSummary> = results.iter().map(|(f, a)| FlowSummary::new(*f, a)).collect();
    let _ = writeln!(s, "final-period results, mean over realizations");
    for x in &sums {
        let _ = writeln!(
            s,
            "{}: lps {} lasers_saved {} l_band_onset {} provisioned_over_art {} modal_bandwidth_ghz {} underprovisioned_realizations {}",
            x.flow,
            num(x.active_lps),
            num(x.lasers_saved),
            num(x.onset_mean),
            num(x.provisioned_over_mean_art),
            bin_bandwidth_ghz(x.modal_bin()),
            x.underprovisioned_realizations
        );
    }
    let get = |f: Flow| sums.iter().find(|x| x.flow == f);
    if let (Some(p), Some(i)) = (get(Flow::Proactive), get(Flow::Incremental)) {
        if p.active_lps > 0.0 {
            let _ = writeln!(s, "incremental/proactive lps: {}", num(i.active_lps / p.active_lps));
        }
        let incr_max = get(Flow::IncrementalMax).map_or(0.0, |m| m.lasers_saved);
        let other = i.lasers_saved.max(incr_max);
        let _ = writeln!(
            s,
            "proactive lasers saved: {} vs best incremental {}",
            num(p.lasers_saved),
            num(other)
        );
        let _ = write!(
            s,
            "l_band onset: proactive {} incremental {}",
            num(p.onset_mean),
            num(i.onset_mean)
        );
        if let Some(m) = get(Flow::IncrementalMax) {
            let _ = write!(s, " incremental-max {}", num(m.onset_mean));
        }
        s.push('\n');
    }
    s
}

/// Writes the four panels per flow and `summary.txt` into `dir`.
pub fn emit(dir: &Path, results: &[(Flow, Aggregate)]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    for (flow, agg) in results {
        put(format!("{flow}_a_traffic.csv"), panel_a(agg))?;
        put(format!("{flow}_b_lightpaths.csv"), panel_b(agg))?;
        put(format!("{flow}_c_lasers.csv"), panel_c(agg))?;
        put(format!("{flow}_d_bandwidth.csv"), panel_d(agg))?;
    }
    put("summary.txt".into(), summary_text(results))?;
    Ok(written)
}
