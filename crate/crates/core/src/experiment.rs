//! Run configuration, demand matrices and the realization harness.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::{parse_topology, Topology};
use crate::planner::{run_flow, DemandSpec, Flow, FlowParams, GrowthModel};
use crate::qot::QotParams;
use crate::rcsa::{ActivationOrder, PlanContext, PlanOptions, RouteTable};
use crate::report::{aggregate, compute_metrics, Aggregate, PeriodMetrics};
use crate::xcvr::{Catalog, CatalogParams};

pub const NOBEL_GERMANY: &str = include_str!("../data/nobel-germany.txt");
pub const NOBEL_GERMANY_WEIGHTS: &str = include_str!("../data/nobel-germany-weights.csv");
pub const DEFAULT_SCALE_GBPS: f64 = 4500.0;

/// Which flows a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowSelection {
    All,
    One(Flow),
}

impl FlowSelection {
    pub fn flows(self) -> Vec<Flow> {
        match self {
            FlowSelection::All => Flow::ALL.to_vec(),
            FlowSelection::One(f) => vec![f],
        }
    }
}

impl std::str::FromStr for FlowSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            Ok(FlowSelection::All)
        } else {
            s.parse().map(FlowSelection::One)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologySection {
    /// SNDlib native or XML file; the bundled Nobel-Germany network if unset.
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemandSection {
    /// `src,dst,gbps` matrix. Takes precedence over the generator.
    pub matrix: Option<PathBuf>,
    /// `node,weight` file for the gravity generator; bundled weights if unset.
    pub weights: Option<PathBuf>,
    pub scale_gbps: f64,
}

impl Default for DemandSection {
    fn default() -> Self {
        Self {
            matrix: None,
            weights: None,
            scale_gbps: DEFAULT_SCALE_GBPS,
        }
    }
}

/// Contents of a run configuration file. Command line flags override these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub flow: String,
    pub periods: u32,
    pub realizations: usize,
    pub seed: u64,
    pub oh: f64,
    pub out: PathBuf,
    pub mws: bool,
    pub k_paths: usize,
    pub reserve_inactive_spectrum: bool,
    pub activation_order: ActivationOrder,
    pub growth: GrowthModel,
    pub topology: TopologySection,
    pub demands: DemandSection,
    pub qot: QotParams,
    pub xcvr: CatalogParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        let opts = PlanOptions::default();
        Self {
            flow: "all".into(),
            periods: 10,
            realizations: 30,
            seed: 42,
            oh: 0.25,
            out: PathBuf::from("results"),
            mws: opts.mws,
            k_paths: opts.k_paths,
            reserve_inactive_spectrum: opts.reserve_inactive_spectrum,
            activation_order: opts.activation_order,
            growth: GrowthModel::default(),
            topology: TopologySection::default(),
            demands: DemandSection::default(),
            qot: QotParams::default(),
            xcvr: CatalogParams::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config {
            key: e.span().map(|s| key_at(text, s.start)).unwrap_or_default(),
            message: e.message().to_string(),
        })
    }

    /// Loads a file; relative paths inside are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.topology.path,
            &mut cfg.demands.matrix,
            &mut cfg.demands.weights,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn flows(&self) -> Result<Vec<Flow>> {
        self.flow
            .parse::<FlowSelection>()
            .map(FlowSelection::flows)
            .map_err(|_| Error::Config {
                key: "flow".into(),
                message: format!(
                    "expected all, proactive, incremental or incremental-max, got `{}`",
                    self.flow
                ),
            })
    }

    pub fn plan_options(&self) -> PlanOptions {
        PlanOptions {
            mws: self.mws,
            k_paths: self.k_paths,
            reserve_inactive_spectrum: self.reserve_inactive_spectrum,
            activation_order: self.activation_order,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: String| {
            Err(Error::Config {
                key: key.into(),
                message,
            })
        };
        self.flows()?;
        if self.realizations == 0 {
            return bad("realizations", "must be at least 1".into());
        }
        if self.periods == 0 {
            return bad("periods", "must be at least 1".into());
        }
        if !(self.oh >= 0.0 && self.oh.is_finite()) {
            return bad("oh", format!("must be a finite value >= 0, got {}", self.oh));
        }
        if self.k_paths == 0 {
            return bad("k_paths", "must be at least 1".into());
        }
        if !(self.demands.scale_gbps >= 0.0 && self.demands.scale_gbps.is_finite()) {
            return bad(
                "demands.scale_gbps",
                format!("must be >= 0, got {}", self.demands.scale_gbps),
            );
        }
        self.growth.validate()?;
        self.qot.validate()?;
        for (key, p) in [
            ("topology.path", &self.topology.path),
            ("demands.matrix", &self.demands.matrix),
            ("demands.weights", &self.demands.weights),
        ] {
            if let Some(p) = p {
                if !p.is_file() {
                    return bad(key, format!("no such file: {}", p.display()));
                }
            }
        }
        Ok(())
    }
}

/// Dotted path of the table and key at byte offset `pos` of a TOML document.
fn key_at(text: &str, pos: usize) -> String {
    let mut table = String::new();
    let mut key = String::new();
    for line in text[..pos.min(text.len())]
        .lines()
        .chain(text[pos.min(text.len())..].lines().take(1))
    {
        let t = line.trim();
        if t.starts_with('[') {
            table = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            key.clear();
        } else if let Some((k, _)) = t.split_once('=') {
            key = k.trim().to_string();
        }
    }
    match (table.is_empty(), key.is_empty()) {
        (true, _) => key,
        (false, true) => table,
        (false, false) => format!("{table}.{key}"),
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct DemandRow {
    src: String,
    dst: String,
    gbps: f64,
}

#[derive(Debug, Deserialize)]
struct WeightRow {
    node: String,
    weight: f64,
}

pub fn parse_weights(text: &str, topo: &Topology) -> Result<Vec<f64>> {
    let mut weights = vec![None; topo.node_count()];
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    for (i, row) in rdr.deserialize::<WeightRow>().enumerate() {
        let row = row.map_err(csv_error)?;
        let line = i + 2;
        let id = topo
            .node_id(&row.node)
            .ok_or_else(|| Error::Validation(format!("line {line}: unknown node `{}` in weight file", row.node)))?;
        if !(row.weight >= 0.0 && row.weight.is_finite()) {
            return Err(Error::Validation(format!(
                "line {line}: weight of `{}` must be >= 0",
                row.node
            )));
        }
        if weights[id.0].replace(row.weight).is_some() {
            return Err(Error::Validation(format!(
                "line {line}: duplicate weight for `{}`",
                row.node
            )));
        }
    }
    weights
        .into_iter()
        .enumerate()
        .map(|(i, w)| w.ok_or_else(|| Error::Validation(format!("no weight for node `{}`", topo.nodes()[i].name))))
        .collect()
}

/// Gravity model: `scale * w(s) * w(d) / sum(w)` per unordered node pair,
/// rounded to 25 Gbit/s.
pub fn generate_demands(topo: &Topology, weights: &[f64], scale_gbps: f64) -> Result<Vec<DemandSpec>> {
    if weights.len() != topo.node_count() {
        return Err(Error::Validation(format!(
            "{} weights for {} nodes",
            weights.len(),
            topo.node_count()
        )));
    }
    let total: f64 = weights.iter().sum();
    let mut out = Vec::new();
    for s in 0..weights.len() {
        for d in s + 1..weights.len() {
            let raw = if total > 0.0 {
                scale_gbps * weights[s] * weights[d] / total
            } else {
                0.0
            };
            out.push(DemandSpec {
                source: crate::netgraph::NodeId(s),
                destination: crate::netgraph::NodeId(d),
                gbps: (raw / 25.0).round() * 25.0,
            });
        }
    }
    Ok(out)
}

pub fn demands_to_csv(topo: &Topology, demands: &[DemandSpec]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for d in demands {
        w.serialize(DemandRow {
            src: topo.node(d.source).name.clone(),
            dst: topo.node(d.destination).name.clone(),
            gbps: d.gbps,
        })
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8")
}

pub fn parse_demands(text: &str, topo: &Topology) -> Result<Vec<DemandSpec>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<DemandRow>().enumerate() {
        let row = row.map_err(csv_error)?;
        let line = i + 2;
        let node = |name: &str| {
            topo.node_id(name)
                .ok_or_else(|| Error::Validation(format!("line {line}: unknown node `{name}`")))
        };
        let (s, d) = (node(&row.src)?, node(&row.dst)?);
        if s == d {
            return Err(Error::Validation(format!("line {line}: source equals destination")));
        }
        if !(row.gbps >= 0.0 && row.gbps.is_finite()) {
            return Err(Error::Validation(format!("line {line}: rate must be >= 0")));
        }
        if let Some(prev) = seen.insert((s.min(d), s.max(d)), line) {
            return Err(Error::Validation(format!(
                "line {line}: pair {}-{} already listed on line {prev}",
                row.src, row.dst
            )));
        }
        out.push(DemandSpec {
            source: s,
            destination: d,
            gbps: row.gbps,
        });
    }
    Ok(out)
}

/// Everything a run needs, loaded and validated.
#[derive(Debug)]
pub struct Experiment {
    pub config: RunConfig,
    pub topology: Topology,
    pub demands: Vec<DemandSpec>,
    pub catalog: Catalog,
    pub routes: RouteTable,
}

/// Per-realization metrics and their aggregate for one flow.
#[derive(Debug, Clone)]
pub struct FlowResult {
    pub flow: Flow,
    pub metrics: Vec<Vec<PeriodMetrics>>,
    pub aggregate: Aggregate,
}

impl Experiment {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let fiber = config.qot.fiber();
        let topology = match &config.topology.path {
            Some(p) => parse_topology(&read_text(p)?, &fiber)?,
            None => parse_topology(NOBEL_GERMANY, &fiber)?,
        };
        let demands = match (&config.demands.matrix, &config.demands.weights) {
            (Some(m), _) => parse_demands(&read_text(m)?, &topology)?,
            (None, Some(w)) => {
                let weights = parse_weights(&read_text(w)?, &topology)?;
                generate_demands(&topology, &weights, config.demands.scale_gbps)?
            }
            (None, None) => {
                if config.topology.path.is_some() {
                    return Err(Error::Config {
                        key: "demands".into(),
                        message: "a custom topology needs demands.matrix or demands.weights".into(),
                    });
                }
                let weights = parse_weights(NOBEL_GERMANY_WEIGHTS, &topology)?;
                generate_demands(&topology, &weights, config.demands.scale_gbps)?
            }
        };
        let catalog = Catalog::new(&config.xcvr)?;
        let routes = RouteTable::build(
            &topology,
            demands.iter().map(|d| (d.source, d.destination)),
            config.k_paths,
        );
        Ok(Self {
            config,
            topology,
            demands,
            catalog,
            routes,
        })
    }

    pub fn context(&self) -> PlanContext<'_> {
        PlanContext::new(
            &self.topology,
            &self.routes,
            &self.catalog,
            &self.config.qot,
            self.config.plan_options(),
        )
    }

    pub fn flow_params(&self, realization: u64) -> FlowParams {
        FlowParams {
            periods: self.config.periods,
            overhead: self.config.oh,
            growth: self.config.growth.clone(),
            seed: self.config.seed,
            realization,
            trace: false,
        }
    }

    /// Runs the configured flows over all realizations on `jobs` threads
    /// (all available when `None`). If `snapshot_dir` is set, each period's
    /// state is written to `<dir>/<flow>/r<k>/period-<t>.jsonl`.
    pub fn run(&self, jobs: Option<usize>, snapshot_dir: Option<&Path>) -> Result<Vec<FlowResult>> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(j) = jobs {
            if j == 0 {
                return Err(Error::Validation("--jobs must be at least 1".into()));
            }
            builder = builder.num_threads(j);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::Validation(format!("cannot start worker pool: {e}")))?;
        let ctx = self.context();
        let mut results = Vec::new();
        for flow in self.config.flows()? {
            let metrics: Vec<Vec<PeriodMetrics>> = pool.install(|| {
                (0..self.config.realizations as u64)
                    .into_par_iter()
                    .map(|r| {
                        let run = run_flow(&ctx, flow, &self.demands, &self.flow_params(r))?;
                        if let Some(dir) = snapshot_dir {
                            let dir = dir.join(flow.name()).join(format!("r{r}"));
                            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                            for s in &run.snapshots {
                                let p = dir.join(format!("period-{}.jsonl", s.period));
                                std::fs::write(&p, s.to_jsonl()).map_err(|e| Error::io(&p, e))?;
                            }
                        }
                        Ok(run.snapshots.iter().map(compute_metrics).collect())
                    })
                    .collect::<Result<_>>()
            })?;
            let aggregate = aggregate(&metrics)?;
            results.push(FlowResult {
                flow,
                metrics,
                aggregate,
            });
        }
        Ok(results)
    }
}
