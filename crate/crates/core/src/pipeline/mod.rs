//! End-to-end runs.
//!
//! Each stage is a plain function over the previous stages' outputs, so a
//! caller (or [`sweep`]) can rerun any suffix of the pipeline. [`run_pipeline`]
//! chains them and writes the report bundle.

mod baseline;
mod bundle;
pub mod config;
mod report;
mod sweep;

use std::collections::BTreeMap;

use crate::diversity::{compute_diversity, DiversityOptions, DiversityTable};
use crate::error::{Error, Result, StageExt};
use crate::geospan::{delta_p, span_bins, DeltaPReport, DistanceMatrix, NullModelConfig, SpanBins};
use crate::graphs::{
    build_dimension_graph, build_graph, build_graph_where, dimension_thresholds, CommGraph, DimensionThresholds,
};
use crate::ingest::{
    filter_states_by_penetration, georeference_users, parse_activity, parse_messages, AreaTable, Corpus,
    GeoActivityRecord, Locations, UserLocationMap,
};
use crate::stats::{
    ks_two_sample, minmax_normalize, ols_fit, step_aic_backward, KsResult, RegressionReport,
    StepAicResult,
};

pub use baseline::{random_baseline, random_baseline_on, BaselineReport, BaselineRow, RANDOM_TAG};
pub use bundle::{read_manifest, sha256_hex, Bundle};
pub use config::{AreaDenominator, PipelineConfig, RegressionSpec, SpanUniverse};
pub use report::{stage_counts, write_reports, Stages};
pub use sweep::{sweep, write_sweep_csv, SweepParameter, SweepRow};

/// Tag of the unthresholded graph over every located pair.
pub const UNIVERSE_TAG: &str = "universe";

#[derive(Debug, Clone)]
pub struct Ingested {
    pub corpus: Corpus,
    pub activity_records: usize,
    pub location_map: UserLocationMap,
    /// Area table after the penetration filter.
    pub areas: AreaTable,
    pub locations: Locations,
    /// Area count used as the spatial entropy base.
    pub area_count: usize,
}

impl Ingested {
    /// Messages with both endpoints located.
    pub fn located_mask(&self) -> Vec<bool> {
        let c = &self.corpus;
        (0..c.len())
            .map(|i| self.locations.is_located(c.senders[i]) && self.locations.is_located(c.receivers[i]))
            .collect()
    }
}

pub fn ingest(cfg: &PipelineConfig) -> Result<Ingested> {
    cfg.validate()?;
    let run = || {
        let corpus = parse_messages(&cfg.messages, cfg.message_format(), &cfg.schema())?;
        let activity = parse_activity(&cfg.activity)?;
        let areas = AreaTable::parse(&cfg.areas)?;
        ingest_parsed(cfg, corpus, &activity, areas)
    };
    run().stage("ingest")
}

/// Ingest from already parsed inputs.
pub fn ingest_parsed(
    cfg: &PipelineConfig,
    corpus: Corpus,
    activity: &[GeoActivityRecord],
    areas: AreaTable,
) -> Result<Ingested> {
    let run = || {
        if corpus.is_empty() {
            return Err(Error::Empty("no usable messages".into()));
        }
        let location_map = georeference_users(activity, cfg.n_min, cfg.purity)?;
        let areas = filter_states_by_penetration(&areas, &location_map.area_counts(), cfg.sd_mult, cfg.min_users)?;
        let included_only = cfg.area_denominator == AreaDenominator::Included;
        let area_count = if included_only { areas.included_count() } else { areas.len() };
        let locations = Locations::resolve(&corpus.users, &location_map, &areas, included_only);
        Ok(Ingested {
            corpus,
            activity_records: activity.len(),
            location_map,
            areas,
            locations,
            area_count,
        })
    };
    run().stage("ingest")
}

pub fn label(cfg: &PipelineConfig, ing: &Ingested) -> Result<DimensionThresholds> {
    dimension_thresholds(&ing.corpus, cfg.alpha).stage("label")
}

#[derive(Debug, Clone)]
pub struct Graphs {
    /// Every located pair, weight at least 1.
    pub universe: CommGraph,
    /// Located pairs with weight at least `min_weight`.
    pub full: CommGraph,
    /// One graph per configured dimension, in config order.
    pub dims: Vec<CommGraph>,
}

impl Graphs {
    pub fn by_tag(&self, tag: &str) -> Option<&CommGraph> {
        std::iter::once(&self.full)
            .chain(&self.dims)
            .chain(std::iter::once(&self.universe))
            .find(|g| g.tag() == tag)
    }
}

pub fn build_universe(ing: &Ingested) -> CommGraph {
    let params = vec![("min_weight".to_owned(), "1".to_owned())];
    build_graph_where(&ing.corpus, &ing.locations, 1, UNIVERSE_TAG, params, |_| true)
}

pub fn build_full(cfg: &PipelineConfig, ing: &Ingested) -> Result<CommGraph> {
    build_graph(&ing.corpus, &ing.locations, cfg.min_weight).stage("graphs")
}

pub fn build_dims(cfg: &PipelineConfig, ing: &Ingested, t: &DimensionThresholds) -> Result<Vec<CommGraph>> {
    cfg.dimensions
        .iter()
        .map(|d| build_dimension_graph(&ing.corpus, &ing.locations, d, t))
        .collect::<Result<_>>()
        .stage("graphs")
}

pub fn build_graphs(cfg: &PipelineConfig, ing: &Ingested, t: &DimensionThresholds) -> Result<Graphs> {
    Ok(Graphs {
        universe: build_universe(ing),
        full: build_full(cfg, ing)?,
        dims: build_dims(cfg, ing, t)?,
    })
}

pub fn diversity_options(cfg: &PipelineConfig, ing: &Ingested) -> DiversityOptions {
    DiversityOptions {
        direction: cfg.direction,
        include_single_contact: cfg.include_single_contact,
        area_count: ing.area_count,
    }
}

pub fn diversity_of(cfg: &PipelineConfig, ing: &Ingested, g: &CommGraph) -> Result<DiversityTable> {
    compute_diversity(g, &ing.locations, &diversity_options(cfg, ing)).stage("diversity")
}

/// Diversity for the full graph followed by each dimension graph.
pub fn diversities(cfg: &PipelineConfig, ing: &Ingested, graphs: &Graphs) -> Result<Vec<DiversityTable>> {
    std::iter::once(&graphs.full)
        .chain(&graphs.dims)
        .map(|g| diversity_of(cfg, ing, g))
        .collect()
}

#[derive(Debug, Clone)]
pub struct Span {
    pub bins: SpanBins,
    pub report: DeltaPReport,
}

pub fn null_config(cfg: &PipelineConfig) -> NullModelConfig {
    NullModelConfig {
        runs: cfg.null_runs,
        seed: cfg.seed,
        ci: cfg.ci_method,
        ratio: cfg.delta_mode,
    }
}

pub fn span(cfg: &PipelineConfig, ing: &Ingested, graphs: &Graphs) -> Result<Span> {
    let run = || {
        let dist = DistanceMatrix::new(&ing.areas);
        let universe = match cfg.span_universe {
            SpanUniverse::Unthresholded => &graphs.universe,
            SpanUniverse::Thresholded => &graphs.full,
        };
        let bins = span_bins(universe, &ing.locations, &dist, cfg.span_bins)?;
        let dims: Vec<&CommGraph> = graphs.dims.iter().collect();
        let report = delta_p(universe, &dims, &ing.locations, &dist, &bins, &null_config(cfg))?;
        Ok(Span { bins, report })
    };
    run().stage("span")
}

/// One regression design: rows are included areas in code order.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub areas: Vec<String>,
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

/// Per-area value of a named feature: `density`, `population`, or
/// `<graph tag>.social` / `<graph tag>.spatial`.
pub fn feature_values(name: &str, ing: &Ingested, tables: &[DiversityTable]) -> Result<BTreeMap<u32, f64>> {
    let included = ing.areas.areas().iter().enumerate().filter(|(_, a)| a.included);
    match name {
        "density" => Ok(included.map(|(i, a)| (i as u32, a.density)).collect()),
        "population" => Ok(included.map(|(i, a)| (i as u32, a.population)).collect()),
        _ => {
            let (tag, kind) = name
                .rsplit_once('.')
                .ok_or_else(|| Error::Config(format!("unknown feature `{name}`")))?;
            let table = tables
                .iter()
                .find(|t| t.tag == tag)
                .ok_or_else(|| Error::Config(format!("no diversity table for graph `{tag}`")))?;
            let pick = match kind {
                "social" => |a: &crate::diversity::AreaDiversity| a.social,
                "spatial" => |a: &crate::diversity::AreaDiversity| a.spatial,
                _ => return Err(Error::Config(format!("unknown diversity kind in `{name}`"))),
            };
            Ok(table
                .areas
                .iter()
                .filter(|a| ing.areas.areas()[a.area as usize].included)
                .map(|a| (a.area, pick(a)))
                .collect())
        }
    }
}

/// Every feature named by the configured regressions and selection.
pub fn referenced_features(cfg: &PipelineConfig) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for f in cfg
        .regressions
        .iter()
        .flat_map(|r| &r.features)
        .chain(&cfg.stepaic_features)
        .chain(&cfg.stepaic_forced)
    {
        if !out.contains(f) {
            out.push(f.clone());
        }
    }
    out
}

/// Builds the design for `features` over the included areas that have a
/// value for every feature in `row_features`, so that all models share rows.
pub fn design(
    cfg: &PipelineConfig,
    ing: &Ingested,
    tables: &[DiversityTable],
    features: &[String],
    row_features: &[String],
) -> Result<Design> {
    let values: BTreeMap<&str, BTreeMap<u32, f64>> = row_features
        .iter()
        .chain(features)
        .map(|f| Ok((f.as_str(), feature_values(f, ing, tables)?)))
        .collect::<Result<_>>()?;
    let rows: Vec<u32> = (0..ing.areas.len() as u32)
        .filter(|i| ing.areas.areas()[*i as usize].included)
        .filter(|i| values.values().all(|m| m.contains_key(i)))
        .collect();
    let mut columns: Vec<Vec<f64>> = features
        .iter()
        .map(|f| rows.iter().map(|i| values[f.as_str()][i]).collect())
        .collect();
    let mut y: Vec<f64> = rows
        .iter()
        .map(|&i| ing.areas.areas()[i as usize].gdp_per_capita)
        .collect();
    if cfg.normalize_features {
        for c in &mut columns {
            *c = minmax_normalize(c)?;
        }
    }
    if cfg.normalize_outcome {
        y = minmax_normalize(&y)?;
    }
    Ok(Design {
        areas: rows.iter().map(|&i| ing.areas.areas()[i as usize].code.clone()).collect(),
        names: features.to_vec(),
        columns,
        y,
    })
}

pub fn fit(d: &Design) -> Result<RegressionReport> {
    ols_fit(&d.columns, &d.y, &d.names)
}

#[derive(Debug, Clone)]
pub struct Regressions {
    pub models: Vec<(String, RegressionReport)>,
    pub stepaic: Option<StepAicResult>,
}

pub fn regress(cfg: &PipelineConfig, ing: &Ingested, tables: &[DiversityTable]) -> Result<Regressions> {
    let run = || {
        let rows = referenced_features(cfg);
        let models = cfg
            .regressions
            .iter()
            .map(|spec| Ok((spec.name.clone(), fit(&design(cfg, ing, tables, &spec.features, &rows)?)?)))
            .collect::<Result<Vec<_>>>()?;
        let stepaic = if cfg.stepaic_features.is_empty() {
            None
        } else {
            let mut feats = cfg.stepaic_forced.clone();
            feats.extend(cfg.stepaic_features.iter().filter(|f| !cfg.stepaic_forced.contains(f)).cloned());
            let d = design(cfg, ing, tables, &feats, &rows)?;
            Some(step_aic_backward(&d.columns, &d.y, &d.names, &cfg.stepaic_forced)?)
        };
        Ok(Regressions { models, stepaic })
    };
    run().stage("regress")
}

/// KS between the universe weights of the ties in each pair of graphs.
pub fn tie_weight_ks(universe: &CommGraph, a: &CommGraph, b: &CommGraph) -> Option<KsResult> {
    let weights = |g: &CommGraph| -> Vec<f64> {
        g.edges()
            .filter_map(|(s, d, _)| universe.weight(s, d).map(f64::from))
            .collect()
    };
    let (wa, wb) = (weights(a), weights(b));
    (!wa.is_empty() && !wb.is_empty()).then(|| ks_two_sample(&wa, &wb))
}

/// Everything a full run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub ingested: Ingested,
    pub thresholds: DimensionThresholds,
    pub graphs: Graphs,
    pub diversity: Vec<DiversityTable>,
    pub span: Span,
    pub regressions: Regressions,
    pub manifest: BTreeMap<String, String>,
}

/// Runs every stage on the configured inputs and writes the report bundle
/// into `cfg.out_dir`.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunReport> {
    let ing = ingest(cfg)?;
    run_from_ingested(cfg, ing)
}

pub fn run_from_ingested(cfg: &PipelineConfig, ing: Ingested) -> Result<RunReport> {
    let thresholds = label(cfg, &ing)?;
    let graphs = build_graphs(cfg, &ing, &thresholds)?;
    let tables = diversities(cfg, &ing, &graphs)?;
    let span = span(cfg, &ing, &graphs)?;
    let regressions = regress(cfg, &ing, &tables)?;
    let mut report = RunReport {
        ingested: ing,
        thresholds,
        graphs,
        diversity: tables,
        span,
        regressions,
        manifest: BTreeMap::new(),
    };
    report.manifest = write_reports(cfg, &report.stages(), &cfg.out_dir)?;
    Ok(report)
}

impl RunReport {
    pub fn stages(&self) -> Stages<'_> {
        Stages {
            ingested: &self.ingested,
            thresholds: Some(&self.thresholds),
            graphs: Some(&self.graphs),
            diversity: Some(&self.diversity),
            span: Some(&self.span),
            regressions: Some(&self.regressions),
        }
    }
}

