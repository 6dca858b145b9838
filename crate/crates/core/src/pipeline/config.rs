//! Flat `key = value` configuration.
//!
//! Every key can be set from a file or overridden by a command-line flag of
//! the same name. [`PipelineConfig::to_kv_string`] writes every key in sorted
//! order and reads back to an identical value.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::diversity::Direction;
use crate::error::{Error, Result};
use crate::geospan::{CiMethod, RatioMode};
use crate::ingest::{MessageFormat, MessageSchema};
use crate::synth::{SynthConfig, SynthPaths};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AreaDenominator {
    /// Areas that survive the penetration filter.
    Included,
    /// Every area in the area table.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpanUniverse {
    /// Every located communicating pair.
    Unthresholded,
    /// The full graph after the minimum-weight filter.
    Thresholded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSpec {
    pub name: String,
    pub features: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub messages: PathBuf,
    pub activity: PathBuf,
    pub areas: PathBuf,
    pub out_dir: PathBuf,
    pub format: Option<MessageFormat>,
    pub dimensions: Vec<String>,
    /// Score column per dimension when it differs from the dimension name.
    pub dimension_columns: BTreeMap<String, String>,
    pub col_message_id: String,
    pub col_sender: String,
    pub col_receiver: String,
    pub col_timestamp: String,
    pub window_start: Option<i64>,
    pub window_end: Option<i64>,
    pub alpha: f64,
    pub min_weight: u32,
    pub n_min: u64,
    pub purity: f64,
    pub sd_mult: f64,
    pub min_users: u64,
    pub area_denominator: AreaDenominator,
    pub direction: Direction,
    pub include_single_contact: bool,
    pub span_bins: usize,
    pub span_universe: SpanUniverse,
    pub null_runs: usize,
    pub seed: u64,
    pub ci_method: CiMethod,
    pub delta_mode: RatioMode,
    pub regressions: Vec<RegressionSpec>,
    pub stepaic_features: Vec<String>,
    pub stepaic_forced: Vec<String>,
    pub normalize_features: bool,
    pub normalize_outcome: bool,
    pub baseline_runs: usize,
    pub baseline_fraction: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            messages: "messages.csv".into(),
            activity: "activity.csv".into(),
            areas: "areas.csv".into(),
            out_dir: "out".into(),
            format: None,
            dimensions: vec!["knowledge".into(), "support".into()],
            dimension_columns: BTreeMap::new(),
            col_message_id: "message_id".into(),
            col_sender: "sender".into(),
            col_receiver: "receiver".into(),
            col_timestamp: "timestamp".into(),
            window_start: None,
            window_end: None,
            alpha: 0.99,
            min_weight: 4,
            n_min: 3,
            purity: 0.95,
            sd_mult: 1.0,
            min_users: 1000,
            area_denominator: AreaDenominator::Included,
            direction: Direction::Out,
            include_single_contact: true,
            span_bins: 5,
            span_universe: SpanUniverse::Unthresholded,
            null_runs: 50,
            seed: 0,
            ci_method: CiMethod::Combined,
            delta_mode: RatioMode::PerRun,
            regressions: vec![
                RegressionSpec {
                    name: "density".into(),
                    features: vec!["density".into()],
                },
                RegressionSpec {
                    name: "full_spatial".into(),
                    features: vec!["density".into(), "full.spatial".into()],
                },
                RegressionSpec {
                    name: "dimension_spatial".into(),
                    features: vec!["density".into(), "knowledge.spatial".into(), "support.spatial".into()],
                },
            ],
            stepaic_features: Vec::new(),
            stepaic_forced: vec!["density".into()],
            normalize_features: true,
            normalize_outcome: true,
            baseline_runs: 50,
            baseline_fraction: 0.01,
        }
    }
}

fn list(v: &str) -> Vec<String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_owned).collect()
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("bad boolean `{v}` for `{key}`"))),
    }
}

fn opt_i64(key: &str, v: &str) -> Result<Option<i64>> {
    if v.trim().is_empty() {
        Ok(None)
    } else {
        parse(key, v).map(Some)
    }
}

pub const KEYS: &[&str] = &[
    "activity",
    "alpha",
    "area_denominator",
    "areas",
    "baseline_fraction",
    "baseline_runs",
    "ci_method",
    "col_message_id",
    "col_receiver",
    "col_sender",
    "col_timestamp",
    "delta_mode",
    "dimension_columns",
    "dimensions",
    "direction",
    "format",
    "include_single_contact",
    "messages",
    "min_users",
    "min_weight",
    "n_min",
    "normalize_features",
    "normalize_outcome",
    "null_runs",
    "out_dir",
    "purity",
    "regressions",
    "sd_mult",
    "seed",
    "span_bins",
    "span_universe",
    "stepaic_features",
    "stepaic_forced",
    "window_end",
    "window_start",
];

impl PipelineConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "messages" => self.messages = v.into(),
            "activity" => self.activity = v.into(),
            "areas" => self.areas = v.into(),
            "out_dir" => self.out_dir = v.into(),
            "format" => {
                self.format = match v {
                    "" | "auto" => None,
                    "csv" => Some(MessageFormat::Csv),
                    "jsonl" => Some(MessageFormat::Jsonl),
                    _ => return Err(Error::Config(format!("unknown format `{v}`"))),
                }
            }
            "dimensions" => self.dimensions = list(v),
            "dimension_columns" => {
                self.dimension_columns = list(v)
                    .iter()
                    .map(|item| {
                        item.split_once(':')
                            .map(|(d, c)| (d.to_owned(), c.to_owned()))
                            .ok_or_else(|| Error::Config(format!("dimension column `{item}` is not dim:column")))
                    })
                    .collect::<Result<_>>()?
            }
            "col_message_id" => self.col_message_id = v.into(),
            "col_sender" => self.col_sender = v.into(),
            "col_receiver" => self.col_receiver = v.into(),
            "col_timestamp" => self.col_timestamp = v.into(),
            "window_start" => self.window_start = opt_i64(key, v)?,
            "window_end" => self.window_end = opt_i64(key, v)?,
            "alpha" => self.alpha = parse(key, v)?,
            "min_weight" => self.min_weight = parse(key, v)?,
            "n_min" => self.n_min = parse(key, v)?,
            "purity" => self.purity = parse(key, v)?,
            "sd_mult" => self.sd_mult = parse(key, v)?,
            "min_users" => self.min_users = parse(key, v)?,
            "area_denominator" => {
                self.area_denominator = match v {
                    "included" => AreaDenominator::Included,
                    "all" => AreaDenominator::All,
                    _ => return Err(Error::Config(format!("unknown area_denominator `{v}`"))),
                }
            }
            "direction" => {
                self.direction = match v {
                    "out" => Direction::Out,
                    "union" => Direction::Union,
                    _ => return Err(Error::Config(format!("unknown direction `{v}`"))),
                }
            }
            "include_single_contact" => self.include_single_contact = parse_bool(key, v)?,
            "span_bins" => self.span_bins = parse(key, v)?,
            "span_universe" => {
                self.span_universe = match v {
                    "unthresholded" => SpanUniverse::Unthresholded,
                    "thresholded" => SpanUniverse::Thresholded,
                    _ => return Err(Error::Config(format!("unknown span_universe `{v}`"))),
                }
            }
            "null_runs" => self.null_runs = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "ci_method" => {
                self.ci_method = match v.split_once(':') {
                    None if v == "normal" => CiMethod::Normal,
                    None if v == "spread" => CiMethod::Spread,
                    None if v == "combined" => CiMethod::Combined,
                    None if v == "bootstrap" => CiMethod::Bootstrap { resamples: 1000 },
                    Some(("bootstrap", n)) => CiMethod::Bootstrap {
                        resamples: parse(key, n)?,
                    },
                    _ => return Err(Error::Config(format!("unknown ci_method `{v}`"))),
                }
            }
            "delta_mode" => {
                self.delta_mode = match v {
                    "per_run" => RatioMode::PerRun,
                    "mean_null" => RatioMode::MeanNull,
                    _ => return Err(Error::Config(format!("unknown delta_mode `{v}`"))),
                }
            }
            "regressions" => {
                self.regressions = v
                    .split(';')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|m| {
                        let (name, feats) = m
                            .split_once(':')
                            .ok_or_else(|| Error::Config(format!("regression `{m}` is not name:features")))?;
                        Ok(RegressionSpec {
                            name: name.trim().to_owned(),
                            features: list(feats),
                        })
                    })
                    .collect::<Result<_>>()?
            }
            "stepaic_features" => self.stepaic_features = list(v),
            "stepaic_forced" => self.stepaic_forced = list(v),
            "normalize_features" => self.normalize_features = parse_bool(key, v)?,
            "normalize_outcome" => self.normalize_outcome = parse_bool(key, v)?,
            "baseline_runs" => self.baseline_runs = parse(key, v)?,
            "baseline_fraction" => self.baseline_fraction = parse(key, v)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let b = |x: bool| x.to_string();
        let o = |x: Option<i64>| x.map(|v| v.to_string()).unwrap_or_default();
        Some(match key {
            "messages" => self.messages.display().to_string(),
            "activity" => self.activity.display().to_string(),
            "areas" => self.areas.display().to_string(),
            "out_dir" => self.out_dir.display().to_string(),
            "format" => match self.format {
                None => "auto".into(),
                Some(MessageFormat::Csv) => "csv".into(),
                Some(MessageFormat::Jsonl) => "jsonl".into(),
            },
            "dimensions" => self.dimensions.join(","),
            "dimension_columns" => self
                .dimension_columns
                .iter()
                .map(|(d, c)| format!("{d}:{c}"))
                .collect::<Vec<_>>()
                .join(","),
            "col_message_id" => self.col_message_id.clone(),
            "col_sender" => self.col_sender.clone(),
            "col_receiver" => self.col_receiver.clone(),
            "col_timestamp" => self.col_timestamp.clone(),
            "window_start" => o(self.window_start),
            "window_end" => o(self.window_end),
            "alpha" => self.alpha.to_string(),
            "min_weight" => self.min_weight.to_string(),
            "n_min" => self.n_min.to_string(),
            "purity" => self.purity.to_string(),
            "sd_mult" => self.sd_mult.to_string(),
            "min_users" => self.min_users.to_string(),
            "area_denominator" => match self.area_denominator {
                AreaDenominator::Included => "included".into(),
                AreaDenominator::All => "all".into(),
            },
            "direction" => match self.direction {
                Direction::Out => "out".into(),
                Direction::Union => "union".into(),
            },
            "include_single_contact" => b(self.include_single_contact),
            "span_bins" => self.span_bins.to_string(),
            "span_universe" => match self.span_universe {
                SpanUniverse::Unthresholded => "unthresholded".into(),
                SpanUniverse::Thresholded => "thresholded".into(),
            },
            "null_runs" => self.null_runs.to_string(),
            "seed" => self.seed.to_string(),
            "ci_method" => match self.ci_method {
                CiMethod::Normal => "normal".into(),
                CiMethod::Spread => "spread".into(),
                CiMethod::Combined => "combined".into(),
                CiMethod::Bootstrap { resamples } => format!("bootstrap:{resamples}"),
            },
            "delta_mode" => match self.delta_mode {
                RatioMode::PerRun => "per_run".into(),
                RatioMode::MeanNull => "mean_null".into(),
            },
            "regressions" => self
                .regressions
                .iter()
                .map(|r| format!("{}:{}", r.name, r.features.join(",")))
                .collect::<Vec<_>>()
                .join(";"),
            "stepaic_features" => self.stepaic_features.join(","),
            "stepaic_forced" => self.stepaic_forced.join(","),
            "normalize_features" => b(self.normalize_features),
            "normalize_outcome" => b(self.normalize_outcome),
            "baseline_runs" => self.baseline_runs.to_string(),
            "baseline_fraction" => self.baseline_fraction.to_string(),
            _ => return None,
        })
    }

    /// Parses `key = value` lines; `#` starts a comment line.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Malformed {
                line: i as u64 + 1,
                reason: format!("expected key = value, got `{line}`"),
            })?;
            cfg.set(k.trim(), v)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_kv_str(&text)
    }

    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            let _ = writeln!(s, "{key} = {}", self.get(key).unwrap_or_default());
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha {} outside (0,1)", self.alpha));
        }
        if self.min_weight < 1 {
            return bad("min_weight must be at least 1".into());
        }
        if self.n_min < 1 {
            return bad("n_min must be at least 1".into());
        }
        if !(self.purity > 0.5 && self.purity <= 1.0) {
            return bad(format!("purity {} outside (0.5,1]", self.purity));
        }
        if !(self.sd_mult > 0.0) {
            return bad("sd_mult must be positive".into());
        }
        if self.dimensions.is_empty() {
            return bad("no dimensions configured".into());
        }
        if self.span_bins < 1 {
            return bad("span_bins must be at least 1".into());
        }
        if self.null_runs < 2 {
            return bad("null_runs must be at least 2".into());
        }
        if self.baseline_runs < 1 {
            return bad("baseline_runs must be at least 1".into());
        }
        if !(self.baseline_fraction > 0.0 && self.baseline_fraction <= 1.0) {
            return bad("baseline_fraction outside (0,1]".into());
        }
        if let (Some(a), Some(b)) = (self.window_start, self.window_end) {
            if a > b {
                return bad("window_start after window_end".into());
            }
        }
        Ok(())
    }

    pub fn schema(&self) -> MessageSchema {
        MessageSchema {
            message_id: self.col_message_id.clone(),
            sender: self.col_sender.clone(),
            receiver: self.col_receiver.clone(),
            timestamp: self.col_timestamp.clone(),
            dimensions: self
                .dimensions
                .iter()
                .map(|d| (d.clone(), self.dimension_columns.get(d).cloned().unwrap_or_else(|| d.clone())))
                .collect(),
            window: match (self.window_start, self.window_end) {
                (None, None) => None,
                (a, b) => Some((a.unwrap_or(i64::MIN), b.unwrap_or(i64::MAX))),
            },
        }
    }

    /// Settings for files written by [`crate::synth::SynthCorpus::write_files`]:
    /// every area kept, no minimum edge weight, outcome left unnormalized, and
    /// a `planted` model over the planted features when there are any.
    pub fn for_synth(synth: &SynthConfig, paths: &SynthPaths, out_dir: &Path) -> Self {
        let mut cfg = PipelineConfig {
            messages: paths.messages.clone(),
            activity: paths.activity.clone(),
            areas: paths.areas.clone(),
            out_dir: out_dir.to_owned(),
            dimensions: synth.dimensions.iter().map(|d| d.name.clone()).collect(),
            alpha: synth.alpha,
            min_weight: 1,
            n_min: 1,
            min_users: 1,
            sd_mult: 3.0,
            seed: synth.seed,
            normalize_outcome: false,
            ..Default::default()
        };
        let dims: Vec<String> = cfg.dimensions.iter().map(|d| format!("{d}.spatial")).collect();
        cfg.regressions = vec![
            RegressionSpec {
                name: "density".into(),
                features: vec!["density".into()],
            },
            RegressionSpec {
                name: "full_spatial".into(),
                features: vec!["density".into(), "full.spatial".into()],
            },
            RegressionSpec {
                name: "dimension_spatial".into(),
                features: std::iter::once("density".to_owned()).chain(dims).collect(),
            },
        ];
        if let Some(o) = &synth.outcome {
            cfg.regressions.push(RegressionSpec {
                name: "planted".into(),
                features: o.betas.iter().map(|(f, _)| f.clone()).collect(),
            });
        }
        cfg
    }

    pub fn message_format(&self) -> MessageFormat {
        self.format.unwrap_or_else(|| MessageFormat::from_path(&self.messages))
    }
}
