use rand::seq::index::sample;

use super::{design, diversity_of, fit, ingest, Ingested, PipelineConfig};
use crate::diversity::DiversityTable;
use crate::error::{Result, StageExt};
use crate::graphs::build_graph_where;
use crate::seed::{stage_rng, Stage};

pub const RANDOM_TAG: &str = "random";

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRow {
    /// `random.social` or `random.spatial`.
    pub feature: String,
    pub runs: usize,
    pub mean_r2_adj: f64,
    /// `None` with a single run.
    pub sd_r2_adj: Option<f64>,
    pub mean_beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineReport {
    pub fraction: f64,
    /// Messages drawn per run.
    pub sample_size: usize,
    pub rows: Vec<BaselineRow>,
    /// Per-run `R²_adj`, indexed `[feature][run]`.
    pub per_run: Vec<Vec<f64>>,
}

impl BaselineReport {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["feature", "runs", "sample_size", "mean_r2_adj", "sd_r2_adj", "sd_defined", "mean_beta"])?;
        for r in &self.rows {
            w.write_record([
                r.feature.clone(),
                r.runs.to_string(),
                self.sample_size.to_string(),
                r.mean_r2_adj.to_string(),
                r.sd_r2_adj.map(|v| v.to_string()).unwrap_or_default(),
                r.sd_r2_adj.is_some().to_string(),
                r.mean_beta.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Graphs from uniform message samples of size `fraction · n` (at least
/// one), each run with its own derived seed; fits `gdp ~ random.social` and
/// `gdp ~ random.spatial` per run and aggregates.
pub fn random_baseline(cfg: &PipelineConfig) -> Result<BaselineReport> {
    let ing = ingest(cfg)?;
    random_baseline_on(cfg, &ing)
}

pub fn random_baseline_on(cfg: &PipelineConfig, ing: &Ingested) -> Result<BaselineReport> {
    let run = || {
        cfg.validate()?;
        let n = ing.corpus.len();
        let k = ((cfg.baseline_fraction * n as f64).round() as usize).clamp(1, n);
        let features = [format!("{RANDOM_TAG}.social"), format!("{RANDOM_TAG}.spatial")];
        let mut r2 = vec![Vec::with_capacity(cfg.baseline_runs); features.len()];
        let mut beta = vec![Vec::with_capacity(cfg.baseline_runs); features.len()];
        for r in 0..cfg.baseline_runs {
            let mut rng = stage_rng(cfg.seed, Stage::Baseline, r as u64 + 1);
            let mut keep = vec![false; n];
            for i in sample(&mut rng, n, k) {
                keep[i] = true;
            }
            let params = vec![("fraction".to_owned(), cfg.baseline_fraction.to_string())];
            let g = build_graph_where(&ing.corpus, &ing.locations, 1, RANDOM_TAG, params, |i| keep[i]);
            let table: DiversityTable = diversity_of(cfg, ing, &g)?;
            let tables = [table];
            for (j, f) in features.iter().enumerate() {
                let d = design(cfg, ing, &tables, std::slice::from_ref(f), &features)?;
                let rep = fit(&d)?;
                r2[j].push(rep.r2_adj);
                beta[j].push(rep.coefficients[0].beta);
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let rows = features
            .iter()
            .enumerate()
            .map(|(j, f)| {
                let m = mean(&r2[j]);
                let sd = (r2[j].len() > 1).then(|| {
                    (r2[j].iter().map(|x| (x - m).powi(2)).sum::<f64>() / (r2[j].len() - 1) as f64).sqrt()
                });
                BaselineRow {
                    feature: f.clone(),
                    runs: r2[j].len(),
                    mean_r2_adj: m,
                    sd_r2_adj: sd,
                    mean_beta: mean(&beta[j]),
                }
            })
            .collect();
        Ok(BaselineReport {
            fraction: cfg.baseline_fraction,
            sample_size: k,
            rows,
            per_run: r2,
        })
    };
    run().stage("baseline")
}
