//! Geographic span of ties and the location-reshuffling null model.
//!
//! Ties are placed into distance bins fixed by the quantiles of the real
//! distance distribution. For a dimension graph, `p(d|l)` is the share of the
//! ties (or messages) at distance bin `l` that carry the dimension. The null
//! model permutes user locations, recomputes `p_null(d|l)` with the same bin
//! boundaries, and reports `Δp = p / p_null - 1` with a confidence interval
//! over the null runs.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graphs::{nearest_rank, CommGraph};
use crate::ingest::{AreaTable, Locations, UserLocationMap};
use crate::seed::{stage_rng, Stage};

pub const EARTH_RADIUS_KM: f64 = 6371.0088;

pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Great-circle distance between two area centroids.
pub fn state_distance(a: &str, b: &str, areas: &AreaTable) -> Result<f64> {
    let x = areas.get(a).ok_or_else(|| Error::UnknownArea(a.to_owned()))?;
    let y = areas.get(b).ok_or_else(|| Error::UnknownArea(b.to_owned()))?;
    if a == b {
        return Ok(0.0);
    }
    Ok(haversine_km(x.centroid_lat, x.centroid_lon, y.centroid_lat, y.centroid_lon))
}

/// Pairwise centroid distances indexed by area-table row.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    km: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(areas: &AreaTable) -> Self {
        let a = areas.areas();
        let n = a.len();
        let mut km = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    km[i * n + j] = haversine_km(a[i].centroid_lat, a[i].centroid_lon, a[j].centroid_lat, a[j].centroid_lon);
                }
            }
        }
        DistanceMatrix { n, km }
    }

    #[inline]
    pub fn get(&self, a: u32, b: u32) -> f64 {
        self.km[a as usize * self.n + b as usize]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Each tie counted once.
    Tie,
    /// Each message counted once.
    Message,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Tie => "tie",
            Variant::Message => "message",
        }
    }

    #[inline]
    fn count(self, weight: u32) -> u64 {
        match self {
            Variant::Tie => 1,
            Variant::Message => weight as u64,
        }
    }
}

/// Distance bins over a tie universe. `boundaries[i]` is the inclusive upper
/// edge of bin `i`; the last bin is unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanBins {
    pub boundaries: Vec<f64>,
    pub median_km: Vec<f64>,
    pub tie_counts: Vec<u64>,
    pub message_counts: Vec<u64>,
    pub warnings: Vec<String>,
}

impl SpanBins {
    pub fn len(&self) -> usize {
        self.boundaries.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lowest bin whose upper boundary is `>= km`.
    #[inline]
    pub fn bin_of(&self, km: f64) -> usize {
        self.boundaries.partition_point(|&b| b < km)
    }

    pub fn counts(&self, variant: Variant) -> &[u64] {
        match variant {
            Variant::Tie => &self.tie_counts,
            Variant::Message => &self.message_counts,
        }
    }

    /// Bin index for every ordered area pair.
    fn pair_bins(&self, dist: &DistanceMatrix) -> Vec<u8> {
        dist.km.iter().map(|&d| self.bin_of(d) as u8).collect()
    }
}

fn edge_distances(g: &CommGraph, locations: &Locations, dist: &DistanceMatrix) -> Vec<(f64, u32)> {
    g.edges()
        .filter_map(|(s, d, w)| Some((dist.get(locations.area(s)?, locations.area(d)?), w)))
        .collect()
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Splits the located edges of `g` into `n_bins` distance bins at the
/// nearest-rank `i / n_bins` quantiles of edge distance. Repeated boundaries
/// and an empty last bin are merged away with a warning.
pub fn span_bins(g: &CommGraph, locations: &Locations, dist: &DistanceMatrix, n_bins: usize) -> Result<SpanBins> {
    if n_bins < 1 {
        return Err(Error::Config("need at least one distance bin".into()));
    }
    let mut edges = edge_distances(g, locations, dist);
    if edges.is_empty() {
        return Err(Error::Empty(format!("graph {} has no located edges", g.tag())));
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = edges.len();
    let mut boundaries: Vec<f64> = (1..n_bins)
        .map(|i| edges[nearest_rank(n, i as f64 / n_bins as f64) - 1].0)
        .collect();
    boundaries.dedup();
    let max = edges[n - 1].0;
    if boundaries.last().is_some_and(|&b| b >= max) {
        boundaries.pop();
    }
    let mut warnings = Vec::new();
    if boundaries.len() + 1 < n_bins {
        warnings.push(format!(
            "graph {}: only {} distinct distance bins out of {n_bins}",
            g.tag(),
            boundaries.len() + 1
        ));
    }
    let mut bins = SpanBins {
        boundaries,
        median_km: Vec::new(),
        tie_counts: Vec::new(),
        message_counts: Vec::new(),
        warnings,
    };
    let nb = bins.len();
    let mut members: Vec<Vec<f64>> = vec![Vec::new(); nb];
    bins.tie_counts = vec![0; nb];
    bins.message_counts = vec![0; nb];
    for &(d, w) in &edges {
        let b = bins.bin_of(d);
        members[b].push(d);
        bins.tie_counts[b] += 1;
        bins.message_counts[b] += w as u64;
    }
    bins.median_km = members.iter().map(|m| median_sorted(m)).collect();
    Ok(bins)
}

/// Ties (or messages) of `g` per bin.
pub fn bin_counts(g: &CommGraph, locations: &Locations, dist: &DistanceMatrix, bins: &SpanBins, variant: Variant) -> Vec<u64> {
    let mut out = vec![0u64; bins.len()];
    for (s, d, w) in g.edges() {
        if let (Some(a), Some(b)) = (locations.area(s), locations.area(d)) {
            out[bins.bin_of(dist.get(a, b))] += variant.count(w);
        }
    }
    out
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// `|E_d@l| / |E@l|` per bin, `None` where the universe bin is empty.
pub fn conditional_probability(
    g_d: &CommGraph,
    universe: &CommGraph,
    locations: &Locations,
    dist: &DistanceMatrix,
    bins: &SpanBins,
    variant: Variant,
) -> Vec<Option<f64>> {
    let num = bin_counts(g_d, locations, dist, bins, variant);
    let den = bin_counts(universe, locations, dist, bins, variant);
    num.iter().zip(&den).map(|(&n, &d)| ratio(n, d)).collect()
}

/// Uniform permutation of locations over the same users.
pub fn null_reshuffle(locations: &UserLocationMap, seed: u64) -> UserLocationMap {
    let mut rng = stage_rng(seed, Stage::NullModel, 0);
    let mut values: Vec<String> = locations.0.values().cloned().collect();
    values.shuffle(&mut rng);
    UserLocationMap(locations.0.keys().cloned().zip(values).collect())
}

/// Permutes the areas of located users; unlocated users stay unlocated.
pub fn reshuffle_locations<R: Rng + ?Sized>(locations: &Locations, rng: &mut R) -> Locations {
    let slots: Vec<usize> = (0..locations.len())
        .filter(|&i| locations.as_slice()[i].is_some())
        .collect();
    let mut values: Vec<Option<u32>> = slots.iter().map(|&i| locations.as_slice()[i]).collect();
    values.shuffle(rng);
    let mut out = locations.as_slice().to_vec();
    for (&i, v) in slots.iter().zip(values) {
        out[i] = v;
    }
    Locations::from_indices(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CiMethod {
    /// `mean ± 1.96 · sd / sqrt(runs)`.
    Normal,
    /// `mean ± 1.96 · sd`: the band a single null draw falls in.
    Spread,
    /// Percentile bootstrap of the mean over runs.
    Bootstrap { resamples: usize },
    /// `mean ± 1.96 · sqrt(sd² + v)`, where `v` is the binomial sampling
    /// variance of the observed `p` carried into Δp.
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioMode {
    /// Average `p / p_null_r - 1` over runs.
    PerRun,
    /// `p / mean_r(p_null_r) - 1`.
    MeanNull,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullModelConfig {
    pub runs: usize,
    pub seed: u64,
    pub ci: CiMethod,
    pub ratio: RatioMode,
}

impl Default for NullModelConfig {
    fn default() -> Self {
        NullModelConfig {
            runs: 50,
            seed: 0,
            ci: CiMethod::Combined,
            ratio: RatioMode::PerRun,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaPCell {
    pub dimension: String,
    pub variant: Variant,
    pub bin: usize,
    pub median_km: f64,
    pub p: Option<f64>,
    pub p_null_mean: Option<f64>,
    pub delta_p: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    /// Null runs with a defined `p_null`.
    pub runs: usize,
    /// Set when some run had an empty null bin.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeltaPReport {
    pub cells: Vec<DeltaPCell>,
}

impl DeltaPReport {
    pub fn profile(&self, dimension: &str, variant: Variant) -> Vec<Option<f64>> {
        self.cells
            .iter()
            .filter(|c| c.dimension == dimension && c.variant == variant)
            .map(|c| c.delta_p)
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "dimension",
            "variant",
            "bin_index",
            "bin_median_km",
            "p",
            "p_null_mean",
            "delta_p",
            "ci_low",
            "ci_high",
            "runs",
            "flagged",
        ])?;
        for c in &self.cells {
            w.write_record([
                c.dimension.clone(),
                c.variant.as_str().to_owned(),
                c.bin.to_string(),
                c.median_km.to_string(),
                opt(c.p),
                opt(c.p_null_mean),
                opt(c.delta_p),
                opt(c.ci_low),
                opt(c.ci_high),
                c.runs.to_string(),
                c.flagged.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Per-bin counts of the universe and each dimension graph, both variants.
struct RunCounts {
    universe: [Vec<u64>; 2],
    dims: Vec<[Vec<u64>; 2]>,
}

struct EdgeArrays {
    src: Vec<u32>,
    dst: Vec<u32>,
    w: Vec<u32>,
}

impl EdgeArrays {
    fn new(g: &CommGraph) -> Self {
        EdgeArrays {
            src: g.edge_sources().into_iter().map(|u| u.0).collect(),
            dst: g.targets().iter().map(|u| u.0).collect(),
            w: g.weights().to_vec(),
        }
    }

    fn count(&self, area_of: &[Option<u32>], pair_bins: &[u8], n_areas: usize, n_bins: usize) -> [Vec<u64>; 2] {
        let mut ties = vec![0u64; n_bins];
        let mut msgs = vec![0u64; n_bins];
        for i in 0..self.src.len() {
            let a = area_of.get(self.src[i] as usize).copied().flatten();
            let b = area_of.get(self.dst[i] as usize).copied().flatten();
            if let (Some(a), Some(b)) = (a, b) {
                let bin = pair_bins[a as usize * n_areas + b as usize] as usize;
                ties[bin] += 1;
                msgs[bin] += self.w[i] as u64;
            }
        }
        [ties, msgs]
    }
}

fn variant_slot(v: Variant) -> usize {
    match v {
        Variant::Tie => 0,
        Variant::Message => 1,
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Interval around the mean of `xs`; `extra_var` only widens `Combined`.
fn interval(xs: &[f64], ci: CiMethod, rng_seed: u64, extra_var: f64) -> (f64, f64, f64) {
    let (mean, sd) = mean_sd(xs);
    match ci {
        CiMethod::Combined => {
            let h = 1.96 * (sd * sd + extra_var).sqrt();
            (mean, mean - h, mean + h)
        }
        CiMethod::Normal => {
            let h = 1.96 * sd / (xs.len() as f64).sqrt();
            (mean, mean - h, mean + h)
        }
        CiMethod::Spread => (mean, mean - 1.96 * sd, mean + 1.96 * sd),
        CiMethod::Bootstrap { resamples } => {
            let mut rng = stage_rng(rng_seed, Stage::NullModel, u64::MAX);
            let mut means: Vec<f64> = (0..resamples.max(1))
                .map(|_| (0..xs.len()).map(|_| xs[rng.random_range(0..xs.len())]).sum::<f64>() / xs.len() as f64)
                .collect();
            means.sort_by(f64::total_cmp);
            let lo = means[nearest_rank(means.len(), 0.025) - 1];
            let hi = means[nearest_rank(means.len(), 0.975) - 1];
            (mean, lo.min(mean), hi.max(mean))
        }
    }
}

/// Δp profiles for each dimension graph against `universe`, both variants.
/// Bins stay fixed at `bins`; each null run permutes `locations` with its
/// own seed derived from `cfg.seed`.
pub fn delta_p(
    universe: &CommGraph,
    dims: &[&CommGraph],
    locations: &Locations,
    dist: &DistanceMatrix,
    bins: &SpanBins,
    cfg: &NullModelConfig,
) -> Result<DeltaPReport> {
    if cfg.runs < 2 {
        return Err(Error::Config("null model needs at least 2 runs".into()));
    }
    let n_bins = bins.len();
    let n_areas = dist.len();
    let pair_bins = bins.pair_bins(dist);
    let uni_edges = EdgeArrays::new(universe);
    let dim_edges: Vec<EdgeArrays> = dims.iter().map(|g| EdgeArrays::new(g)).collect();

    let count_all = |area_of: &[Option<u32>]| RunCounts {
        universe: uni_edges.count(area_of, &pair_bins, n_areas, n_bins),
        dims: dim_edges
            .iter()
            .map(|e| e.count(area_of, &pair_bins, n_areas, n_bins))
            .collect(),
    };
    let real = count_all(locations.as_slice());
    let null: Vec<RunCounts> = (0..cfg.runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = stage_rng(cfg.seed, Stage::NullModel, r as u64 + 1);
            let shuffled = reshuffle_locations(locations, &mut rng);
            count_all(shuffled.as_slice())
        })
        .collect();

    let mut cells = Vec::new();
    for (di, g) in dims.iter().enumerate() {
        for variant in [Variant::Tie, Variant::Message] {
            let v = variant_slot(variant);
            for bin in 0..n_bins {
                let p = ratio(real.dims[di][v][bin], real.universe[v][bin]);
                let p_nulls: Vec<Option<f64>> = null
                    .iter()
                    .map(|run| ratio(run.dims[di][v][bin], run.universe[v][bin]).filter(|&x| x > 0.0))
                    .collect();
                let valid: Vec<f64> = p_nulls.iter().flatten().copied().collect();
                let flagged = valid.len() < cfg.runs;
                let p_null_mean = (!valid.is_empty()).then(|| mean_sd(&valid).0);
                let cell_seed = cfg.seed ^ ((di as u64) << 40) ^ ((v as u64) << 32) ^ bin as u64;
                // binomial variance of the observed p over its bin
                let var_p = p.map_or(0.0, |p| p * (1.0 - p) / real.universe[v][bin].max(1) as f64);
                let (delta, lo, hi) = match p {
                    Some(p) if valid.len() >= 2 => match (cfg.ratio, cfg.ci) {
                        (RatioMode::PerRun, ci) => {
                            let ratios: Vec<f64> = valid.iter().map(|q| p / q - 1.0).collect();
                            let inv = valid.iter().map(|q| 1.0 / q).sum::<f64>() / valid.len() as f64;
                            let (m, lo, hi) = interval(&ratios, ci, cell_seed, var_p * inv * inv);
                            (Some(m), Some(lo.max(-1.0)), Some(hi))
                        }
                        (RatioMode::MeanNull, CiMethod::Combined) => {
                            let (m, sd) = mean_sd(&valid);
                            let d = p / m - 1.0;
                            let var = var_p / (m * m) + p * p * sd * sd / m.powi(4);
                            let h = 1.96 * var.sqrt();
                            (Some(d), Some((d - h).max(-1.0)), Some(d + h))
                        }
                        (RatioMode::MeanNull, ci) => {
                            let (m, lo, hi) = interval(&valid, ci, cell_seed, 0.0);
                            let high = if lo > 0.0 { p / lo - 1.0 } else { f64::INFINITY };
                            (Some(p / m - 1.0), Some((p / hi - 1.0).max(-1.0)), Some(high))
                        }
                    },
                    _ => (None, None, None),
                };
                cells.push(DeltaPCell {
                    dimension: g.tag().to_owned(),
                    variant,
                    bin,
                    median_km: bins.median_km[bin],
                    p,
                    p_null_mean,
                    delta_p: delta,
                    ci_low: lo,
                    ci_high: hi,
                    runs: valid.len(),
                    flagged: flagged || delta.is_none(),
                });
            }
        }
    }
    Ok(DeltaPReport { cells })
}
