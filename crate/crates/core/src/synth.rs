//! Synthetic corpora with known ground truth.
//!
//! Areas sit on a grid. Each user contacts people in their own area with an
//! area-specific probability and people elsewhere otherwise, so area-level
//! diversity varies across areas. For every dimension an exact number of
//! messages is labeled, chosen by weighted sampling where a message spanning
//! `d` km has weight `((d + s) / s)^coupling` (`s` = grid spacing). Labeled
//! messages score in `[0.9, 1)` and the rest in `[0, 0.8)`, so thresholding at
//! the configured percentile recovers the planted labels exactly.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Geometric, Normal, Poisson};

use crate::diversity::{compute_diversity, DiversityOptions};
use crate::error::{Error, Result};
use crate::geospan::haversine_km;
use crate::graphs::{build_dimension_graph, dimension_thresholds, nearest_rank};
use crate::ingest::{Area, AreaTable, Corpus, GeoActivityRecord, Locations, UserLocationMap};
use crate::seed::{stage_rng, Stage};
use crate::stats::minmax_normalize;

const KM_PER_DEGREE: f64 = 111.195;

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionSpec {
    pub name: String,
    /// Positive favors long ties, negative favors local ones.
    pub coupling: f64,
}

impl DimensionSpec {
    pub fn new(name: &str, coupling: f64) -> Self {
        DimensionSpec {
            name: name.to_owned(),
            coupling,
        }
    }
}

/// `gdp = intercept + Σ beta · feature + N(0, sigma)`, where each feature is a
/// min-max normalized area diversity named `<graph>.<social|spatial>`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedOutcome {
    pub intercept: f64,
    pub betas: Vec<(String, f64)>,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_areas: usize,
    pub grid_cols: usize,
    pub spacing_km: f64,
    /// Base user count; area `i` gets `users_per_area * (10 + i % 5) / 10`.
    pub users_per_area: usize,
    /// Mean out-contacts per user (at least 1).
    pub contacts_per_user: f64,
    /// Mean messages per contact (at least 1).
    pub messages_per_contact: f64,
    /// Range of the per-area probability that a contact is local.
    pub locality: (f64, f64),
    pub dimensions: Vec<DimensionSpec>,
    /// Percentile the pipeline will threshold at.
    pub alpha: f64,
    pub outcome: Option<PlantedOutcome>,
    /// Share of users whose activity is split across areas (left unlocated).
    pub unlocated_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 1,
            n_areas: 44,
            grid_cols: 8,
            spacing_km: 300.0,
            users_per_area: 200,
            contacts_per_user: 5.0,
            messages_per_contact: 2.0,
            locality: (0.1, 0.6),
            dimensions: vec![DimensionSpec::new("knowledge", 0.0), DimensionSpec::new("support", 0.0)],
            alpha: 0.9,
            outcome: None,
            unlocated_fraction: 0.0,
        }
    }
}

impl SynthConfig {
    /// Most contacts stay within the sender's area, as in state-level data.
    pub fn zero_distance_heavy() -> Self {
        SynthConfig {
            locality: (0.5, 0.8),
            ..Default::default()
        }
    }

    pub fn area_users(&self, area: usize) -> usize {
        self.users_per_area * (10 + area % 5) / 10
    }

    pub fn area_code(area: usize) -> String {
        format!("A{area:02}")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_owned()));
        if self.n_areas < 2 || self.grid_cols == 0 {
            return bad("need at least two areas and one grid column");
        }
        if self.users_per_area < 2 {
            return bad("need at least two users per area");
        }
        if !(self.contacts_per_user >= 1.0) || !(self.messages_per_contact >= 1.0) {
            return bad("expected degree below 1");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha outside (0,1)");
        }
        let (lo, hi) = self.locality;
        if !(0.0..=1.0).contains(&lo) || !(lo..=1.0).contains(&hi) {
            return bad("locality range outside [0,1]");
        }
        if !(0.0..1.0).contains(&self.unlocated_fraction) {
            return bad("unlocated_fraction outside [0,1)");
        }
        if !(self.spacing_km > 0.0) {
            return bad("spacing must be positive");
        }
        if self.dimensions.iter().any(|d| !d.coupling.is_finite()) {
            return bad("coupling must be finite");
        }
        if let Some(o) = &self.outcome {
            if !(o.sigma >= 0.0) {
                return bad("sigma must be nonnegative");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub corpus: Corpus,
    pub activity: Vec<GeoActivityRecord>,
    /// Planted locations of the users left locatable.
    pub locations: UserLocationMap,
    pub areas: AreaTable,
    /// Planted label flags per dimension, aligned with the corpus.
    pub labels: Vec<Vec<bool>>,
    /// Normalized planted features by name, keyed by area code.
    pub features: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthPaths {
    pub messages: PathBuf,
    pub activity: PathBuf,
    pub areas: PathBuf,
}

impl SynthCorpus {
    /// Writes `messages.csv`, `activity.csv` and `areas.csv` into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<SynthPaths> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let paths = SynthPaths {
            messages: dir.join("messages.csv"),
            activity: dir.join("activity.csv"),
            areas: dir.join("areas.csv"),
        };
        let create = |p: &Path| File::create(p).map(BufWriter::new).map_err(|e| Error::io(p, e));
        self.corpus.write_csv(create(&paths.messages)?)?;
        crate::ingest::write_activity(&self.activity, create(&paths.activity)?)?;
        let mut w = csv::Writer::from_writer(create(&paths.areas)?);
        w.write_record(["area", "population", "gdp_per_capita", "density", "centroid_lat", "centroid_lon"])?;
        for a in self.areas.areas() {
            w.write_record([
                a.code.clone(),
                a.population.to_string(),
                a.gdp_per_capita.to_string(),
                a.density.to_string(),
                a.centroid_lat.to_string(),
                a.centroid_lon.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(paths)
    }
}

fn grid_areas(cfg: &SynthConfig) -> Vec<(f64, f64)> {
    let step = cfg.spacing_km / KM_PER_DEGREE;
    (0..cfg.n_areas)
        .map(|i| {
            let (row, col) = (i / cfg.grid_cols, i % cfg.grid_cols);
            let lat = 30.0 + row as f64 * step;
            // widen longitude steps so east-west spacing matches north-south
            let lon = -120.0 + col as f64 * step / lat.to_radians().cos();
            (lat.clamp(-90.0, 90.0), ((lon + 180.0).rem_euclid(360.0)) - 180.0)
        })
        .collect()
}

pub fn generate_corpus(cfg: &SynthConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    let mut rng = stage_rng(cfg.seed, Stage::Synth, 0);
    let centroids = grid_areas(cfg);

    // users, grouped by area
    let mut user_area: Vec<usize> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); cfg.n_areas];
    for (a, m) in members.iter_mut().enumerate() {
        for k in 0..cfg.area_users(a) {
            m.push(names.len());
            user_area.push(a);
            names.push(format!("u{a:02}_{k:04}"));
        }
    }
    let n_users = names.len();
    let locality: Vec<f64> = (0..cfg.n_areas)
        .map(|_| rng.random_range(cfg.locality.0..=cfg.locality.1))
        .collect();

    let extra_contacts = Poisson::new(cfg.contacts_per_user - 1.0).ok();
    let extra_messages = Geometric::new(1.0 / cfg.messages_per_contact).map_err(|e| Error::Config(e.to_string()))?;

    // messages as (sender, receiver)
    let mut msgs: Vec<(usize, usize)> = Vec::new();
    for (i, &a) in user_area.iter().enumerate() {
        let k = 1 + extra_contacts.map_or(0, |d| d.sample(&mut rng) as usize);
        for _ in 0..k {
            let j = loop {
                let j = if rng.random_bool(locality[a]) {
                    members[a][rng.random_range(0..members[a].len())]
                } else {
                    rng.random_range(0..n_users)
                };
                if j != i {
                    break j;
                }
            };
            let m = 1 + extra_messages.sample(&mut rng) as usize;
            msgs.extend(std::iter::repeat_n((i, j), m));
        }
    }
    let n = msgs.len();

    let dist_km = |x: usize, y: usize| {
        let (p, q) = (centroids[user_area[x]], centroids[user_area[y]]);
        if user_area[x] == user_area[y] {
            0.0
        } else {
            haversine_km(p.0, p.1, q.0, q.1)
        }
    };

    // exact-count weighted sampling without replacement per dimension
    let n_labeled = n - nearest_rank(n, cfg.alpha) + 1;
    let mut labels = Vec::with_capacity(cfg.dimensions.len());
    for dim in &cfg.dimensions {
        let mut keys: Vec<(f64, usize)> = msgs
            .iter()
            .enumerate()
            .map(|(m, &(s, r))| {
                let w = ((dist_km(s, r) + cfg.spacing_km) / cfg.spacing_km).powf(dim.coupling);
                let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
                (u.ln() / w, m)
            })
            .collect();
        keys.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut flags = vec![false; n];
        for &(_, m) in keys.iter().take(n_labeled) {
            flags[m] = true;
        }
        labels.push(flags);
    }

    let mut corpus = Corpus::new(cfg.dimensions.iter().map(|d| d.name.clone()).collect());
    let mut scores = vec![0.0; cfg.dimensions.len()];
    let t0: i64 = 1_200_000_000;
    for (m, &(s, r)) in msgs.iter().enumerate() {
        for (d, flags) in labels.iter().enumerate() {
            scores[d] = if flags[m] {
                rng.random_range(0.9..1.0)
            } else {
                rng.random_range(0.0..0.8)
            };
        }
        let ts = t0 + rng.random_range(0..315_360_000i64);
        corpus.push_named(&format!("m{m}"), &names[s], &names[r], ts, &scores);
    }

    // activity: home-area posts, and a split history for unlocated users
    let mut activity = Vec::with_capacity(n_users);
    let mut locations = BTreeMap::new();
    for i in 0..n_users {
        let home = SynthConfig::area_code(user_area[i]);
        let count = rng.random_range(3..10u64);
        activity.push(GeoActivityRecord {
            user: names[i].clone(),
            area: home.clone(),
            count,
        });
        if rng.random_bool(cfg.unlocated_fraction) {
            let other = (user_area[i] + 1) % cfg.n_areas;
            activity.push(GeoActivityRecord {
                user: names[i].clone(),
                area: SynthConfig::area_code(other),
                count,
            });
        } else {
            locations.insert(names[i].clone(), home);
        }
    }
    let locations = UserLocationMap(locations);

    let mut area_rows: Vec<Area> = (0..cfg.n_areas)
        .map(|a| Area {
            code: SynthConfig::area_code(a),
            population: cfg.area_users(a) as f64 * 1000.0,
            gdp_per_capita: 0.0,
            density: rng.random_range(10.0..500.0),
            centroid_lat: centroids[a].0,
            centroid_lon: centroids[a].1,
            included: true,
            user_count: 0,
        })
        .collect();
    let mut features = BTreeMap::new();
    match &cfg.outcome {
        None => {
            for a in &mut area_rows {
                a.gdp_per_capita = rng.random_range(30_000.0..80_000.0);
            }
        }
        Some(outcome) => {
            let areas = AreaTable::new(area_rows.clone())?;
            features = planted_features(cfg, &corpus, &locations, &areas, outcome)?;
            let noise = Normal::new(0.0, outcome.sigma).map_err(|e| Error::Config(e.to_string()))?;
            for a in &mut area_rows {
                let mut y = outcome.intercept;
                for (name, beta) in &outcome.betas {
                    y += beta * features[name].get(&a.code).copied().unwrap_or(0.0);
                }
                a.gdp_per_capita = y + noise.sample(&mut rng);
            }
        }
    }

    Ok(SynthCorpus {
        corpus,
        activity,
        locations,
        areas: AreaTable::new(area_rows)?,
        labels,
        features,
    })
}

/// Area diversities the outcome is planted on, computed the same way the
/// pipeline computes them by default.
fn planted_features(
    cfg: &SynthConfig,
    corpus: &Corpus,
    locations: &UserLocationMap,
    areas: &AreaTable,
    outcome: &PlantedOutcome,
) -> Result<BTreeMap<String, BTreeMap<String, f64>>> {
    let located = Locations::resolve(&corpus.users, locations, areas, true);
    let thresholds = dimension_thresholds(corpus, cfg.alpha)?;
    let opts = DiversityOptions::new(areas.len());
    let mut out = BTreeMap::new();
    for (name, _) in &outcome.betas {
        let (graph_tag, kind) = name
            .rsplit_once('.')
            .ok_or_else(|| Error::Config(format!("feature `{name}` is not <graph>.<kind>")))?;
        let g = if graph_tag == crate::graphs::FULL_TAG {
            crate::graphs::build_graph(corpus, &located, 1)?
        } else {
            build_dimension_graph(corpus, &located, graph_tag, &thresholds)?
        };
        let table = compute_diversity(&g, &located, &opts)?;
        let values: Vec<f64> = table
            .areas
            .iter()
            .map(|a| match kind {
                "social" => Ok(a.social),
                "spatial" => Ok(a.spatial),
                other => Err(Error::Config(format!("unknown diversity kind `{other}`"))),
            })
            .collect::<Result<_>>()?;
        let norm = minmax_normalize(&values)?;
        out.insert(
            name.clone(),
            table
                .areas
                .iter()
                .zip(norm)
                .map(|(a, v)| (areas.areas()[a.area as usize].code.clone(), v))
                .collect(),
        );
    }
    Ok(out)
}
