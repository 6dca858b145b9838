//! Record ingestion: scored messages, geo-salient activity and area metadata.
//!
//! Users are interned into a [`UserRegistry`] as messages are read, so every
//! downstream structure works with dense [`UserId`]s. Locations are kept in two
//! forms: the string-keyed [`UserLocationMap`] that georeferencing produces, and
//! the dense [`Locations`] vector resolved against a registry and an
//! [`AreaTable`].

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserId(pub u32);

impl UserId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Interns user names into dense ids.
#[derive(Debug, Clone, Default)]
pub struct UserRegistry {
    ids: HashMap<String, UserId>,
    names: Vec<String>,
}

impl UserRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> UserId {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = UserId(self.names.len() as u32);
        self.names.push(name.to_owned());
        self.ids.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<UserId> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: UserId) -> &str {
        &self.names[id.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (UserId, &str)> {
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| (UserId(i as u32), n.as_str()))
    }
}

/// One directed message with a score per dimension, in corpus dimension order.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageRecord {
    pub message_id: String,
    pub sender: UserId,
    pub receiver: UserId,
    pub timestamp: i64,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MessageFormat {
    Csv,
    Jsonl,
}

impl MessageFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") | Some("ndjson") => MessageFormat::Jsonl,
            _ => MessageFormat::Csv,
        }
    }
}

/// Column names for the message file. Dimension entries are
/// `(dimension name, column name)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageSchema {
    pub message_id: String,
    pub sender: String,
    pub receiver: String,
    pub timestamp: String,
    pub dimensions: Vec<(String, String)>,
    /// Inclusive `[start, end]` timestamp window; rows outside are skipped.
    pub window: Option<(i64, i64)>,
}

impl MessageSchema {
    pub fn with_dimensions<S: AsRef<str>>(dims: &[S]) -> Self {
        MessageSchema {
            message_id: "message_id".into(),
            sender: "sender".into(),
            receiver: "receiver".into(),
            timestamp: "timestamp".into(),
            dimensions: dims
                .iter()
                .map(|d| (d.as_ref().to_owned(), d.as_ref().to_owned()))
                .collect(),
            window: None,
        }
    }

    pub fn dimension_names(&self) -> Vec<String> {
        self.dimensions.iter().map(|(d, _)| d.clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ParseReport {
    pub rows: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub self_loops: u64,
    pub outside_window: u64,
}

/// Messages stored column-wise; scores are one column per dimension.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub dimensions: Vec<String>,
    pub users: UserRegistry,
    pub message_ids: Vec<String>,
    pub senders: Vec<UserId>,
    pub receivers: Vec<UserId>,
    pub timestamps: Vec<i64>,
    pub scores: Vec<Vec<f64>>,
    pub report: ParseReport,
}

impl Corpus {
    pub fn new(dimensions: Vec<String>) -> Self {
        let scores = vec![Vec::new(); dimensions.len()];
        Corpus {
            dimensions,
            scores,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.senders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.senders.is_empty()
    }

    pub fn dimension_index(&self, name: &str) -> Result<usize> {
        self.dimensions
            .iter()
            .position(|d| d == name)
            .ok_or_else(|| Error::UnknownDimension(name.to_owned()))
    }

    /// Appends a message given by user names. Self-loops are dropped and
    /// counted; returns whether the message was kept.
    pub fn push_named(
        &mut self,
        message_id: &str,
        sender: &str,
        receiver: &str,
        timestamp: i64,
        scores: &[f64],
    ) -> bool {
        assert_eq!(scores.len(), self.dimensions.len());
        if sender == receiver {
            self.report.self_loops += 1;
            return false;
        }
        let s = self.users.intern(sender);
        let r = self.users.intern(receiver);
        self.message_ids.push(message_id.to_owned());
        self.senders.push(s);
        self.receivers.push(r);
        self.timestamps.push(timestamp);
        for (col, &v) in self.scores.iter_mut().zip(scores) {
            col.push(v);
        }
        self.report.accepted += 1;
        true
    }

    pub fn record(&self, i: usize) -> MessageRecord {
        MessageRecord {
            message_id: self.message_ids[i].clone(),
            sender: self.senders[i],
            receiver: self.receivers[i],
            timestamp: self.timestamps[i],
            scores: self.scores.iter().map(|c| c[i]).collect(),
        }
    }

    /// Writes the corpus in the CSV layout `parse_messages` reads with
    /// [`MessageSchema::with_dimensions`].
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["message_id", "sender", "receiver", "timestamp"];
        header.extend(self.dimensions.iter().map(String::as_str));
        w.write_record(&header)?;
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        for i in 0..self.len() {
            row.clear();
            row.push(self.message_ids[i].clone());
            row.push(self.users.name(self.senders[i]).to_owned());
            row.push(self.users.name(self.receivers[i]).to_owned());
            row.push(self.timestamps[i].to_string());
            row.extend(self.scores.iter().map(|c| c[i].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Parses a message file. Malformed rows (bad timestamp, unparseable or
/// out-of-range score, missing id) are skipped and counted in
/// [`Corpus::report`].
pub fn parse_messages(path: &Path, format: MessageFormat, schema: &MessageSchema) -> Result<Corpus> {
    let file = open(path)?;
    if file.metadata().map_err(|e| Error::io(path, e))?.len() == 0 {
        return Err(Error::Empty(format!("message file {} is empty", path.display())));
    }
    match format {
        MessageFormat::Csv => parse_messages_csv(file, schema),
        MessageFormat::Jsonl => parse_messages_jsonl(BufReader::new(file), schema),
    }
}

fn parse_timestamp(raw: &str) -> Option<i64> {
    let raw = raw.trim();
    if let Ok(v) = raw.parse::<i64>() {
        return Some(v);
    }
    let v = raw.parse::<f64>().ok()?;
    if v.is_finite() && v.abs() < 9.0e18 {
        Some(v.floor() as i64)
    } else {
        None
    }
}

fn parse_score(raw: &str) -> std::result::Result<f64, String> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| format!("unparseable score `{raw}`"))?;
    if !(0.0..=1.0).contains(&v) {
        return Err(format!("score {v} outside [0,1]"));
    }
    Ok(v)
}

struct RowSink<'a> {
    corpus: Corpus,
    window: Option<(i64, i64)>,
    scores: Vec<f64>,
    schema: &'a MessageSchema,
}

impl<'a> RowSink<'a> {
    fn new(schema: &'a MessageSchema) -> Self {
        RowSink {
            corpus: Corpus::new(schema.dimension_names()),
            window: schema.window,
            scores: Vec::with_capacity(schema.dimensions.len()),
            schema,
        }
    }

    /// Validates one row whose scores are already in `self.scores`; `None`
    /// marks a missing cell.
    fn accept(&mut self, id: Option<&str>, sender: Option<&str>, receiver: Option<&str>, ts: Option<&str>) -> bool {
        self.corpus.report.rows += 1;
        let (Some(id), Some(sender), Some(receiver), Some(ts)) = (id, sender, receiver, ts) else {
            self.corpus.report.rejected += 1;
            return false;
        };
        if sender.is_empty() || receiver.is_empty() {
            self.corpus.report.rejected += 1;
            return false;
        }
        let Some(ts) = parse_timestamp(ts) else {
            self.corpus.report.rejected += 1;
            return false;
        };
        if self.scores.len() != self.schema.dimensions.len() {
            self.corpus.report.rejected += 1;
            return false;
        }
        if let Some((start, end)) = self.window {
            if ts < start || ts > end {
                self.corpus.report.outside_window += 1;
                return false;
            }
        }
        let scores = std::mem::take(&mut self.scores);
        let kept = self.corpus.push_named(id, sender, receiver, ts, &scores);
        self.scores = scores;
        kept
    }
}

fn parse_messages_csv<R: Read>(input: R, schema: &MessageSchema) -> Result<Corpus> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.to_owned()))
    };
    let id_col = col(&schema.message_id)?;
    let sender_col = col(&schema.sender)?;
    let receiver_col = col(&schema.receiver)?;
    let ts_col = col(&schema.timestamp)?;
    let dim_cols = schema
        .dimensions
        .iter()
        .map(|(_, c)| col(c))
        .collect::<Result<Vec<_>>>()?;

    let mut sink = RowSink::new(schema);
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(_) => {
                sink.corpus.report.rows += 1;
                sink.corpus.report.rejected += 1;
                continue;
            }
        }
        sink.scores.clear();
        for &c in &dim_cols {
            match record.get(c).map(parse_score) {
                Some(Ok(v)) => sink.scores.push(v),
                _ => break,
            }
        }
        sink.accept(
            record.get(id_col),
            record.get(sender_col),
            record.get(receiver_col),
            record.get(ts_col),
        );
    }
    Ok(sink.corpus)
}

fn json_field(obj: &serde_json::Map<String, serde_json::Value>, key: &str) -> Option<String> {
    match obj.get(key)? {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn parse_messages_jsonl<R: BufRead>(input: R, schema: &MessageSchema) -> Result<Corpus> {
    let mut sink = RowSink::new(schema);
    let mut seen_columns = false;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let obj = match serde_json::from_str::<serde_json::Value>(&line) {
            Ok(serde_json::Value::Object(o)) => o,
            _ => {
                sink.corpus.report.rows += 1;
                sink.corpus.report.rejected += 1;
                continue;
            }
        };
        // The first well-formed object stands in for a header row.
        if !seen_columns {
            for name in [&schema.message_id, &schema.sender, &schema.receiver, &schema.timestamp]
                .into_iter()
                .chain(schema.dimensions.iter().map(|(_, c)| c))
            {
                if !obj.contains_key(name.as_str()) {
                    return Err(Error::MissingColumn(name.clone()));
                }
            }
            seen_columns = true;
        }
        sink.scores.clear();
        for (_, c) in &schema.dimensions {
            let v = match obj.get(c.as_str()) {
                Some(serde_json::Value::Number(n)) => n.as_f64().map(|v| v.to_string()),
                Some(serde_json::Value::String(s)) => Some(s.clone()),
                _ => None,
            };
            match v.as_deref().map(parse_score) {
                Some(Ok(v)) => sink.scores.push(v),
                _ => break,
            }
        }
        let id = json_field(&obj, &schema.message_id);
        let sender = json_field(&obj, &schema.sender);
        let receiver = json_field(&obj, &schema.receiver);
        let ts = json_field(&obj, &schema.timestamp);
        sink.accept(id.as_deref(), sender.as_deref(), receiver.as_deref(), ts.as_deref());
    }
    Ok(sink.corpus)
}

/// Posts by one user in geo-salient forums resolved to one area.
#[derive(Debug, Clone, PartialEq, Eq, serde::Deserialize, Serialize)]
pub struct GeoActivityRecord {
    pub user: String,
    pub area: String,
    pub count: u64,
}

pub fn parse_activity(path: &Path) -> Result<Vec<GeoActivityRecord>> {
    read_activity(open(path)?)
}

pub fn read_activity<R: Read>(input: R) -> Result<Vec<GeoActivityRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    for name in ["user", "area", "count"] {
        if !headers.iter().any(|h| h == name) {
            return Err(Error::MissingColumn(name.into()));
        }
    }
    let mut out = Vec::new();
    for (line, row) in rdr.deserialize().enumerate() {
        let row: GeoActivityRecord = row.map_err(|e| Error::Malformed {
            line: line as u64 + 2,
            reason: e.to_string(),
        })?;
        out.push(row);
    }
    Ok(out)
}

pub fn write_activity<W: Write>(records: &[GeoActivityRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// User name to area code, ordered by user name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UserLocationMap(pub BTreeMap<String, String>);

impl UserLocationMap {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, user: &str) -> Option<&str> {
        self.0.get(user).map(String::as_str)
    }

    pub fn area_counts(&self) -> BTreeMap<String, u64> {
        let mut counts = BTreeMap::new();
        for area in self.0.values() {
            *counts.entry(area.clone()).or_insert(0) += 1;
        }
        counts
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["user", "area"])?;
        for (u, a) in &self.0 {
            w.write_record([u, a])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Assigns a user to area `a` when they posted at least `n_min` times in
/// forums of `a` and those posts make up at least `purity` of all their
/// geo-salient posts. Duplicate `(user, area)` rows are summed.
pub fn georeference_users<'a, I>(activity: I, n_min: u64, purity: f64) -> Result<UserLocationMap>
where
    I: IntoIterator<Item = &'a GeoActivityRecord>,
{
    if n_min < 1 {
        return Err(Error::Config("n_min must be at least 1".into()));
    }
    if !(purity > 0.5 && purity <= 1.0) {
        return Err(Error::Config(format!("purity {purity} outside (0.5, 1]")));
    }
    let mut per_user: BTreeMap<&str, BTreeMap<&str, u64>> = BTreeMap::new();
    for r in activity {
        *per_user
            .entry(r.user.as_str())
            .or_default()
            .entry(r.area.as_str())
            .or_insert(0) += r.count;
    }
    let mut out = BTreeMap::new();
    for (user, areas) in per_user {
        let total: u64 = areas.values().sum();
        if total == 0 {
            continue;
        }
        // With purity > 0.5 at most one area can qualify.
        let best = areas
            .iter()
            .find(|(_, &c)| c >= n_min && c as f64 / total as f64 + 1e-12 >= purity);
        if let Some((area, _)) = best {
            out.insert(user.to_owned(), (*area).to_owned());
        }
    }
    Ok(UserLocationMap(out))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Area {
    pub code: String,
    pub population: f64,
    pub gdp_per_capita: f64,
    pub density: f64,
    pub centroid_lat: f64,
    pub centroid_lon: f64,
    pub included: bool,
    pub user_count: u64,
}

/// Area metadata sorted by area code.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AreaTable {
    areas: Vec<Area>,
    index: HashMap<String, usize>,
}

#[derive(serde::Deserialize)]
struct AreaRow {
    area: String,
    population: f64,
    gdp_per_capita: f64,
    density: f64,
    centroid_lat: f64,
    centroid_lon: f64,
}

impl AreaTable {
    pub fn new(mut areas: Vec<Area>) -> Result<Self> {
        areas.sort_by(|a, b| a.code.cmp(&b.code));
        let mut index = HashMap::with_capacity(areas.len());
        for (i, a) in areas.iter().enumerate() {
            if !(a.population > 0.0) {
                return Err(Error::Config(format!("area {}: population must be positive", a.code)));
            }
            if !(-90.0..=90.0).contains(&a.centroid_lat) || !(-180.0..=180.0).contains(&a.centroid_lon) {
                return Err(Error::Config(format!("area {}: centroid out of range", a.code)));
            }
            if index.insert(a.code.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate area {}", a.code)));
            }
        }
        Ok(AreaTable { areas, index })
    }

    pub fn parse(path: &Path) -> Result<Self> {
        Self::read(open(path)?)
    }

    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        for name in ["area", "population", "gdp_per_capita", "density", "centroid_lat", "centroid_lon"] {
            if !headers.iter().any(|h| h == name) {
                return Err(Error::MissingColumn(name.into()));
            }
        }
        let mut areas = Vec::new();
        for (line, row) in rdr.deserialize::<AreaRow>().enumerate() {
            let r = row.map_err(|e| Error::Malformed {
                line: line as u64 + 2,
                reason: e.to_string(),
            })?;
            areas.push(Area {
                code: r.area,
                population: r.population,
                gdp_per_capita: r.gdp_per_capita,
                density: r.density,
                centroid_lat: r.centroid_lat,
                centroid_lon: r.centroid_lon,
                included: true,
                user_count: 0,
            });
        }
        Self::new(areas)
    }

    /// Writes the metadata columns plus `user_count` and `included`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "area",
            "population",
            "gdp_per_capita",
            "density",
            "centroid_lat",
            "centroid_lon",
            "user_count",
            "included",
        ])?;
        for a in &self.areas {
            w.write_record([
                a.code.clone(),
                a.population.to_string(),
                a.gdp_per_capita.to_string(),
                a.density.to_string(),
                a.centroid_lat.to_string(),
                a.centroid_lon.to_string(),
                a.user_count.to_string(),
                a.included.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }

    pub fn areas(&self) -> &[Area] {
        &self.areas
    }

    pub fn areas_mut(&mut self) -> &mut [Area] {
        &mut self.areas
    }

    pub fn index_of(&self, code: &str) -> Option<usize> {
        self.index.get(code).copied()
    }

    pub fn get(&self, code: &str) -> Option<&Area> {
        self.index_of(code).map(|i| &self.areas[i])
    }

    pub fn included(&self) -> impl Iterator<Item = &Area> {
        self.areas.iter().filter(|a| a.included)
    }

    pub fn included_count(&self) -> usize {
        self.included().count()
    }
}

/// Fits `user_count ~ population` by least squares and excludes areas whose
/// residual lies more than `sd_mult` residual standard deviations from the
/// mean residual, as well as areas with fewer than `min_users` users. Both
/// rules are applied to the full set at once. Areas missing from
/// `user_counts` count as having zero users.
pub fn filter_states_by_penetration(
    areas: &AreaTable,
    user_counts: &BTreeMap<String, u64>,
    sd_mult: f64,
    min_users: u64,
) -> Result<AreaTable> {
    let counts: Vec<f64> = areas
        .areas
        .iter()
        .map(|a| user_counts.get(&a.code).copied().unwrap_or(0) as f64)
        .collect();
    let with_users = counts.iter().filter(|&&c| c > 0.0).count();
    if with_users < 3 {
        return Err(Error::TooFewAreas {
            needed: 3,
            got: with_users,
        });
    }
    let pops: Vec<f64> = areas.areas.iter().map(|a| a.population).collect();
    let n = pops.len() as f64;
    let mean_x = pops.iter().sum::<f64>() / n;
    let mean_y = counts.iter().sum::<f64>() / n;
    let sxx: f64 = pops.iter().map(|x| (x - mean_x).powi(2)).sum();
    if sxx <= f64::EPSILON * mean_x.abs().max(1.0) {
        return Err(Error::DegenerateFit("all populations are equal".into()));
    }
    let sxy: f64 = pops
        .iter()
        .zip(&counts)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residuals: Vec<f64> = pops
        .iter()
        .zip(&counts)
        .map(|(x, y)| y - (intercept + slope * x))
        .collect();
    let mean_r = residuals.iter().sum::<f64>() / n;
    let sd_r = (residuals.iter().map(|r| (r - mean_r).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();

    let mut out = areas.clone();
    for ((area, r), c) in out.areas.iter_mut().zip(&residuals).zip(&counts) {
        area.user_count = *c as u64;
        // residuals at rounding level mean a perfect fit, with no outliers
        let outlier = sd_r > 1e-9 * mean_y.abs().max(1.0) && (r - mean_r).abs() > sd_mult * sd_r;
        area.included = !outlier && area.user_count >= min_users;
    }
    Ok(out)
}

/// Dense user → area lookup over a registry. Area indices refer to rows of
/// the [`AreaTable`] used to resolve them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Locations {
    area_of: Vec<Option<u32>>,
}

impl Locations {
    /// Resolves `map` against `users`. With `included_only`, users of
    /// excluded areas stay unlocated; so do users whose area is not in the
    /// table.
    pub fn resolve(users: &UserRegistry, map: &UserLocationMap, areas: &AreaTable, included_only: bool) -> Self {
        let area_of = users
            .iter()
            .map(|(_, name)| {
                let code = map.get(name)?;
                let idx = areas.index_of(code)?;
                (!included_only || areas.areas[idx].included).then_some(idx as u32)
            })
            .collect();
        Locations { area_of }
    }

    pub fn from_indices(area_of: Vec<Option<u32>>) -> Self {
        Locations { area_of }
    }

    #[inline]
    pub fn area(&self, user: UserId) -> Option<u32> {
        self.area_of.get(user.index()).copied().flatten()
    }

    #[inline]
    pub fn is_located(&self, user: UserId) -> bool {
        self.area(user).is_some()
    }

    pub fn len(&self) -> usize {
        self.area_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.area_of.is_empty()
    }

    pub fn located_count(&self) -> usize {
        self.area_of.iter().filter(|a| a.is_some()).count()
    }

    pub fn as_slice(&self) -> &[Option<u32>] {
        &self.area_of
    }

    /// Located users per area index, `n_areas` long.
    pub fn area_counts(&self, n_areas: usize) -> Vec<u64> {
        let mut counts = vec![0u64; n_areas];
        for a in self.area_of.iter().flatten() {
            counts[*a as usize] += 1;
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn act(user: &str, area: &str, count: u64) -> GeoActivityRecord {
        GeoActivityRecord {
            user: user.into(),
            area: area.into(),
            count,
        }
    }

    fn schema() -> MessageSchema {
        MessageSchema::with_dimensions(&["knowledge", "support"])
    }

    #[test]
    fn parses_scores_in_order() {
        let csv = "message_id,sender,receiver,timestamp,knowledge,support\nm1,a,b,100,0.97,0.12\n";
        let c = parse_messages_csv(csv.as_bytes(), &schema()).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.record(0).scores, vec![0.97, 0.12]);
        assert_eq!(c.users.name(c.senders[0]), "a");
    }

    #[test]
    fn out_of_range_score_is_rejected() {
        let csv = "message_id,sender,receiver,timestamp,knowledge,support\nm1,a,b,100,1.3,0.1\n";
        let c = parse_messages_csv(csv.as_bytes(), &schema()).unwrap();
        assert_eq!(c.len(), 0);
        assert_eq!(c.report.rejected, 1);
    }

    #[test]
    fn three_row_fixture_with_one_bad_row() {
        let csv = "message_id,sender,receiver,timestamp,knowledge,support\n\
                   m1,a,b,100,0.5,0.5\n\
                   m2,a,c,notatime,0.5,0.5\n\
                   m3,b,c,102,0.1,0.9\n";
        let c = parse_messages_csv(csv.as_bytes(), &schema()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.report.rejected, 1);
        assert_eq!(c.report.rows, 3);
    }

    #[test]
    fn short_row_and_self_loop() {
        let csv = "message_id,sender,receiver,timestamp,knowledge,support\n\
                   m1,a,b,100,0.5\n\
                   m2,a,a,100,0.5,0.5\n";
        let c = parse_messages_csv(csv.as_bytes(), &schema()).unwrap();
        assert_eq!(c.len(), 0);
        assert_eq!(c.report.rejected, 1);
        assert_eq!(c.report.self_loops, 1);
    }

    #[test]
    fn missing_declared_column_is_an_error() {
        let csv = "message_id,sender,receiver,timestamp,knowledge\nm1,a,b,1,0.5\n";
        assert!(matches!(
            parse_messages_csv(csv.as_bytes(), &schema()),
            Err(Error::MissingColumn(c)) if c == "support"
        ));
    }

    #[test]
    fn window_filters_by_timestamp() {
        let csv = "message_id,sender,receiver,timestamp,knowledge,support\n\
                   m1,a,b,100,0.5,0.5\nm2,a,b,200,0.5,0.5\nm3,a,b,300,0.5,0.5\n";
        let mut s = schema();
        s.window = Some((150, 300));
        let c = parse_messages_csv(csv.as_bytes(), &s).unwrap();
        assert_eq!(c.timestamps, vec![200, 300]);
        assert_eq!(c.report.outside_window, 1);
    }

    #[test]
    fn jsonl_accepts_numeric_ids() {
        let text = "{\"message_id\":1,\"sender\":\"a\",\"receiver\":\"b\",\"timestamp\":5,\"knowledge\":0.2,\"support\":0.3}\n\
                    not json\n\
                    {\"message_id\":2,\"sender\":\"b\",\"receiver\":\"a\",\"timestamp\":6,\"knowledge\":2.0,\"support\":0.3}\n";
        let c = parse_messages_jsonl(text.as_bytes(), &schema()).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.message_ids[0], "1");
        assert_eq!(c.report.rejected, 2);
    }

    #[test]
    fn missing_file_is_an_error() {
        let err = parse_messages(Path::new("/nonexistent/x.csv"), MessageFormat::Csv, &schema()).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn georeference_rules() {
        let recs = vec![
            act("u1", "CA", 3),
            act("u2", "CA", 3),
            act("u2", "NY", 1),
            act("u3", "CA", 19),
            act("u3", "NY", 1),
            act("u4", "TX", 2),
        ];
        let m = georeference_users(&recs, 3, 0.95).unwrap();
        assert_eq!(m.get("u1"), Some("CA"));
        assert_eq!(m.get("u2"), None);
        assert_eq!(m.get("u3"), Some("CA"));
        assert_eq!(m.get("u4"), None);
    }

    #[test]
    fn georeference_rejects_bad_parameters() {
        assert!(georeference_users(&[], 0, 0.95).is_err());
        assert!(georeference_users(&[], 3, 0.5).is_err());
    }

    fn area(code: &str, pop: f64) -> Area {
        Area {
            code: code.into(),
            population: pop,
            gdp_per_capita: 1.0,
            density: 1.0,
            centroid_lat: 40.0,
            centroid_lon: -100.0,
            included: true,
            user_count: 0,
        }
    }

    #[test]
    fn zero_residual_areas_all_included() {
        let areas = AreaTable::new((0..6).map(|i| area(&format!("A{i}"), 1e6 * (i + 1) as f64)).collect()).unwrap();
        let counts: BTreeMap<_, _> = (0..6).map(|i| (format!("A{i}"), 2000 * (i as u64 + 1))).collect();
        let out = filter_states_by_penetration(&areas, &counts, 1.0, 1000).unwrap();
        assert_eq!(out.included_count(), 6);
        // stability: refiltering the survivors keeps them all
        let again = AreaTable::new(out.included().cloned().collect()).unwrap();
        let out2 = filter_states_by_penetration(&again, &counts, 1.0, 1000).unwrap();
        assert_eq!(out2.included_count(), 6);
    }

    #[test]
    fn min_users_excludes_small_areas() {
        let areas = AreaTable::new((0..5).map(|i| area(&format!("A{i}"), 1e6 * (i + 1) as f64)).collect()).unwrap();
        let counts: BTreeMap<_, _> = (0..5).map(|i| (format!("A{i}"), 900 * (i as u64 + 1))).collect();
        let out = filter_states_by_penetration(&areas, &counts, 1.0, 1000).unwrap();
        assert!(!out.get("A0").unwrap().included);
        assert!(out.get("A1").unwrap().included);
    }

    #[test]
    fn equal_populations_are_degenerate() {
        let areas = AreaTable::new((0..4).map(|i| area(&format!("A{i}"), 5e5)).collect()).unwrap();
        let counts: BTreeMap<_, _> = (0..4).map(|i| (format!("A{i}"), 5000 + i as u64)).collect();
        assert!(matches!(
            filter_states_by_penetration(&areas, &counts, 1.0, 1000),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn area_table_validates_ranges() {
        let mut a = area("X", 10.0);
        a.centroid_lat = 95.0;
        assert!(AreaTable::new(vec![a]).is_err());
        assert!(AreaTable::new(vec![area("Y", 0.0)]).is_err());
    }
}
