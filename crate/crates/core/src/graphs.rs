//! Communication graphs.
//!
//! A [`CommGraph`] is a directed, weighted graph stored as a compressed
//! adjacency list indexed by [`UserId`]; weights are message counts. Graphs are
//! built by a parallel sort-and-count over message partitions, so the result
//! does not depend on message order or thread scheduling.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{Corpus, Locations, MessageRecord, UserId, UserRegistry};

pub const FULL_TAG: &str = "full";

/// Percentile thresholds per dimension, in corpus dimension order.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionThresholds {
    pub alpha: f64,
    pub thetas: Vec<(String, f64)>,
}

impl DimensionThresholds {
    pub fn theta(&self, dimension: &str) -> Option<f64> {
        self.thetas.iter().find(|(d, _)| d == dimension).map(|(_, t)| *t)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["dimension", "alpha", "theta"])?;
        for (d, t) in &self.thetas {
            w.write_record([d.clone(), self.alpha.to_string(), t.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut alpha = None;
        let mut thetas = Vec::new();
        for (line, row) in rdr.records().enumerate() {
            let row = row?;
            let bad = |reason: &str| Error::Malformed {
                line: line as u64 + 2,
                reason: reason.to_owned(),
            };
            let d = row.get(0).ok_or_else(|| bad("missing dimension"))?;
            let a: f64 = row.get(1).and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad alpha"))?;
            let t: f64 = row.get(2).and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad theta"))?;
            alpha = Some(a);
            thetas.push((d.to_owned(), t));
        }
        Ok(DimensionThresholds {
            alpha: alpha.ok_or_else(|| Error::Empty("thresholds file".into()))?,
            thetas,
        })
    }
}

/// Rank `k` (1-based) of the nearest-rank `alpha` percentile among `n` values:
/// the smallest `k` with `k >= alpha * n`.
pub fn nearest_rank(n: usize, alpha: f64) -> usize {
    let x = alpha * n as f64;
    let r = x.round();
    let k = if (x - r).abs() <= 1e-9 * (n as f64).max(1.0) { r } else { x.ceil() };
    (k as usize).clamp(1, n)
}

/// Smallest attained value `v` with at least `alpha` of `values` at or below
/// it. Reorders `values`.
pub fn percentile_nearest_rank(values: &mut [f64], alpha: f64) -> f64 {
    let k = nearest_rank(values.len(), alpha);
    let (_, v, _) = values.select_nth_unstable_by(k - 1, f64::total_cmp);
    *v
}

pub fn dimension_thresholds(corpus: &Corpus, alpha: f64) -> Result<DimensionThresholds> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha {alpha} outside (0,1)")));
    }
    if corpus.is_empty() {
        return Err(Error::Empty("no messages to threshold".into()));
    }
    let thetas = corpus
        .dimensions
        .par_iter()
        .zip(corpus.scores.par_iter())
        .map(|(d, col)| {
            let mut values = col.clone();
            (d.clone(), percentile_nearest_rank(&mut values, alpha))
        })
        .collect();
    Ok(DimensionThresholds { alpha, thetas })
}

#[inline]
pub fn passes(score: f64, theta: f64) -> bool {
    score >= theta
}

/// Dimensions whose threshold `m` meets. `dimensions` names the entries of
/// `m.scores`.
pub fn label_message(m: &MessageRecord, dimensions: &[String], t: &DimensionThresholds) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (d, theta) in &t.thetas {
        let score = dimensions
            .iter()
            .position(|x| x == d)
            .and_then(|i| m.scores.get(i))
            .ok_or_else(|| Error::MissingScore(d.clone()))?;
        if passes(*score, *theta) {
            out.push(d.clone());
        }
    }
    Ok(out)
}

/// Per-message label flags for one dimension.
pub fn label_mask(corpus: &Corpus, dimension: &str, t: &DimensionThresholds) -> Result<Vec<bool>> {
    let idx = corpus.dimension_index(dimension)?;
    let theta = t
        .theta(dimension)
        .ok_or_else(|| Error::UnknownDimension(dimension.to_owned()))?;
    Ok(corpus.scores[idx].par_iter().map(|&s| passes(s, theta)).collect())
}

/// Directed weighted graph over a user registry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommGraph {
    tag: String,
    params: Vec<(String, String)>,
    offsets: Vec<usize>,
    targets: Vec<UserId>,
    weights: Vec<u32>,
    nodes: Vec<UserId>,
}

#[inline]
fn pair_key(src: UserId, dst: UserId) -> u64 {
    ((src.0 as u64) << 32) | dst.0 as u64
}

impl CommGraph {
    /// Builds from `(key, weight)` runs sorted by key with unique keys.
    fn from_sorted(tag: String, params: Vec<(String, String)>, n_users: usize, pairs: &[(u64, u32)]) -> Self {
        let mut offsets = vec![0usize; n_users + 1];
        let mut targets = Vec::with_capacity(pairs.len());
        let mut weights = Vec::with_capacity(pairs.len());
        let mut is_node = vec![false; n_users];
        for &(key, w) in pairs {
            let src = (key >> 32) as usize;
            let dst = (key & 0xFFFF_FFFF) as usize;
            offsets[src + 1] += 1;
            targets.push(UserId(dst as u32));
            weights.push(w);
            is_node[src] = true;
            is_node[dst] = true;
        }
        for i in 0..n_users {
            offsets[i + 1] += offsets[i];
        }
        let nodes = is_node
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| UserId(i as u32))
            .collect();
        CommGraph {
            tag,
            params,
            offsets,
            targets,
            weights,
            nodes,
        }
    }

    /// Collects explicit edges, summing duplicates. Zero weights are dropped.
    pub fn from_edges<I>(tag: &str, n_users: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (UserId, UserId, u32)>,
    {
        let mut acc: BTreeMap<u64, u32> = BTreeMap::new();
        for (s, d, w) in edges {
            assert!(s.index() < n_users && d.index() < n_users, "user id out of range");
            if w > 0 {
                *acc.entry(pair_key(s, d)).or_insert(0) += w;
            }
        }
        let pairs: Vec<_> = acc.into_iter().collect();
        Self::from_sorted(tag.to_owned(), Vec::new(), n_users, &pairs)
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn params(&self) -> &[(String, String)] {
        &self.params
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Number of user slots (registry size at build time).
    pub fn n_users(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn nodes(&self) -> &[UserId] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.iter().map(|&w| w as u64).sum()
    }

    pub fn contains(&self, u: UserId) -> bool {
        self.nodes.binary_search(&u).is_ok()
    }

    /// Out-neighbors of `u` (sorted by id) and the matching weights.
    pub fn out_edges(&self, u: UserId) -> (&[UserId], &[u32]) {
        let i = u.index();
        if i + 1 >= self.offsets.len() {
            return (&[], &[]);
        }
        let (a, b) = (self.offsets[i], self.offsets[i + 1]);
        (&self.targets[a..b], &self.weights[a..b])
    }

    pub fn out_degree(&self, u: UserId) -> usize {
        self.out_edges(u).0.len()
    }

    pub fn weight(&self, src: UserId, dst: UserId) -> Option<u32> {
        let (t, w) = self.out_edges(src);
        t.binary_search(&dst).ok().map(|i| w[i])
    }

    pub fn has_edge(&self, src: UserId, dst: UserId) -> bool {
        self.weight(src, dst).is_some()
    }

    /// Edges as `(src, dst, weight)`, ordered by source then target.
    pub fn edges(&self) -> impl Iterator<Item = (UserId, UserId, u32)> + '_ {
        (0..self.n_users()).flat_map(move |s| {
            let src = UserId(s as u32);
            let (t, w) = self.out_edges(src);
            t.iter().zip(w).map(move |(&d, &w)| (src, d, w))
        })
    }

    /// Union of in- and out-edges: `(i, j)` carries `w(i,j) + w(j,i)`.
    pub fn symmetrized(&self) -> CommGraph {
        let mut pairs: Vec<(u64, u32)> = self
            .edges()
            .flat_map(|(s, d, w)| [(pair_key(s, d), w), (pair_key(d, s), w)])
            .collect();
        pairs.par_sort_unstable_by_key(|p| p.0);
        let mut merged: Vec<(u64, u32)> = Vec::with_capacity(pairs.len());
        for (k, w) in pairs {
            match merged.last_mut() {
                Some((last, c)) if *last == k => *c += w,
                _ => merged.push((k, w)),
            }
        }
        let mut params = self.params.clone();
        params.push(("direction".into(), "union".into()));
        CommGraph::from_sorted(self.tag.clone(), params, self.n_users(), &merged)
    }

    /// Sources of edges, aligned with the internal target/weight arrays.
    pub(crate) fn edge_sources(&self) -> Vec<UserId> {
        let mut out = Vec::with_capacity(self.edge_count());
        for s in 0..self.n_users() {
            let n = self.offsets[s + 1] - self.offsets[s];
            out.extend(std::iter::repeat_n(UserId(s as u32), n));
        }
        out
    }

    pub(crate) fn targets(&self) -> &[UserId] {
        &self.targets
    }

    pub(crate) fn weights(&self) -> &[u32] {
        &self.weights
    }

    /// Writes a one-line `#` header with tag and parameters, then a
    /// `src,dst,weight` edge list using user names.
    pub fn write_edge_list<W: Write>(&self, users: &UserRegistry, mut out: W) -> Result<()> {
        write!(out, "# tag={}", self.tag)?;
        for (k, v) in &self.params {
            write!(out, " {k}={v}")?;
        }
        writeln!(out)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["src", "dst", "weight"])?;
        for (s, d, wt) in self.edges() {
            w.write_record([users.name(s), users.name(d), &wt.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads an edge list written by [`CommGraph::write_edge_list`], interning
    /// unseen names into `users`.
    pub fn read_edge_list<R: BufRead>(mut input: R, users: &mut UserRegistry) -> Result<Self> {
        let mut header = String::new();
        input.read_line(&mut header)?;
        let header = header
            .trim_end()
            .strip_prefix('#')
            .ok_or_else(|| Error::Malformed {
                line: 1,
                reason: "missing `#` header".into(),
            })?;
        let mut tag = None;
        let mut params = Vec::new();
        for item in header.split_whitespace() {
            let (k, v) = item.split_once('=').ok_or_else(|| Error::Malformed {
                line: 1,
                reason: format!("bad header item `{item}`"),
            })?;
            if k == "tag" {
                tag = Some(v.to_owned());
            } else {
                params.push((k.to_owned(), v.to_owned()));
            }
        }
        let tag = tag.ok_or_else(|| Error::Malformed {
            line: 1,
            reason: "header has no tag".into(),
        })?;
        let mut rdr = csv::Reader::from_reader(input);
        let mut edges = Vec::new();
        for (line, row) in rdr.records().enumerate() {
            let row = row?;
            let w: u32 = row
                .get(2)
                .and_then(|v| v.parse().ok())
                .filter(|&w| w > 0)
                .ok_or_else(|| Error::Malformed {
                    line: line as u64 + 3,
                    reason: "bad weight".into(),
                })?;
            let s = users.intern(row.get(0).unwrap_or_default());
            let d = users.intern(row.get(1).unwrap_or_default());
            edges.push((s, d, w));
        }
        let mut g = CommGraph::from_edges(&tag, users.len(), edges);
        g.params = params;
        Ok(g)
    }
}

/// Counts messages per located ordered pair among messages selected by
/// `keep`, keeping pairs with count `>= min_weight`.
pub fn build_graph_where<F>(
    corpus: &Corpus,
    locations: &Locations,
    min_weight: u32,
    tag: &str,
    params: Vec<(String, String)>,
    keep: F,
) -> CommGraph
where
    F: Fn(usize) -> bool + Sync,
{
    let mut keys: Vec<u64> = (0..corpus.len())
        .into_par_iter()
        .filter(|&i| {
            keep(i) && locations.is_located(corpus.senders[i]) && locations.is_located(corpus.receivers[i])
        })
        .map(|i| pair_key(corpus.senders[i], corpus.receivers[i]))
        .collect();
    keys.par_sort_unstable();
    let mut pairs: Vec<(u64, u32)> = Vec::new();
    for k in keys {
        match pairs.last_mut() {
            Some((last, c)) if *last == k => *c += 1,
            _ => pairs.push((k, 1)),
        }
    }
    pairs.retain(|&(_, c)| c >= min_weight);
    CommGraph::from_sorted(tag.to_owned(), params, corpus.users.len(), &pairs)
}

/// Full communication graph over located users.
pub fn build_graph(corpus: &Corpus, locations: &Locations, min_weight: u32) -> Result<CommGraph> {
    if min_weight < 1 {
        return Err(Error::Config("min_weight must be at least 1".into()));
    }
    let params = vec![("min_weight".to_owned(), min_weight.to_string())];
    Ok(build_graph_where(corpus, locations, min_weight, FULL_TAG, params, |_| true))
}

/// Graph of messages labeled with `dimension`; weights are never thresholded.
pub fn build_dimension_graph(
    corpus: &Corpus,
    locations: &Locations,
    dimension: &str,
    t: &DimensionThresholds,
) -> Result<CommGraph> {
    let mask = label_mask(corpus, dimension, t)?;
    let theta = t.theta(dimension).unwrap_or_default();
    let params = vec![
        ("min_weight".to_owned(), "1".to_owned()),
        ("alpha".to_owned(), t.alpha.to_string()),
        ("theta".to_owned(), theta.to_string()),
    ];
    Ok(build_graph_where(corpus, locations, 1, dimension, params, |i| mask[i]))
}

/// Share of `g1` edges present in `g2` and of `g2` edges present in `g1`,
/// ignoring weights. An empty graph yields 0.
pub fn edge_overlap(g1: &CommGraph, g2: &CommGraph) -> (f64, f64) {
    let common = g1.edges().filter(|&(s, d, _)| g2.has_edge(s, d)).count() as f64;
    let frac = |g: &CommGraph| {
        if g.edge_count() == 0 {
            0.0
        } else {
            common / g.edge_count() as f64
        }
    };
    (frac(g1), frac(g2))
}

/// Fraction of `reference` nodes that are nodes of `g`.
pub fn node_fraction(g: &CommGraph, reference: &CommGraph) -> f64 {
    if reference.node_count() == 0 {
        return 0.0;
    }
    g.nodes().iter().filter(|&&u| reference.contains(u)).count() as f64 / reference.node_count() as f64
}

/// Half-open power-of-two bin `[lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LogBin {
    pub lower: u64,
    pub upper: u64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphStats {
    pub tag: String,
    pub node_count: usize,
    pub edge_count: usize,
    pub total_weight: u64,
    /// Total degree (in + out edges) → number of nodes.
    pub degree_counts: BTreeMap<u64, u64>,
    /// Edge weight → number of edges.
    pub strength_counts: BTreeMap<u64, u64>,
    pub degree_hist: Vec<LogBin>,
    pub strength_hist: Vec<LogBin>,
}

pub fn log_bins(counts: &BTreeMap<u64, u64>) -> Vec<LogBin> {
    let mut bins: Vec<LogBin> = Vec::new();
    for (&value, &count) in counts {
        let lower = if value == 0 { 0 } else { 1u64 << (63 - value.leading_zeros()) };
        let upper = if value == 0 { 1 } else { lower.saturating_mul(2) };
        match bins.last_mut() {
            Some(b) if b.lower == lower => b.count += count,
            _ => bins.push(LogBin { lower, upper, count }),
        }
    }
    bins
}

pub fn graph_summary(g: &CommGraph) -> GraphStats {
    let mut degree = vec![0u64; g.n_users()];
    for (s, d, _) in g.edges() {
        degree[s.index()] += 1;
        degree[d.index()] += 1;
    }
    let mut degree_counts = BTreeMap::new();
    for &u in g.nodes() {
        *degree_counts.entry(degree[u.index()]).or_insert(0) += 1;
    }
    let mut strength_counts = BTreeMap::new();
    for &w in &g.weights {
        *strength_counts.entry(w as u64).or_insert(0) += 1;
    }
    GraphStats {
        tag: g.tag.clone(),
        node_count: g.node_count(),
        edge_count: g.edge_count(),
        total_weight: g.total_weight(),
        degree_hist: log_bins(&degree_counts),
        strength_hist: log_bins(&strength_counts),
        degree_counts,
        strength_counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Corpus;

    fn u(i: u32) -> UserId {
        UserId(i)
    }

    fn corpus(pairs: &[(&str, &str, f64)]) -> Corpus {
        let mut c = Corpus::new(vec!["knowledge".into()]);
        for (i, (s, r, k)) in pairs.iter().enumerate() {
            c.push_named(&format!("m{i}"), s, r, 0, &[*k]);
        }
        c
    }

    fn all_located(c: &Corpus) -> Locations {
        Locations::from_indices(vec![Some(0); c.users.len()])
    }

    #[test]
    fn uniform_grid_percentile() {
        let mut v: Vec<f64> = (1..=100).map(|i| i as f64 / 100.0).collect();
        assert_eq!(percentile_nearest_rank(&mut v, 0.99), 0.99);
    }

    #[test]
    fn constant_scores_percentile() {
        let mut v = vec![0.5; 37];
        assert_eq!(percentile_nearest_rank(&mut v, 0.75), 0.5);
        assert!(v.iter().all(|&s| passes(s, 0.5)));
    }

    #[test]
    fn nearest_rank_guards_float_products() {
        assert_eq!(nearest_rank(100, 0.99), 99);
        assert_eq!(nearest_rank(10, 0.7), 7);
        assert_eq!(nearest_rank(3, 0.5), 2);
        assert_eq!(nearest_rank(1, 0.01), 1);
    }

    #[test]
    fn thresholds_reject_bad_input() {
        let c = Corpus::new(vec!["k".into()]);
        assert!(matches!(dimension_thresholds(&c, 0.9), Err(Error::Empty(_))));
        let c = corpus(&[("a", "b", 0.1)]);
        assert!(dimension_thresholds(&c, 1.0).is_err());
    }

    #[test]
    fn label_boundaries() {
        let dims = vec!["knowledge".to_string(), "support".to_string()];
        let t = DimensionThresholds {
            alpha: 0.9,
            thetas: vec![("knowledge".into(), 0.8), ("support".into(), 0.6)],
        };
        let mut m = MessageRecord {
            message_id: "m".into(),
            sender: u(0),
            receiver: u(1),
            timestamp: 0,
            scores: vec![0.8, 0.1],
        };
        assert_eq!(label_message(&m, &dims, &t).unwrap(), vec!["knowledge"]);
        m.scores = vec![0.0, 0.0];
        assert!(label_message(&m, &dims, &t).unwrap().is_empty());
        m.scores = vec![0.95, 0.7];
        assert_eq!(label_message(&m, &dims, &t).unwrap(), vec!["knowledge", "support"]);
        m.scores = vec![0.95];
        assert!(matches!(label_message(&m, &dims, &t), Err(Error::MissingScore(d)) if d == "support"));
    }

    #[test]
    fn min_weight_boundary() {
        let mut rows = vec![("a", "b", 0.0); 4];
        rows.extend(vec![("b", "c", 0.0); 3]);
        let c = corpus(&rows);
        let g = build_graph(&c, &all_located(&c), 4).unwrap();
        assert_eq!(g.edge_count(), 1);
        let (a, b) = (c.users.get("a").unwrap(), c.users.get("b").unwrap());
        assert_eq!(g.weight(a, b), Some(4));
        assert_eq!(g.node_count(), 2);
        assert!(build_graph(&c, &all_located(&c), 0).is_err());
    }

    #[test]
    fn unlocated_endpoints_are_dropped() {
        let c = corpus(&[("a", "b", 0.0), ("a", "c", 0.0)]);
        let c_id = c.users.get("c").unwrap();
        let mut idx = vec![Some(0); c.users.len()];
        idx[c_id.index()] = None;
        let g = build_graph(&c, &Locations::from_indices(idx), 1).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!(!g.contains(c_id));
    }

    #[test]
    fn single_passing_message_gives_unit_edge() {
        let c = corpus(&[("a", "b", 0.99), ("a", "b", 0.1), ("b", "a", 0.2)]);
        let t = DimensionThresholds {
            alpha: 0.9,
            thetas: vec![("knowledge".into(), 0.9)],
        };
        let g = build_dimension_graph(&c, &all_located(&c), "knowledge", &t).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.total_weight(), 1);
        assert_eq!(g.tag(), "knowledge");
        assert_eq!(g.param("theta"), Some("0.9"));
    }

    #[test]
    fn overlap_cases() {
        let g1 = CommGraph::from_edges("a", 4, [(u(0), u(1), 1), (u(1), u(2), 3)]);
        let g2 = CommGraph::from_edges("b", 4, [(u(2), u(3), 1)]);
        assert_eq!(edge_overlap(&g1, &g1), (1.0, 1.0));
        assert_eq!(edge_overlap(&g1, &g2), (0.0, 0.0));
        let empty = CommGraph::from_edges("e", 4, []);
        assert_eq!(edge_overlap(&g1, &empty), (0.0, 0.0));
        let g3 = CommGraph::from_edges("c", 4, [(u(0), u(1), 9)]);
        assert_eq!(edge_overlap(&g1, &g3), (0.5, 1.0));
    }

    #[test]
    fn summary_single_edge_and_star() {
        let g = CommGraph::from_edges("x", 2, [(u(0), u(1), 5)]);
        let s = graph_summary(&g);
        assert_eq!((s.node_count, s.edge_count), (2, 1));
        assert_eq!(s.strength_counts, BTreeMap::from([(5, 1)]));
        assert_eq!(s.strength_hist, vec![LogBin { lower: 4, upper: 8, count: 1 }]);

        let star = CommGraph::from_edges("s", 5, (1..5).map(|i| (u(0), u(i), 1)));
        let s = graph_summary(&star);
        assert_eq!(s.degree_counts, BTreeMap::from([(1, 4), (4, 1)]));
    }

    #[test]
    fn edge_list_round_trip() {
        let mut users = UserRegistry::new();
        let ids: Vec<_> = ["a", "b", "c"].iter().map(|n| users.intern(n)).collect();
        let mut g = CommGraph::from_edges("knowledge", 3, [(ids[0], ids[1], 2), (ids[2], ids[0], 7)]);
        g.params = vec![("alpha".into(), "0.99".into()), ("theta".into(), "0.5".into())];
        let mut buf = Vec::new();
        g.write_edge_list(&users, &mut buf).unwrap();
        let back = CommGraph::read_edge_list(buf.as_slice(), &mut users).unwrap();
        assert_eq!(back, g);

        let mut fresh = UserRegistry::new();
        let back = CommGraph::read_edge_list(buf.as_slice(), &mut fresh).unwrap();
        let mut again = Vec::new();
        back.write_edge_list(&fresh, &mut again).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn thresholds_csv_round_trip() {
        let t = DimensionThresholds {
            alpha: 0.99,
            thetas: vec![("knowledge".into(), 0.8123), ("support".into(), 0.25)],
        };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(DimensionThresholds::read_csv(buf.as_slice()).unwrap(), t);
    }
}
