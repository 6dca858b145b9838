use std::collections::BTreeMap;
use std::path::Path;

use super::{sha256_hex, tie_weight_ks, Bundle, Graphs, Ingested, PipelineConfig, Regressions, Span};
use crate::diversity::{write_diversity_csv, DiversityTable};
use crate::error::{Result, StageExt};
use crate::graphs::{edge_overlap, graph_summary, label_mask, node_fraction, DimensionThresholds};
use crate::stats::spearman_matrix;

/// Outputs of whichever stages ran; later stages may be absent.
#[derive(Debug, Clone, Copy)]
pub struct Stages<'a> {
    pub ingested: &'a Ingested,
    pub thresholds: Option<&'a DimensionThresholds>,
    pub graphs: Option<&'a Graphs>,
    pub diversity: Option<&'a [DiversityTable]>,
    pub span: Option<&'a Span>,
    pub regressions: Option<&'a Regressions>,
}

impl<'a> Stages<'a> {
    pub fn new(ingested: &'a Ingested) -> Self {
        Stages {
            ingested,
            thresholds: None,
            graphs: None,
            diversity: None,
            span: None,
            regressions: None,
        }
    }
}

/// Row counts of every stage present, keyed as in the manifest.
pub fn stage_counts(cfg: &PipelineConfig, st: &Stages) -> Result<BTreeMap<String, String>> {
    let mut m = BTreeMap::new();
    let mut put = |k: String, v: usize| {
        m.insert(k, v.to_string());
    };
    let ing = st.ingested;
    let rep = &ing.corpus.report;
    put("messages.rows".into(), rep.rows as usize);
    put("messages.accepted".into(), ing.corpus.len());
    put("messages.rejected".into(), rep.rejected as usize);
    put("messages.self_loops".into(), rep.self_loops as usize);
    put("messages.outside_window".into(), rep.outside_window as usize);
    let located = ing.located_mask();
    put("messages.located".into(), located.iter().filter(|&&b| b).count());
    put("activity.records".into(), ing.activity_records);
    put("users.total".into(), ing.corpus.users.len());
    put("users.georeferenced".into(), ing.location_map.len());
    put("users.located".into(), ing.locations.located_count());
    put("areas.total".into(), ing.areas.len());
    put("areas.included".into(), ing.areas.included_count());
    if let Some(t) = st.thresholds {
        for d in &cfg.dimensions {
            let mask = label_mask(&ing.corpus, d, t)?;
            put(format!("messages.labeled.{d}"), mask.iter().filter(|&&b| b).count());
            put(
                format!("messages.labeled_located.{d}"),
                mask.iter().zip(&located).filter(|(a, b)| **a && **b).count(),
            );
        }
    }
    if let Some(g) = st.graphs {
        for g in std::iter::once(&g.universe).chain(std::iter::once(&g.full)).chain(&g.dims) {
            put(format!("graph.{}.nodes", g.tag()), g.node_count());
            put(format!("graph.{}.edges", g.tag()), g.edge_count());
            put(format!("graph.{}.weight", g.tag()), g.total_weight() as usize);
        }
    }
    for t in st.diversity.unwrap_or_default() {
        put(format!("diversity.{}.users", t.tag), t.users.len());
        put(format!("diversity.{}.areas", t.tag), t.areas.len());
    }
    if let Some(s) = st.span {
        put("span.bins".into(), s.bins.len());
        put("span.cells".into(), s.report.cells.len());
    }
    if let Some(r) = st.regressions {
        for (name, rep) in &r.models {
            put(format!("regression.{name}.n"), rep.n);
        }
    }
    Ok(m)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the reports of every stage present plus `manifest.txt` into
/// `dir`; returns the manifest.
pub fn write_reports(cfg: &PipelineConfig, st: &Stages, dir: &Path) -> Result<BTreeMap<String, String>> {
    let run = || {
        let mut b = Bundle::create(dir)?;
        let cfg_text = cfg.to_kv_string();
        b.text("config.txt", &cfg_text)?;
        write_ingest(&mut b, st.ingested)?;
        if let Some(t) = st.thresholds {
            b.file("thresholds.csv", |w| t.write_csv(w))?;
            write_spearman(&mut b, st.ingested)?;
        }
        if let Some(g) = st.graphs {
            write_graphs(&mut b, st.ingested, g)?;
        }
        if let Some(tables) = st.diversity {
            b.file("diversity.csv", |w| {
                write_diversity_csv(tables, &st.ingested.corpus.users, &st.ingested.areas, w)
            })?;
        }
        if let Some(s) = st.span {
            write_span(&mut b, s)?;
        }
        if let Some(r) = st.regressions {
            write_regressions(&mut b, r)?;
        }
        let mut manifest = stage_counts(cfg, st)?;
        manifest.insert("config_sha256".into(), sha256_hex(cfg_text.as_bytes()));
        manifest.insert("seed".into(), cfg.seed.to_string());
        manifest.insert("null_runs".into(), cfg.null_runs.to_string());
        b.finish(manifest)
    };
    run().stage("report")
}

fn write_ingest(b: &mut Bundle, ing: &Ingested) -> Result<()> {
    b.file("areas.csv", |w| ing.areas.write_csv(w))?;
    b.file("locations.csv", |w| ing.location_map.write_csv(w))
}

fn write_spearman(b: &mut Bundle, ing: &Ingested) -> Result<()> {
    b.csv("spearman.csv", |w| {
        let names = &ing.corpus.dimensions;
        let mut header = vec!["dimension".to_owned()];
        header.extend(names.iter().cloned());
        w.write_record(&header)?;
        if ing.corpus.len() >= 2 {
            let m = spearman_matrix(&ing.corpus.scores)?;
            for (name, row) in names.iter().zip(m) {
                let mut rec = vec![name.clone()];
                rec.extend(row.into_iter().map(opt));
                w.write_record(&rec)?;
            }
        }
        Ok(())
    })
}

fn write_graphs(b: &mut Bundle, ing: &Ingested, graphs: &Graphs) -> Result<()> {
    let users = &ing.corpus.users;
    for g in std::iter::once(&graphs.full).chain(&graphs.dims) {
        b.file(&format!("graph_{}.csv", g.tag()), |w| g.write_edge_list(users, w))?;
    }
    b.csv("graph_stats.csv", |w| {
        w.write_record(["graph_tag", "nodes", "edges", "total_weight", "node_fraction"])?;
        for g in std::iter::once(&graphs.universe)
            .chain(std::iter::once(&graphs.full))
            .chain(&graphs.dims)
        {
            w.write_record([
                g.tag().to_owned(),
                g.node_count().to_string(),
                g.edge_count().to_string(),
                g.total_weight().to_string(),
                node_fraction(g, &graphs.universe).to_string(),
            ])?;
        }
        Ok(())
    })?;
    b.csv("graph_hist.csv", |w| {
        w.write_record(["graph_tag", "quantity", "lower", "upper", "count"])?;
        for g in std::iter::once(&graphs.full).chain(&graphs.dims) {
            let s = graph_summary(g);
            for (q, hist) in [("degree", &s.degree_hist), ("weight", &s.strength_hist)] {
                for bin in hist {
                    w.write_record([
                        g.tag().to_owned(),
                        q.to_owned(),
                        bin.lower.to_string(),
                        bin.upper.to_string(),
                        bin.count.to_string(),
                    ])?;
                }
            }
        }
        Ok(())
    })?;
    b.csv("overlap.csv", |w| {
        w.write_record(["graph_a", "graph_b", "share_a_in_b", "share_b_in_a"])?;
        for (i, a) in graphs.dims.iter().enumerate() {
            for other in &graphs.dims[i + 1..] {
                let (x, y) = edge_overlap(a, other);
                w.write_record([a.tag(), other.tag(), &x.to_string(), &y.to_string()])?;
            }
        }
        Ok(())
    })?;
    b.csv("ks.csv", |w| {
        w.write_record(["graph_a", "graph_b", "statistic", "p_value", "n", "m"])?;
        for (i, a) in graphs.dims.iter().enumerate() {
            for other in &graphs.dims[i + 1..] {
                if let Some(k) = tie_weight_ks(&graphs.universe, a, other) {
                    w.write_record([
                        a.tag(),
                        other.tag(),
                        &k.statistic.to_string(),
                        &k.p_value.to_string(),
                        &k.n.to_string(),
                        &k.m.to_string(),
                    ])?;
                }
            }
        }
        Ok(())
    })
}

fn write_span(b: &mut Bundle, span: &Span) -> Result<()> {
    b.csv("span_bins.csv", |w| {
        w.write_record(["bin_index", "upper_km", "median_km", "ties", "messages"])?;
        let s = &span.bins;
        for i in 0..s.len() {
            w.write_record([
                i.to_string(),
                s.boundaries.get(i).map(|v| v.to_string()).unwrap_or_default(),
                s.median_km[i].to_string(),
                s.tie_counts[i].to_string(),
                s.message_counts[i].to_string(),
            ])?;
        }
        Ok(())
    })?;
    b.file("span.csv", |w| span.report.write_csv(w))
}

fn write_regressions(b: &mut Bundle, r: &Regressions) -> Result<()> {
    let models = || {
        r.models
            .iter()
            .map(|(n, rep)| (n.as_str(), rep))
            .chain(r.stepaic.iter().map(|s| ("stepaic", &s.report)))
    };
    b.csv("regression_coefficients.csv", |w| {
        w.write_record(["model", "term", "beta", "se", "t", "p"])?;
        for (name, rep) in models() {
            rep.write_coefficients(name, w)?;
        }
        Ok(())
    })?;
    b.csv("regression_fit.csv", |w| {
        w.write_record(["model", "n", "features", "r2", "r2_adj", "durbin_watson", "rss"])?;
        for (name, rep) in models() {
            rep.write_fit_row(name, w)?;
        }
        Ok(())
    })?;
    if let Some(s) = &r.stepaic {
        b.csv("stepaic.csv", |w| {
            w.write_record(["step", "removed", "aic_full", "aic_selected", "selected"])?;
            for (i, f) in s.removed.iter().enumerate() {
                w.write_record([(i + 1).to_string(), f.clone(), s.full_aic.to_string(), s.aic.to_string(), String::new()])?;
            }
            w.write_record([
                String::new(),
                String::new(),
                s.full_aic.to_string(),
                s.aic.to_string(),
                s.selected.join(" "),
            ])?;
            Ok(())
        })?;
    }
    let mut txt = String::new();
    for (name, rep) in models() {
        txt.push_str(&format!("[{name}]\n{rep}\n"));
    }
    b.text("regression.txt", &txt)
}
