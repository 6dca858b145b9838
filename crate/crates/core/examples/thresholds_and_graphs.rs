//! Percentile thresholds per dimension, then the full and dimension graphs
//! with their overlap and tie-weight KS comparison.

use std::path::Path;

use tiescope::graphs::{edge_overlap, graph_summary, node_fraction};
use tiescope::pipeline::{self, PipelineConfig};
use tiescope::synth::{generate_corpus, SynthConfig};

fn main() -> tiescope::Result<()> {
    let synth = SynthConfig::default();
    let dir = std::env::temp_dir().join("tiescope-graphs");
    let paths = generate_corpus(&synth)?.write_files(&dir)?;
    let cfg = PipelineConfig {
        min_weight: 2,
        ..PipelineConfig::for_synth(&synth, &paths, Path::new("unused"))
    };
    let ing = pipeline::ingest(&cfg)?;
    let t = pipeline::label(&cfg, &ing)?;
    for d in &cfg.dimensions {
        println!("theta[{d}] = {:.4} at alpha {}", t.theta(d).unwrap_or(f64::NAN), cfg.alpha);
    }

    let g = pipeline::build_graphs(&cfg, &ing, &t)?;
    for graph in std::iter::once(&g.full).chain(&g.dims) {
        let s = graph_summary(graph);
        println!(
            "{:<10} {:>6} nodes {:>7} edges  weight {:>7}  node fraction {:.3}",
            s.tag,
            s.node_count,
            s.edge_count,
            s.total_weight,
            node_fraction(graph, &g.universe)
        );
    }
    let (a, b) = (&g.dims[0], &g.dims[1]);
    let (ab, ba) = edge_overlap(a, b);
    println!("overlap {} in {}: {ab:.3}, {} in {}: {ba:.3}", a.tag(), b.tag(), b.tag(), a.tag());
    if let Some(ks) = pipeline::tie_weight_ks(&g.universe, a, b) {
        println!("tie-weight KS D = {:.4}, p = {:.3e}", ks.statistic, ks.p_value);
    }
    Ok(())
}
