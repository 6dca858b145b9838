//! Distance bins over the tie universe and Δp profiles against a location
//! reshuffling null model, for dimensions planted as global and local.

use std::path::Path;

use tiescope::geospan::{delta_p, span_bins, DistanceMatrix, NullModelConfig, Variant};
use tiescope::pipeline::{self, PipelineConfig};
use tiescope::synth::{generate_corpus, DimensionSpec, SynthConfig};

fn main() -> tiescope::Result<()> {
    let synth = SynthConfig {
        dimensions: vec![DimensionSpec::new("knowledge", 1.0), DimensionSpec::new("support", -1.0)],
        ..Default::default()
    };
    let s = generate_corpus(&synth)?;
    let cfg = PipelineConfig::for_synth(&synth, &s.write_files(&std::env::temp_dir().join("tiescope-span"))?, Path::new("unused"));
    let ing = pipeline::ingest_parsed(&cfg, s.corpus, &s.activity, s.areas)?;
    let t = pipeline::label(&cfg, &ing)?;
    let g = pipeline::build_graphs(&cfg, &ing, &t)?;

    let dist = DistanceMatrix::new(&ing.areas);
    let bins = span_bins(&g.universe, &ing.locations, &dist, 5)?;
    let dims: Vec<_> = g.dims.iter().collect();
    let null = NullModelConfig {
        runs: 30,
        seed: 11,
        ..Default::default()
    };
    let report = delta_p(&g.universe, &dims, &ing.locations, &dist, &bins, &null)?;

    println!("bin medians (km): {:?}", bins.median_km.iter().map(|m| m.round()).collect::<Vec<_>>());
    for cell in report.cells.iter().filter(|c| c.variant == Variant::Tie) {
        let f = |v: Option<f64>| v.map_or("  n/a".to_owned(), |x| format!("{x:+.3}"));
        println!(
            "{:<10} bin {}  Δp {}  [{}, {}]",
            cell.dimension,
            cell.bin,
            f(cell.delta_p),
            f(cell.ci_low),
            f(cell.ci_high)
        );
    }
    Ok(())
}
