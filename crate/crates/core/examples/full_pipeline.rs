//! Every stage on a planted synthetic corpus, writing the report bundle.
//!
//! cargo run --release --example full_pipeline -- /tmp/tiescope-run

use std::path::PathBuf;

use tiescope::pipeline::{self, PipelineConfig};
use tiescope::synth::{generate_corpus, DimensionSpec, PlantedOutcome, SynthConfig};

fn main() -> tiescope::Result<()> {
    let dir: PathBuf = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("tiescope-run"));
    let synth = SynthConfig {
        seed: 4,
        dimensions: vec![DimensionSpec::new("knowledge", 1.0), DimensionSpec::new("support", -1.0)],
        outcome: Some(PlantedOutcome {
            intercept: 0.2,
            betas: vec![("knowledge.spatial".into(), 1.0), ("support.spatial".into(), -0.55)],
            sigma: 0.1,
        }),
        ..Default::default()
    };
    let paths = generate_corpus(&synth)?.write_files(&dir)?;
    let mut cfg = PipelineConfig::for_synth(&synth, &paths, &dir.join("report"));
    cfg.stepaic_features = vec![
        "full.spatial".into(),
        "knowledge.social".into(),
        "knowledge.spatial".into(),
        "support.social".into(),
        "support.spatial".into(),
    ];

    let run = pipeline::run_pipeline(&cfg)?;
    for (name, rep) in &run.regressions.models {
        println!("[{name}] n={} R2_adj={:.3}", rep.n, rep.r2_adj);
    }
    if let Some(s) = &run.regressions.stepaic {
        println!("[stepaic] kept {:?}", s.selected);
    }
    println!("{} manifest entries in {}", run.manifest.len(), cfg.out_dir.join("manifest.txt").display());
    Ok(())
}
