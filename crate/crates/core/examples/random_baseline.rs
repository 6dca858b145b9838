//! Regressions on graphs built from random 1% message samples.

use std::path::Path;

use tiescope::pipeline::{self, PipelineConfig};
use tiescope::synth::{generate_corpus, SynthConfig};

fn main() -> tiescope::Result<()> {
    let synth = SynthConfig::default();
    let paths = generate_corpus(&synth)?.write_files(&std::env::temp_dir().join("tiescope-baseline"))?;
    let cfg = PipelineConfig {
        baseline_runs: 25,
        baseline_fraction: 0.01,
        ..PipelineConfig::for_synth(&synth, &paths, Path::new("unused"))
    };
    let rep = pipeline::random_baseline(&cfg)?;
    println!("{} messages per sample", rep.sample_size);
    for r in &rep.rows {
        let sd = r.sd_r2_adj.map_or("undefined".to_owned(), |s| format!("{s:.3}"));
        println!("{:<15} mean R2_adj {:+.3}  sd {sd}  mean beta {:+.3}", r.feature, r.mean_r2_adj, r.mean_beta);
    }
    Ok(())
}
