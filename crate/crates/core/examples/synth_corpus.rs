//! Generates a planted synthetic corpus and writes it as CSV.
//!
//! cargo run --example synth_corpus -- /tmp/tiescope-synth

use std::path::PathBuf;

use tiescope::synth::{generate_corpus, DimensionSpec, PlantedOutcome, SynthConfig};

fn main() -> tiescope::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("tiescope-synth"));
    let cfg = SynthConfig {
        seed: 7,
        dimensions: vec![DimensionSpec::new("knowledge", 1.0), DimensionSpec::new("support", -1.0)],
        outcome: Some(PlantedOutcome {
            intercept: 0.2,
            betas: vec![("knowledge.spatial".into(), 1.0), ("support.spatial".into(), -0.55)],
            sigma: 0.05,
        }),
        ..Default::default()
    };
    let s = generate_corpus(&cfg)?;
    let paths = s.write_files(&out)?;
    println!("{} messages between {} users in {} areas", s.corpus.len(), s.corpus.users.len(), s.areas.len());
    for (d, flags) in cfg.dimensions.iter().zip(&s.labels) {
        let n = flags.iter().filter(|&&b| b).count();
        println!("  {:<10} {n} labeled ({:.2}%)", d.name, 100.0 * n as f64 / flags.len() as f64);
    }
    println!("wrote {}, {}, {}", paths.messages.display(), paths.activity.display(), paths.areas.display());
    Ok(())
}
