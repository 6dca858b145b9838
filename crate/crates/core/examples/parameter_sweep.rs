//! R²_adj of each configured regression across minimum tie weights and
//! percentile levels.

use std::path::Path;

use tiescope::pipeline::{self, PipelineConfig, SweepParameter};
use tiescope::synth::{generate_corpus, SynthConfig};

fn main() -> tiescope::Result<()> {
    let synth = synth_config();
    let paths = generate_corpus(&synth)?.write_files(&std::env::temp_dir().join("tiescope-sweep"))?;
    let cfg = PipelineConfig::for_synth(&synth, &paths, Path::new("unused"));

    let weights: Vec<String> = (1..=6).map(|w| w.to_string()).collect();
    let alphas: Vec<String> = ["0.75", "0.9", "0.95", "0.99"].map(String::from).to_vec();
    let mut rows = pipeline::sweep(&cfg, SweepParameter::MinWeight, &weights)?;
    rows.extend(pipeline::sweep(&cfg, SweepParameter::Alpha, &alphas)?);
    pipeline::write_sweep_csv(&rows, std::io::stdout().lock())?;
    Ok(())
}

fn synth_config() -> SynthConfig {
    SynthConfig {
        messages_per_contact: 4.0,
        ..Default::default()
    }
}
