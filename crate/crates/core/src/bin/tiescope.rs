use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};

use tiescope::pipeline::{self, config::KEYS, PipelineConfig, Stages, SweepParameter};
use tiescope::synth::{generate_corpus, DimensionSpec, PlantedOutcome, SynthConfig};
use tiescope::{Error, Result};

/// `println!` that reports a closed stdout as an error instead of panicking.
macro_rules! outln {
    ($($t:tt)*) => {
        writeln!(std::io::stdout().lock(), $($t)*).map_err(Error::Stream)?
    };
}

const STAGES: &[(&str, &str)] = &[
    ("ingest", "Parse inputs, georeference users and filter areas"),
    ("label", "Compute per-dimension percentile thresholds"),
    ("build", "Build the full and dimension graphs"),
    ("diversity", "Per-user and per-area diversity"),
    ("span", "Distance bins and null-model Δp"),
    ("regress", "Fit the configured regressions"),
    ("run", "Every stage, with the full report bundle"),
];

fn with_keys(cmd: Command) -> Command {
    let cmd = cmd.arg(
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .help("key = value configuration file"),
    );
    KEYS.iter().fold(cmd, |c, k| {
        c.arg(Arg::new(*k).long(*k).value_name("VALUE").allow_hyphen_values(true).hide(true))
    })
}

fn cli() -> Command {
    let mut cmd = Command::new("tiescope")
        .about("Communication-graph diversity analytics")
        .after_help("Every configuration key can be passed as --KEY VALUE; see the README for the list.")
        .subcommand_required(true);
    for (name, about) in STAGES {
        cmd = cmd.subcommand(with_keys(Command::new(*name).about(*about)));
    }
    cmd.subcommand(
        with_keys(Command::new("sweep").about("Refit the regressions across values of one parameter"))
            .arg(Arg::new("param").long("param").required(true).help("min_weight, alpha, n_min or window"))
            .arg(
                Arg::new("values")
                    .long("values")
                    .required(true)
                    .help("comma-separated; window values are start:end"),
            ),
    )
    .subcommand(with_keys(Command::new("baseline").about("Random 1% message-sample baseline")))
    .subcommand(
        Command::new("synth")
            .about("Write a synthetic corpus and a matching config")
            .arg(Arg::new("out").long("out").required(true).value_name("DIR"))
            .arg(Arg::new("seed").long("seed").default_value("1"))
            .arg(Arg::new("n_areas").long("n_areas").default_value("44"))
            .arg(Arg::new("users_per_area").long("users_per_area").default_value("200"))
            .arg(Arg::new("alpha").long("alpha").default_value("0.9"))
            .arg(
                Arg::new("coupling")
                    .long("coupling")
                    .default_value("knowledge=0,support=0")
                    .allow_hyphen_values(true)
                    .help("dimension=coupling pairs"),
            )
            .arg(Arg::new("unlocated_fraction").long("unlocated_fraction").default_value("0"))
            .arg(
                Arg::new("plant")
                    .long("plant")
                    .action(ArgAction::SetTrue)
                    .help("plant gdp = 0.2 + 1.0·first.spatial − 0.55·second.spatial + noise"),
            ),
    )
}

fn config_from(m: &ArgMatches) -> Result<PipelineConfig> {
    let mut cfg = match m.get_one::<String>("config") {
        Some(p) => PipelineConfig::from_file(Path::new(p))?,
        None => PipelineConfig::default(),
    };
    for k in KEYS {
        if let Some(v) = m.get_one::<String>(k) {
            cfg.set(k, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse<T: std::str::FromStr>(m: &ArgMatches, key: &str) -> Result<T> {
    let v = m.get_one::<String>(key).map(String::as_str).unwrap_or_default();
    v.parse().map_err(|_| Error::Config(format!("bad value `{v}` for --{key}")))
}

fn synth(m: &ArgMatches) -> Result<()> {
    let out = PathBuf::from(m.get_one::<String>("out").expect("required"));
    let mut dims = Vec::new();
    for item in m.get_one::<String>("coupling").expect("default").split(',') {
        let (name, c) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("coupling `{item}` is not dimension=value")))?;
        let c: f64 = c.parse().map_err(|_| Error::Config(format!("bad coupling `{c}`")))?;
        dims.push(DimensionSpec::new(name.trim(), c));
    }
    let outcome = m.get_flag("plant").then(|| PlantedOutcome {
        intercept: 0.2,
        betas: dims
            .iter()
            .zip([1.0, -0.55])
            .map(|(d, b)| (format!("{}.spatial", d.name), b))
            .collect(),
        sigma: 0.1,
    });
    let sc = SynthConfig {
        seed: parse(m, "seed")?,
        n_areas: parse(m, "n_areas")?,
        users_per_area: parse(m, "users_per_area")?,
        alpha: parse(m, "alpha")?,
        unlocated_fraction: parse(m, "unlocated_fraction")?,
        dimensions: dims,
        outcome,
        ..Default::default()
    };
    let corpus = generate_corpus(&sc)?;
    let paths = corpus.write_files(&out)?;
    let cfg = PipelineConfig::for_synth(&sc, &paths, &out.join("report"));
    let conf = out.join("pipeline.conf");
    std::fs::write(&conf, cfg.to_kv_string()).map_err(|e| Error::io(&conf, e))?;
    outln!(
        "{} messages, {} users, {} areas written to {}",
        corpus.corpus.len(),
        corpus.corpus.users.len(),
        corpus.areas.len(),
        out.display()
    );
    outln!("run with: tiescope run --config {}", conf.display());
    Ok(())
}

fn stage(name: &str, cfg: &PipelineConfig) -> Result<()> {
    if name == "run" {
        let r = pipeline::run_pipeline(cfg)?;
        print_regressions(&r.regressions)?;
        outln!("reports in {}", cfg.out_dir.display());
        return Ok(());
    }
    let ing = pipeline::ingest(cfg)?;
    let mut st = Stages::new(&ing);
    let rank = STAGES.iter().position(|(s, _)| *s == name).expect("known stage");
    let thresholds = (rank >= 1).then(|| pipeline::label(cfg, &ing)).transpose()?;
    let graphs = match &thresholds {
        Some(t) if rank >= 2 => Some(pipeline::build_graphs(cfg, &ing, t)?),
        _ => None,
    };
    st.thresholds = thresholds.as_ref();
    st.graphs = graphs.as_ref();
    let tables = match &graphs {
        Some(g) if name == "diversity" || name == "regress" => Some(pipeline::diversities(cfg, &ing, g)?),
        _ => None,
    };
    st.diversity = tables.as_deref();
    let span = match &graphs {
        Some(g) if name == "span" => Some(pipeline::span(cfg, &ing, g)?),
        _ => None,
    };
    st.span = span.as_ref();
    let reg = match &tables {
        Some(t) if name == "regress" => Some(pipeline::regress(cfg, &ing, t)?),
        _ => None,
    };
    st.regressions = reg.as_ref();
    if let Some(r) = &reg {
        print_regressions(r)?;
    }
    let manifest = pipeline::write_reports(cfg, &st, &cfg.out_dir)?;
    outln!("{} manifest entries written to {}", manifest.len(), cfg.out_dir.join("manifest.txt").display());
    Ok(())
}

fn print_regressions(r: &pipeline::Regressions) -> Result<()> {
    for (name, rep) in &r.models {
        outln!("[{name}]\n{rep}");
    }
    if let Some(s) = &r.stepaic {
        outln!("[stepaic] selected {}\n{}", s.selected.join(", "), s.report);
    }
    Ok(())
}

fn run(m: &ArgMatches) -> Result<()> {
    let (name, sub) = m.subcommand().expect("subcommand required");
    match name {
        "synth" => synth(sub),
        "sweep" => {
            let cfg = config_from(sub)?;
            let param = SweepParameter::parse(sub.get_one::<String>("param").expect("required"))?;
            let values: Vec<String> = sub
                .get_one::<String>("values")
                .expect("required")
                .split(',')
                .map(|v| v.trim().to_owned())
                .collect();
            let rows = pipeline::sweep(&cfg, param, &values)?;
            let mut b = pipeline::Bundle::create(&cfg.out_dir)?;
            b.file("sweep.csv", |w| pipeline::write_sweep_csv(&rows, w))?;
            b.text("config.txt", &cfg.to_kv_string())?;
            b.finish(Default::default())?;
            for r in rows {
                outln!("{}={} {} n={} R2_adj={:.3}", r.parameter, r.value, r.model, r.n, r.r2_adj);
            }
            Ok(())
        }
        "baseline" => {
            let cfg = config_from(sub)?;
            let rep = pipeline::random_baseline(&cfg)?;
            let mut b = pipeline::Bundle::create(&cfg.out_dir)?;
            b.file("baseline.csv", |w| rep.write_csv(w))?;
            b.text("config.txt", &cfg.to_kv_string())?;
            b.finish(Default::default())?;
            for r in &rep.rows {
                let sd = r.sd_r2_adj.map_or("undefined (one run)".to_owned(), |s| format!("{s:.3}"));
                outln!("{}: mean R2_adj {:.3}, sd {sd}, {} runs", r.feature, r.mean_r2_adj, r.runs);
            }
            Ok(())
        }
        stage_name => stage(stage_name, &config_from(sub)?),
    }
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            // usage problems are input errors; help and version are not errors
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Stream(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
