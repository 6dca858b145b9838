use std::borrow::Cow;

use super::{build_dims, build_full, build_universe, diversity_of, ingest, label, regress, Graphs, PipelineConfig};
use crate::error::{Error, Result};

/// Parameters a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    MinWeight,
    Alpha,
    NMin,
    /// Values are `start:end`; either side may be empty.
    Window,
}

impl SweepParameter {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "min_weight" => Ok(Self::MinWeight),
            "alpha" => Ok(Self::Alpha),
            "n_min" => Ok(Self::NMin),
            "window" => Ok(Self::Window),
            _ => Err(Error::Config(format!(
                "cannot sweep `{name}`; use min_weight, alpha, n_min or window"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::MinWeight => "min_weight",
            Self::Alpha => "alpha",
            Self::NMin => "n_min",
            Self::Window => "window",
        }
    }

    fn apply(self, cfg: &mut PipelineConfig, value: &str) -> Result<()> {
        match self {
            Self::Window => {
                let (a, b) = value
                    .split_once(':')
                    .ok_or_else(|| Error::Config(format!("window value `{value}` is not start:end")))?;
                cfg.set("window_start", a)?;
                cfg.set("window_end", b)
            }
            p => cfg.set(p.name(), value),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub parameter: String,
    pub value: String,
    pub model: String,
    pub n: usize,
    pub r2_adj: f64,
}

/// Refits the configured regressions once per value of `parameter`.
/// Parsing and georeferencing rerun only for `n_min` and `window`; the
/// thresholds and dimension graphs only for `alpha`; the full graph only for
/// `min_weight`.
pub fn sweep(cfg: &PipelineConfig, parameter: SweepParameter, values: &[String]) -> Result<Vec<SweepRow>> {
    let reingest = matches!(parameter, SweepParameter::NMin | SweepParameter::Window);
    let base_ing = if reingest { None } else { Some(ingest(cfg)?) };
    let base = match &base_ing {
        Some(ing) => {
            let t = label(cfg, ing)?;
            let full_t = diversity_of(cfg, ing, &build_full(cfg, ing)?)?;
            let dim_t = build_dims(cfg, ing, &t)?
                .iter()
                .map(|g| diversity_of(cfg, ing, g))
                .collect::<Result<Vec<_>>>()?;
            Some((full_t, dim_t))
        }
        None => None,
    };

    let mut rows = Vec::new();
    for value in values {
        let mut c = cfg.clone();
        parameter.apply(&mut c, value)?;
        c.validate()?;
        let ing = match &base_ing {
            Some(i) => Cow::Borrowed(i),
            None => Cow::Owned(ingest(&c)?),
        };
        let tables = match (&base, parameter) {
            (Some((full_t, _)), SweepParameter::Alpha) => {
                let t = label(&c, &ing)?;
                let mut tables = vec![full_t.clone()];
                for g in build_dims(&c, &ing, &t)? {
                    tables.push(diversity_of(&c, &ing, &g)?);
                }
                tables
            }
            (Some((_, dim_t)), SweepParameter::MinWeight) => {
                let full = build_full(&c, &ing)?;
                let mut tables = vec![diversity_of(&c, &ing, &full)?];
                tables.extend(dim_t.iter().cloned());
                tables
            }
            _ => {
                let t = label(&c, &ing)?;
                let g = Graphs {
                    universe: build_universe(&ing),
                    full: build_full(&c, &ing)?,
                    dims: build_dims(&c, &ing, &t)?,
                };
                super::diversities(&c, &ing, &g)?
            }
        };
        let reg = regress(&c, &ing, &tables)?;
        for (model, rep) in reg.models {
            rows.push(SweepRow {
                parameter: parameter.name().to_owned(),
                value: value.clone(),
                model,
                n: rep.n,
                r2_adj: rep.r2_adj,
            });
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["parameter", "value", "model", "n", "r2_adj"])?;
    for r in rows {
        w.write_record([&r.parameter, &r.value, &r.model, &r.n.to_string(), &r.r2_adj.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
