//! Communication-graph analytics for scored message logs.
//!
//! The toolkit turns scored messages into a full communication graph and one
//! graph per social dimension, measures how diverse each user's contacts are
//! (socially and geographically), compares tie geography with a
//! location-reshuffling null model, and fits OLS models of an area-level
//! outcome on those diversities.
//!
//! Stages, in pipeline order:
//!
//! - [`ingest`]: message, activity and area files; georeferencing; area
//!   filtering by platform penetration
//! - [`graphs`]: percentile thresholds, full and dimension graphs, summaries
//! - [`diversity`]: normalized-entropy diversity per user and per area
//! - [`geospan`]: distance bins, `p(d|l)` and the null model
//! - [`stats`]: OLS with diagnostics, KS, Spearman, backward AIC selection
//! - [`synth`]: synthetic corpora with planted structure
//! - [`pipeline`]: configuration, end-to-end runs, sweeps and baselines

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diversity;
pub mod error;
pub mod geospan;
pub mod graphs;
pub mod ingest;
pub mod pipeline;
pub mod seed;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
