//! Regression and hypothesis-testing machinery.

mod ks;
mod ols;
mod spearman;
mod stepaic;

pub use ks::{kolmogorov_survival, ks_two_sample, KsResult};
pub use ols::{durbin_watson, format_p_value, ols_fit, Coefficient, RegressionReport};
pub use spearman::{average_ranks, pearson, spearman_matrix};
pub use stepaic::{aic, step_aic_backward, StepAicResult};

use crate::error::{Error, Result};

/// Rescales to `[0, 1]`; both ends are attained.
pub fn minmax_normalize(v: &[f64]) -> Result<Vec<f64>> {
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if v.is_empty() || !(max > min) {
        return Err(Error::ConstantVector);
    }
    let span = max - min;
    Ok(v.iter().map(|x| (x - min) / span).collect())
}
