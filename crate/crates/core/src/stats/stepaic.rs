use super::ols::{ols_fit, RegressionReport};
use crate::error::Result;

/// Gaussian AIC, `n ln(RSS/n) + 2(p + 1)` with the intercept counted.
pub fn aic(report: &RegressionReport) -> f64 {
    let n = report.n as f64;
    let k = (report.n_features() + 1) as f64;
    n * (report.rss.max(f64::MIN_POSITIVE) / n).ln() + 2.0 * k
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepAicResult {
    pub report: RegressionReport,
    pub selected: Vec<String>,
    /// Features in the order they were dropped.
    pub removed: Vec<String>,
    pub full_aic: f64,
    pub aic: f64,
}

/// Backward elimination: repeatedly drops the non-forced feature whose
/// removal lowers AIC the most, until no single removal lowers it. Exact AIC
/// ties go to the feature listed first.
pub fn step_aic_backward(columns: &[Vec<f64>], y: &[f64], names: &[String], forced: &[String]) -> Result<StepAicResult> {
    let mut active: Vec<usize> = (0..columns.len()).collect();
    let fit = |set: &[usize]| {
        let cols: Vec<Vec<f64>> = set.iter().map(|&i| columns[i].clone()).collect();
        let nm: Vec<String> = set.iter().map(|&i| names[i].clone()).collect();
        ols_fit(&cols, y, &nm)
    };
    let mut current = fit(&active)?;
    let full_aic = aic(&current);
    let mut current_aic = full_aic;
    let mut removed = Vec::new();
    loop {
        let mut best: Option<(usize, f64, RegressionReport)> = None;
        for pos in 0..active.len() {
            if forced.contains(&names[active[pos]]) {
                continue;
            }
            let mut trial = active.clone();
            trial.remove(pos);
            let rep = fit(&trial)?;
            let a = aic(&rep);
            if a < current_aic && best.as_ref().is_none_or(|(_, b, _)| a < *b) {
                best = Some((pos, a, rep));
            }
        }
        match best {
            Some((pos, a, rep)) => {
                removed.push(names[active.remove(pos)].clone());
                current = rep;
                current_aic = a;
            }
            None => break,
        }
    }
    Ok(StepAicResult {
        selected: active.iter().map(|&i| names[i].clone()).collect(),
        report: current,
        removed,
        full_aic,
        aic: current_aic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn all_forced_returns_full_model() {
        let a = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let b = vec![0.3, -0.1, 0.4, 0.0, 0.2, -0.3];
        let y = vec![1.2, 2.1, 2.8, 4.3, 4.9, 6.2];
        let names = s(&["a", "b"]);
        let r = step_aic_backward(&[a, b], &y, &names, &names).unwrap();
        assert_eq!(r.selected, names);
        assert!(r.removed.is_empty());
        assert_eq!(r.aic, r.full_aic);
    }

    #[test]
    fn noise_feature_is_dropped() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        // small deterministic wiggle so the fit is not exact
        let noise: Vec<f64> = (0..20).map(|i| ((i * 37 % 11) as f64 - 5.0) / 50.0).collect();
        let junk: Vec<f64> = (0..20).map(|i| ((i * 13 % 7) as f64 - 3.0) / 3.0).collect();
        let y: Vec<f64> = x.iter().zip(&noise).map(|(a, e)| 0.5 + 2.0 * a + e).collect();
        let r = step_aic_backward(&[x, junk], &y, &s(&["x", "junk"]), &[]).unwrap();
        assert_eq!(r.selected, s(&["x"]));
        assert!(r.aic <= r.full_aic);
    }
}
