use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Below this a p-value prints as `0.000`.
pub const P_VALUE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub name: String,
    pub beta: f64,
    pub se: f64,
    pub t: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionReport {
    pub intercept: Coefficient,
    pub coefficients: Vec<Coefficient>,
    pub n: usize,
    pub rss: f64,
    pub r2: f64,
    pub r2_adj: f64,
    /// `None` when every residual is zero.
    pub durbin_watson: Option<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl RegressionReport {
    pub fn features(&self) -> Vec<&str> {
        self.coefficients.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn n_features(&self) -> usize {
        self.coefficients.len()
    }

    /// Rows `model,term,beta,se,t,p` followed by nothing else; see
    /// [`RegressionReport::write_fit_row`] for the model-level numbers.
    pub fn write_coefficients<W: Write>(&self, model: &str, w: &mut csv::Writer<W>) -> Result<()> {
        for c in std::iter::once(&self.intercept).chain(&self.coefficients) {
            w.write_record([
                model,
                &c.name,
                &c.beta.to_string(),
                &c.se.to_string(),
                &c.t.to_string(),
                &c.p.to_string(),
            ])?;
        }
        Ok(())
    }

    /// `model,n,features,r2,r2_adj,durbin_watson,rss`.
    pub fn write_fit_row<W: Write>(&self, model: &str, w: &mut csv::Writer<W>) -> Result<()> {
        w.write_record([
            model,
            &self.n.to_string(),
            &self.features().join(";"),
            &self.r2.to_string(),
            &self.r2_adj.to_string(),
            &self.durbin_watson.map(|d| d.to_string()).unwrap_or_default(),
            &self.rss.to_string(),
        ])?;
        Ok(())
    }
}

pub fn format_p_value(p: f64) -> String {
    if p < P_VALUE_FLOOR {
        "0.000".to_owned()
    } else {
        format!("{p:.3}")
    }
}

impl fmt::Display for RegressionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<28} {:>10} {:>10} {:>8}", "feature", "beta", "SE", "p")?;
        for c in self.coefficients.iter().chain(std::iter::once(&self.intercept)) {
            writeln!(f, "{:<28} {:>10.4} {:>10.4} {:>8}", c.name, c.beta, c.se, format_p_value(c.p))?;
        }
        let dw = self
            .durbin_watson
            .map(|d| format!("{d:.3}"))
            .unwrap_or_else(|| "undefined".into());
        writeln!(f, "Durbin-Watson stat. = {dw}    R2_adj = {:.2}    n = {}", self.r2_adj, self.n)
    }
}

/// `Σ(e_t - e_{t-1})² / Σ e_t²` in the given order.
pub fn durbin_watson(residuals: &[f64]) -> Result<f64> {
    if residuals.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 1,
            got: residuals.len(),
        });
    }
    let ss: f64 = residuals.iter().map(|e| e * e).sum();
    if ss == 0.0 {
        return Err(Error::DegenerateFit("all residuals are zero".into()));
    }
    let diff: f64 = residuals.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Ok(diff / ss)
}

/// Ordinary least squares with an intercept. `columns` holds one feature per
/// entry, each of length `y.len()`. Coefficients come from a Householder QR
/// of the design matrix.
pub fn ols_fit(columns: &[Vec<f64>], y: &[f64], names: &[String]) -> Result<RegressionReport> {
    let n = y.len();
    let p = columns.len();
    assert_eq!(names.len(), p, "one name per feature");
    if n <= p + 1 {
        return Err(Error::TooFewObservations { needed: p + 1, got: n });
    }
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::Config("feature columns differ in length from the outcome".into()));
    }
    let x = DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { columns[j - 1][i] });
    let yv = DVector::from_column_slice(y);

    let qr = x.clone().qr();
    let r = qr.r();
    let diag_max = (0..=p).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let col_scale = (0..=p)
        .map(|j| x.column(j).norm())
        .fold(0.0, f64::max)
        .max(1.0);
    if (0..=p).any(|i| r[(i, i)].abs() <= 1e-10 * diag_max.max(col_scale)) {
        return Err(Error::RankDeficient);
    }
    let qty = qr.q().transpose() * &yv;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::RankDeficient)?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p + 1, p + 1))
        .ok_or(Error::RankDeficient)?;

    let fitted = &x * &beta;
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean_y).powi(2)).sum();
    if tss == 0.0 {
        return Err(Error::DegenerateFit("outcome is constant".into()));
    }
    let df = (n - p - 1) as f64;
    let sigma2 = rss / df;
    let r2 = 1.0 - rss / tss;
    let r2_adj = 1.0 - (1.0 - r2) * (n as f64 - 1.0) / df;
    let t_dist = StudentsT::new(0.0, 1.0, df).expect("df is positive");

    let coef = |j: usize, name: &str| {
        // diag((R^T R)^-1) = squared row norms of R^-1
        let var = r_inv.row(j).norm_squared() * sigma2;
        let se = var.sqrt();
        let t = beta[j] / se;
        let p_val = if t.is_nan() { 1.0 } else { 2.0 * t_dist.sf(t.abs()) };
        Coefficient {
            name: name.to_owned(),
            beta: beta[j],
            se,
            t,
            p: p_val,
        }
    };
    Ok(RegressionReport {
        intercept: coef(0, "intercept"),
        coefficients: names.iter().enumerate().map(|(j, nm)| coef(j + 1, nm)).collect(),
        n,
        rss,
        r2,
        r2_adj,
        durbin_watson: durbin_watson(&residuals).ok(),
        fitted: fitted.iter().copied().collect(),
        residuals,
    })
}
