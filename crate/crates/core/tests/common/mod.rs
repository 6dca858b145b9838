//! Independent reference implementations for the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeMap;

use tiescope::synth::{DimensionSpec, PlantedOutcome, SynthConfig};

/// Normalized Shannon entropy by direct summation over raw counts.
pub fn entropy_oracle(counts: &[u64], support: usize) -> f64 {
    let counts: Vec<u64> = counts.iter().copied().filter(|&c| c > 0).collect();
    if support <= 1 || counts.len() <= 1 {
        return 0.0;
    }
    let total: u64 = counts.iter().sum();
    let mut h = 0.0;
    for &c in &counts {
        let p = c as f64 / total as f64;
        h -= p * p.ln();
    }
    h / (support as f64).ln()
}

/// Per-user social and spatial diversity from an explicit edge list.
/// Returns `user -> (social, spatial, contacts)`.
pub fn diversity_oracle(
    edges: &[(u32, u32, u32)],
    area_of: &[u32],
    n_areas: usize,
) -> BTreeMap<u32, (f64, f64, usize)> {
    let mut by_contact: BTreeMap<u32, BTreeMap<u32, u64>> = BTreeMap::new();
    for &(s, d, w) in edges {
        if w > 0 {
            *by_contact.entry(s).or_default().entry(d).or_insert(0) += w as u64;
        }
    }
    by_contact
        .into_iter()
        .map(|(u, contacts)| {
            let counts: Vec<u64> = contacts.values().copied().collect();
            let social = entropy_oracle(&counts, counts.len());
            let mut by_area: BTreeMap<u32, u64> = BTreeMap::new();
            for (&v, &c) in &contacts {
                *by_area.entry(area_of[v as usize]).or_insert(0) += c;
            }
            let ac: Vec<u64> = by_area.values().copied().collect();
            let spatial = entropy_oracle(&ac, n_areas);
            (u, (social, spatial, contacts.len()))
        })
        .collect()
}

/// OLS via the normal equations `(XᵀX) β = Xᵀy`, solved by Gauss-Jordan
/// elimination with partial pivoting. Returns `(beta, se, r2_adj, residuals)`
/// with the intercept first.
pub fn ols_oracle(columns: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, Vec<f64>, f64, Vec<f64>) {
    let n = y.len();
    let k = columns.len() + 1;
    let x = |i: usize, j: usize| if j == 0 { 1.0 } else { columns[j - 1][i] };
    // augmented [XᵀX | Xᵀy | I]
    let width = 2 * k + 1;
    let mut a = vec![vec![0.0; width]; k];
    for r in 0..k {
        for c in 0..k {
            a[r][c] = (0..n).map(|i| x(i, r) * x(i, c)).sum();
        }
        a[r][k] = (0..n).map(|i| x(i, r) * y[i]).sum();
        a[r][k + 1 + r] = 1.0;
    }
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
            .unwrap();
        a.swap(col, piv);
        let d = a[col][col];
        for v in a[col].iter_mut() {
            *v /= d;
        }
        for r in 0..k {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for c in 0..width {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    let beta: Vec<f64> = (0..k).map(|r| a[r][k]).collect();
    let resid: Vec<f64> = (0..n)
        .map(|i| y[i] - (0..k).map(|j| x(i, j) * beta[j]).sum::<f64>())
        .collect();
    let rss: f64 = resid.iter().map(|e| e * e).sum();
    let df = (n - k) as f64;
    let s2 = rss / df;
    let se: Vec<f64> = (0..k).map(|r| (s2 * a[r][k + 1 + r]).sqrt()).collect();
    let mean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let r2 = 1.0 - rss / tss;
    let r2_adj = 1.0 - (1.0 - r2) * (n as f64 - 1.0) / df;
    (beta, se, r2_adj, resid)
}

/// KS statistic by evaluating both empirical CDFs at every sample point.
pub fn ks_oracle(a: &[f64], b: &[f64]) -> f64 {
    let cdf = |s: &[f64], v: f64| s.iter().filter(|&&x| x <= v).count() as f64 / s.len() as f64;
    a.iter()
        .chain(b)
        .map(|&v| (cdf(a, v) - cdf(b, v)).abs())
        .fold(0.0, f64::max)
}

/// Great-circle distance via the spherical law of cosines.
pub fn cosine_law_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dl = (lon2 - lon1).to_radians();
    let c = (p1.sin() * p2.sin() + p1.cos() * p2.cos() * dl.cos()).clamp(-1.0, 1.0);
    6371.0088 * c.acos()
}

/// Two-dimension generator config with the given couplings.
pub fn coupled(seed: u64, knowledge: f64, support: f64) -> SynthConfig {
    SynthConfig {
        seed,
        dimensions: vec![DimensionSpec::new("knowledge", knowledge), DimensionSpec::new("support", support)],
        ..Default::default()
    }
}

/// Coupled generator with the planted area outcome
/// `0.2 + 1.0·knowledge.spatial − 0.55·support.spatial + N(0, 0.1²)`.
pub fn planted(seed: u64) -> SynthConfig {
    SynthConfig {
        outcome: Some(PlantedOutcome {
            intercept: 0.2,
            betas: vec![("knowledge.spatial".into(), 1.0), ("support.spatial".into(), -0.55)],
            sigma: 0.1,
        }),
        ..coupled(seed, 1.0, -1.0)
    }
}
