use rayon::prelude::*;

use crate::error::{Error, Result};

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && v[idx[end]] == v[idx[start]] {
            end += 1;
        }
        let r = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = r;
        }
        start = end;
    }
    ranks
}

/// Pearson correlation; `None` if either side is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman correlation for every pair of columns. Entries involving a
/// constant column are `None`.
pub fn spearman_matrix(columns: &[Vec<f64>]) -> Result<Vec<Vec<Option<f64>>>> {
    let rows = columns.first().map_or(0, Vec::len);
    if rows < 2 {
        return Err(Error::TooFewObservations { needed: 1, got: rows });
    }
    if columns.iter().any(|c| c.len() != rows) {
        return Err(Error::Config("score columns differ in length".into()));
    }
    let ranks: Vec<Vec<f64>> = columns.par_iter().map(|c| average_ranks(c)).collect();
    let k = columns.len();
    let mut out = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i..k {
            let rho = if i == j {
                pearson(&ranks[i], &ranks[i]).map(|_| 1.0)
            } else {
                pearson(&ranks[i], &ranks[j])
            };
            out[i][j] = rho;
            out[j][i] = rho;
        }
    }
    Ok(out)
}
