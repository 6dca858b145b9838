//! OLS on a small area table with the formatted report, Durbin-Watson and
//! the column-wise Spearman matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tiescope::stats::{minmax_normalize, ols_fit, spearman_matrix};

fn main() -> tiescope::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 44;
    let density: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..400.0f64).ln()).collect();
    let spatial: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..0.9)).collect();
    let gdp: Vec<f64> = (0..n)
        .map(|i| 30_000.0 + 4_000.0 * density[i] + 25_000.0 * spatial[i] + rng.random_range(-3_000.0..3_000.0))
        .collect();

    let cols = vec![minmax_normalize(&density)?, minmax_normalize(&spatial)?];
    let y = minmax_normalize(&gdp)?;
    let names = vec!["density".to_owned(), "spatial".to_owned()];
    let report = ols_fit(&cols, &y, &names)?;
    println!("{report}");

    let rho = spearman_matrix(&[density, spatial, gdp])?;
    for row in rho {
        let cells: Vec<String> = row.iter().map(|v| v.map_or("  n/a".into(), |r| format!("{r:+.3}"))).collect();
        println!("{}", cells.join("  "));
    }
    Ok(())
}
