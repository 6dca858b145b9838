//! Backward AIC selection with one forced control and two noise columns.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use tiescope::stats::step_aic_backward;

fn main() -> tiescope::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let z = Normal::new(0.0, 1.0).expect("unit normal");
    let n = 60;
    let mut draw = || -> Vec<f64> { (0..n).map(|_| z.sample(&mut rng)).collect() };
    let (control, signal, noise_a, noise_b, eps) = (draw(), draw(), draw(), draw(), draw());
    let y: Vec<f64> = (0..n).map(|i| 0.5 * control[i] + 2.0 * signal[i] + 0.3 * eps[i]).collect();

    let names: Vec<String> = ["control", "signal", "noise_a", "noise_b"].map(String::from).to_vec();
    let r = step_aic_backward(&[control, signal, noise_a, noise_b], &y, &names, &["control".to_owned()])?;
    println!("full AIC {:.2} -> selected AIC {:.2}", r.full_aic, r.aic);
    println!("removed in order: {:?}", r.removed);
    println!("kept: {:?}\n{}", r.selected, r.report);
    Ok(())
}
