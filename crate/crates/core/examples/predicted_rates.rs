//! Closed-form decay predictions across the parameter plane.

use fattail::model::{predicted_rate, Kernel, ModelParams};

fn main() -> fattail::Result<()> {
    println!("{:>6} {:>6} {:>5} {:>8} {:>8}  regime", "gamma", "beta", "k", "alpha", "tau");
    for (gamma, beta, k) in [(1.0, 0.0, 0.0), (4.0, 0.0, 0.0), (2.0, 0.0, 0.0), (3.0, 1.0, 0.5), (1.0, -0.5, 0.0), (1.5, 2.0, 1.2)] {
        let p = ModelParams::scattering(gamma, Kernel::Separable, beta)?.with_k(k)?;
        let r = predicted_rate(&p)?;
        println!("{gamma:>6} {beta:>6} {k:>5} {:>8.4} {:>8.4}  {:?}", r.alpha, r.tau.value(), r.regime);
    }
    Ok(())
}
