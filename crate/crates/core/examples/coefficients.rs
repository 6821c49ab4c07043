//! Coefficient family over a |ξ| sweep, and the small-|ξ| behaviour of μ₂.

use fattail::coefficients::{diffusion_limit_coeff, kappa, mu2_asymptotic_reference, symbol_moments};
use fattail::model::{Kernel, ModelParams};
use fattail::sim::tasks::{coefficient_table, CoeffsConfig};

fn main() -> fattail::Result<()> {
    let params = ModelParams::scattering(1.0, Kernel::Separable, 0.0)?;
    let table = coefficient_table(&CoeffsConfig {
        params,
        n_velocity: 300,
        eta: None,
        xi_min: 1e-4,
        xi_max: 1e2,
        count: 7,
    })?;
    table.write(std::io::stdout().lock())?;

    for (gamma, beta) in [(1.0, 0.0), (3.0, 0.0), (2.0, 0.0)] {
        let p = ModelParams::scattering(gamma, Kernel::Separable, beta)?;
        let a = symbol_moments(&p, 1e-5, p.default_eta())?.mu2;
        let b = symbol_moments(&p, 1e-3, p.default_eta())?.mu2;
        let r = mu2_asymptotic_reference(&p);
        println!(
            "gamma = {gamma}: mu2 slope {:.4}, reference exponent {}{}",
            (b / a).ln() / 100f64.ln(),
            r.exponent,
            if r.log_corrected { " with |log xi|" } else { "" }
        );
    }
    let b = diffusion_limit_coeff(&params, 1.0, 1e-3)?;
    println!("b_eps(1)/kappa at eps = 1e-3: {:.4}", b / kappa(&params)?);
    Ok(())
}
