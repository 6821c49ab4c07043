//! A reduced-size mode sweep and a fit of the L² decay exponent.
//! The full-size runs use `default_config` unchanged.

use fattail::model::{predicted_rate, Kernel, ModelParams};
use fattail::sim::{default_config, fit_rate, run_simulation, RateModel};

fn main() -> fattail::Result<()> {
    let params = ModelParams::scattering(1.0, Kernel::Separable, 0.0)?;
    let mut cfg = default_config(params);
    cfg.n_velocity = 150;
    cfg.n_modes = 96;
    let result = run_simulation(&cfg)?;
    let fit = fit_rate(&result.times, &result.l2_norm2, RateModel::PowerLaw, Some((100.0, 1e4)))?;
    println!("predicted tau = {:?}", predicted_rate(&params)?.tau);
    println!("fitted tau    = {:.4} (stderr {:.1e})", fit.tau_hat, fit.stderr);
    println!("mass drift {:.1e}, plancherel error {:.1e}", result.mass_drift, result.plancherel_error);
    Ok(())
}
