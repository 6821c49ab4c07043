//! Nash profiles and their small and large argument slopes.

use fattail::model::{log_nash_profile, nash_profile};

fn main() -> fattail::Result<()> {
    for a in [0.5, 1.0, 2.0] {
        let slope = |s0: f64, s1: f64| -> fattail::Result<f64> {
            Ok((nash_profile(1, a, s1)? / nash_profile(1, a, s0)?).ln() / (s1 / s0).ln())
        };
        println!(
            "a = {a}: slope near 0 {:.4} (expect {:.4}), slope at infinity {:.4}",
            slope(1e-9, 1e-7)?,
            1.0 / (1.0 + a),
            slope(1e9, 1e11)?
        );
    }
    for x in [1e-3, 0.1, 0.5] {
        println!("log profile at {x}: {:.6e}", log_nash_profile(1, x)?);
    }
    Ok(())
}
