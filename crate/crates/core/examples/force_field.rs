//! Force field of the fractional Fokker–Planck operator and its ratio G.

use fattail::collision::{build_force_field, force_field_at};
use fattail::grid::VelocityGrid;
use fattail::model::ModelParams;

fn main() -> fattail::Result<()> {
    for (gamma, sigma) in [(1.0, 1.0), (1.5, 0.7)] {
        let p = ModelParams::fractional(gamma, sigma)?;
        let grid = VelocityGrid::build_default(&p, 400)?;
        let ff = build_force_field(&grid)?;
        let (lo, hi) = ff.g_range(&grid);
        println!("gamma = {gamma}, sigma = {sigma}: residual {:.2e}, G in [{lo:.4}, {hi:.4}]", ff.residual);
        for v in [0.5, 2.0, 10.0, 100.0] {
            println!("  E({v}) = {:.6}", force_field_at(&p, v)?);
        }
    }
    Ok(())
}
