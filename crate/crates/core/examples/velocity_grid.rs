//! Tail-adapted velocity grid: mass, moments and refinement behaviour.

use fattail::grid::{refinement_change, MapParams, VelocityGrid};
use fattail::model::ModelParams;

fn main() -> fattail::Result<()> {
    let params = ModelParams::fokker_planck(1.0)?;
    let grid = VelocityGrid::build_default(&params, 400)?;
    println!("n = {}, v_max = {:.3e}", grid.len(), grid.v_max());
    println!("mass of F = {:.12}", grid.mass_of_equilibrium());
    for k in [0.25, 0.5, 0.9] {
        println!("int <v>^{k} F dv = {:.8}", grid.moment(k)?);
    }
    let map = MapParams::new(1.0, 8.0);
    println!("refinement change of the k = 0.5 moment (p = 8): {:.2e}", refinement_change(&params, 400, map, 0.5)?);
    Ok(())
}
