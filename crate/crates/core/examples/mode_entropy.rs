//! One Fourier mode: trajectory, modified entropy and its I-term decomposition.

use fattail::grid::VelocityGrid;
use fattail::collision::CollisionOperator;
use fattail::hypocoercivity::{entropy_report, ModeEvolver, ModeState};
use fattail::model::{Kernel, ModelParams};
use fattail::sim::{velocity_profile_values, TimeGrid, VelocityProfile};
use fattail::C64;
use std::sync::Arc;

fn main() -> fattail::Result<()> {
    let params = ModelParams::scattering(1.0, Kernel::Separable, 0.0)?;
    let grid = Arc::new(VelocityGrid::build_default(&params, 200)?);
    let op = CollisionOperator::build(grid.clone())?;
    let xi = 0.1;
    let bump = VelocityProfile::Bump { center: 2.0, width: 0.5 };
    let h: Vec<C64> = velocity_profile_values(&bump, &grid)?.into_iter().map(|x| C64::new(x, 0.0)).collect();
    let ev = ModeEvolver::new(&op, xi, 1e-8);
    let times = TimeGrid { t_min: 0.01, t_max: 1e3, count: 11 }.times();
    let traj = ev.evolve(&ModeState::new(xi, h, 0.0), &times)?;
    let reports = entropy_report(&ev, &traj, 1.0, params.default_eta())?;
    println!("{:>10} {:>12} {:>12} {:>12} {:>12}", "t", "|f|^2", "H", "R", "dH/dt");
    for r in reports {
        println!("{:>10.3e} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e}", r.time, r.norm2, r.h, r.r, r.r_flow);
    }
    Ok(())
}
