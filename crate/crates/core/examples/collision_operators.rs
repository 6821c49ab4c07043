//! Assemble the three collision operators and print their structural checks.

use fattail::collision::CollisionOperator;
use fattail::grid::VelocityGrid;
use fattail::model::{Kernel, ModelParams};
use fattail::states::{seeded_rng, smooth_state};
use std::sync::Arc;

fn main() -> fattail::Result<()> {
    let models = [
        ModelParams::fokker_planck(1.0)?,
        ModelParams::scattering(1.0, Kernel::Separable, 0.0)?,
        ModelParams::scattering(1.0, Kernel::PowerDifference, 0.3)?,
        ModelParams::fractional(1.0, 1.0)?,
    ];
    let mut rng = seeded_rng(7);
    println!("{:<40} {:>10} {:>10} {:>10}", "operator", "mass", "|LF|/|F|", "max eig");
    for p in models {
        let op = CollisionOperator::build(Arc::new(VelocityGrid::build_default(&p, 300)?))?;
        let f = smooth_state(op.grid(), &mut rng, 6);
        println!(
            "{:<40} {:>10.2e} {:>10.2e} {:>10.2e}",
            format!("{:?}", p.operator),
            op.mass_defect(&f),
            op.kernel_residual(),
            op.max_dissipation_eigenvalue()?
        );
    }
    Ok(())
}
