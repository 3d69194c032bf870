//! Steady finite-volume solution against the closed-form proximity field on
//! three grids, then the source-off half-life.

use airisk::dispersion::{DispersionParams, ProximityField};
use airisk::pde::{compare, RadialGrid, RadialSolver, STEADY_MAX_DECAY_TIMES, STEADY_TOLERANCE};

fn main() -> airisk::Result<()> {
    let params = DispersionParams::default();
    let rate = 66.0;
    let field = ProximityField::new(params, rate)?;

    println!("{:>6} {:>12} {:>12} {:>10} {:>10}", "cells", "l2 rel", "max rel", "mass", "t_end");
    let mut last = None;
    for cells in [128, 256, 512] {
        let grid = RadialGrid::for_params(&params, cells)?;
        let mut solver = RadialSolver::new(params, rate, grid)?;
        let steady = solver.run_to_steady(STEADY_TOLERANCE, STEADY_MAX_DECAY_TIMES)?;
        let cmp = compare(&steady, &field)?;
        println!(
            "{cells:>6} {:>12.3e} {:>12.3e} {:>10.2} {:>10.0}",
            cmp.l2_relative,
            cmp.max_relative_on_range,
            steady.total_mass(),
            steady.time
        );
        last = Some(solver);
    }

    let mut solver = last.expect("three grids ran");
    solver.set_rate(0.0);
    let half_life = solver.time_to_mass_fraction(0.5, 20.0 * params.decay_constant_direct)?;
    println!(
        "\nsource off: half-life {half_life:.3} s, ln 2 · tau = {:.3} s",
        std::f64::consts::LN_2 * params.decay_constant_direct
    );
    Ok(())
}
