//! A small mobility sweep on the bundled factory floor.

use airisk::abm::{run_experiment, ExperimentOptions, SimulationConfig, Sweep};
use airisk::scenario::{factory_default_world, render_world};

fn main() -> airisk::Result<()> {
    let world = factory_default_world();
    print!("{}", render_world(&world));
    println!(
        "{}×{} cells, {} walkable, {} workplaces\n",
        world.width(),
        world.height(),
        world.walkable_cells().len(),
        world.workplace_count()
    );

    let base = SimulationConfig {
        replications: 500,
        ..SimulationConfig::default()
    };
    let sweep = Sweep {
        mobility: vec![0.0, 0.05, 0.2, 0.5],
        population: vec![30, 70],
        ..Sweep::default()
    };
    let results = run_experiment(&base, &sweep, &world, ExperimentOptions::default())?;
    println!("{:>6} {:>4} {:>6} {:>10} {:>10}", "mu", "n", "alpha", "mean", "var");
    for r in &results {
        println!(
            "{:>6} {:>4} {:>6} {:>10.3} {:>10.3}",
            r.point.mobility, r.point.population, r.point.initially_infected, r.statistics.mean, r.statistics.variance
        );
    }
    Ok(())
}
