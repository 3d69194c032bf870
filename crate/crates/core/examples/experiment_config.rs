//! Parse an experiment document, print its resolved form and write the
//! result files of a short run.

use airisk::abm::{run_experiment, ExperimentOptions};
use airisk::scenario::{parse_config, write_results};

const DOCUMENT: &str = r#"
[simulation]
replications = 200
base_seed = 42

[simulation.rates]
include_diagonal = true

[sweep]
initially_infected = [5, 9]
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = parse_config(DOCUMENT)?;
    println!("{}", config.to_toml()?);

    let world = config.load_world(std::path::Path::new("."))?;
    let results = run_experiment(&config.simulation, &config.sweep, &world, ExperimentOptions::default())?;
    let dir = std::env::temp_dir().join("airisk-example");
    let files = write_results(&dir, &results, true, false)?;
    print!("{}", std::fs::read_to_string(&files.aggregate)?);
    Ok(())
}
