//! Per-minute transmission probabilities used by the workplace simulation,
//! derived from the dispersion and exposure models.

use airisk::abm::{TransmissionRates, DIAGONAL_CELL_DISTANCE, NEIGHBOR_CELL_DISTANCE, SAME_CELL_DISTANCE, STEP_SECONDS};
use airisk::dispersion::DispersionParams;
use airisk::exposure::ExposureParams;

fn main() -> airisk::Result<()> {
    let dispersion = DispersionParams::default();
    let exposure = ExposureParams::default();
    for rate in [66.0, 7.5, 5.0] {
        let r = TransmissionRates::from_models(&dispersion, &exposure, rate, STEP_SECONDS, true)?;
        println!("s = {rate}/s");
        println!("  same cell     (r = {SAME_CELL_DISTANCE} m):    {:.5}", r.same_cell);
        println!("  adjacent cell (r = {NEIGHBOR_CELL_DISTANCE} m):     {:.5}", r.neighbor_cell);
        println!(
            "  diagonal cell (r = {DIAGONAL_CELL_DISTANCE:.3} m): {:.5}",
            r.diagonal_cell.unwrap_or(0.0)
        );
        println!("  surface contact:             {:.5}", r.surface);
    }
    println!("\ndefaults used by the simulation: {:?}", TransmissionRates::default());
    Ok(())
}
