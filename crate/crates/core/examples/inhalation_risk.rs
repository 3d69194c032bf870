//! Infection probability after ten minutes near a coughing colleague, in a
//! small room, for three immunity levels.

use airisk::dispersion::{BackgroundField, DispersionParams, ProximityField};
use airisk::exposure::{combined_inhalation_probability, direct_inhalation_probability, ExposureParams};

fn main() -> airisk::Result<()> {
    let params = DispersionParams::default();
    let rate = 7.5;
    let field = ProximityField::new(params, rate)?;
    // 5 m × 5 m × 2.5 m room
    let room = BackgroundField::new(vec![rate], params.decay_constant_background, 62.5)?;
    let t = 600.0;

    println!("s = {rate} droplets/s, background {:.3} droplets/m³, t = {} min", room.concentration(), t / 60.0);
    println!("{:>6} {:>8} {:>12} {:>12}", "N_b", "r [m]", "proximity", "combined");
    for n_b in [50.0, 100.0, 200.0] {
        let exposure = ExposureParams::default().with_infectious_dose(n_b);
        for r in [1.0, 1.5, 2.0, 3.0] {
            println!(
                "{n_b:>6} {r:>8} {:>12.5} {:>12.5}",
                direct_inhalation_probability(r, &field, &exposure, t),
                combined_inhalation_probability(r, &field, &room, &exposure, t)
            );
        }
    }
    Ok(())
}
