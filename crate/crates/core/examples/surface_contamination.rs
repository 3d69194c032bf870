//! How long an emitter must stay at a workstation before the surface is
//! contaminated, and what disinfection does to it.

use airisk::dispersion::{
    contamination_threshold_time, PathogenSurfaceConstants, SurfaceState, LARGE_DROPLET_FRACTION,
};
use airisk::exposure::{infection_probability_surface, ExposureParams};

fn main() -> airisk::Result<()> {
    let pathogen = PathogenSurfaceConstants::default();
    pathogen.check_consistency()?;
    let w = LARGE_DROPLET_FRACTION;

    for area in [2.25, 1.0] {
        for rate in [66.0, 5.0] {
            let t = contamination_threshold_time(area, pathogen.contamination_threshold, w, rate, pathogen.genomes_per_droplet)?;
            println!("A = {area} m², s = {rate}/s: contaminated after {:.1} min", t / 60.0);
        }
    }

    let desk = SurfaceState::new(2.25, w, None, pathogen)?.accumulate(66.0, 3600.0)?;
    println!(
        "\nafter one hour of coughing: {:.0} gc/m², contaminated = {}",
        desk.genome_density(),
        desk.contaminated()
    );
    let cleaned = desk.disinfect(0.95)?;
    println!(
        "after 95% disinfection:     {:.0} gc/m², contaminated = {}",
        cleaned.genome_density(),
        cleaned.contaminated()
    );

    let exposure = ExposureParams::default();
    let t_thres = contamination_threshold_time(2.25, pathogen.contamination_threshold, w, 66.0, pathogen.genomes_per_droplet)?;
    for minutes in [10.0, 60.0, 240.0] {
        println!(
            "working {minutes:>5} min at the contaminated desk: p = {:.4}",
            infection_probability_surface(minutes * 60.0, 3600.0, t_thres, &exposure)
        );
    }
    Ok(())
}
