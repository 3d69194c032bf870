//! Droplet density around one emitter for the three preset activities, with
//! and without a mask.

use airisk::dispersion::{Activity, DispersionParams, Mask, ProximityField, SourceProfile};

fn main() -> airisk::Result<()> {
    let params = DispersionParams::default();
    println!(
        "D = {} m²/s, tau = {} s, r0 = {} m, d_max = {} m, diffusion length {:.3} m",
        params.diffusion_coefficient,
        params.decay_constant_direct,
        params.control_radius,
        params.validity_radius,
        params.diffusion_length()
    );

    let distances = [0.0, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0];
    print!("{:<28}", "source");
    for r in distances {
        print!("{:>9}", format!("{r} m"));
    }
    println!();

    for activity in [Activity::Breathing, Activity::Speaking, Activity::CoughingSneezing] {
        for mask in [Mask::None, Mask::Dedicated] {
            let field = ProximityField::from_profile(params, &SourceProfile::preset(activity, mask))?;
            print!("{:<28}", format!("{activity:?} / {mask:?}"));
            for r in distances {
                print!("{:>9.2}", field.concentration(r));
            }
            println!();
        }
    }

    let cough = ProximityField::new(params, 66.0)?;
    println!("\nplateau C for s = 66: {:.3} droplets/m³", cough.normalization());
    Ok(())
}
