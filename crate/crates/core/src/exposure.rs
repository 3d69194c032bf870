//! Dose-response: from droplet densities and surface states to infection
//! probabilities.

use serde::{Deserialize, Serialize};

use crate::dispersion::{BackgroundField, ProximityField};
use crate::error::{Error, Result};

/// Host and pathogen constants for the inhalation and fomite channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExposureParams {
    /// Q, m³/s. 19 dm³/min.
    pub breathing_rate: f64,
    /// N_b, droplets inhaled for infection probability `dose_probability`.
    pub infectious_dose: f64,
    /// a, infection probability after inhaling N_b droplets.
    pub dose_probability: f64,
    /// Infection probability per hand-to-fomite-to-face contact.
    pub contact_probability: f64,
    /// Contacts per second.
    pub contact_frequency: f64,
}

impl Default for ExposureParams {
    fn default() -> Self {
        Self {
            breathing_rate: 3.16e-4,
            infectious_dose: 100.0,
            dose_probability: 0.1,
            contact_probability: 1.0e-4,
            contact_frequency: 1.0 / 60.0,
        }
    }
}

impl ExposureParams {
    pub fn with_infectious_dose(mut self, n_b: f64) -> Self {
        self.infectious_dose = n_b;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("breathing_rate", self.breathing_rate),
            ("infectious_dose", self.infectious_dose),
            ("contact_probability", self.contact_probability),
            ("contact_frequency", self.contact_frequency),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {value}")));
            }
        }
        if !(self.dose_probability > 0.0 && self.dose_probability < 1.0) {
            return Err(Error::invalid(
                "dose_probability",
                format!("must lie in (0, 1), got {}", self.dose_probability),
            ));
        }
        if self.contact_probability > 1.0 {
            return Err(Error::invalid("contact_probability", "must not exceed 1"));
        }
        Ok(())
    }
}

/// Droplets inhaled at constant density `c` over `t` seconds: `Q·c·t`.
pub fn inhaled_count(concentration: f64, breathing_rate: f64, t: f64) -> f64 {
    breathing_rate * concentration * t
}

/// `1 − (1 − a)^(N/N_b)`.
pub fn infection_probability_inhalation(inhaled: f64, params: &ExposureParams) -> f64 {
    if inhaled <= 0.0 {
        return 0.0;
    }
    let doses = inhaled / params.infectious_dose;
    (-(doses * (-params.dose_probability).ln_1p()).exp_m1()).clamp(0.0, 1.0)
}

/// First-order per-step probability `a·Q·ĉ(r)·δt / N_b` of the proximity
/// channel. Values at or above 1 mean the linearization no longer holds; they
/// are clamped to 1 and a warning is logged.
pub fn per_step_direct_probability(r: f64, field: &ProximityField, params: &ExposureParams, dt: f64) -> f64 {
    let p = params.dose_probability * params.breathing_rate * field.concentration(r) * dt / params.infectious_dose;
    if p >= 1.0 {
        log::warn!("linearized per-step probability {p:.3} at r = {r} m, dt = {dt} s saturated to 1");
        return 1.0;
    }
    p.max(0.0)
}

/// Fomite-channel probability for a susceptible individual spending `t`
/// seconds at a surface that an infectious individual occupied for `t1`
/// seconds beforehand. Zero unless `t1 > t_thres`; clamped to 1.
pub fn infection_probability_surface(t: f64, t1: f64, t_thres: f64, params: &ExposureParams) -> f64 {
    if t1 > t_thres && t > 0.0 {
        (t * params.contact_frequency * params.contact_probability).min(1.0)
    } else {
        0.0
    }
}

/// `f_contact·p_contact·δt`, clamped to 1.
pub fn per_step_surface_probability(params: &ExposureParams, dt: f64) -> f64 {
    (params.contact_frequency * params.contact_probability * dt).clamp(0.0, 1.0)
}

/// Inhalation probability when proximity and background densities are
/// breathed together for `t` seconds. Densities add before the dose
/// conversion.
pub fn combined_inhalation_probability(
    r: f64,
    field: &ProximityField,
    background: &BackgroundField,
    params: &ExposureParams,
    t: f64,
) -> f64 {
    let c = field.concentration(r) + background.concentration();
    infection_probability_inhalation(inhaled_count(c, params.breathing_rate, t), params)
}

/// Proximity-only inhalation probability after `t` seconds at distance `r`.
pub fn direct_inhalation_probability(r: f64, field: &ProximityField, params: &ExposureParams, t: f64) -> f64 {
    infection_probability_inhalation(
        inhaled_count(field.concentration(r), params.breathing_rate, t),
        params,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::DispersionParams;
    use approx::assert_relative_eq;

    fn coughing() -> ProximityField {
        ProximityField::new(DispersionParams::default(), 66.0).unwrap()
    }

    #[test]
    fn dose_response_anchor_points() {
        let p = ExposureParams::default();
        assert_relative_eq!(infection_probability_inhalation(100.0, &p), 0.1, max_relative = 1e-15);
        assert_eq!(infection_probability_inhalation(0.0, &p), 0.0);
        assert_relative_eq!(infection_probability_inhalation(200.0, &p), 0.19, max_relative = 1e-14);
    }

    #[test]
    fn inhaled_count_example() {
        assert_eq!(inhaled_count(0.0, 3.16e-4, 60.0), 0.0);
        assert_relative_eq!(inhaled_count(259.0, 3.16e-4, 60.0), 4.910_64, max_relative = 1e-12);
    }

    #[test]
    fn per_step_direct_rates() {
        let p = ExposureParams::default();
        let f = coughing();
        let same = per_step_direct_probability(0.75, &f, &p, 60.0);
        let adjacent = per_step_direct_probability(1.5, &f, &p, 60.0);
        assert!((same - 0.0049).abs() / 0.0049 < 0.05, "{same}");
        assert!((adjacent - 0.0013).abs() / 0.0013 < 0.05, "{adjacent}");
        assert_eq!(per_step_direct_probability(2.6, &f, &p, 60.0), 0.0);
        assert_eq!(per_step_direct_probability(5.0, &f, &p, 60.0), 0.0);
    }

    #[test]
    fn per_step_direct_saturates() {
        let p = ExposureParams::default();
        let f = ProximityField::new(DispersionParams::default(), 1e6).unwrap();
        assert_eq!(per_step_direct_probability(0.1, &f, &p, 3600.0), 1.0);
    }

    #[test]
    fn surface_channel() {
        let p = ExposureParams::default();
        assert_eq!(infection_probability_surface(600.0, 10.0, 20.0, &p), 0.0);
        assert_eq!(infection_probability_surface(600.0, 20.0, 20.0, &p), 0.0);
        assert_relative_eq!(infection_probability_surface(600.0, 30.0, 20.0, &p), 0.001, max_relative = 1e-12);
        assert_eq!(infection_probability_surface(0.0, 30.0, 20.0, &p), 0.0);
        assert_eq!(infection_probability_surface(1e12, 30.0, 20.0, &p), 1.0);

        assert_relative_eq!(per_step_surface_probability(&p, 60.0), 1e-4, max_relative = 1e-12);
        assert_relative_eq!(per_step_surface_probability(&p, 120.0), 2e-4, max_relative = 1e-12);
        assert_eq!(per_step_surface_probability(&p, 0.0), 0.0);
    }

    #[test]
    fn combined_channel() {
        let p = ExposureParams::default();
        let f = coughing();
        let empty = BackgroundField::empty(100.0).unwrap();
        assert_eq!(
            combined_inhalation_probability(1.0, &f, &empty, &p, 600.0),
            direct_inhalation_probability(1.0, &f, &p, 600.0)
        );
        let bg = BackgroundField::new(vec![66.0], 125.0, 100.0).unwrap();
        let far = combined_inhalation_probability(3.0, &f, &bg, &p, 600.0);
        let bg_only = infection_probability_inhalation(inhaled_count(bg.concentration(), p.breathing_rate, 600.0), &p);
        assert_relative_eq!(far, bg_only);

        let params = DispersionParams::default();
        let f = ProximityField::new(params, 7.5).unwrap();
        let room = BackgroundField::new(vec![7.5], params.decay_constant_background, 62.5).unwrap();
        let combined = combined_inhalation_probability(2.0, &f, &room, &p, 600.0);
        let direct = direct_inhalation_probability(2.0, &f, &p, 600.0);
        assert!(combined > direct);
    }

    #[test]
    fn params_validation() {
        ExposureParams::default().validate().unwrap();
        let bad = ExposureParams {
            dose_probability: 1.0,
            ..ExposureParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = ExposureParams {
            infectious_dose: 0.0,
            ..ExposureParams::default()
        };
        assert!(bad.validate().is_err());
    }
}
