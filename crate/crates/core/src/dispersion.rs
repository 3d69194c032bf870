//! Closed-form droplet concentration fields.
//!
//! Three contamination channels are modelled:
//!
//! * **proximity**: the steady spherically symmetric solution of the sourced,
//!   decaying diffusion equation around a single emitter ([`ProximityField`]);
//! * **background air**: a well-mixed compartment-wide density
//!   ([`BackgroundField`]);
//! * **surfaces**: uniform sedimentation of large droplets onto an area
//!   ([`SurfaceState`]).
//!
//! Units are SI throughout: metres, seconds, droplets per m³ (air) or per m²
//! (surfaces).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants of the near-field droplet model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionParams {
    /// Effective diffusion coefficient D, m²/s (diffusion plus convection).
    pub diffusion_coefficient: f64,
    /// Near-field decay constant τ, s.
    pub decay_constant_direct: f64,
    /// Compartment background-air decay constant τ′, s.
    pub decay_constant_background: f64,
    /// Radius r₀ of the 1 m³ well-mixed control sphere, m.
    pub control_radius: f64,
    /// Validity radius d_max, m; the proximity field vanishes beyond it.
    pub validity_radius: f64,
}

impl Default for DispersionParams {
    /// Fitted values: D = 0.05 m²/s, τ = 50 s, τ′ = 125 s, r₀ = 0.62 m,
    /// d_max = 2.6 m.
    fn default() -> Self {
        Self {
            diffusion_coefficient: 0.05,
            decay_constant_direct: 50.0,
            decay_constant_background: 125.0,
            control_radius: 0.62,
            validity_radius: 2.6,
        }
    }
}

impl DispersionParams {
    pub fn with_direct_decay(mut self, tau: f64) -> Self {
        self.decay_constant_direct = tau;
        self
    }

    pub fn with_diffusion(mut self, d: f64) -> Self {
        self.diffusion_coefficient = d;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("diffusion_coefficient", self.diffusion_coefficient),
            ("decay_constant_direct", self.decay_constant_direct),
            ("decay_constant_background", self.decay_constant_background),
            ("control_radius", self.control_radius),
            ("validity_radius", self.validity_radius),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {value}")));
            }
        }
        if self.control_radius >= self.validity_radius {
            return Err(Error::invalid(
                "validity_radius",
                format!(
                    "must exceed control_radius ({} >= {})",
                    self.control_radius, self.validity_radius
                ),
            ));
        }
        Ok(())
    }

    /// Diffusion length √(Dτ), m.
    pub fn diffusion_length(&self) -> f64 {
        (self.diffusion_coefficient * self.decay_constant_direct).sqrt()
    }

    /// Volume of the control sphere, m³.
    pub fn control_volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.control_radius.powi(3)
    }

    /// ∫ ĉ(r)·4πr² dr for a field whose plateau value is 1.
    ///
    /// The exterior part integrates `r·sinh((d_max − r)/λ)` in closed form:
    /// `4π r₀ λ [d_max·tanh(x/2) − λ(x·coth x − 1)]` with `x = (d_max − r₀)/λ`.
    pub fn mass_per_unit_plateau(&self) -> f64 {
        let r0 = self.control_radius;
        let d = self.validity_radius;
        let lambda = self.diffusion_length();
        let x = (d - r0) / lambda;
        // x·coth(x) − 1 loses precision as x → 0
        let x_coth_minus_one = if x < 1e-2 {
            let x2 = x * x;
            x2 / 3.0 - x2 * x2 / 45.0 + 2.0 * x2 * x2 * x2 / 945.0
        } else {
            x / x.tanh() - 1.0
        };
        let exterior = 4.0 * PI * r0 * lambda * (d * (x / 2.0).tanh() - lambda * x_coth_minus_one);
        self.control_volume() + exterior
    }
}

/// Emission activity of an infected individual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activity {
    Breathing,
    Speaking,
    CoughingSneezing,
    Custom,
}

impl Activity {
    /// Preset emission rate in droplets/s; `None` for [`Activity::Custom`].
    pub fn preset_rate(self) -> Option<f64> {
        match self {
            Activity::Breathing => Some(1.5),
            Activity::Speaking => Some(5.0),
            Activity::CoughingSneezing => Some(66.0),
            Activity::Custom => None,
        }
    }
}

/// Source-side face covering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mask {
    #[default]
    None,
    /// Roughly 20% reduction of the emitted rate.
    Ordinary,
    /// Roughly 40% reduction of the emitted rate.
    Dedicated,
}

impl Mask {
    pub fn factor(self) -> f64 {
        match self {
            Mask::None => 1.0,
            Mask::Ordinary => 0.8,
            Mask::Dedicated => 0.6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceProfile {
    pub base_rate: f64,
    pub activity: Activity,
    pub mask: Mask,
}

impl SourceProfile {
    /// Profile for a preset activity. Panics on [`Activity::Custom`]; use
    /// [`SourceProfile::custom`] for arbitrary rates.
    pub fn preset(activity: Activity, mask: Mask) -> Self {
        let base_rate = activity
            .preset_rate()
            .expect("custom activity has no preset rate");
        Self {
            base_rate,
            activity,
            mask,
        }
    }

    pub fn custom(base_rate: f64, mask: Mask) -> Self {
        Self {
            base_rate,
            activity: Activity::Custom,
            mask,
        }
    }

    /// Emission rate after the mask reduction, droplets/s.
    pub fn effective_rate(&self) -> Result<f64> {
        effective_source_rate(self)
    }
}

pub fn effective_source_rate(profile: &SourceProfile) -> Result<f64> {
    if !(profile.base_rate.is_finite() && profile.base_rate >= 0.0) {
        return Err(Error::invalid(
            "base_rate",
            format!("must be finite and >= 0, got {}", profile.base_rate),
        ));
    }
    Ok(profile.base_rate * profile.mask.factor())
}

/// Plateau concentration C such that the proximity field holds `rate·τ`
/// droplets in total.
pub fn normalization_constant(params: &DispersionParams, rate: f64) -> Result<f64> {
    params.validate()?;
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(Error::invalid("rate", format!("must be finite and >= 0, got {rate}")));
    }
    let mass = params.mass_per_unit_plateau();
    let c = rate * params.decay_constant_direct / mass;
    if !c.is_finite() || mass <= 0.0 {
        return Err(Error::invalid(
            "params",
            format!("degenerate normalization (mass integral {mass})"),
        ));
    }
    Ok(c)
}

/// Steady droplet density around one emitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProximityField {
    params: DispersionParams,
    effective_rate: f64,
    normalization: f64,
}

impl ProximityField {
    pub fn new(params: DispersionParams, effective_rate: f64) -> Result<Self> {
        let normalization = normalization_constant(&params, effective_rate)?;
        Ok(Self {
            params,
            effective_rate,
            normalization,
        })
    }

    pub fn from_profile(params: DispersionParams, profile: &SourceProfile) -> Result<Self> {
        Self::new(params, effective_source_rate(profile)?)
    }

    pub fn params(&self) -> &DispersionParams {
        &self.params
    }

    pub fn effective_rate(&self) -> f64 {
        self.effective_rate
    }

    /// Plateau value C inside the control sphere, droplets/m³.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Density at distance `r` from the emitter, droplets/m³.
    pub fn concentration(&self, r: f64) -> f64 {
        self.normalization * profile_shape(&self.params, r)
    }
}

/// ĉ(r)/C: 1 inside r₀, `(r₀/r)·sinh((d_max−r)/λ)/sinh((d_max−r₀)/λ)` up to
/// d_max, 0 beyond.
pub fn profile_shape(params: &DispersionParams, r: f64) -> f64 {
    let r0 = params.control_radius;
    let d = params.validity_radius;
    if r <= r0 {
        return 1.0;
    }
    if r >= d {
        return 0.0;
    }
    let lambda = params.diffusion_length();
    let a = (d - r) / lambda;
    let b = (d - r0) / lambda;
    // sinh(a)/sinh(b) = e^(a−b)·(1 − e^(−2a))/(1 − e^(−2b)), overflow-free
    let ratio = (a - b).exp() * (-2.0 * a).exp_m1() / (-2.0 * b).exp_m1();
    r0 / r * ratio
}

/// Well-mixed compartment background density.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundField {
    compartment_volume: f64,
    source_rates: Vec<f64>,
    concentration: f64,
}

impl BackgroundField {
    pub fn new(source_rates: Vec<f64>, decay_constant: f64, compartment_volume: f64) -> Result<Self> {
        let concentration = background_concentration(&source_rates, decay_constant, compartment_volume)?;
        Ok(Self {
            compartment_volume,
            source_rates,
            concentration,
        })
    }

    /// A compartment without sources.
    pub fn empty(compartment_volume: f64) -> Result<Self> {
        Self::new(Vec::new(), 1.0, compartment_volume)
    }

    pub fn compartment_volume(&self) -> f64 {
        self.compartment_volume
    }

    pub fn source_rates(&self) -> &[f64] {
        &self.source_rates
    }

    pub fn concentration(&self) -> f64 {
        self.concentration
    }
}

/// `τ′·Σs / V`, droplets/m³.
pub fn background_concentration(rates: &[f64], decay_constant: f64, volume: f64) -> Result<f64> {
    if !(volume.is_finite() && volume > 0.0) {
        return Err(Error::invalid("compartment_volume", format!("must be > 0, got {volume}")));
    }
    if !(decay_constant.is_finite() && decay_constant > 0.0) {
        return Err(Error::invalid(
            "decay_constant_background",
            format!("must be > 0, got {decay_constant}"),
        ));
    }
    if let Some(bad) = rates.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        return Err(Error::invalid("source_rates", format!("must be >= 0, got {bad}")));
    }
    Ok(decay_constant * rates.iter().sum::<f64>() / volume)
}

/// Fraction of exhaled droplets large enough to sediment (diameter ≥ 80 µm).
pub const LARGE_DROPLET_FRACTION: f64 = 0.1;

/// Genome-copy constants of the pathogen carried by sedimenting droplets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathogenSurfaceConstants {
    /// ν, genome copies per large droplet.
    pub genomes_per_droplet: f64,
    /// Surface contamination threshold, gc/m² (1 gc/cm²).
    pub contamination_threshold: f64,
    /// Viral load of saliva, gc/m³.
    pub viral_load: f64,
    /// Mean volume of a large (≈140 µm) droplet, m³.
    pub large_droplet_volume: f64,
}

impl Default for PathogenSurfaceConstants {
    fn default() -> Self {
        Self {
            genomes_per_droplet: 10.0,
            contamination_threshold: 1.0e4,
            viral_load: 7.0e12,
            large_droplet_volume: 1.44e-12,
        }
    }
}

impl PathogenSurfaceConstants {
    /// ν implied by viral load × droplet volume.
    pub fn implied_genomes_per_droplet(&self) -> f64 {
        self.viral_load * self.large_droplet_volume
    }

    /// Checks that ν agrees with viral load × droplet volume within 5%.
    pub fn check_consistency(&self) -> Result<()> {
        let implied = self.implied_genomes_per_droplet();
        let rel = (self.genomes_per_droplet - implied).abs() / implied;
        if rel > 0.05 {
            return Err(Error::invalid(
                "genomes_per_droplet",
                format!(
                    "{} differs from viral_load * large_droplet_volume = {implied} by {:.1}%",
                    self.genomes_per_droplet,
                    rel * 100.0
                ),
            ));
        }
        Ok(())
    }
}

/// Sedimented droplet density on a surface of area `area` after `t` seconds
/// of emission at `rate`.
///
/// Without a surface decay constant the density grows linearly, `w·s·t/A`.
/// With one it saturates: `(w·s·τ_s/A)(1 − e^(−t/τ_s))`.
pub fn surface_density(
    rate: f64,
    large_droplet_fraction: f64,
    area: f64,
    t: f64,
    surface_decay: Option<f64>,
) -> Result<f64> {
    check_surface_geometry(area, large_droplet_fraction)?;
    if !(t >= 0.0) {
        return Err(Error::invalid("t", format!("must be >= 0, got {t}")));
    }
    if !(rate >= 0.0) {
        return Err(Error::invalid("rate", format!("must be >= 0, got {rate}")));
    }
    let flux = large_droplet_fraction * rate / area;
    Ok(match surface_decay {
        None => flux * t,
        Some(tau_s) => {
            check_surface_decay(tau_s)?;
            -flux * tau_s * (-t / tau_s).exp_m1()
        }
    })
}

fn check_surface_geometry(area: f64, w: f64) -> Result<()> {
    if !(area.is_finite() && area > 0.0) {
        return Err(Error::invalid("area", format!("must be > 0, got {area}")));
    }
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::invalid(
            "large_droplet_fraction",
            format!("must lie in [0, 1], got {w}"),
        ));
    }
    Ok(())
}

fn check_surface_decay(tau_s: f64) -> Result<()> {
    if !(tau_s > 0.0) {
        return Err(Error::invalid("surface_decay_constant", format!("must be > 0, got {tau_s}")));
    }
    Ok(())
}

/// Droplet and genome-copy load of one surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceState {
    area: f64,
    large_droplet_fraction: f64,
    surface_decay_constant: Option<f64>,
    pathogen: PathogenSurfaceConstants,
    droplet_density: f64,
}

impl SurfaceState {
    /// A clean surface. `large_droplet_fraction` is typically 0.10.
    pub fn new(
        area: f64,
        large_droplet_fraction: f64,
        surface_decay_constant: Option<f64>,
        pathogen: PathogenSurfaceConstants,
    ) -> Result<Self> {
        check_surface_geometry(area, large_droplet_fraction)?;
        if let Some(tau_s) = surface_decay_constant {
            check_surface_decay(tau_s)?;
        }
        Ok(Self {
            area,
            large_droplet_fraction,
            surface_decay_constant,
            pathogen,
            droplet_density: 0.0,
        })
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn large_droplet_fraction(&self) -> f64 {
        self.large_droplet_fraction
    }

    pub fn surface_decay_constant(&self) -> Option<f64> {
        self.surface_decay_constant
    }

    pub fn droplet_density(&self) -> f64 {
        self.droplet_density
    }

    pub fn genome_density(&self) -> f64 {
        self.droplet_density * self.pathogen.genomes_per_droplet
    }

    pub fn contaminated(&self) -> bool {
        self.genome_density() >= self.pathogen.contamination_threshold
    }

    /// State after a source at `rate` droplets/s stood over the surface for
    /// `duration` seconds.
    pub fn accumulate(&self, rate: f64, duration: f64) -> Result<Self> {
        let added = surface_density(
            rate,
            self.large_droplet_fraction,
            self.area,
            duration,
            self.surface_decay_constant,
        )?;
        let carried = match self.surface_decay_constant {
            None => self.droplet_density,
            Some(tau_s) => self.droplet_density * (-duration / tau_s).exp(),
        };
        Ok(Self {
            droplet_density: carried + added,
            ..*self
        })
    }

    /// Removes `reduction_fraction` of the sedimented droplets.
    pub fn disinfect(&self, reduction_fraction: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&reduction_fraction) {
            return Err(Error::invalid(
                "reduction_fraction",
                format!("must lie in [0, 1], got {reduction_fraction}"),
            ));
        }
        Ok(Self {
            droplet_density: self.droplet_density * (1.0 - reduction_fraction),
            ..*self
        })
    }
}

/// Emission time after which a surface crosses the contamination threshold:
/// `A·gc_thres / (w·s·ν)`, seconds.
///
/// A non-positive `rate` never contaminates anything and yields
/// [`f64::INFINITY`] rather than an error, so sweeps over `rate` may include 0.
pub fn contamination_threshold_time(
    area: f64,
    contamination_threshold: f64,
    large_droplet_fraction: f64,
    rate: f64,
    genomes_per_droplet: f64,
) -> Result<f64> {
    let positive = [
        ("area", area),
        ("contamination_threshold", contamination_threshold),
        ("large_droplet_fraction", large_droplet_fraction),
        ("genomes_per_droplet", genomes_per_droplet),
    ];
    for (name, value) in positive {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::invalid(name, format!("must be > 0, got {value}")));
        }
    }
    if rate.is_nan() {
        return Err(Error::invalid("rate", "NaN"));
    }
    if rate <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(area * contamination_threshold / (large_droplet_fraction * rate * genomes_per_droplet))
}
