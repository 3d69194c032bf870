//! Time-dependent finite-volume solver for the spherically symmetric
//! sourced diffusion equation with decay,
//!
//! ```text
//! ∂c/∂t = D (∂²c/∂r² + (2/r) ∂c/∂r) + S − c/τ
//! ```
//!
//! used as an independent check of the closed-form proximity field.
//!
//! # Discretization
//!
//! Cells are spherical shells `[iΔr, (i+1)Δr]` with volume
//! `4π((i+1)³ − i³)Δr³/3`; face fluxes are `D·4πr_f²·(c_L − c_R)/Δ`, with Δ
//! the distance between the two cell nodes. Everything inside the control
//! radius r₀ is one well-mixed control cell: a single value, the whole source
//! `s`, and its own value at the r₀ interface. Between r₀ and the first grid
//! face at least Δr further out sits a cut cell, so the interface is exactly at
//! r₀ whatever the grid spacing; the remaining cells are whole shells. Shells
//! with centres at or beyond d_max are held at zero and the outermost active
//! shell loses `D·4πd_max²·c/(d_max − r_c)` to the absorbing boundary. The
//! r = 0 singularity never appears because only face areas enter the fluxes.
//!
//! Per-cell output maps the control value onto every shell centred below r₀
//! and linearly interpolates between nodes elsewhere, which is the identity
//! on whole shells.
//!
//! # Outer boundary
//!
//! [`OuterBoundary::Absorbing`] discards what crosses d_max.
//! [`OuterBoundary::Recirculating`] (the default) returns it to the control
//! cell in the same step, so the only sink is decay and the steady droplet
//! budget is exactly `s·τ`, the normalization of the closed form.
//!
//! # Time stepping
//!
//! Forward Euler. A step is stable and keeps every value non-negative when
//! `Δt · (Σ_faces g_f / V_i + 1/τ) ≤ 1` for every cell `i`, where `g_f` are the
//! face conductances of the cell. The default step is 0.9 of that bound.

use std::f64::consts::PI;

use crate::dispersion::{DispersionParams, ProximityField};
use crate::error::{Error, Result};

pub const MIN_CELLS: usize = 64;
pub const MIN_CONTROL_CELLS: usize = 8;
const DEFAULT_CFL: f64 = 0.9;

/// Uniform radial grid on `[0, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    r_min: f64,
    r_max: f64,
    n_cells: usize,
    spacing: f64,
}

impl RadialGrid {
    pub fn new(r_max: f64, n_cells: usize) -> Result<Self> {
        if n_cells < MIN_CELLS {
            return Err(Error::invalid("n_cells", format!("must be >= {MIN_CELLS}, got {n_cells}")));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::invalid("r_max", format!("must be > 0, got {r_max}")));
        }
        Ok(Self {
            r_min: 0.0,
            r_max,
            n_cells,
            spacing: r_max / n_cells as f64,
        })
    }

    /// Grid ending exactly at the validity radius.
    pub fn for_params(params: &DispersionParams, n_cells: usize) -> Result<Self> {
        let grid = Self::new(params.validity_radius, n_cells)?;
        grid.check_resolves(params)?;
        Ok(grid)
    }

    pub fn check_resolves(&self, params: &DispersionParams) -> Result<()> {
        params.validate()?;
        if self.r_max < params.validity_radius * (1.0 - 1e-12) {
            return Err(Error::invalid(
                "r_max",
                format!("{} does not reach d_max = {}", self.r_max, params.validity_radius),
            ));
        }
        let inside = self.control_cells(params.control_radius);
        if inside < MIN_CONTROL_CELLS {
            return Err(Error::invalid(
                "n_cells",
                format!("only {inside} cells inside r0, need {MIN_CONTROL_CELLS}"),
            ));
        }
        Ok(())
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn face(&self, i: usize) -> f64 {
        self.r_min + i as f64 * self.spacing
    }

    pub fn center(&self, i: usize) -> f64 {
        self.r_min + (i as f64 + 0.5) * self.spacing
    }

    pub fn cell_volume(&self, i: usize) -> f64 {
        4.0 / 3.0 * PI * (self.face(i + 1).powi(3) - self.face(i).powi(3))
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_cells).map(|i| self.center(i))
    }

    /// Number of cells whose centre lies below `r`.
    fn count_below(&self, r: f64) -> usize {
        (0..self.n_cells).take_while(|&i| self.center(i) < r).count()
    }

    fn control_cells(&self, r0: f64) -> usize {
        self.count_below(r0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OuterBoundary {
    #[default]
    Recirculating,
    Absorbing,
}

/// Field snapshot returned by the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeSolution {
    pub grid: RadialGrid,
    pub time: f64,
    pub values: Vec<f64>,
    pub steady: bool,
}

impl PdeSolution {
    /// The closed-form field sampled at the cell centres, flagged steady.
    pub fn from_field(grid: RadialGrid, field: &ProximityField) -> Self {
        Self {
            values: grid.centers().map(|r| field.concentration(r)).collect(),
            grid,
            time: f64::INFINITY,
            steady: true,
        }
    }

    /// Σ c_i·V_i, droplets.
    pub fn total_mass(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, c)| c * self.grid.cell_volume(i))
            .sum()
    }
}

/// Explicit finite-volume integrator. Owns its state; see the module docs for
/// the scheme.
#[derive(Debug, Clone)]
pub struct RadialSolver {
    params: DispersionParams,
    rate: f64,
    grid: RadialGrid,
    boundary: OuterBoundary,
    /// Cells merged into the control volume.
    n_control: usize,
    /// Grid face closing the cut cell; whole shells start here.
    first_face: usize,
    /// Cells with centre below d_max; the rest stay zero.
    n_active: usize,
    /// Representative radius of each reduced unknown: r₀ for the control
    /// cell, then shell midpoints.
    nodes: Vec<f64>,
    /// Volumes of the reduced unknowns: index 0 is the control sphere.
    volumes: Vec<f64>,
    /// Conductance between reduced unknowns k and k+1.
    conductance: Vec<f64>,
    /// Conductance from the last active unknown to the absorbing wall.
    wall_conductance: f64,
    /// Reduced state: control value followed by exterior shells.
    state: Vec<f64>,
    scratch: Vec<f64>,
    time: f64,
    dt: f64,
    stability_bound: f64,
    track_balance: bool,
    max_balance_residual: f64,
    boundary_outflow: f64,
}

impl RadialSolver {
    pub fn new(params: DispersionParams, rate: f64, grid: RadialGrid) -> Result<Self> {
        grid.check_resolves(&params)?;
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::invalid("rate", format!("must be >= 0, got {rate}")));
        }
        let r0 = params.control_radius;
        let h = grid.spacing();
        let d = params.diffusion_coefficient;
        let n_control = grid.control_cells(r0);
        let n_active = grid.count_below(params.validity_radius);
        // First exterior unknown is a cut cell [r0, face(first_face)] at least
        // Δr wide; the remaining unknowns are whole grid shells.
        let first_face = (n_control + 1..=n_active)
            .find(|&i| grid.face(i) >= r0 + h * (1.0 - 1e-9))
            .ok_or_else(|| Error::invalid("n_cells", "no exterior cells between r0 and d_max"))?;

        let shell = |a: f64, b: f64| 4.0 / 3.0 * PI * (b.powi(3) - a.powi(3));
        let area = |r: f64| 4.0 * PI * r * r;
        let cut_outer = grid.face(first_face);

        let mut nodes = vec![r0, 0.5 * (r0 + cut_outer)];
        let mut volumes = vec![shell(0.0, r0), shell(r0, cut_outer)];
        for i in first_face..n_active {
            nodes.push(grid.center(i));
            volumes.push(grid.cell_volume(i));
        }
        let unknowns = nodes.len();
        // interface value of the control cell is its own value, so the
        // control ↔ cut-cell distance is half the cut-cell width
        let conductance: Vec<f64> = (0..unknowns - 1)
            .map(|k| {
                let face = if k == 0 { r0 } else { grid.face(first_face + k - 1) };
                d * area(face) / (nodes[k + 1] - nodes[k])
            })
            .collect();
        let wall_conductance = d * area(params.validity_radius) / (params.validity_radius - nodes[unknowns - 1]);

        let decay = 1.0 / params.decay_constant_direct;
        let stability_bound = (0..unknowns)
            .map(|k| {
                let left = if k > 0 { conductance[k - 1] } else { 0.0 };
                let right = if k + 1 < unknowns { conductance[k] } else { wall_conductance };
                1.0 / ((left + right) / volumes[k] + decay)
            })
            .fold(f64::INFINITY, f64::min);

        Ok(Self {
            params,
            rate,
            grid,
            boundary: OuterBoundary::default(),
            n_control,
            first_face,
            n_active,
            nodes,
            volumes,
            conductance,
            wall_conductance,
            state: vec![0.0; unknowns],
            scratch: vec![0.0; unknowns],
            time: 0.0,
            dt: DEFAULT_CFL * stability_bound,
            stability_bound,
            track_balance: false,
            max_balance_residual: 0.0,
            boundary_outflow: 0.0,
        })
    }

    pub fn with_boundary(mut self, boundary: OuterBoundary) -> Self {
        self.boundary = boundary;
        self
    }

    /// Overrides the time step. Steps above [`RadialSolver::stability_bound`]
    /// are accepted here and reported as a numerical failure once the field
    /// stops being finite.
    pub fn with_time_step(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    /// Starts from `values` (one per cell) instead of zero. The control and
    /// cut cells take the volume-weighted mean of the shells they cover;
    /// cells beyond d_max are ignored.
    pub fn with_initial(mut self, values: &[f64]) -> Result<Self> {
        if values.len() != self.grid.n_cells() {
            return Err(Error::invalid(
                "initial",
                format!("expected {} values, got {}", self.grid.n_cells(), values.len()),
            ));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("initial", "values must be finite and >= 0"));
        }
        let mean = |range: std::ops::Range<usize>| {
            let (m, v) = range.fold((0.0, 0.0), |(m, v), i| {
                let vol = self.grid.cell_volume(i);
                (m + values[i] * vol, v + vol)
            });
            if v > 0.0 {
                m / v
            } else {
                0.0
            }
        };
        self.state[0] = mean(0..self.n_control);
        self.state[1] = mean(self.n_control..self.first_face);
        self.state[2..].copy_from_slice(&values[self.first_face..self.n_active]);
        Ok(self)
    }

    /// Records the per-step mass-balance residual (costs one extra pass per step).
    pub fn track_mass_balance(mut self, on: bool) -> Self {
        self.track_balance = on;
        self
    }

    pub fn set_rate(&mut self, rate: f64) {
        self.rate = rate;
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn time_step(&self) -> f64 {
        self.dt
    }

    /// Largest stable forward-Euler step for this grid and parameter set.
    pub fn stability_bound(&self) -> f64 {
        self.stability_bound
    }

    /// Largest |ΔM − Δt(s − M/τ − outflow + returned)| over the steps taken
    /// with balance tracking on.
    pub fn max_mass_balance_residual(&self) -> f64 {
        self.max_balance_residual
    }

    /// Droplets that have left through d_max (absorbing boundary only).
    pub fn boundary_outflow(&self) -> f64 {
        self.boundary_outflow
    }

    pub fn total_mass(&self) -> f64 {
        self.state.iter().zip(&self.volumes).map(|(c, v)| c * v).sum()
    }

    pub fn solution(&self, steady: bool) -> PdeSolution {
        let r0 = self.params.control_radius;
        let d_max = self.params.validity_radius;
        let values = self
            .grid
            .centers()
            .map(|r| {
                if r < r0 {
                    return self.state[0];
                }
                if r >= d_max {
                    return 0.0;
                }
                let j = self.nodes.partition_point(|&n| n <= r) - 1;
                let (r_a, c_a) = (self.nodes[j], self.state[j]);
                let (r_b, c_b) = match self.nodes.get(j + 1) {
                    Some(&n) => (n, self.state[j + 1]),
                    None => (d_max, 0.0),
                };
                let w = (r - r_a) / (r_b - r_a);
                (1.0 - w) * c_a + w * c_b
            })
            .collect();
        PdeSolution {
            grid: self.grid,
            time: self.time,
            values,
            steady,
        }
    }

    fn step(&mut self, dt: f64) {
        let n = self.state.len();
        let decay = 1.0 / self.params.decay_constant_direct;
        let mass_before = if self.track_balance { self.total_mass() } else { 0.0 };

        let wall_flux = self.wall_conductance * self.state[n - 1];
        let returned = match self.boundary {
            OuterBoundary::Recirculating => wall_flux,
            OuterBoundary::Absorbing => 0.0,
        };

        // net inflow per unknown, written into scratch
        self.scratch.fill(0.0);
        for k in 0..n - 1 {
            let flux = self.conductance[k] * (self.state[k] - self.state[k + 1]);
            self.scratch[k] -= flux;
            self.scratch[k + 1] += flux;
        }
        self.scratch[n - 1] -= wall_flux;
        self.scratch[0] += self.rate + returned;

        for k in 0..n {
            let c = self.state[k];
            self.state[k] = c + dt * (self.scratch[k] / self.volumes[k] - c * decay);
        }
        self.time += dt;
        self.boundary_outflow += dt * (wall_flux - returned);

        if self.track_balance {
            let mass_after = self.total_mass();
            let expected = dt * (self.rate - mass_before * decay - wall_flux + returned);
            let residual = ((mass_after - mass_before) - expected).abs();
            let scale = expected.abs().max(dt * self.rate).max(f64::MIN_POSITIVE);
            self.max_balance_residual = self.max_balance_residual.max(residual / scale);
        }
    }

    fn check_finite(&self) -> Result<()> {
        if self.state.iter().all(|v| v.is_finite()) {
            return Ok(());
        }
        Err(Error::NumericalFailure(format!(
            "non-finite value at t = {:.3} s; time step {:.3e} s exceeds the stability bound {:.3e} s \
             (dt * (sum of face conductances / cell volume + 1/tau) <= 1)",
            self.time, self.dt, self.stability_bound
        )))
    }

    /// Advances by `duration` seconds; the last step is shortened to land
    /// exactly on the target time.
    pub fn advance(&mut self, duration: f64) -> Result<()> {
        let target = self.time + duration;
        let mut since_check = 0usize;
        while self.time < target {
            let dt = self.dt.min(target - self.time);
            if dt <= 0.0 {
                break;
            }
            self.step(dt);
            since_check += 1;
            if since_check == 1024 {
                self.check_finite()?;
                since_check = 0;
            }
        }
        self.check_finite()
    }

    /// Steps until the largest change over one decay time τ, relative to the
    /// largest value, drops below `tolerance`. Gives up after `max_decay_times`
    /// decay times.
    pub fn run_to_steady(&mut self, tolerance: f64, max_decay_times: usize) -> Result<PdeSolution> {
        let tau = self.params.decay_constant_direct;
        let mut previous = self.state.clone();
        let mut residual = f64::INFINITY;
        for _ in 0..max_decay_times {
            self.advance(tau)?;
            let scale = self.state.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let change = self
                .state
                .iter()
                .zip(&previous)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            residual = if scale > 0.0 { change / scale } else { change };
            if residual < tolerance {
                return Ok(self.solution(true));
            }
            previous.copy_from_slice(&self.state);
        }
        Err(Error::Convergence {
            iterations: max_decay_times,
            residual,
        })
    }

    /// Time for the total mass to fall to `fraction` of its current value,
    /// linearly interpolated between steps. Intended to be called after the
    /// source has been switched off.
    pub fn time_to_mass_fraction(&mut self, fraction: f64, max_time: f64) -> Result<f64> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::invalid("fraction", "must lie in (0, 1)"));
        }
        let start = self.time;
        let target = self.total_mass() * fraction;
        let mut mass = self.total_mass();
        while self.time - start < max_time {
            let t_prev = self.time;
            self.step(self.dt);
            let m = self.total_mass();
            if m <= target {
                let w = (mass - target) / (mass - m);
                return Ok(t_prev + w * (self.time - t_prev) - start);
            }
            mass = m;
        }
        self.check_finite()?;
        Err(Error::Convergence {
            iterations: ((self.time - start) / self.dt) as usize,
            residual: mass / target,
        })
    }
}

/// Evolves from a zero field for `t_end` seconds with the default
/// (recirculating) outer boundary.
pub fn evolve(params: &DispersionParams, rate: f64, grid: RadialGrid, t_end: f64) -> Result<PdeSolution> {
    if !(t_end > 0.0) {
        return Err(Error::invalid("t_end", format!("must be > 0, got {t_end}")));
    }
    let mut solver = RadialSolver::new(*params, rate, grid)?;
    solver.advance(t_end)?;
    Ok(solver.solution(false))
}

/// Relative change per decay time below which [`steady_state`] stops.
pub const STEADY_TOLERANCE: f64 = 1e-6;
/// Decay times [`steady_state`] may spend before giving up.
pub const STEADY_MAX_DECAY_TIMES: usize = 2000;

pub fn steady_state(params: &DispersionParams, rate: f64, grid: RadialGrid) -> Result<PdeSolution> {
    RadialSolver::new(*params, rate, grid)?.run_to_steady(STEADY_TOLERANCE, STEADY_MAX_DECAY_TIMES)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub r: f64,
    pub numeric: f64,
    pub analytic: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// ‖c_num − c_an‖₂ / ‖c_an‖₂ over cell centres in [r₀, d_max).
    pub l2_relative: f64,
    pub max_relative_on_range: f64,
    pub rows: Vec<ComparisonRow>,
}

/// Compares a steady solution with the closed-form field on `[r₀, d_max)`.
pub fn compare(solution: &PdeSolution, field: &ProximityField) -> Result<Comparison> {
    if !solution.steady {
        return Err(Error::Precondition("comparison requires a steady solution".into()));
    }
    let p = field.params();
    let rows: Vec<ComparisonRow> = solution
        .grid
        .centers()
        .zip(&solution.values)
        .filter(|(r, _)| *r >= p.control_radius && *r < p.validity_radius)
        .map(|(r, &numeric)| {
            let analytic = field.concentration(r);
            let rel_err = if analytic > 0.0 {
                (numeric - analytic).abs() / analytic
            } else if numeric == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            ComparisonRow {
                r,
                numeric,
                analytic,
                rel_err,
            }
        })
        .collect();
    let (diff2, ref2) = rows.iter().fold((0.0, 0.0), |(d, a), row| {
        (d + (row.numeric - row.analytic).powi(2), a + row.analytic.powi(2))
    });
    let l2_relative = if ref2 > 0.0 {
        (diff2 / ref2).sqrt()
    } else if diff2 == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let max_relative_on_range = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    Ok(Comparison {
        l2_relative,
        max_relative_on_range,
        rows,
    })
}
