mod common;

use std::f64::consts::PI;

use common::integrate;
use proptest::prelude::*;

use airisk::abm::{
    run_replication, Agent, AgentState, CellKind, Simulation, SimulationConfig, TransmissionRates, World,
};
use airisk::dispersion::{
    background_concentration, contamination_threshold_time, surface_density, BackgroundField, DispersionParams,
    PathogenSurfaceConstants, ProximityField, SurfaceState,
};
use airisk::exposure::{
    combined_inhalation_probability, direct_inhalation_probability, inhaled_count, infection_probability_inhalation,
    infection_probability_surface, per_step_direct_probability, per_step_surface_probability, ExposureParams,
};
use airisk::scenario::{parse_config, parse_world, render_world, ExperimentConfig};

const CASES: u32 = 128;

fn dispersion_params() -> impl Strategy<Value = DispersionParams> {
    (0.005..0.5f64, 5.0..300.0f64, 0.1..1.2f64, 0.2..4.0f64, 20.0..400.0f64).prop_map(|(d, tau, r0, gap, tau_b)| {
        DispersionParams {
            diffusion_coefficient: d,
            decay_constant_direct: tau,
            decay_constant_background: tau_b,
            control_radius: r0,
            validity_radius: r0 + gap,
        }
    })
}

fn exposure_params() -> impl Strategy<Value = ExposureParams> {
    (1e-5..1e-3f64, 1.0..2000.0f64, 0.001..0.999f64, 1e-6..1e-2f64, 1e-3..1.0f64).prop_map(
        |(q, n_b, a, p, f)| ExposureParams {
            breathing_rate: q,
            infectious_dose: n_b,
            dose_probability: a,
            contact_probability: p,
            contact_frequency: f,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn field_holds_rate_times_tau(params in dispersion_params(), s in 0.01..200.0f64) {
        let field = ProximityField::new(params, s).unwrap();
        let r0 = params.control_radius;
        let f = |r: f64| field.concentration(r) * 4.0 * PI * r * r;
        let mass = field.normalization() * 4.0 * PI * r0.powi(3) / 3.0
            + integrate(&f, r0, params.validity_radius, 1e-12 * s * params.decay_constant_direct);
        let expected = s * params.decay_constant_direct;
        prop_assert!((mass - expected).abs() <= 1e-6 * expected, "mass {mass} vs {expected}");
    }

    #[test]
    fn field_non_negative_and_non_increasing(params in dispersion_params(), s in 0.0..200.0f64,
                                             mut rs in prop::collection::vec(0.0..6.0f64, 2..40)) {
        let field = ProximityField::new(params, s).unwrap();
        rs.sort_by(f64::total_cmp);
        let values: Vec<f64> = rs.iter().map(|&r| field.concentration(r)).collect();
        prop_assert!(values.iter().all(|v| *v >= 0.0 && v.is_finite()));
        prop_assert!(values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        prop_assert_eq!(field.concentration(params.validity_radius), 0.0);
        prop_assert_eq!(field.concentration(0.5 * params.control_radius), field.normalization());
    }

    #[test]
    fn field_linear_in_rate(params in dispersion_params(), s in 0.01..100.0f64, k in 0.0..10.0f64, r in 0.0..5.0f64) {
        let one = ProximityField::new(params, s).unwrap().concentration(r);
        let scaled = ProximityField::new(params, k * s).unwrap().concentration(r);
        prop_assert!((scaled - k * one).abs() <= 1e-12 * (1.0 + k * one));
    }

    #[test]
    fn background_linear_and_additive(rates in prop::collection::vec(0.0..100.0f64, 0..8),
                                      tau in 1.0..500.0f64, v in 1.0..5000.0f64, k in 0.0..5.0f64) {
        let c = background_concentration(&rates, tau, v).unwrap();
        prop_assert!(c >= 0.0);
        let scaled: Vec<f64> = rates.iter().map(|s| k * s).collect();
        let cs = background_concentration(&scaled, tau, v).unwrap();
        prop_assert!((cs - k * c).abs() <= 1e-12 * (1.0 + k * c));
        let sum: f64 = rates.iter().map(|s| background_concentration(&[*s], tau, v).unwrap()).sum();
        prop_assert!((sum - c).abs() <= 1e-12 * (1.0 + c));
    }

    #[test]
    fn surface_density_monotone(s in 0.0..100.0f64, area in 0.1..10.0f64, t1 in 0.0..1e5f64, dt in 0.0..1e5f64,
                                tau_s in prop::option::of(10.0..1e6f64)) {
        let a = surface_density(s, 0.1, area, t1, tau_s).unwrap();
        let b = surface_density(s, 0.1, area, t1 + dt, tau_s).unwrap();
        let more = surface_density(s * 1.5, 0.1, area, t1, tau_s).unwrap();
        prop_assert!(a >= 0.0 && b >= a && more >= a);
    }

    #[test]
    fn surface_state_accumulates_and_disinfects(s in 0.0..100.0f64, t in 0.0..1e4f64, dt in 0.0..1e4f64,
                                                 frac in 0.0..=1.0f64) {
        let state = SurfaceState::new(2.25, 0.1, None, PathogenSurfaceConstants::default()).unwrap();
        let a = state.accumulate(s, t).unwrap();
        let b = a.accumulate(s, dt).unwrap();
        prop_assert!(b.droplet_density() >= a.droplet_density());
        prop_assert!(b.contaminated() >= a.contaminated());
        let c = b.disinfect(frac).unwrap();
        prop_assert!(c.droplet_density() <= b.droplet_density());
        prop_assert!(c.droplet_density() >= 0.0);
    }

    #[test]
    fn threshold_time_scaling(area in 0.1..10.0f64, s in 0.1..100.0f64, k in 1.0..10.0f64) {
        let t = contamination_threshold_time(area, 1e4, 0.1, s, 10.0).unwrap();
        let t_area = contamination_threshold_time(k * area, 1e4, 0.1, s, 10.0).unwrap();
        let t_rate = contamination_threshold_time(area, 1e4, 0.1, k * s, 10.0).unwrap();
        prop_assert!((t_area - k * t).abs() <= 1e-12 * k * t);
        prop_assert!((t_rate * k - t).abs() <= 1e-12 * t);
    }

    #[test]
    fn probabilities_bounded(e in exposure_params(), n in 0.0..1e7f64, t in 0.0..1e6f64, t1 in 0.0..1e5f64,
                             tt in 0.0..1e5f64, r in 0.0..5.0f64, s in 0.0..200.0f64, dt in 0.0..600.0f64) {
        let field = ProximityField::new(DispersionParams::default(), s).unwrap();
        let bg = BackgroundField::new(vec![s], 125.0, 100.0).unwrap();
        let all = [
            infection_probability_inhalation(n, &e),
            per_step_direct_probability(r, &field, &e, dt),
            infection_probability_surface(t, t1, tt, &e),
            per_step_surface_probability(&e, dt),
            combined_inhalation_probability(r, &field, &bg, &e, t),
            direct_inhalation_probability(r, &field, &e, t),
        ];
        for p in all {
            prop_assert!((0.0..=1.0).contains(&p), "{p}");
        }
    }

    #[test]
    fn one_infectious_dose_gives_a(n_b in 1e-3..1e6f64, a in 1e-6..0.999999f64) {
        let e = ExposureParams { infectious_dose: n_b, dose_probability: a, ..ExposureParams::default() };
        let p = infection_probability_inhalation(n_b, &e);
        prop_assert!((p - a).abs() <= 4.0 * f64::EPSILON * a, "{p} vs {a}");
    }

    #[test]
    fn inhalation_monotone(e in exposure_params(), n in 0.0..1e5f64, dn in 0.0..1e5f64, k in 1.0..10.0f64) {
        let p = infection_probability_inhalation(n, &e);
        prop_assert!(infection_probability_inhalation(n + dn, &e) >= p);
        let immune = ExposureParams { infectious_dose: e.infectious_dose * k, ..e };
        prop_assert!(infection_probability_inhalation(n, &immune) <= p);
    }

    #[test]
    fn direct_probability_monotone(e in exposure_params(), r in 0.0..3.0f64, t in 0.0..1e4f64, dt in 0.0..1e4f64,
                                   s in 0.0..100.0f64, ds in 0.0..100.0f64) {
        let params = DispersionParams::default();
        let f = ProximityField::new(params, s).unwrap();
        let g = ProximityField::new(params, s + ds).unwrap();
        let p = direct_inhalation_probability(r, &f, &e, t);
        prop_assert!(direct_inhalation_probability(r, &f, &e, t + dt) >= p);
        prop_assert!(direct_inhalation_probability(r, &g, &e, t) >= p);
        prop_assert!(inhaled_count(f.concentration(r), e.breathing_rate, t) >= 0.0);
    }

    #[test]
    fn combined_at_least_each_channel(e in exposure_params(), r in 0.0..3.0f64, t in 0.0..1e4f64,
                                      s in 0.0..100.0f64, v in 10.0..1000.0f64) {
        let field = ProximityField::new(DispersionParams::default(), s).unwrap();
        let bg = BackgroundField::new(vec![s], 125.0, v).unwrap();
        let combined = combined_inhalation_probability(r, &field, &bg, &e, t);
        let direct = direct_inhalation_probability(r, &field, &e, t);
        let background = infection_probability_inhalation(inhaled_count(bg.concentration(), e.breathing_rate, t), &e);
        prop_assert!(combined >= direct && combined >= background);
    }

    #[test]
    fn linearization_error_is_set_by_a(e in exposure_params(), r in 0.0..2.6f64, dt in 1e-3..120.0f64) {
        // a·x against 1 − (1 − a)^x: the ratio tends to a / −ln(1 − a) as x → 0
        // and the per-step value stays within 1% of the exact one when a ≤ 0.02
        let field = ProximityField::new(DispersionParams::default(), 66.0).unwrap();
        let linear = per_step_direct_probability(r, &field, &e, dt);
        let exact = infection_probability_inhalation(inhaled_count(field.concentration(r), e.breathing_rate, dt), &e);
        prop_assume!(exact > 0.0 && exact < 0.05 && linear < 1.0);
        let a = e.dose_probability;
        let x = inhaled_count(field.concentration(r), e.breathing_rate, dt) / e.infectious_dose;
        let slope = -(-a).ln_1p();
        let ratio = linear / exact;
        // 1 − e^(−y) lies between y − y²/2 and y for y = slope·x
        let y = slope * x;
        prop_assert!(ratio >= a / slope * (1.0 - 1e-12));
        prop_assert!(ratio <= a / slope / (1.0 - y / 2.0) * (1.0 + 1e-12));
        if a <= 0.02 {
            prop_assert!((ratio - 1.0).abs() < 0.01, "a = {a}, ratio {ratio}");
        }
    }

    #[test]
    fn surface_probability_monotone(e in exposure_params(), t in 0.0..1e5f64, dt in 0.0..1e5f64,
                                    t1 in 0.0..1e5f64, t_thres in 0.0..1e5f64) {
        let p = infection_probability_surface(t, t1, t_thres, &e);
        prop_assert!(infection_probability_surface(t + dt, t1, t_thres, &e) >= p);
        if t1 <= t_thres {
            prop_assert_eq!(p, 0.0);
        }
    }
}

fn small_world() -> impl Strategy<Value = World> {
    (3usize..12, 3usize..10, prop::collection::vec(0u8..10, 120)).prop_filter_map("needs a walkable cell", |(w, h, noise)| {
        let mut cells = Vec::with_capacity((w + 2) * (h + 2));
        for y in 0..h + 2 {
            for x in 0..w + 2 {
                let border = x == 0 || y == 0 || x == w + 1 || y == h + 1;
                let kind = if border {
                    CellKind::Wall
                } else {
                    match noise[(y * (w + 2) + x) % noise.len()] {
                        0 | 1 => CellKind::Wall,
                        2 | 3 => CellKind::Workplace,
                        _ => CellKind::Floor,
                    }
                };
                cells.push(kind);
            }
        }
        World::new(w + 2, h + 2, cells).ok()
    })
}

fn sim_config() -> impl Strategy<Value = SimulationConfig> {
    (1usize..25, 0.0..=1.0f64, 0.0..=1.0f64, 0.0..0.3f64, 0.0..0.3f64, 0.0..0.3f64, any::<u64>(), 0.0..1.0f64).prop_map(
        |(n, alpha_frac, mu, same, adj, surf, seed, p)| SimulationConfig {
            population: n,
            initially_infected: ((n as f64) * alpha_frac).round() as usize,
            mobility: mu,
            patch_contamination_probability: p,
            steps: 60,
            replications: 1,
            base_seed: seed >> 1,
            rates: TransmissionRates {
                same_cell: same,
                neighbor_cell: adj,
                surface: surf,
                ..TransmissionRates::default()
            },
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn world_round_trips(world in small_world()) {
        let text = render_world(&world);
        let again = parse_world(&text).unwrap();
        prop_assert_eq!(&again, &world);
        prop_assert_eq!(render_world(&again), text);
    }

    #[test]
    fn config_echo_is_idempotent(sim in sim_config(), d in dispersion_params(), diag in any::<bool>(),
                                 mus in prop::collection::vec(0.0..=1.0f64, 0..4)) {
        let mut config = ExperimentConfig {
            dispersion: d,
            simulation: SimulationConfig { rates: TransmissionRates { include_diagonal: diag, ..sim.rates }, ..sim },
            ..ExperimentConfig::default()
        };
        config.sweep.mobility = mus;
        let resolved = config.resolve().unwrap();
        let echoed = parse_config(&resolved.to_toml().unwrap()).unwrap();
        prop_assert_eq!(&echoed, &resolved);
        prop_assert_eq!(echoed.to_toml().unwrap(), resolved.to_toml().unwrap());
    }

    #[test]
    fn replications_respect_invariants(world in small_world(), config in sim_config(), rep in 0usize..1000) {
        // run_replication checks infectious count, state bounds and patch
        // monotonicity after every step and fails otherwise
        let r = run_replication(&config, &world, rep, true).unwrap();
        prop_assert!(r.new_infections <= config.population - config.initially_infected);
        prop_assert_eq!(r.events.as_ref().unwrap().len(), r.new_infections);
        let again = run_replication(&config, &world, rep, true).unwrap();
        prop_assert_eq!(r, again);
    }

    #[test]
    fn contamination_never_recedes(world in small_world(), config in sim_config(), seed in any::<u64>()) {
        let mut sim = Simulation::new(&config, &world, seed).unwrap();
        let mut last = 0;
        let mut flags: Vec<bool> = vec![false; world.cells().len()];
        for _ in 0..config.steps {
            sim.step();
            prop_assert!(sim.contaminated_count() >= last);
            for (cell, flag) in flags.iter_mut().enumerate() {
                let now = sim.is_contaminated(cell);
                prop_assert!(now || !*flag, "cell {cell} was cleaned");
                prop_assert!(!now || world.kind(cell) == CellKind::Workplace);
                *flag = now;
            }
            last = sim.contaminated_count();
        }
    }

    #[test]
    fn latent_agents_never_transmit(world in small_world(), mu in 0.0..=1.0f64, seed in any::<u64>(),
                                    n_latent in 1usize..6, n_susceptible in 1usize..6) {
        let config = SimulationConfig {
            population: n_latent + n_susceptible,
            initially_infected: 0,
            mobility: mu,
            patch_contamination_probability: 1.0,
            steps: 60,
            rates: TransmissionRates { same_cell: 1.0, neighbor_cell: 1.0, surface: 1.0, ..TransmissionRates::default() },
            ..SimulationConfig::default()
        };
        let mut sim = Simulation::new(&config, &world, seed).unwrap();
        let cell = world.walkable_cells()[0];
        let agents = (0..config.population)
            .map(|i| Agent {
                position: cell,
                state: if i < n_latent { AgentState::LatentInfected } else { AgentState::Susceptible },
                mobility: mu,
            })
            .collect();
        sim.set_agents(agents).unwrap();
        for _ in 0..config.steps {
            sim.step();
        }
        prop_assert_eq!(sim.count(AgentState::Susceptible), n_susceptible);
        prop_assert_eq!(sim.count(AgentState::LatentInfected), n_latent);
        prop_assert_eq!(sim.contaminated_count(), 0);
    }
}
