//! Small in-memory studies whose search spaces can be enumerated.
//!
//! [`five_bus_config`] is a 5-bus feeder with two candidate sites and ten
//! genome bits: WT and PV at buses 4 and 5 plus storage at bus 5, two bits
//! each. With unit efficiencies, SOC bounds at 0 and 100 % and a rating of
//! half the capacity, every 3-level schedule stays on an exact SOC lattice.

use std::path::PathBuf;

use crate::dispatch::{LowerSettings, StorageTechnology};
use crate::economics::{EconParams, ExportPolicy, Tariff};
use crate::grid::{Branch, Bus, NetworkSettings, RadialNetwork};
use crate::ibpso::{derive_seed, SwarmConfig};
use crate::load::LoadProfile;
use crate::planner::{CandidateSite, PenetrationCaps, UnitSizes};
use crate::runner::{RunConfig, Scenario};
use crate::sequence::{hourly_expected_profiles, SolarSlot, WeatherSlot, WeatherTable};
use crate::uncertainty::{WeibullParams, WtCurve};
use crate::{HOURS, SEASONS};

fn bus(id: usize, p_kw: f64) -> Bus {
    Bus {
        id,
        p_load_kw: p_kw,
        q_load_kvar: 0.6 * p_kw,
    }
}

fn branch(from: usize, to: usize, r_ohm: f64, x_ohm: f64) -> Branch {
    Branch {
        from,
        to,
        r_ohm,
        x_ohm,
        i_max_a: None,
    }
}

/// 1 (slack) - 2 lossless, then 2-3-4 and 2-5. Total load 600 kW.
pub fn five_bus() -> RadialNetwork {
    RadialNetwork::new(
        vec![bus(1, 0.0), bus(2, 0.0), bus(3, 200.0), bus(4, 250.0), bus(5, 150.0)],
        vec![
            branch(1, 2, 0.0, 0.0),
            branch(2, 3, 1.2, 0.8),
            branch(3, 4, 1.5, 1.0),
            branch(2, 5, 2.5, 1.6),
        ],
        NetworkSettings::default(),
    )
    .expect("valid toy feeder")
}

/// Single line feeding a 400 kW load.
pub fn two_bus() -> RadialNetwork {
    RadialNetwork::new(
        vec![bus(1, 0.0), bus(2, 400.0)],
        vec![branch(1, 2, 2.0, 1.2)],
        NetworkSettings::default(),
    )
    .expect("valid two-bus feeder")
}

/// Two-tier tariff: cheap until noon, expensive afterwards.
pub fn two_tier_tariff() -> Tariff {
    Tariff::from_fn(|_, h| if h < 12 { 0.02 } else { 0.30 }).expect("valid tariff")
}

/// Lossless-cycle storage on an exact SOC lattice: a unit with rating P
/// holds 2P, starts at P and may swing between 0 and 2P.
pub fn lattice_storage() -> StorageTechnology {
    StorageTechnology {
        eta_ch: 1.0,
        eta_dc: 1.0,
        soc_min_frac: 0.0,
        soc_max_frac: 1.0,
        soc_init_frac: 0.5,
        hours_at_rating: 2.0,
    }
}

/// Wind fairly steady with a winter high; PV lit 6-17 with a noon peak.
pub fn toy_weather() -> WeatherTable {
    let mut slots = Vec::with_capacity(SEASONS * HOURS);
    for season in 1..=SEASONS {
        for hour in 0..HOURS {
            let scale = 7.5 + 0.5 * season as f64 + if hour < 7 || hour > 19 { 0.6 } else { 0.0 };
            let solar = if (6..=17).contains(&hour) {
                let x = (hour as f64 - 11.5) / 3.0;
                let mu = 0.6 * (-0.5 * x * x).exp();
                SolarSlot::Moments {
                    mu,
                    sigma2: 0.3 * mu * (1.0 - mu),
                }
            } else {
                SolarSlot::Dark
            };
            slots.push(WeatherSlot {
                season,
                hour,
                wind: WeibullParams::new(2.0, scale).expect("valid weibull"),
                solar,
            });
        }
    }
    WeatherTable::from_slots(slots).expect("complete weather")
}

/// The enumerable 5-bus study. DG is capped at 250 kW (five 50 kW units)
/// and storage at 150 kWh, so every field is two bits wide.
pub fn five_bus_config(seed: u64) -> RunConfig {
    let net = five_bus();
    let weather = toy_weather();
    let wt_curve = WtCurve::new(3.0, 11.5, 25.0, 1.0).expect("valid curve");
    let step_per_kw = 0.01;
    let profiles = hourly_expected_profiles(&weather, &wt_curve, step_per_kw).expect("toy profiles");
    RunConfig {
        network_path: PathBuf::new(),
        weather_path: PathBuf::new(),
        tariff_path: PathBuf::new(),
        load_profile_path: None,
        net,
        weather,
        profiles,
        tariff: two_tier_tariff(),
        loads: LoadProfile::flat(),
        wt_curve,
        step_per_kw,
        econ: EconParams::default(),
        export: ExportPolicy::NetMetering,
        baseline_price_per_kwh: 0.05,
        technology: lattice_storage(),
        lower: LowerSettings {
            bits: 2,
            swarm: SwarmConfig::default().with_size(20, 40).with_seed(derive_seed(seed, 1)),
            ..LowerSettings::default()
        },
        upper: SwarmConfig::default().with_seed(seed),
        caps: PenetrationCaps {
            dg_frac: 250.0 / 600.0,
            storage_frac: 0.25,
            ref_load_kw: None,
        },
        sites: vec![
            CandidateSite {
                bus: 4,
                allow_wt: true,
                allow_pv: true,
                allow_storage: false,
            },
            CandidateSite {
                bus: 5,
                allow_wt: true,
                allow_pv: true,
                allow_storage: true,
            },
        ],
        units: UnitSizes::default(),
        penalty_multiplier: 1e3,
        scenarios: Scenario::ALL.to_vec(),
        sweep_storage_fracs: vec![0.0, 50.0 / 600.0, 0.25],
        cdf_bus: None,
        seed,
        output_dir: PathBuf::from("out/toy"),
        echo: Vec::new(),
    }
}
