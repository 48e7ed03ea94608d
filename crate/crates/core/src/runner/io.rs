//! Readers for the per-slot input tables.
//!
//! Every table is keyed by `season` (1..=4) and `hour` (0..=23) and must
//! cover all 96 slots.

use std::path::Path;

use serde::Deserialize;

use crate::economics::Tariff;
use crate::error::{Error, Result};
use crate::load::LoadProfile;
use crate::sequence::{SolarSlot, WeatherSlot, WeatherTable};
use crate::uncertainty::WeibullParams;

#[derive(Debug, Deserialize)]
struct WeatherRow {
    season: usize,
    hour: usize,
    wind_t: f64,
    wind_gamma: f64,
    pv_mu: Option<f64>,
    pv_sigma2: Option<f64>,
    #[serde(default)]
    dark: Option<u8>,
}

#[derive(Debug, Deserialize)]
struct TariffRow {
    season: usize,
    hour: usize,
    price_per_kwh: f64,
}

#[derive(Debug, Deserialize)]
struct LoadRow {
    season: usize,
    hour: usize,
    factor: f64,
}

fn rows<T: for<'de> Deserialize<'de>>(text: &str, origin: &str) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    reader
        .deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Error::parse(origin, format!("row {}: {e}", i + 1))))
        .collect()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Weather table from CSV text with columns
/// `season,hour,wind_t,wind_gamma,pv_mu,pv_sigma2,dark`.
/// A slot is dark when `dark` is 1 or the PV moments are blank.
pub fn weather_from_csv_str(text: &str, origin: &str) -> Result<WeatherTable> {
    let mut slots = Vec::new();
    for (i, r) in rows::<WeatherRow>(text, origin)?.into_iter().enumerate() {
        let at = |msg: String| Error::parse(origin, format!("row {}: {msg}", i + 1));
        let wind = WeibullParams::new(r.wind_t, r.wind_gamma).map_err(|e| at(e.to_string()))?;
        let solar = match (r.dark.unwrap_or(0), r.pv_mu, r.pv_sigma2) {
            (1, _, _) | (_, None, None) => SolarSlot::Dark,
            (0, Some(mu), Some(sigma2)) => SolarSlot::Moments { mu, sigma2 },
            (0, _, _) => return Err(at("pv_mu and pv_sigma2 must be given together".into())),
            (d, _, _) => return Err(at(format!("dark flag must be 0 or 1, got {d}"))),
        };
        slots.push(WeatherSlot {
            season: r.season,
            hour: r.hour,
            wind,
            solar,
        });
    }
    WeatherTable::from_slots(slots)
}

pub fn load_weather_csv(path: &Path) -> Result<WeatherTable> {
    weather_from_csv_str(&read(path)?, &path.display().to_string())
}

/// Tariff from CSV text with columns `season,hour,price_per_kwh`.
pub fn tariff_from_csv_str(text: &str, origin: &str) -> Result<Tariff> {
    let rows: Vec<(usize, usize, f64)> = rows::<TariffRow>(text, origin)?
        .into_iter()
        .map(|r| (r.season, r.hour, r.price_per_kwh))
        .collect();
    Tariff::from_rows(&rows)
}

pub fn load_tariff_csv(path: &Path) -> Result<Tariff> {
    tariff_from_csv_str(&read(path)?, &path.display().to_string())
}

/// Load scaling from CSV text with columns `season,hour,factor`.
pub fn load_profile_from_csv_str(text: &str, origin: &str) -> Result<LoadProfile> {
    let rows: Vec<(usize, usize, f64)> = rows::<LoadRow>(text, origin)?
        .into_iter()
        .map(|r| (r.season, r.hour, r.factor))
        .collect();
    LoadProfile::from_rows(&rows)
}

pub fn load_profile_csv(path: &Path) -> Result<LoadProfile> {
    load_profile_from_csv_str(&read(path)?, &path.display().to_string())
}
