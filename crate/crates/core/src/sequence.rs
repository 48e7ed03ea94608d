//! Probabilistic sequences: discretised distributions over evenly spaced
//! power levels, their addition/subtraction-type convolutions, and the
//! 96-slot table of expected per-kW DG outputs.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::uncertainty::{BetaParams, OutputDistribution, SolarOutput, WeibullParams, WindOutput, WtCurve};
use crate::{slot_index, HOURS, SEASONS, SLOTS};

const SUM_TOL: f64 = 1e-9;
const MASS_DEFICIT_WARN: f64 = 1e-3;

/// Probability masses at power levels `0, q, 2q, ..., N q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbSeq {
    step: f64,
    probs: Vec<f64>,
}

impl ProbSeq {
    pub fn new(step: f64, probs: Vec<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::ParameterDomain(format!("step must be > 0, got {step}")));
        }
        if probs.is_empty() {
            return Err(Error::ParameterDomain("sequence must not be empty".into()));
        }
        if let Some(bad) = probs.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::ParameterDomain(format!(
                "sequence entries must be >= 0, found {bad}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::ParameterDomain(format!(
                "sequence must sum to 1, sums to {sum}"
            )));
        }
        Ok(Self { step, probs })
    }

    /// All mass at level zero.
    pub fn point_at_zero(step: f64) -> Self {
        Self {
            step,
            probs: vec![1.0],
        }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Highest index `N`.
    pub fn len_index(&self) -> usize {
        self.probs.len() - 1
    }

    /// Expected value in power units: `q * sum(i * a(i))`.
    pub fn expectation(&self) -> f64 {
        self.step
            * self
                .probs
                .iter()
                .enumerate()
                .map(|(i, p)| i as f64 * p)
                .sum::<f64>()
    }

    fn check_step(&self, other: &ProbSeq) -> Result<()> {
        let scale = self.step.abs().max(other.step.abs());
        if (self.step - other.step).abs() > 1e-12 * scale {
            Err(Error::IncompatibleSequences(self.step, other.step))
        } else {
            Ok(())
        }
    }

    /// Addition-type convolution: distribution of the sum of two independent
    /// variables.
    pub fn atc(&self, other: &ProbSeq) -> Result<ProbSeq> {
        self.check_step(other)?;
        let mut out = vec![0.0; self.probs.len() + other.probs.len() - 1];
        for (ia, a) in self.probs.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (ib, b) in other.probs.iter().enumerate() {
                out[ia + ib] += a * b;
            }
        }
        Ok(ProbSeq {
            step: self.step,
            probs: out,
        })
    }

    /// Subtraction-type convolution: distribution of `max(a - b, 0)`.
    pub fn stc(&self, other: &ProbSeq) -> Result<ProbSeq> {
        self.check_step(other)?;
        let mut out = vec![0.0; self.probs.len()];
        for (ia, a) in self.probs.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (ib, b) in other.probs.iter().enumerate() {
                let idx = ia.saturating_sub(ib);
                out[idx] += a * b;
            }
        }
        Ok(ProbSeq {
            step: self.step,
            probs: out,
        })
    }
}

pub fn atc(a: &ProbSeq, b: &ProbSeq) -> Result<ProbSeq> {
    a.atc(b)
}

pub fn stc(a: &ProbSeq, b: &ProbSeq) -> Result<ProbSeq> {
    a.stc(b)
}

pub fn expectation(seq: &ProbSeq) -> f64 {
    seq.expectation()
}

/// Discretise a distribution on `[0, p_max]` into a sequence with step `q`.
///
/// Bucket 0 collects `[0, q/2]` plus the atom at zero, interior bucket `i`
/// collects `[iq - q/2, iq + q/2]`, and the last bucket `N = ceil(p_max/q)`
/// collects the remaining upper tail plus the atom at `p_max`.
pub fn discretize(dist: &impl OutputDistribution, q: f64) -> Result<ProbSeq> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::ParameterDomain(format!("step must be > 0, got {q}")));
    }
    let p_max = dist.p_max();
    if !(p_max >= 0.0) {
        return Err(Error::ParameterDomain(format!("p_max must be >= 0, got {p_max}")));
    }
    if p_max == 0.0 {
        return Ok(ProbSeq::point_at_zero(q));
    }
    if q > p_max {
        return Err(Error::DegenerateStep { step: q, p_max });
    }
    let n = ((p_max / q) - 1e-9).ceil().max(1.0) as usize;
    let half = 0.5 * q;
    let mut probs = Vec::with_capacity(n + 1);
    probs.push(dist.continuous_mass(0.0, half) + dist.atom_at_zero());
    for i in 1..n {
        let c = i as f64 * q;
        probs.push(dist.continuous_mass(c - half, c + half));
    }
    probs.push(dist.continuous_mass(n as f64 * q - half, p_max) + dist.atom_at_max());
    for p in probs.iter_mut() {
        if !(*p > 0.0) {
            *p = 0.0;
        }
    }
    let total: f64 = probs.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ParameterDomain(
            "distribution carries no probability mass".into(),
        ));
    }
    if (1.0 - total).abs() > MASS_DEFICIT_WARN {
        log::warn!("discretisation mass deficit {:.3e} before renormalisation", 1.0 - total);
    }
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(ProbSeq { step: q, probs })
}

/// Solar regime for one representative hour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolarSlot {
    Dark,
    /// Mean and variance of irradiance normalised to its maximum.
    Moments { mu: f64, sigma2: f64 },
}

/// Weather parameters for one (season, hour) slot. `season` is 1..=4 and
/// `hour` 0..=23.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherSlot {
    pub season: usize,
    pub hour: usize,
    pub wind: WeibullParams,
    pub solar: SolarSlot,
}

/// Complete set of 96 weather slots.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherTable {
    slots: Vec<WeatherSlot>,
}

impl WeatherTable {
    /// Orders the slots and rejects tables with missing or duplicated entries.
    pub fn from_slots(slots: Vec<WeatherSlot>) -> Result<Self> {
        let mut table: Vec<Option<WeatherSlot>> = vec![None; SLOTS];
        for slot in slots {
            if !(1..=SEASONS).contains(&slot.season) || slot.hour >= HOURS {
                return Err(Error::ParameterDomain(format!(
                    "weather slot (season {}, hour {}) out of range",
                    slot.season, slot.hour
                )));
            }
            let idx = slot_index(slot.season, slot.hour);
            if table[idx].is_some() {
                return Err(Error::ParameterDomain(format!(
                    "duplicate weather slot (season {}, hour {})",
                    slot.season, slot.hour
                )));
            }
            table[idx] = Some(slot);
        }
        let mut ordered = Vec::with_capacity(SLOTS);
        for (idx, slot) in table.into_iter().enumerate() {
            match slot {
                Some(s) => ordered.push(s),
                None => {
                    return Err(Error::IncompleteProfile {
                        season: idx / HOURS + 1,
                        hour: idx % HOURS,
                    })
                }
            }
        }
        Ok(Self { slots: ordered })
    }

    pub fn slots(&self) -> &[WeatherSlot] {
        &self.slots
    }

    pub fn get(&self, season: usize, hour: usize) -> &WeatherSlot {
        &self.slots[slot_index(season, hour)]
    }
}

/// Expected per-kW outputs for one representative hour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HourlyExpectation {
    pub season: usize,
    pub hour: usize,
    pub e_wt_per_kw: f64,
    pub e_pv_per_kw: f64,
}

/// The 96 hourly expectations, indexed by (season, hour).
#[derive(Debug, Clone, PartialEq)]
pub struct DgProfiles {
    slots: Vec<HourlyExpectation>,
}

impl DgProfiles {
    pub fn from_slots(slots: Vec<HourlyExpectation>) -> Result<Self> {
        let mut table: Vec<Option<HourlyExpectation>> = vec![None; SLOTS];
        for s in slots {
            if !(1..=SEASONS).contains(&s.season) || s.hour >= HOURS {
                return Err(Error::ParameterDomain(format!(
                    "profile slot (season {}, hour {}) out of range",
                    s.season, s.hour
                )));
            }
            table[slot_index(s.season, s.hour)] = Some(s);
        }
        let mut out = Vec::with_capacity(SLOTS);
        for (idx, s) in table.into_iter().enumerate() {
            out.push(s.ok_or(Error::IncompleteProfile {
                season: idx / HOURS + 1,
                hour: idx % HOURS,
            })?);
        }
        Ok(Self { slots: out })
    }

    /// Profiles from a closure over (season, hour) returning `(wt, pv)` per kW.
    pub fn from_fn(f: impl Fn(usize, usize) -> (f64, f64)) -> Self {
        let slots = (0..SLOTS)
            .map(|idx| {
                let (season, hour) = (idx / HOURS + 1, idx % HOURS);
                let (wt, pv) = f(season, hour);
                HourlyExpectation {
                    season,
                    hour,
                    e_wt_per_kw: wt,
                    e_pv_per_kw: pv,
                }
            })
            .collect();
        Self { slots }
    }

    pub fn zero() -> Self {
        Self::from_fn(|_, _| (0.0, 0.0))
    }

    pub fn slots(&self) -> &[HourlyExpectation] {
        &self.slots
    }

    pub fn get(&self, season: usize, hour: usize) -> &HourlyExpectation {
        &self.slots[slot_index(season, hour)]
    }

    pub fn wt(&self, season: usize, hour: usize) -> f64 {
        self.get(season, hour).e_wt_per_kw
    }

    pub fn pv(&self, season: usize, hour: usize) -> f64 {
        self.get(season, hour).e_pv_per_kw
    }
}

/// Per-kW expected WT and PV output for every slot of `weather`.
///
/// The turbine curve's rated power is ignored; each slot is modelled for a
/// 1 kW unit and discretised with step `q_per_kw`.
pub fn hourly_expected_profiles(
    weather: &WeatherTable,
    curve: &WtCurve,
    q_per_kw: f64,
) -> Result<DgProfiles> {
    let unit_curve = curve.with_rated_power(1.0)?;
    let slots = weather
        .slots()
        .par_iter()
        .map(|slot| {
            let wind = WindOutput::new(unit_curve, slot.wind);
            let e_wt = discretize(&wind, q_per_kw)?.expectation();
            let solar = match slot.solar {
                SolarSlot::Dark => SolarOutput::Dark,
                SolarSlot::Moments { mu, sigma2 } => {
                    SolarOutput::Lit(BetaParams::from_moments(mu, sigma2, 1.0)?)
                }
            };
            let e_pv = discretize(&solar, q_per_kw)?.expectation();
            Ok(HourlyExpectation {
                season: slot.season,
                hour: slot.hour,
                e_wt_per_kw: e_wt.clamp(0.0, 1.0),
                e_pv_per_kw: e_pv.clamp(0.0, 1.0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    DgProfiles::from_slots(slots)
}
