//! Storage state of charge, schedule validation and the per-season 24-hour
//! dispatch search.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::economics::{fluctuating_cost, SlotFlow, Tariff};
use crate::error::{Error, Result};
use crate::grid::{check_limits, solve_power_flow, Injections, PowerFlowResult, RadialNetwork};
use crate::ibpso::{self, derive_seed, IterationRecord, SwarmConfig};
use crate::load::LoadProfile;
use crate::plan::Plan;
use crate::report::{create, finish, sig6};
use crate::sequence::DgProfiles;
use crate::{slot_index, HOURS, SEASONS, SLOTS};

/// Tolerance on state-of-charge checks, in kWh.
pub const SOC_TOL_KWH: f64 = 1e-6;

/// Battery chemistry parameters shared by every installed unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StorageTechnology {
    pub eta_ch: f64,
    pub eta_dc: f64,
    pub soc_min_frac: f64,
    pub soc_max_frac: f64,
    pub soc_init_frac: f64,
    /// Energy capacity divided by power rating when the rating is derived.
    pub hours_at_rating: f64,
}

impl Default for StorageTechnology {
    fn default() -> Self {
        Self {
            eta_ch: 0.9,
            eta_dc: 0.9,
            soc_min_frac: 0.1,
            soc_max_frac: 0.9,
            soc_init_frac: 0.5,
            hours_at_rating: 4.0,
        }
    }
}

impl StorageTechnology {
    pub fn validate(&self) -> Result<()> {
        let frac = |x: f64| (0.0..=1.0).contains(&x);
        if !(frac(self.soc_min_frac) && frac(self.soc_max_frac) && self.soc_min_frac < self.soc_max_frac) {
            return Err(Error::ParameterDomain("need 0 <= soc_min < soc_max <= 1".into()));
        }
        if !(self.soc_min_frac..=self.soc_max_frac).contains(&self.soc_init_frac) {
            return Err(Error::ParameterDomain("initial state of charge outside its bounds".into()));
        }
        if !(self.eta_ch > 0.0 && self.eta_ch <= 1.0 && self.eta_dc > 0.0 && self.eta_dc <= 1.0) {
            return Err(Error::ParameterDomain("efficiencies must lie in (0, 1]".into()));
        }
        if self.hours_at_rating < 1.0 {
            return Err(Error::ParameterDomain("hours_at_rating must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StorageUnit {
    pub bus: usize,
    pub energy_kwh: f64,
    pub power_kw: f64,
    pub soc_min_frac: f64,
    pub soc_max_frac: f64,
    pub eta_ch: f64,
    pub eta_dc: f64,
    pub soc_init_frac: f64,
}

impl StorageUnit {
    pub fn new(bus: usize, energy_kwh: f64, power_kw: f64, tech: &StorageTechnology) -> Result<Self> {
        tech.validate()?;
        if !(energy_kwh >= 0.0 && power_kw >= 0.0) {
            return Err(Error::ParameterDomain("storage sizes must be >= 0".into()));
        }
        if power_kw > energy_kwh + 1e-9 {
            return Err(Error::ParameterDomain(format!(
                "storage at bus {bus}: rating {power_kw} kW exceeds one hour of its {energy_kwh} kWh"
            )));
        }
        Ok(Self {
            bus,
            energy_kwh,
            power_kw,
            soc_min_frac: tech.soc_min_frac,
            soc_max_frac: tech.soc_max_frac,
            eta_ch: tech.eta_ch,
            eta_dc: tech.eta_dc,
            soc_init_frac: tech.soc_init_frac,
        })
    }

    pub fn soc_min_kwh(&self) -> f64 {
        self.soc_min_frac * self.energy_kwh
    }

    pub fn soc_max_kwh(&self) -> f64 {
        self.soc_max_frac * self.energy_kwh
    }

    pub fn soc_init_kwh(&self) -> f64 {
        self.soc_init_frac * self.energy_kwh
    }

    /// SOC change over one hour at signed power `p_kw` (charge positive).
    pub fn soc_delta(&self, p_kw: f64) -> f64 {
        if p_kw >= 0.0 {
            self.eta_ch * p_kw
        } else {
            p_kw / self.eta_dc
        }
    }
}

/// State of charge at the start of each hour plus the end of the day.
pub fn soc_trajectory(levels_kw: &[f64], unit: &StorageUnit) -> Vec<f64> {
    let mut soc = Vec::with_capacity(levels_kw.len() + 1);
    let mut s = unit.soc_init_kwh();
    soc.push(s);
    for &p in levels_kw {
        s += unit.soc_delta(p);
        soc.push(s);
    }
    soc
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleViolation {
    Power { hour: usize, p_kw: f64, limit_kw: f64 },
    Soc { hour: usize, soc_kwh: f64, bound_kwh: f64 },
    EndOfDay { soc_start_kwh: f64, soc_end_kwh: f64 },
}

pub fn validate_schedule(levels_kw: &[f64], unit: &StorageUnit) -> Vec<ScheduleViolation> {
    let mut out = Vec::new();
    for (hour, &p) in levels_kw.iter().enumerate() {
        if p.abs() > unit.power_kw + 1e-9 {
            out.push(ScheduleViolation::Power {
                hour,
                p_kw: p,
                limit_kw: unit.power_kw,
            });
        }
    }
    let soc = soc_trajectory(levels_kw, unit);
    for (hour, &s) in soc.iter().enumerate().skip(1) {
        if s < unit.soc_min_kwh() - SOC_TOL_KWH {
            out.push(ScheduleViolation::Soc {
                hour,
                soc_kwh: s,
                bound_kwh: unit.soc_min_kwh(),
            });
        } else if s > unit.soc_max_kwh() + SOC_TOL_KWH {
            out.push(ScheduleViolation::Soc {
                hour,
                soc_kwh: s,
                bound_kwh: unit.soc_max_kwh(),
            });
        }
    }
    let (first, last) = (soc[0], soc[soc.len() - 1]);
    if (last - first).abs() > SOC_TOL_KWH {
        out.push(ScheduleViolation::EndOfDay {
            soc_start_kwh: first,
            soc_end_kwh: last,
        });
    }
    out
}

/// Make a schedule feasible: clip each hour to the power rating and the SOC
/// bounds, then cut the latest charges (surplus) or discharges (deficit)
/// until the day ends where it started.
pub fn repair(levels_kw: &[f64], unit: &StorageUnit) -> Vec<f64> {
    let mut out = Vec::with_capacity(levels_kw.len());
    let mut soc = unit.soc_init_kwh();
    for &p in levels_kw {
        let p = p.clamp(-unit.power_kw, unit.power_kw);
        let p = if p > 0.0 {
            p.min(((unit.soc_max_kwh() - soc) / unit.eta_ch).max(0.0))
        } else {
            p.max(-((soc - unit.soc_min_kwh()) * unit.eta_dc).max(0.0))
        };
        soc += unit.soc_delta(p);
        out.push(p);
    }
    let mut gap = soc - unit.soc_init_kwh();
    for p in out.iter_mut().rev() {
        if gap.abs() <= 0.0 {
            break;
        }
        if gap > 0.0 && *p > 0.0 {
            let cut = p.min(gap / unit.eta_ch);
            *p -= cut;
            gap -= cut * unit.eta_ch;
        } else if gap < 0.0 && *p < 0.0 {
            let cut = (-*p).min(-gap * unit.eta_dc);
            *p += cut;
            gap += cut / unit.eta_dc;
        }
        if gap.abs() < 1e-12 {
            gap = 0.0;
        }
    }
    out
}

/// Signed storage power per unit for all 96 slots.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchSchedule {
    units: Vec<StorageUnit>,
    levels: Vec<Vec<f64>>,
}

impl DispatchSchedule {
    pub fn zero(units: Vec<StorageUnit>) -> Self {
        let levels = vec![vec![0.0; SLOTS]; units.len()];
        Self { units, levels }
    }

    pub fn units(&self) -> &[StorageUnit] {
        &self.units
    }

    pub fn unit_season(&self, unit: usize, season: usize) -> &[f64] {
        let start = slot_index(season, 0);
        &self.levels[unit][start..start + HOURS]
    }

    pub fn set_unit_season(&mut self, unit: usize, season: usize, levels: &[f64]) {
        let start = slot_index(season, 0);
        self.levels[unit][start..start + HOURS].copy_from_slice(levels);
    }

    pub fn level(&self, unit: usize, season: usize, hour: usize) -> f64 {
        self.levels[unit][slot_index(season, hour)]
    }

    /// Total signed storage power at a slot.
    pub fn net_kw(&self, season: usize, hour: usize) -> f64 {
        (0..self.units.len()).map(|u| self.level(u, season, hour)).sum()
    }

    pub fn violations(&self) -> Vec<(usize, usize, ScheduleViolation)> {
        let mut out = Vec::new();
        for (u, unit) in self.units.iter().enumerate() {
            for s in 1..=SEASONS {
                for v in validate_schedule(self.unit_season(u, s), unit) {
                    out.push((u, s, v));
                }
            }
        }
        out
    }
}

/// Search settings for the lower level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LowerSettings {
    /// Bits per unit-hour; `2^bits - 1` power levels, the spare code idles.
    pub bits: u32,
    pub swarm: SwarmConfig,
    /// Constant power factor of DG output (1.0 = no reactive power).
    pub dg_power_factor: f64,
    /// Network-limit penalty as a multiple of the day's largest possible
    /// storage revenue.
    pub penalty_factor: f64,
}

impl Default for LowerSettings {
    fn default() -> Self {
        Self {
            bits: 3,
            swarm: SwarmConfig::default(),
            dg_power_factor: 1.0,
            penalty_factor: 10.0,
        }
    }
}

impl LowerSettings {
    pub fn validate(&self) -> Result<()> {
        if !(2..=8).contains(&self.bits) {
            return Err(Error::ParameterDomain("dispatch bits must be between 2 and 8".into()));
        }
        if !(self.dg_power_factor > 0.0 && self.dg_power_factor <= 1.0) {
            return Err(Error::ParameterDomain("DG power factor must lie in (0, 1]".into()));
        }
        self.swarm.validate()
    }

    pub fn levels(&self) -> u32 {
        (1 << self.bits) - 1
    }
}

/// Power for a `bits`-wide code: codes `0..2^bits-1` span `-p_max..=p_max`
/// uniformly, the remaining top code is idle.
pub fn level_power(code: u32, bits: u32, p_max: f64) -> f64 {
    let n = (1u32 << bits) - 1;
    if code >= n {
        return 0.0;
    }
    p_max * (2.0 * code as f64 / (n - 1) as f64 - 1.0)
}

/// Losses and limit violations of one network state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HourEval {
    pub loss_kw: f64,
    /// Sum of squared relative limit excesses.
    pub violation: f64,
}

/// Everything the lower level needs for one fixed plan.
#[derive(Debug, Clone, Copy)]
pub struct DispatchProblem<'a> {
    pub net: &'a RadialNetwork,
    pub plan: &'a Plan,
    pub profiles: &'a DgProfiles,
    pub loads: &'a LoadProfile,
    pub tariff: &'a Tariff,
    pub technology: &'a StorageTechnology,
    pub settings: &'a LowerSettings,
}

impl DispatchProblem<'_> {
    pub fn units(&self) -> Result<Vec<StorageUnit>> {
        self.plan
            .sites
            .iter()
            .filter(|s| s.storage_kwh > 0.0)
            .map(|s| {
                self.net.bus_index(s.bus)?;
                StorageUnit::new(s.bus, s.storage_kwh, s.storage_kw, self.technology)
            })
            .collect()
    }

    /// Total expected wind and solar output at a slot, kW.
    pub fn dg_output(&self, season: usize, hour: usize) -> (f64, f64) {
        (
            self.plan.total_wt_kw() * self.profiles.wt(season, hour),
            self.plan.total_pv_kw() * self.profiles.pv(season, hour),
        )
    }

    pub fn load_kw(&self, season: usize, hour: usize) -> f64 {
        self.net.total_load_kw() * self.loads.factor(season, hour)
    }

    /// Net injections with DG, loads and the given storage powers.
    pub fn hour_injections(
        &self,
        season: usize,
        hour: usize,
        units: &[StorageUnit],
        powers_kw: &[f64],
    ) -> Result<Injections> {
        let mut inj = Injections::scaled_loads(self.net, self.loads.factor(season, hour));
        let pf = self.settings.dg_power_factor;
        let q_ratio = (1.0 - pf * pf).sqrt() / pf;
        let (e_wt, e_pv) = (self.profiles.wt(season, hour), self.profiles.pv(season, hour));
        for site in &self.plan.sites {
            let p = site.wt_kw * e_wt + site.pv_kw * e_pv;
            if p != 0.0 {
                inj.add(self.net, site.bus, p, p * q_ratio)?;
            }
        }
        for (unit, &p) in units.iter().zip(powers_kw) {
            inj.add(self.net, unit.bus, -p, 0.0)?;
        }
        Ok(inj)
    }

    pub fn solve_hour(
        &self,
        season: usize,
        hour: usize,
        units: &[StorageUnit],
        powers_kw: &[f64],
    ) -> Result<PowerFlowResult> {
        solve_power_flow(self.net, &self.hour_injections(season, hour, units, powers_kw)?)
    }

    pub fn evaluate_hour(
        &self,
        season: usize,
        hour: usize,
        units: &[StorageUnit],
        powers_kw: &[f64],
    ) -> Result<HourEval> {
        let res = self.solve_hour(season, hour, units, powers_kw)?;
        Ok(HourEval {
            loss_kw: res.p_loss_kw,
            violation: violation_measure(&res, self.net),
        })
    }
}

pub(crate) fn violation_measure(res: &PowerFlowResult, net: &RadialNetwork) -> f64 {
    check_limits(res, net).iter().map(|v| v.severity().powi(2)).sum()
}

/// One representative hour of a finished dispatch.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlyRecord {
    pub season: usize,
    pub hour: usize,
    pub load_kw: f64,
    pub wt_kw: f64,
    pub pv_kw: f64,
    pub storage_kw: f64,
    pub loss_kw: f64,
    pub violation: f64,
    pub v_mag: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DispatchOutcome {
    pub schedule: DispatchSchedule,
    /// Daily fluctuating cost per season, $.
    pub f2: [f64; SEASONS],
    /// The 96 representative hours in slot order.
    pub hourly: Vec<HourlyRecord>,
    /// Total network-limit violation over all hours.
    pub network_violation: f64,
    /// False when some season fell back to an invalid schedule.
    pub feasible: bool,
    pub histories: Vec<Vec<IterationRecord>>,
}

impl DispatchOutcome {
    pub fn slot_flows(&self) -> Vec<SlotFlow> {
        self.hourly
            .iter()
            .map(|r| SlotFlow {
                load_kw: r.load_kw,
                wt_kw: r.wt_kw,
                pv_kw: r.pv_kw,
                storage_kw: r.storage_kw,
                loss_kw: r.loss_kw,
            })
            .collect()
    }

    pub fn loss_kw(&self) -> Vec<f64> {
        self.hourly.iter().map(|r| r.loss_kw).collect()
    }
}

struct SeasonResult {
    levels: Vec<Vec<f64>>,
    feasible: bool,
    history: Vec<IterationRecord>,
}

/// Optimize the four seasons independently and re-solve the final schedule.
pub fn optimize_dispatch(problem: &DispatchProblem) -> Result<DispatchOutcome> {
    problem.settings.validate()?;
    let units = problem.units()?;
    let seasons: Vec<SeasonResult> = (1..=SEASONS)
        .into_par_iter()
        .map(|s| optimize_season(problem, &units, s))
        .collect::<Result<_>>()?;
    let mut schedule = DispatchSchedule::zero(units.clone());
    let mut feasible = true;
    let mut histories = Vec::with_capacity(SEASONS);
    for (i, res) in seasons.into_iter().enumerate() {
        for (u, lv) in res.levels.iter().enumerate() {
            schedule.set_unit_season(u, i + 1, lv);
        }
        feasible &= res.feasible;
        histories.push(res.history);
    }
    let slots: Vec<(usize, usize)> = (1..=SEASONS)
        .flat_map(|s| (0..HOURS).map(move |h| (s, h)))
        .collect();
    let hourly: Vec<HourlyRecord> = slots
        .par_iter()
        .map(|&(s, h)| {
            let powers: Vec<f64> = (0..units.len()).map(|u| schedule.level(u, s, h)).collect();
            let res = problem.solve_hour(s, h, &units, &powers)?;
            let (wt_kw, pv_kw) = problem.dg_output(s, h);
            Ok(HourlyRecord {
                season: s,
                hour: h,
                load_kw: problem.load_kw(s, h),
                wt_kw,
                pv_kw,
                storage_kw: powers.iter().sum(),
                loss_kw: res.p_loss_kw,
                violation: violation_measure(&res, problem.net),
                v_mag: res.v_mag,
            })
        })
        .collect::<Result<_>>()?;
    let mut f2 = [0.0; SEASONS];
    for (s, f) in f2.iter_mut().enumerate() {
        let rows = &hourly[s * HOURS..(s + 1) * HOURS];
        let e: Vec<f64> = rows.iter().map(|r| r.storage_kw).collect();
        let l: Vec<f64> = rows.iter().map(|r| r.loss_kw).collect();
        *f = fluctuating_cost(&e, &l, problem.tariff, s + 1);
    }
    let network_violation = hourly.iter().map(|r| r.violation).sum();
    Ok(DispatchOutcome {
        schedule,
        f2,
        hourly,
        network_violation,
        feasible,
        histories,
    })
}

type MemoKey = (usize, Vec<u64>);

struct SeasonSearch<'p, 'a> {
    problem: &'p DispatchProblem<'a>,
    units: &'p [StorageUnit],
    season: usize,
    memo: Mutex<HashMap<MemoKey, HourEval>>,
    network_weight: f64,
    tie_weight: f64,
}

impl SeasonSearch<'_, '_> {
    fn hour(&self, hour: usize, powers: &[f64]) -> HourEval {
        let key = (hour, powers.iter().map(|p| p.to_bits()).collect::<Vec<_>>());
        if let Some(hit) = self.memo.lock().expect("memo lock").get(&key) {
            return *hit;
        }
        let eval = self
            .problem
            .evaluate_hour(self.season, hour, self.units, powers)
            .unwrap_or(HourEval {
                loss_kw: 0.0,
                violation: 1e6,
            });
        self.memo.lock().expect("memo lock").insert(key, eval);
        eval
    }

    fn decode(&self, genome: &[bool]) -> Vec<Vec<f64>> {
        let b = self.problem.settings.bits as usize;
        self.units
            .iter()
            .enumerate()
            .map(|(u, unit)| {
                (0..HOURS)
                    .map(|h| {
                        let off = (u * HOURS + h) * b;
                        let code = genome[off..off + b]
                            .iter()
                            .fold(0u32, |acc, &bit| (acc << 1) | bit as u32);
                        level_power(code, b as u32, unit.power_kw)
                    })
                    .collect()
            })
            .collect()
    }

    /// Daily cost of feasible per-unit schedules plus network penalties.
    fn cost(&self, levels: &[Vec<f64>]) -> f64 {
        let prices = self.problem.tariff.season(self.season);
        let mut powers = vec![0.0; self.units.len()];
        let mut total = 0.0;
        for h in 0..HOURS {
            for (u, lv) in levels.iter().enumerate() {
                powers[u] = lv[h];
            }
            let ev = self.hour(h, &powers);
            total += prices[h] * (ev.loss_kw + powers.iter().sum::<f64>())
                + self.network_weight * ev.violation;
        }
        total
    }

    fn fitness(&self, genome: &[bool]) -> f64 {
        let raw = self.decode(genome);
        let mut fixed = Vec::with_capacity(raw.len());
        let mut drift = 0.0;
        for (lv, unit) in raw.iter().zip(self.units) {
            let soc = soc_trajectory(lv, unit);
            drift += ((soc[HOURS] - soc[0]) / unit.energy_kwh).powi(2);
            fixed.push(repair(lv, unit));
        }
        self.cost(&fixed) + self.tie_weight * drift
    }
}

fn optimize_season(problem: &DispatchProblem, units: &[StorageUnit], season: usize) -> Result<SeasonResult> {
    if units.is_empty() {
        return Ok(SeasonResult {
            levels: Vec::new(),
            feasible: true,
            history: Vec::new(),
        });
    }
    let rating: f64 = units.iter().map(|u| u.power_kw).sum();
    let max_price = problem.tariff.season(season).iter().copied().fold(0.0, f64::max);
    let revenue = (max_price * rating * HOURS as f64).max(1e-9);
    let search = SeasonSearch {
        problem,
        units,
        season,
        memo: Mutex::new(HashMap::new()),
        network_weight: problem.settings.penalty_factor * revenue,
        tie_weight: 1e-6 * revenue,
    };
    let bits = problem.settings.bits as usize;
    let dim = units.len() * HOURS * bits;
    let cfg = SwarmConfig {
        seed: derive_seed(problem.settings.swarm.seed, season as u64),
        ..problem.settings.swarm
    };
    let out = ibpso::run(dim, |g| search.fitness(g), &cfg)?;
    let candidate: Vec<Vec<f64>> = search
        .decode(&out.best)
        .iter()
        .zip(units)
        .map(|(lv, u)| repair(lv, u))
        .collect();
    let idle = vec![vec![0.0; HOURS]; units.len()];
    let valid = candidate
        .iter()
        .zip(units)
        .all(|(lv, u)| validate_schedule(lv, u).is_empty());
    let levels = if valid && search.cost(&candidate) <= search.cost(&idle) {
        candidate
    } else {
        idle
    };
    let feasible = levels
        .iter()
        .zip(units)
        .all(|(lv, u)| validate_schedule(lv, u).is_empty());
    Ok(SeasonResult {
        levels,
        feasible,
        history: out.history,
    })
}

/// Intraday report: season, hour, total WT and PV output, signed storage power, loss.
pub fn write_dispatch_csv(path: &Path, outcome: &DispatchOutcome) -> Result<()> {
    let mut w = create(path)?;
    write_dispatch(&mut w, outcome).map_err(|e| Error::io(path, e))?;
    finish(w, path)
}

pub fn write_dispatch<W: std::io::Write>(w: &mut W, outcome: &DispatchOutcome) -> std::io::Result<()> {
    writeln!(w, "season,hour,wt_kw,pv_kw,storage_kw_signed,loss_kw")?;
    for r in &outcome.hourly {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.season,
            r.hour,
            sig6(r.wt_kw),
            sig6(r.pv_kw),
            sig6(r.storage_kw),
            sig6(r.loss_kw)
        )?;
    }
    Ok(())
}
