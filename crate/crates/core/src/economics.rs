//! Annual cost model: investment, operation and maintenance, grid purchase.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plan::Plan;
use crate::sequence::DgProfiles;
use crate::{slot_index, DAYS_PER_SEASON, HOURS, SEASONS, SLOTS};

/// Unit costs and present-value coefficients.
///
/// `c_st_inse_per_kw` multiplies the storage power rating and
/// `c_st_inss_per_kwh` the storage energy capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EconParams {
    pub c_wd_per_kw: f64,
    pub c_pv_per_kw: f64,
    pub z_per_kwh: f64,
    pub y_coeff: f64,
    pub c_f: f64,
    pub c_g: f64,
    pub c_e: f64,
    pub c_st_inse_per_kw: f64,
    pub c_st_inss_per_kwh: f64,
    pub c_st_om_per_kwh: f64,
}

impl Default for EconParams {
    fn default() -> Self {
        Self {
            c_wd_per_kw: 1230.0,
            c_pv_per_kw: 1540.0,
            z_per_kwh: 0.015,
            y_coeff: 0.015,
            c_f: 0.0802,
            c_g: 0.071,
            c_e: 0.037,
            c_st_inse_per_kw: 232.0,
            c_st_inss_per_kwh: 180.0,
            c_st_om_per_kwh: 21.0,
        }
    }
}

impl EconParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.c_wd_per_kw,
            self.c_pv_per_kw,
            self.z_per_kwh,
            self.y_coeff,
            self.c_f,
            self.c_g,
            self.c_e,
            self.c_st_inse_per_kw,
            self.c_st_inss_per_kwh,
            self.c_st_om_per_kwh,
        ];
        if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::ParameterDomain("economic parameters must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Electricity purchase price per (season, hour) in $/kWh.
#[derive(Debug, Clone, PartialEq)]
pub struct Tariff {
    prices: Vec<f64>,
}

impl Tariff {
    pub fn from_fn(f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut prices = vec![0.0; SLOTS];
        for s in 1..=SEASONS {
            for h in 0..HOURS {
                let p = f(s, h);
                if !(p.is_finite() && p >= 0.0) {
                    return Err(Error::ParameterDomain(format!(
                        "price at season {s}, hour {h} must be >= 0"
                    )));
                }
                prices[slot_index(s, h)] = p;
            }
        }
        Ok(Self { prices })
    }

    /// Build from (season, hour, price) rows; all 96 slots must appear exactly once.
    pub fn from_rows(rows: &[(usize, usize, f64)]) -> Result<Self> {
        let mut prices = vec![f64::NAN; SLOTS];
        for &(s, h, p) in rows {
            if !(1..=SEASONS).contains(&s) || h >= HOURS {
                return Err(Error::ParameterDomain(format!("tariff slot ({s}, {h}) out of range")));
            }
            let slot = &mut prices[slot_index(s, h)];
            if !slot.is_nan() {
                return Err(Error::ParameterDomain(format!("tariff slot ({s}, {h}) repeated")));
            }
            *slot = p;
        }
        if let Some(i) = prices.iter().position(|p| p.is_nan()) {
            return Err(Error::IncompleteProfile {
                season: i / HOURS + 1,
                hour: i % HOURS,
            });
        }
        Self::from_fn(|s, h| prices[slot_index(s, h)])
    }

    pub fn flat(price_per_kwh: f64) -> Result<Self> {
        Self::from_fn(|_, _| price_per_kwh)
    }

    /// Three-tier time-of-use schedule shipped as the default: valley
    /// 23:00-08:00, peak 18:00-23:00, flat otherwise. Summer peaks slightly
    /// higher and winter slightly lower.
    pub fn default_tou() -> Self {
        Self::from_fn(|s, h| {
            let peak = match s {
                2 => 0.165,
                4 => 0.155,
                _ => 0.16,
            };
            match h {
                18..=22 => peak,
                8..=17 => 0.03,
                _ => 0.01,
            }
        })
        .expect("default tariff is valid")
    }

    pub fn price(&self, season: usize, hour: usize) -> f64 {
        self.prices[slot_index(season, hour)]
    }

    pub fn season(&self, season: usize) -> &[f64] {
        let start = slot_index(season, 0);
        &self.prices[start..start + HOURS]
    }

    pub fn max_price(&self) -> f64 {
        self.prices.iter().copied().fold(0.0, f64::max)
    }

    /// Copy with every price shifted by a constant.
    pub fn shifted(&self, delta: f64) -> Result<Self> {
        Self::from_fn(|s, h| self.price(s, h) + delta)
    }
}

/// How hours of net export are priced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportPolicy {
    /// Exports credited at the purchase price.
    #[default]
    NetMetering,
    /// Exports earn nothing.
    Clamp,
}

/// Energy flows of one representative hour, all in kW averaged over the hour.
/// `storage_kw` is signed: charging positive.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SlotFlow {
    pub load_kw: f64,
    pub wt_kw: f64,
    pub pv_kw: f64,
    pub storage_kw: f64,
    pub loss_kw: f64,
}

impl SlotFlow {
    /// Power drawn from the upstream grid.
    pub fn purchase_kw(&self) -> f64 {
        self.load_kw - self.wt_kw - self.pv_kw + self.loss_kw + self.storage_kw
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Self {
        Self {
            c1,
            c2,
            c3,
            total: c1 + c2 + c3,
        }
    }
}

/// Annualized equipment investment.
pub fn investment_cost(plan: &Plan, ep: &EconParams) -> f64 {
    ep.c_f * ep.c_wd_per_kw * plan.total_wt_kw()
        + ep.c_g * ep.c_pv_per_kw * plan.total_pv_kw()
        + ep.c_e
            * (ep.c_st_inse_per_kw * plan.total_storage_kw()
                + ep.c_st_inss_per_kwh * plan.total_storage_kwh())
}

/// Annual operation and maintenance.
pub fn om_cost(plan: &Plan, profiles: &DgProfiles, ep: &EconParams) -> f64 {
    let wt = plan.total_wt_kw();
    let pv = plan.total_pv_kw();
    let fixed = (ep.c_wd_per_kw * wt + ep.c_pv_per_kw * pv) * ep.y_coeff;
    let mut energy = 0.0;
    for s in 1..=SEASONS {
        let day: f64 = (0..HOURS)
            .map(|h| wt * profiles.wt(s, h) + pv * profiles.pv(s, h))
            .sum();
        energy += DAYS_PER_SEASON * day;
    }
    fixed + ep.z_per_kwh * energy + ep.c_st_om_per_kwh * plan.total_storage_kwh()
}

/// Annual cost of power bought from the upstream grid. `flows` holds the 96
/// representative hours in slot order.
pub fn purchase_cost(flows: &[SlotFlow], tariff: &Tariff, policy: ExportPolicy) -> Result<f64> {
    if flows.len() != SLOTS {
        return Err(Error::IncompleteProfile {
            season: flows.len() / HOURS + 1,
            hour: flows.len() % HOURS,
        });
    }
    let mut total = 0.0;
    for s in 1..=SEASONS {
        for h in 0..HOURS {
            let mut kw = flows[slot_index(s, h)].purchase_kw();
            if policy == ExportPolicy::Clamp {
                kw = kw.max(0.0);
            }
            total += DAYS_PER_SEASON * tariff.price(s, h) * kw;
        }
    }
    Ok(total)
}

pub fn annual_cost(
    plan: &Plan,
    flows: &[SlotFlow],
    profiles: &DgProfiles,
    tariff: &Tariff,
    ep: &EconParams,
    policy: ExportPolicy,
) -> Result<CostBreakdown> {
    Ok(CostBreakdown::new(
        investment_cost(plan, ep),
        om_cost(plan, profiles, ep),
        purchase_cost(flows, tariff, policy)?,
    ))
}

/// Daily lower-level objective for one season: price-weighted losses plus
/// signed storage power.
pub fn fluctuating_cost(storage_kw: &[f64], loss_kw: &[f64], tariff: &Tariff, season: usize) -> f64 {
    tariff
        .season(season)
        .iter()
        .zip(storage_kw.iter().zip(loss_kw))
        .map(|(p, (e, l))| p * (l + e))
        .sum()
}
