//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use adn_planner::dispatch::{level_power, StorageUnit, SOC_TOL_KWH};
use adn_planner::economics::EconParams;
use adn_planner::grid::{check_limits, solve_power_flow, Injections, RadialNetwork};
use adn_planner::load::LoadProfile;
use adn_planner::plan::Plan;
use adn_planner::planner::{decode, PlanningProblem};
use adn_planner::sequence::DgProfiles;
use adn_planner::{DAYS_PER_SEASON, HOURS, SEASONS};

/// Loss and limit status of one hour with a single storage unit at `bus`.
pub struct HourModel<'a> {
    pub net: &'a RadialNetwork,
    pub plan: &'a Plan,
    pub profiles: &'a DgProfiles,
    pub loads: &'a LoadProfile,
}

impl HourModel<'_> {
    /// (loss kW, within limits) with storage power `p_kw` (charge positive).
    pub fn hour(&self, season: usize, hour: usize, storage_bus: Option<usize>, p_kw: f64) -> (f64, bool) {
        let mut inj = Injections::scaled_loads(self.net, self.loads.factor(season, hour));
        for s in &self.plan.sites {
            let p = s.wt_kw * self.profiles.wt(season, hour) + s.pv_kw * self.profiles.pv(season, hour);
            if p != 0.0 {
                inj.add(self.net, s.bus, p, 0.0).unwrap();
            }
        }
        if let Some(bus) = storage_bus {
            inj.add(self.net, bus, -p_kw, 0.0).unwrap();
        }
        let res = solve_power_flow(self.net, &inj).unwrap();
        (res.p_loss_kw, check_limits(&res, self.net).is_empty())
    }
}

/// Best daily cost of one storage unit over every schedule drawn from the
/// discrete power levels, by dynamic programming over reachable SOC values.
/// `hour_cost(h, p)` returns `None` when the hour is infeasible at power p.
/// Returns (cost, schedule).
pub fn dp_dispatch(
    unit: &StorageUnit,
    levels: &[f64],
    mut hour_cost: impl FnMut(usize, f64) -> Option<f64>,
) -> Option<(f64, Vec<f64>)> {
    let key = |soc: f64| (soc * 1e6).round() as i64;
    let mut table: Vec<Vec<Option<f64>>> = Vec::with_capacity(HOURS);
    for h in 0..HOURS {
        table.push(levels.iter().map(|&p| hour_cost(h, p)).collect());
    }
    // state -> (soc, cost, schedule)
    let mut states: BTreeMap<i64, (f64, f64, Vec<f64>)> = BTreeMap::new();
    let init = unit.soc_init_kwh();
    states.insert(key(init), (init, 0.0, Vec::new()));
    for row in &table {
        let mut next: BTreeMap<i64, (f64, f64, Vec<f64>)> = BTreeMap::new();
        for (soc, cost, path) in states.values() {
            for (&p, c) in levels.iter().zip(row) {
                let Some(c) = c else { continue };
                let s = soc + unit.soc_delta(p);
                if s < unit.soc_min_kwh() - SOC_TOL_KWH || s > unit.soc_max_kwh() + SOC_TOL_KWH {
                    continue;
                }
                let total = cost + c;
                let k = key(s);
                if next.get(&k).is_some_and(|v| v.1 <= total) {
                    continue;
                }
                let mut path = path.clone();
                path.push(p);
                next.insert(k, (s, total, path));
            }
        }
        states = next;
    }
    states
        .into_values()
        .filter(|(s, _, _)| (s - init).abs() <= SOC_TOL_KWH)
        .map(|(_, c, p)| (c, p))
        .min_by(|a, b| a.0.total_cmp(&b.0))
}

/// Every level a `bits`-wide code can decode to, idle included once.
pub fn code_levels(bits: u32, p_max: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..(1u32 << bits)).map(|c| level_power(c, bits, p_max)).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Exact annual cost of one plan, or `None` when the plan breaks a cap or
/// some hour violates a network limit. Supports at most one storage site.
pub fn exact_plan_cost(problem: &PlanningProblem, plan: &Plan) -> Option<f64> {
    let net = &problem.net;
    let dg = plan.total_dg_kw();
    if dg > problem.caps.dg_cap_kw(net) + 1e-9 || plan.total_storage_kwh() > problem.caps.storage_cap_kwh(net) + 1e-9 {
        return None;
    }
    if dg > net.total_load_kw() + 1e-9 {
        // Base-case loss only loosens this bound; the toy never gets close.
        return None;
    }
    let store: Vec<_> = plan.sites.iter().filter(|s| s.storage_kwh > 0.0).collect();
    assert!(store.len() <= 1, "oracle handles one storage site");
    let unit = store
        .first()
        .map(|s| StorageUnit::new(s.bus, s.storage_kwh, s.storage_kw, &problem.technology).unwrap());
    let model = HourModel {
        net,
        plan,
        profiles: &problem.profiles,
        loads: &problem.loads,
    };
    let c1 = investment(plan, &problem.econ);
    let c2 = operation(plan, &problem.profiles, &problem.econ);
    let mut c3 = 0.0;
    for s in 1..=SEASONS {
        let load = |h: usize| net.total_load_kw() * problem.loads.factor(s, h);
        let dg_out =
            |h: usize| plan.total_wt_kw() * problem.profiles.wt(s, h) + plan.total_pv_kw() * problem.profiles.pv(s, h);
        let price = |h: usize| problem.tariff.price(s, h);
        let day = match &unit {
            None => {
                let mut day = 0.0;
                for h in 0..HOURS {
                    let (loss, ok) = model.hour(s, h, None, 0.0);
                    if !ok {
                        return None;
                    }
                    day += price(h) * (load(h) + loss - dg_out(h));
                }
                day
            }
            Some(u) => {
                let levels = code_levels(problem.lower.bits, u.power_kw);
                let (day, _) = dp_dispatch(u, &levels, |h, p| {
                    let (loss, ok) = model.hour(s, h, Some(u.bus), p);
                    ok.then(|| price(h) * (load(h) + loss + p - dg_out(h)))
                })?;
                day
            }
        };
        c3 += DAYS_PER_SEASON * day;
    }
    Some(c1 + c2 + c3)
}

fn investment(plan: &Plan, e: &EconParams) -> f64 {
    plan.sites
        .iter()
        .map(|s| {
            e.c_f * e.c_wd_per_kw * s.wt_kw
                + e.c_g * e.c_pv_per_kw * s.pv_kw
                + e.c_e * (e.c_st_inse_per_kw * s.storage_kw + e.c_st_inss_per_kwh * s.storage_kwh)
        })
        .sum()
}

fn operation(plan: &Plan, profiles: &DgProfiles, e: &EconParams) -> f64 {
    let mut total = 0.0;
    for site in &plan.sites {
        total += e.y_coeff * (e.c_wd_per_kw * site.wt_kw + e.c_pv_per_kw * site.pv_kw);
        total += e.c_st_om_per_kwh * site.storage_kwh;
        for s in 1..=SEASONS {
            for h in 0..HOURS {
                let kwh = site.wt_kw * profiles.wt(s, h) + site.pv_kw * profiles.pv(s, h);
                total += DAYS_PER_SEASON * e.z_per_kwh * kwh;
            }
        }
    }
    total
}

/// Exhaustive search over every genome: (best cost, all optimal genomes,
/// full landscape of feasible costs).
pub fn exhaustive_optimum(problem: &PlanningProblem) -> (f64, Vec<Vec<bool>>, Vec<(Vec<bool>, f64)>) {
    let dim = problem.encoding.total_bits();
    assert!(dim <= 16, "enumeration is limited to 16 bits");
    let mut landscape = Vec::new();
    for code in 0..(1u32 << dim) {
        let genome: Vec<bool> = (0..dim).map(|i| code >> (dim - 1 - i) & 1 == 1).collect();
        let plan = decode(&genome, &problem.encoding).unwrap();
        if let Some(c) = exact_plan_cost(problem, &plan) {
            landscape.push((genome, c));
        }
    }
    let best = landscape.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * best.abs();
    let optimal = landscape
        .iter()
        .filter(|x| x.1 <= best + tol)
        .map(|x| x.0.clone())
        .collect();
    (best, optimal, landscape)
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (tol {tol})");
}
