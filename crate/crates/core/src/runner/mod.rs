//! Configuration, scenario orchestration and report files.

mod config;
mod io;

use std::path::{Path, PathBuf};

pub use config::{config_from_str, load_config, EchoLine, Origin, RunConfig};
pub use io::{
    load_profile_csv, load_profile_from_csv_str, load_tariff_csv, load_weather_csv, tariff_from_csv_str,
    weather_from_csv_str,
};

use crate::dispatch::{write_dispatch_csv, DispatchOutcome};
use crate::economics::{CostBreakdown, Tariff};
use crate::error::{Error, Result};
use crate::grid::{solve_power_flow, Injections, RadialNetwork};
use crate::ibpso::write_history_csv;
use crate::plan::{Plan, SiteAllocation};
use crate::planner::{self, write_allocation, write_allocation_csv, DeviceKind, EncodingSpec, PenetrationCaps, PlanningProblem, PlanningReport};
use crate::report::{create, finish, sig6};
use crate::{DAYS_PER_SEASON, SEASONS};

/// The four device mixes compared in a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    /// No investment, flat purchase price.
    Baseline,
    /// Wind, solar and storage planned together.
    Joint,
    WindStorage,
    SolarStorage,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::Baseline, Scenario::Joint, Scenario::WindStorage, Scenario::SolarStorage];

    pub fn from_id(id: i64) -> Option<Self> {
        Self::ALL.get(usize::try_from(id).ok()?.checked_sub(1)?).copied()
    }

    pub fn id(self) -> usize {
        match self {
            Scenario::Baseline => 1,
            Scenario::Joint => 2,
            Scenario::WindStorage => 3,
            Scenario::SolarStorage => 4,
        }
    }

    pub fn label(self) -> String {
        format!("S{}", self.id())
    }

    pub fn allows(self, kind: DeviceKind) -> bool {
        match (self, kind) {
            (Scenario::Baseline, _) => false,
            (Scenario::WindStorage, DeviceKind::Pv) => false,
            (Scenario::SolarStorage, DeviceKind::Wt) => false,
            _ => true,
        }
    }
}

impl RunConfig {
    /// Planning problem for a scenario under the configured caps.
    pub fn problem(&self, scenario: Scenario) -> Result<PlanningProblem> {
        self.problem_with_caps(scenario, self.caps)
    }

    pub fn problem_with_caps(&self, scenario: Scenario, caps: PenetrationCaps) -> Result<PlanningProblem> {
        let full = EncodingSpec::from_caps(
            self.sites.clone(),
            &self.units,
            caps.dg_cap_kw(&self.net),
            caps.storage_cap_kwh(&self.net),
            self.technology.hours_at_rating,
        )?;
        let encoding = full.restricted(|f| scenario.allows(f.kind));
        let tariff = match scenario {
            Scenario::Baseline => Tariff::flat(self.baseline_price_per_kwh)?,
            _ => self.tariff.clone(),
        };
        Ok(PlanningProblem {
            label: scenario.label(),
            net: self.net.clone(),
            profiles: self.profiles.clone(),
            loads: self.loads.clone(),
            tariff,
            econ: self.econ,
            export: self.export,
            technology: self.technology,
            lower: self.lower,
            caps,
            encoding,
            upper: self.upper,
            penalty_multiplier: self.penalty_multiplier,
        })
    }

    /// Bus whose voltage CDF is reported: the configured one, else the
    /// lowest-voltage bus of the base case.
    pub fn cdf_bus(&self) -> Result<usize> {
        match self.cdf_bus {
            Some(b) => Ok(b),
            None => worst_bus(&self.net),
        }
    }
}

/// Lowest-voltage bus of the network without any devices.
pub fn worst_bus(net: &RadialNetwork) -> Result<usize> {
    let pf = solve_power_flow(net, &Injections::loads(net))?;
    Ok(net.buses()[pf.min_voltage().0].id)
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub report: PlanningReport,
    pub cdf_bus: usize,
    pub voltage_cdf: Vec<CdfPoint>,
    /// Hourly loss in slot order, kW.
    pub loss_kw: Vec<f64>,
}

/// One step of an empirical CDF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfPoint {
    pub v_pu: f64,
    pub cum_prob: f64,
}

/// Voltage magnitude of `bus` at each of the 96 representative hours.
pub fn voltage_samples(dispatch: &DispatchOutcome, net: &RadialNetwork, bus: usize) -> Result<Vec<f64>> {
    let idx = net.bus_index(bus)?;
    Ok(dispatch.hourly.iter().map(|r| r.v_mag[idx]).collect())
}

/// Empirical CDF of a bus voltage. Every representative hour stands for
/// 91 days; equal voltages are merged into one step.
pub fn emit_voltage_cdf(dispatch: &DispatchOutcome, net: &RadialNetwork, bus: usize) -> Result<Vec<CdfPoint>> {
    let samples = voltage_samples(dispatch, net, bus)?;
    let weights = vec![DAYS_PER_SEASON; samples.len()];
    Ok(weighted_cdf(&samples, &weights))
}

pub fn weighted_cdf(samples: &[f64], weights: &[f64]) -> Vec<CdfPoint> {
    let mut pairs: Vec<(f64, f64)> = samples.iter().copied().zip(weights.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = weights.iter().sum();
    let mut out: Vec<CdfPoint> = Vec::new();
    let mut acc = 0.0;
    for (v, w) in pairs {
        acc += w;
        let cum = (acc / total).min(1.0);
        match out.last_mut() {
            Some(last) if last.v_pu == v => last.cum_prob = cum,
            _ => out.push(CdfPoint { v_pu: v, cum_prob: cum }),
        }
    }
    out
}

/// First-order dominance of equally weighted samples: every empirical
/// quantile of `a` is at least the matching quantile of `b`, less `tol`.
pub fn first_order_dominates(a: &[f64], b: &[f64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).all(|(x, y)| *x >= y - tol)
}

pub fn write_voltage_cdf_csv(path: &Path, cdf: &[CdfPoint]) -> Result<()> {
    let mut w = create(path)?;
    write_voltage_cdf(&mut w, cdf).map_err(|e| Error::io(path, e))?;
    finish(w, path)
}

pub fn write_voltage_cdf<W: std::io::Write>(w: &mut W, cdf: &[CdfPoint]) -> std::io::Result<()> {
    writeln!(w, "voltage_pu,cumulative_probability")?;
    for p in cdf {
        writeln!(w, "{},{}", sig6(p.v_pu), sig6(p.cum_prob))?;
    }
    Ok(())
}

pub fn write_cost_csv(path: &Path, rows: &[(String, CostBreakdown)]) -> Result<()> {
    let mut w = create(path)?;
    write_costs(&mut w, rows).map_err(|e| Error::io(path, e))?;
    finish(w, path)
}

pub fn write_costs<W: std::io::Write>(w: &mut W, rows: &[(String, CostBreakdown)]) -> std::io::Result<()> {
    writeln!(w, "scenario,c1,c2,c3,total")?;
    for (label, c) in rows {
        writeln!(w, "{label},{},{},{},{}", sig6(c.c1), sig6(c.c2), sig6(c.c3), sig6(c.total))?;
    }
    Ok(())
}

/// Rebuild a plan from allocation CSV text (`scenario,site,device,capacity`).
/// Storage power left at zero is derived from the energy and `hours_at_rating`.
pub fn plan_from_allocation_csv_str(text: &str, hours_at_rating: f64) -> Result<Plan> {
    #[derive(serde::Deserialize)]
    struct Row {
        site: usize,
        device: String,
        capacity: f64,
    }
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut sites: Vec<SiteAllocation> = Vec::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| Error::parse("allocation", format!("row {}: {e}", i + 1)))?;
        if !(row.capacity.is_finite() && row.capacity >= 0.0) {
            return Err(Error::parse("allocation", format!("row {}: capacity must be >= 0", i + 1)));
        }
        let pos = match sites.iter().position(|s| s.bus == row.site) {
            Some(p) => p,
            None => {
                sites.push(SiteAllocation::empty(row.site));
                sites.len() - 1
            }
        };
        let s = &mut sites[pos];
        match row.device.as_str() {
            "wt_kw" => s.wt_kw = row.capacity,
            "pv_kw" => s.pv_kw = row.capacity,
            "storage_kwh" => s.storage_kwh = row.capacity,
            "storage_kw" => s.storage_kw = row.capacity,
            other => return Err(Error::parse("allocation", format!("row {}: unknown device {other:?}", i + 1))),
        }
    }
    for s in &mut sites {
        if s.storage_kwh > 0.0 && s.storage_kw == 0.0 {
            s.storage_kw = s.storage_kwh / hours_at_rating;
        }
    }
    Ok(Plan::new(sites))
}

fn scenario_result(cfg: &RunConfig, scenario: Scenario, report: PlanningReport) -> Result<ScenarioResult> {
    let cdf_bus = cfg.cdf_bus()?;
    let voltage_cdf = emit_voltage_cdf(&report.dispatch, &cfg.net, cdf_bus)?;
    let loss_kw = report.dispatch.loss_kw();
    Ok(ScenarioResult {
        scenario,
        report,
        cdf_bus,
        voltage_cdf,
        loss_kw,
    })
}

/// Bi-level plan for one scenario.
pub fn run_scenario(cfg: &RunConfig, scenario: Scenario) -> Result<ScenarioResult> {
    let problem = cfg.problem(scenario)?;
    let report = planner::plan(&problem)?;
    scenario_result(cfg, scenario, report)
}

/// Two-stage plan (DG first, then storage) for one scenario.
pub fn run_sequential(cfg: &RunConfig, scenario: Scenario) -> Result<ScenarioResult> {
    let problem = cfg.problem(scenario)?;
    let report = planner::sequential_baseline(&problem)?;
    scenario_result(cfg, scenario, report)
}

/// Run each scenario independently; a failure is logged and kept in place.
pub fn run_scenarios(cfg: &RunConfig, scenarios: &[Scenario]) -> Vec<(Scenario, Result<ScenarioResult>)> {
    scenarios
        .iter()
        .map(|&s| {
            log::info!("planning {}", s.label());
            let res = run_scenario(cfg, s);
            if let Err(e) = &res {
                log::error!("{} failed: {e}", s.label());
            }
            (s, res)
        })
        .collect()
}

/// Per-scenario files under `dir/<label>/` plus the combined cost and
/// allocation tables. Returns the files written.
pub fn write_scenario_outputs(dir: &Path, results: &[&ScenarioResult]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for r in results {
        written.extend(write_one(dir, r)?);
    }
    let costs: Vec<(String, CostBreakdown)> = results.iter().map(|r| (r.report.label.clone(), r.report.cost)).collect();
    let path = dir.join("costs.csv");
    write_cost_csv(&path, &costs)?;
    written.push(path);
    let path = dir.join("allocation.csv");
    let mut w = create(&path)?;
    for (i, r) in results.iter().enumerate() {
        let mut buf = Vec::new();
        write_allocation(&mut buf, &r.report).map_err(|e| Error::io(&path, e))?;
        let text = String::from_utf8(buf).expect("ascii output");
        let body = if i == 0 { text.as_str() } else { text.split_once('\n').map_or("", |x| x.1) };
        std::io::Write::write_all(&mut w, body.as_bytes()).map_err(|e| Error::io(&path, e))?;
    }
    finish(w, &path)?;
    written.push(path);
    Ok(written)
}

fn write_one(dir: &Path, r: &ScenarioResult) -> Result<Vec<PathBuf>> {
    let sub = dir.join(&r.report.label);
    let files = [
        sub.join("allocation.csv"),
        sub.join("dispatch.csv"),
        sub.join("convergence.csv"),
        sub.join(format!("voltage_cdf_bus{}.csv", r.cdf_bus)),
    ];
    write_allocation_csv(&files[0], &r.report)?;
    write_dispatch_csv(&files[1], &r.report.dispatch)?;
    write_history_csv(&files[2], &r.report.history)?;
    write_voltage_cdf_csv(&files[3], &r.voltage_cdf)?;
    Ok(files.to_vec())
}

/// One row of a storage-cap sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub storage_frac: f64,
    pub report: PlanningReport,
}

/// Joint planning repeated for each storage penetration cap.
pub fn sweep_storage_penetration(cfg: &RunConfig, fracs: &[f64]) -> Result<Vec<SweepRow>> {
    fracs
        .iter()
        .map(|&f| {
            let caps = PenetrationCaps {
                storage_frac: f,
                ..cfg.caps
            };
            let problem = cfg.problem_with_caps(Scenario::Joint, caps)?;
            let report = planner::plan(&problem)?;
            Ok(SweepRow {
                storage_frac: f,
                report,
            })
        })
        .collect()
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = create(path)?;
    write_sweep(&mut w, rows).map_err(|e| Error::io(path, e))?;
    finish(w, path)
}

pub fn write_sweep<W: std::io::Write>(w: &mut W, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(w, "storage_frac,dg_kw,storage_kwh,c1,c2,c3,total")?;
    for r in rows {
        let (p, c) = (&r.report.plan, &r.report.cost);
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            sig6(r.storage_frac),
            sig6(p.total_dg_kw()),
            sig6(p.total_storage_kwh()),
            sig6(c.c1),
            sig6(c.c2),
            sig6(c.c3),
            sig6(c.total)
        )?;
    }
    Ok(())
}

/// Hourly loss of the plan's DG alone against the device-free network at
/// the same slot, for every slot in season order: `(with_dg, without)`.
pub fn dg_loss_comparison(problem: &PlanningProblem, plan: &Plan) -> Result<Vec<(f64, f64)>> {
    let dg_only = plan.without_storage();
    let dp = crate::dispatch::DispatchProblem {
        net: &problem.net,
        plan: &dg_only,
        profiles: &problem.profiles,
        loads: &problem.loads,
        tariff: &problem.tariff,
        technology: &problem.technology,
        settings: &problem.lower,
    };
    let mut out = Vec::new();
    for s in 1..=SEASONS {
        for h in 0..crate::HOURS {
            let with = dp.solve_hour(s, h, &[], &[])?.p_loss_kw;
            let bare = solve_power_flow(&problem.net, &Injections::scaled_loads(&problem.net, problem.loads.factor(s, h)))?
                .p_loss_kw;
            out.push((with, bare));
        }
    }
    Ok(out)
}
