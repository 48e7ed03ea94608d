use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::{decode, PenetrationCaps, PlanningProblem};
use crate::dispatch::{optimize_dispatch, DispatchOutcome, DispatchProblem};
use crate::economics::{annual_cost, CostBreakdown};
use crate::error::{Error, Result};
use crate::grid::{solve_power_flow, Injections, RadialNetwork};
use crate::plan::Plan;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityLimit {
    /// Total DG active power against load plus base-case loss.
    ActiveBalance,
    /// Total DG reactive power against reactive load plus base-case loss.
    ReactiveBalance,
    DgPenetration,
    StoragePenetration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityViolation {
    pub limit: CapacityLimit,
    pub value: f64,
    pub bound: f64,
}

impl CapacityViolation {
    /// Relative excess over the bound.
    pub fn severity(&self) -> f64 {
        (self.value - self.bound) / self.bound.max(1e-9)
    }
}

/// Check the plan-level capacity limits. `base_loss` is the base-case
/// (kW, kVar) loss of the network without any devices.
pub fn capacity_feasible(
    plan: &Plan,
    net: &RadialNetwork,
    base_loss: (f64, f64),
    caps: &PenetrationCaps,
    dg_power_factor: f64,
) -> (bool, Vec<CapacityViolation>) {
    let mut out = Vec::new();
    let mut check = |limit, value: f64, bound: f64| {
        if value > bound + 1e-9 {
            out.push(CapacityViolation { limit, value, bound });
        }
    };
    let dg = plan.total_dg_kw();
    let q_ratio = (1.0 - dg_power_factor * dg_power_factor).sqrt() / dg_power_factor;
    check(CapacityLimit::ActiveBalance, dg, net.total_load_kw() + base_loss.0);
    check(CapacityLimit::ReactiveBalance, dg * q_ratio, net.total_load_kvar() + base_loss.1);
    check(CapacityLimit::DgPenetration, dg, caps.dg_cap_kw(net));
    check(CapacityLimit::StoragePenetration, plan.total_storage_kwh(), caps.storage_cap_kwh(net));
    (out.is_empty(), out)
}

/// A scored plan.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub plan: Plan,
    pub cost: CostBreakdown,
    pub dispatch: Option<Arc<DispatchOutcome>>,
    pub capacity_violations: Vec<CapacityViolation>,
    pub network_violation: f64,
    pub fitness: f64,
    pub feasible: bool,
}

/// Upper-level fitness with a genome-keyed cache shared across threads.
pub struct Evaluator<'p> {
    problem: &'p PlanningProblem,
    base_loss: (f64, f64),
    penalty_weight: f64,
    cache: Mutex<HashMap<Vec<bool>, Arc<Evaluation>>>,
}

impl<'p> Evaluator<'p> {
    pub fn new(problem: &'p PlanningProblem) -> Result<Self> {
        problem.econ.validate()?;
        problem.lower.validate()?;
        problem.upper.validate()?;
        problem.technology.validate()?;
        for s in problem.encoding.sites() {
            problem.net.bus_index(s.bus)?;
        }
        if !(problem.penalty_multiplier > 0.0) {
            return Err(Error::ParameterDomain("penalty multiplier must be > 0".into()));
        }
        let base = solve_power_flow(&problem.net, &Injections::loads(&problem.net))?;
        let mut ev = Self {
            problem,
            base_loss: (base.p_loss_kw, base.q_loss_kvar),
            penalty_weight: 1.0,
            cache: Mutex::new(HashMap::new()),
        };
        let empty = Plan::new(
            problem
                .encoding
                .sites()
                .iter()
                .map(|s| crate::plan::SiteAllocation::empty(s.bus))
                .collect(),
        );
        let baseline = ev.evaluate_plan(&empty)?.cost.total.abs().max(1.0);
        ev.penalty_weight = problem.penalty_multiplier * baseline;
        Ok(ev)
    }

    pub fn problem(&self) -> &'p PlanningProblem {
        self.problem
    }

    pub fn base_loss(&self) -> (f64, f64) {
        self.base_loss
    }

    pub fn penalty_weight(&self) -> f64 {
        self.penalty_weight
    }

    pub fn cached(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    pub fn clear_cache(&self) {
        self.cache.lock().expect("cache lock").clear();
    }

    pub fn evaluate(&self, genome: &[bool]) -> Result<Arc<Evaluation>> {
        if let Some(hit) = self.cache.lock().expect("cache lock").get(genome) {
            return Ok(hit.clone());
        }
        let plan = decode(genome, &self.problem.encoding)?;
        let eval = Arc::new(self.evaluate_plan(&plan)?);
        self.cache
            .lock()
            .expect("cache lock")
            .insert(genome.to_vec(), eval.clone());
        Ok(eval)
    }

    pub fn fitness(&self, genome: &[bool]) -> f64 {
        match self.evaluate(genome) {
            Ok(e) => e.fitness,
            Err(err) => {
                log::warn!("evaluation failed: {err}");
                self.penalty_weight * 1e6
            }
        }
    }

    pub fn evaluate_plan(&self, plan: &Plan) -> Result<Evaluation> {
        let p = self.problem;
        let (cap_ok, capacity_violations) =
            capacity_feasible(plan, &p.net, self.base_loss, &p.caps, p.lower.dg_power_factor);
        if !cap_ok {
            let v: f64 = capacity_violations.iter().map(|c| c.severity()).sum();
            return Ok(Evaluation {
                plan: plan.clone(),
                cost: CostBreakdown::default(),
                dispatch: None,
                capacity_violations,
                network_violation: 0.0,
                fitness: self.penalty(v),
                feasible: false,
            });
        }
        let dp = DispatchProblem {
            net: &p.net,
            plan,
            profiles: &p.profiles,
            loads: &p.loads,
            tariff: &p.tariff,
            technology: &p.technology,
            settings: &p.lower,
        };
        let dispatch = optimize_dispatch(&dp)?;
        let cost = annual_cost(plan, &dispatch.slot_flows(), &p.profiles, &p.tariff, &p.econ, p.export)?;
        let network_violation = dispatch.network_violation;
        let feasible = dispatch.feasible && network_violation == 0.0;
        let fitness = if feasible {
            cost.total
        } else {
            self.penalty(network_violation)
        };
        Ok(Evaluation {
            plan: plan.clone(),
            cost,
            dispatch: Some(Arc::new(dispatch)),
            capacity_violations,
            network_violation,
            fitness,
            feasible,
        })
    }

    /// Penalty for infeasible plans; exceeds every feasible cost.
    fn penalty(&self, violation: f64) -> f64 {
        self.penalty_weight * (1.0 + violation).powi(2)
    }
}
