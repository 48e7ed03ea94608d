//! Upper level: genome layout, capacity limits, cached plan evaluation and
//! the outer swarm search.

mod encoding;
mod evaluate;

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use encoding::{decode, encode, CandidateSite, DeviceKind, EncodingSpec, FieldSpec, UnitSizes};
pub use evaluate::{capacity_feasible, CapacityLimit, CapacityViolation, Evaluation, Evaluator};

use crate::dispatch::{DispatchOutcome, LowerSettings, StorageTechnology};
use crate::economics::{CostBreakdown, EconParams, ExportPolicy, Tariff};
use crate::error::{Error, Result};
use crate::grid::RadialNetwork;
use crate::ibpso::{self, derive_seed, IterationRecord, SwarmConfig};
use crate::load::LoadProfile;
use crate::plan::Plan;
use crate::report::{create, finish, sig6};
use crate::sequence::DgProfiles;

/// Penetration limits as fractions of a reference load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenetrationCaps {
    pub dg_frac: f64,
    pub storage_frac: f64,
    /// Reference active load, kW. `None` uses the network's total.
    pub ref_load_kw: Option<f64>,
}

impl Default for PenetrationCaps {
    fn default() -> Self {
        Self {
            dg_frac: 0.30,
            storage_frac: 0.10,
            ref_load_kw: None,
        }
    }
}

impl PenetrationCaps {
    pub fn reference_kw(&self, net: &RadialNetwork) -> f64 {
        self.ref_load_kw.unwrap_or_else(|| net.total_load_kw())
    }

    pub fn dg_cap_kw(&self, net: &RadialNetwork) -> f64 {
        self.dg_frac * self.reference_kw(net)
    }

    /// Storage energy cap in kWh (fraction of the reference load in kW times one hour).
    pub fn storage_cap_kwh(&self, net: &RadialNetwork) -> f64 {
        self.storage_frac * self.reference_kw(net)
    }
}

/// Everything one planning run needs.
#[derive(Debug, Clone)]
pub struct PlanningProblem {
    pub label: String,
    pub net: RadialNetwork,
    pub profiles: DgProfiles,
    pub loads: LoadProfile,
    pub tariff: Tariff,
    pub econ: EconParams,
    pub export: ExportPolicy,
    pub technology: StorageTechnology,
    pub lower: LowerSettings,
    pub caps: PenetrationCaps,
    pub encoding: EncodingSpec,
    pub upper: SwarmConfig,
    /// Penalty scale relative to the no-investment cost.
    pub penalty_multiplier: f64,
}

#[derive(Debug, Clone)]
pub struct PlanningReport {
    pub label: String,
    pub plan: Plan,
    pub genome: Vec<bool>,
    pub cost: CostBreakdown,
    pub fitness: f64,
    pub feasible: bool,
    pub dispatch: Arc<DispatchOutcome>,
    pub history: Vec<IterationRecord>,
    pub evaluations: usize,
}

impl PlanningReport {
    fn from_eval(label: &str, genome: Vec<bool>, e: &Evaluation, history: Vec<IterationRecord>, evaluations: usize) -> Result<Self> {
        let dispatch = e
            .dispatch
            .clone()
            .ok_or_else(|| Error::Encoding("selected plan has no dispatch".into()))?;
        Ok(Self {
            label: label.to_string(),
            plan: e.plan.clone(),
            genome,
            cost: e.cost,
            fitness: e.fitness,
            feasible: e.feasible,
            dispatch,
            history,
            evaluations,
        })
    }
}

fn pick_report(
    ev: &Evaluator,
    best: Vec<bool>,
    history: Vec<IterationRecord>,
    evaluations: usize,
) -> Result<PlanningReport> {
    let label = &ev.problem().label;
    let chosen = ev.evaluate(&best)?;
    if chosen.feasible {
        return PlanningReport::from_eval(label, best, &chosen, history, evaluations);
    }
    // Nothing feasible was found: the empty plan is the fallback.
    let empty = vec![false; best.len()];
    let fallback = ev.evaluate(&empty)?;
    let pick = if fallback.feasible { (empty, fallback) } else { (best, chosen) };
    if !pick.1.feasible {
        log::warn!("{label}: no feasible plan found");
    }
    PlanningReport::from_eval(label, pick.0, &pick.1, history, evaluations)
}

/// Bi-level search: every upper-level fitness call runs the full lower level.
pub fn plan(problem: &PlanningProblem) -> Result<PlanningReport> {
    let ev = Evaluator::new(problem)?;
    plan_with(&ev)
}

pub fn plan_with(ev: &Evaluator) -> Result<PlanningReport> {
    search(ev, &ev.problem().upper)
}

/// Bi-level search with an explicit upper swarm. Repeated runs on one
/// evaluator share its cache of lower-level results.
pub fn search(ev: &Evaluator, upper: &SwarmConfig) -> Result<PlanningReport> {
    let dim = ev.problem().encoding.total_bits();
    if dim == 0 {
        return pick_report(ev, Vec::new(), Vec::new(), 1);
    }
    let out = ibpso::run_seeded(dim, |g| ev.fitness(g), upper, &[vec![false; dim]])?;
    pick_report(ev, out.best, out.history, out.evaluations)
}

/// Two-stage baseline: size DG without storage, freeze it, then size storage.
pub fn sequential_baseline(problem: &PlanningProblem) -> Result<PlanningReport> {
    let ev = Evaluator::new(problem)?;
    sequential_with(&ev)
}

pub fn sequential_with(ev: &Evaluator) -> Result<PlanningReport> {
    let problem = ev.problem();
    let fields = problem.encoding.fields();
    let is_storage = |k: DeviceKind| matches!(k, DeviceKind::StorageEnergy | DeviceKind::StoragePower);
    let mut offsets = Vec::with_capacity(fields.len());
    let mut off = 0;
    for f in fields {
        offsets.push(off..off + f.bits as usize);
        off += f.bits as usize;
    }
    let dg_idx: Vec<usize> = (0..off)
        .filter(|&b| offsets.iter().zip(fields).any(|(r, f)| r.contains(&b) && !is_storage(f.kind)))
        .collect();
    let st_idx: Vec<usize> = (0..off).filter(|b| !dg_idx.contains(b)).collect();
    if st_idx.is_empty() {
        return plan_with(ev);
    }
    let expand = |base: &[bool], idx: &[usize], part: &[bool]| {
        let mut g = base.to_vec();
        for (&i, &b) in idx.iter().zip(part) {
            g[i] = b;
        }
        g
    };
    let zero = vec![false; off];
    let mut history = Vec::new();
    let mut evaluations = 0;
    let mut frozen = zero.clone();
    if !dg_idx.is_empty() {
        let stage1 = ibpso::run_seeded(
            dg_idx.len(),
            |part| ev.fitness(&expand(&zero, &dg_idx, part)),
            &problem.upper,
            &[vec![false; dg_idx.len()]],
        )?;
        frozen = expand(&zero, &dg_idx, &stage1.best);
        history.extend(stage1.history);
        evaluations += stage1.evaluations;
    }
    let cfg = SwarmConfig {
        seed: derive_seed(problem.upper.seed, 2),
        ..problem.upper
    };
    let stage2 = ibpso::run_seeded(
        st_idx.len(),
        |part| ev.fitness(&expand(&frozen, &st_idx, part)),
        &cfg,
        &[vec![false; st_idx.len()]],
    )?;
    let shift = history.len();
    history.extend(stage2.history.iter().map(|r| IterationRecord {
        iteration: r.iteration + shift,
        ..*r
    }));
    evaluations += stage2.evaluations;
    let best = expand(&frozen, &st_idx, &stage2.best);
    pick_report(ev, best, history, evaluations)
}

/// Allocation table: one row per site and device.
pub fn write_allocation_csv(path: &Path, report: &PlanningReport) -> Result<()> {
    let mut w = create(path)?;
    write_allocation(&mut w, report).map_err(|e| Error::io(path, e))?;
    finish(w, path)
}

pub fn write_allocation<W: std::io::Write>(w: &mut W, report: &PlanningReport) -> std::io::Result<()> {
    writeln!(w, "scenario,site,device,capacity")?;
    for s in &report.plan.sites {
        for (device, value) in [
            ("wt_kw", s.wt_kw),
            ("pv_kw", s.pv_kw),
            ("storage_kwh", s.storage_kwh),
            ("storage_kw", s.storage_kw),
        ] {
            writeln!(w, "{},{},{},{}", report.label, s.bus, device, sig6(value))?;
        }
    }
    Ok(())
}
