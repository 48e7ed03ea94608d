//! Full bi-level planning on the small 5-bus study, compared with the
//! two-stage baseline that sizes DG first and storage afterwards.

use adn_planner::planner::{plan, sequential_baseline, PlanningReport};
use adn_planner::runner::Scenario;
use adn_planner::toy::five_bus_config;

fn show(name: &str, r: &PlanningReport) {
    println!(
        "{name}: total {:.2} $ (C1 {:.2}, C2 {:.2}, C3 {:.2}), {} evaluations",
        r.cost.total, r.cost.c1, r.cost.c2, r.cost.c3, r.evaluations
    );
    for s in &r.plan.sites {
        println!(
            "  bus {}: WT {} kW, PV {} kW, storage {} kWh / {} kW",
            s.bus, s.wt_kw, s.pv_kw, s.storage_kwh, s.storage_kw
        );
    }
}

fn main() -> adn_planner::Result<()> {
    let cfg = five_bus_config(7);
    let problem = cfg.problem(Scenario::Joint)?;
    println!("{} genome bits", problem.encoding.total_bits());
    show("bi-level", &plan(&problem)?);
    show("sequential", &sequential_baseline(&problem)?);
    Ok(())
}
