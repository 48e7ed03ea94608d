//! Optimal cost as the storage penetration cap grows, on the 5-bus study.

use adn_planner::runner::sweep_storage_penetration;
use adn_planner::toy::five_bus_config;

fn main() -> adn_planner::Result<()> {
    let cfg = five_bus_config(3);
    let fracs = [0.0, 1.0 / 12.0, 2.0 / 12.0, 3.0 / 12.0];
    println!("cap kWh  built kWh  total $");
    for row in sweep_storage_penetration(&cfg, &fracs)? {
        println!(
            "{:>7.0}  {:>9.0}  {:.2}",
            row.storage_frac * cfg.net.total_load_kw(),
            row.report.plan.total_storage_kwh(),
            row.report.cost.total
        );
    }
    Ok(())
}
