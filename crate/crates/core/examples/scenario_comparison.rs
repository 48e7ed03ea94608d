//! The four planning scenarios on a study config (default: the bundled
//! 69-bus study at its reduced swarm settings; takes a few minutes).
//!
//! `cargo run --release --example scenario_comparison -- [config.toml]`

use adn_planner::runner::{load_config, run_scenarios};

fn main() -> adn_planner::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/pge69.toml").to_string());
    let cfg = load_config(&path)?;
    println!("scenario  total $      C1         C2         C3         DG kW  storage kWh");
    for (s, res) in run_scenarios(&cfg, &cfg.scenarios) {
        match res {
            Ok(r) => {
                let c = r.report.cost;
                println!(
                    "{:<8}  {:>10.0}  {:>9.0}  {:>9.0}  {:>10.0}  {:>6.0}  {:>6.0}",
                    s.label(),
                    c.total,
                    c.c1,
                    c.c2,
                    c.c3,
                    r.report.plan.total_dg_kw(),
                    r.report.plan.total_storage_kwh()
                );
            }
            Err(e) => println!("{:<8}  failed: {e}", s.label()),
        }
    }
    Ok(())
}
