//! Voltage distribution at the weakest 69-bus node: joint DG and storage
//! plan against a DG-only plan. Uses small swarms so it runs in about a
//! minute; the quantiles are printed side by side.

use adn_planner::planner::{plan, PenetrationCaps};
use adn_planner::runner::{first_order_dominates, load_config, voltage_samples, Scenario};

fn main() -> adn_planner::Result<()> {
    let mut cfg = load_config(concat!(env!("CARGO_MANIFEST_DIR"), "/data/pge69.toml"))?;
    cfg.upper = cfg.upper.with_size(10, 10);
    cfg.lower.swarm = cfg.lower.swarm.with_size(10, 15);
    let bus = cfg.cdf_bus()?;

    let joint = plan(&cfg.problem(Scenario::Joint)?)?;
    let dg_caps = PenetrationCaps {
        storage_frac: 0.0,
        ..cfg.caps
    };
    let dg_only = plan(&cfg.problem_with_caps(Scenario::Joint, dg_caps)?)?;

    let mut a = voltage_samples(&joint.dispatch, &cfg.net, bus)?;
    let mut b = voltage_samples(&dg_only.dispatch, &cfg.net, bus)?;
    println!(
        "bus {bus}: joint plan dominates DG-only plan: {}",
        first_order_dominates(&a, &b, 0.0)
    );
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    println!("quantile  joint    DG-only");
    for k in [0, 10, 24, 48, 72, 86, 95] {
        println!("{:>7.2}   {:.4}   {:.4}", (k as f64 + 0.5) / 96.0, a[k], b[k]);
    }
    Ok(())
}
