//! Base-case forward-backward sweep on the bundled 69-bus feeder, then the
//! same solve with 900 kW of generation at bus 61.

use adn_planner::grid::{balance_residual, check_limits, solve_power_flow, Injections, RadialNetwork};

fn main() -> adn_planner::Result<()> {
    let net = RadialNetwork::pge69();
    let base = Injections::loads(&net);
    let res = solve_power_flow(&net, &base)?;
    let (weak, v) = res.min_voltage();
    println!(
        "base case: load {:.1} kW, loss {:.2} kW, min voltage {:.4} pu at bus {} ({} sweeps)",
        net.total_load_kw(),
        res.p_loss_kw,
        v,
        net.buses()[weak].id,
        res.iterations
    );
    println!("balance residual {:?} kW/kVar", balance_residual(&res, &base));
    println!("limit violations: {}", check_limits(&res, &net).len());

    let mut dg = Injections::loads(&net);
    dg.add(&net, 61, 900.0, 0.0)?;
    let res = solve_power_flow(&net, &dg)?;
    let (weak, v) = res.min_voltage();
    println!(
        "900 kW at bus 61: loss {:.2} kW, min voltage {:.4} pu at bus {}",
        res.p_loss_kw,
        v,
        net.buses()[weak].id
    );
    Ok(())
}
