//! Combine probabilistic outputs with sequence convolutions: total output of
//! a wind turbine and a PV array (addition), then the part of a 60 kW load
//! they leave unserved (subtraction, clipped at zero).

use adn_planner::sequence::{discretize, ProbSeq};
use adn_planner::uncertainty::{BetaParams, SolarOutput, WeibullParams, WindOutput, WtCurve};

fn main() -> adn_planner::Result<()> {
    let q = 1.0;
    let wind = discretize(&WindOutput::new(WtCurve::new(3.0, 11.5, 25.0, 50.0)?, WeibullParams::new(2.0, 8.0)?), q)?;
    let solar = discretize(&SolarOutput::Lit(BetaParams::new(2.0, 1.5, 40.0)?), q)?;
    let total = wind.atc(&solar)?;
    println!(
        "E[wind] = {:.2} kW, E[pv] = {:.2} kW, E[total] = {:.2} kW over {} levels",
        wind.expectation(),
        solar.expectation(),
        total.expectation(),
        total.probs().len()
    );

    let mut load = vec![0.0; 61];
    load[60] = 1.0;
    let load = ProbSeq::new(q, load)?;
    let unserved = load.stc(&total)?;
    println!(
        "60 kW load: E[unserved] = {:.2} kW, P(fully served) = {:.3}",
        unserved.expectation(),
        unserved.probs()[0]
    );
    Ok(())
}
