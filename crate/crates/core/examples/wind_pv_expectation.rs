//! Expected per-kW output of a wind turbine and a PV array for one
//! representative hour, then the 96-slot profile of the bundled weather.

use adn_planner::runner::load_weather_csv;
use adn_planner::sequence::{discretize, hourly_expected_profiles};
use adn_planner::uncertainty::{BetaParams, SolarOutput, WeibullParams, WindOutput, WtCurve};

fn main() -> adn_planner::Result<()> {
    let curve = WtCurve::new(3.0, 11.5, 25.0, 1.0)?;
    let q = 0.01;

    let wind = WindOutput::new(curve, WeibullParams::new(2.2, 9.0)?);
    let seq = discretize(&wind, q)?;
    println!(
        "wind (t=2.2, gamma=9): P(0) = {:.4}, P(rated) = {:.4}, E = {:.4} kW/kW (closed form {:.4})",
        seq.probs()[0],
        seq.probs()[seq.len_index()],
        seq.expectation(),
        wind.mean()
    );

    let pv = SolarOutput::Lit(BetaParams::from_moments(0.6, 0.05, 1.0)?);
    println!("pv (mu=0.6, var=0.05): E = {:.4} kW/kW", discretize(&pv, q)?.expectation());

    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/weather_default.csv");
    let profiles = hourly_expected_profiles(&load_weather_csv(path.as_ref())?, &curve, q)?;
    println!("\nhour  wind(s1) pv(s1)  wind(s3) pv(s3)");
    for h in (0..24).step_by(3) {
        println!(
            "{h:>4}  {:.3}    {:.3}   {:.3}    {:.3}",
            profiles.wt(1, h),
            profiles.pv(1, h),
            profiles.wt(3, h),
            profiles.pv(3, h)
        );
    }
    Ok(())
}
