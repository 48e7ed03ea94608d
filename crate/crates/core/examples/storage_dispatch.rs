//! Lower level only: a 400 kWh battery at the load end of a two-bus feeder
//! under the default three-tier tariff.

use adn_planner::dispatch::{optimize_dispatch, DispatchProblem, LowerSettings, StorageTechnology};
use adn_planner::economics::Tariff;
use adn_planner::load::LoadProfile;
use adn_planner::plan::{Plan, SiteAllocation};
use adn_planner::sequence::DgProfiles;
use adn_planner::toy::two_bus;

fn main() -> adn_planner::Result<()> {
    let net = two_bus();
    let tech = StorageTechnology::default();
    let plan = Plan::new(vec![SiteAllocation {
        bus: 2,
        storage_kwh: 400.0,
        storage_kw: 100.0,
        ..SiteAllocation::empty(2)
    }]);
    let tariff = Tariff::default_tou();
    let (profiles, loads, settings) = (DgProfiles::zero(), LoadProfile::flat(), LowerSettings::default());
    let problem = DispatchProblem {
        net: &net,
        plan: &plan,
        profiles: &profiles,
        loads: &loads,
        tariff: &tariff,
        technology: &tech,
        settings: &settings,
    };
    let out = optimize_dispatch(&problem)?;
    println!("hour  price   storage kW  loss kW");
    for h in 0..24 {
        let rec = &out.hourly[h];
        println!("{h:>4}  {:.3}  {:>9.2}  {:>7.3}", tariff.price(1, h), rec.storage_kw, rec.loss_kw);
    }
    println!("daily F2 per season: {:?}", out.f2.map(|f| (f * 100.0).round() / 100.0));
    println!("feasible: {}", out.feasible);
    Ok(())
}
