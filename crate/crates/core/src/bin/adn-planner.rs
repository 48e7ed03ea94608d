use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use adn_planner::dispatch::{optimize_dispatch, write_dispatch_csv, DispatchProblem};
use adn_planner::grid::{solve_power_flow, Injections};
use adn_planner::plan::Plan;
use adn_planner::report::sig6;
use adn_planner::runner::{
    emit_voltage_cdf, load_config, plan_from_allocation_csv_str, run_scenario, run_scenarios, run_sequential,
    sweep_storage_penetration, write_scenario_outputs, write_sweep_csv, write_voltage_cdf_csv, RunConfig, Scenario,
    ScenarioResult,
};

#[derive(Parser)]
#[command(version, about = "Joint DG and storage planning for radial distribution networks")]
struct Cli {
    /// Study configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Scenario ids 1-4; repeat for several. Defaults to the configured list.
    #[arg(long, global = true)]
    scenario: Vec<i64>,
    /// Skip printing the resolved configuration.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one power flow: the base case, or a plan's DG at one slot.
    Powerflow {
        /// Allocation CSV whose DG output is added at the chosen slot.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        season: usize,
        #[arg(long, default_value_t = 12)]
        hour: usize,
    },
    /// Optimize storage dispatch for a fixed allocation.
    Dispatch {
        #[arg(long)]
        plan: PathBuf,
    },
    /// Bi-level plan for one scenario.
    Plan {
        /// Use the two-stage baseline instead (DG first, then storage).
        #[arg(long)]
        sequential: bool,
    },
    /// Plan every selected scenario and compare costs.
    Scenarios,
    /// Repeat joint planning across storage penetration caps.
    Sweep {
        /// Storage caps as fractions of the reference load; defaults to the config.
        #[arg(long, value_delimiter = ',')]
        fracs: Vec<f64>,
    },
    /// Plan one scenario and write the voltage CDF of a bus.
    VoltageCdf {
        /// Defaults to the configured bus, else the weakest base-case bus.
        #[arg(long)]
        bus: Option<usize>,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let Some(path) = &cli.config else {
        bail!("--config is required");
    };
    let mut cfg = load_config(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(out) = &cli.out {
        cfg.output_dir.clone_from(out);
    }
    if !cli.quiet {
        print!("{}", cfg.echo_text());
    }
    let scenarios = selected(&cfg, &cli.scenario)?;
    let out = cfg.output_dir.clone();
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;

    match cli.command {
        Command::Powerflow { plan, season, hour } => powerflow(&cfg, plan.as_deref(), season, hour, &out),
        Command::Dispatch { plan } => dispatch(&cfg, &plan, &out),
        Command::Plan { sequential } => {
            let s = single(&scenarios)?;
            let r = if sequential {
                let mut r = run_sequential(&cfg, s)?;
                r.report.label.push_str("-sequential");
                r
            } else {
                run_scenario(&cfg, s)?
            };
            finish(&out, &[r])
        }
        Command::Scenarios => {
            let mut ok = Vec::new();
            let mut failed = 0;
            for (s, r) in run_scenarios(&cfg, &scenarios) {
                match r {
                    Ok(r) => ok.push(r),
                    Err(e) => {
                        eprintln!("{}: {e}", s.label());
                        failed += 1;
                    }
                }
            }
            finish(&out, &ok)?;
            if failed > 0 {
                bail!("{failed} scenario(s) failed");
            }
            Ok(())
        }
        Command::Sweep { fracs } => {
            let fracs = if fracs.is_empty() { cfg.sweep_storage_fracs.clone() } else { fracs };
            let rows = sweep_storage_penetration(&cfg, &fracs)?;
            println!("storage_frac,storage_kwh,total");
            for r in &rows {
                println!(
                    "{},{},{}",
                    r.storage_frac,
                    sig6(r.report.plan.total_storage_kwh()),
                    sig6(r.report.cost.total)
                );
            }
            let path = out.join("sweep.csv");
            write_sweep_csv(&path, &rows)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::VoltageCdf { bus } => {
            let s = single(&scenarios)?;
            let r = run_scenario(&cfg, s)?;
            let bus = bus.unwrap_or(r.cdf_bus);
            let cdf = emit_voltage_cdf(&r.report.dispatch, &cfg.net, bus)?;
            let path = out.join(format!("voltage_cdf_{}_bus{bus}.csv", s.label()));
            write_voltage_cdf_csv(&path, &cdf)?;
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn selected(cfg: &RunConfig, ids: &[i64]) -> Result<Vec<Scenario>> {
    if ids.is_empty() {
        return Ok(cfg.scenarios.clone());
    }
    ids.iter()
        .map(|&id| Scenario::from_id(id).with_context(|| format!("unknown scenario {id}; use 1-4")))
        .collect()
}

/// Single-scenario commands default to the joint scenario.
fn single(scenarios: &[Scenario]) -> Result<Scenario> {
    match scenarios {
        [s] => Ok(*s),
        _ if scenarios.contains(&Scenario::Joint) => Ok(Scenario::Joint),
        [first, ..] => Ok(*first),
        [] => bail!("no scenario selected"),
    }
}

fn read_plan(cfg: &RunConfig, path: &Path) -> Result<Plan> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(plan_from_allocation_csv_str(&text, cfg.technology.hours_at_rating)?)
}

fn powerflow(cfg: &RunConfig, plan: Option<&Path>, season: usize, hour: usize, out: &Path) -> Result<()> {
    if !(1..=4).contains(&season) || hour > 23 {
        bail!("slot must be season 1-4, hour 0-23");
    }
    let mut inj = Injections::scaled_loads(&cfg.net, cfg.loads.factor(season, hour));
    if let Some(path) = plan {
        let plan = read_plan(cfg, path)?;
        for s in &plan.sites {
            let p = s.wt_kw * cfg.profiles.wt(season, hour) + s.pv_kw * cfg.profiles.pv(season, hour);
            inj.add(&cfg.net, s.bus, p, 0.0)?;
        }
    }
    let res = solve_power_flow(&cfg.net, &inj)?;
    let (weak, v_min) = res.min_voltage();
    println!(
        "loss {} kW, {} kVar; slack {} kW; min voltage {} pu at bus {}; {} sweeps",
        sig6(res.p_loss_kw),
        sig6(res.q_loss_kvar),
        sig6(res.slack_p_kw),
        sig6(v_min),
        cfg.net.buses()[weak].id,
        res.iterations
    );
    let path = out.join("powerflow.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["bus", "v_pu", "angle_rad"])?;
    for (i, bus) in cfg.net.buses().iter().enumerate() {
        w.write_record([bus.id.to_string(), sig6(res.v_mag[i]), sig6(res.v_angle_rad[i])])?;
    }
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(())
}

fn dispatch(cfg: &RunConfig, plan_path: &Path, out: &Path) -> Result<()> {
    let plan = read_plan(cfg, plan_path)?;
    let dp = DispatchProblem {
        net: &cfg.net,
        plan: &plan,
        profiles: &cfg.profiles,
        loads: &cfg.loads,
        tariff: &cfg.tariff,
        technology: &cfg.technology,
        settings: &cfg.lower,
    };
    let outcome = optimize_dispatch(&dp)?;
    for (s, f2) in outcome.f2.iter().enumerate() {
        println!("season {}: daily F2 {} $", s + 1, sig6(*f2));
    }
    if !outcome.feasible {
        eprintln!("warning: some season fell back to an infeasible schedule");
    }
    let path = out.join("dispatch.csv");
    write_dispatch_csv(&path, &outcome)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn finish(out: &Path, results: &[ScenarioResult]) -> Result<()> {
    println!("scenario,c1,c2,c3,total,dg_kw,storage_kwh");
    for r in results {
        let c = &r.report.cost;
        println!(
            "{},{},{},{},{},{},{}",
            r.report.label,
            sig6(c.c1),
            sig6(c.c2),
            sig6(c.c3),
            sig6(c.total),
            sig6(r.report.plan.total_dg_kw()),
            sig6(r.report.plan.total_storage_kwh())
        );
    }
    let refs: Vec<&ScenarioResult> = results.iter().collect();
    let files = write_scenario_outputs(out, &refs)?;
    println!("wrote {} files under {}", files.len(), out.display());
    Ok(())
}
