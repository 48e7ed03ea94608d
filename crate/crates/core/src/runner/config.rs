//! TOML run configuration.
//!
//! Physical quantities carry their unit in the key name. Every key that is
//! not given falls back to a default, and [`RunConfig::echo`] lists each value
//! with where it came from: the file, a published reference value, or an
//! assumption made for this implementation.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use super::io::{load_profile_csv, load_tariff_csv, load_weather_csv};
use super::Scenario;
use crate::dispatch::{LowerSettings, StorageTechnology};
use crate::economics::{EconParams, ExportPolicy, Tariff};
use crate::error::{ConfigIssue, Error, Result};
use crate::grid::{NetworkSettings, RadialNetwork};
use crate::ibpso::{derive_seed, SwarmConfig};
use crate::load::LoadProfile;
use crate::planner::{CandidateSite, PenetrationCaps, UnitSizes};
use crate::sequence::{hourly_expected_profiles, DgProfiles, WeatherTable};
use crate::uncertainty::WtCurve;

/// Where a configuration value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    File,
    /// Default taken from the published case study.
    Published,
    /// Default chosen for this implementation; no published value exists.
    Assumed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EchoLine {
    pub key: String,
    pub value: String,
    pub origin: Origin,
}

impl fmt::Display for EchoLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.origin {
            Origin::File => "",
            Origin::Published => "  # default (published value)",
            Origin::Assumed => "  # default (assumed, not a published value)",
        };
        write!(f, "{} = {}{}", self.key, self.value, tag)
    }
}

/// A validated run configuration with every input table loaded.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub network_path: PathBuf,
    pub weather_path: PathBuf,
    pub tariff_path: PathBuf,
    pub load_profile_path: Option<PathBuf>,
    pub net: RadialNetwork,
    pub weather: WeatherTable,
    pub profiles: DgProfiles,
    pub tariff: Tariff,
    pub loads: LoadProfile,
    /// Turbine curve per kW of rating.
    pub wt_curve: WtCurve,
    pub step_per_kw: f64,
    pub econ: EconParams,
    pub export: ExportPolicy,
    /// Flat price of the no-investment reference scenario, $/kWh.
    pub baseline_price_per_kwh: f64,
    pub technology: StorageTechnology,
    pub lower: LowerSettings,
    pub upper: SwarmConfig,
    pub caps: PenetrationCaps,
    pub sites: Vec<CandidateSite>,
    pub units: UnitSizes,
    pub penalty_multiplier: f64,
    pub scenarios: Vec<Scenario>,
    pub sweep_storage_fracs: Vec<f64>,
    pub cdf_bus: Option<usize>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub(crate) echo: Vec<EchoLine>,
}

impl RunConfig {
    pub fn echo(&self) -> &[EchoLine] {
        &self.echo
    }

    pub fn echo_text(&self) -> String {
        self.echo.iter().map(|l| format!("{l}\n")).collect()
    }

    /// Re-seed both swarms from a single run seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.upper.seed = seed;
        self.lower.swarm.seed = derive_seed(seed, LOWER_SEED_TAG);
        self
    }
}

const LOWER_SEED_TAG: u64 = 0x4c4f57;

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    config_from_str(&text, base)
}

/// Parse a configuration; relative file paths resolve against `base_dir`.
pub fn config_from_str(text: &str, base_dir: &Path) -> Result<RunConfig> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::parse("config", e.message().to_string()))?;
    let mut r = Reader::default();
    let top = Section {
        path: String::new(),
        table: Some(&root),
    };

    let seed = r.int(&top, "seed", 0, Origin::Assumed, |_| None) as u64;
    let output_dir = base_dir.join(r.string(&top, "output_dir", "out", Origin::Assumed));
    let penalty_multiplier = r.num(&top, "penalty_multiplier", 1e3, Origin::Assumed, positive);
    let scenario_ids = r.int_list(&top, "scenarios", &[1, 2, 3, 4], Origin::Published);
    let mut scenarios = Vec::new();
    for id in scenario_ids {
        match Scenario::from_id(id) {
            Some(s) => scenarios.push(s),
            None => r.issue("scenarios", format!("unknown scenario {id}; expected 1..=4")),
        }
    }

    let files = r.section(&top, "files");
    let network_path = r.path(&files, "network", base_dir, true);
    let weather_path = r.path(&files, "weather", base_dir, true);
    let tariff_path = r.path(&files, "tariff", base_dir, true);
    let load_profile_path = r.path(&files, "load_profile", base_dir, false);
    r.finish(&files);

    let net_sec = r.section(&top, "network");
    let net_defaults = NetworkSettings::default();
    let net_settings = NetworkSettings {
        slack_bus: r.int(&net_sec, "slack_bus", net_defaults.slack_bus as i64, Origin::Published, nonneg) as usize,
        v_base_kv: r.num(&net_sec, "v_base_kv", net_defaults.v_base_kv, Origin::Published, positive),
        s_base_kva: r.num(&net_sec, "s_base_kva", net_defaults.s_base_kva, Origin::Assumed, positive),
        v_slack_pu: r.num(&net_sec, "slack_voltage_pu", net_defaults.v_slack_pu, Origin::Assumed, positive),
        v_min_pu: r.num(&net_sec, "v_min_pu", net_defaults.v_min_pu, Origin::Assumed, positive),
        v_max_pu: r.num(&net_sec, "v_max_pu", net_defaults.v_max_pu, Origin::Assumed, positive),
    };
    if net_settings.v_min_pu >= net_settings.v_max_pu {
        r.issue("network.v_min_pu", "must be below network.v_max_pu");
    }
    r.finish(&net_sec);

    let wt_sec = r.section(&top, "wind_turbine");
    let v_in = r.num(&wt_sec, "cut_in_speed_m_per_s", 3.0, Origin::Assumed, positive);
    let v_rated = r.num(&wt_sec, "rated_speed_m_per_s", 11.5, Origin::Assumed, positive);
    let v_out = r.num(&wt_sec, "cut_out_speed_m_per_s", 25.0, Origin::Assumed, positive);
    let wt_curve = WtCurve::new(v_in, v_rated, v_out, 1.0).unwrap_or_else(|e| {
        r.issue("wind_turbine", e.to_string());
        WtCurve::new(3.0, 11.5, 25.0, 1.0).expect("fallback curve")
    });
    r.finish(&wt_sec);

    let seq_sec = r.section(&top, "sequence");
    let step_per_kw = r.num(&seq_sec, "step_per_kw", 0.01, Origin::Assumed, |v| {
        (!(v > 0.0 && v < 1.0)).then_some("must lie in (0, 1)")
    });
    r.finish(&seq_sec);

    let ec = r.section(&top, "economics");
    let d = EconParams::default();
    let econ = EconParams {
        c_wd_per_kw: r.num(&ec, "wt_capital_per_kw", d.c_wd_per_kw, Origin::Published, nonneg_f),
        c_pv_per_kw: r.num(&ec, "pv_capital_per_kw", d.c_pv_per_kw, Origin::Published, nonneg_f),
        z_per_kwh: r.num(&ec, "dg_energy_om_per_kwh", d.z_per_kwh, Origin::Published, nonneg_f),
        y_coeff: r.num(&ec, "dg_fixed_om_coeff", d.y_coeff, Origin::Published, nonneg_f),
        c_f: r.num(&ec, "wt_recovery_factor", d.c_f, Origin::Published, nonneg_f),
        c_g: r.num(&ec, "pv_recovery_factor", d.c_g, Origin::Published, nonneg_f),
        c_e: r.num(&ec, "storage_recovery_factor", d.c_e, Origin::Published, nonneg_f),
        c_st_inse_per_kw: r.num(&ec, "storage_power_capital_per_kw", d.c_st_inse_per_kw, Origin::Published, nonneg_f),
        c_st_inss_per_kwh: r.num(&ec, "storage_energy_capital_per_kwh", d.c_st_inss_per_kwh, Origin::Published, nonneg_f),
        c_st_om_per_kwh: r.num(&ec, "storage_om_per_kwh", d.c_st_om_per_kwh, Origin::Published, nonneg_f),
    };
    let baseline_price_per_kwh = r.num(&ec, "baseline_price_per_kwh", 0.05, Origin::Published, positive);
    let export = match r.string(&ec, "export_policy", "net_metering", Origin::Assumed).as_str() {
        "net_metering" => ExportPolicy::NetMetering,
        "clamp" => ExportPolicy::Clamp,
        other => {
            r.issue("economics.export_policy", format!("expected net_metering or clamp, got {other:?}"));
            ExportPolicy::NetMetering
        }
    };
    r.finish(&ec);

    let st = r.section(&top, "storage");
    let td = StorageTechnology::default();
    let technology = StorageTechnology {
        eta_ch: r.num(&st, "charge_efficiency", td.eta_ch, Origin::Assumed, fraction),
        eta_dc: r.num(&st, "discharge_efficiency", td.eta_dc, Origin::Assumed, fraction),
        soc_min_frac: r.num(&st, "soc_min_frac", td.soc_min_frac, Origin::Assumed, unit_interval),
        soc_max_frac: r.num(&st, "soc_max_frac", td.soc_max_frac, Origin::Assumed, unit_interval),
        soc_init_frac: r.num(&st, "soc_init_frac", td.soc_init_frac, Origin::Assumed, unit_interval),
        hours_at_rating: r.num(&st, "hours_at_rating_h", td.hours_at_rating, Origin::Assumed, |v| {
            (v < 1.0).then_some("must be >= 1 h")
        }),
    };
    if let Err(e) = technology.validate() {
        r.issue("storage", e.to_string());
    }
    r.finish(&st);

    let caps_sec = r.section(&top, "caps");
    let caps = PenetrationCaps {
        dg_frac: r.num(&caps_sec, "dg_frac", 0.30, Origin::Published, nonneg_f),
        storage_frac: r.num(&caps_sec, "storage_frac", 0.10, Origin::Published, nonneg_f),
        ref_load_kw: r.opt_num(&caps_sec, "ref_load_kw", positive),
    };
    r.finish(&caps_sec);

    let enc = r.section(&top, "encoding");
    let ud = UnitSizes::default();
    let units = UnitSizes {
        dg_kw: r.num(&enc, "dg_unit_kw", ud.dg_kw, Origin::Assumed, positive),
        storage_kwh: r.num(&enc, "storage_unit_kwh", ud.storage_kwh, Origin::Assumed, positive),
        storage_kw: r.num(&enc, "storage_unit_kw", ud.storage_kw, Origin::Assumed, positive),
        storage_power_bits: r.int(&enc, "storage_power_bits", ud.storage_power_bits as i64, Origin::Assumed, |v| {
            (v > 16).then_some("must be at most 16")
        }) as u32,
    };
    r.finish(&enc);

    let sites = r.sites(&root);

    let upper_sec = r.section(&top, "upper");
    let upper = r.swarm(&upper_sec, seed);
    r.finish(&upper_sec);

    let lower_sec = r.section(&top, "lower");
    let ld = LowerSettings::default();
    let bits = r.int(&lower_sec, "bits", ld.bits as i64, Origin::Assumed, |v| {
        (!(2..=8).contains(&v)).then_some("must lie in 2..=8")
    }) as u32;
    let penalty_factor = r.num(&lower_sec, "penalty_factor", ld.penalty_factor, Origin::Assumed, positive);
    let dg_power_factor = r.num(&lower_sec, "dg_power_factor", ld.dg_power_factor, Origin::Assumed, |v| {
        (!(v > 0.0 && v <= 1.0)).then_some("must lie in (0, 1]")
    });
    let lower_swarm_sec = r.section(&lower_sec, "swarm");
    let lower_swarm = r.swarm(&lower_swarm_sec, derive_seed(seed, LOWER_SEED_TAG));
    r.finish(&lower_swarm_sec);
    r.finish(&lower_sec);
    let lower = LowerSettings {
        bits,
        swarm: lower_swarm,
        dg_power_factor,
        penalty_factor,
    };

    let sweep = r.section(&top, "sweep");
    let sweep_storage_fracs = r.num_list(&sweep, "storage_fracs", &[0.1, 0.2, 0.3], Origin::Published);
    if sweep_storage_fracs.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
        r.issue("sweep.storage_fracs", "fractions must be finite and >= 0");
    }
    r.finish(&sweep);

    let cdf = r.section(&top, "voltage_cdf");
    let cdf_bus = r.opt_int(&cdf, "bus").map(|b| b as usize);
    r.finish(&cdf);
    r.finish(&top);

    // Input tables are only read once the keys themselves are valid.
    if !r.issues.is_empty() {
        return Err(Error::Config(r.issues));
    }
    let (network_path, weather_path, tariff_path) = (
        network_path.expect("checked"),
        weather_path.expect("checked"),
        tariff_path.expect("checked"),
    );
    let mut table_issues = Vec::new();
    let mut note = |key: &str, e: Error| table_issues.push(ConfigIssue::new(key, e.to_string()));
    let net = RadialNetwork::from_csv_path(&network_path, net_settings).map_err(|e| note("files.network", e)).ok();
    let weather = load_weather_csv(&weather_path).map_err(|e| note("files.weather", e)).ok();
    let tariff = load_tariff_csv(&tariff_path).map_err(|e| note("files.tariff", e)).ok();
    let loads = match &load_profile_path {
        Some(p) => load_profile_csv(p).map_err(|e| note("files.load_profile", e)).ok(),
        None => Some(LoadProfile::flat()),
    };
    if let Some(net) = &net {
        for s in &sites {
            if net.bus_index(s.bus).is_err() {
                note("sites", Error::UnknownBus(s.bus));
            }
        }
        if let Some(b) = cdf_bus {
            if net.bus_index(b).is_err() {
                note("voltage_cdf.bus", Error::UnknownBus(b));
            }
        }
    }
    let (Some(net), Some(weather), Some(tariff), Some(loads)) = (net, weather, tariff, loads) else {
        return Err(Error::Config(table_issues));
    };
    if !table_issues.is_empty() {
        return Err(Error::Config(table_issues));
    }
    let profiles = hourly_expected_profiles(&weather, &wt_curve, step_per_kw)?;

    Ok(RunConfig {
        network_path,
        weather_path,
        tariff_path,
        load_profile_path,
        net,
        weather,
        profiles,
        tariff,
        loads,
        wt_curve,
        step_per_kw,
        econ,
        export,
        baseline_price_per_kwh,
        technology,
        lower,
        upper,
        caps,
        sites,
        units,
        penalty_multiplier,
        scenarios,
        sweep_storage_fracs,
        cdf_bus,
        seed,
        output_dir,
        echo: r.echo,
    })
}

fn positive(v: f64) -> Option<&'static str> {
    (!(v > 0.0)).then_some("must be > 0")
}

fn nonneg_f(v: f64) -> Option<&'static str> {
    (!(v >= 0.0)).then_some("must be >= 0")
}

fn nonneg(v: i64) -> Option<&'static str> {
    (v < 0).then_some("must be >= 0")
}

fn fraction(v: f64) -> Option<&'static str> {
    (!(v > 0.0 && v <= 1.0)).then_some("must lie in (0, 1]")
}

fn unit_interval(v: f64) -> Option<&'static str> {
    (!(0.0..=1.0).contains(&v)).then_some("must lie in [0, 1]")
}

struct Section<'t> {
    path: String,
    table: Option<&'t Table>,
}

impl<'t> Section<'t> {
    fn key(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn get(&self, key: &str) -> Option<&'t Value> {
        self.table.and_then(|t| t.get(key))
    }
}

#[derive(Default)]
struct Reader {
    issues: Vec<ConfigIssue>,
    echo: Vec<EchoLine>,
    used: BTreeSet<String>,
}

impl Reader {
    fn issue(&mut self, key: impl Into<String>, msg: impl Into<String>) {
        self.issues.push(ConfigIssue::new(key, msg));
    }

    fn record(&mut self, key: String, value: String, origin: Origin) {
        self.used.insert(key.clone());
        self.echo.push(EchoLine { key, value, origin });
    }

    fn section<'t>(&mut self, parent: &Section<'t>, name: &str) -> Section<'t> {
        let key = parent.key(name);
        self.used.insert(key.clone());
        let table = match parent.get(name) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.issue(key.clone(), "must be a table");
                None
            }
        };
        Section { path: key, table }
    }

    /// Flag keys of `sec` that no reader consumed.
    fn finish(&mut self, sec: &Section) {
        let Some(t) = sec.table else { return };
        for k in t.keys() {
            let full = sec.key(k);
            if !self.used.contains(&full) {
                self.issue(full, "unknown key");
            }
        }
    }

    fn num(
        &mut self,
        sec: &Section,
        key: &str,
        default: f64,
        origin: Origin,
        check: impl Fn(f64) -> Option<&'static str>,
    ) -> f64 {
        let full = sec.key(key);
        let (v, origin) = match sec.get(key) {
            None => (default, origin),
            Some(Value::Float(f)) => (*f, Origin::File),
            Some(Value::Integer(i)) => (*i as f64, Origin::File),
            Some(_) => {
                self.issue(full.clone(), "must be a number");
                (default, Origin::File)
            }
        };
        if let Some(msg) = check(v) {
            self.issue(full.clone(), format!("{msg} (got {v})"));
        }
        self.record(full, v.to_string(), origin);
        v
    }

    fn opt_num(&mut self, sec: &Section, key: &str, check: impl Fn(f64) -> Option<&'static str>) -> Option<f64> {
        let full = sec.key(key);
        self.used.insert(full.clone());
        let v = match sec.get(key) {
            None => {
                self.record(full, "unset".into(), Origin::Assumed);
                return None;
            }
            Some(Value::Float(f)) => *f,
            Some(Value::Integer(i)) => *i as f64,
            Some(_) => {
                self.issue(full, "must be a number");
                return None;
            }
        };
        if let Some(msg) = check(v) {
            self.issue(full.clone(), format!("{msg} (got {v})"));
        }
        self.record(full, v.to_string(), Origin::File);
        Some(v)
    }

    fn int(&mut self, sec: &Section, key: &str, default: i64, origin: Origin, check: impl Fn(i64) -> Option<&'static str>) -> i64 {
        let full = sec.key(key);
        let (v, origin) = match sec.get(key) {
            None => (default, origin),
            Some(Value::Integer(i)) => (*i, Origin::File),
            Some(_) => {
                self.issue(full.clone(), "must be an integer");
                (default, Origin::File)
            }
        };
        if let Some(msg) = check(v) {
            self.issue(full.clone(), format!("{msg} (got {v})"));
        }
        self.record(full, v.to_string(), origin);
        v
    }

    fn opt_int(&mut self, sec: &Section, key: &str) -> Option<i64> {
        let full = sec.key(key);
        self.used.insert(full.clone());
        match sec.get(key) {
            None => {
                self.record(full, "unset".into(), Origin::Assumed);
                None
            }
            Some(Value::Integer(i)) if *i >= 0 => {
                self.record(full, i.to_string(), Origin::File);
                Some(*i)
            }
            Some(_) => {
                self.issue(full, "must be a non-negative integer");
                None
            }
        }
    }

    fn string(&mut self, sec: &Section, key: &str, default: &str, origin: Origin) -> String {
        let full = sec.key(key);
        let (v, origin) = match sec.get(key) {
            None => (default.to_string(), origin),
            Some(Value::String(s)) => (s.clone(), Origin::File),
            Some(_) => {
                self.issue(full.clone(), "must be a string");
                (default.to_string(), Origin::File)
            }
        };
        self.record(full, format!("{v:?}"), origin);
        v
    }

    fn path(&mut self, sec: &Section, key: &str, base: &Path, required: bool) -> Option<PathBuf> {
        let full = sec.key(key);
        self.used.insert(full.clone());
        match sec.get(key) {
            None if required => {
                self.issue(full, "required file path is missing");
                None
            }
            None => {
                self.record(full, "unset (flat nominal loads)".into(), Origin::Assumed);
                None
            }
            Some(Value::String(s)) => {
                let p = base.join(s);
                if !p.is_file() {
                    self.issue(full.clone(), format!("file not found: {}", p.display()));
                }
                self.record(full, format!("{s:?}"), Origin::File);
                Some(p)
            }
            Some(_) => {
                self.issue(full, "must be a file path string");
                None
            }
        }
    }

    fn list(&mut self, sec: &Section, key: &str) -> Option<Vec<Value>> {
        match sec.get(key) {
            None => None,
            Some(Value::Array(a)) => Some(a.clone()),
            Some(_) => {
                self.issue(sec.key(key), "must be an array");
                Some(Vec::new())
            }
        }
    }

    fn num_list(&mut self, sec: &Section, key: &str, default: &[f64], origin: Origin) -> Vec<f64> {
        let full = sec.key(key);
        let (v, origin) = match self.list(sec, key) {
            None => (default.to_vec(), origin),
            Some(a) => {
                let mut out = Vec::new();
                for x in a {
                    match x {
                        Value::Float(f) => out.push(f),
                        Value::Integer(i) => out.push(i as f64),
                        _ => self.issue(full.clone(), "entries must be numbers"),
                    }
                }
                (out, Origin::File)
            }
        };
        self.record(full, format!("{v:?}"), origin);
        v
    }

    fn int_list(&mut self, sec: &Section, key: &str, default: &[i64], origin: Origin) -> Vec<i64> {
        let full = sec.key(key);
        let (v, origin) = match self.list(sec, key) {
            None => (default.to_vec(), origin),
            Some(a) => {
                let mut out = Vec::new();
                for x in a {
                    match x {
                        Value::Integer(i) => out.push(i),
                        _ => self.issue(full.clone(), "entries must be integers"),
                    }
                }
                (out, Origin::File)
            }
        };
        self.record(full, format!("{v:?}"), origin);
        v
    }

    fn bool(&mut self, sec: &Section, key: &str) -> bool {
        let full = sec.key(key);
        self.used.insert(full.clone());
        match sec.get(key) {
            None => true,
            Some(Value::Boolean(b)) => *b,
            Some(_) => {
                self.issue(full, "must be true or false");
                true
            }
        }
    }

    fn sites(&mut self, root: &Table) -> Vec<CandidateSite> {
        self.used.insert("sites".into());
        let Some(v) = root.get("sites") else {
            let sites: Vec<CandidateSite> = [49, 50, 61, 64].into_iter().map(CandidateSite::all).collect();
            self.record("sites".into(), "buses [49, 50, 61, 64], all devices".into(), Origin::Published);
            return sites;
        };
        let Value::Array(items) = v else {
            self.issue("sites", "must be an array of tables ([[sites]])");
            return Vec::new();
        };
        let mut out = Vec::new();
        for (i, item) in items.iter().enumerate() {
            let path = format!("sites[{i}]");
            let Value::Table(t) = item else {
                self.issue(path, "must be a table");
                continue;
            };
            let sec = Section {
                path: path.clone(),
                table: Some(t),
            };
            let bus = match t.get("bus") {
                Some(Value::Integer(b)) if *b > 0 => *b as usize,
                _ => {
                    self.issue(format!("{path}.bus"), "required positive integer");
                    0
                }
            };
            self.used.insert(sec.key("bus"));
            let site = CandidateSite {
                bus,
                allow_wt: self.bool(&sec, "allow_wt"),
                allow_pv: self.bool(&sec, "allow_pv"),
                allow_storage: self.bool(&sec, "allow_storage"),
            };
            self.record(
                path.clone(),
                format!(
                    "bus {} (wt {}, pv {}, storage {})",
                    site.bus, site.allow_wt, site.allow_pv, site.allow_storage
                ),
                Origin::File,
            );
            self.finish(&sec);
            out.push(site);
        }
        if out.is_empty() {
            self.issue("sites", "at least one candidate site is required");
        }
        out
    }

    fn swarm(&mut self, sec: &Section, seed: u64) -> SwarmConfig {
        let d = SwarmConfig::default();
        let count = |v: i64| (v < 1).then_some("must be >= 1");
        let cfg = SwarmConfig {
            n_particles: self.int(sec, "n_particles", d.n_particles as i64, Origin::Published, count) as usize,
            max_iter: self.int(sec, "max_iter", d.max_iter as i64, Origin::Assumed, count) as usize,
            w_max: self.num(sec, "w_max", d.w_max, Origin::Published, nonneg_f),
            w_min: self.num(sec, "w_min", d.w_min, Origin::Published, nonneg_f),
            c1: self.num(sec, "c1", d.c1, Origin::Assumed, nonneg_f),
            c2: self.num(sec, "c2", d.c2, Origin::Assumed, nonneg_f),
            v_clamp: self.num(sec, "v_clamp", d.v_clamp, Origin::Assumed, positive),
            low_thr: self.num(sec, "low_thr", d.low_thr, Origin::Published, positive),
            up_thr: self.num(sec, "up_thr", d.up_thr, Origin::Published, positive),
            seed,
            chaos_warmup: self.int(sec, "chaos_warmup", d.chaos_warmup as i64, Origin::Assumed, nonneg) as usize,
        };
        if let Err(e) = cfg.validate() {
            self.issue(sec.path.clone(), e.to_string());
        }
        cfg
    }
}
