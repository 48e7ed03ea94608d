use std::collections::{HashMap, VecDeque};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Bundled PG&E 69-bus feeder (branch impedances in ohms, loads in kW/kVar).
pub const PGE69_CSV: &str = include_str!("../../data/pge69.csv");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bus {
    pub id: usize,
    pub p_load_kw: f64,
    pub q_load_kvar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    pub r_ohm: f64,
    pub x_ohm: f64,
    pub i_max_a: Option<f64>,
}

/// Electrical base values and the operating voltage band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkSettings {
    pub slack_bus: usize,
    pub v_base_kv: f64,
    pub s_base_kva: f64,
    pub v_slack_pu: f64,
    pub v_min_pu: f64,
    pub v_max_pu: f64,
}

impl Default for NetworkSettings {
    fn default() -> Self {
        Self {
            slack_bus: 1,
            v_base_kv: 12.66,
            s_base_kva: 1000.0,
            v_slack_pu: 1.0,
            v_min_pu: 0.90,
            v_max_pu: 1.05,
        }
    }
}

/// A radial feeder: a tree of branches rooted at the slack bus.
#[derive(Debug, Clone)]
pub struct RadialNetwork {
    buses: Vec<Bus>,
    branches: Vec<Branch>,
    settings: NetworkSettings,
    index: HashMap<usize, usize>,
    slack: usize,
    /// Bus indices in breadth-first order from the slack.
    order: Vec<usize>,
    /// Branch feeding each bus (None for the slack).
    parent_branch: Vec<Option<usize>>,
    /// (upstream bus index, downstream bus index) per branch.
    ends: Vec<(usize, usize)>,
}

impl RadialNetwork {
    pub fn new(buses: Vec<Bus>, branches: Vec<Branch>, settings: NetworkSettings) -> Result<Self> {
        if buses.is_empty() {
            return Err(Error::Topology("network has no buses".into()));
        }
        if !(settings.v_base_kv > 0.0 && settings.s_base_kva > 0.0) {
            return Err(Error::ParameterDomain("base voltage and power must be > 0".into()));
        }
        if !(settings.v_min_pu < settings.v_max_pu) {
            return Err(Error::ParameterDomain("v_min_pu must be below v_max_pu".into()));
        }
        let mut index = HashMap::with_capacity(buses.len());
        for (i, bus) in buses.iter().enumerate() {
            if index.insert(bus.id, i).is_some() {
                return Err(Error::Topology(format!("duplicate bus id {}", bus.id)));
            }
            if bus.p_load_kw < 0.0 || bus.q_load_kvar < 0.0 {
                return Err(Error::ParameterDomain(format!(
                    "bus {} has a negative load",
                    bus.id
                )));
            }
        }
        let slack = *index
            .get(&settings.slack_bus)
            .ok_or(Error::Topology(format!(
                "slack bus {} is not in the bus list",
                settings.slack_bus
            )))?;
        if branches.len() + 1 != buses.len() {
            return Err(Error::Topology(format!(
                "a radial network with {} buses needs {} branches, found {}",
                buses.len(),
                buses.len() - 1,
                branches.len()
            )));
        }
        let mut adjacency = vec![Vec::new(); buses.len()];
        for (k, br) in branches.iter().enumerate() {
            if br.r_ohm < 0.0 || br.x_ohm < 0.0 {
                return Err(Error::ParameterDomain(format!(
                    "branch {}-{} has negative impedance",
                    br.from, br.to
                )));
            }
            let a = *index.get(&br.from).ok_or(Error::UnknownBus(br.from))?;
            let b = *index.get(&br.to).ok_or(Error::UnknownBus(br.to))?;
            if a == b {
                return Err(Error::Topology(format!("branch {}-{} is a self loop", br.from, br.to)));
            }
            adjacency[a].push((k, b));
            adjacency[b].push((k, a));
        }
        let mut parent_branch = vec![None; buses.len()];
        let mut ends = vec![(usize::MAX, usize::MAX); branches.len()];
        let mut seen = vec![false; buses.len()];
        let mut order = Vec::with_capacity(buses.len());
        let mut queue = VecDeque::from([slack]);
        seen[slack] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &(k, v) in &adjacency[u] {
                if parent_branch[u] == Some(k) {
                    continue;
                }
                if seen[v] {
                    return Err(Error::Topology(format!(
                        "branch {}-{} closes a loop",
                        branches[k].from, branches[k].to
                    )));
                }
                seen[v] = true;
                parent_branch[v] = Some(k);
                ends[k] = (u, v);
                queue.push_back(v);
            }
        }
        if order.len() != buses.len() {
            let missing = seen.iter().position(|s| !s).map(|i| buses[i].id).unwrap_or(0);
            return Err(Error::Topology(format!("bus {missing} is not connected to the slack")));
        }
        Ok(Self {
            buses,
            branches,
            settings,
            index,
            slack,
            order,
            parent_branch,
            ends,
        })
    }

    /// Parse the sectioned CSV format (`[branches]` then `[buses]`).
    pub fn from_csv_str(text: &str, settings: NetworkSettings) -> Result<Self> {
        let (branches, buses) = parse_sections(text, "network")?;
        Self::new(buses, branches, settings)
    }

    pub fn from_csv_path(path: impl AsRef<Path>, settings: NetworkSettings) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let (branches, buses) = parse_sections(&text, &path.display().to_string())?;
        Self::new(buses, branches, settings)
    }

    /// The bundled 69-bus feeder with default settings.
    pub fn pge69() -> Self {
        Self::from_csv_str(PGE69_CSV, NetworkSettings::default())
            .expect("bundled 69-bus data is valid")
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn settings(&self) -> &NetworkSettings {
        &self.settings
    }

    pub fn with_voltage_band(mut self, v_min_pu: f64, v_max_pu: f64) -> Result<Self> {
        if !(v_min_pu < v_max_pu) {
            return Err(Error::ParameterDomain("v_min_pu must be below v_max_pu".into()));
        }
        self.settings.v_min_pu = v_min_pu;
        self.settings.v_max_pu = v_max_pu;
        Ok(self)
    }

    /// Copy with a branch current limit set (used by limit tests and configs).
    pub fn with_branch_limit(mut self, from: usize, to: usize, i_max_a: Option<f64>) -> Result<Self> {
        let br = self
            .branches
            .iter_mut()
            .find(|b| (b.from == from && b.to == to) || (b.from == to && b.to == from))
            .ok_or_else(|| Error::Topology(format!("no branch {from}-{to}")))?;
        br.i_max_a = i_max_a;
        Ok(self)
    }

    pub fn bus_count(&self) -> usize {
        self.buses.len()
    }

    pub fn bus_index(&self, id: usize) -> Result<usize> {
        self.index.get(&id).copied().ok_or(Error::UnknownBus(id))
    }

    pub fn slack_index(&self) -> usize {
        self.slack
    }

    pub fn total_load_kw(&self) -> f64 {
        self.buses.iter().map(|b| b.p_load_kw).sum()
    }

    pub fn total_load_kvar(&self) -> f64 {
        self.buses.iter().map(|b| b.q_load_kvar).sum()
    }

    /// Impedance base in ohms.
    pub fn z_base_ohm(&self) -> f64 {
        self.settings.v_base_kv * self.settings.v_base_kv * 1000.0 / self.settings.s_base_kva
    }

    /// Current base in amperes (three-phase, line-to-line base voltage).
    pub fn i_base_a(&self) -> f64 {
        self.settings.s_base_kva / (3f64.sqrt() * self.settings.v_base_kv)
    }

    pub(crate) fn order(&self) -> &[usize] {
        &self.order
    }

    pub(crate) fn parent_branch(&self, bus: usize) -> Option<usize> {
        self.parent_branch[bus]
    }

    /// Upstream and downstream bus indices of branch `k`.
    pub(crate) fn branch_ends(&self, k: usize) -> (usize, usize) {
        self.ends[k]
    }
}

#[derive(Debug, Deserialize)]
struct BranchRow {
    from: usize,
    to: usize,
    r_ohm: f64,
    x_ohm: f64,
    #[serde(default)]
    i_max_a: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct BusRow {
    bus: usize,
    p_kw: f64,
    q_kvar: f64,
}

fn parse_sections(text: &str, origin: &str) -> Result<(Vec<Branch>, Vec<Bus>)> {
    let mut section: Option<&str> = None;
    let mut branch_text = String::new();
    let mut bus_text = String::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match trimmed {
            "[branches]" => section = Some("branches"),
            "[buses]" => section = Some("buses"),
            _ => {
                let target = match section {
                    Some("branches") => &mut branch_text,
                    Some("buses") => &mut bus_text,
                    _ => {
                        return Err(Error::parse(
                            origin,
                            "data before the first [branches]/[buses] header",
                        ))
                    }
                };
                target.push_str(trimmed);
                target.push('\n');
            }
        }
    }
    fn read(body: &str) -> csv::Reader<&[u8]> {
        csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(body.as_bytes())
    }
    let branches = read(&branch_text)
        .deserialize::<BranchRow>()
        .map(|row| {
            row.map(|r| Branch {
                from: r.from,
                to: r.to,
                r_ohm: r.r_ohm,
                x_ohm: r.x_ohm,
                i_max_a: r.i_max_a,
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Error::parse(origin, format!("[branches]: {e}")))?;
    let buses = read(&bus_text)
        .deserialize::<BusRow>()
        .map(|row| {
            row.map(|r| Bus {
                id: r.bus,
                p_load_kw: r.p_kw,
                q_load_kvar: r.q_kvar,
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Error::parse(origin, format!("[buses]: {e}")))?;
    if branches.is_empty() || buses.is_empty() {
        return Err(Error::parse(origin, "both [branches] and [buses] sections are required"));
    }
    Ok((branches, buses))
}
