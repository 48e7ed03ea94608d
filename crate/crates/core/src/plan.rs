use serde::{Deserialize, Serialize};

/// Installed capacities at one bus.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SiteAllocation {
    pub bus: usize,
    pub wt_kw: f64,
    pub pv_kw: f64,
    pub storage_kwh: f64,
    pub storage_kw: f64,
}

impl SiteAllocation {
    pub fn empty(bus: usize) -> Self {
        Self {
            bus,
            ..Default::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.wt_kw == 0.0 && self.pv_kw == 0.0 && self.storage_kwh == 0.0 && self.storage_kw == 0.0
    }
}

/// A siting and sizing decision: one allocation per candidate bus.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Plan {
    pub sites: Vec<SiteAllocation>,
}

impl Plan {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(sites: Vec<SiteAllocation>) -> Self {
        Self { sites }
    }

    pub fn total_wt_kw(&self) -> f64 {
        self.sites.iter().map(|s| s.wt_kw).sum()
    }

    pub fn total_pv_kw(&self) -> f64 {
        self.sites.iter().map(|s| s.pv_kw).sum()
    }

    pub fn total_dg_kw(&self) -> f64 {
        self.total_wt_kw() + self.total_pv_kw()
    }

    pub fn total_storage_kwh(&self) -> f64 {
        self.sites.iter().map(|s| s.storage_kwh).sum()
    }

    pub fn total_storage_kw(&self) -> f64 {
        self.sites.iter().map(|s| s.storage_kw).sum()
    }

    pub fn has_storage(&self) -> bool {
        self.sites.iter().any(|s| s.storage_kwh > 0.0)
    }

    /// Copy with every capacity multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            sites: self
                .sites
                .iter()
                .map(|s| SiteAllocation {
                    bus: s.bus,
                    wt_kw: s.wt_kw * factor,
                    pv_kw: s.pv_kw * factor,
                    storage_kwh: s.storage_kwh * factor,
                    storage_kw: s.storage_kw * factor,
                })
                .collect(),
        }
    }

    /// Copy with all storage removed.
    pub fn without_storage(&self) -> Self {
        Self {
            sites: self
                .sites
                .iter()
                .map(|s| SiteAllocation {
                    storage_kwh: 0.0,
                    storage_kw: 0.0,
                    ..*s
                })
                .collect(),
        }
    }
}
