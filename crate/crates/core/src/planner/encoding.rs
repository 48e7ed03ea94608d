use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plan::{Plan, SiteAllocation};

/// A bus where devices may be installed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSite {
    pub bus: usize,
    #[serde(default = "yes")]
    pub allow_wt: bool,
    #[serde(default = "yes")]
    pub allow_pv: bool,
    #[serde(default = "yes")]
    pub allow_storage: bool,
}

fn yes() -> bool {
    true
}

impl CandidateSite {
    pub fn all(bus: usize) -> Self {
        Self {
            bus,
            allow_wt: true,
            allow_pv: true,
            allow_storage: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceKind {
    Wt,
    Pv,
    StorageEnergy,
    StoragePower,
}

impl DeviceKind {
    pub const ORDER: [DeviceKind; 4] = [
        DeviceKind::Wt,
        DeviceKind::Pv,
        DeviceKind::StorageEnergy,
        DeviceKind::StoragePower,
    ];

    pub fn label(self) -> &'static str {
        match self {
            DeviceKind::Wt => "wt_kw",
            DeviceKind::Pv => "pv_kw",
            DeviceKind::StorageEnergy => "storage_kwh",
            DeviceKind::StoragePower => "storage_kw",
        }
    }
}

/// One contiguous slice of the genome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSpec {
    /// Index into [`EncodingSpec::sites`].
    pub site: usize,
    pub kind: DeviceKind,
    pub bits: u32,
    /// kW or kWh per integer step.
    pub unit: f64,
    /// Decoded integers are clamped to this many units.
    pub max_units: u64,
}

impl FieldSpec {
    pub fn new(site: usize, kind: DeviceKind, bits: u32, unit: f64) -> Self {
        Self {
            site,
            kind,
            bits,
            unit,
            max_units: (1u64 << bits) - 1,
        }
    }

    /// Widest field whose all-ones value stays within `cap`, so every code
    /// decodes to a plain multiple of `unit` without clamping.
    pub fn for_cap(site: usize, kind: DeviceKind, unit: f64, cap: f64) -> Option<Self> {
        let steps = (cap / unit + 1e-9).floor() as u64;
        if steps == 0 {
            return None;
        }
        let bits = 63 - (steps + 1).leading_zeros();
        Some(Self::new(site, kind, bits, unit))
    }
}

/// Step sizes used when building an encoding from caps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UnitSizes {
    pub dg_kw: f64,
    pub storage_kwh: f64,
    pub storage_kw: f64,
    /// Bits for an explicit storage power field; 0 derives the rating from
    /// the energy capacity.
    pub storage_power_bits: u32,
}

impl Default for UnitSizes {
    fn default() -> Self {
        Self {
            dg_kw: 50.0,
            storage_kwh: 50.0,
            storage_kw: 25.0,
            storage_power_bits: 0,
        }
    }
}

/// Genome layout: per site, in order, WT, PV, storage energy, storage power.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingSpec {
    sites: Vec<CandidateSite>,
    fields: Vec<FieldSpec>,
    hours_at_rating: f64,
}

impl EncodingSpec {
    pub fn new(sites: Vec<CandidateSite>, mut fields: Vec<FieldSpec>, hours_at_rating: f64) -> Result<Self> {
        for f in &fields {
            if f.site >= sites.len() {
                return Err(Error::Encoding(format!("field refers to missing site {}", f.site)));
            }
            if f.bits == 0 || f.bits > 32 || !(f.unit > 0.0) {
                return Err(Error::Encoding("field widths must be 1..=32 bits with a positive unit".into()));
            }
            if f.max_units == 0 || f.max_units > (1u64 << f.bits) - 1 {
                return Err(Error::Encoding("max_units must fit the field width".into()));
            }
        }
        if !(hours_at_rating >= 1.0) {
            return Err(Error::Encoding("hours_at_rating must be >= 1".into()));
        }
        let key = |f: &FieldSpec| {
            (
                f.site,
                DeviceKind::ORDER.iter().position(|k| *k == f.kind).unwrap_or(0),
            )
        };
        fields.sort_by_key(key);
        if fields.windows(2).any(|w| key(&w[0]) == key(&w[1])) {
            return Err(Error::Encoding("duplicate field for a site and device".into()));
        }
        Ok(Self {
            sites,
            fields,
            hours_at_rating,
        })
    }

    /// Fields sized so a single site can reach the whole cap of its device class.
    pub fn from_caps(
        sites: Vec<CandidateSite>,
        units: &UnitSizes,
        dg_cap_kw: f64,
        storage_cap_kwh: f64,
        hours_at_rating: f64,
    ) -> Result<Self> {
        let mut fields = Vec::new();
        for (i, s) in sites.iter().enumerate() {
            if s.allow_wt {
                fields.extend(FieldSpec::for_cap(i, DeviceKind::Wt, units.dg_kw, dg_cap_kw));
            }
            if s.allow_pv {
                fields.extend(FieldSpec::for_cap(i, DeviceKind::Pv, units.dg_kw, dg_cap_kw));
            }
            if s.allow_storage {
                let energy = FieldSpec::for_cap(i, DeviceKind::StorageEnergy, units.storage_kwh, storage_cap_kwh);
                if energy.is_some() && units.storage_power_bits > 0 {
                    fields.push(FieldSpec::new(
                        i,
                        DeviceKind::StoragePower,
                        units.storage_power_bits,
                        units.storage_kw,
                    ));
                }
                fields.extend(energy);
            }
        }
        Self::new(sites, fields, hours_at_rating)
    }

    pub fn sites(&self) -> &[CandidateSite] {
        &self.sites
    }

    pub fn fields(&self) -> &[FieldSpec] {
        &self.fields
    }

    pub fn total_bits(&self) -> usize {
        self.fields.iter().map(|f| f.bits as usize).sum()
    }

    pub fn hours_at_rating(&self) -> f64 {
        self.hours_at_rating
    }

    /// Copy keeping only fields accepted by `keep`.
    pub fn restricted(&self, keep: impl Fn(&FieldSpec) -> bool) -> Self {
        Self {
            sites: self.sites.clone(),
            fields: self.fields.iter().copied().filter(|f| keep(f)).collect(),
            hours_at_rating: self.hours_at_rating,
        }
    }

    fn has_power_field(&self, site: usize) -> bool {
        self.fields
            .iter()
            .any(|f| f.site == site && f.kind == DeviceKind::StoragePower)
    }
}

pub fn decode(genome: &[bool], spec: &EncodingSpec) -> Result<Plan> {
    if genome.len() != spec.total_bits() {
        return Err(Error::Encoding(format!(
            "genome has {} bits, layout needs {}",
            genome.len(),
            spec.total_bits()
        )));
    }
    let mut sites: Vec<SiteAllocation> = spec.sites.iter().map(|s| SiteAllocation::empty(s.bus)).collect();
    let mut off = 0;
    for f in &spec.fields {
        let raw = genome[off..off + f.bits as usize]
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | b as u64);
        off += f.bits as usize;
        let value = raw.min(f.max_units) as f64 * f.unit;
        let site = &mut sites[f.site];
        match f.kind {
            DeviceKind::Wt => site.wt_kw = value,
            DeviceKind::Pv => site.pv_kw = value,
            DeviceKind::StorageEnergy => site.storage_kwh = value,
            DeviceKind::StoragePower => site.storage_kw = value,
        }
    }
    for (i, site) in sites.iter_mut().enumerate() {
        if spec.has_power_field(i) {
            site.storage_kw = site.storage_kw.min(site.storage_kwh);
            if site.storage_kwh == 0.0 {
                site.storage_kw = 0.0;
            }
        } else {
            site.storage_kw = site.storage_kwh / spec.hours_at_rating;
        }
    }
    Ok(Plan::new(sites))
}

pub fn encode(plan: &Plan, spec: &EncodingSpec) -> Result<Vec<bool>> {
    if plan.sites.len() != spec.sites.len()
        || plan.sites.iter().zip(&spec.sites).any(|(a, s)| a.bus != s.bus)
    {
        return Err(Error::Encoding("plan sites do not match the layout".into()));
    }
    let mut out = Vec::with_capacity(spec.total_bits());
    for f in &spec.fields {
        let site = &plan.sites[f.site];
        let value = match f.kind {
            DeviceKind::Wt => site.wt_kw,
            DeviceKind::Pv => site.pv_kw,
            DeviceKind::StorageEnergy => site.storage_kwh,
            DeviceKind::StoragePower => site.storage_kw,
        };
        let steps = value / f.unit;
        let n = steps.round();
        if (steps - n).abs() > 1e-9 || n < 0.0 || n as u64 > f.max_units {
            return Err(Error::Encoding(format!(
                "{} = {value} at bus {} is not a multiple of {} within {} units",
                f.kind.label(),
                site.bus,
                f.unit,
                f.max_units
            )));
        }
        let n = n as u64;
        out.extend((0..f.bits).rev().map(|k| (n >> k) & 1 == 1));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec() -> EncodingSpec {
        EncodingSpec::from_caps(
            vec![CandidateSite::all(49), CandidateSite::all(61)],
            &UnitSizes::default(),
            1114.5,
            371.5,
            4.0,
        )
        .unwrap()
    }

    #[test]
    fn widths_follow_caps() {
        let s = spec();
        let bits: Vec<u32> = s.fields().iter().map(|f| f.bits).collect();
        assert_eq!(bits, vec![4, 4, 3, 4, 4, 3]);
        assert_eq!(s.fields()[0].max_units, 15);
        assert_eq!(s.fields()[2].max_units, 7);
        let exact = FieldSpec::for_cap(0, DeviceKind::Wt, 50.0, 750.0).unwrap();
        assert_eq!((exact.bits, exact.max_units), (4, 15));
        assert!(FieldSpec::for_cap(0, DeviceKind::Wt, 50.0, 49.0).is_none());
    }

    #[test]
    fn decode_examples() {
        let s = spec();
        let empty = decode(&vec![false; s.total_bits()], &s).unwrap();
        assert!(empty.sites.iter().all(|x| x.is_empty()));
        let single = EncodingSpec::new(
            vec![CandidateSite::all(3)],
            vec![FieldSpec::new(0, DeviceKind::Wt, 3, 100.0)],
            4.0,
        )
        .unwrap();
        let p = decode(&[true, false, true], &single).unwrap();
        assert_eq!(p.sites[0].wt_kw, 500.0);
        assert!(matches!(decode(&[true], &single), Err(Error::Encoding(_))));
    }

    #[test]
    fn derived_rating_and_clamp() {
        let s = spec();
        let mut g = vec![false; s.total_bits()];
        g[8..11].copy_from_slice(&[true, true, true]);
        g[0..4].copy_from_slice(&[true; 4]);
        let p = decode(&g, &s).unwrap();
        assert_eq!(p.sites[0].storage_kwh, 350.0);
        assert_eq!(p.sites[0].storage_kw, 87.5);
        assert_eq!(p.sites[0].wt_kw, 750.0);

        let mut clamped = FieldSpec::new(0, DeviceKind::Wt, 3, 50.0);
        clamped.max_units = 5;
        let spec = EncodingSpec::new(vec![CandidateSite::all(3)], vec![clamped], 4.0).unwrap();
        assert_eq!(decode(&[true, true, true], &spec).unwrap().sites[0].wt_kw, 250.0);
    }

    proptest! {
        #[test]
        fn encode_then_decode_is_identity(w0 in 0u64..=15, p0 in 0u64..=15, e0 in 0u64..=7, w1 in 0u64..=15, p1 in 0u64..=15, e1 in 0u64..=7) {
            let s = spec();
            let site = |bus, w: u64, p: u64, e: u64| SiteAllocation {
                bus,
                wt_kw: w as f64 * 50.0,
                pv_kw: p as f64 * 50.0,
                storage_kwh: e as f64 * 50.0,
                storage_kw: e as f64 * 50.0 / 4.0,
            };
            let plan = Plan::new(vec![site(49, w0, p0, e0), site(61, w1, p1, e1)]);
            let g = encode(&plan, &s).unwrap();
            prop_assert_eq!(decode(&g, &s).unwrap(), plan);
        }
    }

    #[test]
    fn explicit_power_field() {
        let units = UnitSizes {
            storage_power_bits: 2,
            ..UnitSizes::default()
        };
        let s = EncodingSpec::from_caps(vec![CandidateSite::all(5)], &units, 100.0, 100.0, 4.0).unwrap();
        let kinds: Vec<_> = s.fields().iter().map(|f| f.kind).collect();
        assert_eq!(
            kinds,
            vec![DeviceKind::Wt, DeviceKind::Pv, DeviceKind::StorageEnergy, DeviceKind::StoragePower]
        );
        let plan = decode(&[false, true, true, true, true], &s).unwrap();
        assert_eq!(plan.sites[0].pv_kw, 50.0);
        assert_eq!(plan.sites[0].storage_kwh, 50.0);
        assert_eq!(plan.sites[0].storage_kw, 50.0);
    }
}
