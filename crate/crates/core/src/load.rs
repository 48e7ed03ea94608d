use crate::error::{Error, Result};
use crate::{slot_index, HOURS, SEASONS, SLOTS};

/// Per-slot multiplier applied uniformly to every bus's nominal load.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadProfile {
    factors: Vec<f64>,
}

impl Default for LoadProfile {
    fn default() -> Self {
        Self::flat()
    }
}

impl LoadProfile {
    pub fn flat() -> Self {
        Self {
            factors: vec![1.0; SLOTS],
        }
    }

    pub fn from_fn(f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut factors = vec![0.0; SLOTS];
        for s in 1..=SEASONS {
            for h in 0..HOURS {
                let v = f(s, h);
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::ParameterDomain(format!(
                        "load factor at season {s}, hour {h} must be >= 0"
                    )));
                }
                factors[slot_index(s, h)] = v;
            }
        }
        Ok(Self { factors })
    }

    pub fn from_rows(rows: &[(usize, usize, f64)]) -> Result<Self> {
        let mut factors = vec![f64::NAN; SLOTS];
        for &(s, h, v) in rows {
            if !(1..=SEASONS).contains(&s) || h >= HOURS {
                return Err(Error::ParameterDomain(format!("load slot ({s}, {h}) out of range")));
            }
            factors[slot_index(s, h)] = v;
        }
        if let Some(i) = factors.iter().position(|v| v.is_nan()) {
            return Err(Error::IncompleteProfile {
                season: i / HOURS + 1,
                hour: i % HOURS,
            });
        }
        Self::from_fn(|s, h| factors[slot_index(s, h)])
    }

    pub fn factor(&self, season: usize, hour: usize) -> f64 {
        self.factors[slot_index(season, hour)]
    }

    pub fn is_flat(&self) -> bool {
        self.factors.iter().all(|&f| f == 1.0)
    }
}
