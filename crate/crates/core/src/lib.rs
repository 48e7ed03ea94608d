pub mod dispatch;
pub mod economics;
pub mod error;
pub mod grid;
pub mod ibpso;
pub mod load;
pub mod plan;
pub mod planner;
pub mod report;
pub mod runner;
pub mod sequence;
pub mod toy;
pub mod uncertainty;

pub use error::{ConfigIssue, Error, Result};

pub const SEASONS: usize = 4;
pub const HOURS: usize = 24;
pub const SLOTS: usize = SEASONS * HOURS;
pub const DAYS_PER_SEASON: f64 = 91.0;

/// Flat index of a (season 1..=4, hour 0..=23) slot.
pub fn slot_index(season: usize, hour: usize) -> usize {
    debug_assert!((1..=SEASONS).contains(&season) && hour < HOURS);
    (season - 1) * HOURS + hour
}
