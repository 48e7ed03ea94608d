//! Radial feeder model and forward-backward sweep power flow.

mod flow;
mod network;

pub use flow::{
    balance_residual, check_limits, solve_power_flow, Injections, LimitViolation, PowerFlowResult,
};
pub use network::{Branch, Bus, NetworkSettings, RadialNetwork, PGE69_CSV};
