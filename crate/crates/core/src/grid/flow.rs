use num_complex::Complex64;

use super::network::RadialNetwork;
use crate::error::{Error, Result};

const SWEEP_TOL_PU: f64 = 1e-10;
const MAX_SWEEPS: usize = 200;

/// Net per-bus injections (generation minus consumption), indexed like
/// [`RadialNetwork::buses`]. The slack entry only matters for bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Injections {
    p_kw: Vec<f64>,
    q_kvar: Vec<f64>,
}

impl Injections {
    pub fn zero(net: &RadialNetwork) -> Self {
        Self {
            p_kw: vec![0.0; net.bus_count()],
            q_kvar: vec![0.0; net.bus_count()],
        }
    }

    /// Nominal loads as negative injections.
    pub fn loads(net: &RadialNetwork) -> Self {
        Self::scaled_loads(net, 1.0)
    }

    pub fn scaled_loads(net: &RadialNetwork, factor: f64) -> Self {
        Self {
            p_kw: net.buses().iter().map(|b| -factor * b.p_load_kw).collect(),
            q_kvar: net.buses().iter().map(|b| -factor * b.q_load_kvar).collect(),
        }
    }

    /// Add generation (positive) or consumption (negative) at a bus id.
    pub fn add(&mut self, net: &RadialNetwork, bus: usize, p_kw: f64, q_kvar: f64) -> Result<()> {
        let i = net.bus_index(bus)?;
        self.p_kw[i] += p_kw;
        self.q_kvar[i] += q_kvar;
        Ok(())
    }

    pub fn add_at_index(&mut self, index: usize, p_kw: f64, q_kvar: f64) {
        self.p_kw[index] += p_kw;
        self.q_kvar[index] += q_kvar;
    }

    pub fn p_kw(&self) -> &[f64] {
        &self.p_kw
    }

    pub fn q_kvar(&self) -> &[f64] {
        &self.q_kvar
    }

    fn check_len(&self, net: &RadialNetwork) -> Result<()> {
        if self.p_kw.len() != net.bus_count() {
            return Err(Error::ParameterDomain(format!(
                "injection vector has {} entries, network has {} buses",
                self.p_kw.len(),
                net.bus_count()
            )));
        }
        Ok(())
    }
}

/// Converged network state. Branch quantities are sending-end values in the
/// upstream-to-downstream direction.
#[derive(Debug, Clone)]
pub struct PowerFlowResult {
    pub v_mag: Vec<f64>,
    pub v_angle_rad: Vec<f64>,
    pub branch_p_kw: Vec<f64>,
    pub branch_q_kvar: Vec<f64>,
    pub branch_i_pu: Vec<f64>,
    pub branch_loss_kw: Vec<f64>,
    pub p_loss_kw: f64,
    pub q_loss_kvar: f64,
    pub slack_p_kw: f64,
    pub slack_q_kvar: f64,
    pub iterations: usize,
    voltages: Vec<Complex64>,
    currents: Vec<Complex64>,
}

/// Forward-backward sweep from a flat start.
pub fn solve_power_flow(net: &RadialNetwork, inj: &Injections) -> Result<PowerFlowResult> {
    inj.check_len(net)?;
    let s = net.settings();
    let z = branch_impedances_pu(net);
    let load: Vec<Complex64> = inj
        .p_kw
        .iter()
        .zip(&inj.q_kvar)
        .map(|(&p, &q)| Complex64::new(p, q) / s.s_base_kva)
        .collect();
    let n = net.bus_count();
    let v0 = Complex64::new(s.v_slack_pu, 0.0);
    let mut v = vec![v0; n];
    let mut bus_current = vec![Complex64::default(); n];
    let mut j = vec![Complex64::default(); net.branches().len()];
    let order = net.order();
    let mut last_change = f64::INFINITY;
    for sweep in 1..=MAX_SWEEPS {
        // Backward: accumulate downstream current (positive = flowing away from slack).
        for b in 0..n {
            bus_current[b] = -(load[b] / v[b]).conj();
        }
        for &bus in order.iter().rev() {
            if let Some(k) = net.parent_branch(bus) {
                j[k] = bus_current[bus];
                let (up, _) = net.branch_ends(k);
                let c = bus_current[bus];
                bus_current[up] += c;
            }
        }
        // Forward: voltage drops.
        last_change = 0.0;
        for &bus in order {
            if let Some(k) = net.parent_branch(bus) {
                let (up, _) = net.branch_ends(k);
                let nv = v[up] - z[k] * j[k];
                last_change = last_change.max((nv - v[bus]).norm());
                v[bus] = nv;
            }
        }
        if !last_change.is_finite() || v.iter().any(|x| x.norm() < 1e-6) {
            return Err(Error::Divergence {
                iterations: sweep,
                residual: last_change,
            });
        }
        if last_change < SWEEP_TOL_PU {
            return Ok(assemble(net, inj, v, j, sweep));
        }
    }
    Err(Error::Divergence {
        iterations: MAX_SWEEPS,
        residual: last_change,
    })
}

fn branch_impedances_pu(net: &RadialNetwork) -> Vec<Complex64> {
    let zb = net.z_base_ohm();
    net.branches()
        .iter()
        .map(|b| Complex64::new(b.r_ohm, b.x_ohm) / zb)
        .collect()
}

fn assemble(
    net: &RadialNetwork,
    inj: &Injections,
    voltages: Vec<Complex64>,
    currents: Vec<Complex64>,
    iterations: usize,
) -> PowerFlowResult {
    let sb = net.settings().s_base_kva;
    let z = branch_impedances_pu(net);
    let nbr = currents.len();
    let mut branch_p_kw = Vec::with_capacity(nbr);
    let mut branch_q_kvar = Vec::with_capacity(nbr);
    let mut branch_loss_kw = Vec::with_capacity(nbr);
    let mut q_loss = 0.0;
    let mut slack_out = Complex64::default();
    for k in 0..nbr {
        let (up, _) = net.branch_ends(k);
        let s_send = voltages[up] * currents[k].conj();
        branch_p_kw.push(s_send.re * sb);
        branch_q_kvar.push(s_send.im * sb);
        let i2 = currents[k].norm_sqr();
        branch_loss_kw.push(z[k].re * i2 * sb);
        q_loss += z[k].im * i2 * sb;
        if up == net.slack_index() {
            slack_out += s_send;
        }
    }
    let slack = net.slack_index();
    PowerFlowResult {
        v_mag: voltages.iter().map(|v| v.norm()).collect(),
        v_angle_rad: voltages.iter().map(|v| v.arg()).collect(),
        p_loss_kw: branch_loss_kw.iter().sum(),
        q_loss_kvar: q_loss,
        slack_p_kw: slack_out.re * sb - inj.p_kw[slack],
        slack_q_kvar: slack_out.im * sb - inj.q_kvar[slack],
        branch_i_pu: currents.iter().map(|c| c.norm()).collect(),
        branch_p_kw,
        branch_q_kvar,
        branch_loss_kw,
        iterations,
        voltages,
        currents,
    }
}

impl PowerFlowResult {
    /// Build a state from arbitrary bus voltages, taking branch currents from
    /// the voltage drop across each impedance. Useful for residual checks on
    /// states that did not come out of the solver.
    pub fn from_voltages(net: &RadialNetwork, inj: &Injections, voltages: Vec<Complex64>) -> Result<Self> {
        inj.check_len(net)?;
        if voltages.len() != net.bus_count() {
            return Err(Error::ParameterDomain("one voltage per bus is required".into()));
        }
        let z = branch_impedances_pu(net);
        let mut currents = Vec::with_capacity(z.len());
        for (k, zk) in z.iter().enumerate() {
            if zk.norm() == 0.0 {
                return Err(Error::ParameterDomain("zero-impedance branch".into()));
            }
            let (up, down) = net.branch_ends(k);
            currents.push((voltages[up] - voltages[down]) / zk);
        }
        Ok(assemble(net, inj, voltages, currents, 0))
    }

    pub fn voltage(&self, net: &RadialNetwork, bus: usize) -> Result<f64> {
        Ok(self.v_mag[net.bus_index(bus)?])
    }

    pub fn min_voltage(&self) -> (usize, f64) {
        self.v_mag
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc })
    }

    pub fn complex_voltages(&self) -> &[Complex64] {
        &self.voltages
    }

    /// Largest per-branch residuals of the branch-flow equations in pu:
    /// the voltage-drop identity and the `I^2 U^2 = P^2 + Q^2` identity.
    pub fn branch_flow_residuals(&self, net: &RadialNetwork) -> (f64, f64) {
        let z = branch_impedances_pu(net);
        let sb = net.settings().s_base_kva;
        let mut drop = 0.0f64;
        let mut apparent = 0.0f64;
        for k in 0..self.currents.len() {
            let (up, down) = net.branch_ends(k);
            let ui2 = self.voltages[up].norm_sqr();
            let uj2 = self.voltages[down].norm_sqr();
            let p = self.branch_p_kw[k] / sb;
            let q = self.branch_q_kvar[k] / sb;
            let i2 = self.currents[k].norm_sqr();
            let (r, x) = (z[k].re, z[k].im);
            drop = drop.max((ui2 - uj2 - 2.0 * (r * p + x * q) + (r * r + x * x) * i2).abs());
            apparent = apparent.max((i2 * ui2 - (p * p + q * q)).abs());
        }
        (drop, apparent)
    }

    /// Largest complex power mismatch (pu) between the specified injections
    /// and the series-admittance bus equations, over non-slack buses.
    pub fn bus_injection_mismatch(&self, net: &RadialNetwork, inj: &Injections) -> f64 {
        let z = branch_impedances_pu(net);
        let sb = net.settings().s_base_kva;
        let n = net.bus_count();
        let mut injected = vec![Complex64::default(); n];
        for (k, zk) in z.iter().enumerate() {
            if zk.norm() == 0.0 {
                continue;
            }
            let (a, b) = net.branch_ends(k);
            let i_ab = (self.voltages[a] - self.voltages[b]) / zk;
            injected[a] += i_ab;
            injected[b] -= i_ab;
        }
        (0..n)
            .filter(|&i| i != net.slack_index())
            .map(|i| {
                let calc = self.voltages[i] * injected[i].conj();
                let spec = Complex64::new(inj.p_kw[i], inj.q_kvar[i]) / sb;
                (calc - spec).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Power balance `(P_swing + sum(P_inj) - P_loss, Q analogue)` in kW/kVar.
pub fn balance_residual(result: &PowerFlowResult, inj: &Injections) -> (f64, f64) {
    let p: f64 = inj.p_kw.iter().sum();
    let q: f64 = inj.q_kvar.iter().sum();
    (
        result.slack_p_kw + p - result.p_loss_kw,
        result.slack_q_kvar + q - result.q_loss_kvar,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub enum LimitViolation {
    Voltage { bus: usize, v_pu: f64, limit_pu: f64 },
    Current { from: usize, to: usize, i_a: f64, i_max_a: f64 },
}

pub fn check_limits(result: &PowerFlowResult, net: &RadialNetwork) -> Vec<LimitViolation> {
    let s = net.settings();
    let mut out = Vec::new();
    for (bus, &v) in net.buses().iter().zip(&result.v_mag) {
        if v < s.v_min_pu {
            out.push(LimitViolation::Voltage { bus: bus.id, v_pu: v, limit_pu: s.v_min_pu });
        } else if v > s.v_max_pu {
            out.push(LimitViolation::Voltage { bus: bus.id, v_pu: v, limit_pu: s.v_max_pu });
        }
    }
    let i_base = net.i_base_a();
    for (br, &i) in net.branches().iter().zip(&result.branch_i_pu) {
        if let Some(i_max_a) = br.i_max_a {
            let i_a = i * i_base;
            if i_a > i_max_a {
                out.push(LimitViolation::Current { from: br.from, to: br.to, i_a, i_max_a });
            }
        }
    }
    out
}

/// Normalized magnitude of a violation (relative excess over the limit).
impl LimitViolation {
    pub fn severity(&self) -> f64 {
        match *self {
            LimitViolation::Voltage { v_pu, limit_pu, .. } => (v_pu - limit_pu).abs() / limit_pu,
            LimitViolation::Current { i_a, i_max_a, .. } => {
                if i_max_a > 0.0 {
                    (i_a - i_max_a) / i_max_a
                } else {
                    i_a
                }
            }
        }
    }
}
