//! Probabilistic output models for wind turbines and photovoltaic units.
//!
//! Wind speed is Weibull distributed and passed through the piecewise-linear
//! turbine curve, which yields a mixed distribution: a point mass at zero
//! (calm or storm cut-out), a continuous ramp density, and a point mass at
//! rated output. PV output is Beta distributed on `[0, p_max]`; a dark hour
//! is a point mass at zero.

use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!(
            "{name} must be finite and > 0, got {value}"
        )))
    }
}

/// Weibull wind-speed distribution (shape `t`, scale `gamma` in m/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullParams {
    shape: f64,
    scale: f64,
}

impl WeibullParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        require_positive("weibull shape", shape)?;
        require_positive("weibull scale", scale)?;
        Ok(Self { shape, scale })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `P(V > v)`.
    pub fn survival(&self, v: f64) -> f64 {
        if v <= 0.0 {
            1.0
        } else {
            (-(v / self.scale).powf(self.shape)).exp()
        }
    }

    pub fn cdf(&self, v: f64) -> f64 {
        if v <= 0.0 {
            0.0
        } else {
            -(-(v / self.scale).powf(self.shape)).exp_m1()
        }
    }
}

/// Weibull density of wind speed `v` (m/s).
pub fn weibull_pdf(v: f64, params: &WeibullParams) -> f64 {
    if v < 0.0 {
        return 0.0;
    }
    let (t, g) = (params.shape, params.scale);
    let z = v / g;
    if z == 0.0 {
        return match t.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Greater) => 0.0,
            Some(std::cmp::Ordering::Equal) => 1.0 / g,
            _ => f64::INFINITY,
        };
    }
    (t / g) * z.powf(t - 1.0) * (-z.powf(t)).exp()
}

/// Turbine power curve: cut-in, rated and cut-out speeds (m/s) and rated power (kW).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WtCurve {
    v_in: f64,
    v_rated: f64,
    v_out: f64,
    p_rated: f64,
}

impl WtCurve {
    pub fn new(v_in: f64, v_rated: f64, v_out: f64, p_rated: f64) -> Result<Self> {
        require_positive("cut-in speed", v_in)?;
        require_positive("rated power", p_rated)?;
        if !(v_in < v_rated && v_rated < v_out) {
            return Err(Error::ParameterDomain(format!(
                "turbine speeds must satisfy v_in < v_rated < v_out, got {v_in}, {v_rated}, {v_out}"
            )));
        }
        Ok(Self {
            v_in,
            v_rated,
            v_out,
            p_rated,
        })
    }

    /// Same speeds, rated power rescaled (e.g. to 1 for per-kW modelling).
    pub fn with_rated_power(&self, p_rated: f64) -> Result<Self> {
        Self::new(self.v_in, self.v_rated, self.v_out, p_rated)
    }

    pub fn v_in(&self) -> f64 {
        self.v_in
    }
    pub fn v_rated(&self) -> f64 {
        self.v_rated
    }
    pub fn v_out(&self) -> f64 {
        self.v_out
    }
    pub fn p_rated(&self) -> f64 {
        self.p_rated
    }

    /// Ramp ratio `v_rated / v_in - 1`.
    fn ramp_h(&self) -> f64 {
        self.v_rated / self.v_in - 1.0
    }

    /// Wind speed producing output `p` on the linear ramp.
    fn speed_for_power(&self, p: f64) -> f64 {
        (1.0 + self.ramp_h() * p / self.p_rated) * self.v_in
    }
}

/// Turbine output (kW) at wind speed `v`.
pub fn wt_power(v: f64, curve: &WtCurve) -> f64 {
    if v < curve.v_in || v >= curve.v_out {
        0.0
    } else if v < curve.v_rated {
        (v - curve.v_in) / (curve.v_rated - curve.v_in) * curve.p_rated
    } else {
        curve.p_rated
    }
}

/// Continuous part of the turbine output density (per kW) on `[0, p_rated]`.
///
/// The point masses at 0 and at rated output are not included; see
/// [`WindOutput::atom_at_zero`] and [`WindOutput::atom_at_max`].
pub fn wt_output_pdf(p: f64, curve: &WtCurve, params: &WeibullParams) -> f64 {
    if !(0.0..=curve.p_rated).contains(&p) {
        return 0.0;
    }
    let (t, g) = (params.shape, params.scale);
    let h = curve.ramp_h();
    let z = curve.speed_for_power(p) / g;
    (t * h * curve.v_in / (g * curve.p_rated)) * z.powf(t - 1.0) * (-z.powf(t)).exp()
}

/// Beta-distributed PV output on `[0, p_max]` kW.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    lambda1: f64,
    lambda2: f64,
    p_max: f64,
}

impl BetaParams {
    pub fn new(lambda1: f64, lambda2: f64, p_max: f64) -> Result<Self> {
        require_positive("beta lambda1", lambda1)?;
        require_positive("beta lambda2", lambda2)?;
        require_positive("pv p_max", p_max)?;
        Ok(Self {
            lambda1,
            lambda2,
            p_max,
        })
    }

    /// Shapes from the mean and variance of normalised irradiance.
    pub fn from_moments(mu: f64, sigma2: f64, p_max: f64) -> Result<Self> {
        let (l1, l2) = beta_shapes_from_moments(mu, sigma2)?;
        Self::new(l1, l2, p_max)
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }
    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }
    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn mean(&self) -> f64 {
        self.p_max * self.lambda1 / (self.lambda1 + self.lambda2)
    }

    fn ln_beta(&self) -> f64 {
        ln_gamma(self.lambda1) + ln_gamma(self.lambda2) - ln_gamma(self.lambda1 + self.lambda2)
    }
}

/// Method-of-moments Beta shapes `(lambda1, lambda2)`.
pub fn beta_shapes_from_moments(mu: f64, sigma2: f64) -> Result<(f64, f64)> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::ParameterDomain(format!(
            "beta mean must lie in (0, 1), got {mu}"
        )));
    }
    let limit = mu * (1.0 - mu);
    if !(sigma2 > 0.0) || sigma2 >= limit {
        return Err(Error::InfeasibleMoments { sigma2, limit });
    }
    let k = limit / sigma2 - 1.0;
    Ok((mu * k, (1.0 - mu) * k))
}

/// PV output density (per kW).
pub fn pv_output_pdf(p: f64, params: &BetaParams) -> f64 {
    if !(0.0..=params.p_max).contains(&p) {
        return 0.0;
    }
    let x = p / params.p_max;
    let (a, b) = (params.lambda1, params.lambda2);
    let log_kernel = |base: f64, exp: f64| {
        if exp == 0.0 {
            0.0
        } else {
            exp * base.ln()
        }
    };
    (log_kernel(x, a - 1.0) + log_kernel(1.0 - x, b - 1.0) - params.ln_beta()).exp() / params.p_max
}

/// Panel characteristics for the irradiance-to-power conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvPanelSpec {
    eta_m: f64,
    area_m2: f64,
    eta_pv: f64,
    incident_angle: f64,
}

impl PvPanelSpec {
    pub fn new(eta_m: f64, area_m2: f64, eta_pv: f64, incident_angle: f64) -> Result<Self> {
        for (name, value) in [("eta_m", eta_m), ("eta_pv", eta_pv)] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(Error::ParameterDomain(format!(
                    "{name} must lie in (0, 1], got {value}"
                )));
            }
        }
        require_positive("panel area", area_m2)?;
        Ok(Self {
            eta_m,
            area_m2,
            eta_pv,
            incident_angle,
        })
    }
}

/// PV output (kW) for irradiance `xi` in W/m².
pub fn pv_power_from_irradiance(xi: f64, spec: &PvPanelSpec) -> f64 {
    xi.max(0.0) * spec.eta_m * spec.area_m2 * spec.eta_pv * spec.incident_angle.cos() / 1000.0
}

/// A non-negative power output with optional point masses at both ends of
/// its support `[0, p_max]`.
pub trait OutputDistribution {
    fn p_max(&self) -> f64;

    /// Continuous density (per kW) on `[0, p_max]`.
    fn density(&self, p: f64) -> f64;

    fn atom_at_zero(&self) -> f64 {
        0.0
    }

    fn atom_at_max(&self) -> f64 {
        0.0
    }

    /// Mass of the continuous part on `[a, b]`.
    fn continuous_mass(&self, a: f64, b: f64) -> f64 {
        gauss_legendre(|p| self.density(p), a, b, 8)
    }
}

/// Composite 5-point Gauss-Legendre rule over `pieces` equal sub-intervals.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, pieces: usize) -> f64 {
    const NODES: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    if b <= a || pieces == 0 {
        return 0.0;
    }
    let width = (b - a) / pieces as f64;
    (0..pieces)
        .map(|k| {
            let lo = a + k as f64 * width;
            let mid = lo + 0.5 * width;
            let half = 0.5 * width;
            NODES
                .iter()
                .zip(WEIGHTS)
                .map(|(x, w)| w * f(mid + half * x))
                .sum::<f64>()
                * half
        })
        .sum()
}

/// Turbine output distribution implied by a Weibull wind regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindOutput {
    pub curve: WtCurve,
    pub wind: WeibullParams,
}

impl WindOutput {
    pub fn new(curve: WtCurve, wind: WeibullParams) -> Self {
        Self { curve, wind }
    }

    /// Exact mean output, for reference.
    pub fn mean(&self) -> f64 {
        let ramp = gauss_legendre(
            |p| p * wt_output_pdf(p, &self.curve, &self.wind),
            0.0,
            self.curve.p_rated,
            64,
        );
        ramp + self.curve.p_rated * self.atom_at_max()
    }
}

impl OutputDistribution for WindOutput {
    fn p_max(&self) -> f64 {
        self.curve.p_rated
    }

    fn density(&self, p: f64) -> f64 {
        wt_output_pdf(p, &self.curve, &self.wind)
    }

    fn atom_at_zero(&self) -> f64 {
        self.wind.cdf(self.curve.v_in) + self.wind.survival(self.curve.v_out)
    }

    fn atom_at_max(&self) -> f64 {
        self.wind.survival(self.curve.v_rated) - self.wind.survival(self.curve.v_out)
    }

    fn continuous_mass(&self, a: f64, b: f64) -> f64 {
        let a = a.clamp(0.0, self.curve.p_rated);
        let b = b.clamp(0.0, self.curve.p_rated);
        if b <= a {
            return 0.0;
        }
        self.wind.survival(self.curve.speed_for_power(a))
            - self.wind.survival(self.curve.speed_for_power(b))
    }
}

/// PV output for one hour: Beta distributed, or identically zero after dark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolarOutput {
    Dark,
    Lit(BetaParams),
}

impl OutputDistribution for SolarOutput {
    fn p_max(&self) -> f64 {
        match self {
            SolarOutput::Dark => 0.0,
            SolarOutput::Lit(b) => b.p_max,
        }
    }

    fn density(&self, p: f64) -> f64 {
        match self {
            SolarOutput::Dark => 0.0,
            SolarOutput::Lit(b) => pv_output_pdf(p, b),
        }
    }

    fn atom_at_zero(&self) -> f64 {
        match self {
            SolarOutput::Dark => 1.0,
            SolarOutput::Lit(_) => 0.0,
        }
    }

    fn continuous_mass(&self, a: f64, b: f64) -> f64 {
        match self {
            SolarOutput::Dark => 0.0,
            SolarOutput::Lit(beta) => {
                let x0 = (a / beta.p_max).clamp(0.0, 1.0);
                let x1 = (b / beta.p_max).clamp(0.0, 1.0);
                if x1 <= x0 {
                    0.0
                } else {
                    beta_reg(beta.lambda1, beta.lambda2, x1)
                        - beta_reg(beta.lambda1, beta.lambda2, x0)
                }
            }
        }
    }
}

/// Normally distributed load truncated at zero (negative draws collapse to
/// a point mass at 0) and cut at `mean + 4 std`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLoad {
    pub mean_kw: f64,
    pub std_kw: f64,
}

impl GaussianLoad {
    fn normal_cdf(&self, x: f64) -> f64 {
        let z = (x - self.mean_kw) / (self.std_kw * std::f64::consts::SQRT_2);
        0.5 * statrs::function::erf::erfc(-z)
    }
}

impl OutputDistribution for GaussianLoad {
    fn p_max(&self) -> f64 {
        (self.mean_kw + 4.0 * self.std_kw).max(0.0)
    }

    fn density(&self, p: f64) -> f64 {
        if !(0.0..=self.p_max()).contains(&p) {
            return 0.0;
        }
        let z = (p - self.mean_kw) / self.std_kw;
        (-0.5 * z * z).exp() / (self.std_kw * (2.0 * std::f64::consts::PI).sqrt())
    }

    fn atom_at_zero(&self) -> f64 {
        self.normal_cdf(0.0)
    }

    fn continuous_mass(&self, a: f64, b: f64) -> f64 {
        let a = a.clamp(0.0, self.p_max());
        let b = b.clamp(0.0, self.p_max());
        (self.normal_cdf(b) - self.normal_cdf(a)).max(0.0)
    }
}
