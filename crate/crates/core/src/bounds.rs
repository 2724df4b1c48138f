//! Extinction-time bounds and the constants they use.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::core::{unit_ball_volume, unit_sphere_area, GridSignal, RadialStack, StepFunction1D};
use crate::error::{Result, TvError};
use crate::exact1d::extinction_time_1d;
use crate::fourth::fourth_extinction_time;
use crate::fracflow::hs_norm;
use crate::radial2::extinction_time_radial;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub formula: String,
    pub bound: f64,
    pub constants: BTreeMap<String, f64>,
    /// False when an embedding constant came from a non-certified default
    /// or an empirical fit.
    pub certified: bool,
    pub actual: Option<f64>,
    /// bound − actual.
    pub slack: Option<f64>,
}

impl BoundReport {
    pub fn new(formula: &str, bound: f64, certified: bool) -> Self {
        BoundReport { formula: formula.into(), bound, constants: BTreeMap::new(), certified, actual: None, slack: None }
    }

    pub fn constant(mut self, name: &str, value: f64) -> Self {
        self.constants.insert(name.into(), value);
        self
    }

    pub fn with_actual(mut self, actual: f64) -> Self {
        self.actual = Some(actual);
        self.slack = Some(self.bound - actual);
        self
    }

    /// slack ≥ −tol, or no actual time to compare with.
    pub fn slack_ok(&self, tol: f64) -> bool {
        self.slack.is_none_or(|s| s >= -tol)
    }
}

/// Sₙ = (n ωₙ^{1/n})⁻¹, the sharp constant in ‖u‖_{n/(n−1)} ≤ Sₙ TV(u).
pub fn sobolev_constant(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(TvError::NotApplicable("the Sobolev constant is used for n ≥ 2 only; n = 1 uses L¹".into()));
    }
    Ok(1.0 / (n as f64 * unit_ball_volume(n).powf(1.0 / n as f64)))
}

/// Sharp constant of ‖u‖_{2n/(n−2)} ≤ Cₙ‖∇u‖₂ for n ≥ 3:
/// (πn(n−2))^{−1/2} (Γ(n)/Γ(n/2))^{1/n}. Used as the default Cₙ, which the
/// fourth-order bound does not certify.
pub fn talenti_constant(n: u32) -> Result<f64> {
    if n < 3 {
        return Err(TvError::NotApplicable("the Sobolev embedding constant needs n ≥ 3".into()));
    }
    let nf = n as f64;
    Ok((std::f64::consts::PI * nf * (nf - 2.0)).powf(-0.5) * (libm::tgamma(nf) / libm::tgamma(nf / 2.0)).powf(1.0 / nf))
}

/// Initial datum of a second-order bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SecondOrderDatum {
    Stack(RadialStack<f64>),
    Step(StepFunction1D<f64>),
}

/// T* ≤ Sₙ‖u₀‖ₙ for n ≥ 2; for 1D data T* ≤ ‖u₀‖₁ (mean removed on the
/// torus). The exact extinction time is attached as `actual`.
pub fn extinction_bound_second(u0: &SecondOrderDatum) -> Result<BoundReport> {
    match u0 {
        SecondOrderDatum::Step(u) => {
            let mean = u.mean();
            let centred = u.map_values(|v| *v - mean)?;
            let norm = centred.lp_norm(1.0)?;
            Ok(BoundReport::new("second-order-l1", norm, true)
                .constant("n", 1.0)
                .with_actual(extinction_time_1d(u)))
        }
        SecondOrderDatum::Stack(u) => {
            if *u.outer_value() != 0.0 {
                return Err(TvError::NotApplicable("the bound needs a vanishing exterior value".into()));
            }
            let n = u.dimension();
            let actual = extinction_time_radial(u);
            if n == 1 {
                return Ok(BoundReport::new("second-order-l1", u.lp_norm(1.0)?, true)
                    .constant("n", 1.0)
                    .with_actual(actual));
            }
            let sn = sobolev_constant(n)?;
            let norm = u.lp_norm(n as f64)?;
            Ok(BoundReport::new("second-order-sobolev", sn * norm, true)
                .constant("n", n as f64)
                .constant("S_n", sn)
                .constant("norm_n", norm)
                .with_actual(actual))
        }
    }
}

/// ‖u‖_{D⁻¹} = ‖∇(−Δ)⁻¹u‖₂ of a radial stack with zero exterior:
/// ∫₀^∞ m(r)²/(nωₙ r^{n−1}) dr with m(r) = ∫_{B_r} u, in closed form.
pub fn dminus1_norm(u: &RadialStack<f64>) -> Result<f64> {
    if *u.outer_value() != 0.0 {
        return Err(TvError::Domain("the D⁻¹ norm needs a vanishing exterior value".into()));
    }
    let n = u.dimension();
    let nf = n as f64;
    let omega = unit_ball_volume(n);
    let area = unit_sphere_area(n);
    // ∫_a^b r^k dr, with the logarithm at k = −1.
    let power_integral = |k: f64, a: f64, b: f64| -> f64 {
        if (k + 1.0).abs() < 1e-12 {
            (b / a).ln()
        } else {
            (b.powf(k + 1.0) - a.powf(k + 1.0)) / (k + 1.0)
        }
    };
    let mut total = 0.0;
    let mut mass_below = 0.0;
    let mut mass_scale = 0.0;
    let mut lo: f64 = 0.0;
    for (r, v) in u.radii().iter().zip(u.values()) {
        // On (lo, r): m = A + B sⁿ with B = ωₙ v, A = mass_below − B loⁿ.
        let b = omega * v;
        let a = mass_below - b * lo.powi(n as i32);
        let mut piece = b * b * power_integral(nf + 1.0, lo, *r) + 2.0 * a * b * power_integral(1.0, lo, *r);
        if a != 0.0 {
            piece += a * a * power_integral(1.0 - nf, lo, *r);
        }
        total += piece / area;
        mass_below = a + b * r.powi(n as i32);
        mass_scale += (b * (r.powi(n as i32) - lo.powi(n as i32))).abs();
        lo = *r;
    }
    if mass_below.abs() > 1e-12 * mass_scale {
        if n <= 2 {
            return Ok(f64::INFINITY);
        }
        total += mass_below * mass_below / (area * (nf - 2.0) * lo.powf(nf - 2.0));
    }
    Ok(total.sqrt())
}

/// θ = ((n+2)/(2n) − 1/p)/((n−1)/n − 1/p) with the admissibility checks
/// 1/p < 3/n and 1/2 < θ ≤ 1; θ = 1 for n = 4.
pub fn fourth_order_exponent(n: u32, p: f64) -> Result<f64> {
    if n < 3 {
        return Err(TvError::NotApplicable(format!("the fourth-order bound needs n ≥ 3, got {n}")));
    }
    if n == 4 {
        return Ok(1.0);
    }
    if !(p >= 1.0) {
        return Err(TvError::InvalidExponent(p));
    }
    let nf = n as f64;
    let ip = if p.is_infinite() { 0.0 } else { 1.0 / p };
    if ip >= 3.0 / nf {
        return Err(TvError::NotApplicable(format!("1/p < 3/n fails for n = {n}, p = {p}")));
    }
    let den = (nf - 1.0) / nf - ip;
    if den == 0.0 {
        return Err(TvError::NotApplicable(format!("1/p = (n−1)/n makes θ undefined for n = {n}")));
    }
    let theta = ((nf + 2.0) / (2.0 * nf) - ip) / den;
    if !(theta > 0.5 && theta <= 1.0) {
        return Err(TvError::NotApplicable(format!("1/2 < θ ≤ 1 fails: θ = {theta} for n = {n}, p = {p}")));
    }
    Ok(theta)
}

/// T* ≤ (A_θ θ/(2θ−1)) ‖u₀‖_p^{1/θ−1} ‖u₀‖_{D⁻¹}^{2−1/θ}, A_θ = Sₙ Cₙ^{1/θ};
/// for n = 4 this is A₁‖u₀‖_{D⁻¹}. Without `c_n` the Talenti constant is used
/// and the report is marked non-certified.
pub fn extinction_bound_fourth(u0: &RadialStack<f64>, p: f64, c_n: Option<f64>) -> Result<BoundReport> {
    let n = u0.dimension();
    let theta = fourth_order_exponent(n, p)?;
    let (cn, certified) = match c_n {
        Some(c) if c > 0.0 => (c, true),
        Some(c) => return Err(TvError::InvalidInput(format!("Cₙ must be positive, got {c}"))),
        None => (talenti_constant(n)?, false),
    };
    let sn = sobolev_constant(n)?;
    let a_theta = sn * cn.powf(1.0 / theta);
    let d = dminus1_norm(u0)?;
    let lp = if n == 4 { 1.0 } else { u0.lp_norm(p)? };
    let bound = a_theta * theta / (2.0 * theta - 1.0) * lp.powf(1.0 / theta - 1.0) * d.powf(2.0 - 1.0 / theta);
    let mut report = BoundReport::new("fourth-order", bound, certified)
        .constant("n", n as f64)
        .constant("theta", theta)
        .constant("S_n", sn)
        .constant("C_n", cn)
        .constant("A_theta", a_theta)
        .constant("dminus1_norm", d);
    if n != 4 {
        report = report.constant("p", p).constant("norm_p", lp);
    }
    if u0.values().len() == 1 {
        if let Some(t) = fourth_extinction_time(n, u0.values()[0].abs(), u0.radii()[0])? {
            report = report.with_actual(t);
        }
    }
    Ok(report)
}

/// T* ≤ C_{n,s} Sₙ ‖u₀‖_{Ḣ^{−s}} in the critical case n = 2(s+1).
pub fn extinction_bound_fractional_critical(u0: &GridSignal, n: u32, s: f64, c_ns: f64) -> Result<BoundReport> {
    if ((n as f64) - 2.0 * (s + 1.0)).abs() > 1e-12 {
        return Err(TvError::NotApplicable(format!("n = 2(s+1) fails for n = {n}, s = {s}")));
    }
    if !(c_ns > 0.0) {
        return Err(TvError::InvalidInput("C_{n,s} must be positive".into()));
    }
    let sn = sobolev_constant(n)?;
    let norm = hs_norm(u0, -s)?;
    Ok(BoundReport::new("fractional-critical", c_ns * sn * norm, false)
        .constant("n", n as f64)
        .constant("s", s)
        .constant("S_n", sn)
        .constant("C_ns", c_ns)
        .constant("hs_norm", norm))
}
