//! Shared domain types and the measurements every solver reports: total
//! variation, Lᵖ norms, jump measures.

mod grid;
mod jump;
mod stack;
mod step;
mod trajectory;
mod weighted;

pub use grid::{Geometry, GridSignal};
pub use jump::{Atom, JumpMeasure};
pub use stack::RadialStack;
pub use step::StepFunction1D;
pub use trajectory::{EventKind, FlowEvent, FlowTrajectory};
pub use weighted::{total_variation_weighted_1d, IntervalStep, Weight1D};

use serde::{Deserialize, Serialize};

use crate::error::{Result, TvError};

/// Volume of the unit ball in ℝⁿ, π^{n/2}/Γ(n/2 + 1).
pub fn unit_ball_volume(n: u32) -> f64 {
    let h = n as f64 / 2.0;
    std::f64::consts::PI.powf(h) / libm::tgamma(h + 1.0)
}

/// Area of the unit sphere in ℝⁿ, n·ωₙ.
pub fn unit_sphere_area(n: u32) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// Per-boundary-component calibration signs. Entries are ±1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct Signature(Vec<i8>);

impl Signature {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if let Some(s) = signs.iter().find(|s| s.abs() != 1) {
            return Err(TvError::InvalidInput(format!("signature entry {s} is not ±1")));
        }
        Ok(Signature(signs))
    }

    pub fn uniform(sign: i8, count: usize) -> Result<Self> {
        Self::new(vec![sign; count])
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i] as f64
    }
}

impl TryFrom<Vec<i8>> for Signature {
    type Error = TvError;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        Signature::new(v)
    }
}

impl From<Signature> for Vec<i8> {
    fn from(s: Signature) -> Self {
        s.0
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(TvError::InvalidExponent(p))
    }
}

/// (Σ mᵢ|vᵢ|ᵖ)^{1/p}, or max|vᵢ| for p = ∞.
pub(crate) fn weighted_lp(values: impl Iterator<Item = (f64, f64)>, p: f64) -> f64 {
    if p.is_infinite() {
        return values.map(|(v, _)| v.abs()).fold(0.0, f64::max);
    }
    values.map(|(v, m)| m * v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}
