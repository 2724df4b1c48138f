use crate::error::{Result, TvError};

/// Step function on an interval [x₀, x₁]: `values[k]` between consecutive
/// entries of `[x₀, jumps.., x₁]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalStep {
    pub start: f64,
    pub end: f64,
    pub jumps: Vec<f64>,
    pub values: Vec<f64>,
}

impl IntervalStep {
    pub fn new(start: f64, end: f64, jumps: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != jumps.len() + 1 {
            return Err(TvError::InvalidInput("need one more value than jump points".into()));
        }
        let mut all = vec![start];
        all.extend_from_slice(&jumps);
        all.push(end);
        if all.windows(2).any(|w| w[1] <= w[0]) {
            return Err(TvError::InvalidInput("jump points must increase strictly inside the interval".into()));
        }
        Ok(IntervalStep { start, end, jumps, values })
    }
}

/// Lower semicontinuous weight: a continuous part plus isolated reduced point
/// values.
pub struct Weight1D<'a> {
    pub continuous: &'a dyn Fn(f64) -> f64,
    pub point_values: Vec<(f64, f64)>,
}

impl Weight1D<'_> {
    pub fn at(&self, x: f64) -> f64 {
        self.point_values
            .iter()
            .find(|(p, _)| *p == x)
            .map(|(_, v)| *v)
            .unwrap_or_else(|| (self.continuous)(x))
    }
}

/// Σⱼ a(xⱼ)|u(xⱼ+) − u(xⱼ−)|, reading a at jump points through the reduced
/// point values. Step functions carry no absolutely continuous part.
pub fn total_variation_weighted_1d(u: &IntervalStep, a: &Weight1D) -> Result<f64> {
    for (x, v) in &a.point_values {
        if !(*v >= 0.0) {
            return Err(TvError::InvalidWeight(format!("a({x}) = {v} is negative")));
        }
    }
    let mut tv = 0.0;
    for (j, x) in u.jumps.iter().enumerate() {
        let w = a.at(*x);
        if !(w >= 0.0) {
            return Err(TvError::InvalidWeight(format!("a({x}) = {w} is negative")));
        }
        tv += w * (u.values[j + 1] - u.values[j]).abs();
    }
    Ok(tv)
}
