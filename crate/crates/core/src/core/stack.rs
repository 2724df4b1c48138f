use serde::{Deserialize, Serialize};

use super::{check_exponent, unit_ball_volume, unit_sphere_area};
use crate::error::{Result, TvError};
use crate::scalar::{powi, Field};

/// Radially symmetric piecewise-constant function on ℝⁿ.
///
/// Region 0 is the ball `B_{R₀}`, region k is the shell `R_{k−1} < r < R_k`,
/// and region m (= number of radii) is the exterior, carrying `outer_value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStack<T>", bound = "T: Field + Serialize + for<'a> Deserialize<'a>")]
pub struct RadialStack<T> {
    radii: Vec<T>,
    values: Vec<T>,
    outer_value: T,
    dimension: u32,
}

#[derive(Deserialize)]
struct RawStack<T> {
    radii: Vec<T>,
    values: Vec<T>,
    outer_value: T,
    dimension: u32,
}

impl<T: Field> TryFrom<RawStack<T>> for RadialStack<T> {
    type Error = TvError;
    fn try_from(r: RawStack<T>) -> Result<Self> {
        RadialStack::new(r.radii, r.values, r.outer_value, r.dimension)
    }
}

impl<T: Field> RadialStack<T> {
    pub fn new(radii: Vec<T>, values: Vec<T>, outer_value: T, dimension: u32) -> Result<Self> {
        if dimension < 1 {
            return Err(TvError::InvalidInput("dimension must be at least 1".into()));
        }
        if radii.len() != values.len() {
            return Err(TvError::InvalidInput(format!(
                "{} radii but {} shell values",
                radii.len(),
                values.len()
            )));
        }
        if radii.first().is_some_and(|r| *r <= T::zero()) {
            return Err(TvError::InvalidInput("radii must be positive".into()));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(TvError::InvalidInput("radii must be strictly increasing".into()));
        }
        let mut s = RadialStack { radii, values, outer_value, dimension };
        s.canonicalize();
        Ok(s)
    }

    /// a·1_{B_R} in ℝⁿ.
    pub fn ball(dimension: u32, a: T, radius: T) -> Result<Self> {
        Self::new(vec![radius], vec![a], T::zero(), dimension)
    }

    pub fn constant(dimension: u32, value: T) -> Result<Self> {
        Self::new(vec![], vec![], value, dimension)
    }

    fn shell_measure(&self, k: usize) -> T {
        let n = self.dimension;
        let outer = powi(&self.radii[k], n);
        if k == 0 {
            outer
        } else {
            outer - powi(&self.radii[k - 1], n)
        }
    }

    fn canonicalize(&mut self) {
        let mut k = 0;
        while k + 1 < self.values.len() {
            if self.values[k].near(&self.values[k + 1]) {
                let (a, b) = (self.shell_measure(k), self.shell_measure(k + 1));
                let v = (self.values[k].clone() * a.clone() + self.values[k + 1].clone() * b.clone()) / (a + b);
                self.values[k + 1] = v;
                self.values.remove(k);
                self.radii.remove(k);
            } else {
                k += 1;
            }
        }
        while let Some(last) = self.values.last() {
            if last.near(&self.outer_value) {
                self.values.pop();
                self.radii.pop();
            } else {
                break;
            }
        }
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn outer_value(&self) -> &T {
        &self.outer_value
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    /// Number of regions including the exterior.
    pub fn region_count(&self) -> usize {
        self.values.len() + 1
    }

    pub fn region_value(&self, k: usize) -> &T {
        self.values.get(k).unwrap_or(&self.outer_value)
    }

    /// All region values, exterior last.
    pub fn region_values(&self) -> Vec<T> {
        let mut v = self.values.clone();
        v.push(self.outer_value.clone());
        v
    }

    pub fn is_constant(&self) -> bool {
        self.values.is_empty()
    }

    pub fn eval(&self, r: &T) -> T {
        match self.radii.iter().position(|rk| r < rk) {
            Some(k) => self.values[k].clone(),
            None => self.outer_value.clone(),
        }
    }

    /// Volume of region k (infinite for the exterior).
    pub fn region_volume(&self, k: usize) -> f64 {
        if k >= self.values.len() {
            return f64::INFINITY;
        }
        unit_ball_volume(self.dimension) * self.shell_measure(k).as_f64()
    }

    /// Σₖ |Δvalueₖ| · n ωₙ Rₖ^{n−1}.
    pub fn total_variation(&self) -> f64 {
        let area = unit_sphere_area(self.dimension);
        (0..self.radii.len())
            .map(|k| {
                let jump = (self.region_value(k + 1).clone() - self.values[k].clone()).abs();
                jump.as_f64() * area * self.radii[k].as_f64().powi(self.dimension as i32 - 1)
            })
            .sum()
    }

    /// Exact Lᵖ norm with shell volumes; infinite when the exterior value is
    /// nonzero and p < ∞.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        check_exponent(p)?;
        if p.is_infinite() {
            return Ok(self.region_values().iter().map(|v| v.as_f64().abs()).fold(0.0, f64::max));
        }
        if !self.outer_value.is_zero() {
            return Ok(f64::INFINITY);
        }
        let s: f64 = (0..self.values.len())
            .map(|k| self.region_volume(k) * self.values[k].as_f64().abs().powf(p))
            .sum();
        Ok(s.powf(1.0 / p))
    }

    /// ∫ u over ℝⁿ (requires a zero exterior value, else infinite).
    pub fn integral(&self) -> f64 {
        if !self.outer_value.is_zero() {
            return f64::INFINITY;
        }
        (0..self.values.len()).map(|k| self.region_volume(k) * self.values[k].as_f64()).sum()
    }

    pub fn with_values(&self, values: Vec<T>, outer_value: T) -> Result<Self> {
        Self::new(self.radii.clone(), values, outer_value, self.dimension)
    }

    pub fn to_f64(&self) -> RadialStack<f64> {
        RadialStack {
            radii: self.radii.iter().map(|r| r.as_f64()).collect(),
            values: self.values.iter().map(|v| v.as_f64()).collect(),
            outer_value: self.outer_value.as_f64(),
            dimension: self.dimension,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn unit_disk_tv_and_norm() {
        let u = RadialStack::ball(2, 1.0, 1.0).unwrap();
        assert_relative_eq!(u.total_variation(), 2.0 * PI, epsilon = 1e-14);
        assert_relative_eq!(u.lp_norm(2.0).unwrap(), PI.sqrt(), epsilon = 1e-14);
        assert_eq!(u.lp_norm(f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn merges_with_exterior() {
        let u = RadialStack::new(vec![1.0, 2.0], vec![1.0, 0.0], 0.0, 3).unwrap();
        assert_eq!(u.radii(), &[1.0]);
        let c = RadialStack::new(vec![1.0], vec![0.0], 0.0, 2).unwrap();
        assert!(c.is_constant());
        assert_eq!(c.total_variation(), 0.0);
    }

    #[test]
    fn merged_shell_keeps_mass() {
        let u = RadialStack::new(vec![1.0, 2.0, 3.0], vec![2.0, 2.0 + 1e-14, 1.0], 0.0, 2).unwrap();
        assert_eq!(u.radii(), &[2.0, 3.0]);
        assert_relative_eq!(u.values()[0], 2.0, epsilon = 1e-13);
    }

    #[test]
    fn rejects_bad_radii() {
        assert!(RadialStack::new(vec![0.0], vec![1.0], 0.0, 2).is_err());
        assert!(RadialStack::new(vec![2.0, 1.0], vec![1.0, 2.0], 0.0, 2).is_err());
        assert!(RadialStack::new(vec![1.0], vec![1.0], 0.0, 0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let u = RadialStack::new(vec![1.0, 2.0], vec![1.0, 3.0], 0.0, 2).unwrap();
        let v: RadialStack<f64> = serde_json::from_str(&serde_json::to_string(&u).unwrap()).unwrap();
        assert_eq!(u, v);
    }
}
