use serde::{Deserialize, Serialize};

use super::{check_exponent, weighted_lp};
use crate::error::{Result, TvError};
use crate::scalar::Field;

/// Periodic piecewise-constant function on the circle ℝ/Lℤ.
///
/// `values[k]` is taken on `[breakpoints[k], breakpoints[k+1])`; the last
/// plateau wraps around to `breakpoints[0] + L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStep<T>", bound = "T: Field + Serialize + for<'a> Deserialize<'a>")]
pub struct StepFunction1D<T> {
    breakpoints: Vec<T>,
    values: Vec<T>,
    period: T,
}

#[derive(Deserialize)]
struct RawStep<T> {
    breakpoints: Vec<T>,
    values: Vec<T>,
    period: T,
}

impl<T: Field> TryFrom<RawStep<T>> for StepFunction1D<T> {
    type Error = TvError;
    fn try_from(r: RawStep<T>) -> Result<Self> {
        StepFunction1D::new(r.breakpoints, r.values, r.period)
    }
}

impl<T: Field> StepFunction1D<T> {
    /// Validates and canonicalizes: adjacent plateaus whose values agree within
    /// [`Field::merge_tol`] are fused (length-weighted mean).
    pub fn new(breakpoints: Vec<T>, values: Vec<T>, period: T) -> Result<Self> {
        if period <= T::zero() {
            return Err(TvError::InvalidInput("period must be positive".into()));
        }
        if values.is_empty() || breakpoints.len() != values.len() {
            return Err(TvError::InvalidInput(format!(
                "need one breakpoint per plateau (got {} breakpoints, {} values)",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] < T::zero() || *breakpoints.last().unwrap() >= period {
            return Err(TvError::InvalidInput("breakpoints must lie in [0, L)".into()));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(TvError::InvalidInput("breakpoints must be strictly increasing".into()));
        }
        let mut u = StepFunction1D { breakpoints, values, period };
        u.canonicalize();
        Ok(u)
    }

    /// Plateaus laid out from x = 0 with the given lengths; L is their sum.
    pub fn from_lengths(values: Vec<T>, lengths: &[T]) -> Result<Self> {
        if lengths.len() != values.len() {
            return Err(TvError::InvalidInput("values and lengths differ in count".into()));
        }
        if lengths.iter().any(|l| *l <= T::zero()) {
            return Err(TvError::InvalidInput("plateau lengths must be positive".into()));
        }
        let mut bps = Vec::with_capacity(lengths.len());
        let mut x = T::zero();
        for l in lengths {
            bps.push(x.clone());
            x = x + l.clone();
        }
        Self::new(bps, values, x)
    }

    pub fn constant(value: T, period: T) -> Result<Self> {
        Self::new(vec![T::zero()], vec![value], period)
    }

    fn canonicalize(&mut self) {
        loop {
            let m = self.values.len();
            if m < 2 {
                return;
            }
            let lengths = self.lengths();
            let mut merged = false;
            let mut bps = vec![self.breakpoints[0].clone()];
            let mut vals = vec![self.values[0].clone()];
            let mut lens = vec![lengths[0].clone()];
            for k in 1..m {
                let last = vals.len() - 1;
                if vals[last].near(&self.values[k]) {
                    let total = lens[last].clone() + lengths[k].clone();
                    vals[last] = (vals[last].clone() * lens[last].clone()
                        + self.values[k].clone() * lengths[k].clone())
                        / total.clone();
                    lens[last] = total;
                    merged = true;
                } else {
                    bps.push(self.breakpoints[k].clone());
                    vals.push(self.values[k].clone());
                    lens.push(lengths[k].clone());
                }
            }
            let last = vals.len() - 1;
            if last > 0 && vals[last].near(&vals[0]) {
                let total = lens[last].clone() + lens[0].clone();
                vals[last] = (vals[last].clone() * lens[last].clone()
                    + vals[0].clone() * lens[0].clone())
                    / total;
                bps.remove(0);
                vals.remove(0);
                merged = true;
            }
            self.breakpoints = bps;
            self.values = vals;
            if !merged {
                return;
            }
        }
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn period(&self) -> &T {
        &self.period
    }

    /// Number of plateaus.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_constant(&self) -> bool {
        self.values.len() == 1
    }

    pub fn lengths(&self) -> Vec<T> {
        let m = self.breakpoints.len();
        (0..m)
            .map(|k| {
                if k + 1 < m {
                    self.breakpoints[k + 1].clone() - self.breakpoints[k].clone()
                } else {
                    self.breakpoints[0].clone() + self.period.clone() - self.breakpoints[k].clone()
                }
            })
            .collect()
    }

    pub fn integral(&self) -> T {
        self.values
            .iter()
            .zip(self.lengths())
            .fold(T::zero(), |acc, (v, l)| acc + v.clone() * l)
    }

    pub fn mean(&self) -> T {
        self.integral() / self.period.clone()
    }

    /// Index of the plateau containing x (taken modulo L).
    pub fn plateau_at(&self, x: &T) -> usize {
        let mut y = x.clone();
        while y < T::zero() {
            y = y + self.period.clone();
        }
        while y >= self.period {
            y = y - self.period.clone();
        }
        match self.breakpoints.iter().rposition(|b| *b <= y) {
            Some(k) => k,
            None => self.values.len() - 1,
        }
    }

    pub fn eval(&self, x: &T) -> T {
        self.values[self.plateau_at(x)].clone()
    }

    /// Sum of |jumps| over all interfaces including the wrap-around one.
    pub fn total_variation(&self) -> T {
        let m = self.values.len();
        if m < 2 {
            return T::zero();
        }
        (0..m).fold(T::zero(), |acc, k| {
            acc + (self.values[(k + 1) % m].clone() - self.values[k].clone()).abs()
        })
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        check_exponent(p)?;
        Ok(weighted_lp(
            self.values.iter().zip(self.lengths()).map(|(v, l)| (v.as_f64(), l.as_f64())),
            p,
        ))
    }

    /// Same breakpoints, values replaced.
    pub fn with_values(&self, values: Vec<T>) -> Result<Self> {
        Self::new(self.breakpoints.clone(), values, self.period.clone())
    }

    pub fn map_values(&self, f: impl Fn(&T) -> T) -> Result<Self> {
        self.with_values(self.values.iter().map(f).collect())
    }

    pub fn to_f64(&self) -> StepFunction1D<f64> {
        StepFunction1D {
            breakpoints: self.breakpoints.iter().map(|b| b.as_f64()).collect(),
            values: self.values.iter().map(|v| v.as_f64()).collect(),
            period: self.period.as_f64(),
        }
    }
}
