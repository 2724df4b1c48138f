use serde::{Deserialize, Serialize};

use super::{check_exponent, unit_ball_volume, unit_sphere_area, weighted_lp, RadialStack, StepFunction1D};
use crate::error::{Result, TvError};

/// How a grid's nodes sit in space.
///
/// Node i owns the cell `[i h, (i+1) h)`. Periodic grids wrap the last cell
/// onto the first; Neumann grids are a free-ended chain; radial grids treat
/// the cells as shells in ℝⁿ with exact shell volumes as masses and exact
/// sphere areas at the cell interfaces as edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Geometry {
    Periodic1d,
    Neumann1d,
    Radial { n: u32 },
}

/// Sampled function on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct GridSignal {
    samples: Vec<f64>,
    spacing: f64,
    geometry: Geometry,
}

#[derive(Deserialize)]
struct RawGrid {
    samples: Vec<f64>,
    spacing: f64,
    geometry: Geometry,
}

impl TryFrom<RawGrid> for GridSignal {
    type Error = TvError;
    fn try_from(r: RawGrid) -> Result<Self> {
        GridSignal::new(r.samples, r.spacing, r.geometry)
    }
}

impl GridSignal {
    pub fn new(samples: Vec<f64>, spacing: f64, geometry: Geometry) -> Result<Self> {
        if samples.len() < 2 {
            return Err(TvError::InvalidInput("a grid needs at least 2 nodes".into()));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(TvError::InvalidInput("grid spacing must be positive".into()));
        }
        if let Geometry::Radial { n: 0 } = geometry {
            return Err(TvError::InvalidInput("radial dimension must be at least 1".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(TvError::InvalidInput("samples must be finite".into()));
        }
        Ok(GridSignal { samples, spacing, geometry })
    }

    /// Cell averages of a periodic step function on `m` equal cells.
    pub fn sample_step(u: &StepFunction1D<f64>, m: usize) -> Result<Self> {
        let l = *u.period();
        let h = l / m as f64;
        let bps = u.breakpoints();
        let vals = u.values();
        let mut samples = vec![0.0; m];
        // Walk the plateaus once from breakpoints[0] through a full period.
        let x0 = bps[0];
        let k_count = vals.len();
        for (k, v) in vals.iter().enumerate() {
            let a = bps[k] - x0;
            let b = if k + 1 < k_count { bps[k + 1] - x0 } else { l };
            deposit(&mut samples, x0 + a, x0 + b, *v, h, l);
        }
        for s in samples.iter_mut() {
            *s /= h;
        }
        Self::new(samples, h, Geometry::Periodic1d)
    }

    /// Shell averages of a radial stack on `m` shells of width R_max/m.
    pub fn sample_stack(u: &RadialStack<f64>, r_max: f64, m: usize) -> Result<Self> {
        let n = u.dimension();
        let h = r_max / m as f64;
        let nf = n as i32;
        let samples = (0..m)
            .map(|i| {
                let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
                let mut acc = 0.0;
                let mut lo = a;
                for (k, rk) in u.radii().iter().enumerate() {
                    if *rk <= lo {
                        continue;
                    }
                    let hi = rk.min(b);
                    acc += u.values()[k] * (hi.powi(nf) - lo.powi(nf));
                    lo = hi;
                    if lo >= b {
                        break;
                    }
                }
                if lo < b {
                    acc += u.outer_value() * (b.powi(nf) - lo.powi(nf));
                }
                acc / (b.powi(nf) - a.powi(nf))
            })
            .collect();
        Self::new(samples, h, Geometry::Radial { n })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_periodic(&self) -> bool {
        self.geometry == Geometry::Periodic1d
    }

    /// Same geometry, new samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != self.samples.len() {
            return Err(TvError::InvalidInput("sample count changed".into()));
        }
        Self::new(samples, self.spacing, self.geometry)
    }

    /// Cell centres (radii for radial grids).
    pub fn positions(&self) -> Vec<f64> {
        (0..self.len()).map(|i| (i as f64 + 0.5) * self.spacing).collect()
    }

    /// Location of edge e (between node e and node e+1, wrapping for periodic).
    pub fn edge_position(&self, e: usize) -> f64 {
        let x = (e + 1) as f64 * self.spacing;
        if self.is_periodic() && e + 1 == self.len() {
            0.0
        } else {
            x
        }
    }

    /// Quadrature masses of the nodes.
    pub fn masses(&self) -> Vec<f64> {
        let h = self.spacing;
        match self.geometry {
            Geometry::Periodic1d | Geometry::Neumann1d => vec![h; self.len()],
            Geometry::Radial { n } => {
                let w = unit_ball_volume(n) * h.powi(n as i32);
                (0..self.len())
                    .map(|i| w * (((i + 1) as f64).powi(n as i32) - (i as f64).powi(n as i32)))
                    .collect()
            }
        }
    }

    /// Number of edges: M for periodic grids, M − 1 otherwise.
    pub fn edge_count(&self) -> usize {
        if self.is_periodic() {
            self.len()
        } else {
            self.len() - 1
        }
    }

    /// Interface weights multiplying |Δu| in the discrete total variation.
    pub fn edge_weights(&self) -> Vec<f64> {
        match self.geometry {
            Geometry::Periodic1d | Geometry::Neumann1d => vec![1.0; self.edge_count()],
            Geometry::Radial { n } => {
                let a = unit_sphere_area(n);
                (0..self.edge_count())
                    .map(|e| a * ((e + 1) as f64 * self.spacing).powi(n as i32 - 1))
                    .collect()
            }
        }
    }

    /// u_{e+1} − u_e for every edge.
    pub fn differences(&self) -> Vec<f64> {
        let m = self.len();
        (0..self.edge_count()).map(|e| self.samples[(e + 1) % m] - self.samples[e]).collect()
    }

    pub fn total_variation(&self) -> f64 {
        self.differences().iter().zip(self.edge_weights()).map(|(d, w)| d.abs() * w).sum()
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        check_exponent(p)?;
        Ok(weighted_lp(self.samples.iter().copied().zip(self.masses()), p))
    }

    /// Mass-weighted mean.
    pub fn mean(&self) -> f64 {
        let m = self.masses();
        let total: f64 = m.iter().sum();
        self.samples.iter().zip(&m).map(|(v, w)| v * w).sum::<f64>() / total
    }

    /// Mass-weighted inner product ⟨u, v⟩.
    pub fn dot(&self, other: &GridSignal) -> f64 {
        self.samples.iter().zip(&other.samples).zip(self.masses()).map(|((a, b), m)| a * b * m).sum()
    }

    /// Mass-weighted L² distance.
    pub fn l2_distance(&self, other: &GridSignal) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .zip(self.masses())
            .map(|((a, b), m)| m * (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Max |u − mean(u)|.
    pub fn oscillation(&self) -> f64 {
        let mu = self.mean();
        self.samples.iter().map(|v| (v - mu).abs()).fold(0.0, f64::max)
    }
}

/// Adds v·|[a,b) ∩ cell| to each cell, handling the wrap at L.
fn deposit(acc: &mut [f64], a: f64, b: f64, v: f64, h: f64, l: f64) {
    let m = acc.len();
    let mut x = a;
    while x < b {
        let xm = x.rem_euclid(l);
        let mut i = (xm / h).floor() as usize;
        if i >= m {
            i = m - 1;
        }
        let cell_end = x - xm + (i + 1) as f64 * h;
        let y = cell_end.min(b);
        if y <= x {
            break;
        }
        acc[i] += v * (y - x);
        x = y;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sampling_a_step_is_mass_exact() {
        let u = StepFunction1D::new(vec![0.1, 0.55], vec![2.0, -1.0], 1.0).unwrap();
        let g = GridSignal::sample_step(&u, 64).unwrap();
        assert_relative_eq!(g.mean(), u.mean(), epsilon = 1e-14);
        assert_relative_eq!(g.samples()[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(g.samples()[10], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn aligned_step_samples_exactly() {
        let u = StepFunction1D::from_lengths(vec![0.0, 1.0], &[0.75, 0.25]).unwrap();
        let g = GridSignal::sample_step(&u, 8).unwrap();
        assert_eq!(g.samples(), &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
        assert_eq!(g.total_variation(), 2.0);
        assert_relative_eq!(g.lp_norm(1.0).unwrap(), 0.25);
    }

    #[test]
    fn radial_masses_sum_to_ball() {
        let u = RadialStack::ball(3, 1.0, 1.0).unwrap();
        let g = GridSignal::sample_stack(&u, 2.0, 40).unwrap();
        let total: f64 = g.masses().iter().sum();
        assert_relative_eq!(total, unit_ball_volume(3) * 8.0, epsilon = 1e-12);
        assert_relative_eq!(g.total_variation(), u.total_variation(), epsilon = 1e-12);
        assert_relative_eq!(g.lp_norm(2.0).unwrap(), u.lp_norm(2.0).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(GridSignal::new(vec![1.0], 1.0, Geometry::Periodic1d).is_err());
        assert!(GridSignal::new(vec![1.0, 2.0], 0.0, Geometry::Periodic1d).is_err());
        assert!(GridSignal::new(vec![1.0, 2.0], 1.0, Geometry::Radial { n: 0 }).is_err());
    }

    #[test]
    fn geometry_json() {
        let g = GridSignal::new(vec![0.0, 1.0], 0.5, Geometry::Radial { n: 2 }).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.contains(r#""kind":"radial""#));
        assert_eq!(serde_json::from_str::<GridSignal>(&s).unwrap(), g);
    }
}
