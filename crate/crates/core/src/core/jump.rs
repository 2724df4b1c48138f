use serde::{Deserialize, Serialize};

use super::{GridSignal, RadialStack, StepFunction1D};
use crate::scalar::Field;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Serialize + for<'a> Deserialize<'a>")]
pub struct Atom<T> {
    pub location: T,
    pub size: T,
}

/// Jump part of Du: interface locations and trace gaps |u⁺ − u⁻|.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Serialize + for<'a> Deserialize<'a>")]
pub struct JumpMeasure<T> {
    pub atoms: Vec<Atom<T>>,
}

impl<T: Field> JumpMeasure<T> {
    /// Atom at each breakpoint xₖ with size |vₖ − vₖ₋₁|.
    pub fn from_step(u: &StepFunction1D<T>) -> Self {
        let m = u.len();
        if m < 2 {
            return JumpMeasure { atoms: vec![] };
        }
        let v = u.values();
        let atoms = (0..m)
            .map(|k| Atom {
                location: u.breakpoints()[k].clone(),
                size: (v[k].clone() - v[(k + m - 1) % m].clone()).abs(),
            })
            .collect();
        JumpMeasure { atoms }
    }

    /// Atom at each radius (sizes are unweighted trace gaps).
    pub fn from_stack(u: &RadialStack<T>) -> Self {
        let atoms = u
            .radii()
            .iter()
            .enumerate()
            .map(|(k, r)| Atom {
                location: r.clone(),
                size: (u.region_value(k + 1).clone() - u.region_value(k).clone()).abs(),
            })
            .collect();
        JumpMeasure { atoms }
    }

    pub fn total_size(&self) -> T {
        self.atoms.iter().fold(T::zero(), |acc, a| acc + a.size.clone())
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

impl JumpMeasure<f64> {
    /// Edges with |Δu| above `threshold` (default: 10× the median |Δu|).
    pub fn from_grid(g: &GridSignal, threshold: Option<f64>) -> Self {
        let d = g.differences();
        let thr = threshold.unwrap_or_else(|| {
            let mut a: Vec<f64> = d.iter().map(|x| x.abs()).collect();
            a.sort_by(f64::total_cmp);
            (10.0 * a[a.len() / 2]).max(1e-12)
        });
        let atoms = d
            .iter()
            .enumerate()
            .filter(|(_, x)| x.abs() > thr)
            .map(|(e, x)| Atom { location: g.edge_position(e), size: x.abs() })
            .collect();
        JumpMeasure { atoms }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::Geometry;

    #[test]
    fn step_atoms() {
        let u = StepFunction1D::new(vec![0.0, 0.75], vec![0.0, 1.0], 1.0).unwrap();
        let j = JumpMeasure::from_step(&u);
        assert_eq!(
            j.atoms,
            vec![Atom { location: 0.0, size: 1.0 }, Atom { location: 0.75, size: 1.0 }]
        );
        assert_eq!(j.total_size(), u.total_variation());
        assert!(JumpMeasure::from_step(&StepFunction1D::constant(1.0, 1.0).unwrap()).is_empty());
    }

    #[test]
    fn stack_atoms() {
        let u = RadialStack::ball(2, 1.0, 1.0).unwrap();
        assert_eq!(JumpMeasure::from_stack(&u).atoms, vec![Atom { location: 1.0, size: 1.0 }]);
    }

    #[test]
    fn grid_atoms() {
        let g = GridSignal::new(vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0], 0.125, Geometry::Periodic1d).unwrap();
        let j = JumpMeasure::from_grid(&g, None);
        assert_eq!(j.len(), 2);
        assert_eq!(j.atoms[0].location, 0.375);
        assert_eq!(j.atoms[1].location, 0.875);
    }
}
