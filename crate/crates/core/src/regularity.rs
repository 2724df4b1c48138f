//! Jump-set and gradient monotonicity checks along trajectories.
//!
//! Along the second-order flow jumps never appear or grow: every atom of
//! |Du(t₂)| sits at an atom of |Du(t₁)| with no larger trace gap, and in 1D
//! every difference |Δu| is non-increasing.

use serde::{Deserialize, Serialize};

use crate::core::{FlowTrajectory, Geometry, GridSignal, JumpMeasure, RadialStack, StepFunction1D};
use crate::error::{Result, TvError};
use crate::fourth::FourthBallState;
use crate::scalar::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// A jump at a location where the earlier state had none.
    NewJump,
    /// A jump (or grid difference) larger than before.
    JumpGrew,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub t_early: f64,
    pub t_late: f64,
    pub location: f64,
    pub early: Option<f64>,
    pub late: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub pairs_checked: usize,
    pub violations: Vec<Violation>,
}

impl RegularityReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A state whose jump part can be compared with an earlier state's.
pub trait JumpSource {
    fn jump_measure(&self) -> JumpMeasure<f64>;

    /// (location, earlier size if any, later size, kind) for each offending
    /// jump of `self` relative to `earlier`.
    fn jump_violations(&self, earlier: &Self, tol: f64) -> Vec<(f64, Option<f64>, f64, ViolationKind)> {
        let before = earlier.jump_measure();
        self.jump_measure()
            .atoms
            .into_iter()
            .filter_map(|a| match before.atoms.iter().find(|b| b.location == a.location) {
                None => Some((a.location, None, a.size, ViolationKind::NewJump)),
                Some(b) if a.size > b.size + tol => Some((a.location, Some(b.size), a.size, ViolationKind::JumpGrew)),
                Some(_) => None,
            })
            .collect()
    }
}

fn to_f64_measure<T: Field>(m: JumpMeasure<T>) -> JumpMeasure<f64> {
    JumpMeasure {
        atoms: m
            .atoms
            .into_iter()
            .map(|a| crate::core::Atom { location: a.location.as_f64(), size: a.size.as_f64() })
            .collect(),
    }
}

impl<T: Field> JumpSource for StepFunction1D<T> {
    fn jump_measure(&self) -> JumpMeasure<f64> {
        to_f64_measure(JumpMeasure::from_step(self))
    }
}

impl<T: Field> JumpSource for RadialStack<T> {
    fn jump_measure(&self) -> JumpMeasure<f64> {
        to_f64_measure(JumpMeasure::from_stack(self))
    }
}

impl JumpSource for FourthBallState {
    /// One atom at R with gap a (a − t/R³ with the planar tail).
    fn jump_measure(&self) -> JumpMeasure<f64> {
        let gap = self.gap().unwrap_or(self.a);
        if gap == 0.0 {
            return JumpMeasure { atoms: vec![] };
        }
        JumpMeasure { atoms: vec![crate::core::Atom { location: self.r, size: gap.abs() }] }
    }
}

impl JumpSource for GridSignal {
    /// Threshold-detected atoms (10× median |Δu|).
    fn jump_measure(&self) -> JumpMeasure<f64> {
        JumpMeasure::from_grid(self, None)
    }

    /// Edge-wise: |Δu_e| may not exceed its earlier value by more than tol.
    fn jump_violations(&self, earlier: &Self, tol: f64) -> Vec<(f64, Option<f64>, f64, ViolationKind)> {
        self.differences()
            .iter()
            .zip(earlier.differences())
            .enumerate()
            .filter(|(_, (late, early))| late.abs() > early.abs() + tol)
            .map(|(e, (late, early))| (self.edge_position(e), Some(early.abs()), late.abs(), ViolationKind::JumpGrew))
            .collect()
    }
}

/// Jump part of any supported state.
pub fn jump_measure<S: JumpSource>(u: &S) -> JumpMeasure<f64> {
    u.jump_measure()
}

/// Compares every pair of states t₁ < t₂. Step functions and stacks match
/// atoms exactly; grid signals compare edge differences.
pub fn check_jump_monotonicity<S: JumpSource, T: Field>(traj: &FlowTrajectory<S, T>, tol: f64) -> Result<RegularityReport> {
    if traj.len() < 2 {
        return Err(TvError::InvalidInput("need at least two states".into()));
    }
    let times: Vec<f64> = traj.times.iter().map(|t| t.as_f64()).collect();
    let mut report = RegularityReport { pairs_checked: 0, violations: vec![] };
    for j in 1..traj.len() {
        for i in 0..j {
            report.pairs_checked += 1;
            for (location, early, late, kind) in traj.states[j].jump_violations(&traj.states[i], tol) {
                report.violations.push(Violation { kind, t_early: times[i], t_late: times[j], location, early, late });
            }
        }
    }
    Ok(report)
}

/// |Δu_e(t₂)| ≤ |Δu_e(t₁)| + tol on every edge of a 1D grid trajectory.
pub fn check_gradient_bound_1d(traj: &FlowTrajectory<GridSignal>, tol: f64) -> Result<RegularityReport> {
    if traj.states.iter().any(|u| matches!(u.geometry(), Geometry::Radial { .. })) {
        return Err(TvError::NotApplicable("the pointwise gradient bound is a 1D statement".into()));
    }
    check_jump_monotonicity(traj, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact1d::evolve_1d;
    use crate::fourth::evolve_fourth_ball;
    use crate::minmov::{minimizing_movements, prox_tv};
    use num_rational::BigRational;

    #[test]
    fn atoms_of_examples() {
        let u = StepFunction1D::new(vec![0.0, 0.75], vec![0.0, 1.0], 1.0).unwrap();
        let m = jump_measure(&u);
        assert_eq!(m.atoms.iter().map(|a| (a.location, a.size)).collect::<Vec<_>>(), vec![(0.0, 1.0), (0.75, 1.0)]);
        let b = RadialStack::ball(3, 1.0, 1.0).unwrap();
        assert_eq!(jump_measure(&b).atoms.len(), 1);
        assert!(jump_measure(&RadialStack::constant(2, 0.5).unwrap()).is_empty());
    }

    #[test]
    fn exact_trajectory_is_clean() {
        let r = |s: &str| crate::scalar::rational(s).unwrap();
        let u = StepFunction1D::<BigRational>::new(
            vec![r("0"), r("1/8"), r("1/2"), r("5/8"), r("3/4")],
            vec![r("1"), r("-1/2"), r("2"), r("0"), r("1/3")],
            r("1"),
        )
        .unwrap();
        let traj = evolve_1d(&u, r("10")).unwrap();
        assert!(check_jump_monotonicity(&traj, 0.0).unwrap().is_clean());
    }

    #[test]
    fn minmov_trajectory_is_clean() {
        let u = StepFunction1D::new(vec![0.0, 0.2, 0.45, 0.7], vec![1.0, -0.5, 0.75, 0.0], 1.0).unwrap();
        let g = GridSignal::sample_step(&u, 128).unwrap();
        let traj = minimizing_movements(&g, 1e-3, 40, prox_tv).unwrap();
        assert!(check_jump_monotonicity(&traj, 1e-8).unwrap().is_clean());
        assert!(check_gradient_bound_1d(&traj, 1e-8).unwrap().is_clean());
    }

    #[test]
    fn fabricated_growth_is_flagged() {
        let a = StepFunction1D::new(vec![0.0, 0.5], vec![0.0, 1.0], 1.0).unwrap();
        let b = StepFunction1D::new(vec![0.0, 0.5], vec![0.0, 2.0], 1.0).unwrap();
        let c = StepFunction1D::new(vec![0.0, 0.25, 0.5], vec![0.0, 0.5, 1.0], 1.0).unwrap();
        let mut traj = FlowTrajectory::new(a.clone());
        traj.push(1.0, b).unwrap();
        let rep = check_jump_monotonicity(&traj, 1e-12).unwrap();
        assert_eq!(rep.violations.len(), 2);
        assert!(rep.violations.iter().all(|v| v.kind == ViolationKind::JumpGrew));
        let mut traj = FlowTrajectory::new(a);
        traj.push(1.0, c).unwrap();
        let rep = check_jump_monotonicity(&traj, 1e-12).unwrap();
        assert!(rep.violations.iter().any(|v| v.kind == ViolationKind::NewJump && v.location == 0.25));
    }

    #[test]
    fn reversal_flags_what_forward_order_allows() {
        let u = StepFunction1D::new(vec![0.0, 0.2, 0.45, 0.7], vec![1.0, -0.5, 0.75, 0.0], 1.0).unwrap();
        let g = GridSignal::sample_step(&u, 64).unwrap();
        let fwd = minimizing_movements(&g, 1e-3, 10, prox_tv).unwrap();
        let mut rev = FlowTrajectory::new(fwd.states[fwd.len() - 1].clone());
        for (k, s) in fwd.states.iter().rev().skip(1).enumerate() {
            rev.push((k + 1) as f64, s.clone()).unwrap();
        }
        assert!(check_jump_monotonicity(&fwd, 1e-8).unwrap().is_clean());
        let flagged = check_jump_monotonicity(&rev, 1e-8).unwrap();
        assert!(!flagged.is_clean());
        // Every flagged pair in reverse order is a strict decrease forward.
        for v in &flagged.violations {
            assert!(v.late > v.early.unwrap() + 1e-8);
        }
    }

    #[test]
    fn constant_grid_trajectory_is_clean() {
        let g = GridSignal::new(vec![0.3; 8], 0.125, Geometry::Periodic1d).unwrap();
        let traj = minimizing_movements(&g, 1e-2, 5, prox_tv).unwrap();
        assert!(check_gradient_bound_1d(&traj, 0.0).unwrap().is_clean());
    }

    #[test]
    fn moving_fourth_order_front_fails_inclusion() {
        let traj = evolve_fourth_ball(3, 1.0, 1.0, 1.0 / 60.0, 10).unwrap();
        let rep = check_jump_monotonicity(&traj, 1e-12).unwrap();
        assert!(rep.violations.iter().any(|v| v.kind == ViolationKind::NewJump));
        let still = evolve_fourth_ball(4, 1.0, 1.0, 0.02, 10).unwrap();
        assert!(check_jump_monotonicity(&still, 1e-12).unwrap().is_clean());
    }
}
