//! Minimizing movements for the second-order flow on 1D and radial grids.
//!
//! Each step is the exact prox w = argmin λ TV(w) + ½‖w − f‖² of the discrete
//! weighted total variation.

mod certificate;
mod chain;
mod oracle;

pub use certificate::{verify_subdifferential, ProxCertificate};
pub use chain::{prox_chain, prox_cycle};
pub use oracle::{brute_force_prox_oracle, ORACLE_MAX_NODES};

use crate::core::{EventKind, FlowTrajectory, Geometry, GridSignal};
use crate::error::{Result, TvError};

/// Oscillation below which an iterate counts as numerically constant.
pub const STEADY_TOL: f64 = 1e-9;

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(TvError::InvalidInput(format!("prox parameter must be positive, got {lambda}")))
    }
}

/// Exact prox on a periodic or Neumann 1D grid (unit edge weights, masses h).
pub fn prox_tv_1d(f: &GridSignal, lambda: f64) -> Result<GridSignal> {
    check_lambda(lambda)?;
    let w = match f.geometry() {
        Geometry::Periodic1d => prox_cycle(f.samples(), &f.masses(), &f.edge_weights(), lambda),
        Geometry::Neumann1d => prox_chain(f.samples(), &f.masses(), &f.edge_weights(), lambda),
        Geometry::Radial { .. } => {
            return Err(TvError::InvalidInput("prox_tv_1d needs a 1D grid; use prox_tv_radial".into()))
        }
    };
    f.with_samples(w)
}

/// Exact prox on a radial grid: masses are shell volumes, edge weights the
/// sphere areas at cell interfaces.
pub fn prox_tv_radial(f: &GridSignal, lambda: f64) -> Result<GridSignal> {
    check_lambda(lambda)?;
    if !matches!(f.geometry(), Geometry::Radial { .. }) {
        return Err(TvError::InvalidInput("prox_tv_radial needs a radial grid".into()));
    }
    f.with_samples(prox_chain(f.samples(), &f.masses(), &f.edge_weights(), lambda))
}

/// Dispatches on the grid geometry.
pub fn prox_tv(f: &GridSignal, lambda: f64) -> Result<GridSignal> {
    match f.geometry() {
        Geometry::Radial { .. } => prox_tv_radial(f, lambda),
        _ => prox_tv_1d(f, lambda),
    }
}

/// Runs `steps` prox steps of size τ, recording `tv`, `l2` and
/// `dissipation_residual` = |(½‖u_{k+1}‖² − ½‖u_k‖²)/τ + TV(u_{k+1})|.
/// The first iterate whose oscillation drops below [`STEADY_TOL`] is logged as
/// an extinction (mean zero) or steady event.
pub fn minimizing_movements<P>(u0: &GridSignal, tau: f64, steps: usize, prox: P) -> Result<FlowTrajectory<GridSignal>>
where
    P: Fn(&GridSignal, f64) -> Result<GridSignal>,
{
    if !(tau > 0.0) {
        return Err(TvError::InvalidInput("time step must be positive".into()));
    }
    let mut traj = FlowTrajectory::new(u0.clone());
    let mut u = u0.clone();
    let mut energy = 0.5 * u.dot(&u);
    traj.record("tv", u.total_variation());
    traj.record("l2", (2.0 * energy).sqrt());
    traj.record("dissipation_residual", 0.0);
    let mut settled = u.oscillation() <= STEADY_TOL;
    for k in 1..=steps {
        let next = prox(&u, tau)?;
        let e_next = 0.5 * next.dot(&next);
        let tv = next.total_variation();
        traj.record("tv", tv);
        traj.record("l2", (2.0 * e_next).sqrt());
        traj.record("dissipation_residual", ((e_next - energy) / tau + tv).abs());
        let t = k as f64 * tau;
        if !settled && next.oscillation() <= STEADY_TOL {
            settled = true;
            let kind = if next.mean().abs() <= STEADY_TOL { EventKind::Extinction } else { EventKind::Steady };
            traj.event(t, kind, format!("step {k}"));
        }
        traj.push(t, next.clone())?;
        u = next;
        energy = e_next;
    }
    Ok(traj)
}

/// Iterates until the oscillation drops below `tol` and returns that time,
/// or `None` after `max_steps`.
pub fn numerical_extinction_time<P>(u0: &GridSignal, tau: f64, max_steps: usize, tol: f64, prox: P) -> Result<Option<f64>>
where
    P: Fn(&GridSignal, f64) -> Result<GridSignal>,
{
    let mut u = u0.clone();
    if u.oscillation() <= tol {
        return Ok(Some(0.0));
    }
    for k in 1..=max_steps {
        u = prox(&u, tau)?;
        if u.oscillation() <= tol {
            return Ok(Some(k as f64 * tau));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{RadialStack, StepFunction1D};
    use approx::assert_relative_eq;

    fn neumann(v: &[f64]) -> GridSignal {
        GridSignal::new(v.to_vec(), 1.0, Geometry::Neumann1d).unwrap()
    }

    #[test]
    fn three_node_example_and_certificate() {
        let f = neumann(&[0.0, 1.0, 0.0]);
        let w = prox_tv_1d(&f, 0.1).unwrap();
        for (a, b) in w.samples().iter().zip([0.1, 0.8, 0.1]) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
        let c = verify_subdifferential(&w, &f, 0.1).unwrap();
        assert!(c.is_valid(1e-10), "{c:?}");
        assert_relative_eq!(c.z[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(c.z[1], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_fails_certificate() {
        let f = neumann(&[0.0, 1.0, 0.0]);
        assert!(verify_subdifferential(&f, &f, 1.0).unwrap().pairing_gap > 0.5);
        let p = GridSignal::new(vec![0.0, 1.0, 0.0, 0.0], 0.25, Geometry::Periodic1d).unwrap();
        assert!(!verify_subdifferential(&p, &p, 1.0).unwrap().is_valid(1e-8));
    }

    #[test]
    fn constant_certificate_is_zero() {
        let f = neumann(&[2.0; 5]);
        let c = verify_subdifferential(&f, &f, 0.3).unwrap();
        assert_eq!(c.max_residual(), 0.0);
    }

    #[test]
    fn limits_of_lambda() {
        let f = GridSignal::new(vec![0.3, -1.0, 2.0, 0.0, 1.5, 0.2], 1.0 / 6.0, Geometry::Periodic1d).unwrap();
        let w = prox_tv_1d(&f, 1e-15).unwrap();
        for (a, b) in w.samples().iter().zip(f.samples()) {
            assert!((a - b).abs() <= 1e-12);
        }
        let w = prox_tv_1d(&f, 10.0).unwrap();
        for a in w.samples() {
            assert_relative_eq!(*a, f.mean(), epsilon = 1e-12);
        }
        assert!(prox_tv_1d(&f, 0.0).is_err());
    }

    #[test]
    fn radial_n1_matches_neumann() {
        let v = vec![1.0, 1.0, 0.5, 0.0, 0.0, 0.25];
        let r = GridSignal::new(v.clone(), 0.5, Geometry::Radial { n: 1 }).unwrap();
        let l = GridSignal::new(v, 0.5, Geometry::Neumann1d).unwrap();
        let a = prox_tv_radial(&r, 0.05).unwrap();
        let b = prox_tv_1d(&l, 0.05).unwrap();
        for (x, y) in a.samples().iter().zip(b.samples()) {
            assert_relative_eq!(*x, *y, epsilon = 1e-13);
        }
    }

    #[test]
    fn disk_plateau_speed() {
        let u = RadialStack::ball(2, 1.0, 1.0).unwrap();
        let f = GridSignal::sample_stack(&u, 4.0, 400).unwrap();
        let w = prox_tv_radial(&f, 0.01).unwrap();
        assert_relative_eq!(w.samples()[0], 0.98, epsilon = 1e-12);
        assert_relative_eq!(w.samples()[99], 0.98, epsilon = 1e-12);
        let c = verify_subdifferential(&w, &f, 0.01).unwrap();
        assert!(c.is_valid(1e-9), "{c:?}");
    }

    #[test]
    fn constant_is_stationary() {
        let f = GridSignal::new(vec![0.7; 16], 1.0 / 16.0, Geometry::Periodic1d).unwrap();
        let traj = minimizing_movements(&f, 1e-3, 5, prox_tv).unwrap();
        assert!(traj.states.iter().all(|s| s.samples().iter().all(|v| (v - 0.7).abs() <= 1e-14)));
    }

    #[test]
    fn bump_decays_at_exact_rate() {
        let u = StepFunction1D::from_lengths(vec![0.0, 1.0], &[0.75, 0.25]).unwrap();
        let g = GridSignal::sample_step(&u, 512).unwrap();
        let traj = minimizing_movements(&g, 1e-4, 100, prox_tv).unwrap();
        let top = traj.last_state().samples()[500];
        assert_relative_eq!((1.0 - top) / 0.01, 8.0, epsilon = 1e-9);
    }

    #[test]
    fn extinction_of_bump() {
        let u = StepFunction1D::from_lengths(vec![0.0, 1.0], &[0.75, 0.25]).unwrap();
        let g = GridSignal::sample_step(&u, 512).unwrap();
        let t = numerical_extinction_time(&g, 1e-4, 10_000, STEADY_TOL, prox_tv).unwrap().unwrap();
        assert!((t - 0.09375).abs() <= 1e-4 + 1e-12, "{t}");
    }
}
