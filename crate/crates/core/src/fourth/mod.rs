//! Fourth-order (H⁻¹) flow of radial characteristic functions.
//!
//! A ball u = a·1_{B_R} stays a ball: for n ≠ 2 in closed form, for n = 2
//! through an ODE coupled to the t/|x|³ tail. Also: calibration profiles,
//! Saint-Venant speeds, and annulus calibrability.

mod calibration;
mod n2;
mod saint_venant;

pub use calibration::{
    annulus_calibrable_fourth, exterior_calibration, find_q_star, fourth_ball_calibration, AnnulusCalibration,
    CalibrationProfile, QStar, FEASIBILITY_NODES, Q_STAR_BRACKET,
};
pub use n2::{fourth_ball_ode_n2, N2_RTOL};
pub use saint_venant::{lambda_saint_venant, saint_venant_radial, SaintVenantSolution, SvGeometry, SV_CELLS};

use serde::{Deserialize, Serialize};

use crate::core::{EventKind, FlowTrajectory, RadialStack};
use crate::error::{Result, TvError};

/// State of u = a·1_{B_R}; for n = 2 the tail amplitude (t in t/|x|³) too.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourthBallState {
    pub n: u32,
    pub t: f64,
    pub a: f64,
    pub r: f64,
    pub tail: Option<f64>,
}

impl FourthBallState {
    /// a − t/R³ (n = 2 only).
    pub fn gap(&self) -> Option<f64> {
        self.tail.map(|t| self.a - t / self.r.powi(3))
    }
}

impl FourthBallState {
    /// a·1_{B_R} as a radial stack (n ≠ 2; the planar tail is not a stack).
    pub fn to_stack(&self) -> Result<RadialStack<f64>> {
        if self.tail.is_some() {
            return Err(TvError::NotApplicable("the planar solution carries a tail outside the ball".into()));
        }
        RadialStack::ball(self.n, self.a, self.r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum BallEvolution {
    Alive(FourthBallState),
    Extinct { time: f64 },
}

fn check_ball(n: u32, a: f64, r: f64) -> Result<()> {
    if n < 1 {
        return Err(TvError::Domain("dimension must be at least 1".into()));
    }
    if !(a > 0.0) || !(r > 0.0) {
        return Err(TvError::Domain(format!("need a > 0 and R > 0 (a = {a}, R = {r})")));
    }
    Ok(())
}

/// n(4n − 10), the constant rate of −d(aR³)/dt.
pub fn volume_moment_rate(n: u32) -> f64 {
    let n = n as f64;
    n * (4.0 * n - 10.0)
}

/// Extinction time a₀R₀³/(n(4n − 10)), finite for n ≥ 3.
pub fn fourth_extinction_time(n: u32, a0: f64, r0: f64) -> Result<Option<f64>> {
    check_ball(n, a0, r0)?;
    Ok(if n >= 3 { Some(a0 * r0.powi(3) / volume_moment_rate(n)) } else { None })
}

/// Closed-form ball solution for n ≠ 2:
/// f = 1 − n(4n−10)t/(a₀R₀³), a = a₀f^{(n+2)/(4n−10)}, R = R₀f^{(n−4)/(4n−10)}.
pub fn fourth_ball_closed_form(n: u32, a0: f64, r0: f64, t: f64) -> Result<BallEvolution> {
    if n == 2 {
        return Err(TvError::NotApplicable("n = 2 has no closed form; use fourth_ball_ode_n2".into()));
    }
    check_ball(n, a0, r0)?;
    if !(t >= 0.0) {
        return Err(TvError::Domain("time must be non-negative".into()));
    }
    let k = volume_moment_rate(n);
    let f = 1.0 - k * t / (a0 * r0.powi(3));
    if f <= 0.0 {
        return Ok(BallEvolution::Extinct { time: a0 * r0.powi(3) / k });
    }
    let nf = n as f64;
    let a = a0 * f.powf((nf + 2.0) / (4.0 * nf - 10.0));
    let r = if n == 4 { r0 } else { r0 * f.powf((nf - 4.0) / (4.0 * nf - 10.0)) };
    Ok(BallEvolution::Alive(FourthBallState { n, t, a, r, tail: None }))
}

/// Ball trajectory on [0, T]: for n ≠ 2 the closed form sampled at
/// `samples` equal steps (stopping at extinction, which is logged), for n = 2
/// every accepted step of [`fourth_ball_ode_n2`].
pub fn evolve_fourth_ball(n: u32, a0: f64, r0: f64, horizon: f64, samples: usize) -> Result<FlowTrajectory<FourthBallState>> {
    if n == 2 {
        if horizon == 0.0 {
            check_ball(n, a0, r0)?;
            return Ok(FlowTrajectory::new(FourthBallState { n, t: 0.0, a: a0, r: r0, tail: Some(0.0) }));
        }
        return fourth_ball_ode_n2(a0, r0, horizon);
    }
    check_ball(n, a0, r0)?;
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(TvError::Domain("horizon must be non-negative".into()));
    }
    let mut traj = FlowTrajectory::new(FourthBallState { n, t: 0.0, a: a0, r: r0, tail: None });
    if horizon == 0.0 || samples == 0 {
        return Ok(traj);
    }
    for k in 1..=samples {
        let t = horizon * k as f64 / samples as f64;
        match fourth_ball_closed_form(n, a0, r0, t)? {
            BallEvolution::Alive(s) => traj.push(t, s)?,
            BallEvolution::Extinct { time } => {
                traj.event(time, EventKind::Extinction, "ball vanishes");
                let r = fourth_ball_closed_form(n, a0, r0, time)
                    .ok()
                    .and_then(|e| match e {
                        BallEvolution::Alive(s) => Some(s.r),
                        BallEvolution::Extinct { .. } => None,
                    })
                    .unwrap_or(0.0);
                if time > *traj.times.last().unwrap_or(&0.0) {
                    traj.push(time, FourthBallState { n, t: time, a: 0.0, r, tail: None })?;
                }
                break;
            }
        }
    }
    Ok(traj)
}

/// (da/dt, dR/dt) = (−n(n+2)/R³, −n(n−4)/(aR²)).
pub fn fourth_ball_rhs(n: u32, a: f64, r: f64) -> Result<(f64, f64)> {
    check_ball(n, a, r)?;
    let nf = n as f64;
    Ok((-nf * (nf + 2.0) / r.powi(3), -nf * (nf - 4.0) / (a * r * r)))
}

/// ν·(∇div Z_in − ∇div Z_out) on the sphere of radius R: −n(n−4)/R².
pub fn jump_normal_derivative(n: u32, r: f64) -> Result<f64> {
    if n == 2 {
        return Err(TvError::NotApplicable("the exterior profile r^{3−n} degenerates for n = 2".into()));
    }
    if n < 1 || !(r > 0.0) {
        return Err(TvError::Domain("need n ≥ 1 and R > 0".into()));
    }
    let nf = n as f64;
    Ok(-nf * (nf - 4.0) / (r * r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn alive(e: BallEvolution) -> FourthBallState {
        match e {
            BallEvolution::Alive(s) => s,
            BallEvolution::Extinct { .. } => panic!("extinct"),
        }
    }

    #[test]
    fn closed_form_examples() {
        let s = alive(fourth_ball_closed_form(5, 1.0, 1.0, 0.01).unwrap());
        assert_relative_eq!(s.a, 0.5f64.powf(0.7), epsilon = 1e-15);
        assert_relative_eq!(s.r, 0.5f64.powf(0.1), epsilon = 1e-15);
        assert_relative_eq!(fourth_extinction_time(5, 1.0, 1.0).unwrap().unwrap(), 0.02, epsilon = 1e-16);
        let s = alive(fourth_ball_closed_form(1, 1.0, 1.0, 4.0).unwrap());
        assert_relative_eq!(s.a, 0.2, epsilon = 1e-15);
        assert_relative_eq!(s.r, 5.0, epsilon = 1e-14);
        for t in [0.0, 0.01, 0.04] {
            assert_eq!(alive(fourth_ball_closed_form(4, 1.0, 1.0, t).unwrap()).r, 1.0);
        }
        assert!(matches!(fourth_ball_closed_form(5, 1.0, 1.0, 0.02).unwrap(), BallEvolution::Extinct { .. }));
        assert!(fourth_ball_closed_form(2, 1.0, 1.0, 0.1).is_err());
        assert_eq!(fourth_extinction_time(1, 1.0, 1.0).unwrap(), None);
    }

    #[test]
    fn sampled_trajectory() {
        let traj = evolve_fourth_ball(5, 1.0, 1.0, 1.0, 100).unwrap();
        assert_relative_eq!(traj.final_event(EventKind::Extinction).unwrap().time, 0.02, epsilon = 1e-16);
        assert_eq!(traj.last_state().a, 0.0);
        let traj = evolve_fourth_ball(4, 1.0, 1.0, 0.01, 10).unwrap();
        assert!(traj.states.iter().all(|s| s.r == 1.0));
        assert_eq!(evolve_fourth_ball(2, 1.0, 1.0, 0.0, 10).unwrap().len(), 1);
    }

    #[test]
    fn rhs_examples() {
        assert_eq!(fourth_ball_rhs(3, 1.0, 1.0).unwrap(), (-15.0, 3.0));
        assert_eq!(fourth_ball_rhs(4, 0.3, 2.5).unwrap().1, 0.0);
        let (da, dr) = fourth_ball_rhs(5, 1.0, 1.0).unwrap();
        assert_eq!(3.0 * dr + da, -50.0);
        assert!(fourth_ball_rhs(3, 0.0, 1.0).is_err());
        assert!(fourth_ball_rhs(3, 1.0, -1.0).is_err());
    }

    #[test]
    fn jump_examples() {
        assert_eq!(jump_normal_derivative(4, 1.7).unwrap(), 0.0);
        assert_eq!(jump_normal_derivative(3, 1.0).unwrap(), 3.0);
        assert_eq!(jump_normal_derivative(5, 2.0).unwrap(), -1.25);
        assert!(jump_normal_derivative(2, 1.0).is_err());
    }
}
