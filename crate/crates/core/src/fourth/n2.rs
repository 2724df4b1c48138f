use ode_solvers::{Dopri5, OutputType, Rk4, System, Vector2};

use super::FourthBallState;
use crate::core::FlowTrajectory;
use crate::error::{Result, TvError};

/// Relative tolerance handed to the integrator.
pub const N2_RTOL: f64 = 1e-10;

/// RK4 substeps used to re-integrate each accepted step for the residual.
const CHECK_SUBSTEPS: usize = 256;

/// y = (a, R); da/dt = −8/R³, (a − t/R³) dR/dt = 4/R².
#[derive(Clone, Copy)]
struct DiskBall;

impl System<f64, Vector2<f64>> for DiskBall {
    fn system(&self, t: f64, y: &Vector2<f64>, dy: &mut Vector2<f64>) {
        let (a, r) = (y[0], y[1]);
        let r3 = r * r * r;
        dy[0] = -8.0 / r3;
        dy[1] = 4.0 / (r * r * (a - t / r3));
    }
}

/// Integrates the planar ball (a·1_{B_R} plus the t/|x|³ tail) on [0, T].
///
/// Every accepted step is returned. Diagnostics: `gap` = a − t/R³ (must stay
/// positive), `tail` = t, and `residual`, the relative distance between each
/// accepted step and an independent RK4 re-integration of that step.
pub fn fourth_ball_ode_n2(a0: f64, r0: f64, horizon: f64) -> Result<FlowTrajectory<FourthBallState>> {
    if !(a0 > 0.0) || !(r0 > 0.0) {
        return Err(TvError::Domain("need a₀ > 0 and R₀ > 0".into()));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(TvError::Domain("horizon must be positive".into()));
    }
    let state = |t: f64, y: &Vector2<f64>| FourthBallState { n: 2, t, a: y[0], r: y[1], tail: Some(t) };
    let y0 = Vector2::new(a0, r0);
    let mut solver = Dopri5::new(DiskBall, 0.0, horizon, horizon, y0, N2_RTOL, N2_RTOL * 1e-2);
    solver.set_output(OutputType::Sparse);
    solver
        .integrate()
        .map_err(|e| TvError::InvariantViolation(format!("integrator stopped: {e}")))?;
    let (ts, ys) = solver.results().get();

    let mut traj = FlowTrajectory::new(state(0.0, &y0));
    traj.record("gap", a0);
    traj.record("tail", 0.0);
    traj.record("residual", 0.0);
    let mut prev = (0.0, y0);
    for (t, y) in ts.iter().zip(ys) {
        if *t <= prev.0 {
            continue;
        }
        let s = state(*t, y);
        let gap = s.gap().unwrap_or(f64::NAN);
        if !(gap > 0.0) || !(s.r > 0.0) || !(s.a > 0.0) {
            return Err(TvError::InvariantViolation(format!("a − t/R³ = {gap} at t = {t}")));
        }
        let h = (t - prev.0) / CHECK_SUBSTEPS as f64;
        let mut check = Rk4::new(DiskBall, prev.0, prev.1, *t, h);
        check
            .integrate()
            .map_err(|e| TvError::InvariantViolation(format!("residual check failed: {e}")))?;
        let yc = check.y_out().last().copied().unwrap_or(prev.1);
        let res = ((yc[0] - y[0]) / y[0]).abs().max(((yc[1] - y[1]) / y[1]).abs());
        traj.record("gap", gap);
        traj.record("tail", *t);
        traj.record("residual", res);
        traj.push(*t, s)?;
        prev = (*t, *y);
    }
    Ok(traj)
}
