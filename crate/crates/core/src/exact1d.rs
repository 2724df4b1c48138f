//! Exact event-driven second-order flow of periodic step functions, and the
//! weighted calibrability test for intervals.
//!
//! Between merges every plateau moves linearly with rate θₖ/ℓₖ, where θₖ is
//! +2 at strict local minima, −2 at strict local maxima and 0 otherwise.

use serde::{Deserialize, Serialize};

use crate::core::{EventKind, FlowTrajectory, Signature, StepFunction1D};
use crate::error::{Result, TvError};
use crate::scalar::Field;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Serialize + for<'a> Deserialize<'a>")]
pub struct PlateauSpeed<T> {
    pub theta: i8,
    pub rate: T,
}

pub fn speeds_1d<T: Field>(u: &StepFunction1D<T>) -> Vec<PlateauSpeed<T>> {
    let m = u.len();
    if m < 2 {
        return vec![PlateauSpeed { theta: 0, rate: T::zero() }; m];
    }
    let v = u.values();
    u.lengths()
        .into_iter()
        .enumerate()
        .map(|(k, len)| {
            let (left, right) = (&v[(k + m - 1) % m], &v[(k + 1) % m]);
            let theta: i8 = if v[k] < *left && v[k] < *right {
                2
            } else if v[k] > *left && v[k] > *right {
                -2
            } else {
                0
            };
            let rate = T::from_i8(theta).unwrap() / len;
            PlateauSpeed { theta, rate }
        })
        .collect()
}

/// Time until adjacent plateaus meet, per cyclic edge k (plateau k | k+1).
fn edge_meeting_times<T: Field>(u: &StepFunction1D<T>, speeds: &[PlateauSpeed<T>]) -> Vec<Option<T>> {
    let m = u.len();
    if m < 2 {
        return vec![];
    }
    let v = u.values();
    (0..m)
        .map(|k| {
            let j = (k + 1) % m;
            let gap = v[j].clone() - v[k].clone();
            let closing = speeds[j].rate.clone() - speeds[k].rate.clone();
            if (gap.is_positive() && closing.is_negative()) || (gap.is_negative() && closing.is_positive()) {
                Some(-gap / closing)
            } else {
                None
            }
        })
        .collect()
}

pub fn next_merge_time<T: Field>(u: &StepFunction1D<T>) -> Option<T> {
    let speeds = speeds_1d(u);
    edge_meeting_times(u, &speeds).into_iter().flatten().reduce(T::min_of)
}

/// State after moving every plateau linearly for `dt` (no merging).
fn drift<T: Field>(u: &StepFunction1D<T>, speeds: &[PlateauSpeed<T>], dt: &T) -> StepFunction1D<T> {
    let vals: Vec<T> = u
        .values()
        .iter()
        .zip(speeds)
        .map(|(v, s)| v.clone() + s.rate.clone() * dt.clone())
        .collect();
    // Strictly before the next merge no two neighbours coincide, so this keeps
    // the plateau structure.
    u.with_values(vals).expect("drift keeps a valid step function")
}

/// Advance to the merge at `dt` and fuse every pair meeting then. Meeting
/// groups get their length-weighted mean so mass is conserved exactly.
fn merge_step<T: Field>(u: &StepFunction1D<T>, speeds: &[PlateauSpeed<T>], dt: &T, meet: &[Option<T>]) -> StepFunction1D<T> {
    let m = u.len();
    let slack = T::merge_tol() * (T::one() + dt.abs());
    let joins: Vec<bool> = meet
        .iter()
        .map(|t| t.as_ref().is_some_and(|t| t.clone() - dt.clone() <= slack))
        .collect();
    let lengths = u.lengths();
    let mut vals: Vec<T> = u
        .values()
        .iter()
        .zip(speeds)
        .map(|(v, s)| v.clone() + s.rate.clone() * dt.clone())
        .collect();
    if joins.iter().all(|j| *j) {
        let mean = u.mean();
        return StepFunction1D::constant(mean, u.period().clone()).expect("positive period");
    }
    // Start scanning right after a non-joining edge so runs never wrap.
    let start = (joins.iter().position(|j| !j).unwrap() + 1) % m;
    let mut k = 0;
    while k < m {
        let first = (start + k) % m;
        let mut group = vec![first];
        while joins[*group.last().unwrap()] {
            group.push((group.last().unwrap() + 1) % m);
            k += 1;
        }
        if group.len() > 1 {
            let (mass, len) = group.iter().fold((T::zero(), T::zero()), |(a, l), &i| {
                (a + vals[i].clone() * lengths[i].clone(), l + lengths[i].clone())
            });
            let mean = mass / len;
            for &i in &group {
                vals[i] = mean.clone();
            }
        }
        k += 1;
    }
    u.with_values(vals).expect("merge keeps a valid step function")
}

fn final_kind<T: Field>(u: &StepFunction1D<T>) -> EventKind {
    if u.values()[0].is_zero() {
        EventKind::Extinction
    } else {
        EventKind::Steady
    }
}

/// Event-driven solution on [0, T]. States are recorded at t = 0, at every
/// merge and at T.
pub fn evolve_1d<T: Field>(u0: &StepFunction1D<T>, horizon: T) -> Result<FlowTrajectory<StepFunction1D<T>, T>> {
    if horizon.is_negative() {
        return Err(TvError::InvalidInput("horizon must be non-negative".into()));
    }
    let mut traj = FlowTrajectory::new(u0.clone());
    let mut u = u0.clone();
    let mut t = T::zero();
    loop {
        let speeds = speeds_1d(&u);
        let meet = edge_meeting_times(&u, &speeds);
        let dt = meet.iter().flatten().cloned().reduce(T::min_of);
        match dt {
            Some(dt) if t.clone() + dt.clone() <= horizon => {
                let before = u.len();
                u = merge_step(&u, &speeds, &dt, &meet);
                t = t + dt;
                let detail = format!("{} plateaus -> {}", before, u.len());
                if t.is_positive() {
                    traj.push(t.clone(), u.clone())?;
                } else {
                    *traj.states.last_mut().unwrap() = u.clone();
                }
                traj.event(t.clone(), EventKind::Merge, detail);
                if u.is_constant() {
                    traj.event(t.clone(), final_kind(&u), "constant");
                }
            }
            _ => {
                if horizon > t {
                    let rest = horizon.clone() - t.clone();
                    let end = if u.is_constant() { u.clone() } else { drift(&u, &speeds, &rest) };
                    traj.push(horizon, end)?;
                }
                break;
            }
        }
    }
    Ok(traj)
}

/// The exact state at time t.
pub fn solution_at<T: Field>(u0: &StepFunction1D<T>, t: T) -> Result<StepFunction1D<T>> {
    Ok(evolve_1d(u0, t)?.last_state().clone())
}

/// Time of the last merge, after which u ≡ mean(u₀).
pub fn extinction_time_1d<T: Field>(u0: &StepFunction1D<T>) -> T {
    let mut u = u0.clone();
    let mut t = T::zero();
    while !u.is_constant() {
        let speeds = speeds_1d(&u);
        let meet = edge_meeting_times(&u, &speeds);
        let dt = meet.iter().flatten().cloned().reduce(T::min_of).expect("a non-constant step function merges");
        u = merge_step(&u, &speeds, &dt, &meet);
        t = t + dt;
    }
    t
}

/// Outcome of the weighted interval calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedCalibration {
    pub calibrable: bool,
    pub lambda: f64,
    pub max_abs_z: f64,
    pub z_profile: Vec<f64>,
}

/// Tolerance on max|z| − 1 for the weighted interval test.
pub const WEIGHTED_CALIBRATION_TOL: f64 = 1e-6;

/// Calibrates [x₀, x₁] for weights a, b sampled on a uniform grid (first and
/// last samples at the endpoints). Integrates (a z)′ = λ b from
/// a(x₀)z(x₀) = −χ_left a(x₀) with trapezoidal quadrature; λ is fixed by
/// z(x₁) = χ_right.
pub fn interval_calibrable_weighted(a: &[f64], b: &[f64], x0: f64, x1: f64, chi: &Signature) -> Result<WeightedCalibration> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(TvError::InvalidInput("weights must share a grid of at least 2 nodes".into()));
    }
    if !(x1 > x0) {
        return Err(TvError::InvalidInput("need x0 < x1".into()));
    }
    if chi.len() != 2 {
        return Err(TvError::InvalidInput("an interval has two boundary points".into()));
    }
    if let Some(w) = a.iter().chain(b).find(|w| !(**w > 0.0)) {
        return Err(TvError::InvalidWeight(format!("weight sample {w} is not positive")));
    }
    let h = (x1 - x0) / (a.len() - 1) as f64;
    let mut cum = vec![0.0; b.len()];
    for i in 1..b.len() {
        cum[i] = cum[i - 1] + 0.5 * h * (b[i - 1] + b[i]);
    }
    let total = *cum.last().unwrap();
    let (chi_l, chi_r) = (chi.get(0), chi.get(1));
    let n = a.len() - 1;
    let lambda = (chi_r * a[n] + chi_l * a[0]) / total;
    let z_profile: Vec<f64> = (0..a.len()).map(|i| (-chi_l * a[0] + lambda * cum[i]) / a[i]).collect();
    let max_abs_z = z_profile.iter().fold(0.0f64, |m, z| m.max(z.abs()));
    Ok(WeightedCalibration {
        calibrable: max_abs_z <= 1.0 + WEIGHTED_CALIBRATION_TOL,
        lambda,
        max_abs_z,
        z_profile,
    })
}

/// Samples a and b on `nodes` points and runs [`interval_calibrable_weighted`].
pub fn interval_calibrable_weighted_fn(
    a: impl Fn(f64) -> f64,
    b: impl Fn(f64) -> f64,
    x0: f64,
    x1: f64,
    chi: &Signature,
    nodes: usize,
) -> Result<WeightedCalibration> {
    let nodes = nodes.max(2);
    let xs: Vec<f64> = (0..nodes).map(|i| x0 + (x1 - x0) * i as f64 / (nodes - 1) as f64).collect();
    let av: Vec<f64> = xs.iter().map(|x| a(*x)).collect();
    let bv: Vec<f64> = xs.iter().map(|x| b(*x)).collect();
    interval_calibrable_weighted(&av, &bv, x0, x1, chi)
}
