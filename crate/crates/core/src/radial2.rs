//! Exact second-order flow of radial stacks in ℝⁿ.
//!
//! Radii never move; each bounded region changes value at its calibrated
//! speed, the exterior at speed 0.

use serde::{Deserialize, Serialize};

use crate::core::{EventKind, FlowTrajectory, RadialStack, Signature};
use crate::error::{Result, TvError};
use crate::scalar::{powi, Field};

/// A connected radial region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", bound = "T: Serialize + for<'a> Deserialize<'a>")]
pub enum RegionGeometry<T> {
    Ball { radius: T },
    Annulus { inner: T, outer: T },
    Exterior { radius: T },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Serialize + for<'a> Deserialize<'a>")]
pub struct RegionSpeed<T> {
    pub region: usize,
    pub rate: T,
    pub signature: Signature,
}

/// Speed of a calibrable radial region with boundary signs χ.
///
/// ball → χ_out·n/R; exterior → 0;
/// annulus → n(χ_out R_out^{n−1} + χ_in R_in^{n−1}) / (R_out^n − R_in^n).
pub fn region_speed_radial<T: Field>(n: u32, geometry: &RegionGeometry<T>, chi_in: Option<i8>, chi_out: Option<i8>) -> Result<T> {
    if n < 1 {
        return Err(TvError::Geometry("dimension must be at least 1".into()));
    }
    let sign = |c: i8| -> Result<T> {
        match c {
            1 => Ok(T::one()),
            -1 => Ok(-T::one()),
            _ => Err(TvError::Geometry(format!("signature entry {c} is not ±1"))),
        }
    };
    let nt = T::from_u32(n).unwrap();
    match (geometry, chi_in, chi_out) {
        (RegionGeometry::Ball { radius }, None, Some(c)) if radius.is_positive() => Ok(sign(c)? * nt / radius.clone()),
        (RegionGeometry::Exterior { radius }, _, None) if radius.is_positive() => {
            if let Some(c) = chi_in {
                sign(c)?;
            }
            Ok(T::zero())
        }
        (RegionGeometry::Annulus { inner, outer }, Some(ci), Some(co)) if inner.is_positive() && outer > inner => {
            let num = sign(co)? * powi(outer, n - 1) + sign(ci)? * powi(inner, n - 1);
            Ok(nt * num / (powi(outer, n) - powi(inner, n)))
        }
        _ => Err(TvError::Geometry(format!(
            "{geometry:?} does not match boundary signs (in: {chi_in:?}, out: {chi_out:?})"
        ))),
    }
}

fn sgn<T: Field>(x: T) -> i8 {
    if x.is_positive() {
        1
    } else {
        -1
    }
}

/// Per-region signatures χᵢ = sgn(neighbour − value), inner boundary first.
/// The exterior region is included (one entry); a constant stack has none.
pub fn signatures_from_stack<T: Field>(u: &RadialStack<T>) -> Vec<Signature> {
    if u.is_constant() {
        return vec![];
    }
    let v = u.region_values();
    let last = v.len() - 1;
    (0..v.len())
        .map(|k| {
            let mut s = Vec::with_capacity(2);
            if k > 0 {
                s.push(sgn(v[k - 1].clone() - v[k].clone()));
            }
            if k < last {
                s.push(sgn(v[k + 1].clone() - v[k].clone()));
            }
            Signature::new(s).expect("signs are ±1")
        })
        .collect()
}

fn region_geometry<T: Field>(u: &RadialStack<T>, k: usize) -> RegionGeometry<T> {
    let r = u.radii();
    if k == r.len() {
        RegionGeometry::Exterior { radius: r[k - 1].clone() }
    } else if k == 0 {
        RegionGeometry::Ball { radius: r[0].clone() }
    } else {
        RegionGeometry::Annulus { inner: r[k - 1].clone(), outer: r[k].clone() }
    }
}

/// Speeds of every region of a stack (exterior last).
pub fn stack_speeds<T: Field>(u: &RadialStack<T>) -> Vec<RegionSpeed<T>> {
    if u.is_constant() {
        return vec![RegionSpeed { region: 0, rate: T::zero(), signature: Signature::new(vec![]).unwrap() }];
    }
    let n = u.dimension();
    signatures_from_stack(u)
        .into_iter()
        .enumerate()
        .map(|(k, sig)| {
            let geom = region_geometry(u, k);
            let (ci, co) = match geom {
                RegionGeometry::Ball { .. } => (None, Some(sig.signs()[0])),
                RegionGeometry::Exterior { .. } => (Some(sig.signs()[0]), None),
                RegionGeometry::Annulus { .. } => (Some(sig.signs()[0]), Some(sig.signs()[1])),
            };
            let rate = region_speed_radial(n, &geom, ci, co).expect("stack regions are well formed");
            RegionSpeed { region: k, rate, signature: sig }
        })
        .collect()
}

fn meeting_times<T: Field>(v: &[T], rates: &[T]) -> Vec<Option<T>> {
    (0..v.len() - 1)
        .map(|k| {
            let gap = v[k + 1].clone() - v[k].clone();
            let closing = rates[k + 1].clone() - rates[k].clone();
            if (gap.is_positive() && closing.is_negative()) || (gap.is_negative() && closing.is_positive()) {
                Some(-gap / closing)
            } else {
                None
            }
        })
        .collect()
}

fn advance<T: Field>(u: &RadialStack<T>, rates: &[T], dt: &T) -> Vec<T> {
    u.region_values().into_iter().zip(rates).map(|(v, r)| v + r.clone() * dt.clone()).collect()
}

/// Move to the merge at `dt` and fuse every pair meeting then. Bounded groups
/// take their volume-weighted mean; a group touching the exterior takes the
/// exterior value.
fn merge_step<T: Field>(u: &RadialStack<T>, rates: &[T], dt: &T, meet: &[Option<T>]) -> RadialStack<T> {
    let slack = T::merge_tol() * (T::one() + dt.abs());
    let joins: Vec<bool> = meet.iter().map(|t| t.as_ref().is_some_and(|t| t.clone() - dt.clone() <= slack)).collect();
    let mut vals = advance(u, rates, dt);
    let n = u.dimension();
    let r = u.radii();
    let measure = |k: usize| -> T {
        let outer = powi(&r[k], n);
        if k == 0 {
            outer
        } else {
            outer - powi(&r[k - 1], n)
        }
    };
    let exterior = vals.len() - 1;
    let mut k = 0;
    while k < vals.len() {
        let mut end = k;
        while end < joins.len() && joins[end] {
            end += 1;
        }
        if end > k {
            let value = if end == exterior {
                vals[exterior].clone()
            } else {
                let (mass, vol) = (k..=end).fold((T::zero(), T::zero()), |(a, w), i| {
                    (a + vals[i].clone() * measure(i), w + measure(i))
                });
                mass / vol
            };
            for v in vals.iter_mut().take(end + 1).skip(k) {
                *v = value.clone();
            }
        }
        k = end + 1;
    }
    let outer = vals.pop().unwrap();
    u.with_values(vals, outer).expect("merge keeps a valid stack")
}

fn final_kind<T: Field>(u: &RadialStack<T>) -> EventKind {
    if u.outer_value().is_zero() {
        EventKind::Extinction
    } else {
        EventKind::Steady
    }
}

/// Event-driven solution on [0, T]; states at t = 0, at every merge and at T.
pub fn evolve_radial<T: Field>(u0: &RadialStack<T>, horizon: T) -> Result<FlowTrajectory<RadialStack<T>, T>> {
    if horizon.is_negative() {
        return Err(TvError::InvalidInput("horizon must be non-negative".into()));
    }
    let mut traj = FlowTrajectory::new(u0.clone());
    let mut u = u0.clone();
    let mut t = T::zero();
    loop {
        let rates: Vec<T> = stack_speeds(&u).into_iter().map(|s| s.rate).collect();
        let dt = if u.is_constant() {
            None
        } else {
            let meet = meeting_times(&u.region_values(), &rates);
            meet.iter().flatten().cloned().reduce(T::min_of).map(|dt| (dt, meet))
        };
        match dt {
            Some((dt, meet)) if t.clone() + dt.clone() <= horizon => {
                let before = u.region_count();
                u = merge_step(&u, &rates, &dt, &meet);
                t = t + dt;
                if t.is_positive() {
                    traj.push(t.clone(), u.clone())?;
                } else {
                    *traj.states.last_mut().unwrap() = u.clone();
                }
                traj.event(t.clone(), EventKind::Merge, format!("{} regions -> {}", before, u.region_count()));
                if u.is_constant() {
                    traj.event(t.clone(), final_kind(&u), "constant");
                }
            }
            _ => {
                if horizon > t {
                    let end = if u.is_constant() {
                        u.clone()
                    } else {
                        let mut vals = advance(&u, &rates, &(horizon.clone() - t.clone()));
                        let outer = vals.pop().unwrap();
                        u.with_values(vals, outer)?
                    };
                    traj.push(horizon, end)?;
                }
                break;
            }
        }
    }
    Ok(traj)
}

pub fn solution_at_radial<T: Field>(u0: &RadialStack<T>, t: T) -> Result<RadialStack<T>> {
    Ok(evolve_radial(u0, t)?.last_state().clone())
}

/// Time after which the stack is constant (≡ 0 when the exterior value is 0).
pub fn extinction_time_radial<T: Field>(u0: &RadialStack<T>) -> T {
    let mut u = u0.clone();
    let mut t = T::zero();
    while !u.is_constant() {
        let rates: Vec<T> = stack_speeds(&u).into_iter().map(|s| s.rate).collect();
        let meet = meeting_times(&u.region_values(), &rates);
        let dt = meet.iter().flatten().cloned().reduce(T::min_of).expect("a non-constant stack merges");
        u = merge_step(&u, &rates, &dt, &meet);
        t = t + dt;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;
    use num_rational::BigRational;

    fn r(s: &str) -> BigRational {
        rational(s).unwrap()
    }

    fn ring() -> RadialStack<BigRational> {
        RadialStack::new(vec![r("1"), r("2")], vec![r("0"), r("1")], r("0"), 2).unwrap()
    }

    #[test]
    fn speed_examples() {
        let ball = RegionGeometry::Ball { radius: 1.0 };
        assert_eq!(region_speed_radial(2, &ball, None, Some(-1)).unwrap(), -2.0);
        let ann = RegionGeometry::Annulus { inner: r("1"), outer: r("2") };
        assert_eq!(region_speed_radial(2, &ann, Some(1), Some(1)).unwrap(), r("2"));
        for n in 1..6 {
            let ext = RegionGeometry::Exterior { radius: 3.0 };
            assert_eq!(region_speed_radial(n, &ext, Some(1), None).unwrap(), 0.0);
        }
    }

    #[test]
    fn bad_geometry() {
        let ball = RegionGeometry::Ball { radius: 1.0 };
        assert!(region_speed_radial(2, &ball, Some(1), Some(1)).is_err());
        let ann = RegionGeometry::Annulus { inner: 2.0, outer: 1.0 };
        assert!(region_speed_radial(2, &ann, Some(1), Some(1)).is_err());
        let ext = RegionGeometry::Exterior { radius: 1.0 };
        assert!(region_speed_radial(2, &ext, Some(1), Some(1)).is_err());
    }

    #[test]
    fn signature_examples() {
        let u = RadialStack::ball(3, 1.0, 1.0).unwrap();
        let s = signatures_from_stack(&u);
        assert_eq!(s[0].signs(), &[-1]);
        assert_eq!(s[1].signs(), &[1]);
        assert_eq!(signatures_from_stack(&ring())[1].signs(), &[-1, -1]);
        assert!(signatures_from_stack(&RadialStack::constant(2, 1.0).unwrap()).is_empty());
    }

    #[test]
    fn ball_solution() {
        let u = RadialStack::ball(2, r("1"), r("1")).unwrap();
        let mid = solution_at_radial(&u, r("1/4")).unwrap();
        assert_eq!(mid.values(), &[r("1/2")]);
        assert_eq!(extinction_time_radial(&u), r("1/2"));
        let u4 = RadialStack::ball(4, r("2"), r("1")).unwrap();
        assert_eq!(extinction_time_radial(&u4), r("1/2"));
    }

    #[test]
    fn ring_merges_then_vanishes() {
        let traj = evolve_radial(&ring(), r("1")).unwrap();
        assert_eq!(traj.events[0].time, r("1/4"));
        assert_eq!(traj.states[1].radii(), &[r("2")]);
        assert_eq!(traj.states[1].values(), &[r("1/2")]);
        assert_eq!(traj.final_event(EventKind::Extinction).unwrap().time, r("3/4"));
        assert_eq!(extinction_time_radial(&ring()), r("3/4"));
    }

    #[test]
    fn constant_is_stationary() {
        let u = RadialStack::constant(2, 1.5).unwrap();
        let traj = evolve_radial(&u, 2.0).unwrap();
        assert_eq!(traj.last_state(), &u);
        assert!(traj.events.is_empty());
    }

    #[test]
    fn nonzero_exterior_reports_steady() {
        let u = RadialStack::new(vec![r("1")], vec![r("3")], r("1"), 2).unwrap();
        let traj = evolve_radial(&u, r("2")).unwrap();
        assert_eq!(traj.final_event(EventKind::Steady).unwrap().time, r("1"));
        assert_eq!(traj.last_state().outer_value(), &r("1"));
    }
}
