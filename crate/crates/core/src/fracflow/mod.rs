//! Fractional flow u_t = −(−Δ)^s ∂TV(u) on the 1D torus by minimizing
//! movements in the Ḣ^{−s} metric.
//!
//! Frequencies are integer indices: the Ḣ^σ norm of u is
//! (L Σ_{m≠0} |m|^{2σ} |a_m|²)^{1/2} with a_m the Fourier coefficients of u,
//! regardless of the period L.

mod prox;
mod spectral;

pub use prox::{prox_active_set, ActiveSet, HsProx, PROX_GAP_TOL};
pub use spectral::SpectralOperator;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::BoundReport;
use crate::core::{EventKind, FlowTrajectory, Geometry, GridSignal};
use crate::error::{Result, TvError};

/// Sup norm below which an iterate counts as extinct.
pub const EXTINCTION_TOL: f64 = 1e-10;

fn check_periodic(u: &GridSignal) -> Result<()> {
    if u.geometry() == Geometry::Periodic1d {
        Ok(())
    } else {
        Err(TvError::InvalidInput("fractional flows live on the periodic 1D grid".into()))
    }
}

fn check_order(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(TvError::Domain(format!("order s must lie in [0, 1], got {s}")))
    }
}

fn drop_mean(u: &GridSignal, what: &str) -> Vec<f64> {
    let mean = u.mean();
    let scale = u.samples().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if mean.abs() > 1e-12 * (1.0 + scale) {
        log::warn!("{what}: removing mean {mean:e}");
    }
    u.samples().iter().map(|v| v - mean).collect()
}

/// Ḣ^σ norm for any real σ (negative σ gives the dual norms). The mean mode
/// is ignored.
pub fn hs_norm(u: &GridSignal, sigma: f64) -> Result<f64> {
    check_periodic(u)?;
    let x = drop_mean(u, "hs_norm");
    let op = SpectralOperator::new(0.0, x.len());
    Ok((u.spacing() * op.weighted_energy(&x, 2.0 * sigma)).sqrt())
}

/// argmin_w λTV(w) + ½‖w − f‖²_{Ḣ^{−s}} (mean mode carried with weight 1,
/// so the mean of f is preserved).
pub fn prox_tv_hs(f: &GridSignal, lambda: f64, s: f64) -> Result<GridSignal> {
    check_periodic(f)?;
    check_order(s)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(TvError::InvalidInput(format!("prox parameter must be positive, got {lambda}")));
    }
    let op = SpectralOperator::new(s, f.len());
    let out = prox_active_set(&op, f.samples(), f.spacing(), lambda, None)?;
    f.with_samples(out.w)
}

/// Discrete Ẇ^{−1,p} norm on the torus: min_c ‖V − c‖_{L^p} with
/// V_i = h Σ_{j≤i} v_j the periodic antiderivative of the mean-free v.
pub fn wminus1p_norm(v: &[f64], h: f64, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(TvError::InvalidExponent(p));
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let mut acc = 0.0;
    let big: Vec<f64> = v
        .iter()
        .map(|x| {
            acc += h * (x - mean);
            acc
        })
        .collect();
    let lo = big.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = big.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if p.is_infinite() {
        return Ok(0.5 * (hi - lo));
    }
    let norm = |c: f64| big.iter().map(|x| h * (x - c).abs().powf(p)).sum::<f64>().powf(1.0 / p);
    // The objective is convex in c; bisect on the sign of its derivative.
    let slope = |c: f64| -> f64 {
        big.iter()
            .map(|x| {
                let d = x - c;
                -d.signum() * d.abs().powf(p - 1.0)
            })
            .sum()
    };
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if slope(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(norm(a).min(norm(b)))
}

/// Runs `steps` prox steps of size τ from the mean-free part of u₀.
///
/// Diagnostics: `hs_norm` (Ḣ^{−s} norm), `tv`, `dissipation_residual`
/// = |(½‖u_{k+1}‖² − ½‖u_k‖²)/τ + TV(u_{k+1})| / TV(u_{k+1}) (absolute once
/// TV vanishes) and `w1p_norm`, the Ẇ^{−1,p} norm of (−Δ)^{−s}u with
/// p = `growth_p`. The first iterate with sup norm below [`EXTINCTION_TOL`]
/// is logged as an extinction event.
pub fn evolve_fractional(u0: &GridSignal, s: f64, tau: f64, steps: usize, growth_p: f64) -> Result<FlowTrajectory<GridSignal>> {
    check_periodic(u0)?;
    check_order(s)?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(TvError::InvalidInput("time step must be positive".into()));
    }
    if !(growth_p >= 1.0) {
        return Err(TvError::InvalidExponent(growth_p));
    }
    let h = u0.spacing();
    let op = SpectralOperator::new(s, u0.len());
    let energy = |x: &[f64]| 0.5 * h * op.weighted_energy(x, -2.0 * s);
    let w1p = |x: &[f64]| wminus1p_norm(&op.apply_inverse(x), h, growth_p);
    let mut u = u0.with_samples(drop_mean(u0, "evolve_fractional"))?;
    let mut traj = FlowTrajectory::new(u.clone());
    let mut e = energy(u.samples());
    traj.record("hs_norm", (2.0 * e).sqrt());
    traj.record("tv", u.total_variation());
    traj.record("dissipation_residual", 0.0);
    traj.record("w1p_norm", w1p(u.samples())?);
    let sup = |x: &GridSignal| x.samples().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut extinct = sup(&u) < EXTINCTION_TOL;
    let mut warm: Option<ActiveSet> = None;
    for k in 1..=steps {
        let out = prox_active_set(&op, u.samples(), h, tau, warm.as_ref())?;
        let mean = out.w.iter().sum::<f64>() / out.w.len() as f64;
        let next = u.with_samples(out.w.iter().map(|v| v - mean).collect())?;
        warm = Some(out.active);
        let e_next = energy(next.samples());
        let tv = next.total_variation();
        let res = ((e_next - e) / tau + tv).abs();
        traj.record("hs_norm", (2.0 * e_next).sqrt());
        traj.record("tv", tv);
        traj.record("dissipation_residual", if tv > 0.0 { res / tv } else { res });
        traj.record("w1p_norm", w1p(next.samples())?);
        let t = k as f64 * tau;
        if !extinct && sup(&next) < EXTINCTION_TOL {
            extinct = true;
            traj.event(t, EventKind::Extinction, format!("step {k}"));
        }
        traj.push(t, next.clone())?;
        u = next;
        e = e_next;
    }
    Ok(traj)
}

/// Largest relative dissipation residual along a trajectory from
/// [`evolve_fractional`].
pub fn dissipation_check(traj: &FlowTrajectory<GridSignal>) -> f64 {
    traj.series("dissipation_residual")
        .map(|r| r.iter().skip(1).cloned().fold(0.0, f64::max))
        .unwrap_or(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub p: f64,
    pub series: Vec<f64>,
    /// A₀ + |T|^{1/p} t.
    pub envelope: Vec<f64>,
    pub max_excess: f64,
    pub holds: bool,
}

/// Checks ‖(−Δ)^{−s}u(t)‖_{Ẇ^{−1,p}} ≤ A₀ + |T|^{1/p} t at every state.
pub fn wminus1p_growth_check(traj: &FlowTrajectory<GridSignal>, s: f64, p: f64) -> Result<GrowthReport> {
    let first = &traj.states[0];
    check_periodic(first)?;
    let h = first.spacing();
    let period = h * first.len() as f64;
    let slope = if p.is_infinite() { 1.0 } else { period.powf(1.0 / p) };
    let op = SpectralOperator::new(s, first.len());
    let series = traj
        .states
        .iter()
        .map(|u| wminus1p_norm(&op.apply_inverse(u.samples()), h, p))
        .collect::<Result<Vec<_>>>()?;
    let a0 = series[0];
    let envelope: Vec<f64> = traj.times.iter().map(|t| a0 + slope * t).collect();
    let max_excess = series.iter().zip(&envelope).map(|(v, e)| v - e).fold(f64::NEG_INFINITY, f64::max);
    let holds = series.iter().zip(&envelope).all(|(v, e)| *v <= e * (1.0 + 1e-12) + 1e-15);
    Ok(GrowthReport { p, series, envelope, max_excess, holds })
}

/// θ from s + 1/2 = (1 − θ)(2s + 1 + 1/p) + θ·0 on the 1D torus; must lie in
/// (1/2, 1].
pub fn interpolation_exponent(s: f64, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(TvError::InvalidExponent(p));
    }
    let ip = if p.is_infinite() { 0.0 } else { 1.0 / p };
    let theta = (s + 0.5 + ip) / (2.0 * s + 1.0 + ip);
    if !(theta > 0.5 && theta <= 1.0) {
        return Err(TvError::NotApplicable(format!("interpolation exponent θ = {theta} is not in (1/2, 1]")));
    }
    Ok(theta)
}

/// T* ≤ (A₀/a){(1 + a C*^{1/θ} ‖u₀‖^γ / A₀^γ)^{1/γ} − 1} with a = |T|^{1/p},
/// γ = 2 − 1/θ, ‖u₀‖ the Ḣ^{−s} norm and A₀ = ‖(−Δ)^{−s}u₀‖_{Ẇ^{−1,p}}.
pub fn extinction_bound_teeper(u0: &GridSignal, s: f64, p: f64, c_star: f64) -> Result<BoundReport> {
    check_periodic(u0)?;
    check_order(s)?;
    if !(c_star > 0.0) {
        return Err(TvError::InvalidInput("C* must be positive".into()));
    }
    let theta = interpolation_exponent(s, p)?;
    let gamma = 2.0 - 1.0 / theta;
    let h = u0.spacing();
    let x = drop_mean(u0, "extinction_bound_teeper");
    let op = SpectralOperator::new(s, x.len());
    let norm = (h * op.weighted_energy(&x, -2.0 * s)).sqrt();
    let a0 = wminus1p_norm(&op.apply_inverse(&x), h, p)?;
    let a = (h * x.len() as f64).powf(1.0 / p);
    let bound = if norm == 0.0 {
        0.0
    } else if a0 == 0.0 {
        return Err(TvError::Degenerate("Ẇ^{−1,p} norm vanishes for a nonzero datum".into()));
    } else {
        a0 / a * ((1.0 + a * c_star.powf(1.0 / theta) * norm.powf(gamma) / a0.powf(gamma)).powf(1.0 / gamma) - 1.0)
    };
    Ok(BoundReport::new("fractional-torus", bound, false)
        .constant("s", s)
        .constant("p", p)
        .constant("theta", theta)
        .constant("gamma", gamma)
        .constant("C_star", c_star)
        .constant("A0", a0)
        .constant("a", a)
        .constant("hs_norm", norm))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationCheck {
    /// ‖u‖_{Ḣ^{−s}}.
    pub lhs: f64,
    /// C* ‖(−Δ)^{−s}u‖_{Ẇ^{−1,p}}^{1−θ} TV(u)^θ.
    pub rhs: f64,
    /// lhs / (rhs / C*), the smallest admissible C* for this u.
    pub ratio: f64,
    pub holds: bool,
}

/// Evaluates both sides of ‖u‖_{Ḣ^{−s}} ≤ C* ‖(−Δ)^{−s}u‖^{1−θ}_{Ẇ^{−1,p}} TV(u)^θ.
pub fn interpolation_check(u: &GridSignal, s: f64, p: f64, c_star: f64) -> Result<InterpolationCheck> {
    check_periodic(u)?;
    let theta = interpolation_exponent(s, p)?;
    let h = u.spacing();
    let x = drop_mean(u, "interpolation_check");
    let op = SpectralOperator::new(s, x.len());
    let lhs = (h * op.weighted_energy(&x, -2.0 * s)).sqrt();
    let w = wminus1p_norm(&op.apply_inverse(&x), h, p)?;
    let core = w.powf(1.0 - theta) * u.total_variation().powf(theta);
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / core };
    Ok(InterpolationCheck { lhs, rhs: c_star * core, ratio, holds: lhs <= c_star * core * (1.0 + 1e-12) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CStarCalibration {
    pub s: f64,
    pub p: f64,
    pub samples: usize,
    pub seed: u64,
    /// Largest ratio over the corpus.
    pub c_star: f64,
}

/// Empirical C*: the largest interpolation ratio over `samples` random
/// mean-free step signals on an M-point unit torus.
pub fn calibrate_c_star(s: f64, p: f64, len: usize, samples: usize, seed: u64) -> Result<CStarCalibration> {
    check_order(s)?;
    interpolation_exponent(s, p)?;
    if len < 4 {
        return Err(TvError::InvalidInput("need at least 4 nodes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c_star: f64 = 0.0;
    for _ in 0..samples {
        let jumps = rng.gen_range(2..=8.min(len));
        let mut cuts: Vec<usize> = (0..jumps).map(|_| rng.gen_range(0..len)).collect();
        cuts.sort_unstable();
        cuts.dedup();
        let levels: Vec<f64> = (0..cuts.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let samples: Vec<f64> = (0..len)
            .map(|i| {
                let k = cuts.iter().rposition(|c| *c <= i).unwrap_or(cuts.len() - 1);
                levels[k]
            })
            .collect();
        let u = GridSignal::new(samples, 1.0 / len as f64, Geometry::Periodic1d)?;
        let check = interpolation_check(&u, s, p, 1.0)?;
        if check.ratio.is_finite() {
            c_star = c_star.max(check.ratio);
        }
    }
    Ok(CStarCalibration { s, p, samples, seed, c_star })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minmov::prox_tv_1d;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn torus(v: Vec<f64>) -> GridSignal {
        let h = 1.0 / v.len() as f64;
        GridSignal::new(v, h, Geometry::Periodic1d).unwrap()
    }

    fn bump(m: usize) -> GridSignal {
        let u = crate::core::StepFunction1D::from_lengths(vec![0.0, 1.0, 0.0], &[0.375, 0.25, 0.375]).unwrap();
        let g = GridSignal::sample_step(&u, m).unwrap();
        let mean = g.mean();
        g.with_samples(g.samples().iter().map(|v| v - mean).collect()).unwrap()
    }

    /// Dense |m|^{−2s} metric (mean weight 1) built from a direct DFT.
    fn dense_metric(m: usize, s: f64, inverse: bool) -> Vec<Vec<f64>> {
        (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        (0..m)
                            .map(|k| {
                                let f = if k == 0 { 1.0 } else { (k.min(m - k) as f64).powf(-2.0 * s) };
                                let f = if inverse { 1.0 / f } else { f };
                                f * (2.0 * PI * k as f64 * (i as f64 - j as f64) / m as f64).cos()
                            })
                            .sum::<f64>()
                            / m as f64
                    })
                    .collect()
            })
            .collect()
    }

    /// FISTA on the dual: min_{|z|≤1} ½ qᵀA⁻¹q − fᵀq, q = λDᵀz, A = hK.
    fn fista_oracle(f: &[f64], lambda: f64, s: f64) -> Vec<f64> {
        let m = f.len();
        let h = 1.0 / m as f64;
        let kinv = dense_metric(m, s, true);
        let ainv = |q: &[f64]| -> Vec<f64> { (0..m).map(|i| (0..m).map(|j| kinv[i][j] * q[j]).sum::<f64>() / h).collect() };
        let dt = |z: &[f64]| -> Vec<f64> { (0..m).map(|i| z[(i + m - 1) % m] - z[i]).collect() };
        let d = |w: &[f64]| -> Vec<f64> { (0..m).map(|e| w[(e + 1) % m] - w[e]).collect() };
        let big = (m as f64 / 2.0).powf(2.0 * s);
        let step = 1.0 / (lambda * lambda * 4.0 * big / h);
        let primal = |z: &[f64]| -> Vec<f64> {
            let q: Vec<f64> = dt(z).iter().map(|v| lambda * v).collect();
            let aq = ainv(&q);
            f.iter().zip(&aq).map(|(a, b)| a - b).collect()
        };
        let (mut z, mut y, mut t) = (vec![0.0; m], vec![0.0; m], 1.0f64);
        for _ in 0..200_000 {
            let w = primal(&y);
            let g = d(&w);
            let zn: Vec<f64> = y.iter().zip(&g).map(|(a, b)| (a + step * lambda * b).clamp(-1.0, 1.0)).collect();
            let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            y = zn.iter().zip(&z).map(|(a, b)| a + (t - 1.0) / tn * (a - b)).collect();
            z = zn;
            t = tn;
        }
        primal(&z)
    }

    #[test]
    fn hs_norm_examples() {
        let m = 64;
        let c1 = torus((0..m).map(|i| (2.0 * PI * i as f64 / m as f64).cos()).collect());
        assert_relative_eq!(hs_norm(&c1, 0.0).unwrap(), 0.5f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(hs_norm(&c1, -0.7).unwrap(), 0.5f64.sqrt(), epsilon = 1e-14);
        let c2 = torus((0..m).map(|i| (4.0 * PI * i as f64 / m as f64).cos()).collect());
        assert_relative_eq!(hs_norm(&c2, -1.0).unwrap(), 0.5 * 0.5f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(hs_norm(&c2, 0.0).unwrap(), c2.lp_norm(2.0).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn order_zero_is_the_l2_prox() {
        let f = torus(vec![0.3, -1.0, 2.0, 0.0, 1.5, 0.2, -0.4, 0.9]);
        for lambda in [1e-3, 0.05, 0.3, 5.0] {
            let a = prox_tv_hs(&f, lambda, 0.0).unwrap();
            let b = prox_tv_1d(&f, lambda).unwrap();
            for (x, y) in a.samples().iter().zip(b.samples()) {
                assert!((x - y).abs() <= 1e-8, "λ={lambda}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn fractional_prox_matches_dual_oracle() {
        let f = vec![0.3, -1.0, 2.0, 0.0, 1.5, 0.2, -0.4, 0.9, 0.1, -0.8];
        let mean = f.iter().sum::<f64>() / f.len() as f64;
        let f: Vec<f64> = f.iter().map(|v| v - mean).collect();
        for s in [0.5, 1.0] {
            for lambda in [0.01, 0.05] {
                let got = prox_tv_hs(&torus(f.clone()), lambda, s).unwrap();
                let want = fista_oracle(&f, lambda, s);
                for (x, y) in got.samples().iter().zip(&want) {
                    assert!((x - y).abs() <= 1e-6, "s={s} λ={lambda}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn huge_lambda_flattens() {
        let f = torus(vec![0.5, -0.5, 1.0, -1.0, 0.25, -0.25]);
        for s in [0.0, 0.5, 1.0] {
            let w = prox_tv_hs(&f, 1e3, s).unwrap();
            assert!(w.samples().iter().all(|v| v.abs() < 1e-12));
        }
        assert!(prox_tv_hs(&f, 1.0, 1.5).is_err());
        assert!(prox_tv_hs(&f, -1.0, 0.5).is_err());
    }

    #[test]
    fn zero_is_stationary() {
        let traj = evolve_fractional(&torus(vec![0.0; 16]), 0.5, 1e-3, 5, 2.0).unwrap();
        assert!(traj.states.iter().all(|u| u.samples().iter().all(|v| *v == 0.0)));
        assert_eq!(dissipation_check(&traj), 0.0);
    }

    #[test]
    fn order_zero_follows_minimizing_movements() {
        let u = bump(128);
        let a = evolve_fractional(&u, 0.0, 1e-3, 20, 2.0).unwrap();
        let b = crate::minmov::minimizing_movements(&u, 1e-3, 20, prox_tv_1d).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            assert!(x.l2_distance(y) < 1e-10);
        }
    }

    #[test]
    fn bump_decays_and_dissipates() {
        let u = bump(128);
        for s in [0.0, 0.5, 1.0] {
            let traj = evolve_fractional(&u, s, 2e-4, 50, 2.0).unwrap();
            let norms = traj.series("hs_norm").unwrap();
            assert!(norms.windows(2).all(|w| w[1] < w[0]), "s={s}");
            let tv = traj.series("tv").unwrap();
            assert!(tv.windows(2).all(|w| w[1] <= w[0] + 1e-12), "s={s}");
            assert!(dissipation_check(&traj) < 0.05, "s={s}");
            assert!(wminus1p_growth_check(&traj, s, 2.0).unwrap().holds);
            assert!(wminus1p_growth_check(&traj, s, 1.0).unwrap().holds);
            assert!(wminus1p_growth_check(&traj, s, f64::INFINITY).unwrap().holds);
        }
    }

    #[test]
    fn bump_goes_extinct() {
        let u = bump(64);
        for (s, tau, steps) in [(0.0, 1e-3, 200), (0.5, 1e-3, 400), (1.0, 1e-3, 2000)] {
            let traj = evolve_fractional(&u, s, tau, steps, 2.0).unwrap();
            assert!(traj.events.iter().any(|e| e.kind == EventKind::Extinction), "s={s}");
        }
    }

    #[test]
    fn wminus1p_against_scan() {
        let v = [0.3, -1.0, 2.0, 0.0, 1.5, 0.2, -0.4, 0.9];
        let h = 0.125;
        let mean = v.iter().sum::<f64>() / 8.0;
        let mut acc = 0.0;
        let big: Vec<f64> = v.iter().map(|x| { acc += h * (x - mean); acc }).collect();
        for p in [1.0, 1.5, 2.0, 4.0] {
            let scan = (0..=200_000)
                .map(|k| -1.0 + 2.0 * k as f64 / 200_000.0)
                .map(|c| big.iter().map(|x| h * (x - c).abs().powf(p)).sum::<f64>().powf(1.0 / p))
                .fold(f64::INFINITY, f64::min);
            let got = wminus1p_norm(&v, h, p).unwrap();
            assert!(got <= scan + 1e-12 && got >= scan - 1e-6, "p={p}: {got} vs {scan}");
        }
        let hi = big.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = big.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_relative_eq!(wminus1p_norm(&v, h, f64::INFINITY).unwrap(), 0.5 * (hi - lo));
    }

    #[test]
    fn teeper_exponents_and_monotonicity() {
        assert_relative_eq!(interpolation_exponent(1.0, 1.0).unwrap(), 0.625, epsilon = 1e-15);
        assert!(interpolation_exponent(0.5, f64::INFINITY).is_err());
        let u = bump(64);
        let a = extinction_bound_teeper(&u, 1.0, 1.0, 1.0).unwrap();
        let b = extinction_bound_teeper(&u, 1.0, 1.0, 2.0).unwrap();
        assert!(a.bound.is_finite() && a.bound > 0.0 && b.bound > a.bound);
        assert!(extinction_bound_teeper(&u, 1.0, f64::INFINITY, 1.0).is_err());
        assert_eq!(extinction_bound_teeper(&torus(vec![0.0; 8]), 0.5, 2.0, 1.0).unwrap().bound, 0.0);
    }

    #[test]
    fn teeper_bound_with_calibrated_constant() {
        let u = bump(64);
        let (s, p) = (0.5, 2.0);
        let cal = calibrate_c_star(s, p, 64, 200, 7).unwrap();
        let c_star = cal.c_star.max(interpolation_check(&u, s, p, 1.0).unwrap().ratio);
        let bound = extinction_bound_teeper(&u, s, p, c_star).unwrap().bound;
        let traj = evolve_fractional(&u, s, 1e-3, 400, p).unwrap();
        let t_ext = traj.events.iter().find(|e| e.kind == EventKind::Extinction).unwrap().time;
        // The bound needs the inequality along the whole trajectory.
        let worst = traj.states.iter().map(|v| interpolation_check(v, s, p, c_star).unwrap().ratio).fold(0.0, f64::max);
        assert!(worst <= c_star, "{worst} > {c_star}");
        assert!(bound >= t_ext, "{bound} < {t_ext}");
    }

    #[test]
    fn interpolation_is_homogeneous() {
        let u = bump(64);
        let a = interpolation_check(&u, 0.5, 2.0, 10.0).unwrap();
        let b = interpolation_check(&u.with_samples(u.samples().iter().map(|v| 3.5 * v).collect()).unwrap(), 0.5, 2.0, 10.0).unwrap();
        assert_relative_eq!(a.ratio, b.ratio, max_relative = 1e-12);
        let z = interpolation_check(&torus(vec![0.0; 8]), 0.5, 2.0, 1.0).unwrap();
        assert!(z.holds);
        let c1 = calibrate_c_star(0.5, 2.0, 32, 20, 3).unwrap();
        let c2 = calibrate_c_star(0.5, 2.0, 32, 20, 3).unwrap();
        assert_eq!(c1, c2);
    }
}
