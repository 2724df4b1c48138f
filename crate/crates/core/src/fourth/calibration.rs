use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::core::Signature;
use crate::error::{Result, TvError};

/// Chebyshev–Lobatto nodes used to sample |z| on an annulus.
pub const FEASIBILITY_NODES: usize = 4096;

/// Initial bisection bracket for the critical annulus ratio (n = 2).
pub const Q_STAR_BRACKET: (f64, f64) = (1.01, 1e3);

const FEASIBILITY_TOL: f64 = 1e-9;
/// Largest rounding floor in z for which a feasibility verdict is issued.
const MAX_NOISE: f64 = 1e-6;
const PRESCAN: usize = 48;

/// Radial calibration z(r) = c₀r³ + c₁φ(r) + c₂r + c₃r^{1−n} with
/// φ = r^{3−n} (φ = r log r for n = 2) on [r_min, r_max].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationProfile {
    pub n: u32,
    pub coefficients: [f64; 4],
    pub lambda: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub feasible: bool,
    pub max_abs_z: f64,
    /// Tolerance used in the verdict: 1e-9 plus the rounding floor of z.
    pub tol: f64,
}

/// Basis values, first and second derivatives at r.
fn basis(n: u32, r: f64) -> [[f64; 4]; 3] {
    let nf = n as f64;
    let (p1, d1, dd1) = if n == 2 {
        (r * r.ln(), r.ln() + 1.0, 1.0 / r)
    } else {
        let k = 3.0 - nf;
        (r.powf(k), k * r.powf(k - 1.0), k * (k - 1.0) * r.powf(k - 2.0))
    };
    let k = 1.0 - nf;
    [
        [r.powi(3), p1, r, r.powf(k)],
        [3.0 * r * r, d1, 1.0, k * r.powf(k - 1.0)],
        [6.0 * r, dd1, 0.0, k * (k - 1.0) * r.powf(k - 2.0)],
    ]
}

/// Basis values of div z = z′ + (n−1)z/r and of its r-derivative.
fn div_basis(n: u32, r: f64) -> [[f64; 4]; 2] {
    let nf = n as f64;
    let (p1, d1) = if n == 2 {
        (2.0 * r.ln() + 1.0, 2.0 / r)
    } else {
        (2.0 * r.powf(2.0 - nf), 2.0 * (2.0 - nf) * r.powf(1.0 - nf))
    };
    [[(nf + 2.0) * r * r, p1, nf, 0.0], [2.0 * (nf + 2.0) * r, d1, 0.0, 0.0]]
}

fn dot(c: &[f64; 4], b: &[f64; 4]) -> f64 {
    c.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn magnitude(c: &[f64; 4], b: &[f64; 4]) -> f64 {
    c.iter().zip(b).map(|(x, y)| (x * y).abs()).sum()
}

impl CalibrationProfile {
    fn build(n: u32, coefficients: [f64; 4], lambda: f64, r_min: f64, r_max: f64, nodes: &[f64]) -> Self {
        let mut p =
            CalibrationProfile { n, coefficients, lambda, r_min, r_max, feasible: false, max_abs_z: 0.0, tol: 0.0 };
        let mut noise: f64 = 0.0;
        for &r in nodes {
            let b = basis(n, r)[0];
            p.max_abs_z = p.max_abs_z.max(dot(&coefficients, &b).abs());
            noise = noise.max(64.0 * f64::EPSILON * magnitude(&coefficients, &b));
        }
        p.tol = FEASIBILITY_TOL + noise;
        p.feasible = p.max_abs_z <= 1.0 + p.tol
            && p.endpoint_curvature_ok(r_min)
            && (!r_max.is_finite() || p.endpoint_curvature_ok(r_max));
        p
    }

    /// Where |z| = 1 with z′ = 0 the profile must bend back into [−1, 1].
    fn endpoint_curvature_ok(&self, r: f64) -> bool {
        if r <= 0.0 {
            return true;
        }
        let z = self.z(r);
        if (z.abs() - 1.0).abs() > 1e-6 || self.dz(r).abs() > 1e-6 * (1.0 + 1.0 / r) {
            return true;
        }
        let b = basis(self.n, r)[2];
        z.signum() * dot(&self.coefficients, &b) <= FEASIBILITY_TOL * magnitude(&self.coefficients, &b)
    }

    pub fn z(&self, r: f64) -> f64 {
        dot(&self.coefficients, &basis(self.n, r)[0])
    }

    pub fn dz(&self, r: f64) -> f64 {
        dot(&self.coefficients, &basis(self.n, r)[1])
    }

    pub fn d2z(&self, r: f64) -> f64 {
        dot(&self.coefficients, &basis(self.n, r)[2])
    }

    /// div Z for Z = z(r) x/|x|.
    pub fn div(&self, r: f64) -> f64 {
        dot(&self.coefficients, &div_basis(self.n, r)[0])
    }

    /// ∂_r div Z.
    pub fn grad_div(&self, r: f64) -> f64 {
        dot(&self.coefficients, &div_basis(self.n, r)[1])
    }
}

fn chi_value(chi: i8) -> Result<f64> {
    match chi {
        1 => Ok(1.0),
        -1 => Ok(-1.0),
        _ => Err(TvError::InvalidInput(format!("signature entries must be ±1, got {chi}"))),
    }
}

fn lambda_coefficient(n: u32) -> f64 {
    let nf = n as f64;
    -1.0 / (2.0 * nf * (nf + 2.0))
}

fn uniform_nodes(a: f64, b: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| a + (b - a) * k as f64 / (count - 1) as f64).collect()
}

fn chebyshev_nodes(a: f64, b: f64, count: usize) -> Vec<f64> {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    (0..count)
        .map(|k| {
            let x = mid - half * (std::f64::consts::PI * k as f64 / (count - 1) as f64).cos();
            x.clamp(a, b)
        })
        .collect()
}

/// Calibration of a ball B_R with χ = ±1: for χ = −1,
/// z = ½(r/R)³ − (3/2)(r/R) and λ = −n(n+2)/R³.
pub fn fourth_ball_calibration(n: u32, radius: f64, chi: i8) -> Result<CalibrationProfile> {
    if n < 1 || !(radius > 0.0) {
        return Err(TvError::Domain("need n ≥ 1 and R > 0".into()));
    }
    let s = -chi_value(chi)?;
    let nf = n as f64;
    let coefficients = [s * 0.5 / radius.powi(3), 0.0, -s * 1.5 / radius, 0.0];
    let lambda = -s * nf * (nf + 2.0) / radius.powi(3);
    let nodes = uniform_nodes(radius / FEASIBILITY_NODES as f64, radius, FEASIBILITY_NODES);
    Ok(CalibrationProfile::build(n, coefficients, lambda, 0.0, radius, &nodes))
}

/// Exterior profile of B_R (λ = 0):
/// z = −((n−1)/2)(r/R)^{3−n} + ((n−3)/2)(r/R)^{1−n}, z(R) = −1, z′(R) = 0.
pub fn exterior_calibration(n: u32, radius: f64) -> Result<CalibrationProfile> {
    if n == 2 {
        return Err(TvError::NotApplicable("the exterior profile degenerates for n = 2".into()));
    }
    if n < 1 || !(radius > 0.0) {
        return Err(TvError::Domain("need n ≥ 1 and R > 0".into()));
    }
    let nf = n as f64;
    let coefficients = [0.0, -0.5 * (nf - 1.0) * radius.powf(nf - 3.0), 0.0, 0.5 * (nf - 3.0) * radius.powf(nf - 1.0)];
    let nodes: Vec<f64> = (0..FEASIBILITY_NODES)
        .map(|k| radius * 1e3f64.powf(k as f64 / (FEASIBILITY_NODES - 1) as f64))
        .collect();
    Ok(CalibrationProfile::build(n, coefficients, 0.0, radius, f64::INFINITY, &nodes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusCalibration {
    pub feasible: bool,
    pub profile: CalibrationProfile,
}

/// Solves for (λ, c₁, c₂, c₃) on R₀ < r < R₁ from
/// z(R₀) = −χ, z(R₁) = χ, div Z(R₀) = −χ(n−1)/R₀, div Z(R₁) = χ(n−1)/R₁,
/// with c₀ = −λ/(2n(n+2)), then samples |z| for feasibility. Annuli so thin
/// that rounding in z exceeds 1e-6 are rejected as degenerate.
pub fn annulus_calibrable_fourth(n: u32, r0: f64, r1: f64, chi: &Signature) -> Result<AnnulusCalibration> {
    if n < 1 {
        return Err(TvError::Domain("dimension must be at least 1".into()));
    }
    if !(r0 > 0.0 && r1 > r0 && r1.is_finite()) {
        return Err(TvError::Geometry(format!("need 0 < R₀ < R₁, got ({r0}, {r1})")));
    }
    if chi.len() != 2 || chi.get(0) != chi.get(1) {
        return Err(TvError::InvalidInput("annulus signature must be ≡ +1 or ≡ −1 with two entries".into()));
    }
    let x = chi.get(0);
    let nf = n as f64;
    let k = lambda_coefficient(n);
    let row_z = |r: f64| {
        let b = basis(n, r)[0];
        [k * b[0], b[1], b[2], b[3]]
    };
    let row_div = |r: f64| {
        let b = div_basis(n, r)[0];
        [k * b[0], b[1], b[2], b[3]]
    };
    let rows = [row_z(r0), row_z(r1), row_div(r0), row_div(r1)];
    let m = Matrix4::from_fn(|i, j| rows[i][j]);
    let rhs = Vector4::new(-x, x, -x * (nf - 1.0) / r0, x * (nf - 1.0) / r1);
    let sol = m
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .ok_or_else(|| TvError::Degenerate(format!("annulus system is singular for ({r0}, {r1})")))?;
    let lambda = sol[0];
    let coefficients = [k * lambda, sol[1], sol[2], sol[3]];
    let nodes = chebyshev_nodes(r0, r1, FEASIBILITY_NODES);
    let profile = CalibrationProfile::build(n, coefficients, lambda, r0, r1, &nodes);
    if profile.tol > MAX_NOISE {
        return Err(TvError::Degenerate(format!(
            "annulus ({r0}, {r1}) is too thin: rounding in z reaches {:e}",
            profile.tol
        )));
    }
    Ok(AnnulusCalibration { feasible: profile.feasible, profile })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QStar {
    pub q_star: f64,
    /// Largest ratio found feasible.
    pub lower: f64,
    /// Smallest ratio found infeasible.
    pub upper: f64,
    pub evaluations: usize,
}

/// Bisects (in log R₁/R₀) for the ratio where planar annuli stop being
/// calibrable. A prescan of the bracket checks that feasibility switches
/// exactly once; otherwise no result is returned.
pub fn find_q_star(n: u32, tol: f64) -> Result<QStar> {
    if n != 2 {
        return Err(TvError::NotApplicable(format!("the critical ratio exists only for n = 2, got n = {n}")));
    }
    if !(tol > 0.0 && tol < 0.1) {
        return Err(TvError::InvalidInput("tolerance must lie in (0, 0.1)".into()));
    }
    let chi = Signature::uniform(1, 2)?;
    let mut evaluations = 0;
    let mut feasible = |q: f64| -> Result<bool> {
        evaluations += 1;
        Ok(annulus_calibrable_fourth(2, 1.0, q, &chi)?.feasible)
    };
    let (mut lo, mut hi) = Q_STAR_BRACKET;
    let scan: Vec<bool> = (0..PRESCAN)
        .map(|k| feasible(lo * (hi / lo).powf(k as f64 / (PRESCAN - 1) as f64)))
        .collect::<Result<_>>()?;
    let switches = scan.windows(2).filter(|w| w[0] != w[1]).count();
    if !scan[0] || scan[PRESCAN - 1] || switches != 1 {
        return Err(TvError::InvariantViolation(format!(
            "feasibility is not monotone on the bracket ({switches} switches)"
        )));
    }
    let first_bad = scan.iter().position(|f| !f).unwrap_or(PRESCAN - 1);
    let step = (hi / lo).powf(1.0 / (PRESCAN - 1) as f64);
    let base = lo;
    lo = base * step.powi(first_bad as i32 - 1);
    hi = base * step.powi(first_bad as i32);
    while hi / lo - 1.0 > tol {
        let mid = (lo * hi).sqrt();
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(QStar { q_star: (lo * hi).sqrt(), lower: lo, upper: hi, evaluations })
}
