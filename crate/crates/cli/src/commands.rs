//! Subcommands other than the scenario runners.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use tvflow::bounds::{
    extinction_bound_fourth, extinction_bound_fractional_critical, extinction_bound_second, BoundReport,
};
use tvflow::exact1d::interval_calibrable_weighted;
use tvflow::fourth::{
    annulus_calibrable_fourth, exterior_calibration, find_q_star, fourth_ball_calibration, lambda_saint_venant,
    CalibrationProfile, QStar, SvGeometry,
};
use tvflow::fracflow::{calibrate_c_star, extinction_bound_teeper, prox_active_set, SpectralOperator};
use tvflow::minmov::{prox_tv, verify_subdifferential};
use tvflow::radial2::region_speed_radial;
use tvflow::regularity::{check_jump_monotonicity, RegularityReport};
use tvflow::{Geometry, Signature, TvError};

use crate::config::{BoundsConfig, Calibrate4thConfig, CalibrateConfig, ProxConfig, Region4th, Scenario};
use crate::error::CliResult;
use crate::io::{write_csv, write_json, Cell, Table};
use crate::scenario::{simulate, Run, C_STAR_SAMPLES};

/// Prox of one signal: writes `prox.csv` (x, f, w) and `prox.json`. The L²
/// prox is checked through its dual certificate at `tol` (`valid`).
pub fn prox(cfg: &ProxConfig, out: &Path, tol: f64) -> CliResult<Value> {
    let f = cfg.signal.build()?;
    let (w, report) = match cfg.s {
        None => {
            let w = prox_tv(&f, cfg.lambda)?;
            let cert = verify_subdifferential(&w, &f, cfg.lambda)?;
            let valid = cert.is_valid(tol);
            (w, json!({ "lambda": cfg.lambda, "valid": valid, "tol": tol, "certificate": cert }))
        }
        Some(s) => {
            if f.geometry() != Geometry::Periodic1d {
                return Err(TvError::Geometry("the fractional prox lives on the periodic grid".into()).into());
            }
            let op = SpectralOperator::new(s, f.len());
            let res = prox_active_set(&op, f.samples(), f.spacing(), cfg.lambda, None)?;
            let w = f.with_samples(res.w)?;
            (w, json!({ "lambda": cfg.lambda, "s": s, "gap": res.gap, "iterations": res.iterations }))
        }
    };
    let mut table = Table::new(["x", "f", "w"]);
    for ((x, a), b) in f.positions().iter().zip(f.samples()).zip(w.samples()) {
        table.push(vec![Cell::Num(*x), Cell::Num(*a), Cell::Num(*b)]);
    }
    write_csv(&out.join("prox.csv"), &table)?;
    write_json(&out.join("prox.json"), &report)?;
    Ok(report)
}

/// Second-order calibrability: weighted interval or radial region speed.
pub fn calibrate(cfg: &CalibrateConfig, out: &Path) -> CliResult<Value> {
    let report = match cfg {
        CalibrateConfig::Interval { a, b, x0, x1, chi } => {
            let chi = Signature::new(chi.clone())?;
            let c = interval_calibrable_weighted(a, b, *x0, *x1, &chi)?;
            let h = (x1 - x0) / (c.z_profile.len() - 1) as f64;
            let mut table = Table::new(["x", "z"]);
            for (i, z) in c.z_profile.iter().enumerate() {
                table.push(vec![Cell::Num(x0 + h * i as f64), Cell::Num(*z)]);
            }
            write_csv(&out.join("calibration.csv"), &table)?;
            json!({ "kind": "interval", "calibrable": c.calibrable, "lambda": c.lambda, "max_abs_z": c.max_abs_z })
        }
        CalibrateConfig::Radial { n, region, chi_in, chi_out } => {
            let speed = region_speed_radial(*n, region, *chi_in, *chi_out)?;
            json!({ "kind": "radial", "n": n, "region": region, "speed": speed })
        }
    };
    write_json(&out.join("calibration.json"), &report)?;
    Ok(report)
}

#[derive(Serialize)]
struct Calibration4th {
    n: u32,
    chi: i8,
    feasible: bool,
    profile: CalibrationProfile,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_saint_venant: Option<f64>,
}

/// Fourth-order calibration of a ball, exterior or annulus; writes the
/// profile (r, z, div z) and the verdict.
pub fn calibrate_4th(cfg: &Calibrate4thConfig, out: &Path) -> CliResult<Value> {
    let chi = cfg.chi;
    let (profile, feasible, sv) = match cfg.region {
        Region4th::Ball { radius } => {
            let p = fourth_ball_calibration(cfg.n, radius, chi)?;
            let sv = SvGeometry::Ball { radius };
            (p.clone(), p.feasible, Some((sv, Signature::new(vec![chi])?)))
        }
        Region4th::Exterior { radius } => {
            let p = exterior_calibration(cfg.n, radius)?;
            (p.clone(), p.feasible, None)
        }
        Region4th::Annulus { inner, outer } => {
            let sig = Signature::uniform(chi, 2)?;
            let a = annulus_calibrable_fourth(cfg.n, inner, outer, &sig)?;
            (a.profile, a.feasible, Some((SvGeometry::Annulus { inner, outer }, sig)))
        }
    };
    let lambda_sv = match (cfg.saint_venant, sv) {
        (true, Some((geom, sig))) => Some(lambda_saint_venant(cfg.n, geom, &sig)?),
        (true, None) => return Err(TvError::NotApplicable("no Saint-Venant problem on an exterior domain".into()).into()),
        (false, _) => None,
    };
    let points = cfg.profile_points.max(2);
    let hi = if profile.r_max.is_finite() { profile.r_max } else { 10.0 * profile.r_min };
    let mut table = Table::new(["r", "z", "div_z"]);
    for k in 0..points {
        let r = profile.r_min + (hi - profile.r_min) * k as f64 / (points - 1) as f64;
        if r > 0.0 {
            table.push(vec![Cell::Num(r), Cell::Num(profile.z(r)), Cell::Num(profile.div(r))]);
        }
    }
    write_csv(&out.join("profile.csv"), &table)?;
    let report = Calibration4th { n: cfg.n, chi, feasible, profile, lambda_saint_venant: lambda_sv };
    write_json(&out.join("calibration.json"), &report)?;
    Ok(serde_json::to_value(report).expect("serializable"))
}

pub fn bounds(cfg: &BoundsConfig, out: &Path, seed: u64) -> CliResult<BoundReport> {
    let report = match cfg {
        BoundsConfig::Second { datum } => extinction_bound_second(datum)?,
        BoundsConfig::Fourth { stack, p, c_n } => extinction_bound_fourth(stack, *p, *c_n)?,
        BoundsConfig::FractionalCritical { signal, n, s, c_ns } => {
            extinction_bound_fractional_critical(&signal.build()?, *n, *s, *c_ns)?
        }
        BoundsConfig::FractionalTorus { signal, s, p, c_star } => {
            let u0 = signal.build()?;
            let c = match c_star {
                Some(c) => *c,
                None => calibrate_c_star(*s, *p, u0.len(), C_STAR_SAMPLES, seed)?.c_star,
            };
            extinction_bound_teeper(&u0, *s, *p, c)?
        }
    };
    write_json(&out.join("bounds.json"), &report)?;
    Ok(report)
}

#[derive(Serialize)]
pub struct RegularityOutput {
    pub solver: &'static str,
    pub tol: f64,
    pub clean: bool,
    pub jumps: RegularityReport,
}

/// Runs the scenario and checks that jumps never appear or grow. Violations
/// are reported and turned into a failing exit status.
pub fn check_regularity(scn: &Scenario, out: &Path, tol: f64) -> CliResult<RegularityOutput> {
    let run = simulate(&scn.solver)?;
    // On 1D grids jump monotonicity is the discrete gradient bound.
    let jumps = match &run {
        Run::Step(t) => check_jump_monotonicity(t, tol)?,
        Run::Stack(t) => check_jump_monotonicity(t, tol)?,
        Run::Ball(t) => check_jump_monotonicity(t, tol)?,
        Run::Grid(t) => check_jump_monotonicity(t, tol)?,
    };
    let report = RegularityOutput { solver: scn.solver.tag(), tol, clean: jumps.is_clean(), jumps };
    write_json(&out.join("regularity.json"), &report)?;
    Ok(report)
}

pub fn qstar(n: u32, tol: f64, out: &Path) -> CliResult<QStar> {
    let q = find_q_star(n, tol)?;
    write_json(&out.join("qstar.json"), &q)?;
    Ok(q)
}
