//! Runs a scenario and turns its trajectory into tables and reports.

use std::path::{Path, PathBuf};

use num_rational::BigRational;
use serde::Serialize;
use tvflow::bounds::{
    extinction_bound_fourth, extinction_bound_fractional_critical, extinction_bound_second, BoundReport,
    SecondOrderDatum,
};
use tvflow::exact1d::evolve_1d;
use tvflow::fourth::{evolve_fourth_ball, FourthBallState};
use tvflow::fracflow::{calibrate_c_star, evolve_fractional, extinction_bound_teeper};
use tvflow::minmov::{minimizing_movements, prox_tv};
use tvflow::radial2::evolve_radial;
use tvflow::{EventKind, Field, FlowTrajectory, GridSignal, RadialStack, StepFunction1D, TvError};

use crate::config::{
    BoundRequest, Exact1dConfig, ExactRadialConfig, FourthConfig, FracConfig, MinmovConfig, Scenario, Solver,
};
use crate::error::{CliError, CliResult};
use crate::io::{fmt_f64, write_csv, write_json, Cell, Table};

/// Random signals used when a fractional bound has to calibrate C*.
pub const C_STAR_SAMPLES: usize = 64;

/// A finished run, with exact trajectories converted to f64.
pub enum Run {
    Step(FlowTrajectory<StepFunction1D<f64>>),
    Stack(FlowTrajectory<RadialStack<f64>>),
    Ball(FlowTrajectory<FourthBallState>),
    Grid(FlowTrajectory<GridSignal>),
}

#[derive(Debug, Clone, Serialize)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKind,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub name: Option<String>,
    pub solver: &'static str,
    pub out: PathBuf,
    pub states: usize,
    pub final_time: f64,
    pub events: Vec<EventRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundReport>,
}

fn to_rational(x: f64) -> CliResult<BigRational> {
    BigRational::from_float(x).ok_or_else(|| TvError::InvalidInput(format!("{x} has no exact rational value")).into())
}

fn demote<S, R, T: Field>(traj: FlowTrajectory<S, T>, f: impl Fn(&S) -> R) -> FlowTrajectory<R> {
    FlowTrajectory {
        times: traj.times.iter().map(Field::as_f64).collect(),
        states: traj.states.iter().map(f).collect(),
        events: traj
            .events
            .into_iter()
            .map(|e| tvflow::FlowEvent { time: e.time.as_f64(), kind: e.kind, detail: e.detail })
            .collect(),
        diagnostics: traj.diagnostics,
    }
}

pub fn simulate(solver: &Solver) -> CliResult<Run> {
    Ok(match solver {
        Solver::Exact1d(Exact1dConfig { initial, horizon, exact: false }) => Run::Step(evolve_1d(initial, *horizon)?),
        Solver::Exact1d(Exact1dConfig { initial, horizon, exact: true }) => {
            let bps = initial.breakpoints().iter().map(|x| to_rational(*x)).collect::<CliResult<_>>()?;
            let vals = initial.values().iter().map(|x| to_rational(*x)).collect::<CliResult<_>>()?;
            let u = StepFunction1D::new(bps, vals, to_rational(*initial.period())?)?;
            Run::Step(demote(evolve_1d(&u, to_rational(*horizon)?)?, StepFunction1D::to_f64))
        }
        Solver::ExactRadial(ExactRadialConfig { initial, horizon, exact: false }) => Run::Stack(evolve_radial(initial, *horizon)?),
        Solver::ExactRadial(ExactRadialConfig { initial, horizon, exact: true }) => {
            let radii = initial.radii().iter().map(|x| to_rational(*x)).collect::<CliResult<_>>()?;
            let vals = initial.values().iter().map(|x| to_rational(*x)).collect::<CliResult<_>>()?;
            let u = RadialStack::new(radii, vals, to_rational(*initial.outer_value())?, initial.dimension())?;
            Run::Stack(demote(evolve_radial(&u, to_rational(*horizon)?)?, RadialStack::to_f64))
        }
        Solver::Fourth(FourthConfig { n, a0, r0, horizon, samples }) => Run::Ball(evolve_fourth_ball(*n, *a0, *r0, *horizon, *samples)?),
        Solver::Minmov(MinmovConfig { initial, tau, steps }) => Run::Grid(minimizing_movements(&initial.build()?, *tau, *steps, prox_tv)?),
        Solver::Frac(FracConfig { initial, s, tau, steps, growth_p }) => {
            Run::Grid(evolve_fractional(&initial.build()?, *s, *tau, *steps, *growth_p)?)
        }
    })
}

impl Run {
    pub fn times(&self) -> &[f64] {
        match self {
            Run::Step(t) => &t.times,
            Run::Stack(t) => &t.times,
            Run::Ball(t) => &t.times,
            Run::Grid(t) => &t.times,
        }
    }

    pub fn events(&self) -> Vec<EventRecord> {
        let events = match self {
            Run::Step(t) => &t.events,
            Run::Stack(t) => &t.events,
            Run::Ball(t) => &t.events,
            Run::Grid(t) => &t.events,
        };
        events.iter().map(|e| EventRecord { time: e.time, kind: e.kind, detail: e.detail.clone() }).collect()
    }

    fn library_series(&self) -> &std::collections::BTreeMap<String, Vec<f64>> {
        match self {
            Run::Step(t) => &t.diagnostics,
            Run::Stack(t) => &t.diagnostics,
            Run::Ball(t) => &t.diagnostics,
            Run::Grid(t) => &t.diagnostics,
        }
    }

    /// One row per state: t, then plateau count, breakpoints/radii and
    /// values (padded to the widest state), or a, R, gap for balls, or the
    /// samples of a grid.
    pub fn trajectory_table(&self) -> Table {
        match self {
            Run::Step(traj) => {
                let width = traj.states.iter().map(StepFunction1D::len).max().unwrap_or(0);
                let mut t = Table::new(
                    ["t".to_string(), "m".to_string()]
                        .into_iter()
                        .chain((0..width).map(|k| format!("x{k}")))
                        .chain((0..width).map(|k| format!("v{k}"))),
                );
                for (time, u) in traj.times.iter().zip(&traj.states) {
                    let mut row = vec![Cell::Num(*time), Cell::Int(u.len())];
                    row.extend(padded(u.breakpoints(), width));
                    row.extend(padded(u.values(), width));
                    t.push(row);
                }
                t
            }
            Run::Stack(traj) => {
                let width = traj.states.iter().map(|u| u.radii().len()).max().unwrap_or(0);
                let mut t = Table::new(
                    ["t".to_string(), "m".to_string()]
                        .into_iter()
                        .chain((0..width).map(|k| format!("r{k}")))
                        .chain((0..width).map(|k| format!("v{k}")))
                        .chain(["outer".to_string()]),
                );
                for (time, u) in traj.times.iter().zip(&traj.states) {
                    let mut row = vec![Cell::Num(*time), Cell::Int(u.radii().len())];
                    row.extend(padded(u.radii(), width));
                    row.extend(padded(u.values(), width));
                    row.push(Cell::Num(*u.outer_value()));
                    t.push(row);
                }
                t
            }
            Run::Ball(traj) => {
                let mut t = Table::new(["t", "a", "R", "gap"]);
                for (time, b) in traj.times.iter().zip(&traj.states) {
                    t.push(vec![Cell::Num(*time), Cell::Num(b.a), Cell::Num(b.r), b.gap().into()]);
                }
                t
            }
            Run::Grid(traj) => {
                let first = &traj.states[0];
                let mut t = Table::new(["t".to_string()].into_iter().chain(first.positions().into_iter().map(fmt_f64)));
                for (time, u) in traj.times.iter().zip(&traj.states) {
                    let mut row = vec![Cell::Num(*time)];
                    row.extend(u.samples().iter().map(|v| Cell::Num(*v)));
                    t.push(row);
                }
                t
            }
        }
    }

    /// t plus every diagnostic series. Exact runs get tv, l1 and l2 computed
    /// here.
    pub fn diagnostics_table(&self) -> CliResult<Table> {
        let mut cols: Vec<(String, Vec<Option<f64>>)> = Vec::new();
        let computed = |f: &dyn Fn(usize) -> tvflow::Result<Option<f64>>| -> CliResult<Vec<Option<f64>>> {
            (0..self.times().len()).map(|i| f(i).map_err(CliError::from)).collect()
        };
        match self {
            Run::Step(traj) => {
                cols.push(("tv".into(), computed(&|i| Ok(Some(traj.states[i].total_variation())))?));
                cols.push(("l1".into(), computed(&|i| traj.states[i].lp_norm(1.0).map(Some))?));
                cols.push(("l2".into(), computed(&|i| traj.states[i].lp_norm(2.0).map(Some))?));
                cols.push(("mean".into(), computed(&|i| Ok(Some(traj.states[i].mean())))?));
            }
            Run::Stack(traj) => {
                cols.push(("tv".into(), computed(&|i| Ok(Some(traj.states[i].total_variation())))?));
                cols.push(("l1".into(), computed(&|i| traj.states[i].lp_norm(1.0).map(Some))?));
                cols.push(("l2".into(), computed(&|i| traj.states[i].lp_norm(2.0).map(Some))?));
            }
            Run::Ball(traj) => {
                if traj.states[0].tail.is_none() {
                    // The extinct state is logged with a = 0.
                    let stack = |i: usize| {
                        let b = &traj.states[i];
                        if b.a == 0.0 { Ok(None) } else { b.to_stack().map(Some) }
                    };
                    cols.push(("tv".into(), computed(&|i| Ok(stack(i)?.map(|u| u.total_variation()).or(Some(0.0))))?));
                    cols.push(("l1".into(), computed(&|i| stack(i)?.map_or(Ok(0.0), |u| u.lp_norm(1.0)).map(Some))?));
                }
            }
            Run::Grid(_) => {}
        }
        let preferred = ["hs_norm", "tv", "l2", "dissipation_residual", "w1p_norm", "gap", "tail", "residual"];
        let mut lib: Vec<(&String, &Vec<f64>)> = self.library_series().iter().collect();
        lib.sort_by_key(|(k, _)| (preferred.iter().position(|p| p == k).unwrap_or(preferred.len()), (*k).clone()));
        for (name, series) in lib {
            if !cols.iter().any(|(c, _)| c == name) {
                cols.push((name.clone(), series.iter().map(|v| Some(*v)).collect()));
            }
        }
        let mut table = Table::new(["t".to_string()].into_iter().chain(cols.iter().map(|(c, _)| c.clone())));
        for (i, time) in self.times().iter().enumerate() {
            let mut row = vec![Cell::Num(*time)];
            row.extend(cols.iter().map(|(_, s)| s.get(i).copied().flatten().into()));
            table.push(row);
        }
        Ok(table)
    }

    fn observed_extinction(&self) -> Option<f64> {
        self.events().into_iter().find(|e| e.kind == EventKind::Extinction).map(|e| e.time)
    }
}

fn padded(xs: &[f64], width: usize) -> Vec<Cell> {
    (0..width).map(|k| xs.get(k).map_or(Cell::Blank, |x| Cell::Num(*x))).collect()
}

fn missing(field: &str) -> CliError {
    CliError::schema("", &format!("bounds.{field}"), "required for this solver")
}

/// The bound that fits the solver's initial datum.
pub fn scenario_bound(solver: &Solver, req: &BoundRequest, run: &Run, seed: u64) -> CliResult<BoundReport> {
    let report = match solver {
        Solver::Exact1d(Exact1dConfig { initial, .. }) => extinction_bound_second(&SecondOrderDatum::Step(initial.clone()))?,
        Solver::ExactRadial(ExactRadialConfig { initial, .. }) => extinction_bound_second(&SecondOrderDatum::Stack(initial.clone()))?,
        Solver::Fourth(FourthConfig { n, a0, r0, .. }) => {
            let p = match (req.p, n) {
                (Some(p), _) => p,
                (None, 4) => 2.0,
                (None, _) => return Err(missing("p")),
            };
            extinction_bound_fourth(&RadialStack::ball(*n, *a0, *r0)?, p, req.c_n)?
        }
        Solver::Minmov(MinmovConfig { initial, .. }) => match initial.source() {
            Some(datum) => extinction_bound_second(&datum)?,
            None => {
                return Err(TvError::NotApplicable("second-order bounds need a step or stack datum, not raw samples".into()).into())
            }
        },
        Solver::Frac(FracConfig { initial, s, .. }) => {
            let u0 = initial.build()?;
            match req.critical_n {
                Some(n) => extinction_bound_fractional_critical(&u0, n, *s, req.c_ns.ok_or_else(|| missing("c_ns"))?)?,
                None => {
                    let p = req.p.unwrap_or(2.0);
                    let c_star = match req.c_star {
                        Some(c) => c,
                        None => calibrate_c_star(*s, p, u0.len(), C_STAR_SAMPLES, seed)?.c_star,
                    };
                    extinction_bound_teeper(&u0, *s, p, c_star)?
                }
            }
        }
    };
    Ok(match (report.actual, run.observed_extinction()) {
        (None, Some(t)) => report.with_actual(t),
        _ => report,
    })
}

/// Runs the scenario and writes its four artifacts under `out`.
pub fn run_scenario(scn: &Scenario, out: &Path, seed: u64) -> CliResult<RunSummary> {
    let run = simulate(&scn.solver)?;
    write_csv(&out.join(&scn.outputs.trajectory), &run.trajectory_table())?;
    write_csv(&out.join(&scn.outputs.diagnostics), &run.diagnostics_table()?)?;
    let events = run.events();
    write_json(&out.join(&scn.outputs.events), &events)?;
    let bound = match &scn.bounds {
        Some(req) => {
            let report = scenario_bound(&scn.solver, req, &run, seed)?;
            write_json(&out.join(&scn.outputs.bounds), &report)?;
            Some(report)
        }
        None => None,
    };
    Ok(RunSummary {
        name: scn.name.clone(),
        solver: scn.solver.tag(),
        out: out.to_path_buf(),
        states: run.times().len(),
        final_time: *run.times().last().unwrap_or(&0.0),
        events,
        bound,
    })
}
