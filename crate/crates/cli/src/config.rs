//! JSON config schemas. Every config carries `"version": 1`, which is
//! checked and stripped before the body is deserialized.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};
use tvflow::bounds::SecondOrderDatum;
use tvflow::radial2::RegionGeometry;
use tvflow::{GridSignal, RadialStack, StepFunction1D};

use crate::error::{CliError, CliResult};

pub const CONFIG_VERSION: u64 = 1;

/// A flow to run plus the artifacts to emit. The `solver` field picks the
/// variant; the remaining fields belong to it.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: Option<String>,
    pub solver: Solver,
    pub outputs: Outputs,
    pub bounds: Option<BoundRequest>,
}

#[derive(Debug, Clone)]
pub enum Solver {
    Exact1d(Exact1dConfig),
    ExactRadial(ExactRadialConfig),
    Fourth(FourthConfig),
    Minmov(MinmovConfig),
    Frac(FracConfig),
}

pub const SOLVERS: [&str; 5] = ["exact-1d", "exact-radial", "fourth", "minmov", "frac"];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exact1dConfig {
    pub initial: StepFunction1D<f64>,
    pub horizon: f64,
    /// Run in rational arithmetic (inputs are converted exactly).
    #[serde(default)]
    pub exact: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactRadialConfig {
    pub initial: RadialStack<f64>,
    pub horizon: f64,
    #[serde(default)]
    pub exact: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourthConfig {
    pub n: u32,
    pub a0: f64,
    pub r0: f64,
    pub horizon: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinmovConfig {
    pub initial: GridInit,
    pub tau: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FracConfig {
    pub initial: GridInit,
    pub s: f64,
    pub tau: f64,
    pub steps: usize,
    #[serde(default = "default_p")]
    pub growth_p: f64,
}

impl Solver {
    pub fn tag(&self) -> &'static str {
        match self {
            Solver::Exact1d(_) => SOLVERS[0],
            Solver::ExactRadial(_) => SOLVERS[1],
            Solver::Fourth(_) => SOLVERS[2],
            Solver::Minmov(_) => SOLVERS[3],
            Solver::Frac(_) => SOLVERS[4],
        }
    }
}

fn default_samples() -> usize {
    100
}

fn default_p() -> f64 {
    2.0
}

/// Grid data given directly or sampled from an exact datum.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "from", rename_all = "kebab-case")]
pub enum GridInit {
    Grid { grid: GridSignal },
    Step { step: StepFunction1D<f64>, nodes: usize },
    Stack { stack: RadialStack<f64>, r_max: f64, nodes: usize },
}

impl GridInit {
    pub fn build(&self) -> tvflow::Result<GridSignal> {
        match self {
            GridInit::Grid { grid } => Ok(grid.clone()),
            GridInit::Step { step, nodes } => GridSignal::sample_step(step, *nodes),
            GridInit::Stack { stack, r_max, nodes } => GridSignal::sample_stack(stack, *r_max, *nodes),
        }
    }

    /// The exact datum behind the grid, when there is one.
    pub fn source(&self) -> Option<SecondOrderDatum> {
        match self {
            GridInit::Grid { .. } => None,
            GridInit::Step { step, .. } => Some(SecondOrderDatum::Step(step.clone())),
            GridInit::Stack { stack, .. } => Some(SecondOrderDatum::Stack(stack.clone())),
        }
    }
}

/// File names inside the output directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub trajectory: String,
    pub diagnostics: String,
    pub events: String,
    pub bounds: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            trajectory: "trajectory.csv".into(),
            diagnostics: "diagnostics.csv".into(),
            events: "events.json".into(),
            bounds: "bounds.json".into(),
        }
    }
}

/// Bound check attached to a scenario. Unset constants fall back to the
/// library defaults; a fractional run without `c_star` calibrates one.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundRequest {
    pub p: Option<f64>,
    pub c_n: Option<f64>,
    pub c_star: Option<f64>,
    /// Critical fractional bound in dimension n (needs n = 2(s+1)).
    pub critical_n: Option<u32>,
    pub c_ns: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProxConfig {
    pub signal: GridInit,
    pub lambda: f64,
    /// Fractional order; absent means the L² prox.
    #[serde(default)]
    pub s: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CalibrateConfig {
    /// Weighted interval with weights sampled on a uniform grid.
    Interval {
        a: Vec<f64>,
        b: Vec<f64>,
        x0: f64,
        x1: f64,
        chi: Vec<i8>,
    },
    /// Speed of a radial region of the second-order flow.
    Radial {
        n: u32,
        region: RegionGeometry<f64>,
        #[serde(default)]
        chi_in: Option<i8>,
        #[serde(default)]
        chi_out: Option<i8>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibrate4thConfig {
    pub n: u32,
    pub region: Region4th,
    #[serde(default = "default_chi")]
    pub chi: i8,
    /// Cross-check λ with a Saint-Venant solve.
    #[serde(default)]
    pub saint_venant: bool,
    #[serde(default = "default_profile_points")]
    pub profile_points: usize,
}

fn default_chi() -> i8 {
    1
}

fn default_profile_points() -> usize {
    256
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Region4th {
    Ball { radius: f64 },
    Exterior { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundsConfig {
    Second {
        datum: SecondOrderDatum,
    },
    Fourth {
        stack: RadialStack<f64>,
        p: f64,
        #[serde(default)]
        c_n: Option<f64>,
    },
    FractionalCritical {
        signal: GridInit,
        n: u32,
        s: f64,
        c_ns: f64,
    },
    FractionalTorus {
        signal: GridInit,
        s: f64,
        p: f64,
        #[serde(default)]
        c_star: Option<f64>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QStarConfig {
    #[serde(default = "default_n")]
    pub n: u32,
}

fn default_n() -> u32 {
    2
}

pub fn read_json(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::schema(&path.display().to_string(), "", format!("not valid JSON: {e}")))
}

fn check_version(file: &str, mut value: Value) -> CliResult<Value> {
    match value.get("version") {
        None => return Err(CliError::schema(file, "version", "missing field")),
        Some(v) if v.as_u64() != Some(CONFIG_VERSION) => {
            return Err(CliError::schema(file, "version", format!("unsupported version {v}, expected {CONFIG_VERSION}")))
        }
        Some(_) => {}
    }
    if let Some(obj) = value.as_object_mut() {
        obj.remove("version");
    }
    Ok(value)
}

/// JSON path of the failing field; a missing field is appended to the path
/// of its parent.
fn field_path(prefix: Option<&str>, path: String, message: &str) -> String {
    let missing = message.strip_prefix("missing field `").and_then(|m| m.split('`').next());
    let parts: Vec<&str> = [prefix, (path != ".").then_some(path.as_str()), missing].into_iter().flatten().collect();
    parts.join(".")
}

fn deserialize_at<T: DeserializeOwned>(file: &str, prefix: Option<&str>, value: Value) -> CliResult<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let message = e.into_inner().to_string();
        CliError::schema(file, &field_path(prefix, path, &message), message)
    })
}

/// Deserializes with the failing field's path in the error.
fn parse_body<T: DeserializeOwned>(file: &str, value: Value) -> CliResult<T> {
    deserialize_at(file, None, value)
}

/// Checks `version`, then deserializes the rest of the config.
pub fn parse<T: DeserializeOwned>(file: &str, value: Value) -> CliResult<T> {
    parse_body(file, check_version(file, value)?)
}

fn take<T: DeserializeOwned>(file: &str, obj: &mut Map<String, Value>, key: &str) -> CliResult<Option<T>> {
    match obj.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => deserialize_at(file, Some(key), v).map(Some),
    }
}

/// Loads a scenario; `solver` is filled in (or checked) when the subcommand
/// fixes it.
pub fn load_scenario(path: &Path, solver: Option<&str>) -> CliResult<Scenario> {
    let file = path.display().to_string();
    let value = check_version(&file, read_json(path)?)?;
    let Value::Object(mut obj) = value else {
        return Err(CliError::schema(&file, "", "a scenario must be a JSON object"));
    };
    let tag = match (obj.remove("solver"), solver) {
        (None, Some(tag)) => tag.to_string(),
        (None, None) => return Err(CliError::schema(&file, "solver", format!("missing field, expected one of {SOLVERS:?}"))),
        (Some(Value::String(s)), Some(tag)) if s != tag => {
            return Err(CliError::schema(&file, "solver", format!("this subcommand runs `{tag}`, config says `{s}`")))
        }
        (Some(Value::String(s)), _) => s,
        (Some(other), _) => return Err(CliError::schema(&file, "solver", format!("expected a string, got {other}"))),
    };
    let name = take(&file, &mut obj, "name")?;
    let outputs = take(&file, &mut obj, "outputs")?.unwrap_or_default();
    let bounds = take(&file, &mut obj, "bounds")?;
    let rest = Value::Object(obj);
    let solver = match tag.as_str() {
        "exact-1d" => Solver::Exact1d(parse_body(&file, rest)?),
        "exact-radial" => Solver::ExactRadial(parse_body(&file, rest)?),
        "fourth" => Solver::Fourth(parse_body(&file, rest)?),
        "minmov" => Solver::Minmov(parse_body(&file, rest)?),
        "frac" => Solver::Frac(parse_body(&file, rest)?),
        other => return Err(CliError::schema(&file, "solver", format!("unknown solver `{other}`, expected one of {SOLVERS:?}"))),
    };
    Ok(Scenario { name, solver, outputs, bounds })
}

pub fn load<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    parse(&path.display().to_string(), read_json(path)?)
}
