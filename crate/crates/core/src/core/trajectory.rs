use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TvError};
use crate::scalar::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Merge,
    /// The state reached zero.
    Extinction,
    /// The state became constant at a nonzero value (torus mean, nonzero
    /// exterior value).
    Steady,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Serialize + for<'a> Deserialize<'a>")]
pub struct FlowEvent<T> {
    pub time: T,
    pub kind: EventKind,
    pub detail: String,
}

/// Time-stamped states, event log and named diagnostic series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Serialize + for<'a> Deserialize<'a>, T: Serialize + for<'a> Deserialize<'a>")]
pub struct FlowTrajectory<S, T = f64> {
    pub times: Vec<T>,
    pub states: Vec<S>,
    pub events: Vec<FlowEvent<T>>,
    pub diagnostics: BTreeMap<String, Vec<f64>>,
}

impl<S, T: Field> FlowTrajectory<S, T> {
    pub fn new(initial: S) -> Self {
        FlowTrajectory {
            times: vec![T::zero()],
            states: vec![initial],
            events: vec![],
            diagnostics: BTreeMap::new(),
        }
    }

    /// Appends a state; times must increase strictly.
    pub fn push(&mut self, t: T, state: S) -> Result<()> {
        if self.times.last().is_some_and(|last| t <= *last) {
            return Err(TvError::InvariantViolation(format!(
                "trajectory time {t:?} does not increase"
            )));
        }
        self.times.push(t);
        self.states.push(state);
        Ok(())
    }

    pub fn event(&mut self, time: T, kind: EventKind, detail: impl Into<String>) {
        self.events.push(FlowEvent { time, kind, detail: detail.into() });
    }

    pub fn record(&mut self, name: &str, value: f64) {
        self.diagnostics.entry(name.to_string()).or_default().push(value);
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.diagnostics.get(name).map(|v| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last_state(&self) -> &S {
        self.states.last().expect("trajectory has an initial state")
    }

    pub fn final_event(&self, kind: EventKind) -> Option<&FlowEvent<T>> {
        self.events.iter().rev().find(|e| e.kind == kind)
    }
}
