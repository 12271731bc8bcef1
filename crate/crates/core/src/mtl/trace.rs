use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::interval::Time;

/// Propositions that hold plus integer state variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct State {
    pub propositions: BTreeSet<String>,
    pub variables: BTreeMap<String, i64>,
}

impl State {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_props<I, S>(props: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        State {
            propositions: props.into_iter().map(Into::into).collect(),
            variables: BTreeMap::new(),
        }
    }

    pub fn with_var(mut self, name: impl Into<String>, value: i64) -> Self {
        self.variables.insert(name.into(), value);
        self
    }

    pub fn holds(&self, prop: &str) -> bool {
        self.propositions.contains(prop)
    }
}

/// A finite sequence of states with non-decreasing timestamps.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimedTrace {
    states: Vec<State>,
    times: Vec<Time>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("states and times differ in length ({states} vs {times})")]
    LengthMismatch { states: usize, times: usize },
    #[error("time decreases at position {0}")]
    Decreasing(usize),
}

impl TimedTrace {
    pub fn new(states: Vec<State>, times: Vec<Time>) -> Result<Self, TraceError> {
        if states.len() != times.len() {
            return Err(TraceError::LengthMismatch { states: states.len(), times: times.len() });
        }
        if let Some(i) = times.windows(2).position(|w| w[1] < w[0]) {
            return Err(TraceError::Decreasing(i + 1));
        }
        Ok(TimedTrace { states, times })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (State, Time)>) -> Result<Self, TraceError> {
        let (states, times) = pairs.into_iter().unzip();
        Self::new(states, times)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn times(&self) -> &[Time] {
        &self.times
    }

    pub fn state(&self, i: usize) -> &State {
        &self.states[i]
    }

    pub fn time(&self, i: usize) -> Time {
        self.times[i]
    }

    pub fn first_time(&self) -> Option<Time> {
        self.times.first().copied()
    }

    pub fn last_time(&self) -> Option<Time> {
        self.times.last().copied()
    }

    /// Positions `from..`, as a new trace.
    pub fn suffix(&self, from: usize) -> TimedTrace {
        TimedTrace { states: self.states[from..].to_vec(), times: self.times[from..].to_vec() }
    }

    /// Positions `..to`, as a new trace.
    pub fn prefix(&self, to: usize) -> TimedTrace {
        TimedTrace { states: self.states[..to].to_vec(), times: self.times[..to].to_vec() }
    }

    pub fn push(&mut self, state: State, time: Time) -> Result<(), TraceError> {
        if self.times.last().is_some_and(|&t| time < t) {
            return Err(TraceError::Decreasing(self.len()));
        }
        self.states.push(state);
        self.times.push(time);
        Ok(())
    }

    /// Concatenation; fails when `other` starts before `self` ends.
    pub fn concat(&self, other: &TimedTrace) -> Result<TimedTrace, TraceError> {
        let mut out = self.clone();
        for (s, &t) in other.states.iter().zip(&other.times) {
            out.push(s.clone(), t)?;
        }
        Ok(out)
    }
}
