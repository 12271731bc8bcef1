//! Exhaustive enumeration of linearizations and timestamp assignments.
//!
//! Ground truth for the other engines: no shortcut beyond dropping a partial schedule
//! once its next event has no admissible time left.

use std::collections::BTreeSet;

use crate::computation::{Computation, EventId, EventSet};
use crate::mtl::{eval_finite, finalize, EvalError, Formula, State, Time, TimedTrace, Verdict};
use crate::progression::progress;

pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("more than {0} linearizations; the oracle refuses to truncate")]
    BudgetExceeded(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// One total order of the events together with one time per event.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Linearization {
    /// Event added at step `j + 1`.
    pub order: Vec<EventId>,
    /// Time of step `j + 1`.
    pub times: Vec<Time>,
}

impl Linearization {
    /// `C_0 = ∅, C_1, …, C_m = E`.
    pub fn cuts(&self, c: &Computation) -> Vec<EventSet> {
        let mut cut = c.empty_set();
        let mut out = vec![cut.clone()];
        for &e in &self.order {
            cut.insert(e);
            out.push(cut.clone());
        }
        out
    }

    /// Frontier states of `C_1 … C_m` with their times.
    pub fn trace(&self, c: &Computation) -> TimedTrace {
        let states = self.cuts(c).iter().skip(1).map(|cut| c.frontier_state(cut)).collect();
        TimedTrace::new(states, self.times.clone()).expect("linearization times are monotone")
    }
}

/// Calls `visit` once per linearization, with its induced trace.
pub fn for_each_linearization(
    c: &Computation,
    budget: usize,
    mut visit: impl FnMut(&Linearization, &TimedTrace) -> Result<(), OracleError>,
) -> Result<usize, OracleError> {
    let mut dfs = Dfs {
        c,
        budget,
        count: 0,
        cut: c.empty_set(),
        frontier: vec![None; c.processes().iter().max().map_or(0, |p| p + 1)],
        lin: Linearization { order: Vec::new(), times: Vec::new() },
        states: Vec::new(),
    };
    dfs.run(&mut visit)?;
    Ok(dfs.count)
}

/// Every linearization, collected.
pub fn enumerate_linearizations(c: &Computation, budget: usize) -> Result<Vec<Linearization>, OracleError> {
    let mut out = Vec::new();
    for_each_linearization(c, budget, |l, _| {
        out.push(l.clone());
        Ok(())
    })?;
    Ok(out)
}

/// The set of finite-trace verdicts over all linearizations. An empty computation has
/// the verdict of `f` on the empty continuation.
pub fn oracle_verdicts(c: &Computation, f: &Formula) -> Result<BTreeSet<Verdict>, OracleError> {
    oracle_verdicts_with_budget(c, f, DEFAULT_BUDGET)
}

pub fn oracle_verdicts_with_budget(
    c: &Computation,
    f: &Formula,
    budget: usize,
) -> Result<BTreeSet<Verdict>, OracleError> {
    if c.is_empty() {
        return Ok(BTreeSet::from([finalize(f)]));
    }
    let mut out = BTreeSet::new();
    for_each_linearization(c, budget, |_, t| {
        out.insert(eval_finite(t, f, 0)?);
        Ok(())
    })?;
    Ok(out)
}

/// The set of residual formulas over all linearizations.
pub fn oracle_progress(c: &Computation, f: &Formula) -> Result<BTreeSet<Formula>, OracleError> {
    oracle_progress_with_budget(c, f, DEFAULT_BUDGET)
}

pub fn oracle_progress_with_budget(
    c: &Computation,
    f: &Formula,
    budget: usize,
) -> Result<BTreeSet<Formula>, OracleError> {
    if c.is_empty() {
        return Ok(BTreeSet::from([f.clone()]));
    }
    let mut out = BTreeSet::new();
    for_each_linearization(c, budget, |_, t| {
        out.insert(progress(t, f)?);
        Ok(())
    })?;
    Ok(out)
}

struct Dfs<'a> {
    c: &'a Computation,
    budget: usize,
    count: usize,
    cut: EventSet,
    frontier: Vec<Option<EventId>>,
    lin: Linearization,
    states: Vec<State>,
}

impl Dfs<'_> {
    fn run(
        &mut self,
        visit: &mut impl FnMut(&Linearization, &TimedTrace) -> Result<(), OracleError>,
    ) -> Result<(), OracleError> {
        if self.lin.order.len() == self.c.len() {
            self.count += 1;
            if self.count > self.budget {
                return Err(OracleError::BudgetExceeded(self.budget));
            }
            let trace = TimedTrace::new(self.states.clone(), self.lin.times.clone())
                .expect("times are monotone by construction");
            return visit(&self.lin, &trace);
        }
        let floor = self.lin.times.last().copied().unwrap_or(0);
        for e in 0..self.c.len() {
            if !self.c.is_enabled(&self.cut, e) {
                continue;
            }
            let w = self.c.window(e);
            let lo = floor.max(*w.start());
            if lo > *w.end() {
                continue;
            }
            let p = self.c.event(e).process;
            let saved = self.frontier[p].replace(e);
            self.cut.insert(e);
            self.lin.order.push(e);
            self.states.push(self.state());
            for t in lo..=*w.end() {
                self.lin.times.push(t);
                let r = self.run(visit);
                self.lin.times.pop();
                r?;
            }
            self.states.pop();
            self.lin.order.pop();
            self.cut.set(e, false);
            self.frontier[p] = saved;
        }
        Ok(())
    }

    fn state(&self) -> State {
        let mut s = State::new();
        for e in self.frontier.iter().flatten() {
            let payload = &self.c.event(*e).payload;
            s.propositions.extend(payload.propositions.iter().cloned());
            for (k, v) in &payload.variables {
                *s.variables.entry(k.clone()).or_insert(0) += v;
            }
        }
        s
    }
}
