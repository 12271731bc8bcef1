//! Formulas, traces, the spec grammar and the reference evaluator.

mod eval;
mod formula;
mod interval;
mod parse;
mod trace;

pub use eval::{eval_atom, eval_constraint, eval_finite, EvalError};
pub use formula::{
    finalize, shift_residual, simplify, Atom, Cmp, Formula, LinExpr, LinearConstraint, SumTerm, Verdict,
};
pub use interval::{in_interval, interval_shift, End, Interval, Time};
pub use parse::{parse_spec, parse_spec_with_warnings, ParseError, ParseWarning};
pub use trace::{State, TimedTrace, TraceError};
