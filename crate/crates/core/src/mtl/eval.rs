//! Reference evaluator for finite MTL.

use std::collections::HashMap;

use super::formula::{Atom, Formula, LinExpr, LinearConstraint, Verdict};
use super::interval::in_interval;
use super::trace::{State, TimedTrace};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("state variable `{0}` is not defined in the trace")]
    UndeclaredVariable(String),
    #[error("position {index} is out of range for a trace of length {len}")]
    OutOfRange { index: usize, len: usize },
}

fn lin_value(e: &LinExpr, s: &State) -> Result<i64, EvalError> {
    let mut acc = e.constant;
    for t in &e.terms {
        let var = t.variable();
        let v = s.variables.get(&var).ok_or(EvalError::UndeclaredVariable(var))?;
        acc += t.coef * v;
    }
    Ok(acc)
}

pub fn eval_constraint(c: &LinearConstraint, s: &State) -> Result<bool, EvalError> {
    Ok(c.cmp.holds(lin_value(&c.lhs, s)?, lin_value(&c.rhs, s)?))
}

/// Atom truth in one state. A proposition absent from the state is false.
pub fn eval_atom(a: &Atom, s: &State) -> Result<bool, EvalError> {
    match a {
        Atom::Prop(p) => Ok(s.holds(p)),
        Atom::Linear(c) => eval_constraint(c, s),
    }
}

/// Finite-trace verdict of `f` at position `i`.
pub fn eval_finite(trace: &TimedTrace, f: &Formula, i: usize) -> Result<Verdict, EvalError> {
    if i >= trace.len() {
        return Err(EvalError::OutOfRange { index: i, len: trace.len() });
    }
    let mut ev = Evaluator { trace, memo: HashMap::new() };
    ev.eval(f, i).map(Verdict::from_bool)
}

struct Evaluator<'a> {
    trace: &'a TimedTrace,
    memo: HashMap<(*const Formula, usize), bool>,
}

impl Evaluator<'_> {
    fn eval(&mut self, f: &Formula, i: usize) -> Result<bool, EvalError> {
        let key = (f as *const Formula, i);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let v = self.eval_uncached(f, i)?;
        self.memo.insert(key, v);
        Ok(v)
    }

    fn eval_uncached(&mut self, f: &Formula, i: usize) -> Result<bool, EvalError> {
        let n = self.trace.len();
        let t0 = self.trace.time(i);
        Ok(match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => eval_atom(a, self.trace.state(i))?,
            Formula::Not(a) => !self.eval(a, i)?,
            Formula::Or(a, b) => self.eval(a, i)? || self.eval(b, i)?,
            Formula::And(a, b) => self.eval(a, i)? && self.eval(b, i)?,
            Formula::Implies(a, b) => !self.eval(a, i)? || self.eval(b, i)?,
            Formula::Until(a, iv, b) => {
                let mut found = false;
                for j in i..n {
                    if in_interval(self.trace.time(j), t0, iv) && self.eval(b, j)? {
                        found = true;
                        break;
                    }
                    if !self.eval(a, j)? {
                        break;
                    }
                }
                found
            }
            Formula::Eventually(iv, a) => {
                let mut found = false;
                for j in i..n {
                    if in_interval(self.trace.time(j), t0, iv) && self.eval(a, j)? {
                        found = true;
                        break;
                    }
                }
                found
            }
            Formula::Globally(iv, a) => {
                let mut ok = true;
                for j in i..n {
                    if in_interval(self.trace.time(j), t0, iv) && !self.eval(a, j)? {
                        ok = false;
                        break;
                    }
                }
                ok
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mtl::formula::Cmp;
    use crate::mtl::interval::Interval;

    fn trace(items: &[(&[&str], u64)]) -> TimedTrace {
        TimedTrace::from_pairs(items.iter().map(|(p, t)| (State::with_props(p.iter().copied()), *t)))
            .unwrap()
    }

    fn a_until_b() -> Formula {
        Formula::until_(Formula::prop("a"), Interval::bounded(0, 6), Formula::prop("b"))
    }

    #[test]
    fn skewed_until_traces() {
        let good = trace(&[(&["a"], 1), (&["a"], 2), (&["b"], 4), (&[], 5)]);
        assert_eq!(eval_finite(&good, &a_until_b(), 0), Ok(Verdict::Top));
        let bad = trace(&[(&["a"], 1), (&["a"], 2), (&[], 4), (&["b"], 5)]);
        assert_eq!(eval_finite(&bad, &a_until_b(), 0), Ok(Verdict::Bottom));
    }

    #[test]
    fn defaults_past_the_end() {
        let t = trace(&[(&[], 0), (&[], 1)]);
        let f = Formula::eventually_(Interval::bounded(0, 10), Formula::prop("p"));
        let g = Formula::globally_(Interval::bounded(0, 10), Formula::prop("p"));
        assert_eq!(eval_finite(&t, &f, 0), Ok(Verdict::Bottom));
        assert_eq!(eval_finite(&t, &g, 0), Ok(Verdict::Bottom));
        assert_eq!(eval_finite(&t, &Formula::globally_(Interval::bounded(5, 10), Formula::prop("p")), 0), Ok(Verdict::Top));
        assert_eq!(eval_finite(&t, &Formula::True, 1), Ok(Verdict::Top));
    }

    #[test]
    fn linear_atoms() {
        let s = State::new().with_var("to_alice", 100).with_var("from_alice", 100);
        let t = TimedTrace::from_pairs([(s, 0)]).unwrap();
        let c = LinearConstraint {
            lhs: LinExpr::sum("to", "alice"),
            cmp: Cmp::Ge,
            rhs: LinExpr::sum("from", "alice"),
        };
        assert_eq!(eval_finite(&t, &Formula::linear(c.clone()), 0), Ok(Verdict::Top));
        let missing = LinearConstraint { rhs: LinExpr::sum("from", "bob"), ..c };
        assert_eq!(
            eval_finite(&t, &Formula::linear(missing), 0),
            Err(EvalError::UndeclaredVariable("from_bob".into()))
        );
    }
}
