//! Formula progression over finite timed segments.
//!
//! `progress(trace, f)` returns a residual formula for the continuation. Residuals are
//! anchored at the last timestamp of the trace: intervals of every pending temporal
//! operator are measured from `τ_last`. When the continuation starts at time `t`, the
//! residual must be moved forward by `t − τ_last` with [`shift_residual`]; that is what
//! [`progress_to`] does. With this convention, for a non-empty suffix starting at `t`,
//!
//! ```text
//! eval(prefix·suffix, f, 0) = eval(suffix, progress_to(prefix, f, t), 0)
//! eval(prefix, f, 0)        = finalize(progress(prefix, f))
//! ```

use std::collections::HashMap;

use crate::mtl::{
    eval_atom, in_interval, shift_residual, simplify, Atom, EvalError, Formula, Interval, Time, TimedTrace,
};

/// Residual of `f` after observing `trace`, anchored at the trace's last time. An empty
/// trace leaves the formula unchanged.
pub fn progress(trace: &TimedTrace, f: &Formula) -> Result<Formula, EvalError> {
    if trace.is_empty() {
        return Ok(f.clone());
    }
    let f = simplify(f);
    Progressor::new(trace).at(&f, 0)
}

/// A fact about the trace that progression looked at. Positions are trace indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Read {
    Atom { atom: Atom, pos: usize, value: bool },
    /// `τ_j − τ_i ∈ iv`.
    Member { j: usize, i: usize, iv: Interval, value: bool },
    /// `τ_j − τ_i ≥ bound`.
    AtLeast { j: usize, i: usize, bound: Time, value: bool },
    /// `τ_last − τ_i`, exact when below `clamp` and otherwise only known to be `≥ clamp`.
    Span { i: usize, value: Time, clamp: Time },
}

/// As [`progress`], also returning every fact the result depends on. Any trace of the
/// same length that agrees on these facts has the same residual.
pub fn progress_with_reads(trace: &TimedTrace, f: &Formula) -> Result<(Formula, Vec<Read>), EvalError> {
    if trace.is_empty() {
        return Ok((f.clone(), Vec::new()));
    }
    let f = simplify(f);
    let mut p = Progressor::new(trace);
    p.reads = Some(Vec::new());
    let r = p.at(&f, 0)?;
    Ok((r, p.reads.unwrap_or_default()))
}

/// Residual of `f` after `trace`, re-anchored for a continuation whose first state is
/// at `next_time`.
pub fn progress_to(trace: &TimedTrace, f: &Formula, next_time: Time) -> Result<Formula, EvalError> {
    let r = progress(trace, f)?;
    let gap = trace.last_time().map_or(0, |t| next_time.saturating_sub(t));
    Ok(shift_residual(&r, gap))
}

pub fn progress_atom(trace: &TimedTrace, a: &Atom) -> Result<Formula, EvalError> {
    progress(trace, &Formula::Atom(a.clone()))
}

pub fn progress_not(trace: &TimedTrace, f: &Formula) -> Result<Formula, EvalError> {
    progress(trace, &Formula::not_(f.clone()))
}

pub fn progress_or(trace: &TimedTrace, f1: &Formula, f2: &Formula) -> Result<Formula, EvalError> {
    progress(trace, &Formula::or_(f1.clone(), f2.clone()))
}

pub fn progress_globally(trace: &TimedTrace, i: Interval, f: &Formula) -> Result<Formula, EvalError> {
    progress(trace, &Formula::globally_(i, f.clone()))
}

pub fn progress_eventually(trace: &TimedTrace, i: Interval, f: &Formula) -> Result<Formula, EvalError> {
    progress(trace, &Formula::eventually_(i, f.clone()))
}

pub fn progress_until(
    trace: &TimedTrace,
    f1: &Formula,
    i: Interval,
    f2: &Formula,
) -> Result<Formula, EvalError> {
    progress(trace, &Formula::until_(f1.clone(), i, f2.clone()))
}

struct Progressor<'a> {
    trace: &'a TimedTrace,
    last: usize,
    memo: HashMap<(*const Formula, usize), Formula>,
    reads: Option<Vec<Read>>,
}

impl<'a> Progressor<'a> {
    fn new(trace: &'a TimedTrace) -> Self {
        Progressor { trace, last: trace.len() - 1, memo: HashMap::new(), reads: None }
    }

    fn span(&self, i: usize) -> Time {
        self.trace.time(self.last) - self.trace.time(i)
    }

    /// Progression of the suffix starting at position `i`.
    fn at(&mut self, f: &Formula, i: usize) -> Result<Formula, EvalError> {
        let key = (f as *const Formula, i);
        if let Some(r) = self.memo.get(&key) {
            return Ok(r.clone());
        }
        let r = self.compute(f, i)?;
        self.memo.insert(key, r.clone());
        Ok(r)
    }

    fn compute(&mut self, f: &Formula, i: usize) -> Result<Formula, EvalError> {
        Ok(match f {
            Formula::True | Formula::False => f.clone(),
            Formula::Atom(a) => {
                let value = eval_atom(a, self.trace.state(i))?;
                self.note(|| Read::Atom { atom: a.clone(), pos: i, value });
                Formula::constant(value)
            }
            Formula::Not(a) => Formula::not(self.at(a, i)?),
            Formula::Or(a, b) => {
                let l = self.at(a, i)?;
                if l == Formula::True {
                    return Ok(l);
                }
                Formula::or(l, self.at(b, i)?)
            }
            Formula::And(a, b) => {
                let l = self.at(a, i)?;
                if l == Formula::False {
                    return Ok(l);
                }
                Formula::and(l, self.at(b, i)?)
            }
            Formula::Implies(a, b) => {
                let l = self.at(a, i)?;
                if l == Formula::False {
                    return Ok(Formula::True);
                }
                Formula::implies(l, self.at(b, i)?)
            }
            Formula::Globally(iv, a) => self.globally(*iv, a, i)?,
            Formula::Eventually(iv, a) => self.eventually(*iv, a, i)?,
            Formula::Until(a, iv, b) => self.until(a, *iv, b, i)?,
        })
    }

    fn note(&mut self, r: impl FnOnce() -> Read) {
        if let Some(v) = &mut self.reads {
            v.push(r());
        }
    }

    fn in_window(&mut self, j: usize, i: usize, iv: &Interval) -> bool {
        let value = in_interval(self.trace.time(j), self.trace.time(i), iv);
        if j != i {
            self.note(|| Read::Member { j, i, iv: *iv, value });
        }
        value
    }

    /// Pending part of `iv` seen from the anchor, or `None` when the interval closes
    /// before any continuation state can occur.
    fn pending(&mut self, iv: Interval, i: usize) -> Option<Interval> {
        let span = self.span(i);
        let clamp = iv.max_constant();
        if clamp > 0 {
            self.note(|| Read::Span { i, value: span.min(clamp), clamp });
        }
        (!iv.ends_by(span)).then(|| iv.shift(span))
    }

    fn globally(&mut self, iv: Interval, a: &Formula, i: usize) -> Result<Formula, EvalError> {
        let mut acc = Formula::True;
        for j in i..=self.last {
            if self.in_window(j, i, &iv) {
                acc = Formula::and(acc, self.at(a, j)?);
                if acc == Formula::False {
                    return Ok(acc);
                }
            }
        }
        if let Some(rest) = self.pending(iv, i) {
            acc = Formula::and(acc, Formula::globally(rest, a.clone()));
        }
        Ok(acc)
    }

    fn eventually(&mut self, iv: Interval, a: &Formula, i: usize) -> Result<Formula, EvalError> {
        let mut acc = Formula::False;
        for j in i..=self.last {
            if self.in_window(j, i, &iv) {
                acc = Formula::or(acc, self.at(a, j)?);
                if acc == Formula::True {
                    return Ok(acc);
                }
            }
        }
        if let Some(rest) = self.pending(iv, i) {
            acc = Formula::or(acc, Formula::eventually(rest, a.clone()));
        }
        Ok(acc)
    }

    /// Witness at a prefix position `j`: `φ1` held on `[i, j)` and `φ2` holds at `j`.
    /// Witness in the continuation: `φ1` held on the whole suffix and the shifted until
    /// holds from the anchor. Every witness lies at or after `start`, so `φ1` must hold
    /// at each position strictly before it; that guard is conjoined up front.
    fn until(&mut self, a: &Formula, iv: Interval, b: &Formula, i: usize) -> Result<Formula, EvalError> {
        let start_time = self.trace.time(i) + iv.start();
        let mut guard = Formula::True;
        for k in i..=self.last {
            let reached = self.trace.time(k) >= start_time;
            if k != i {
                self.note(|| Read::AtLeast { j: k, i, bound: iv.start(), value: reached });
            }
            if reached {
                break;
            }
            guard = Formula::and(guard, self.at(a, k)?);
            if guard == Formula::False {
                return Ok(guard);
            }
        }

        let mut witnesses = Formula::False;
        let mut held = Formula::True;
        for j in i..=self.last {
            if self.in_window(j, i, &iv) {
                let w = Formula::and(held.clone(), self.at(b, j)?);
                witnesses = Formula::or(witnesses, w);
                if witnesses == Formula::True {
                    break;
                }
            }
            held = Formula::and(held, self.at(a, j)?);
            if held == Formula::False {
                break;
            }
        }
        if witnesses != Formula::True && held != Formula::False {
            if let Some(rest) = self.pending(iv, i) {
                let tail = Formula::and(held, Formula::until(a.clone(), rest, b.clone()));
                witnesses = Formula::or(witnesses, tail);
            }
        }
        Ok(Formula::and(guard, witnesses))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mtl::{parse_spec, State};

    fn trace(items: &[(&[&str], u64)]) -> TimedTrace {
        TimedTrace::from_pairs(items.iter().map(|(p, t)| (State::with_props(p.iter().copied()), *t)))
            .unwrap()
    }

    fn f(s: &str) -> Formula {
        parse_spec(s).unwrap()
    }

    #[test]
    fn segmented_response_chain() {
        let spec = f("F[0,6) r -> (!p U[2,9) q)");
        let seg1 = trace(&[(&[], 1), (&[], 2), (&[], 3)]);
        let r1 = progress_to(&seg1, &spec, 3).unwrap();
        assert_eq!(r1, f("F[0,4) r -> (!p U[0,7) q)"));
        let seg2 = trace(&[(&["r"], 3), (&[], 4), (&[], 5)]);
        let r2 = progress_to(&seg2, &r1, 6).unwrap();
        assert_eq!(r2, f("!p U[0,4) q"));
        assert_eq!(progress(&seg2, &f("F[0,3) r -> (!p U[0,6) q)")).unwrap(), f("!p U[0,4) q"));
        let seg3 = trace(&[(&[], 6), (&["q"], 7), (&["p"], 7)]);
        assert_eq!(progress(&seg3, &r2).unwrap(), Formula::True);
    }

    #[test]
    fn atoms_and_booleans() {
        let t = trace(&[(&["a"], 0)]);
        assert_eq!(progress(&t, &f("a")).unwrap(), Formula::True);
        assert_eq!(progress(&t, &f("b")).unwrap(), Formula::False);
        assert_eq!(progress(&t, &f("!a")).unwrap(), Formula::False);
        assert_eq!(progress(&t, &f("a | b")).unwrap(), Formula::True);
        let s = State::new().with_var("to_alice", 100).with_var("from_alice", 100);
        let t = TimedTrace::from_pairs([(s, 0)]).unwrap();
        assert_eq!(progress(&t, &f("sum(to:alice) >= sum(from:alice)")).unwrap(), Formula::True);
    }

    #[test]
    fn interval_beyond_trace() {
        let t = trace(&[(&[], 1), (&[], 2), (&[], 3)]);
        assert_eq!(progress(&t, &f("F[5,9) p | G[5,9) q")).unwrap(), f("F[3,7) p | G[3,7) q"));
        assert_eq!(progress(&t, &f("G[5,9) p")).unwrap(), f("G[3,7) p"));
    }

    #[test]
    fn globally_branches() {
        let t = trace(&[(&["p"], 0), (&["p"], 1)]);
        // A continuation state may share time 1, so G[0,2) is still pending.
        assert_eq!(progress(&t, &f("G[0,2) p")).unwrap(), f("G[0,1) p"));
        assert_eq!(progress_to(&t, &f("G[0,2) p"), 2).unwrap(), Formula::True);
        let t = trace(&[(&["p"], 0), (&[], 1)]);
        assert_eq!(progress(&t, &f("G[0,5) p")).unwrap(), Formula::False);
    }

    #[test]
    fn eventually_branches() {
        assert_eq!(progress(&trace(&[(&["r"], 3)]), &f("F[0,3) r")).unwrap(), Formula::True);
        assert_eq!(progress(&trace(&[(&[], 0), (&[], 9)]), &f("F[0,5) r")).unwrap(), Formula::False);
    }

    #[test]
    fn until_branches() {
        assert_eq!(progress(&trace(&[(&["q"], 0)]), &f("p U[0,5) q")).unwrap(), Formula::True);
        let t = trace(&[(&["p"], 0), (&["p"], 1)]);
        assert_eq!(progress(&t, &f("p U[7,9) q")).unwrap(), f("p U[6,8) q"));
        assert_eq!(progress_to(&t, &f("p U[7,9) q"), 2).unwrap(), f("p U[5,7) q"));
    }

    #[test]
    fn redeem_order_segment_one() {
        let spec = f("!apr_redeem_bob U[0,8) ban_redeem_alice");
        let span4 = trace(&[(&[], 1), (&[], 2), (&[], 3), (&[], 5)]);
        assert_eq!(progress(&span4, &spec).unwrap(), f("!apr_redeem_bob U[0,4) ban_redeem_alice"));
        let span5 = trace(&[(&[], 0), (&[], 2), (&[], 3), (&[], 5)]);
        assert_eq!(progress(&span5, &spec).unwrap(), f("!apr_redeem_bob U[0,3) ban_redeem_alice"));
    }

    #[test]
    fn outputs_are_normalized() {
        let t = trace(&[(&["a"], 0), (&[], 2), (&["b"], 3)]);
        for s in ["a U[0,2) b", "G[1,5) (a | F[0,2) b)", "!(F[0,1) a -> G b)", "a U (b U[1,3) a)"] {
            let r = progress(&t, &f(s)).unwrap();
            assert_eq!(simplify(&r), r, "{s}");
        }
    }
}
