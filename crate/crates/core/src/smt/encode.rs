//! SMT-LIB text for one piece of one branch.
//!
//! Symbols:
//!
//! | symbol                     | sort | meaning                                          |
//! |----------------------------|------|--------------------------------------------------|
//! | `rho_<step>_<event>`       | Bool | event is in the piece's cut after `step` steps   |
//! | `delta_<event>`            | Int  | true time assigned to the event                  |
//! | `tau_<step>`               | Int  | time of `step`; `tau_0` is the previous time     |
//! | `len`                      | Int  | number of steps in the piece                     |
//! | `verdict_<id>_<step>`      | Bool | truth of subformula `id` at `step`               |
//! | `shadow_<event>`           | Int  | time of a not-yet-consumed event in a completion |
//!
//! `<event>` is the event index of the whole computation; steps count from 1.

use std::collections::BTreeMap;

use crate::computation::{Computation, EventId};
use crate::mtl::{Atom, End, Formula, Interval, LinExpr, Time};
use crate::pipeline::pieces::{Context, PieceQuery};

use super::SmtError;

/// Which verdict of the whole formula the problem asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Satisfaction,
    Violation,
}

/// Problem text plus what is needed to read a model back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmtProblem {
    /// Declarations and assertions, without `(check-sat)`.
    pub body: String,
    pub decode: DecodeMap,
}

impl SmtProblem {
    /// Full solver input with extra assertions appended.
    pub fn text_with(&self, extra: &[String]) -> String {
        let mut s = self.body.clone();
        for a in extra {
            s.push_str(a);
            s.push('\n');
        }
        s.push_str("(check-sat)\n(get-model)\n");
        s
    }

    pub fn text(&self) -> String {
        self.text_with(&[])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeMap {
    /// Events that may be added, in index order.
    pub candidates: Vec<EventId>,
    /// Events outside the starting cut.
    pub unconsumed: Vec<EventId>,
    /// Number of unrolled steps, `= candidates.len()`.
    pub steps: usize,
    /// The piece must take every candidate.
    pub fixed_len: bool,
    /// Subformula id of each atom.
    pub atoms: Vec<(usize, Atom)>,
    pub root: usize,
    pub booleans: usize,
}

pub(crate) struct Encoder<'a> {
    c: &'a Computation,
    q: PieceQuery,
    start: &'a Context,
    candidates: Vec<EventId>,
    is_candidate: Vec<bool>,
    unconsumed: Vec<EventId>,
    m: usize,
    out: String,
}

fn int(n: i64) -> String {
    if n < 0 {
        format!("(- {})", -n)
    } else {
        n.to_string()
    }
}

fn and(items: Vec<String>) -> String {
    if items.iter().any(|s| s == "false") {
        return "false".into();
    }
    let items: Vec<String> = items.into_iter().filter(|s| s != "true").collect();
    match items.len() {
        0 => "true".into(),
        1 => items.into_iter().next().unwrap(),
        _ => format!("(and {})", items.join(" ")),
    }
}

fn or(items: Vec<String>) -> String {
    if items.iter().any(|s| s == "true") {
        return "true".into();
    }
    let items: Vec<String> = items.into_iter().filter(|s| s != "false").collect();
    match items.len() {
        0 => "false".into(),
        1 => items.into_iter().next().unwrap(),
        _ => format!("(or {})", items.join(" ")),
    }
}

fn not(s: String) -> String {
    match s.as_str() {
        "true" => "false".into(),
        "false" => "true".into(),
        _ => format!("(not {s})"),
    }
}

fn implies(a: String, b: String) -> String {
    match (a.as_str(), b.as_str()) {
        ("false", _) | (_, "true") => "true".into(),
        ("true", _) => b,
        _ => format!("(=> {a} {b})"),
    }
}

pub(crate) fn rho(i: usize, e: EventId) -> String {
    format!("rho_{i}_{e}")
}

pub(crate) fn tau(i: usize) -> String {
    format!("tau_{i}")
}

pub(crate) fn delta(e: EventId) -> String {
    format!("delta_{e}")
}

pub(crate) fn verdict(id: usize, i: usize) -> String {
    format!("verdict_{id}_{i}")
}

fn shadow(e: EventId) -> String {
    format!("shadow_{e}")
}

/// Distinct subformulas numbered in post-order.
fn number(f: &Formula, ids: &mut BTreeMap<Formula, usize>, order: &mut Vec<Formula>) -> usize {
    if let Some(&id) = ids.get(f) {
        return id;
    }
    match f {
        Formula::True | Formula::False | Formula::Atom(_) => {}
        Formula::Not(a) | Formula::Eventually(_, a) | Formula::Globally(_, a) => {
            number(a, ids, order);
        }
        Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) | Formula::Until(a, _, b) => {
            number(a, ids, order);
            number(b, ids, order);
        }
    }
    let id = order.len();
    ids.insert(f.clone(), id);
    order.push(f.clone());
    id
}

impl<'a> Encoder<'a> {
    pub(crate) fn new(c: &'a Computation, q: PieceQuery, start: &'a Context) -> Self {
        let n = c.len();
        let unconsumed: Vec<EventId> = (0..n).filter(|&e| !start.consumed.contains(e)).collect();
        let in_range = |e: EventId| q.in_range(c.event(e));
        // A candidate needs every unconsumed predecessor to be a candidate too; the
        // relation is transitively closed, so checking range suffices.
        let candidates: Vec<EventId> = unconsumed
            .iter()
            .copied()
            .filter(|&e| in_range(e) && c.predecessors(e).ones().all(|p| start.consumed.contains(p) || in_range(p)))
            .collect();
        let mut is_candidate = vec![false; n];
        for &e in &candidates {
            is_candidate[e] = true;
        }
        let m = candidates.len();
        Encoder { c, q, start, candidates, is_candidate, unconsumed, m, out: String::new() }
    }

    pub(crate) fn steps(&self) -> usize {
        self.m
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.out.push_str(s.as_ref());
        self.out.push('\n');
    }

    fn assert(&mut self, s: String) {
        if s != "true" {
            self.line(format!("(assert {s})"));
        }
    }

    fn member(&self, i: usize, e: EventId) -> String {
        if self.start.consumed.contains(e) {
            "true".into()
        } else if self.is_candidate[e] && i > 0 {
            rho(i, e)
        } else {
            "false".into()
        }
    }

    fn picked(&self, e: EventId) -> String {
        self.member(self.m, e)
    }

    fn frontier(&self, i: usize, e: EventId) -> String {
        let here = self.member(i, e);
        let next = match self.c.next_on_process(e) {
            Some(x) => self.member(i, x),
            None => "false".into(),
        };
        and(vec![here, not(next)])
    }

    fn t0(&self) -> Time {
        self.start.last_time.unwrap_or(0)
    }

    fn last_time_expr(&self) -> String {
        if self.m == 0 {
            self.t0().to_string()
        } else {
            format!("(ite (= len 0) {} {})", self.t0(), tau(self.m))
        }
    }

    fn active(&self, i: usize) -> String {
        if self.fixed_len() {
            "true".into()
        } else {
            format!("(<= {i} len)")
        }
    }

    fn fixed_len(&self) -> bool {
        self.q.is_last()
    }

    fn lin_expr(&self, i: usize, e: &LinExpr) -> String {
        let mut parts = vec![int(e.constant)];
        for t in &e.terms {
            let var = t.variable();
            let mut sum = Vec::new();
            for x in 0..self.c.len() {
                let Some(v) = self.c.event(x).payload.variables.get(&var) else { continue };
                let fr = self.frontier(i, x);
                if fr == "false" || *v == 0 {
                    continue;
                }
                sum.push(if fr == "true" { int(*v) } else { format!("(ite {fr} {} 0)", int(*v)) });
            }
            if sum.is_empty() {
                continue;
            }
            let s = if sum.len() == 1 { sum.pop().unwrap() } else { format!("(+ {})", sum.join(" ")) };
            parts.push(if t.coef == 1 { s } else { format!("(* {} {s})", int(t.coef)) });
        }
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            format!("(+ {})", parts.join(" "))
        }
    }

    fn atom_expr(&self, i: usize, a: &Atom) -> String {
        match a {
            Atom::Prop(p) => or((0..self.c.len())
                .filter(|&e| self.c.event(e).payload.holds(p))
                .map(|e| self.frontier(i, e))
                .collect()),
            Atom::Linear(lc) => {
                let op = match lc.cmp {
                    crate::mtl::Cmp::Ge => ">=",
                    crate::mtl::Cmp::Gt => ">",
                    crate::mtl::Cmp::Le => "<=",
                    crate::mtl::Cmp::Lt => "<",
                    crate::mtl::Cmp::Eq => "=",
                };
                format!("({op} {} {})", self.lin_expr(i, &lc.lhs), self.lin_expr(i, &lc.rhs))
            }
        }
    }

    fn in_interval(&self, j: usize, i: usize, iv: &Interval) -> String {
        if iv.is_empty() {
            return "false".into();
        }
        let d = format!("(- {} {})", tau(j), tau(i));
        if j == i {
            return if iv.contains(0) { "true".into() } else { "false".into() };
        }
        let mut parts = Vec::new();
        if iv.start() > 0 {
            parts.push(format!("(>= {d} {})", iv.start()));
        }
        if let End::Finite(e) = iv.end() {
            parts.push(format!("(< {d} {e})"));
        }
        and(parts)
    }

    /// Encodes structure, completion and atom flags; with `mode`, also the verdict of
    /// `f` at step 1.
    pub(crate) fn encode(mut self, f: &Formula, mode: Option<Mode>, bool_budget: usize) -> Result<SmtProblem, SmtError> {
        let m = self.m;
        let mut ids = BTreeMap::new();
        let mut order = Vec::new();
        let root = number(f, &mut ids, &mut order);
        let atoms: Vec<(usize, Atom)> = order
            .iter()
            .enumerate()
            .filter_map(|(id, g)| match g {
                Formula::Atom(a) => Some((id, a.clone())),
                _ => None,
            })
            .collect();
        let flagged = if mode.is_some() { order.len() } else { atoms.len() };
        let booleans = (m + 1) * m + flagged * m;
        if booleans > bool_budget {
            return Err(SmtError::Budget { booleans, limit: bool_budget });
        }

        self.line("(set-option :produce-models true)");
        self.line("(set-logic QF_LIA)");

        // Declarations.
        for i in 0..=m {
            for k in 0..m {
                let e = self.candidates[k];
                self.line(format!("(declare-fun {} () Bool)", rho(i, e)));
            }
        }
        for k in 0..m {
            let e = self.candidates[k];
            self.line(format!("(declare-fun {} () Int)", delta(e)));
        }
        for i in 0..=m {
            self.line(format!("(declare-fun {} () Int)", tau(i)));
        }
        self.line("(declare-fun len () Int)");

        // Length.
        if self.fixed_len() {
            self.line(format!("(assert (= len {m}))"));
            if self.unconsumed.len() != m {
                self.line("(assert false)");
            }
        } else {
            self.line(format!("(assert (and (<= 0 len) (<= len {m})))"));
        }

        // Cut sequence.
        for k in 0..m {
            let e = self.candidates[k];
            self.line(format!("(assert (not {}))", rho(0, e)));
        }
        for i in 1..=m {
            for k in 0..m {
                let e = self.candidates[k];
                self.assert(implies(rho(i - 1, e), rho(i, e)));
                for p in self.c.predecessors(e).ones() {
                    if self.is_candidate[p] {
                        self.assert(implies(rho(i, e), rho(i, p)));
                    }
                }
            }
            let count = if m == 1 {
                format!("(ite {} 1 0)", rho(i, self.candidates[0]))
            } else {
                format!(
                    "(+ {})",
                    self.candidates.iter().map(|&e| format!("(ite {} 1 0)", rho(i, e))).collect::<Vec<_>>().join(" ")
                )
            };
            let grow = format!("(= {count} {i})");
            let hold = and(self.candidates.iter().map(|&e| format!("(= {} {})", rho(i, e), rho(i - 1, e))).collect());
            if self.fixed_len() {
                self.assert(grow);
            } else {
                self.assert(format!("(ite (<= {i} len) {grow} {hold})"));
            }
        }

        // Times.
        for k in 0..m {
            let e = self.candidates[k];
            let w = self.c.window(e);
            self.line(format!("(assert (and (<= {} {}) (<= {} {})))", w.start(), delta(e), delta(e), w.end()));
        }
        if let Some(t) = self.start.last_time {
            self.line(format!("(assert (= {} {t}))", tau(0)));
        }
        for i in 1..=m {
            for k in 0..m {
                let e = self.candidates[k];
                self.assert(implies(
                    and(vec![rho(i, e), not(rho(i - 1, e))]),
                    format!("(= {} {})", tau(i), delta(e)),
                ));
            }
            let prev_ok = if i > 1 || self.start.last_time.is_some() {
                format!("(>= {} {})", tau(i), tau(i - 1))
            } else {
                "true".into()
            };
            let act = self.active(i);
            self.assert(implies(act.clone(), prev_ok));
            if i > 1 && !self.fixed_len() {
                self.assert(implies(not(act), format!("(= {} {})", tau(i), tau(i - 1))));
            }
        }

        // The piece opens past the previous segment.
        if m > 0 {
            for k in 0..m {
                let e = self.candidates[k];
                if !self.q.may_open(self.c.event(e)) {
                    self.line(format!("(assert (not {}))", rho(1, e)));
                }
            }
        }

        // The rest of the computation must still be schedulable, starting past the
        // segment's end.
        if !self.fixed_len() {
            self.encode_completion();
        }

        // Formula flags.
        for (id, g) in order.iter().enumerate() {
            if mode.is_none() && !matches!(g, Formula::Atom(_)) {
                continue;
            }
            for i in 1..=m {
                self.line(format!("(declare-fun {} () Bool)", verdict(id, i)));
            }
        }
        for (id, g) in order.iter().enumerate() {
            if mode.is_none() && !matches!(g, Formula::Atom(_)) {
                continue;
            }
            for i in 1..=m {
                let def = self.definition(g, &ids, i);
                self.line(format!("(assert (= {} {def}))", verdict(id, i)));
            }
        }
        if let Some(mode) = mode {
            if m == 0 {
                return Err(SmtError::EmptySegment);
            }
            let v = verdict(root, 1);
            self.assert(match mode {
                Mode::Satisfaction => v,
                Mode::Violation => not(v),
            });
        }

        Ok(SmtProblem {
            body: self.out,
            decode: DecodeMap {
                candidates: self.candidates,
                unconsumed: self.unconsumed,
                steps: m,
                fixed_len: self.q.is_last(),
                atoms,
                root,
                booleans,
            },
        })
    }

    fn encode_completion(&mut self) {
        let last = self.last_time_expr();
        let unconsumed = self.unconsumed.clone();
        for &e in &unconsumed {
            self.line(format!("(declare-fun {} () Int)", shadow(e)));
        }
        for &e in &unconsumed {
            let w = self.c.window(e);
            let body = format!(
                "(and (<= {} {s}) (<= {s} {}) (>= {s} {last}))",
                w.start(),
                w.end(),
                s = shadow(e)
            );
            self.assert(implies(not(self.picked(e)), body));
        }
        for &e in &unconsumed {
            for p in self.c.predecessors(e).ones() {
                if self.start.consumed.contains(p) {
                    continue;
                }
                self.assert(implies(
                    and(vec![not(self.picked(p)), not(self.picked(e))]),
                    format!("(<= {} {})", shadow(p), shadow(e)),
                ));
            }
        }
        let mut options = Vec::new();
        if self.unconsumed.len() == self.m {
            options.push(format!("(= len {})", self.m));
        }
        for &x in &unconsumed {
            if !self.q.may_follow(self.c.event(x)) {
                continue;
            }
            let preds: Vec<EventId> =
                self.c.predecessors(x).ones().filter(|p| !self.start.consumed.contains(*p)).collect();
            if preds.iter().any(|&p| !self.is_candidate[p]) {
                continue;
            }
            let mut parts: Vec<String> = preds.iter().map(|&p| self.picked(p)).collect();
            for &e in &unconsumed {
                if e != x {
                    parts.push(implies(not(self.picked(e)), format!("(<= {} {})", shadow(x), shadow(e))));
                }
            }
            options.push(and(parts));
        }
        let opts = or(options);
        self.assert(opts);
    }

    fn definition(&self, g: &Formula, ids: &BTreeMap<Formula, usize>, i: usize) -> String {
        let m = self.m;
        let v = |h: &Formula, j: usize| verdict(ids[h], j);
        match g {
            Formula::True => "true".into(),
            Formula::False => "false".into(),
            Formula::Atom(a) => self.atom_expr(i, a),
            Formula::Not(a) => not(v(a, i)),
            Formula::Or(a, b) => or(vec![v(a, i), v(b, i)]),
            Formula::And(a, b) => and(vec![v(a, i), v(b, i)]),
            Formula::Implies(a, b) => implies(v(a, i), v(b, i)),
            Formula::Until(a, iv, b) => {
                let mut options = Vec::new();
                for j in i..=m {
                    let mut parts = vec![self.active(j), self.in_interval(j, i, iv), v(b, j)];
                    parts.extend((i..j).map(|k| v(a, k)));
                    options.push(and(parts));
                }
                or(options)
            }
            Formula::Eventually(iv, a) => {
                or((i..=m).map(|j| and(vec![self.active(j), self.in_interval(j, i, iv), v(a, j)])).collect())
            }
            Formula::Globally(iv, a) => and((i..=m)
                .map(|j| implies(and(vec![self.active(j), self.in_interval(j, i, iv)]), v(a, j)))
                .collect()),
        }
    }
}
