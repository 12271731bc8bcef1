//! SMT-based enumeration of progression verdicts.
//!
//! For one piece of one branch the encoder unrolls the cut sequence, the time
//! assignment and the truth of every atom over at most `m` steps, where `m` is the
//! number of events the piece may add. Each model is decoded into a piece, checked
//! against the computation, and replayed through [`crate::progression`]. A blocking
//! clause then removes every model with the same signature (atom truth, clamped gaps,
//! length, end context) until the solver answers `unsat`.

mod encode;
mod solver;

use std::collections::BTreeSet;
use std::hash::{Hash, Hasher};
use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

use crate::computation::{Computation, EventId, Segment, SegmentPlan};
use crate::mtl::{eval_atom, finalize, End, EvalError, Formula, Interval, Time, TimedTrace};
use crate::pipeline::pieces::{for_each_piece, Context, Piece, PieceQuery};
use crate::progression::Read;

pub use encode::{DecodeMap, Mode, SmtProblem};
pub use solver::{parse_model, parse_output, solve, Model, SolverConfig, SolverResult, Value};

pub const DEFAULT_BOOL_BUDGET: usize = 5000;

#[derive(Debug, Error)]
pub enum SmtError {
    #[error("cannot start solver: {0}")]
    Spawn(String),
    #[error("solver timed out after {0:?}")]
    Timeout(Duration),
    #[error("solver exited with status {status:?}: {stderr}")]
    Crash { status: Option<i32>, stderr: String },
    #[error("cannot read solver output: {0}")]
    Unparsable(String),
    #[error("solver answered unknown")]
    Unknown,
    #[error("model is not a valid piece: {0}")]
    InvalidModel(String),
    #[error("encoding needs {booleans} Boolean symbols, limit is {limit}")]
    Budget { booleans: usize, limit: usize },
    #[error("a verdict query needs at least one event")]
    EmptySegment,
    #[error("cannot write {path}: {message}")]
    Emit { path: PathBuf, message: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Solver plus encoding limits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmtOptions {
    pub solver: SolverConfig,
    pub bool_budget: usize,
    /// Write every query to this directory.
    pub emit_dir: Option<PathBuf>,
}

impl Default for SmtOptions {
    fn default() -> Self {
        SmtOptions { solver: SolverConfig::default(), bool_budget: DEFAULT_BOOL_BUDGET, emit_dir: None }
    }
}

impl SmtOptions {
    pub fn with_solver(command: impl Into<String>) -> Self {
        SmtOptions { solver: SolverConfig::new(command), ..Default::default() }
    }
}

/// Branches reached after one piece.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PieceVerdicts {
    pub branches: BTreeSet<(Formula, Context)>,
    /// `false` when enumeration stopped at the verdict cap.
    pub complete: bool,
    pub solver_calls: usize,
}

impl PieceVerdicts {
    pub fn formulas(&self) -> BTreeSet<Formula> {
        self.branches.iter().map(|(f, _)| f.clone()).collect()
    }
}

/// Residual verdicts of a whole segment, taken as a computation of its own.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentVerdicts {
    pub formulas: BTreeSet<Formula>,
    pub complete: bool,
    pub solver_calls: usize,
}

fn whole(c: &Computation, seg: &Segment) -> (Computation, PieceQuery) {
    let sub = c.restrict(&c.set_of(seg.events.iter().copied()));
    let l = sub.max_local_time().max(1);
    let plan = SegmentPlan::new(1, l, sub.epsilon()).expect("one segment always fits");
    (sub, PieceQuery { plan, k: 1 })
}

/// Encodes "some linearization of the segment gives `mode` for `f`".
pub fn encode(c: &Computation, seg: &Segment, f: &Formula, mode: Mode) -> Result<SmtProblem, SmtError> {
    let (sub, q) = whole(c, seg);
    let start = Context::initial(&sub);
    encode::Encoder::new(&sub, q, &start).encode(f, Some(mode), DEFAULT_BOOL_BUDGET)
}

/// Is there a linearization of the segment on which `f` has the verdict `mode`?
pub fn check_mode(c: &Computation, seg: &Segment, f: &Formula, mode: Mode, opts: &SmtOptions) -> Result<bool, SmtError> {
    let (sub, q) = whole(c, seg);
    let start = Context::initial(&sub);
    let problem = encode::Encoder::new(&sub, q, &start).encode(f, Some(mode), opts.bool_budget)?;
    let text = problem.text();
    emit(opts, "mode", 0, &text)?;
    match solve(&text, &opts.solver)? {
        SolverResult::Unsat => Ok(false),
        SolverResult::Sat(model) => {
            let piece = decode(&sub, q, &start, &problem.decode, &model)?;
            let trace = &piece.trace;
            let native = crate::mtl::eval_finite(trace, f, 0)?;
            let want = matches!(mode, Mode::Satisfaction);
            if native.holds() != want {
                return Err(SmtError::InvalidModel(format!("witness evaluates to {native}")));
            }
            Ok(true)
        }
    }
}

/// Every residual of `f` over the linearizations of one segment, found by the
/// solver. At most `max` distinct formulas are collected.
pub fn enumerate_verdicts(
    c: &Computation,
    seg: &Segment,
    f: &Formula,
    max: usize,
    opts: &SmtOptions,
) -> Result<SegmentVerdicts, SmtError> {
    let (sub, q) = whole(c, seg);
    let start = Context::initial(&sub);
    let r = enumerate_piece_verdicts(&sub, q, &start, f, max, opts)?;
    Ok(SegmentVerdicts { formulas: r.formulas(), complete: r.complete, solver_calls: r.solver_calls })
}

/// Every `(residual, end context)` reachable by a piece of segment `q.k` from
/// `start`. `f` is anchored at `start.last_time`.
pub fn enumerate_piece_verdicts(
    c: &Computation,
    q: PieceQuery,
    start: &Context,
    f: &Formula,
    max: usize,
    opts: &SmtOptions,
) -> Result<PieceVerdicts, SmtError> {
    let mut out = PieceVerdicts { complete: true, ..Default::default() };
    if !c.completion_feasible(&start.consumed, start.last_time) {
        return Ok(out);
    }
    let mut seen: BTreeSet<Formula> = BTreeSet::new();
    let mut add = |out: &mut PieceVerdicts, g: Formula, ctx: Context| -> bool {
        if !seen.contains(&g) {
            if seen.len() >= max {
                out.complete = false;
                return false;
            }
            seen.insert(g.clone());
        }
        out.branches.insert((g, ctx));
        true
    };

    let enc = encode::Encoder::new(c, q, start);
    if enc.steps() == 0 {
        // Nothing can be added; only the empty piece remains.
        let mut pieces = Vec::new();
        for_each_piece(c, q, start, |p| {
            pieces.push(p.clone());
            Ok(())
        })?;
        for p in pieces {
            let g = p.advance(start, f)?;
            if !add(&mut out, g, p.end.clone()) {
                break;
            }
        }
        return Ok(out);
    }

    let problem = enc.encode(f, None, opts.bool_budget)?;
    let bound = f.max_time_constant();
    let tag = {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        (q.k, start, f).hash(&mut h);
        h.finish()
    };
    let mut blocks: Vec<String> = Vec::new();
    loop {
        let text = problem.text_with(&blocks);
        emit(opts, &format!("k{}_{tag:016x}", q.k), out.solver_calls, &text)?;
        out.solver_calls += 1;
        let model = match solve(&text, &opts.solver)? {
            SolverResult::Unsat => break,
            SolverResult::Sat(m) => m,
        };
        let piece = decode(c, q, start, &problem.decode, &model)?;
        check_atoms(&problem.decode, &piece, &model)?;
        let (g, reads) = piece.advance_with_reads(start, f)?;
        if !add(&mut out, g, piece.end.clone()) {
            break;
        }
        blocks.push(block(&problem.decode, q, start, &piece, &reads, bound)?);
    }
    Ok(out)
}

fn emit(opts: &SmtOptions, tag: &str, round: usize, text: &str) -> Result<(), SmtError> {
    let Some(dir) = &opts.emit_dir else { return Ok(()) };
    let path = dir.join(format!("{tag}_{round:04}.smt2"));
    std::fs::create_dir_all(dir)
        .and_then(|_| std::fs::write(&path, text))
        .map_err(|e| SmtError::Emit { path, message: e.to_string() })
}

/// Reads the piece out of a model and checks it against the computation.
fn decode(
    c: &Computation,
    q: PieceQuery,
    start: &Context,
    map: &DecodeMap,
    model: &Model,
) -> Result<Piece, SmtError> {
    let bad = |m: String| SmtError::InvalidModel(m);
    let len = model.int("len")?;
    if len < 0 || len as usize > map.steps || (map.fixed_len && len as usize != map.steps) {
        return Err(bad(format!("length {len} out of range")));
    }
    let len = len as usize;
    let mut cut = start.consumed.clone();
    let mut last = start.last_time;
    let mut order = Vec::with_capacity(len);
    let mut times = Vec::with_capacity(len);
    let mut states = Vec::with_capacity(len);
    for i in 1..=len {
        let mut added: Vec<EventId> = Vec::new();
        for &e in &map.candidates {
            let now = model.bool(&encode::rho(i, e))?;
            let before = i > 1 && model.bool(&encode::rho(i - 1, e))?;
            if before && !now {
                return Err(bad(format!("event {e} leaves the cut at step {i}")));
            }
            if now && !before {
                added.push(e);
            }
        }
        let [e] = added[..] else {
            return Err(bad(format!("step {i} adds {} events", added.len())));
        };
        if !c.is_enabled(&cut, e) {
            return Err(bad(format!("event {e} added before its predecessors")));
        }
        if i == 1 && !q.may_open(c.event(e)) {
            return Err(bad(format!("event {e} cannot open segment {}", q.k)));
        }
        let t = model.int(&encode::tau(i))?;
        if t < 0 || model.int(&encode::delta(e))? != t {
            return Err(bad(format!("step {i} time {t} does not match its event")));
        }
        let t = t as Time;
        if !c.window(e).contains(&t) || last.is_some_and(|p| t < p) {
            return Err(bad(format!("time {t} of event {e} is not admissible")));
        }
        cut.insert(e);
        last = Some(t);
        order.push(e);
        times.push(t);
        states.push(c.frontier_state(&cut));
    }
    if !q.may_end(c, &cut, last) {
        return Err(bad("the rest of the computation cannot follow the piece".into()));
    }
    Ok(Piece {
        order,
        times: times.clone(),
        trace: TimedTrace::new(states, times).map_err(|e| bad(e.to_string()))?,
        end: Context { consumed: cut, last_time: last },
    })
}

fn check_atoms(map: &DecodeMap, piece: &Piece, model: &Model) -> Result<(), SmtError> {
    for (i, state) in piece.trace.states().iter().enumerate() {
        for (id, atom) in &map.atoms {
            let native = eval_atom(atom, state)?;
            if model.bool(&encode::verdict(*id, i + 1))? != native {
                return Err(SmtError::InvalidModel(format!("atom {atom:?} disagrees at step {}", i + 1)));
            }
        }
    }
    Ok(())
}

fn clamped(d: &str, gap: Time, bound: Time) -> Option<String> {
    if bound == 0 {
        None
    } else if gap < bound {
        Some(format!("(= {d} {gap})"))
    } else {
        Some(format!("(>= {d} {bound})"))
    }
}

fn interval_literal(d: &str, iv: &Interval, value: bool) -> Option<String> {
    let mut parts = Vec::new();
    if iv.is_empty() {
        return None;
    }
    if iv.start() > 0 {
        parts.push(format!("(>= {d} {})", iv.start()));
    }
    if let End::Finite(e) = iv.end() {
        parts.push(format!("(< {d} {e})"));
    }
    let expr = match parts.len() {
        0 => return None,
        1 => parts.pop().unwrap(),
        _ => format!("(and {})", parts.join(" ")),
    };
    Some(if value { expr } else { format!("(not {expr})") })
}

/// Excludes every model that leads to the same residual and end context as `piece`:
/// same length, same facts read by progression, same gap from the previous piece up
/// to the formula's largest constant, and outside the last segment the same end cut
/// and time.
fn block(
    map: &DecodeMap,
    q: PieceQuery,
    start: &Context,
    piece: &Piece,
    reads: &[Read],
    bound: Time,
) -> Result<String, SmtError> {
    let len = piece.order.len();
    let step = |p: usize| encode::tau(p + 1);
    let diff = |j: usize, i: usize| format!("(- {} {})", step(j), step(i));
    let mut parts = Vec::new();
    if !map.fixed_len {
        parts.push(format!("(= len {len})"));
    }
    for r in reads {
        match r {
            Read::Atom { atom, pos, value } => {
                let id = map
                    .atoms
                    .iter()
                    .find(|(_, a)| a == atom)
                    .map(|(id, _)| *id)
                    .ok_or_else(|| SmtError::InvalidModel(format!("atom {atom:?} is not encoded")))?;
                let v = encode::verdict(id, pos + 1);
                parts.push(if *value { v } else { format!("(not {v})") });
            }
            Read::Member { j, i, iv, value } => parts.extend(interval_literal(&diff(*j, *i), iv, *value)),
            Read::AtLeast { j, i, bound, value } => {
                if *bound > 0 {
                    let e = format!("(>= {} {bound})", diff(*j, *i));
                    parts.push(if *value { e } else { format!("(not {e})") });
                }
            }
            Read::Span { i, value, clamp } => {
                let d = diff(len - 1, *i);
                parts.extend(clamped(&d, *value, *clamp));
            }
        }
    }
    if len > 0 {
        if let Some(prev) = start.last_time {
            parts.extend(clamped(&format!("(- {} {})", encode::tau(1), encode::tau(0)), piece.times[0] - prev, bound));
        }
    }
    if !q.is_last() && map.steps > 0 {
        for &e in &map.candidates {
            let v = encode::rho(map.steps, e);
            parts.push(if piece.end.consumed.contains(e) { v } else { format!("(not {v})") });
        }
        if let Some(&t) = piece.times.last() {
            parts.push(format!("(= {} {t})", encode::tau(map.steps)));
        }
    }
    parts.sort();
    parts.dedup();
    Ok(if parts.is_empty() { "(assert false)".into() } else { format!("(assert (not (and {})))", parts.join(" ")) })
}

/// The verdict set a finished branch set stands for.
pub fn final_verdicts(formulas: &BTreeSet<Formula>) -> BTreeSet<crate::mtl::Verdict> {
    formulas.iter().map(finalize).collect()
}
