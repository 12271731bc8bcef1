//! Decomposition of linearizations into per-segment pieces.
//!
//! The piece of a linearization monitored in segment `k` is its maximal run of events,
//! following the pieces of segments `1..k`, whose local time is at most `k·l/g`. A piece
//! therefore ends either with the whole computation consumed or right before an event
//! beyond the segment's upper bound. Every piece lies inside `seg_k`.

use crate::computation::{Computation, Event, EventId, EventSet, SegmentPlan};
use crate::mtl::{shift_residual, EvalError, Formula, Time, TimedTrace};
use crate::progression::{progress_with_reads, Read};

/// What a branch has consumed so far.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Context {
    pub consumed: EventSet,
    /// Time of the last consumed step; `None` before the first event.
    pub last_time: Option<Time>,
}

impl Context {
    pub fn initial(c: &Computation) -> Self {
        Context { consumed: c.empty_set(), last_time: None }
    }
}

/// Segment `k` of a plan, seen from the pipeline.
#[derive(Debug, Clone, Copy)]
pub struct PieceQuery {
    pub plan: SegmentPlan,
    /// 1-based segment index.
    pub k: usize,
}

impl PieceQuery {
    pub fn is_last(&self) -> bool {
        self.k >= self.plan.segments
    }

    /// May appear in this piece at all.
    pub fn in_range(&self, e: &Event) -> bool {
        self.plan.at_or_before_end(e.local_time, self.k)
    }

    /// May be the first event of this piece: it lies beyond the previous segment's end.
    pub fn may_open(&self, e: &Event) -> bool {
        self.k == 1 || !self.plan.at_or_before_end(e.local_time, self.k - 1)
    }

    /// May be the first event after this piece.
    pub fn may_follow(&self, e: &Event) -> bool {
        !self.in_range(e)
    }

    /// The piece may stop with `consumed` and `last_time`.
    pub fn may_end(&self, c: &Computation, consumed: &EventSet, last_time: Option<Time>) -> bool {
        if consumed.count_ones(..) == c.len() {
            return true;
        }
        !self.is_last() && c.completion_feasible_with_first(consumed, last_time, |e| self.may_follow(e))
    }
}

/// One piece: the added events with their times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub order: Vec<EventId>,
    pub times: Vec<Time>,
    pub trace: TimedTrace,
    pub end: Context,
}

impl Piece {
    /// The formula after this piece, anchored at the piece's last time. `f` is
    /// anchored at `start.last_time`.
    pub fn advance(&self, start: &Context, f: &Formula) -> Result<Formula, EvalError> {
        self.advance_with_reads(start, f).map(|(g, _)| g)
    }

    /// As [`Self::advance`], with the facts about the piece that the result depends on
    /// besides the gap from `start.last_time`.
    pub fn advance_with_reads(&self, start: &Context, f: &Formula) -> Result<(Formula, Vec<Read>), EvalError> {
        let Some(first) = self.times.first() else {
            return Ok((f.clone(), Vec::new()));
        };
        let shifted = match start.last_time {
            Some(prev) => shift_residual(f, first - prev),
            None => f.clone(),
        };
        progress_with_reads(&self.trace, &shifted)
    }
}

/// Every piece of segment `q.k` from `start`, with every admissible time assignment.
pub fn for_each_piece(
    c: &Computation,
    q: PieceQuery,
    start: &Context,
    mut visit: impl FnMut(&Piece) -> Result<(), EvalError>,
) -> Result<(), EvalError> {
    if !c.completion_feasible(&start.consumed, start.last_time) {
        return Ok(());
    }
    let frontier = c.frontier(&start.consumed);
    let mut dfs = PieceDfs {
        c,
        q,
        cut: start.consumed.clone(),
        last: start.last_time,
        order: Vec::new(),
        times: Vec::new(),
        states: Vec::new(),
        frontier: {
            let mut v = vec![None; c.processes().iter().max().map_or(0, |p| p + 1)];
            for (p, e) in frontier {
                v[p] = Some(e);
            }
            v
        },
    };
    dfs.run(&mut visit)
}

struct PieceDfs<'a> {
    c: &'a Computation,
    q: PieceQuery,
    cut: EventSet,
    last: Option<Time>,
    order: Vec<EventId>,
    times: Vec<Time>,
    states: Vec<crate::mtl::State>,
    frontier: Vec<Option<EventId>>,
}

impl PieceDfs<'_> {
    fn run(&mut self, visit: &mut impl FnMut(&Piece) -> Result<(), EvalError>) -> Result<(), EvalError> {
        if self.q.may_end(self.c, &self.cut, self.last) {
            let piece = Piece {
                order: self.order.clone(),
                times: self.times.clone(),
                trace: TimedTrace::new(self.states.clone(), self.times.clone()).expect("monotone times"),
                end: Context { consumed: self.cut.clone(), last_time: self.last },
            };
            visit(&piece)?;
        }
        let floor = self.last.unwrap_or(0);
        for e in 0..self.c.len() {
            let ev = self.c.event(e);
            if !self.c.is_enabled(&self.cut, e) || !self.q.in_range(ev) {
                continue;
            }
            if self.order.is_empty() && !self.q.may_open(ev) {
                continue;
            }
            let w = self.c.window(e);
            let lo = floor.max(*w.start());
            let p = ev.process;
            let saved = self.frontier[p].replace(e);
            self.cut.insert(e);
            self.order.push(e);
            self.states.push(self.state());
            let saved_last = self.last;
            for t in lo..=*w.end() {
                // Later times only shrink the feasible completions.
                if !self.c.completion_feasible(&self.cut, Some(t)) {
                    break;
                }
                self.last = Some(t);
                self.times.push(t);
                let r = self.run(visit);
                self.times.pop();
                r?;
            }
            self.last = saved_last;
            self.states.pop();
            self.order.pop();
            self.cut.set(e, false);
            self.frontier[p] = saved;
        }
        Ok(())
    }

    fn state(&self) -> crate::mtl::State {
        let mut s = crate::mtl::State::new();
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
