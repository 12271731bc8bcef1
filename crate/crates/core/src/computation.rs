//! Distributed computations under bounded clock skew.

use std::collections::{BTreeMap, HashMap};
use std::ops::RangeInclusive;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::mtl::{State, Time};

pub type ProcessId = usize;
pub type EventId = usize;

/// Set of event indices.
pub type EventSet = FixedBitSet;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "msg", rename_all = "lowercase")]
pub enum EventKind {
    Local,
    Send(String),
    Recv(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub process: ProcessId,
    pub local_time: Time,
    pub kind: EventKind,
    pub payload: State,
    /// Assigned by [`build_computation`].
    #[serde(default)]
    pub index: EventId,
}

impl Event {
    pub fn local(process: ProcessId, local_time: Time, payload: State) -> Self {
        Event { process, local_time, kind: EventKind::Local, payload, index: 0 }
    }

    pub fn send(process: ProcessId, local_time: Time, msg: impl Into<String>, payload: State) -> Self {
        Event { process, local_time, kind: EventKind::Send(msg.into()), payload, index: 0 }
    }

    pub fn recv(process: ProcessId, local_time: Time, msg: impl Into<String>, payload: State) -> Self {
        Event { process, local_time, kind: EventKind::Recv(msg.into()), payload, index: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ComputationError {
    #[error("epsilon must be positive")]
    ZeroEpsilon,
    #[error("process {process} has two events at local time {local_time}")]
    DuplicateTimestamp { process: ProcessId, local_time: Time },
    #[error("message `{0}` does not pair exactly one send with one receive on distinct processes")]
    DanglingMessage(String),
    #[error("happened-before has a cycle through event {0}")]
    Cycle(EventId),
    #[error("unknown event {0}")]
    UnknownEvent(EventId),
    #[error("invalid segmentation: {0}")]
    Segmentation(String),
}

/// Events plus the closed happened-before relation.
#[derive(Debug, Clone)]
pub struct Computation {
    events: Vec<Event>,
    epsilon: Time,
    /// `succ[a]` holds every `b` with `a ⇝ b`.
    succ: Vec<EventSet>,
    /// `pred[b]` holds every `a` with `a ⇝ b`.
    pred: Vec<EventSet>,
    /// Next event on the same process.
    next_local: Vec<Option<EventId>>,
    processes: Vec<ProcessId>,
    topo: Vec<EventId>,
}

pub fn build_computation(mut events: Vec<Event>, epsilon: Time) -> Result<Computation, ComputationError> {
    if epsilon == 0 {
        return Err(ComputationError::ZeroEpsilon);
    }
    events.sort_by_key(|e| (e.local_time, e.process));
    for (i, e) in events.iter_mut().enumerate() {
        e.index = i;
    }
    let n = events.len();

    let mut by_process: BTreeMap<ProcessId, Vec<EventId>> = BTreeMap::new();
    for e in &events {
        by_process.entry(e.process).or_default().push(e.index);
    }
    let mut next_local = vec![None; n];
    for ids in by_process.values() {
        for w in ids.windows(2) {
            if events[w[0]].local_time == events[w[1]].local_time {
                return Err(ComputationError::DuplicateTimestamp {
                    process: events[w[0]].process,
                    local_time: events[w[0]].local_time,
                });
            }
            next_local[w[0]] = Some(w[1]);
        }
    }

    let mut succ = vec![FixedBitSet::with_capacity(n); n];
    for (a, next) in next_local.iter().enumerate() {
        if let Some(b) = next {
            succ[a].insert(*b);
        }
    }

    let mut sends: HashMap<&str, Vec<EventId>> = HashMap::new();
    let mut recvs: HashMap<&str, Vec<EventId>> = HashMap::new();
    for e in &events {
        match &e.kind {
            EventKind::Local => {}
            EventKind::Send(m) => sends.entry(m).or_default().push(e.index),
            EventKind::Recv(m) => recvs.entry(m).or_default().push(e.index),
        }
    }
    let mut msgs: Vec<&str> = sends.keys().chain(recvs.keys()).copied().collect();
    msgs.sort_unstable();
    msgs.dedup();
    for m in msgs {
        match (sends.get(m).map(Vec::as_slice), recvs.get(m).map(Vec::as_slice)) {
            (Some(&[s]), Some(&[r])) if events[s].process != events[r].process => {
                succ[s].insert(r);
            }
            _ => return Err(ComputationError::DanglingMessage(m.to_string())),
        }
    }

    for a in 0..n {
        for b in 0..n {
            let (ea, eb) = (&events[a], &events[b]);
            if ea.process != eb.process && eb.local_time >= ea.local_time + epsilon {
                succ[a].insert(b);
            }
        }
    }

    // Transitive closure.
    for k in 0..n {
        let through_k = succ[k].clone();
        for row in succ.iter_mut() {
            if row.contains(k) {
                row.union_with(&through_k);
            }
        }
    }
    if let Some(a) = (0..n).find(|&a| succ[a].contains(a)) {
        return Err(ComputationError::Cycle(a));
    }

    let mut pred = vec![FixedBitSet::with_capacity(n); n];
    for (a, s) in succ.iter().enumerate() {
        for b in s.ones() {
            pred[b].insert(a);
        }
    }

    // Kahn's algorithm, smallest index first.
    let mut indegree: Vec<usize> = pred.iter().map(|p| p.count_ones(..)).collect();
    let mut topo = Vec::with_capacity(n);
    let mut ready: std::collections::BTreeSet<EventId> = (0..n).filter(|&e| indegree[e] == 0).collect();
    while let Some(a) = ready.pop_first() {
        topo.push(a);
        for b in succ[a].ones() {
            indegree[b] -= 1;
            if indegree[b] == 0 {
                ready.insert(b);
            }
        }
    }

    Ok(Computation {
        events,
        epsilon,
        succ,
        pred,
        next_local,
        processes: by_process.keys().copied().collect(),
        topo,
    })
}

/// Closed range of admissible true times for an event at `local_time`.
pub fn time_window(local_time: Time, epsilon: Time) -> RangeInclusive<Time> {
    let radius = epsilon.saturating_sub(1);
    local_time.saturating_sub(radius)..=local_time + radius
}

impl Computation {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn event(&self, e: EventId) -> &Event {
        &self.events[e]
    }

    pub fn epsilon(&self) -> Time {
        self.epsilon
    }

    pub fn processes(&self) -> &[ProcessId] {
        &self.processes
    }

    /// Events in a topological order of happened-before.
    pub fn topological_order(&self) -> &[EventId] {
        &self.topo
    }

    pub fn empty_set(&self) -> EventSet {
        FixedBitSet::with_capacity(self.len())
    }

    pub fn full_set(&self) -> EventSet {
        let mut s = self.empty_set();
        s.insert_range(..);
        s
    }

    pub fn set_of(&self, ids: impl IntoIterator<Item = EventId>) -> EventSet {
        let mut s = self.empty_set();
        s.extend(ids);
        s
    }

    /// `a ⇝ b`, without bounds checks.
    pub fn hb(&self, a: EventId, b: EventId) -> bool {
        self.succ[a].contains(b)
    }

    pub fn happened_before(&self, a: EventId, b: EventId) -> Result<bool, ComputationError> {
        for e in [a, b] {
            if e >= self.len() {
                return Err(ComputationError::UnknownEvent(e));
            }
        }
        Ok(self.hb(a, b))
    }

    pub fn predecessors(&self, e: EventId) -> &EventSet {
        &self.pred[e]
    }

    pub fn successors(&self, e: EventId) -> &EventSet {
        &self.succ[e]
    }

    pub fn next_on_process(&self, e: EventId) -> Option<EventId> {
        self.next_local[e]
    }

    pub fn window(&self, e: EventId) -> RangeInclusive<Time> {
        time_window(self.events[e].local_time, self.epsilon)
    }

    pub fn max_local_time(&self) -> Time {
        self.events.iter().map(|e| e.local_time).max().unwrap_or(0)
    }

    /// Downward closure check.
    pub fn is_consistent_cut(&self, cut: &EventSet) -> bool {
        cut.ones().all(|e| self.pred[e].is_subset(cut))
    }

    /// `e` may be added to `cut` keeping it consistent.
    pub fn is_enabled(&self, cut: &EventSet, e: EventId) -> bool {
        !cut.contains(e) && self.pred[e].is_subset(cut)
    }

    /// Latest event of each process present in the cut.
    pub fn frontier(&self, cut: &EventSet) -> BTreeMap<ProcessId, EventId> {
        let mut out = BTreeMap::new();
        for e in cut.ones() {
            let p = self.events[e].process;
            let slot = out.entry(p).or_insert(e);
            if self.events[e].local_time > self.events[*slot].local_time {
                *slot = e;
            }
        }
        out
    }

    /// Global state at a cut: propositions of all frontier events, and each variable
    /// summed over the frontier events that define it.
    pub fn frontier_state(&self, cut: &EventSet) -> State {
        let mut s = State::new();
        for e in self.frontier(cut).into_values() {
            let payload = &self.events[e].payload;
            s.propositions.extend(payload.propositions.iter().cloned());
            for (k, v) in &payload.variables {
                *s.variables.entry(k.clone()).or_insert(0) += v;
            }
        }
        s
    }

    /// Restriction to a subset of events, keeping the closed relation and epsilon.
    pub fn restrict(&self, keep: &EventSet) -> Computation {
        let ids: Vec<EventId> = keep.ones().collect();
        let n = ids.len();
        let mut remap = vec![usize::MAX; self.len()];
        for (new, &old) in ids.iter().enumerate() {
            remap[old] = new;
        }
        let mut events = Vec::with_capacity(n);
        for (new, &old) in ids.iter().enumerate() {
            let mut e = self.events[old].clone();
            e.index = new;
            events.push(e);
        }
        let project = |set: &EventSet| -> EventSet {
            let mut out = FixedBitSet::with_capacity(n);
            out.extend(set.ones().filter(|&x| keep.contains(x)).map(|x| remap[x]));
            out
        };
        let succ: Vec<EventSet> = ids.iter().map(|&o| project(&self.succ[o])).collect();
        let pred: Vec<EventSet> = ids.iter().map(|&o| project(&self.pred[o])).collect();
        let next_local = ids
            .iter()
            .map(|&o| {
                let mut cur = self.next_local[o];
                while let Some(c) = cur {
                    if keep.contains(c) {
                        return Some(remap[c]);
                    }
                    cur = self.next_local[c];
                }
                None
            })
            .collect();
        let mut processes: Vec<ProcessId> = events.iter().map(|e: &Event| e.process).collect();
        processes.sort_unstable();
        processes.dedup();
        let topo = self.topo.iter().filter(|&&o| keep.contains(o)).map(|&o| remap[o]).collect();
        Computation { events, epsilon: self.epsilon, succ, pred, next_local, processes, topo }
    }

    /// Can the events outside `consumed` be scheduled after time `after`, respecting
    /// happened-before, windows and monotone time?
    pub fn completion_feasible(&self, consumed: &EventSet, after: Option<Time>) -> bool {
        self.earliest_schedule(consumed, after.unwrap_or(0)).is_some()
    }

    /// As [`Self::completion_feasible`], with the extra requirement that the first
    /// remaining event has local time satisfying `first_ok`. Trivially true when
    /// nothing remains.
    pub fn completion_feasible_with_first(
        &self,
        consumed: &EventSet,
        after: Option<Time>,
        first_ok: impl Fn(&Event) -> bool,
    ) -> bool {
        if consumed.count_ones(..) == self.len() {
            return true;
        }
        let floor = after.unwrap_or(0);
        (0..self.len()).any(|x| {
            self.is_enabled(consumed, x) && first_ok(&self.events[x]) && {
                let lower = floor.max(*self.window(x).start());
                lower <= *self.window(x).end() && self.earliest_schedule(consumed, lower).is_some()
            }
        })
    }

    /// Earliest time for each remaining event when every time is at least `floor`.
    fn earliest_schedule(&self, consumed: &EventSet, floor: Time) -> Option<Vec<Time>> {
        let mut earliest = vec![0; self.len()];
        for &e in &self.topo {
            if consumed.contains(e) {
                continue;
            }
            let w = self.window(e);
            let mut t = floor.max(*w.start());
            for p in self.pred[e].ones() {
                if !consumed.contains(p) {
                    t = t.max(earliest[p]);
                }
            }
            if t > *w.end() {
                return None;
            }
            earliest[e] = t;
        }
        Some(earliest)
    }
}

/// One window of a segmented computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    /// 1-based.
    pub index: usize,
    pub events: Vec<EventId>,
    /// Covered local times, inclusive.
    pub lo: Time,
    pub hi: Time,
}

/// Segmentation parameters: `g` segments over a computation of length `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentPlan {
    pub segments: usize,
    pub length: Time,
    pub epsilon: Time,
}

impl SegmentPlan {
    pub fn new(segments: usize, length: Time, epsilon: Time) -> Result<Self, ComputationError> {
        if segments == 0 {
            return Err(ComputationError::Segmentation("at least one segment is required".into()));
        }
        if segments as u128 > length.max(1) as u128 {
            return Err(ComputationError::Segmentation(format!(
                "{segments} segments over length {length} leaves segments of zero width"
            )));
        }
        Ok(SegmentPlan { segments, length, epsilon })
    }

    /// `σ ≤ j·l/g`.
    pub fn at_or_before_end(&self, local_time: Time, j: usize) -> bool {
        j >= self.segments || local_time as u128 * self.segments as u128 <= j as u128 * self.length as u128
    }

    /// `σ ≥ (j−1)·l/g − ε`.
    pub fn at_or_after_start(&self, local_time: Time, j: usize) -> bool {
        let g = self.segments as u128;
        local_time as u128 * g + self.epsilon as u128 * g >= (j as u128 - 1) * self.length as u128
    }

    pub fn contains(&self, local_time: Time, j: usize) -> bool {
        self.at_or_after_start(local_time, j) && self.at_or_before_end(local_time, j)
    }

    /// Integer bounds of the `j`-th local-time range.
    pub fn range(&self, j: usize) -> (Time, Time) {
        let g = self.segments as u128;
        let l = self.length as u128;
        let eg = self.epsilon as u128 * g;
        let low_num = ((j as u128 - 1) * l).saturating_sub(eg);
        let lo = low_num.div_ceil(g) as Time;
        let hi = if j >= self.segments { Time::MAX } else { (j as u128 * l / g) as Time };
        (lo, hi)
    }
}

/// Splits the computation into `g` overlapping windows of local time. The last
/// segment also takes any event beyond `l`.
pub fn segment(c: &Computation, g: usize, l: Time) -> Result<Vec<Segment>, ComputationError> {
    let plan = SegmentPlan::new(g, l, c.epsilon())?;
    Ok((1..=g)
        .map(|j| {
            let (lo, hi) = plan.range(j);
            let events = c.events().iter().filter(|e| plan.contains(e.local_time, j)).map(|e| e.index).collect();
            Segment { index: j, events, lo, hi: if j == g { hi.min(l.max(c.max_local_time())) } else { hi } }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn skewed_until() -> Computation {
        build_computation(
            vec![
                Event::local(1, 1, State::with_props(["a"])),
                Event::local(1, 4, State::new()),
                Event::local(2, 2, State::with_props(["a"])),
                Event::local(2, 5, State::with_props(["b"])),
            ],
            2,
        )
        .unwrap()
    }

    #[test]
    fn skewed_until_relation() {
        let c = skewed_until();
        // index order: a@P1:1, a@P2:2, ¬a@P1:4, b@P2:5
        assert!(c.hb(0, 2));
        assert!(c.hb(0, 3));
        assert!(!c.hb(2, 3));
        assert!(c.hb(1, 2));
        assert!(!c.hb(0, 0));
        assert!(!c.is_consistent_cut(&c.set_of([3])));
        assert!(c.is_consistent_cut(&c.empty_set()));
        assert!(c.is_consistent_cut(&c.full_set()));
    }

    #[test]
    fn program_order_only() {
        let c = build_computation((1..=3).map(|t| Event::local(1, t, State::new())).collect(), 5).unwrap();
        assert!(c.hb(0, 1) && c.hb(1, 2) && c.hb(0, 2));
        let d = build_computation(vec![Event::local(1, 0, State::new()), Event::local(2, 0, State::new())], 1)
            .unwrap();
        assert!(!d.hb(0, 1) && !d.hb(1, 0));
    }

    #[test]
    fn build_errors() {
        let dup = vec![Event::local(1, 3, State::new()), Event::local(1, 3, State::new())];
        assert!(matches!(build_computation(dup, 1), Err(ComputationError::DuplicateTimestamp { .. })));
        let dangling = vec![Event::send(1, 3, "m", State::new())];
        assert!(matches!(build_computation(dangling, 1), Err(ComputationError::DanglingMessage(_))));
        let backwards = vec![Event::send(1, 5, "m", State::new()), Event::recv(2, 2, "m", State::new())];
        assert!(matches!(build_computation(backwards, 2), Err(ComputationError::Cycle(_))));
    }

    #[test]
    fn frontier_examples() {
        let c = skewed_until();
        assert_eq!(c.frontier(&c.set_of([0, 1])), BTreeMap::from([(1, 0), (2, 1)]));
        assert!(c.frontier(&c.empty_set()).is_empty());
        assert_eq!(c.frontier(&c.set_of([0, 2])), BTreeMap::from([(1, 2)]));
    }

    #[test]
    fn windows() {
        assert_eq!(time_window(3, 2), 2..=4);
        assert_eq!(time_window(4, 2), 3..=5);
        assert_eq!(time_window(0, 3), 0..=2);
        assert_eq!(time_window(7, 1), 7..=7);
    }

    #[test]
    fn segment_ranges() {
        let p = SegmentPlan::new(4, 20, 2).unwrap();
        assert_eq!(p.range(2), (3, 10));
        let p = SegmentPlan::new(3, 9, 5).unwrap();
        assert_eq!(p.range(2).0, 0);
        assert_eq!(p.range(2).1, 6);
        assert!(SegmentPlan::new(5, 4, 1).is_err());
        let c = skewed_until();
        let segs = segment(&c, 1, 5).unwrap();
        assert_eq!(segs[0].events, vec![0, 1, 2, 3]);
    }

    #[test]
    fn feasibility() {
        let c = skewed_until();
        assert!(c.completion_feasible(&c.empty_set(), None));
        // b@P2:5 has window [4,6]; nothing can run after time 6.
        assert!(!c.completion_feasible(&c.set_of([0, 1, 2]), Some(7)));
        assert!(c.completion_feasible_with_first(&c.set_of([0, 1]), Some(2), |e| e.local_time > 4));
        assert!(!c.completion_feasible_with_first(&c.set_of([0, 1]), Some(6), |e| e.local_time < 5));
    }
}
