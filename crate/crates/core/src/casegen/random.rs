//! Seeded random formulas, traces and computations.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::computation::{build_computation, Computation, ComputationError, Event, EventKind};
use crate::mtl::{End, Formula, Interval, State, Time, TimedTrace};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of random formulas.
#[derive(Debug, Clone)]
pub struct FormulaParams {
    pub depth: usize,
    pub atoms: Vec<String>,
    /// Largest finite interval bound.
    pub max_const: Time,
}

impl Default for FormulaParams {
    fn default() -> Self {
        FormulaParams { depth: 3, atoms: vec!["a".into(), "b".into(), "c".into()], max_const: 8 }
    }
}

pub fn random_interval(rng: &mut impl Rng, max_const: Time) -> Interval {
    let start = rng.gen_range(0..=max_const);
    match rng.gen_range(0..6) {
        0 => Interval::new(start, End::Infinite),
        1 => Interval::bounded(start, start + 1),
        _ => Interval::bounded(start, rng.gen_range(start + 1..=max_const + 1)),
    }
}

/// A formula of depth at most `p.depth`.
pub fn random_formula(rng: &mut impl Rng, p: &FormulaParams) -> Formula {
    random_formula_at(rng, p, p.depth)
}

fn random_formula_at(rng: &mut impl Rng, p: &FormulaParams, depth: usize) -> Formula {
    let leaf = |rng: &mut dyn rand::RngCore| -> Formula {
        match rng.gen_range(0..12) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::prop(p.atoms.choose(rng).expect("non-empty alphabet").clone()),
        }
    };
    if depth == 0 || rng.gen_range(0..5) == 0 {
        return leaf(rng);
    }
    let d = depth - 1;
    match rng.gen_range(0..8) {
        0 => Formula::not_(random_formula_at(rng, p, d)),
        1 => Formula::or_(random_formula_at(rng, p, d), random_formula_at(rng, p, d)),
        2 => Formula::and_(random_formula_at(rng, p, d), random_formula_at(rng, p, d)),
        3 => Formula::implies_(random_formula_at(rng, p, d), random_formula_at(rng, p, d)),
        4 | 5 => {
            let iv = random_interval(rng, p.max_const);
            Formula::until_(random_formula_at(rng, p, d), iv, random_formula_at(rng, p, d))
        }
        6 => Formula::eventually_(random_interval(rng, p.max_const), random_formula_at(rng, p, d)),
        _ => Formula::globally_(random_interval(rng, p.max_const), random_formula_at(rng, p, d)),
    }
}

fn random_props(rng: &mut impl Rng, atoms: &[String]) -> State {
    State::with_props(atoms.iter().filter(|_| rng.gen_bool(0.4)).cloned())
}

/// A trace of `len` states with gaps in `0..=max_gap`.
pub fn random_trace(rng: &mut impl Rng, len: usize, atoms: &[String], max_gap: Time) -> TimedTrace {
    let mut t = rng.gen_range(0..=max_gap);
    let mut pairs = Vec::with_capacity(len);
    for _ in 0..len {
        pairs.push((random_props(rng, atoms), t));
        t += rng.gen_range(0..=max_gap);
    }
    TimedTrace::from_pairs(pairs).expect("monotone by construction")
}

/// Shape of random computations.
#[derive(Debug, Clone)]
pub struct ComputationParams {
    pub processes: usize,
    pub min_events: usize,
    pub max_events: usize,
    pub epsilon: Time,
    pub atoms: Vec<String>,
    /// Largest gap between consecutive events of one process.
    pub max_gap: Time,
    pub message_prob: f64,
}

impl Default for ComputationParams {
    fn default() -> Self {
        ComputationParams {
            processes: 3,
            min_events: 1,
            max_events: 8,
            epsilon: 2,
            atoms: vec!["a".into(), "b".into(), "c".into()],
            max_gap: 4,
            message_prob: 0.25,
        }
    }
}

/// Events of a random computation. Receives are always later in local time than their
/// sends, so happened-before stays acyclic.
pub fn random_events(seed: u64, p: &ComputationParams) -> Vec<Event> {
    let mut rng = rng(seed);
    let n = rng.gen_range(p.min_events.max(1)..=p.max_events.max(p.min_events.max(1)));
    let procs = p.processes.max(1);
    let mut next_time = vec![0; procs + 1];
    for t in next_time.iter_mut().skip(1) {
        *t = rng.gen_range(0..=p.max_gap);
    }
    let mut events = Vec::with_capacity(n);
    for _ in 0..n {
        let proc = rng.gen_range(1..=procs);
        let sigma = next_time[proc];
        next_time[proc] = sigma + rng.gen_range(1..=p.max_gap.max(1));
        events.push(Event::local(proc, sigma, random_props(&mut rng, &p.atoms)));
    }
    events.sort_by_key(|e| (e.local_time, e.process));

    let mut msg = 0;
    for s in 0..events.len() {
        if events[s].kind != EventKind::Local || !rng.gen_bool(p.message_prob) {
            continue;
        }
        let targets: Vec<usize> = (0..events.len())
            .filter(|&r| {
                events[r].kind == EventKind::Local
                    && events[r].process != events[s].process
                    && events[r].local_time > events[s].local_time
            })
            .collect();
        if let Some(&r) = targets.choose(&mut rng) {
            msg += 1;
            let id = format!("m{msg}");
            events[s].kind = EventKind::Send(id.clone());
            events[r].kind = EventKind::Recv(id);
        }
    }
    events
}

pub fn gen_random_computation(seed: u64, p: &ComputationParams) -> Result<Computation, ComputationError> {
    build_computation(random_events(seed, p), p.epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let p = ComputationParams::default();
        assert_eq!(random_events(7, &p), random_events(7, &p));
        let f = FormulaParams::default();
        assert_eq!(random_formula(&mut rng(3), &f), random_formula(&mut rng(3), &f));
    }

    #[test]
    fn single_event() {
        let p = ComputationParams { min_events: 1, max_events: 1, ..Default::default() };
        assert_eq!(gen_random_computation(1, &p).unwrap().len(), 1);
    }

    #[test]
    fn seed_sweep_builds() {
        for eps in 1..=3 {
            let p = ComputationParams { processes: 4, max_events: 12, epsilon: eps, ..Default::default() };
            for seed in 0..200 {
                gen_random_computation(seed, &p).unwrap();
            }
        }
    }

    #[test]
    fn formula_depth_is_bounded() {
        let p = FormulaParams::default();
        let mut r = rng(11);
        for _ in 0..500 {
            assert!(random_formula(&mut r, &p).depth() <= 3);
        }
    }
}
