//! Per-chain log assembly shared by the protocol generators.

use std::collections::BTreeMap;

use crate::computation::Event;
use crate::mtl::{State, Time};

/// One contract call or contract-emitted event.
#[derive(Debug, Clone)]
pub(crate) struct Entry {
    pub chain: usize,
    pub time: Time,
    pub props: Vec<String>,
    /// Transfers: variable name to amount added.
    pub transfers: Vec<(String, i64)>,
}

/// Collects entries per chain and turns them into events. Chains are processes
/// `1..=chains`; each event carries the chain's running transfer totals.
#[derive(Debug, Default)]
pub(crate) struct LogBuilder {
    entries: Vec<Entry>,
    vars: Vec<String>,
}

impl LogBuilder {
    pub fn new(vars: &[&str]) -> Self {
        LogBuilder { entries: Vec::new(), vars: vars.iter().map(|v| v.to_string()).collect() }
    }

    pub fn push(&mut self, chain: usize, time: Time, props: &[&str], transfers: &[(&str, i64)]) {
        self.entries.push(Entry {
            chain,
            time,
            props: props.iter().map(|p| p.to_string()).collect(),
            transfers: transfers.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        });
    }

    /// Events in chain order. Two entries on one chain at the same time are pushed apart
    /// by one time unit, keeping insertion order.
    pub fn build(mut self) -> Vec<Event> {
        self.entries.sort_by_key(|e| (e.chain, e.time));
        let mut out = Vec::with_capacity(self.entries.len());
        let mut last: BTreeMap<usize, Time> = BTreeMap::new();
        let mut totals: BTreeMap<usize, BTreeMap<String, i64>> = BTreeMap::new();
        for e in self.entries {
            let time = match last.get(&e.chain) {
                Some(&t) if e.time <= t => t + 1,
                _ => e.time,
            };
            last.insert(e.chain, time);
            let vars = totals
                .entry(e.chain)
                .or_insert_with(|| self.vars.iter().map(|v| (v.clone(), 0)).collect());
            for (k, v) in &e.transfers {
                *vars.entry(k.clone()).or_insert(0) += v;
            }
            let payload = State { propositions: e.props.into_iter().collect(), variables: vars.clone() };
            out.push(Event::local(e.chain, time, payload));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VectorError {
    #[error("expected {expected} bits, found {found}")]
    Length { expected: usize, found: usize },
    #[error("bit {0} is neither 0 nor 1")]
    NotBinary(usize),
    #[error("step {step} is attempted after an earlier step on its chain was skipped")]
    Order { step: usize },
}

/// Parses a string of `0`/`1` characters; `_` and spaces are ignored.
pub(crate) fn parse_bits(s: &str, expected: usize) -> Result<Vec<bool>, VectorError> {
    let mut bits = Vec::new();
    for (i, c) in s.chars().filter(|c| *c != '_' && !c.is_whitespace()).enumerate() {
        match c {
            '0' => bits.push(false),
            '1' => bits.push(true),
            _ => return Err(VectorError::NotBinary(i)),
        }
    }
    if bits.len() != expected {
        return Err(VectorError::Length { expected, found: bits.len() });
    }
    Ok(bits)
}

/// Checks that steps on each chain are attempted as a prefix. `chains[c]` lists the
/// 1-based steps of chain `c` in protocol order.
pub(crate) fn check_prefixes(bits: &[bool], chains: &[&[usize]]) -> Result<(), VectorError> {
    for steps in chains {
        let mut skipped = false;
        for &k in *steps {
            let attempted = bits[2 * (k - 1)];
            if attempted && skipped {
                return Err(VectorError::Order { step: k });
            }
            skipped |= !attempted;
        }
    }
    Ok(())
}

/// Timestamp of step `k`: one unit before its deadline `kΔ` when timely, one after when
/// late.
pub(crate) fn step_time(k: usize, delta: Time, late: bool) -> Time {
    let deadline = k as Time * delta;
    if late {
        deadline + 1
    } else {
        deadline.saturating_sub(1)
    }
}

pub(crate) fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
}
