//! Hedged two-party swap between Alice (apricot tokens) and Bob (banana tokens).
//!
//! | step | chain | call                            |
//! |------|-------|---------------------------------|
//! | 1    | ban   | Alice deposits premium `p_a + p_b` |
//! | 2    | apr   | Bob deposits premium `p_b`      |
//! | 3    | apr   | Alice escrows her asset         |
//! | 4    | ban   | Bob escrows his asset           |
//! | 5    | ban   | Alice redeems, premium refunded |
//! | 6    | apr   | Bob redeems, premium refunded   |
//!
//! Step `k` is due before `kΔ`. After the last deadline of its chain, each chain that saw
//! any call settles: unredeemed assets go back to their owner and premiums move as the
//! hedging rules say. Processes are `apr` = 1 and `ban` = 2.

use std::fmt;
use std::str::FromStr;

use super::chain::{bits_to_string, check_prefixes, parse_bits, step_time, LogBuilder, VectorError};
use crate::computation::Event;
use crate::mtl::Time;

pub const PROCESSES: [&str; 2] = ["apr", "ban"];
const APR: usize = 1;
const BAN: usize = 2;
const CHAINS: [&[usize]; 2] = [&[2, 3, 6], &[1, 4, 5]];
pub const VARS: [&str; 4] = ["to_alice", "from_alice", "to_bob", "from_bob"];

/// Twelve bits, two per step: attempted, then late.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExecutionVector {
    bits: [bool; 12],
}

impl ExecutionVector {
    pub fn new(bits: [bool; 12]) -> Result<Self, VectorError> {
        check_prefixes(&bits, &CHAINS)?;
        Ok(ExecutionVector { bits })
    }

    /// Every step attempted on time.
    pub fn conforming() -> Self {
        let mut bits = [false; 12];
        for k in 0..6 {
            bits[2 * k] = true;
        }
        ExecutionVector { bits }
    }

    pub fn bits(&self) -> [bool; 12] {
        self.bits
    }

    /// Step `k` in `1..=6`.
    pub fn attempted(&self, k: usize) -> bool {
        self.bits[2 * (k - 1)]
    }

    pub fn late(&self, k: usize) -> bool {
        self.bits[2 * (k - 1) + 1]
    }
}

impl FromStr for ExecutionVector {
    type Err = VectorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = parse_bits(s, 12)?;
        let mut bits = [false; 12];
        bits.copy_from_slice(&v);
        ExecutionVector::new(bits)
    }
}

impl fmt::Display for ExecutionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&bits_to_string(&self.bits))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolParams {
    pub delta: Time,
    pub asset: i64,
    /// Alice's premium `p_a + p_b`.
    pub premium_alice: i64,
    /// Bob's premium `p_b`.
    pub premium_bob: i64,
}

impl ProtocolParams {
    pub fn new(delta: Time) -> Self {
        ProtocolParams { delta, asset: 100, premium_alice: 2, premium_bob: 1 }
    }
}

impl Default for ProtocolParams {
    fn default() -> Self {
        ProtocolParams::new(10)
    }
}

/// All `4 · 4 · 2^6` executions: four attempt patterns per chain and every choice of
/// the six lateness bits.
pub fn enumerate_two_party_executions() -> Vec<ExecutionVector> {
    let patterns = [[true, true, true], [true, true, false], [true, false, false], [false, false, false]];
    let mut out = Vec::with_capacity(1024);
    for apr in &patterns {
        for ban in &patterns {
            for late in 0u32..64 {
                let mut bits = [false; 12];
                for (i, &k) in CHAINS[0].iter().enumerate() {
                    bits[2 * (k - 1)] = apr[i];
                }
                for (i, &k) in CHAINS[1].iter().enumerate() {
                    bits[2 * (k - 1)] = ban[i];
                }
                for k in 0..6 {
                    bits[2 * k + 1] = late & (1 << k) != 0;
                }
                out.push(ExecutionVector { bits });
            }
        }
    }
    out
}

pub fn gen_two_party_log(v: &ExecutionVector, p: &ProtocolParams) -> Vec<Event> {
    let d = p.delta;
    let mut log = LogBuilder::new(&VARS);
    let t = |k: usize| step_time(k, d, v.late(k));
    log.push(APR, 0, &["apr.setup"], &[]);
    log.push(BAN, 0, &["ban.setup"], &[]);
    if v.attempted(1) {
        log.push(BAN, t(1), &["ban.premium_deposited_alice"], &[("from_alice", p.premium_alice)]);
    }
    if v.attempted(2) {
        log.push(APR, t(2), &["apr.premium_deposited_bob"], &[("from_bob", p.premium_bob)]);
    }
    if v.attempted(3) {
        log.push(APR, t(3), &["apr.asset_escrowed_alice"], &[("from_alice", p.asset)]);
    }
    if v.attempted(4) {
        log.push(BAN, t(4), &["ban.asset_escrowed_bob"], &[("from_bob", p.asset)]);
    }
    if v.attempted(5) {
        log.push(
            BAN,
            t(5),
            &["ban.asset_redeemed_alice", "ban.premium_refunded_alice"],
            &[("to_alice", p.asset + p.premium_alice)],
        );
    }
    if v.attempted(6) {
        log.push(
            APR,
            t(6),
            &["apr.asset_redeemed_bob", "apr.premium_refunded_bob"],
            &[("to_bob", p.asset + p.premium_bob)],
        );
    }

    // ban: Alice's premium, Bob's asset.
    if v.attempted(1) {
        let settle = 6 * d;
        if !v.attempted(4) {
            log.push(
                BAN,
                settle,
                &["ban.premium_refunded_alice", "ban.all_asset_settled_any"],
                &[("to_alice", p.premium_alice)],
            );
        } else if !v.attempted(5) {
            log.push(
                BAN,
                settle,
                &["ban.asset_refunded_bob", "ban.asset_refunded_any", "ban.premium_redeemed_bob", "ban.all_asset_settled_any"],
                &[("to_bob", p.asset + p.premium_alice)],
            );
        } else {
            log.push(BAN, settle, &["ban.all_asset_settled_any"], &[]);
        }
    }
    // apr: Bob's premium, Alice's asset.
    if v.attempted(2) {
        let settle = 7 * d;
        if !v.attempted(3) {
            log.push(
                APR,
                settle,
                &["apr.premium_refunded_bob", "apr.all_asset_settled_any"],
                &[("to_bob", p.premium_bob)],
            );
        } else if !v.attempted(6) {
            log.push(
                APR,
                settle,
                &["apr.asset_refunded_alice", "apr.asset_refunded_any", "apr.premium_redeemed_alice", "apr.all_asset_settled_any"],
                &[("to_alice", p.asset + p.premium_bob)],
            );
        } else {
            log.push(APR, settle, &["apr.all_asset_settled_any"], &[]);
        }
    }
    log.build()
}
