//! Hedged three-party swap: Alice → Bob on `apr`, Bob → Carol on `ban`, Carol → Alice
//! on `che`. Twelve steps; step `k` is due before `kΔ`.
//!
//! Processes are `apr` = 1, `ban` = 2, `che` = 3. Each chain settles at `13Δ`.

use super::chain::{check_prefixes, parse_bits, step_time, LogBuilder, VectorError};
use crate::computation::Event;
use crate::mtl::Time;

pub const PROCESSES: [&str; 3] = ["apr", "ban", "che"];
pub const STEPS: usize = 12;
pub const VARS: [&str; 6] = ["to_alice", "from_alice", "to_bob", "from_bob", "to_carol", "from_carol"];

/// A swap leg: `sender` escrows to `receiver` on `chain`.
struct Leg {
    chain: usize,
    name: &'static str,
    sender: &'static str,
    receiver: &'static str,
    escrow_premium: i64,
    redemption_premium: i64,
    /// Steps: escrow premium, redemption premium, escrow asset, unlock.
    steps: [usize; 4],
}

const LEGS: [Leg; 3] = [
    Leg { chain: 1, name: "apr", sender: "alice", receiver: "bob", escrow_premium: 3, redemption_premium: 1, steps: [1, 6, 7, 12] },
    Leg { chain: 2, name: "ban", sender: "bob", receiver: "carol", escrow_premium: 3, redemption_premium: 2, steps: [2, 5, 8, 11] },
    Leg { chain: 3, name: "che", sender: "carol", receiver: "alice", escrow_premium: 3, redemption_premium: 3, steps: [3, 4, 9, 10] },
];

/// Twenty-four bits, two per step: attempted, then late.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreePartyVector {
    bits: Vec<bool>,
}

impl ThreePartyVector {
    pub fn parse(s: &str) -> Result<Self, VectorError> {
        let bits = parse_bits(s, 2 * STEPS)?;
        let chains: Vec<&[usize]> = LEGS.iter().map(|l| &l.steps[..]).collect();
        check_prefixes(&bits, &chains)?;
        Ok(ThreePartyVector { bits })
    }

    pub fn conforming() -> Self {
        ThreePartyVector { bits: (0..2 * STEPS).map(|i| i % 2 == 0).collect() }
    }

    pub fn attempted(&self, k: usize) -> bool {
        self.bits[2 * (k - 1)]
    }

    pub fn late(&self, k: usize) -> bool {
        self.bits[2 * (k - 1) + 1]
    }
}

pub fn gen_three_party_log(v: &ThreePartyVector, delta: Time) -> Vec<Event> {
    let mut log = LogBuilder::new(&VARS);
    let t = |k: usize| step_time(k, delta, v.late(k));
    for leg in &LEGS {
        let (c, n, s, r) = (leg.chain, leg.name, leg.sender, leg.receiver);
        let from_s = format!("from_{s}");
        let from_r = format!("from_{r}");
        let to_s = format!("to_{s}");
        let to_r = format!("to_{r}");
        log.push(c, 0, &[&format!("{n}.setup")], &[]);
        let [ep, rp, esc, unlock] = leg.steps.map(|k| v.attempted(k));
        if ep {
            let k = leg.steps[0];
            log.push(c, t(k), &[&format!("{n}.depositEscrowPr_{s}")], &[(&from_s, leg.escrow_premium)]);
        }
        if rp {
            let k = leg.steps[1];
            log.push(c, t(k), &[&format!("{n}.depositRedemptionPr_{r}")], &[(&from_r, leg.redemption_premium)]);
        }
        if esc {
            let k = leg.steps[2];
            log.push(c, t(k), &[&format!("{n}.assetEscrowed_{s}")], &[(&from_s, 100)]);
        }
        if unlock {
            let k = leg.steps[3];
            log.push(c, t(k), &[&format!("{n}.hashlockUnlocked_{r}"), &format!("assetRedeemed_{r}")], &[(&to_r, 100)]);
        }
        if !ep {
            continue;
        }
        let settle = 13 * delta;
        let mut props = vec![format!("{n}.allAssetSettled_any")];
        let mut transfers: Vec<(String, i64)> = Vec::new();
        match (rp, esc, unlock) {
            (true, true, true) => {
                props.push(format!("EscrowPremiumRefunded_{s}"));
                props.push(format!("RedemptionPremiumRefunded_{r}"));
                transfers.push((to_s.clone(), leg.escrow_premium));
                transfers.push((to_r.clone(), leg.redemption_premium));
            }
            (true, true, false) => {
                props.push(format!("{n}.assetRefunded_{s}"));
                props.push(format!("{n}.assetRefunded_any"));
                props.push(format!("EscrowPremiumRefunded_{s}"));
                props.push(format!("{n}.redemptionPremiumRedeemed_{s}"));
                transfers.push((to_s.clone(), 100 + leg.escrow_premium + leg.redemption_premium));
            }
            (true, false, _) => {
                props.push(format!("{n}.escrowPremiumRedeemed_{r}"));
                props.push(format!("RedemptionPremiumRefunded_{r}"));
                transfers.push((to_r.clone(), leg.escrow_premium + leg.redemption_premium));
            }
            (false, _, _) => {
                props.push(format!("EscrowPremiumRefunded_{s}"));
                transfers.push((to_s.clone(), leg.escrow_premium));
            }
        }
        let props: Vec<&str> = props.iter().map(String::as_str).collect();
        let transfers: Vec<(&str, i64)> = transfers.iter().map(|(k, x)| (k.as_str(), *x)).collect();
        log.push(c, settle, &props, &transfers);
    }
    log.build()
}
