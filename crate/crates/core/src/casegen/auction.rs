//! Hedged ticket auction. Alice sells a ticket escrowed on `tckt`; Bob and Carol bid on
//! `coin`. Bob is the intended winner, so Alice's declaration releases `s_b`.
//!
//! | step | chain      | call                          |
//! |------|------------|-------------------------------|
//! | 1    | coin       | Bob bids                      |
//! | 2    | coin       | Carol bids                    |
//! | 3    | coin       | Alice declares `s_b`          |
//! | 4    | tckt       | Alice declares `s_b`          |
//!
//! Bids and declarations are due before `Δ` and `2Δ`. A conforming Bob who sees the
//! secret on only one chain forwards it to the other before `4Δ`. Both chains settle
//! at `5Δ` unless no step was taken at all. Processes are `coin` = 1 and `tckt` = 2.

use super::chain::{check_prefixes, parse_bits, step_time, LogBuilder, VectorError};
use crate::computation::Event;
use crate::mtl::Time;

pub const PROCESSES: [&str; 2] = ["coin", "tckt"];
pub const STEPS: usize = 4;
pub const VARS: [&str; 6] = ["to_alice", "from_alice", "to_bob", "from_bob", "to_carol", "from_carol"];
const COIN: usize = 1;
const TCKT: usize = 2;
const CHAINS: [&[usize]; 3] = [&[1, 3], &[2], &[4]];

const TICKET: i64 = 100;
const PREMIUM: i64 = 2;
const BID_BOB: i64 = 10;
const BID_CAROL: i64 = 5;

/// Eight bits, two per step: attempted, then late. Alice only declares on `coin` after
/// Bob's bid is in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuctionVector {
    bits: [bool; 8],
}

impl AuctionVector {
    pub fn parse(s: &str) -> Result<Self, VectorError> {
        let v = parse_bits(s, 2 * STEPS)?;
        check_prefixes(&v, &CHAINS)?;
        let mut bits = [false; 8];
        bits.copy_from_slice(&v);
        Ok(AuctionVector { bits })
    }

    pub fn conforming() -> Self {
        AuctionVector { bits: [true, false, true, false, true, false, true, false] }
    }

    pub fn attempted(&self, k: usize) -> bool {
        self.bits[2 * (k - 1)]
    }

    pub fn late(&self, k: usize) -> bool {
        self.bits[2 * (k - 1) + 1]
    }
}

pub fn gen_auction_log(v: &AuctionVector, delta: Time) -> Vec<Event> {
    let mut log = LogBuilder::new(&VARS);
    log.push(COIN, 0, &["coin.setup", "coin.depositPremium_alice"], &[("from_alice", PREMIUM)]);
    log.push(TCKT, 0, &["tckt.setup", "tckt.escrowTicket_alice"], &[("from_alice", TICKET)]);

    if (1..=STEPS).all(|k| !v.attempted(k)) {
        return log.build();
    }
    let bob_bid = v.attempted(1);
    let carol_bid = v.attempted(2);
    if bob_bid {
        log.push(COIN, step_time(1, delta, v.late(1)), &["coin.bid_bob"], &[("from_bob", BID_BOB)]);
    }
    if carol_bid {
        // Just ahead of Bob's slot so the two bids never collide.
        let t = step_time(1, delta, v.late(2)).saturating_sub(1);
        log.push(COIN, t, &["coin.bid_carol"], &[("from_carol", BID_CAROL)]);
    }
    let on_coin = v.attempted(3);
    let on_tckt = v.attempted(4);
    if on_coin {
        log.push(COIN, step_time(2, delta, v.late(3)), &["coin.declaration_alice_sb"], &[]);
    }
    if on_tckt {
        log.push(TCKT, step_time(2, delta, v.late(4)), &["tckt.declaration_alice_sb"], &[]);
    }

    // Bob forwards a secret seen on one chain only.
    let challenge = step_time(4, delta, false);
    let mut coin_sb = on_coin;
    let mut tckt_sb = on_tckt;
    if bob_bid && on_coin != on_tckt {
        if on_coin {
            log.push(TCKT, challenge, &["tckt.challenge_bob_sb", "tckt.challenge_any"], &[]);
            tckt_sb = true;
        } else {
            log.push(COIN, challenge, &["coin.challenge_bob_sb", "coin.challenge_any"], &[]);
            coin_sb = true;
        }
    }

    let settle = 5 * delta;
    let mut props = vec!["coin.settled_any"];
    let mut transfers: Vec<(&str, i64)> = Vec::new();
    if bob_bid && coin_sb {
        props.extend(["coin.redeemBid_any", "coin.refundPremium_any"]);
        transfers.push(("to_alice", BID_BOB + PREMIUM));
        if carol_bid {
            props.push("coin.refundBid_any");
            transfers.push(("to_carol", BID_CAROL));
        }
    } else {
        props.push("coin.redeemPremium_any");
        let mut paid = 0;
        if bob_bid {
            transfers.push(("to_bob", BID_BOB + 1));
            paid += 1;
        }
        if carol_bid {
            transfers.push(("to_carol", BID_CAROL + 1));
            paid += 1;
        }
        if bob_bid || carol_bid {
            props.push("coin.refundBid_any");
        }
        transfers.push(("to_alice", PREMIUM - paid));
    }
    log.push(COIN, settle, &props, &transfers);

    if tckt_sb {
        log.push(TCKT, settle, &["tckt.settled_any", "tckt.redeemTicket_any", "tckt.redeemTicket_bob"], &[("to_bob", TICKET)]);
    } else {
        log.push(TCKT, settle, &["tckt.settled_any", "tckt.refundTicket_alice"], &[("to_alice", TICKET)]);
    }
    log.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn holds(ev: &[Event], p: &str) -> bool {
        ev.iter().any(|e| e.payload.holds(p))
    }

    #[test]
    fn conforming_auction() {
        let ev = gen_auction_log(&AuctionVector::conforming(), 10);
        assert_eq!(ev.len(), 8);
        assert!(holds(&ev, "coin.redeemBid_any"));
        assert!(holds(&ev, "tckt.redeemTicket_bob"));
        assert!(!holds(&ev, "coin.challenge_any") && !holds(&ev, "tckt.challenge_any"));
        let carol = ev.iter().find(|e| e.payload.holds("coin.bid_carol")).unwrap();
        let bob = ev.iter().find(|e| e.payload.holds("coin.bid_bob")).unwrap();
        assert!(carol.local_time < bob.local_time && bob.local_time < 10);
    }

    #[test]
    fn missing_ticket_declaration_is_challenged() {
        let v = AuctionVector::parse("10101000").unwrap();
        let ev = gen_auction_log(&v, 10);
        assert!(holds(&ev, "tckt.challenge_bob_sb"));
        assert!(holds(&ev, "tckt.redeemTicket_bob"));
    }

    #[test]
    fn no_declaration_refunds_everyone() {
        let v = AuctionVector::parse("10100000").unwrap();
        let ev = gen_auction_log(&v, 10);
        assert!(holds(&ev, "tckt.refundTicket_alice"));
        assert!(holds(&ev, "coin.redeemPremium_any"));
        let last_coin = ev.iter().rfind(|e| e.process == COIN).unwrap();
        assert_eq!(last_coin.payload.variables["to_bob"], BID_BOB + 1);
    }

    #[test]
    fn zero_vector_is_setup_only() {
        let v = AuctionVector::parse("00000000").unwrap();
        let ev = gen_auction_log(&v, 10);
        assert_eq!(ev.len(), 2);
        assert!(ev.iter().all(|e| e.local_time == 0));
        assert!(matches!(AuctionVector::parse("00001000"), Err(VectorError::Order { step: 3 })));
    }
}
