use std::collections::BTreeSet;

use mtlmon::casegen::auction::{gen_auction_log, AuctionVector};
use mtlmon::casegen::specs::spec_library;
use mtlmon::casegen::three_party::{gen_three_party_log, ThreePartyVector};
use mtlmon::casegen::two_party::{self, enumerate_two_party_executions, gen_two_party_log, ExecutionVector, ProtocolParams};
use mtlmon::computation::{build_computation, Event};
use mtlmon::mtl::{Time, Verdict};
use mtlmon::pipeline::ingest::{ingest_str, to_jsonl, to_records};
use mtlmon::pipeline::{monitor, Engine, MonitorConfig};

fn verdicts(events: Vec<Event>, spec: &str, delta: Time, eps: Time, g: usize) -> BTreeSet<Verdict> {
    let f = spec_library(delta)[spec].clone();
    monitor(events, &f, &MonitorConfig::new(eps, g, Engine::Enumerate)).unwrap().verdicts
}

fn top() -> BTreeSet<Verdict> {
    BTreeSet::from([Verdict::Top])
}

#[test]
fn conforming_two_party() {
    for g in [1, 2] {
        let log = || gen_two_party_log(&ExecutionVector::conforming(), &ProtocolParams::new(10));
        assert_eq!(verdicts(log(), "liveness_2p", 10, 1, g), top());
        assert_eq!(verdicts(log(), "alice_safety_2p", 10, 1, g), top());
    }
}

#[test]
fn late_first_deposit_breaks_liveness() {
    let v: ExecutionVector = "111010101010".parse().unwrap();
    let log = gen_two_party_log(&v, &ProtocolParams::new(10));
    assert_eq!(verdicts(log, "liveness_2p", 10, 1, 1), BTreeSet::from([Verdict::Bottom]));
}

#[test]
fn skipped_bob_premium_leaves_alice_conforming() {
    let v: ExecutionVector = "100000000000".parse().unwrap();
    let log = gen_two_party_log(&v, &ProtocolParams::new(10));
    assert_eq!(verdicts(log.clone(), "liveness_2p", 10, 1, 1), BTreeSet::from([Verdict::Bottom]));
    assert_eq!(verdicts(log, "alice_safety_2p", 10, 1, 1), top());
}

#[test]
fn conforming_three_party() {
    let log = gen_three_party_log(&ThreePartyVector::conforming(), 10);
    assert_eq!(verdicts(log.clone(), "liveness_3p", 10, 1, 1), top());
    assert_eq!(verdicts(log, "alice_safety_3p", 10, 1, 1), top());
}

#[test]
fn conforming_auction() {
    let log = gen_auction_log(&AuctionVector::conforming(), 10);
    assert_eq!(verdicts(log.clone(), "liveness_auction", 10, 1, 1), top());
    assert_eq!(verdicts(log, "bob_safety_auction", 10, 1, 1), top());
}

#[test]
fn challenged_auction_is_not_live() {
    let v = AuctionVector::parse("10101000").unwrap();
    let log = gen_auction_log(&v, 10);
    assert_eq!(verdicts(log, "liveness_auction", 10, 1, 1), BTreeSet::from([Verdict::Bottom]));
}

#[test]
fn generated_logs_ingest_and_build() {
    let params = ProtocolParams::new(2);
    for v in enumerate_two_party_executions() {
        let log = gen_two_party_log(&v, &params);
        let again = ingest_str(&to_jsonl(&to_records(&log, &two_party::PROCESSES))).unwrap();
        assert_eq!(again, log, "{v}");
        build_computation(log, 2).unwrap();
    }
    for log in [
        gen_three_party_log(&ThreePartyVector::conforming(), 2),
        gen_auction_log(&AuctionVector::conforming(), 2),
    ] {
        build_computation(log, 2).unwrap();
    }
}
