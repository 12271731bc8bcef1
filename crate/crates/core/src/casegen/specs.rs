//! Specs for the generated protocols, parameterized by the step deadline `Δ`.
//!
//! Contract calls such as `ban.premium_deposited(alice)` are propositions named
//! `ban.premium_deposited_alice`; `sum(to:alice)` reads the variable `to_alice`.

use std::collections::BTreeMap;

use crate::mtl::{parse_spec, Formula, Time};

/// Spec sources by name.
pub fn spec_sources(delta: Time) -> BTreeMap<&'static str, String> {
    let d = |k: Time| k * delta;
    let mut m = BTreeMap::new();

    let conform_2p = format!(
        "F[0,{}) ban.premium_deposited_alice \
         & (F[0,{}) apr.premium_deposited_bob -> F[0,{}) apr.asset_escrowed_alice) \
         & (F[0,{}) ban.asset_escrowed_bob -> F[0,{}) ban.asset_redeemed_alice) \
         & (!apr.asset_redeemed_bob U ban.asset_redeemed_alice)",
        d(1),
        d(2),
        d(3),
        d(4),
        d(5)
    );
    m.insert(
        "liveness_2p",
        format!(
            "F[0,{}) ban.premium_deposited_alice & F[0,{}) apr.premium_deposited_bob \
             & F[0,{}) apr.asset_escrowed_alice & F[0,{}) ban.asset_escrowed_bob \
             & F[0,{}) ban.asset_redeemed_alice & F[0,{}) apr.asset_redeemed_bob \
             & F[0,{}) ban.premium_refunded_alice & F[0,{}) apr.premium_refunded_bob \
             & F[{},inf) apr.all_asset_settled_any & F[{},inf) ban.all_asset_settled_any",
            d(1),
            d(2),
            d(3),
            d(4),
            d(5),
            d(6),
            d(5),
            d(6),
            d(6),
            d(5)
        ),
    );
    m.insert("alice_safety_2p", format!("({conform_2p}) -> sum(to:alice) >= sum(from:alice)"));
    m.insert(
        "alice_hedged_2p",
        format!(
            "F (({conform_2p}) & apr.asset_escrowed_alice & apr.asset_refunded_any) \
             -> F (sum(to:alice) >= sum(from:alice) + 1)"
        ),
    );
    m.insert("alice_conform_2p", conform_2p);

    let steps_3p = [
        "apr.depositEscrowPr_alice",
        "ban.depositEscrowPr_bob",
        "che.depositEscrowPr_carol",
        "che.depositRedemptionPr_alice",
        "ban.depositRedemptionPr_carol",
        "apr.depositRedemptionPr_bob",
        "apr.assetEscrowed_alice",
        "ban.assetEscrowed_bob",
        "che.assetEscrowed_carol",
        "che.hashlockUnlocked_alice",
        "ban.hashlockUnlocked_carol",
        "apr.hashlockUnlocked_bob",
    ];
    let mut live: Vec<String> =
        steps_3p.iter().enumerate().map(|(i, p)| format!("F[0,{}) {p}", d(i as Time + 1))).collect();
    for who in ["alice", "bob", "carol"] {
        live.push(format!("F assetRedeemed_{who}"));
    }
    for kind in ["EscrowPremiumRefunded", "RedemptionPremiumRefunded"] {
        for who in ["alice", "bob", "carol"] {
            live.push(format!("F {kind}_{who}"));
        }
    }
    m.insert("liveness_3p", live.join(" & "));
    let conform_3p = format!(
        "F[0,{}) apr.depositEscrowPr_alice \
         & (F[0,{}) che.depositEscrowPr_carol -> F[0,{}) che.depositRedemptionPr_alice) \
         & (!che.depositRedemptionPr_alice U che.depositEscrowPr_carol) \
         & (F[0,{}) apr.depositRedemptionPr_bob -> F[0,{}) apr.assetEscrowed_alice) \
         & (!apr.assetEscrowed_alice U apr.depositRedemptionPr_bob) \
         & (F[0,{}) che.assetEscrowed_carol -> F[0,{}) che.hashlockUnlocked_alice) \
         & (!che.hashlockUnlocked_alice U che.assetEscrowed_carol) \
         & (!ban.hashlockUnlocked_carol U che.hashlockUnlocked_alice) \
         & (!apr.hashlockUnlocked_bob U che.hashlockUnlocked_alice)",
        d(1),
        d(3),
        d(4),
        d(6),
        d(7),
        d(9),
        d(10)
    );
    m.insert("alice_safety_3p", format!("({conform_3p}) -> sum(to:alice) >= sum(from:alice)"));
    m.insert(
        "alice_hedged_3p",
        format!("F (({conform_3p}) & apr.assetEscrowed_alice) -> F (sum(to:alice) >= sum(from:alice) + 1)"),
    );
    m.insert("alice_conform_3p", conform_3p);

    m.insert(
        "liveness_auction",
        format!(
            "F[0,{}) coin.bid_bob & F[0,{}) coin.declaration_alice_sb & F[0,{}) tckt.declaration_alice_sb \
             & F[{},inf) coin.redeemBid_any & F[{},inf) coin.refundPremium_any \
             & (coin.bid_carol -> F[0,{}) coin.refundBid_any) \
             & F tckt.redeemTicket_any & G !coin.challenge_any & G !tckt.challenge_any",
            d(1),
            d(2),
            d(2),
            d(4) + 1,
            d(4) + 1,
            d(1)
        ),
    );
    let mut blocks = vec![format!("F[0,{}) coin.bid_bob", d(1))];
    for (a, b) in [("coin", "tckt"), ("tckt", "coin")] {
        for s in ["sc", "sb"] {
            blocks.push(format!(
                "(({a}.declaration_alice_{s} | {a}.challenge_carol_{s}) \
                 -> ({b}.declaration_alice_{s} | {b}.challenge_carol_{s} | {b}.challenge_bob_{s}))"
            ));
        }
    }
    let conform_auction = blocks.join(" & ");
    m.insert(
        "bob_safety_auction",
        format!(
            "({conform_auction}) -> F ((coin.refundBid_any & coin.redeemPremium_any) | tckt.redeemTicket_any)"
        ),
    );
    m.insert(
        "bob_hedged_auction",
        format!(
            "G (({conform_auction}) & (tckt.refundTicket_alice | tckt.redeemTicket_carol)) \
             -> F (coin.refundBid_any & coin.redeemPremium_any)"
        ),
    );
    m.insert("bob_conform_auction", conform_auction);

    m.insert("redeem_order", "!apr_redeem_bob U[0,8) ban_redeem_alice".into());
    m.insert("skewed_until", "a U[0,6) b".into());
    m.insert("segmented_response", "F[0,6) r -> (!p U[2,9) q)".into());
    m
}

/// Every spec, parsed.
pub fn spec_library(delta: Time) -> BTreeMap<&'static str, Formula> {
    spec_sources(delta)
        .into_iter()
        .map(|(k, v)| {
            let f = parse_spec(&v).unwrap_or_else(|e| panic!("spec {k}: {e}"));
            (k, f)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_round_trips() {
        for delta in [2, 10, 500] {
            for (name, f) in spec_library(delta) {
                let printed = f.to_string();
                assert_eq!(parse_spec(&printed).unwrap(), f, "{name}: {printed}");
            }
        }
    }

    #[test]
    fn shipped_files_match() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("specs");
        let lib = spec_library(10);
        let mut seen = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            let name = path.file_stem().unwrap().to_str().unwrap().to_string();
            let text = std::fs::read_to_string(&path).unwrap();
            assert_eq!(parse_spec(&text).unwrap(), lib[name.as_str()], "{name}");
            seen += 1;
        }
        assert_eq!(seen, lib.len());
    }

    #[test]
    fn known_shapes() {
        let lib = spec_sources(500);
        assert!(lib["liveness_2p"].starts_with("F[0,500) ban.premium_deposited_alice &"));
        assert!(lib["alice_safety_2p"].ends_with("-> sum(to:alice) >= sum(from:alice)"));
        let lib = spec_library(500);
        assert_eq!(lib["alice_safety_2p"].to_string().matches("->").count(), 3);
        assert_eq!(lib.len(), 15);
    }
}
