use mtlmon::casegen::random::{gen_random_computation, random_formula, rng, ComputationParams, FormulaParams};
use mtlmon::computation::{build_computation, Computation, Event};
use mtlmon::mtl::{eval_finite, Formula, TimedTrace};
use mtlmon::oracle::oracle_verdicts;
use mtlmon::pipeline::{monitor_computation, Engine, MonitorConfig};
use proptest::prelude::*;
use rand::Rng;

fn case(seed: u64, max_events: usize) -> (Computation, Formula) {
    let mut r = rng(seed);
    let p = ComputationParams { max_events, epsilon: r.gen_range(1..=3), max_gap: 3, ..Default::default() };
    let c = gen_random_computation(seed, &p).unwrap();
    let f = random_formula(&mut r, &FormulaParams { depth: 2, max_const: 6, ..Default::default() });
    (c, f)
}

fn config(c: &Computation, g: usize, engine: Engine) -> MonitorConfig {
    let mut cfg = MonitorConfig::new(c.epsilon(), g, engine);
    cfg.length = Some(c.max_local_time().max(3));
    cfg.branch_cap = usize::MAX;
    cfg.max_verdicts = usize::MAX;
    cfg.solver_command = std::env::var("MTLMON_SOLVER").unwrap_or_else(|_| "z3 -in".into());
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pipeline_matches_oracle(seed in any::<u64>(), g in 1usize..=3) {
        let (c, f) = case(seed, 6);
        let r = monitor_computation(&c, &f, &config(&c, g, Engine::Enumerate)).unwrap();
        prop_assert!(!r.truncated);
        prop_assert_eq!(r.verdicts, oracle_verdicts(&c, &f).unwrap(), "g {} formula {}", g, f);
    }

    #[test]
    fn truncation_only_loses_verdicts(seed in any::<u64>(), cap in 1usize..=3) {
        let (c, f) = case(seed, 6);
        let full = monitor_computation(&c, &f, &config(&c, 2, Engine::Enumerate)).unwrap();
        let mut cfg = config(&c, 2, Engine::Enumerate);
        cfg.branch_cap = cap;
        let capped = monitor_computation(&c, &f, &cfg).unwrap();
        prop_assert!(capped.verdicts.is_subset(&full.verdicts));
        let wide = full.segments.iter().any(|s| s.branches.len() > cap);
        if !wide || !capped.truncated {
            prop_assert!(!capped.truncated);
            prop_assert_eq!(&capped.verdicts, &full.verdicts);
        }
        if full.segments.first().is_some_and(|s| s.branches.len() > cap) {
            prop_assert!(capped.truncated);
        }
    }

    #[test]
    fn single_process_is_a_trace(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=8);
        let mut t = 0;
        let mut pairs = Vec::new();
        let mut events = Vec::new();
        for _ in 0..n {
            t += r.gen_range(1..=3);
            let props: Vec<&str> = ["a", "b", "c"].into_iter().filter(|_| r.gen_bool(0.5)).collect();
            let s = mtlmon::mtl::State::with_props(props);
            pairs.push((s.clone(), t));
            events.push(Event::local(1, t, s));
        }
        let f = random_formula(&mut r, &FormulaParams { depth: 3, max_const: 6, ..Default::default() });
        let trace = TimedTrace::from_pairs(pairs).unwrap();
        let c = build_computation(events, 1).unwrap();
        let r = monitor_computation(&c, &f, &config(&c, 1, Engine::Enumerate)).unwrap();
        prop_assert_eq!(r.verdicts.into_iter().collect::<Vec<_>>(), vec![eval_finite(&trace, &f, 0).unwrap()]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn engines_agree(seed in any::<u64>(), g in 1usize..=2) {
        let (c, f) = case(seed, 5);
        let smt = monitor_computation(&c, &f, &config(&c, g, Engine::Smt)).unwrap();
        let en = monitor_computation(&c, &f, &config(&c, g, Engine::Enumerate)).unwrap();
        prop_assert_eq!(smt.verdicts, en.verdicts);
        let a: Vec<_> = smt.segments.iter().map(|s| &s.branches).collect();
        let b: Vec<_> = en.segments.iter().map(|s| &s.branches).collect();
        prop_assert_eq!(a, b);
    }
}
