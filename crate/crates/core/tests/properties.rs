mod common;

use dynorient::colouring::ColourCode;
use dynorient::frac_orient::NoChanges;
use dynorient::graph::{Epsilon, Graph, Params, Vertex};
use dynorient::harness::{run, Mode, RunConfig};
use dynorient::oracles;
use dynorient::refinement::{DrainOrder, Refinement};
use dynorient::trace::{generate, GenKind, GenSpec, Trace, TraceOp};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn op() -> impl Strategy<Value = TraceOp> {
    let v = || (0u32..50).prop_map(Vertex);
    let pair = || (v(), v()).prop_filter("no self-loops", |(a, b)| a != b);
    prop_oneof![
        pair().prop_map(|(a, b)| TraceOp::Add(a, b)),
        pair().prop_map(|(a, b)| TraceOp::Del(a, b)),
        v().prop_map(TraceOp::Colour),
        v().prop_map(TraceOp::OutDeg),
        Just(TraceOp::Checkpoint),
    ]
}

/// Simple-graph updates on `n` vertices drawn from proptest's choices.
fn updates(n: u32, picks: &[(u32, u32)]) -> Vec<(Vertex, Vertex, bool)> {
    let mut present = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for &(a, b) in picks {
        let (a, b) = (a % n, b % n);
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        let add = present.insert(key);
        if !add {
            present.remove(&key);
        }
        out.push((Vertex(a), Vertex(b), add));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn forest_matches_naive_mirror(seed in any::<u64>(), n in 2u32..40, gamma in 1u32..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert_eq!(common::forest_mirror(&mut rng, n, gamma, 400), Ok(()));
    }

    #[test]
    fn traces_round_trip(ops in prop::collection::vec(op(), 0..60)) {
        let trace = Trace { ops };
        let back: Trace = trace.to_string().parse().unwrap();
        prop_assert_eq!(back, trace);
    }

    #[test]
    fn colour_codes_round_trip(pairs in prop::collection::vec((2u8..4, any::<u8>()), 0..20)) {
        let radices: Vec<u8> = pairs.iter().map(|p| p.0).collect();
        let digits: Vec<u8> = pairs.iter().map(|p| p.1 % p.0).collect();
        let code = ColourCode { digits, radices };
        prop_assert_eq!(ColourCode::decode(code.value(), &code.radices), code);
    }

    /// Both drain orders keep every invariant.
    #[test]
    fn drain_orders_both_stay_valid(
        picks in prop::collection::vec((0u32..9, 0u32..9), 1..120),
        gamma in 4u32..17,
    ) {
        let params = Params::new(9, gamma, 2, 1, Epsilon::new(1, 2).unwrap()).unwrap();
        for order in [DrainOrder::Lifo, DrainOrder::Fifo] {
            let mut g = Graph::new(params);
            let mut r = Refinement::new(&mut g).with_order(order);
            for (u, v, add) in updates(9, &picks) {
                if add {
                    r.insert_edge(&mut g, &mut NoChanges, u, v).unwrap();
                } else {
                    r.delete_edge(&mut g, &mut NoChanges, u, v).unwrap();
                }
                prop_assert_eq!(r.check(&mut g), Ok(()), "{:?}", order);
                prop_assert!(oracles::eta_violations(&mut g).is_empty());
            }
        }
    }

    /// Every mode verifies cleanly after every update of a generated trace.
    #[test]
    fn generated_runs_stay_valid(seed in any::<u64>(), n in 4u32..12, alpha in 1u32..4, kind in 0usize..4) {
        let kind = GenKind::ALL[kind];
        let trace = generate(&GenSpec::new(kind, n, 80, seed, alpha).with_queries(0.2)).unwrap();
        let params = Params::new(n, 8, 2, 1, Epsilon::new(1, 2).unwrap()).unwrap().with_alpha_max(alpha.max(3));
        for mode in Mode::ALL {
            let config = RunConfig { mode, params, verify_every: 1, paranoid: true };
            let report = run(config, &trace).unwrap();
            prop_assert!(report.ok(), "{} {}: {:?}", mode, kind, report.violations);
        }
    }

    /// Verification never changes what a run observes.
    #[test]
    fn verification_is_pure(seed in any::<u64>(), mode in 0usize..5) {
        let mode = Mode::ALL[mode];
        let trace = generate(&GenSpec::new(GenKind::Random, 10, 100, seed, 2).with_queries(0.3)).unwrap();
        let params = Params::new(10, 8, 2, 1, Epsilon::new(1, 1).unwrap()).unwrap().with_alpha_max(2);
        let quiet = run(RunConfig::new(mode, params), &trace).unwrap();
        let loud = run(RunConfig { mode, params, verify_every: 1, paranoid: true }, &trace).unwrap();
        prop_assert_eq!(quiet.state_hash, loud.state_hash);
        prop_assert_eq!(quiet.answers, loud.answers);
    }

    /// Generated forest-only traces never close a cycle.
    #[test]
    fn forest_only_traces_stay_forests(seed in any::<u64>(), n in 2u32..30) {
        let trace = generate(&GenSpec::new(GenKind::ForestOnly, n, 150, seed, 1)).unwrap();
        let mut present = std::collections::BTreeSet::new();
        for op in &trace.ops {
            match *op {
                TraceOp::Add(u, v) => { present.insert((u.min(v), u.max(v))); }
                TraceOp::Del(u, v) => { present.remove(&(u.min(v), u.max(v))); }
                _ => {}
            }
            let edges: Vec<_> = present.iter().copied().collect();
            prop_assert!(oracles::is_forest(&edges));
        }
    }
}
