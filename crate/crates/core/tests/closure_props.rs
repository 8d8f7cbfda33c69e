use orderlearn::order::check::{check_cases, LabelCase};
use orderlearn::order::{
    brute_force_closure, ClosureError, GroundTruth, Label, LabelSource, OrderClosure, Pair, Pruning, Rule,
};
use orderlearn::rng::seeded;
use proptest::prelude::*;

fn arb_case() -> impl Strategy<Value = LabelCase> {
    (any::<u64>(), 2usize..=8).prop_map(|(seed, max_nodes)| LabelCase::random(max_nodes, &mut seeded(seed)))
}

/// Arbitrary (possibly inconsistent) labels on up to 6 nodes.
fn arb_raw_labels() -> impl Strategy<Value = (usize, Vec<(Pair, Label)>)> {
    (3usize..=6).prop_flat_map(|n| {
        let pair = (0..n, 0..n)
            .prop_filter("off-diagonal", |(a, b)| a != b)
            .prop_map(|(a, b)| Pair::new(a, b));
        let label = prop_oneof![Just(Label::Positive), Just(Label::Negative)];
        (Just(n), prop::collection::vec((pair, label), 1..12))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn incremental_matches_fixpoint(case in arb_case()) {
        let mut h = OrderClosure::new(case.n);
        let mut before = 0;
        for &(p, y) in &case.labels {
            let delta = h.insert(p, y, LabelSource::Queried).unwrap();
            prop_assert_eq!(h.len(), before + delta.len());
            before = h.len();
        }
        let reference = brute_force_closure(case.n, case.labels.iter().copied()).unwrap();
        prop_assert_eq!(h.positive_set(), reference.positives);
        prop_assert_eq!(h.negative_set(), reference.negatives);
        prop_assert!(h.audit().is_empty());
    }

    #[test]
    fn insertion_order_does_not_matter(case in arb_case(), shuffle_seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let forward = OrderClosure::seed(case.n, case.labels.iter().copied()).unwrap();
        let mut shuffled = case.labels.clone();
        shuffled.shuffle(&mut seeded(shuffle_seed));
        let other = OrderClosure::seed(case.n, shuffled).unwrap();
        prop_assert_eq!(forward, other);
    }

    #[test]
    fn deltas_carry_sound_signs(case in arb_case()) {
        let mut h = OrderClosure::new(case.n);
        for &(p, y) in &case.labels {
            let delta = h.insert(p, y, LabelSource::Queried).unwrap();
            for d in &delta.entries {
                match (y, d.rule) {
                    (Label::Positive, Rule::N) => prop_assert_eq!(d.label, Label::Positive),
                    (Label::Positive, _) => prop_assert_eq!(d.label, Label::Negative),
                    (Label::Negative, rule) => {
                        prop_assert_eq!(d.label, Label::Negative);
                        prop_assert_eq!(rule, Rule::NPrime);
                    }
                }
                prop_assert_eq!(case.truth.label(d.pair), Ok(d.label));
            }
        }
    }

    #[test]
    fn pruned_propagation_matches_unpruned(case in arb_case()) {
        let mut h = OrderClosure::new(case.n);
        for &(p, y) in &case.labels {
            if y.is_positive() && !h.contains(p) {
                let pruned = h.deduction_sets(p, Pruning::Pruned).unwrap();
                let full = h.deduction_sets(p, Pruning::Unpruned).unwrap();
                prop_assert_eq!(&pruned.o, &full.o);
                prop_assert!(pruned.o_evaluations <= full.o_evaluations);
            }
            h.insert(p, y, LabelSource::Queried).unwrap();
        }
    }

    #[test]
    fn conflicts_match_fixpoint((n, labels) in arb_raw_labels()) {
        let reference = brute_force_closure(n, labels.iter().copied());
        let mut h = OrderClosure::new(n);
        let mut failed = false;
        for &(p, y) in &labels {
            let snapshot = h.clone();
            match h.insert(p, y, LabelSource::Queried) {
                Ok(_) => {}
                Err(ClosureError::Conflict(_)) => {
                    prop_assert_eq!(&h, &snapshot);
                    prop_assert_eq!(h.len(), snapshot.len());
                    failed = true;
                    break;
                }
                Err(e) => return Err(TestCaseError::fail(format!("unexpected error {e}"))),
            }
        }
        prop_assert_eq!(failed, reference.is_err());
        if let Ok(reference) = reference {
            prop_assert_eq!(h.positive_set(), reference.positives);
            prop_assert_eq!(h.negative_set(), reference.negatives);
        }
    }
}

#[test]
fn randomized_batch_agrees_with_fixpoint() {
    let report = check_cases(200, 8, Pruning::Pruned, &mut seeded(11));
    assert!(report.passed(), "{report:?}");
    let report = check_cases(100, 8, Pruning::Unpruned, &mut seeded(12));
    assert!(report.passed(), "{report:?}");
}

#[test]
fn hypothetical_delta_matches_insert_on_fixtures() {
    // a=0 b=1 e=2 f=3
    let h = OrderClosure::seed(4, [(Pair::new(1u32, 3u32), Label::Positive), (Pair::new(0u32, 2u32), Label::Negative)])
        .unwrap();
    let hypo = h.hypothetical_delta(Pair::new(0u32, 1u32), Label::Positive).unwrap();
    let mut h2 = h.clone();
    let real = h2.insert(Pair::new(0u32, 1u32), Label::Positive, LabelSource::Queried).unwrap();
    assert_eq!(hypo, real);
    assert_eq!(h.len(), 3);
}

#[test]
fn dense_orders_prune_most_propagation_work() {
    let mut rng = seeded(5);
    let truth = GroundTruth::random(30, 0.3, &mut rng);
    let pairs: Vec<Pair> = (0..30usize)
        .flat_map(|a| (0..30usize).map(move |b| Pair::new(a, b)))
        .filter(|p| !p.is_reflexive())
        .collect();
    let mut h = OrderClosure::new(30);
    let (mut pruned, mut full) = (0, 0);
    use rand::seq::SliceRandom;
    let mut order = pairs.clone();
    order.shuffle(&mut rng);
    for p in order {
        let y = truth.label(p).unwrap();
        if y.is_positive() && !h.contains(p) {
            pruned += h.deduction_sets(p, Pruning::Pruned).unwrap().o_evaluations;
            full += h.deduction_sets(p, Pruning::Unpruned).unwrap().o_evaluations;
        }
        h.insert(p, y, LabelSource::Queried).unwrap();
    }
    assert!(full > 0);
    assert!((pruned as f64) <= 0.8 * full as f64, "pruned {pruned} vs {full}");
}
