use proptest::prelude::*;

use oracle_lab::eval::prf;
use oracle_lab::oracle::{loss, GoldReference};
use oracle_lab::transition::{run_sequence, Strategy};
use oracle_lab::tree::{constituent_set, gold_sequence, parse_bracketed, random_tree, serialize, Label};

fn labels() -> Vec<Label> {
    ["S", "NP", "VP"].iter().map(|s| Label::new(s)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn serialize_round_trips(n in 1usize..12, seed in any::<u64>()) {
        let t = random_tree(n, &labels(), seed).unwrap();
        let back = parse_bracketed(&serialize(&t)).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn gold_prefixes_cost_nothing(n in 1usize..9, seed in any::<u64>(), in_order in any::<bool>()) {
        let s = if in_order { Strategy::InOrder } else { Strategy::TopDown };
        let t = random_tree(n, &labels(), seed).unwrap();
        let gold = GoldReference::new(&t, s);
        for c in run_sequence(n, s, 64, &gold_sequence(&t, s)).unwrap() {
            prop_assert_eq!(loss(&c, &gold).unwrap().total, 0);
        }
    }

    #[test]
    fn prf_swaps_precision_and_recall(n in 1usize..10, a in any::<u64>(), b in any::<u64>()) {
        let x = random_tree(n, &labels(), a).unwrap();
        let y = random_tree(n, &labels(), b).unwrap();
        // give both trees the same words
        let y = parse_bracketed(&serialize(&y)).unwrap();
        let y = oracle_lab::tree::ConstituentTree::new(x.tokens().to_vec(), y.root().clone()).unwrap();
        let p = prf(std::slice::from_ref(&x), std::slice::from_ref(&y)).unwrap();
        let q = prf(std::slice::from_ref(&y), std::slice::from_ref(&x)).unwrap();
        prop_assert_eq!(p.precision, q.recall);
        prop_assert_eq!(p.recall, q.precision);
        prop_assert_eq!(p.matched, q.matched);
        let same = prf(std::slice::from_ref(&x), std::slice::from_ref(&x)).unwrap();
        prop_assert_eq!(same.f1, 100.0);
        prop_assert_eq!(same.gold, constituent_set(&x).len());
    }
}
