use glare::eval::{average_precision, ndcg_at_k, precision_at_k, recall_at_k};
use glare::Judgment;
use proptest::prelude::*;

/// A ranking over `t0..t{pool}` and a single relevant id from the same pool.
fn judgment() -> impl Strategy<Value = (Vec<String>, String)> {
    (2usize..20).prop_flat_map(|pool| {
        let ids: Vec<String> = (0..pool).map(|i| format!("t{i}")).collect();
        (
            Just(ids.clone()).prop_shuffle().prop_flat_map(move |ids| {
                (0..=ids.len()).prop_map(move |n| ids[..n].to_vec())
            }),
            prop::sample::select(ids),
        )
    })
}

proptest! {
    #[test]
    fn metrics_are_bounded_and_monotone_in_k((ranked, rel) in judgment()) {
        let j = Judgment::new(ranked, [rel]).unwrap();
        let mut last = (0.0, 0.0);
        for k in 1..=12 {
            let (r, p, ap, n) = (
                recall_at_k(&j, k).unwrap(),
                precision_at_k(&j, k).unwrap(),
                average_precision(&j, k).unwrap(),
                ndcg_at_k(&j, k).unwrap(),
            );
            for m in [r, p, ap, n] {
                prop_assert!((0.0..=1.0).contains(&m));
            }
            prop_assert!(r >= last.0 && n >= last.1);
            let hits = p * k as f64;
            prop_assert!((hits - hits.round()).abs() < 1e-12);
            last = (r, n);
        }
    }

    #[test]
    fn singleton_metrics_follow_the_rank((ranked, rel) in judgment(), k in 1usize..12) {
        let rank = ranked.iter().position(|id| *id == rel).map(|p| p + 1);
        let j = Judgment::new(ranked, [rel]).unwrap();
        let r = recall_at_k(&j, k).unwrap();
        match rank {
            Some(rank) if rank <= k => {
                prop_assert_eq!(r, 1.0);
                prop_assert!((average_precision(&j, k).unwrap() - 1.0 / rank as f64).abs() < 1e-15);
                let want = 1.0 / ((rank + 1) as f64).log2();
                prop_assert!((ndcg_at_k(&j, k).unwrap() - want).abs() < 1e-15);
            }
            _ => {
                prop_assert_eq!(r, 0.0);
                prop_assert_eq!(average_precision(&j, k).unwrap(), 0.0);
                prop_assert_eq!(ndcg_at_k(&j, k).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn metrics_ignore_id_names((ranked, rel) in judgment(), k in 1usize..12, salt in "[a-z]{1,4}") {
        let rename = |id: &String| format!("{salt}-{}", id.chars().rev().collect::<String>());
        let a = Judgment::new(ranked.clone(), [rel.clone()]).unwrap();
        let b = Judgment::new(ranked.iter().map(rename), [rename(&rel)]).unwrap();
        prop_assert_eq!(recall_at_k(&a, k).unwrap(), recall_at_k(&b, k).unwrap());
        prop_assert_eq!(precision_at_k(&a, k).unwrap(), precision_at_k(&b, k).unwrap());
        prop_assert_eq!(average_precision(&a, k).unwrap(), average_precision(&b, k).unwrap());
        prop_assert_eq!(ndcg_at_k(&a, k).unwrap(), ndcg_at_k(&b, k).unwrap());
    }
}
