use glare::{Bm25Index, Bm25Params, IdfVariant, TokenSequence};
use proptest::prelude::*;

const VOCAB: &[&str] = &["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"];

fn corpus() -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(
        prop::collection::vec(prop::sample::select(VOCAB).prop_map(str::to_owned), 1..12),
        1..8,
    )
}

fn query() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(VOCAB).prop_map(str::to_owned), 0..6)
}

fn variant() -> impl Strategy<Value = IdfVariant> {
    prop_oneof![Just(IdfVariant::Nonnegative), Just(IdfVariant::EpsilonFloor)]
}

fn index(docs: &[Vec<String>], variant: IdfVariant) -> Bm25Index {
    let seqs: Vec<TokenSequence> = docs.iter().map(|d| TokenSequence::new(d.clone())).collect();
    let params = Bm25Params {
        idf_variant: variant,
        ..Bm25Params::default()
    };
    Bm25Index::build(seqs.iter().enumerate().map(|(i, s)| (format!("d{i}"), s)), params).unwrap()
}

proptest! {
    #[test]
    fn nonnegative_variant_never_scores_below_zero(docs in corpus(), q in query()) {
        let idx = index(&docs, IdfVariant::Nonnegative);
        for s in idx.score_all(&TokenSequence::new(q)) {
            prop_assert!(s >= 0.0);
        }
    }

    #[test]
    fn score_grows_with_term_frequency(
        docs in corpus(),
        d in any::<prop::sample::Index>(),
        slot in any::<prop::sample::Index>(),
    ) {
        // Overwrite one token of a document with a term it already holds:
        // document length and document frequencies stay fixed, tf rises.
        let d = d.index(docs.len());
        let term = docs[d][0].clone();
        let mut raised = docs.clone();
        let slot = slot.index(raised[d].len());
        raised[d][slot] = term.clone();
        let q = TokenSequence::new([term.as_str()]);
        let id = format!("d{d}");
        let before = index(&docs, IdfVariant::Nonnegative).score(&q, &id).unwrap();
        let after = index(&raised, IdfVariant::Nonnegative).score(&q, &id).unwrap();
        prop_assert!(after >= before - 1e-12, "{} < {}", after, before);
    }

    #[test]
    fn disjoint_queries_add(docs in corpus(), split in 1usize..VOCAB.len(), v in variant()) {
        let idx = index(&docs, v);
        let (left, right) = VOCAB.split_at(split);
        let q1 = TokenSequence::new(left.iter().copied());
        let q2 = TokenSequence::new(right.iter().copied());
        let both = TokenSequence::new(VOCAB.iter().copied());
        for i in 0..docs.len() {
            let id = format!("d{i}");
            let sum = idx.score(&q1, &id).unwrap() + idx.score(&q2, &id).unwrap();
            prop_assert!((idx.score(&both, &id).unwrap() - sum).abs() <= 1e-12);
        }
    }

    #[test]
    fn duplicate_query_terms_do_not_count(docs in corpus(), q in query(), v in variant()) {
        let idx = index(&docs, v);
        let doubled: Vec<String> = q.iter().chain(q.iter()).cloned().collect();
        prop_assert_eq!(
            idx.score_all(&TokenSequence::new(q)),
            idx.score_all(&TokenSequence::new(doubled))
        );
    }

    #[test]
    fn rank_is_a_sorted_permutation(docs in corpus(), q in query(), v in variant()) {
        let idx = index(&docs, v);
        let q = TokenSequence::new(q);
        let ranked = idx.rank(&q);
        let mut ids: Vec<String> = ranked.iter().map(|(id, _)| id.clone()).collect();
        for w in ranked.windows(2) {
            prop_assert!(w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0));
        }
        ids.sort();
        let mut expected = idx.doc_ids().to_vec();
        expected.sort();
        prop_assert_eq!(ids, expected);
        for (id, s) in &ranked {
            prop_assert_eq!(*s, idx.score(&q, id).unwrap());
        }
    }

    #[test]
    fn index_statistics_are_consistent(docs in corpus()) {
        let idx = index(&docs, IdfVariant::Nonnegative);
        let mean = docs.iter().map(Vec::len).sum::<usize>() as f64 / docs.len() as f64;
        prop_assert!((idx.avg_doc_length() - mean).abs() < 1e-12);
        for term in VOCAB {
            prop_assert!(idx.doc_freq(term) <= docs.len());
        }
    }
}
