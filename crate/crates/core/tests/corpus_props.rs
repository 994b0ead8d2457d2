use glare::corpus::{
    corpus_stats, load_appeals, load_themes, resolve_labels, write_appeals, write_themes,
    ColumnMapping,
};
use glare::{AppealRecord, ThemeCatalog, ThemeRecord};
use proptest::prelude::*;
use tempfile::TempDir;

fn field() -> impl Strategy<Value = String> {
    // Delimiters, quotes, line breaks and accents all inside one field.
    "[a-zA-Zçãé0-9 ,;\"'\n]{0,40}[a-zçã]"
}

fn appeals() -> impl Strategy<Value = Vec<AppealRecord>> {
    prop::collection::vec((field(), prop::option::of("T[0-9]")), 1..12).prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, (text, label))| AppealRecord {
                id: format!("A{i}"),
                raw_text: text,
                label_theme_id: label,
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn appeals_round_trip(records in appeals(), semicolon in any::<bool>()) {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("appeals.csv");
        let mapping = ColumnMapping {
            delimiter: if semicolon { ';' } else { ',' },
            ..ColumnMapping::appeals()
        };
        write_appeals(&path, &records, &mapping).unwrap();
        prop_assert_eq!(load_appeals(&path, &mapping).unwrap(), records);
    }

    #[test]
    fn themes_round_trip(texts in prop::collection::vec(field(), 1..10)) {
        let catalog = ThemeCatalog::new(
            texts.into_iter()
                .enumerate()
                .map(|(i, text)| ThemeRecord { id: format!("T{i}"), text })
                .collect(),
        )
        .unwrap();
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("themes.csv");
        write_themes(&path, &catalog, &ColumnMapping::themes()).unwrap();
        let loaded = load_themes(&path, &ColumnMapping::themes()).unwrap();
        prop_assert_eq!(loaded.as_slice(), catalog.as_slice());
    }

    #[test]
    fn stats_ignore_document_order(
        (docs, shuffled) in prop::collection::vec("[a-z ]{0,30}", 1..20).prop_flat_map(|d| {
            (Just(d.clone()), Just(d).prop_shuffle())
        })
    ) {
        let a = corpus_stats(&docs).unwrap();
        prop_assert_eq!(&a, &corpus_stats(&shuffled).unwrap());
        prop_assert!(a.min_words as f64 <= a.median_words && a.median_words <= a.max_words as f64);
        prop_assert!(a.doc_count >= 1);
    }

    #[test]
    fn labels_in_the_catalog_resolve(records in appeals()) {
        let catalog = ThemeCatalog::new(
            (0..5).map(|i| ThemeRecord { id: format!("T{i}"), text: "texto".into() }).collect(),
        )
        .unwrap();
        let gold = resolve_labels(&records, &catalog);
        for a in &records {
            match a.label_theme_id.as_deref() {
                Some(l) if catalog.contains(l) => prop_assert_eq!(gold.get(&a.id), Some(l)),
                _ => prop_assert_eq!(gold.get(&a.id), None),
            }
        }
    }
}
