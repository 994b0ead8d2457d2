//! Seeded synthetic corpora: a theme catalog of pseudo-Portuguese vocabulary
//! and long appeals that argue one gold theme throughout while citing other
//! themes in passing among procedural filler.

#![allow(dead_code)]

use std::collections::BTreeSet;

use glare::{AppealRecord, ThemeCatalog, ThemeRecord};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ONSETS: &[&str] = &[
    "b", "c", "d", "f", "g", "l", "m", "n", "p", "r", "s", "t", "v", "br", "cr", "tr", "pr", "gr",
    "fl", "pl", "ch", "lh", "nh",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ã", "é", "ó", "ei", "ou"];
const CODAS: &[&str] = &["", "", "", "s", "r", "l", "m", "ção"];

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub themes: usize,
    pub appeals: usize,
    /// Distinctive words per theme.
    pub theme_words: usize,
    /// Of those, how many the appeal's own argument draws on.
    pub argued_words: usize,
    /// Sentences arguing the gold theme.
    pub argument_sentences: (usize, usize),
    /// Themes cited in passing, and sentences per citation.
    pub cited_themes: (usize, usize),
    pub citation_sentences: (usize, usize),
    /// Procedural filler sentences.
    pub filler_sentences: (usize, usize),
    pub filler_vocabulary: usize,
}

impl SyntheticSpec {
    /// 500 appeals of a few hundred words against 60 themes.
    pub fn desk(seed: u64) -> Self {
        Self {
            seed,
            themes: 60,
            appeals: 500,
            theme_words: 14,
            argued_words: 8,
            argument_sentences: (6, 10),
            cited_themes: (3, 9),
            citation_sentences: (1, 3),
            filler_sentences: (20, 40),
            filler_vocabulary: 600,
        }
    }

    /// Sized like the published corpus: 7,967 appeals of roughly 4,700
    /// words against 190 themes.
    pub fn full_scale(seed: u64) -> Self {
        Self {
            seed,
            themes: 190,
            appeals: 7967,
            theme_words: 14,
            argued_words: 8,
            argument_sentences: (6, 10),
            cited_themes: (3, 9),
            citation_sentences: (1, 3),
            filler_sentences: (345, 445),
            filler_vocabulary: 3000,
        }
    }
}

pub struct SyntheticCorpus {
    pub themes: ThemeCatalog,
    pub appeals: Vec<AppealRecord>,
}

struct Lexicon {
    rng: ChaCha8Rng,
    seen: BTreeSet<String>,
}

impl Lexicon {
    fn word(&mut self) -> String {
        loop {
            let syllables = self.rng.gen_range(2..=4);
            let mut w = String::new();
            for _ in 0..syllables {
                w.push_str(ONSETS.choose(&mut self.rng).unwrap());
                w.push_str(VOWELS.choose(&mut self.rng).unwrap());
            }
            w.push_str(CODAS.choose(&mut self.rng).unwrap());
            if self.seen.insert(w.clone()) {
                return w;
            }
        }
    }

    fn words(&mut self, n: usize) -> Vec<String> {
        (0..n).map(|_| self.word()).collect()
    }
}

fn sentence(words: &[&str]) -> String {
    let mut s = words.join(" ");
    if let Some(first) = s.chars().next() {
        let upper: String = first.to_uppercase().collect();
        s.replace_range(..first.len_utf8(), &upper);
    }
    s.push('.');
    s
}

fn pick<'a, R: Rng>(rng: &mut R, pool: &'a [String], n: usize) -> Vec<&'a str> {
    pool.choose_multiple(rng, n.min(pool.len()))
        .map(String::as_str)
        .collect()
}

pub fn generate(spec: &SyntheticSpec) -> SyntheticCorpus {
    let mut lex = Lexicon {
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        seen: BTreeSet::new(),
    };
    let legal = lex.words(40);
    let filler = lex.words(spec.filler_vocabulary);
    let theme_vocab: Vec<Vec<String>> = (0..spec.themes)
        .map(|_| lex.words(spec.theme_words))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15);

    let themes: Vec<ThemeRecord> = theme_vocab
        .iter()
        .enumerate()
        .map(|(t, vocab)| {
            let mut words: Vec<&str> = vocab.iter().map(String::as_str).collect();
            words.extend(pick(&mut rng, &legal, 8));
            words.shuffle(&mut rng);
            ThemeRecord {
                id: format!("T{:03}", t + 1),
                text: sentence(&words),
            }
        })
        .collect();

    let mut appeals = Vec::with_capacity(spec.appeals);
    for a in 0..spec.appeals {
        let gold = rng.gen_range(0..spec.themes);
        let argued = &theme_vocab[gold][..spec.argued_words];
        let mut sentences: Vec<String> = Vec::new();

        for _ in 0..rng.gen_range(spec.argument_sentences.0..=spec.argument_sentences.1) {
            let mut words = pick(&mut rng, argued, 5);
            words.extend(pick(&mut rng, &legal, 3));
            words.extend(pick(&mut rng, &filler, 4));
            words.shuffle(&mut rng);
            sentences.push(sentence(&words));
        }

        let mut others: Vec<usize> = (0..spec.themes).filter(|&t| t != gold).collect();
        others.shuffle(&mut rng);
        let cited = rng.gen_range(spec.cited_themes.0..=spec.cited_themes.1);
        for &t in others.iter().take(cited) {
            for _ in 0..rng.gen_range(spec.citation_sentences.0..=spec.citation_sentences.1) {
                let mut words = pick(&mut rng, &theme_vocab[t], 8);
                words.extend(pick(&mut rng, &legal, 2));
                words.extend(pick(&mut rng, &filler, 2));
                words.shuffle(&mut rng);
                sentences.push(sentence(&words));
            }
        }

        for _ in 0..rng.gen_range(spec.filler_sentences.0..=spec.filler_sentences.1) {
            let n = rng.gen_range(8..=14);
            let mut words = pick(&mut rng, &filler, n);
            if rng.gen_bool(0.2) {
                words.extend(pick(&mut rng, &legal, 1));
            }
            words.shuffle(&mut rng);
            sentences.push(sentence(&words));
        }

        sentences.shuffle(&mut rng);
        if rng.gen_bool(0.3) {
            sentences.insert(
                0,
                format!(
                    "Processo {:07}-{:02}.{:04}.4.02.5101 na Rua Central, {}.",
                    rng.gen_range(0..10_000_000u32),
                    rng.gen_range(0..100u32),
                    rng.gen_range(2000..2024u32),
                    rng.gen_range(1..999u32)
                ),
            );
        }
        appeals.push(AppealRecord {
            id: format!("A{:05}", a + 1),
            raw_text: sentences.join(" "),
            label_theme_id: Some(themes[gold].id.clone()),
        });
    }

    SyntheticCorpus {
        themes: ThemeCatalog::new(themes).expect("distinct theme ids"),
        appeals,
    }
}
