//! Sentence segmentation, tokenization and noise removal.
//!
//! Everything here is a pure function of its input and an immutable
//! [`PreprocessConfig`].

use std::collections::HashSet;
use std::path::Path;

use regex::Regex;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

const PORTUGUESE_STOPWORDS: &str = include_str!("../data/stopwords_pt.txt");

/// Abbreviations after which a period never ends a sentence. Stored without
/// the trailing period.
pub const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "art", "arts", "fl", "fls", "nº", "n", "inc", "incs", "§", "al", "p", "pág", "págs", "dr",
    "dra", "sr", "sra", "min", "rel", "des", "ltda", "cf", "ex", "proc", "v", "fls.", "resp",
    "agrg", "stj", "stf", "trf", "ce", "dec", "ed",
];

/// Named removal rules applied in this order when no override is configured.
pub const DEFAULT_PATTERNS: &[(&str, &str)] = &[
    (
        "process_number",
        r"\b\d{7}-\d{2}\.\d{4}\.\d\.\d{2}\.\d{4}\b",
    ),
    (
        "document_number",
        r"\b(?:\d{3}\.\d{3}\.\d{3}-\d{2}|\d{2}\.\d{3}\.\d{3}/\d{4}-\d{2})\b",
    ),
    ("monetary_value", r"R\$\s*\d{1,3}(?:\.\d{3})*(?:,\d{2})?"),
    ("address", r"(?i)\b(?:rua|avenida|av\.?)\s[^\n]*"),
    ("long_digit_run", r"\b\d{4,}\b"),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
}

/// Normalized terms in document order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    /// Wraps already-tokenized terms, lowercasing them and dropping empties.
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self(
            tokens
                .into_iter()
                .map(|t| t.as_ref().to_lowercase())
                .filter(|t| !t.is_empty())
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn join(&self, sep: &str) -> String {
        self.0.join(sep)
    }
}

impl<'a> IntoIterator for &'a TokenSequence {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Case-insensitive set of words removed by [`remove_noise`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    /// The bundled Portuguese list.
    pub fn portuguese() -> Self {
        Self::parse(PORTUGUESE_STOPWORDS)
    }

    /// One token per line; blank lines and `#` comments are ignored.
    pub fn parse(content: &str) -> Self {
        Self(
            content
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .flat_map(|l| tokenize(l).0)
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&content))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: AsRef<str>> FromIterator<S> for Stopwords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self(iter.into_iter().flat_map(|s| tokenize(s.as_ref()).0).collect())
    }
}

#[derive(Debug, Clone)]
pub struct RemovalPattern {
    pub name: String,
    pub regex: Regex,
}

impl RemovalPattern {
    pub fn new(name: impl Into<String>, pattern: &str) -> Result<Self> {
        let name = name.into();
        let regex = Regex::new(pattern).map_err(|source| Error::Pattern {
            name: name.clone(),
            source,
        })?;
        Ok(Self { name, regex })
    }

    pub fn defaults() -> Vec<Self> {
        DEFAULT_PATTERNS
            .iter()
            .map(|(name, pattern)| Self::new(*name, pattern).expect("default pattern compiles"))
            .collect()
    }
}

/// Phrases that delimit the core of an appeal. Matching ignores case.
#[derive(Debug, Clone, Default)]
pub struct CoreMarkers {
    start: Option<Regex>,
    end: Option<Regex>,
}

impl CoreMarkers {
    pub fn new<S: AsRef<str>>(start: &[S], end: &[S]) -> Result<Self> {
        Ok(Self {
            start: alternation("core_start", start)?,
            end: alternation("core_end", end)?,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.start.is_none() && self.end.is_none()
    }
}

fn alternation<S: AsRef<str>>(name: &str, phrases: &[S]) -> Result<Option<Regex>> {
    let parts: Vec<String> = phrases
        .iter()
        .map(|p| p.as_ref().trim())
        .filter(|p| !p.is_empty())
        .map(regex::escape)
        .collect();
    if parts.is_empty() {
        return Ok(None);
    }
    let pattern = format!("(?i)(?:{})", parts.join("|"));
    Regex::new(&pattern)
        .map(Some)
        .map_err(|source| Error::Pattern {
            name: name.to_owned(),
            source,
        })
}

#[derive(Debug, Clone)]
pub struct PreprocessConfig {
    pub remove_terms: bool,
    pub stopwords: Stopwords,
    pub patterns: Vec<RemovalPattern>,
    pub core_markers: CoreMarkers,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            remove_terms: true,
            stopwords: Stopwords::portuguese(),
            patterns: RemovalPattern::defaults(),
            core_markers: CoreMarkers::default(),
        }
    }
}

/// Returns the span after the first start marker and before the last end
/// marker. Either marker may be absent; with neither, or when the span is
/// blank, the whole text comes back.
pub fn extract_core<'a>(raw_text: &'a str, markers: &CoreMarkers) -> &'a str {
    let begin = markers
        .start
        .as_ref()
        .and_then(|re| re.find(raw_text))
        .map_or(0, |m| m.end());
    let end = markers
        .end
        .as_ref()
        .and_then(|re| re.find_iter(&raw_text[begin..]).last())
        .map_or(raw_text.len(), |m| begin + m.start());

    let span = raw_text[begin..end].trim();
    if span.is_empty() {
        raw_text
    } else {
        span
    }
}

const TERMINALS: &[char] = &['.', '!', '?', '…'];
const CLOSERS: &[char] = &['"', '\'', ')', ']', '»', '”', '’'];

/// Splits text into sentences using [`DEFAULT_ABBREVIATIONS`].
pub fn segment_sentences(text: &str) -> Vec<Sentence> {
    SentenceSplitter::default().split(text)
}

#[derive(Debug, Clone)]
pub struct SentenceSplitter {
    abbreviations: HashSet<String>,
}

impl Default for SentenceSplitter {
    fn default() -> Self {
        Self::new(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl SentenceSplitter {
    pub fn new<I, S>(abbreviations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            abbreviations: abbreviations
                .into_iter()
                .map(|a| a.as_ref().trim_end_matches('.').to_lowercase())
                .collect(),
        }
    }

    pub fn split(&self, text: &str) -> Vec<Sentence> {
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let mut sentences = Vec::new();
        let mut start = 0;
        let mut i = 0;

        while i < chars.len() {
            let (pos, c) = chars[i];
            if !TERMINALS.contains(&c) {
                i += 1;
                continue;
            }
            let mut j = i;
            while j < chars.len() && TERMINALS.contains(&chars[j].1) {
                j += 1;
            }
            while j < chars.len() && CLOSERS.contains(&chars[j].1) {
                j += 1;
            }
            let boundary = chars.get(j).map_or(text.len(), |&(p, _)| p);

            let mut k = j;
            while k < chars.len() && chars[k].1.is_whitespace() {
                k += 1;
            }
            let followed_by_capital = k > j
                && chars
                    .get(k)
                    .is_some_and(|&(_, n)| n.is_uppercase() || n.is_numeric());

            if followed_by_capital && !(c == '.' && self.guards(&text[start..pos])) {
                push_sentence(&mut sentences, &text[start..boundary]);
                start = boundary;
            }
            i = j;
        }
        push_sentence(&mut sentences, &text[start..]);
        sentences
    }

    fn guards(&self, before: &str) -> bool {
        let token = before
            .rsplit(char::is_whitespace)
            .next()
            .unwrap_or("")
            .trim_start_matches(|c: char| !c.is_alphanumeric() && c != '§');
        !token.is_empty() && self.abbreviations.contains(&token.to_lowercase())
    }
}

fn push_sentence(sentences: &mut Vec<Sentence>, fragment: &str) {
    let text = fragment.trim();
    if !text.is_empty() {
        sentences.push(Sentence {
            index: sentences.len(),
            text: text.to_owned(),
        });
    }
}

/// NFKC, except that the ordinal indicators º and ª survive: they carry
/// meaning in abbreviations such as "nº".
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest.find(['º', 'ª']) {
        out.extend(rest[..pos].nfkc());
        let ordinal = rest[pos..].chars().next().expect("found ordinal");
        out.push(ordinal);
        rest = &rest[pos + ordinal.len_utf8()..];
    }
    out.extend(rest.nfkc());
    out
}

/// NFKC-normalized, lowercased terms split at every non-alphanumeric
/// character.
pub fn tokenize(text: &str) -> TokenSequence {
    let folded = normalize(&normalize(text).to_lowercase());
    TokenSequence(
        folded
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_owned)
            .collect(),
    )
}

/// Applies the removal patterns in order, then drops stopwords as whole
/// words. With `remove_terms` off the text is returned unchanged.
pub fn remove_noise(text: &str, config: &PreprocessConfig) -> String {
    if !config.remove_terms {
        return text.to_owned();
    }
    let mut current = normalize(text);
    for pattern in &config.patterns {
        if pattern.regex.is_match(&current) {
            current = pattern.regex.replace_all(&current, " ").into_owned();
        }
    }
    let filtered = drop_stopwords(&current, &config.stopwords);
    collapse_spaces(&filtered)
}

fn drop_stopwords(text: &str, stopwords: &Stopwords) -> String {
    if stopwords.is_empty() {
        return text.to_owned();
    }
    let mut out = String::with_capacity(text.len());
    let mut word_start: Option<usize> = None;
    for (pos, c) in text.char_indices().chain(std::iter::once((text.len(), ' '))) {
        if c.is_alphanumeric() && pos < text.len() {
            word_start.get_or_insert(pos);
            continue;
        }
        if let Some(ws) = word_start.take() {
            push_filtered_word(&mut out, &text[ws..pos], stopwords);
        }
        if pos < text.len() {
            out.push(c);
        }
    }
    out
}

fn push_filtered_word(out: &mut String, word: &str, stopwords: &Stopwords) {
    let tokens = tokenize(word);
    if !tokens.iter().any(|t| stopwords.contains(t)) {
        out.push_str(word);
        return;
    }
    let kept: Vec<&str> = tokens.iter().filter(|t| !stopwords.contains(t)).collect();
    out.push_str(&kept.join(" "));
}

/// Collapses horizontal whitespace to single spaces and trims each line.
fn collapse_spaces(text: &str) -> String {
    text.split('\n')
        .map(|line| line.split_whitespace().collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("\n")
}
