//! Appeal and theme corpora loaded from delimited files.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppealRecord {
    pub id: String,
    pub raw_text: String,
    /// Theme assigned by a human expert, when known.
    pub label_theme_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThemeRecord {
    pub id: String,
    pub text: String,
}

/// Anything with a body whose words can be counted.
pub trait Document {
    fn body(&self) -> &str;
}

impl Document for AppealRecord {
    fn body(&self) -> &str {
        &self.raw_text
    }
}

impl Document for ThemeRecord {
    fn body(&self) -> &str {
        &self.text
    }
}

impl Document for String {
    fn body(&self) -> &str {
        self
    }
}

impl Document for &str {
    fn body(&self) -> &str {
        self
    }
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Delimiter and header names of a corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnMapping {
    pub delimiter: char,
    pub id: String,
    pub text: String,
    /// Gold theme column for appeals; `None` for theme files or unlabeled data.
    pub label: Option<String>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self::appeals()
    }
}

impl ColumnMapping {
    pub fn appeals() -> Self {
        Self {
            delimiter: ',',
            id: "id".into(),
            text: "text".into(),
            label: Some("theme".into()),
        }
    }

    pub fn themes() -> Self {
        Self {
            label: None,
            ..Self::appeals()
        }
    }

    fn delimiter_byte(&self) -> Result<u8> {
        u8::try_from(self.delimiter)
            .ok()
            .filter(u8::is_ascii)
            .ok_or_else(|| Error::Config(format!("delimiter {:?} is not ASCII", self.delimiter)))
    }
}

struct Row {
    id: String,
    text: String,
    label: Option<String>,
}

fn read_rows(path: &Path, mapping: &ColumnMapping) -> Result<Vec<Row>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(mapping.delimiter_byte()?)
        .has_headers(true)
        .from_reader(std::io::BufReader::new(file));

    let headers = reader.headers().map_err(csv_err)?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().trim_start_matches('\u{feff}') == name)
            .ok_or_else(|| Error::MissingColumn {
                path: path.to_path_buf(),
                column: name.to_owned(),
            })
    };
    let id_col = column(&mapping.id)?;
    let text_col = column(&mapping.text)?;
    let label_col = mapping.label.as_deref().map(column).transpose()?;

    let mut seen = HashSet::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| record.get(i).unwrap_or("").to_owned();

        let id = field(id_col).trim().to_owned();
        if id.is_empty() {
            return Err(Error::EmptyField {
                path: path.to_path_buf(),
                field: "id",
                row: line,
            });
        }
        let text = field(text_col);
        if word_count(&text) == 0 {
            return Err(Error::EmptyField {
                path: path.to_path_buf(),
                field: "text",
                row: line,
            });
        }
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId {
                path: path.to_path_buf(),
                id,
                row: line,
            });
        }
        let label = label_col
            .map(|c| field(c).trim().to_owned())
            .filter(|l| !l.is_empty());
        rows.push(Row {
            id,
            text,
            label,
        });
    }
    Ok(rows)
}

pub fn load_appeals(path: &Path, mapping: &ColumnMapping) -> Result<Vec<AppealRecord>> {
    Ok(read_rows(path, mapping)?
        .into_iter()
        .map(|r| AppealRecord {
            id: r.id,
            raw_text: r.text,
            label_theme_id: r.label,
        })
        .collect())
}

/// Themes keyed by id, in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ThemeCatalog {
    themes: Vec<ThemeRecord>,
    positions: HashMap<String, usize>,
}

impl ThemeCatalog {
    pub fn new(themes: Vec<ThemeRecord>) -> Result<Self> {
        let mut positions = HashMap::with_capacity(themes.len());
        for (i, theme) in themes.iter().enumerate() {
            if word_count(&theme.text) == 0 {
                return Err(Error::EmptyField {
                    path: "<catalog>".into(),
                    field: "text",
                    row: i + 1,
                });
            }
            if positions.insert(theme.id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    path: "<catalog>".into(),
                    id: theme.id.clone(),
                    row: i + 1,
                });
            }
        }
        Ok(Self { themes, positions })
    }

    pub fn len(&self) -> usize {
        self.themes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.themes.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ThemeRecord> {
        self.positions.get(id).map(|&i| &self.themes[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.positions.contains_key(id)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ThemeRecord> {
        self.themes.iter()
    }

    pub fn as_slice(&self) -> &[ThemeRecord] {
        &self.themes
    }
}

impl<'a> IntoIterator for &'a ThemeCatalog {
    type Item = &'a ThemeRecord;
    type IntoIter = std::slice::Iter<'a, ThemeRecord>;

    fn into_iter(self) -> Self::IntoIter {
        self.themes.iter()
    }
}

pub fn load_themes(path: &Path, mapping: &ColumnMapping) -> Result<ThemeCatalog> {
    let themes = read_rows(path, mapping)?
        .into_iter()
        .map(|r| ThemeRecord {
            id: r.id,
            text: r.text,
        })
        .collect();
    // Row-level checks already ran with file line numbers.
    ThemeCatalog::new(themes)
}

/// Gold labels split by whether they resolve against a catalog.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldLabels {
    /// appeal id → theme id, for labels present in the catalog.
    pub resolved: HashMap<String, String>,
    /// Appeals whose label names a theme missing from the catalog.
    pub unresolved: Vec<String>,
    /// Appeals without any label.
    pub unlabeled: Vec<String>,
}

impl GoldLabels {
    pub fn get(&self, appeal_id: &str) -> Option<&str> {
        self.resolved.get(appeal_id).map(String::as_str)
    }
}

pub fn resolve_labels(appeals: &[AppealRecord], catalog: &ThemeCatalog) -> GoldLabels {
    let mut gold = GoldLabels::default();
    for appeal in appeals {
        match &appeal.label_theme_id {
            Some(label) if catalog.contains(label) => {
                gold.resolved.insert(appeal.id.clone(), label.clone());
            }
            Some(_) => gold.unresolved.push(appeal.id.clone()),
            None => gold.unlabeled.push(appeal.id.clone()),
        }
    }
    gold
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub doc_count: usize,
    pub mean_words: f64,
    pub median_words: f64,
    pub min_words: usize,
    pub max_words: usize,
    pub total_bytes: usize,
}

pub fn corpus_stats<D: Document>(docs: &[D]) -> Result<StatsReport> {
    if docs.is_empty() {
        return Err(Error::EmptyCorpus("corpus".into()));
    }
    let mut counts: Vec<usize> = docs.iter().map(|d| word_count(d.body())).collect();
    counts.sort_unstable();
    let n = counts.len();
    let median = if n % 2 == 1 {
        counts[n / 2] as f64
    } else {
        (counts[n / 2 - 1] + counts[n / 2]) as f64 / 2.0
    };
    Ok(StatsReport {
        doc_count: n,
        mean_words: counts.iter().sum::<usize>() as f64 / n as f64,
        median_words: median,
        min_words: counts[0],
        max_words: counts[n - 1],
        total_bytes: docs.iter().map(|d| d.body().len()).sum(),
    })
}

fn writer(path: &Path, mapping: &ColumnMapping) -> Result<csv::Writer<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .delimiter(mapping.delimiter_byte()?)
        .from_writer(file))
}

pub fn write_appeals(path: &Path, appeals: &[AppealRecord], mapping: &ColumnMapping) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = writer(path, mapping)?;
    let mut header = vec![mapping.id.as_str(), mapping.text.as_str()];
    header.extend(mapping.label.as_deref());
    w.write_record(&header).map_err(csv_err)?;
    for a in appeals {
        let mut row = vec![a.id.as_str(), a.raw_text.as_str()];
        if mapping.label.is_some() {
            row.push(a.label_theme_id.as_deref().unwrap_or(""));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_themes(path: &Path, themes: &ThemeCatalog, mapping: &ColumnMapping) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = writer(path, mapping)?;
    w.write_record([mapping.id.as_str(), mapping.text.as_str()])
        .map_err(csv_err)?;
    for t in themes {
        w.write_record([t.id.as_str(), t.text.as_str()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
