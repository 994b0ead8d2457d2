//! Experiment grids: every combination of preprocessing, representation,
//! summary size, centrality variant and similarity method, each evaluated
//! over a labeled corpus.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::corpus::{AppealRecord, GoldLabels, ThemeCatalog};
use crate::error::{Error, Result};
use crate::eval::{evaluate_run, MetricReport};
use crate::io::write_atomic;
use crate::lexrank::CentralityVariant;
use crate::ranking::{write_rankings_file, CorpusRun, Pipeline, PipelineConfig, Representation};
use crate::similarity::SimilarityMethod;

/// Order of the per-appeal stages, recorded in every report.
pub const PIPELINE_ORDER: &str = "extract_core>remove_noise>segment_sentences>summarize>score";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreprocessOption {
    Remove,
    Keep,
}

impl PreprocessOption {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Remove => "remove",
            Self::Keep => "keep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentGrid {
    pub preprocess: Vec<PreprocessOption>,
    pub representations: Vec<Representation>,
    pub summary_sizes: Vec<usize>,
    pub similarity: Vec<SimilarityMethod>,
    pub centrality: Vec<CentralityVariant>,
}

/// One configuration of the grid. Full-text cells carry no summary size or
/// centrality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridCell {
    pub preprocess: PreprocessOption,
    pub representation: Representation,
    pub summary_size: Option<usize>,
    pub centrality: Option<CentralityVariant>,
    pub similarity: SimilarityMethod,
}

impl GridCell {
    /// Unique, filename-safe label such as `remove-guided_lexrank-15-degree-bm25`.
    pub fn descriptor(&self) -> String {
        let mut parts = vec![self.preprocess.as_str().to_owned(), self.representation.as_str().to_owned()];
        if let Some(size) = self.summary_size {
            parts.push(size.to_string());
        }
        if let Some(c) = self.centrality {
            parts.push(centrality_name(c).to_owned());
        }
        parts.push(self.similarity.as_str().to_owned());
        parts.join("-")
    }

    /// The base configuration with this cell's axes applied.
    pub fn apply(&self, base: &PipelineConfig) -> PipelineConfig {
        let mut config = base.clone();
        config.preprocess.remove_terms = self.preprocess == PreprocessOption::Remove;
        config.representation = self.representation;
        config.similarity = self.similarity;
        if let Some(size) = self.summary_size {
            config.summary.size = size;
        }
        if let Some(c) = self.centrality {
            config.summary.centrality = c;
        }
        config
    }
}

fn centrality_name(c: CentralityVariant) -> &'static str {
    match c {
        CentralityVariant::Degree => "degree",
        CentralityVariant::Continuous => "continuous",
    }
}

impl ExperimentGrid {
    pub fn validate(&self) -> Result<()> {
        let empty = |axis: &str| Err(Error::Config(format!("grid axis `{axis}` is empty")));
        if self.preprocess.is_empty() {
            return empty("preprocess");
        }
        if self.representations.is_empty() {
            return empty("representations");
        }
        if self.similarity.is_empty() {
            return empty("similarity");
        }
        let summarizes = self.representations.iter().any(|r| r.summary_mode().is_some());
        if summarizes && self.summary_sizes.is_empty() {
            return empty("summary_sizes");
        }
        if summarizes && self.centrality.is_empty() {
            return empty("centrality");
        }
        if self.summary_sizes.contains(&0) {
            return Err(Error::Config("summary sizes must be positive".into()));
        }
        let cells = self.cells();
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = cells.iter().find(|c| !seen.insert(c.descriptor())) {
            return Err(Error::Config(format!("grid repeats cell `{}`", dup.descriptor())));
        }
        Ok(())
    }

    /// Cells in declared order: preprocess, representation, size,
    /// centrality, similarity. Full text contributes one cell per
    /// (preprocess, similarity).
    pub fn cells(&self) -> Vec<GridCell> {
        let mut cells = Vec::new();
        for &preprocess in &self.preprocess {
            for &representation in &self.representations {
                let variants: Vec<(Option<usize>, Option<CentralityVariant>)> =
                    if representation.summary_mode().is_none() {
                        vec![(None, None)]
                    } else {
                        self.summary_sizes
                            .iter()
                            .flat_map(|&s| self.centrality.iter().map(move |&c| (Some(s), Some(c))))
                            .collect()
                    };
                for (summary_size, centrality) in variants {
                    for &similarity in &self.similarity {
                        cells.push(GridCell {
                            preprocess,
                            representation,
                            summary_size,
                            centrality,
                            similarity,
                        });
                    }
                }
            }
        }
        cells
    }
}

/// Metrics of one configuration, with the bookkeeping needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub representation: Representation,
    pub similarity: SimilarityMethod,
    pub remove_terms: bool,
    pub summary_size: Option<usize>,
    pub centrality: Option<CentralityVariant>,
    pub alpha: f64,
    pub beta: f64,
    pub pipeline_order: String,
    /// Labeled appeals whose classification failed; counted as misses.
    pub failed: usize,
    #[serde(flatten)]
    pub metrics: MetricReport,
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Classifies the appeals that carry a resolvable label and scores the
/// rankings. Appeals without one are counted in `skipped`.
pub fn evaluate_config(
    appeals: &[AppealRecord],
    themes: &ThemeCatalog,
    gold: &GoldLabels,
    config: &PipelineConfig,
    threads: usize,
) -> Result<(CorpusRun, EvaluationReport)> {
    let labeled: Vec<AppealRecord> = appeals
        .iter()
        .filter(|a| gold.get(&a.id).is_some())
        .cloned()
        .collect();
    let skipped = appeals.len() - labeled.len();
    if labeled.is_empty() {
        return Err(Error::NothingToEvaluate { skipped });
    }

    let run = Pipeline::new(themes, config.clone())?.classify_corpus(&labeled, threads);
    let mut metrics = evaluate_run(&run.rankings_with_failures(), gold, config.k)?;
    metrics.skipped += skipped;

    let summarizes = config.representation.summary_mode().is_some();
    let report = EvaluationReport {
        representation: config.representation,
        similarity: config.similarity,
        remove_terms: config.preprocess.remove_terms,
        summary_size: summarizes.then_some(config.summary.size),
        centrality: summarizes.then_some(config.summary.centrality),
        alpha: config.summary.alpha,
        beta: config.summary.beta,
        pipeline_order: PIPELINE_ORDER.to_owned(),
        failed: run.failures.len(),
        metrics,
    };
    Ok((run, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub cell: GridCell,
    pub descriptor: String,
    pub outcome: std::result::Result<EvaluationReport, String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridReport {
    pub rows: Vec<GridRow>,
}

const SUMMARY_HEADER: &[&str] = &[
    "descriptor", "preprocess", "representation", "summary_size", "centrality", "similarity",
    "recall_at_k", "precision_at_k", "map_at_k", "f1", "ndcg_at_k", "k", "query_count",
    "skipped", "failed", "seconds", "error",
];

const SCATTER_HEADER: &[&str] = &[
    "descriptor", "representation", "summary_size", "similarity", "recall_at_k", "map_at_k",
    "ndcg_at_k",
];

impl GridReport {
    /// Delimited table with one row per cell.
    pub fn summary_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(SUMMARY_HEADER).expect("in-memory write");
        for row in &self.rows {
            let c = &row.cell;
            let mut record = vec![
                row.descriptor.clone(),
                c.preprocess.as_str().to_owned(),
                c.representation.as_str().to_owned(),
                c.summary_size.map(|s| s.to_string()).unwrap_or_default(),
                c.centrality.map(|v| centrality_name(v).to_owned()).unwrap_or_default(),
                c.similarity.as_str().to_owned(),
            ];
            match &row.outcome {
                Ok(r) => {
                    let m = &r.metrics;
                    record.extend(
                        [m.recall_at_k, m.precision_at_k, m.map_at_k, m.f1, m.ndcg_at_k]
                            .map(|v| v.to_string()),
                    );
                    record.extend([m.k, m.query_count, m.skipped, r.failed].map(|v| v.to_string()));
                    record.push(format!("{:.3}", row.seconds));
                    record.push(String::new());
                }
                Err(e) => {
                    record.extend(std::iter::repeat_n(String::new(), 9));
                    record.push(format!("{:.3}", row.seconds));
                    record.push(e.clone());
                }
            }
            w.write_record(&record).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    /// `(recall@k, map@k, ndcg@k)` per successful cell, for scatter plots.
    pub fn scatter_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(SCATTER_HEADER).expect("in-memory write");
        for row in &self.rows {
            let Ok(r) = &row.outcome else { continue };
            let m = &r.metrics;
            w.write_record([
                row.descriptor.clone(),
                row.cell.representation.as_str().to_owned(),
                row.cell.summary_size.map(|s| s.to_string()).unwrap_or_default(),
                row.cell.similarity.as_str().to_owned(),
                m.recall_at_k.to_string(),
                m.map_at_k.to_string(),
                m.ndcg_at_k.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Runs every cell in order. A failing cell is recorded and the grid moves
/// on. With `out_dir`, each cell's rankings and metrics land in
/// `out_dir/cells/<descriptor>/` as soon as the cell finishes.
#[allow(clippy::too_many_arguments)]
pub fn run_grid(
    grid: &ExperimentGrid,
    base: &PipelineConfig,
    appeals: &[AppealRecord],
    themes: &ThemeCatalog,
    gold: &GoldLabels,
    threads: usize,
    out_dir: Option<&Path>,
    mut progress: impl FnMut(usize, usize, &GridRow),
) -> Result<GridReport> {
    grid.validate()?;
    let cells = grid.cells();
    let mut report = GridReport::default();
    for (i, cell) in cells.iter().enumerate() {
        let descriptor = cell.descriptor();
        let config = cell.apply(base);
        let started = Instant::now();
        let outcome = evaluate_config(appeals, themes, gold, &config, threads);
        let seconds = started.elapsed().as_secs_f64();

        let outcome = match outcome {
            Ok((run, eval)) => {
                if let Some(dir) = out_dir {
                    let cell_dir = dir.join("cells").join(&descriptor);
                    std::fs::create_dir_all(&cell_dir).map_err(|e| Error::io(&cell_dir, e))?;
                    write_rankings_file(&cell_dir.join("rankings.csv"), &run.rankings, gold)?;
                    write_atomic(&cell_dir.join("metrics.json"), eval.to_json().as_bytes())?;
                }
                Ok(eval)
            }
            Err(e) => Err(e.to_string()),
        };
        let row = GridRow {
            cell: *cell,
            descriptor,
            outcome,
            seconds,
        };
        progress(i + 1, cells.len(), &row);
        report.rows.push(row);
    }

    if let Some(dir) = out_dir {
        write_atomic(&dir.join("grid_summary.csv"), report.summary_csv().as_bytes())?;
        write_atomic(&dir.join("scatter.csv"), report.scatter_csv().as_bytes())?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> ExperimentGrid {
        ExperimentGrid {
            preprocess: vec![PreprocessOption::Remove],
            representations: vec![Representation::GuidedLexrank],
            summary_sizes: vec![10, 15],
            similarity: vec![SimilarityMethod::Bm25, SimilarityMethod::Cosine],
            centrality: vec![CentralityVariant::Degree],
        }
    }

    #[test]
    fn two_sizes_by_two_methods() {
        let cells = grid().cells();
        assert_eq!(cells.len(), 4);
        assert_eq!(cells[0].descriptor(), "remove-guided_lexrank-10-degree-bm25");
        assert_eq!(cells[3].descriptor(), "remove-guided_lexrank-15-degree-cosine");
    }

    #[test]
    fn fulltext_runs_once_per_preprocess_and_method() {
        let g = ExperimentGrid {
            preprocess: vec![PreprocessOption::Remove, PreprocessOption::Keep],
            representations: vec![Representation::Fulltext, Representation::Lexrank],
            summary_sizes: vec![5, 10, 20],
            similarity: vec![SimilarityMethod::Bm25, SimilarityMethod::Cosine],
            centrality: vec![CentralityVariant::Degree],
        };
        let cells = g.cells();
        let fulltext = cells
            .iter()
            .filter(|c| c.representation == Representation::Fulltext)
            .count();
        assert_eq!(fulltext, 4);
        assert_eq!(cells.len(), 4 + 2 * 3 * 2);
        assert!(g.validate().is_ok());
        assert_eq!(cells[0].descriptor(), "remove-fulltext-bm25");
    }

    #[test]
    fn empty_axes_and_duplicates_rejected() {
        let mut g = grid();
        g.similarity.clear();
        assert!(g.validate().is_err());
        let mut g = grid();
        g.summary_sizes = vec![10, 10];
        assert!(g.validate().is_err());
    }

    #[test]
    fn cell_applies_its_axes() {
        let cell = grid().cells()[3];
        let config = cell.apply(&PipelineConfig::default());
        assert_eq!(config.summary.size, 15);
        assert_eq!(config.similarity, SimilarityMethod::Cosine);
        assert!(config.preprocess.remove_terms);
    }
}
