//! Declarative run file (TOML). Every section is optional; relative paths
//! resolve against the file's directory.
//!
//! ```toml
//! [data]
//! appeals = "appeals.csv"
//! themes = "themes.csv"
//!
//! [preprocess]
//! remove_terms = true
//! patterns = [{ name = "process_number", regex = '\d{7}-\d{2}' }]
//!
//! [pipeline]
//! representation = "guided_lexrank"
//! similarity = "bm25"
//! k = 6
//!
//! [summary]
//! size = 15
//! alpha = 1.0
//! beta = 1.0
//!
//! [grid]
//! summary_sizes = [5, 10, 15, 30]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bm25::Bm25Params;
use crate::corpus::ColumnMapping;
use crate::error::{Error, Result};
use crate::grid::{ExperimentGrid, PreprocessOption};
use crate::lexrank::{CentralityVariant, SummaryConfig};
use crate::ranking::{EmbeddingSource, PipelineConfig, Representation, DEFAULT_K};
use crate::similarity::SimilarityMethod;
use crate::textproc::{CoreMarkers, PreprocessConfig, RemovalPattern, Stopwords};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSection,
    pub preprocess: PreprocessSection,
    pub pipeline: PipelineSection,
    pub summary: SummaryConfig,
    pub bm25: Bm25Params,
    pub grid: GridSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub appeals: Option<PathBuf>,
    pub themes: Option<PathBuf>,
    pub appeal_columns: ColumnMapping,
    pub theme_columns: ColumnMapping,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            appeals: None,
            themes: None,
            appeal_columns: ColumnMapping::appeals(),
            theme_columns: ColumnMapping::themes(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSpec {
    pub name: String,
    pub regex: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    pub remove_terms: bool,
    /// Replaces the bundled Portuguese list.
    pub stopwords_file: Option<PathBuf>,
    /// Replaces the default removal patterns when present.
    pub patterns: Option<Vec<PatternSpec>>,
    pub core_start_markers: Vec<String>,
    pub core_end_markers: Vec<String>,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        Self {
            remove_terms: true,
            stopwords_file: None,
            patterns: None,
            core_start_markers: Vec::new(),
            core_end_markers: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    pub representation: Representation,
    pub similarity: SimilarityMethod,
    pub k: usize,
    /// Precomputed embeddings for cosine similarity; TF-IDF when absent.
    pub embeddings: Option<PathBuf>,
    pub parallel: usize,
}

impl Default for PipelineSection {
    fn default() -> Self {
        Self {
            representation: Representation::GuidedLexrank,
            similarity: SimilarityMethod::Bm25,
            k: DEFAULT_K,
            embeddings: None,
            parallel: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub preprocess: Vec<PreprocessOption>,
    pub representations: Vec<Representation>,
    pub summary_sizes: Vec<usize>,
    pub similarity: Vec<SimilarityMethod>,
    pub centrality: Vec<CentralityVariant>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            preprocess: vec![PreprocessOption::Remove, PreprocessOption::Keep],
            representations: vec![
                Representation::Fulltext,
                Representation::Lexrank,
                Representation::GuidedLexrank,
            ],
            summary_sizes: vec![5, 10, 15, 20, 30, 40, 50, 60],
            similarity: vec![SimilarityMethod::Bm25, SimilarityMethod::Cosine],
            centrality: vec![CentralityVariant::Degree],
        }
    }
}

impl RunConfig {
    pub fn parse(content: &str) -> Result<Self> {
        toml::from_str(content).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads the file and resolves its relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::parse(&content)?;
        if let Some(base) = path.parent() {
            config.resolve_paths(base);
        }
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        for p in [
            &mut self.data.appeals,
            &mut self.data.themes,
            &mut self.preprocess.stopwords_file,
            &mut self.pipeline.embeddings,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn preprocess_config(&self) -> Result<PreprocessConfig> {
        let section = &self.preprocess;
        let stopwords = match &section.stopwords_file {
            Some(path) => Stopwords::load(path)?,
            None => Stopwords::portuguese(),
        };
        let patterns = match &section.patterns {
            Some(specs) => specs
                .iter()
                .map(|p| RemovalPattern::new(&p.name, &p.regex))
                .collect::<Result<_>>()?,
            None => RemovalPattern::defaults(),
        };
        Ok(PreprocessConfig {
            remove_terms: section.remove_terms,
            stopwords,
            patterns,
            core_markers: CoreMarkers::new(&section.core_start_markers, &section.core_end_markers)?,
        })
    }

    pub fn pipeline_config(&self) -> Result<PipelineConfig> {
        let config = PipelineConfig {
            preprocess: self.preprocess_config()?,
            representation: self.pipeline.representation,
            summary: self.summary.clone(),
            similarity: self.pipeline.similarity,
            bm25: self.bm25,
            k: self.pipeline.k,
            embedding_source: match &self.pipeline.embeddings {
                Some(path) => EmbeddingSource::File(path.clone()),
                None => EmbeddingSource::TfidfFallback,
            },
        };
        config.validate()?;
        Ok(config)
    }

    pub fn experiment_grid(&self) -> Result<ExperimentGrid> {
        let g = &self.grid;
        let grid = ExperimentGrid {
            preprocess: g.preprocess.clone(),
            representations: g.representations.clone(),
            summary_sizes: g.summary_sizes.clone(),
            similarity: g.similarity.clone(),
            centrality: g.centrality.clone(),
        };
        grid.validate()?;
        Ok(grid)
    }
}
