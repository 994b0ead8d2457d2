//! `glare`: classify appeals against a theme catalog, evaluate labeled
//! corpora, sweep experiment grids and describe corpora.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use glare::config::RunConfig;
use glare::corpus::{corpus_stats, load_appeals, load_themes, resolve_labels, ColumnMapping};
use glare::grid::{evaluate_config, run_grid};
use glare::io::write_atomic;
use glare::ranking::{write_rankings, write_rankings_file, Pipeline};
use glare::{AppealRecord, GoldLabels, Representation, SimilarityMethod, ThemeCatalog};

#[derive(Parser)]
#[command(author, version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank the themes for one appeal (inline text) or for every appeal in a file
    Classify {
        /// Appeal text to classify instead of an appeals file
        #[arg(long, conflicts_with = "appeals")]
        text: Option<String>,
        /// Print machine-readable rows instead of a table
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Classify a labeled corpus and report recall, precision, MAP, F1 and NDCG at k
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run every cell of the experiment grid from the run file
    Grid {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Word-count statistics of a corpus file
    Stats {
        /// Corpus file; read with the appeal column mapping, label not required
        file: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    #[arg(long)]
    appeals: Option<PathBuf>,
    #[arg(long)]
    themes: Option<PathBuf>,
    /// TOML run file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    /// fulltext, lexrank or guided_lexrank
    #[arg(long)]
    representation: Option<Representation>,
    #[arg(long)]
    summary_size: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// bm25 or cosine
    #[arg(long)]
    similarity: Option<SimilarityMethod>,
    #[arg(long)]
    remove_terms: Option<bool>,
    /// Precomputed embeddings for cosine similarity (id<TAB>v1,v2,...)
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for per-appeal work
    #[arg(long)]
    parallel: Option<usize>,
}

impl CommonArgs {
    fn run_config(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(p) = &self.appeals {
            config.data.appeals = Some(p.clone());
        }
        if let Some(p) = &self.themes {
            config.data.themes = Some(p.clone());
        }
        if let Some(k) = self.k {
            config.pipeline.k = k;
        }
        if let Some(r) = self.representation {
            config.pipeline.representation = r;
        }
        if let Some(s) = self.summary_size {
            config.summary.size = s;
        }
        if let Some(a) = self.alpha {
            config.summary.alpha = a;
        }
        if let Some(b) = self.beta {
            config.summary.beta = b;
        }
        if let Some(s) = self.similarity {
            config.pipeline.similarity = s;
        }
        if let Some(r) = self.remove_terms {
            config.preprocess.remove_terms = r;
        }
        if let Some(e) = &self.embeddings {
            config.pipeline.embeddings = Some(e.clone());
        }
        if let Some(p) = self.parallel {
            config.pipeline.parallel = p;
        }
        Ok(config)
    }
}

fn themes_of(config: &RunConfig) -> Result<ThemeCatalog> {
    let path = config
        .data
        .themes
        .as_deref()
        .context("no themes file (use --themes or [data] themes)")?;
    Ok(load_themes(path, &config.data.theme_columns)?)
}

fn appeals_of(config: &RunConfig) -> Result<Vec<AppealRecord>> {
    let path = config
        .data
        .appeals
        .as_deref()
        .context("no appeals file (use --appeals or [data] appeals)")?;
    Ok(load_appeals(path, &config.data.appeal_columns)?)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn cmd_classify(text: Option<String>, csv: bool, common: &CommonArgs) -> Result<()> {
    let config = common.run_config()?;
    let themes = themes_of(&config)?;
    let (appeals, gold) = match text {
        Some(text) => (
            vec![AppealRecord {
                id: "inline".into(),
                raw_text: text,
                label_theme_id: None,
            }],
            GoldLabels::default(),
        ),
        None => {
            let appeals = appeals_of(&config)?;
            let gold = resolve_labels(&appeals, &themes);
            (appeals, gold)
        }
    };

    let pipeline = Pipeline::new(&themes, config.pipeline_config()?)?;
    let run = pipeline.classify_corpus(&appeals, config.pipeline.parallel);
    for f in &run.failures {
        eprintln!("warning: appeal `{}` failed: {}", f.appeal_id, f.message);
    }
    if run.rankings.is_empty() {
        bail!("no appeal could be classified");
    }

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if csv {
        write_rankings(&mut out, &run.rankings, &gold)?;
    } else {
        for ranking in &run.rankings {
            writeln!(out, "appeal {}", ranking.appeal_id)?;
            writeln!(out, "{:>4}  {:<16} {:>12}", "rank", "theme", "score")?;
            for (i, (theme, score)) in ranking.entries.iter().enumerate() {
                writeln!(out, "{:>4}  {:<16} {:>12.6}", i + 1, theme, score)?;
            }
        }
    }
    if let Some(dir) = &common.out {
        ensure_dir(dir)?;
        write_rankings_file(&dir.join("rankings.csv"), &run.rankings, &gold)?;
    }
    Ok(())
}

fn cmd_evaluate(common: &CommonArgs) -> Result<()> {
    let config = common.run_config()?;
    let themes = themes_of(&config)?;
    let appeals = appeals_of(&config)?;
    let gold = resolve_labels(&appeals, &themes);
    if !gold.unresolved.is_empty() {
        eprintln!(
            "warning: {} appeal(s) carry labels missing from the catalog; skipped",
            gold.unresolved.len()
        );
    }

    let pipeline_config = config.pipeline_config()?;
    let (run, report) =
        evaluate_config(&appeals, &themes, &gold, &pipeline_config, config.pipeline.parallel)?;
    for f in &run.failures {
        eprintln!("warning: appeal `{}` failed: {}", f.appeal_id, f.message);
    }

    let json = report.to_json();
    print!("{json}");
    if let Some(dir) = &common.out {
        ensure_dir(dir)?;
        write_atomic(&dir.join("metrics.json"), json.as_bytes())?;
        write_rankings_file(&dir.join("rankings.csv"), &run.rankings, &gold)?;
    }
    Ok(())
}

fn cmd_grid(common: &CommonArgs) -> Result<()> {
    let config = common.run_config()?;
    let themes = themes_of(&config)?;
    let appeals = appeals_of(&config)?;
    let gold = resolve_labels(&appeals, &themes);
    let grid = config.experiment_grid()?;
    let base = config.pipeline_config()?;
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from("grid_out"));
    ensure_dir(&out)?;

    let report = run_grid(
        &grid,
        &base,
        &appeals,
        &themes,
        &gold,
        config.pipeline.parallel,
        Some(&out),
        |done, total, row| match &row.outcome {
            Ok(r) => eprintln!(
                "[{done}/{total}] {} recall@{}={:.4} map@{}={:.4} ndcg@{}={:.4} ({:.1}s)",
                row.descriptor,
                r.metrics.k,
                r.metrics.recall_at_k,
                r.metrics.k,
                r.metrics.map_at_k,
                r.metrics.k,
                r.metrics.ndcg_at_k,
                row.seconds
            ),
            Err(e) => eprintln!("[{done}/{total}] {} failed: {e}", row.descriptor),
        },
    )?;
    print!("{}", report.summary_csv());
    Ok(())
}

fn cmd_stats(file: Option<PathBuf>, common: &CommonArgs) -> Result<()> {
    let config = common.run_config()?;
    let (path, mapping) = match (file, &common.themes, &common.appeals) {
        (Some(f), _, _) => (
            f,
            ColumnMapping {
                label: None,
                ..config.data.appeal_columns.clone()
            },
        ),
        (None, Some(t), _) => (t.clone(), config.data.theme_columns.clone()),
        (None, None, Some(a)) => (a.clone(), config.data.appeal_columns.clone()),
        (None, None, None) => bail!("no corpus file given"),
    };
    let docs = load_appeals(&path, &ColumnMapping { label: None, ..mapping })?;
    let stats = corpus_stats(&docs).with_context(|| format!("{}", path.display()))?;
    println!("{}", serde_json::to_string_pretty(&stats)?);
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Classify { text, csv, common } => cmd_classify(text, csv, &common),
        Command::Evaluate { common } => cmd_evaluate(&common),
        Command::Grid { common } => cmd_grid(&common),
        Command::Stats { file, common } => cmd_stats(file, &common),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
