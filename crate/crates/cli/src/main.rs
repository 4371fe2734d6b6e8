use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nsfilter::eval::{evaluate, parse_queries, Qrels};
use nsfilter::{
    execute, render_results, CorrelationTable, Error, IndexArtifact, IndexBuilder, NamespaceMap, QueryConfig, Stopwords,
};
use walkdir::WalkDir;

#[derive(Parser)]
#[command(
    name = "nsfilter",
    version,
    about = "Namespace-filtered keyword retrieval over XML elements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index from every .xml file under a directory
    Index {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Tab-separated `uri<TAB>label` overrides for namespace labels
        #[arg(long)]
        ns_map: Option<PathBuf>,
        /// One stopword per line, replacing the built-in list
        #[arg(long)]
        stopwords: Option<PathBuf>,
        /// Concept-space dimensions
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Run one query and print the ranked elements
    Query {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        query: String,
        #[command(flatten)]
        params: QueryParams,
        /// Score every element, ignoring namespace correlations
        #[arg(long)]
        no_filter: bool,
        /// Tab-separated `label<TAB>keyword<TAB>correlation` table used
        /// instead of the concept space
        #[arg(long)]
        corr_table: Option<PathBuf>,
    },
    /// Compare filtered and unfiltered runs and score them against judgments
    Eval {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        qrels: PathBuf,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// Write the report here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        params: QueryParams,
    },
}

#[derive(Args)]
struct QueryParams {
    #[arg(long, default_value_t = 0.9)]
    lambda1: f64,
    #[arg(long, default_value_t = 0.6)]
    lambda2: f64,
    #[arg(long, default_value_t = 0.9)]
    a1: f64,
    #[arg(long, default_value_t = 0.1)]
    a2: f64,
    /// Number of results to keep
    #[arg(long, default_value_t = 20)]
    top: usize,
    /// Concept-space dimensions to use, at most the index's
    #[arg(long)]
    k: Option<usize>,
    /// Stopword file matching the one the index was built with
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Lib { file: Option<PathBuf>, error: Error },
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure::Lib { file: None, error }
    }
}

trait InFile<T> {
    fn in_file(self, path: &Path) -> Result<T, Failure>;
}

impl<T> InFile<T> for nsfilter::Result<T> {
    fn in_file(self, path: &Path) -> Result<T, Failure> {
        self.map_err(|error| Failure::Lib {
            file: Some(path.to_path_buf()),
            error,
        })
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
        .map_err(Failure::from)
}

fn config(params: &QueryParams) -> Result<QueryConfig, Failure> {
    let usage = |e: Error| Failure::Usage(e.to_string());
    let mut cfg = QueryConfig::new(params.lambda1, params.lambda2, params.a1, params.a2)
        .map_err(usage)?
        .with_top_k(params.top)
        .map_err(usage)?;
    if let Some(k) = params.k {
        cfg = cfg.with_rank(k).map_err(usage)?;
    }
    if let Some(path) = &params.stopwords {
        cfg = cfg.with_stopwords(Stopwords::parse(&read(path)?));
    }
    Ok(cfg)
}

fn load_index(path: &Path) -> Result<IndexArtifact, Failure> {
    IndexArtifact::load(path).in_file(path)
}

fn xml_files(dir: &Path) -> Result<Vec<(String, PathBuf)>, Failure> {
    let mut files = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(dir).to_path_buf();
            Failure::from(Error::Io { path, source: e.into() })
        })?;
        let path = entry.path();
        if !entry.file_type().is_file() || path.extension().is_none_or(|x| x != "xml") {
            continue;
        }
        let relative = path.strip_prefix(dir).unwrap_or(path);
        let id = relative
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        files.push((id, path.to_path_buf()));
    }
    Ok(files)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| {
            Failure::from(Error::Io {
                path: path.to_path_buf(),
                source,
            })
        }),
        None => {
            let mut stdout = io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush());
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Index {
            input,
            out,
            ns_map,
            stopwords,
            k,
        } => {
            if k == 0 {
                return Err(Failure::Usage("--k must be at least 1".into()));
            }
            let ns_map = match &ns_map {
                Some(path) => NamespaceMap::parse(&read(path)?, &path.display().to_string())?,
                None => NamespaceMap::new(),
            };
            let stopwords = match &stopwords {
                Some(path) => Stopwords::parse(&read(path)?),
                None => Stopwords::default(),
            };
            let mut builder = IndexBuilder::new(ns_map, stopwords, k);
            for (id, path) in xml_files(&input)? {
                builder.add_document(&id, &read(&path)?).in_file(&path)?;
            }
            let index = builder.build().in_file(&input)?;
            index.save(&out)?;
            Ok(())
        }
        Command::Query {
            index,
            query,
            params,
            no_filter,
            corr_table,
        } => {
            let mut cfg = config(&params)?.with_filter(!no_filter);
            if let Some(path) = &corr_table {
                let table = CorrelationTable::parse(&read(path)?, &path.display().to_string())?;
                cfg = cfg.with_correlation_override(table);
            }
            let artifact = load_index(&index)?;
            let outcome = execute(&artifact, &query, &cfg)?;
            emit(None, &render_results(&outcome.results))
        }
        Command::Eval {
            index,
            queries,
            qrels,
            reps,
            out,
            params,
        } => {
            if reps < 3 {
                return Err(Failure::Usage("--reps must be at least 3".into()));
            }
            let cfg = config(&params)?;
            let artifact = load_index(&index)?;
            let queries = parse_queries(&read(&queries)?, &queries.display().to_string())?;
            let judgments = Qrels::parse(&read(&qrels)?, &qrels.display().to_string())?;
            judgments.validate(&artifact).in_file(&qrels)?;
            let report = evaluate(&artifact, &queries, Some(&judgments), &cfg, reps)?;
            emit(out.as_deref(), &report.to_tsv())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(Failure::Lib { file, error }) => {
            let names_its_file = matches!(error, Error::Io { .. } | Error::InputFormat { .. });
            match file {
                Some(path) if !names_its_file => eprintln!("error: {}: {error}", path.display()),
                _ => eprintln!("error: {error}"),
            }
            ExitCode::from(if error.is_internal() { 3 } else { 2 })
        }
    }
}
