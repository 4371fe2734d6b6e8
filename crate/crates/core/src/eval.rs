//! Precision/recall against relevance judgments, and filtered versus
//! unfiltered timing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::dewey::DeweyId;
use crate::engine::{execute, QueryConfig, QueryOutcome, ScoredElement};
use crate::error::{Error, Result};
use crate::format::format_sig9;
use crate::index::IndexArtifact;

/// (document id, Dewey id)
pub type ElementKey = (String, DeweyId);

/// Query id → relevant elements.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels(pub BTreeMap<String, BTreeSet<ElementKey>>);

impl Qrels {
    /// Parses `query-id<TAB>doc-id<TAB>dewey` lines; `#` starts a comment line.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut qrels = Qrels::default();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let bad = |message: String| Error::InputFormat {
                path: source.to_string(),
                line: idx + 1,
                message,
            };
            let fields: Vec<&str> = line.split('\t').collect();
            let [qid, doc, dewey] = fields[..] else {
                return Err(bad("expected `query-id<TAB>doc-id<TAB>dewey`".into()));
            };
            let dewey: DeweyId = dewey.trim().parse().map_err(|e: Error| bad(e.to_string()))?;
            qrels
                .0
                .entry(qid.to_string())
                .or_default()
                .insert((doc.to_string(), dewey));
        }
        Ok(qrels)
    }

    pub fn relevant(&self, query_id: &str) -> Option<&BTreeSet<ElementKey>> {
        self.0.get(query_id)
    }

    /// Every judged element must exist in `index`.
    pub fn validate(&self, index: &IndexArtifact) -> Result<()> {
        for (qid, set) in &self.0 {
            for (doc, dewey) in set {
                if index.find(doc, dewey).is_none() {
                    return Err(Error::Domain(format!(
                        "qrels for `{qid}` reference {doc}#{dewey}, which is not in the index"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Parses `query-id<TAB>query text` lines.
pub fn parse_queries(text: &str, source: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let (qid, q) = line.split_once('\t').ok_or_else(|| Error::InputFormat {
            path: source.to_string(),
            line: idx + 1,
            message: "expected `query-id<TAB>query text`".into(),
        })?;
        out.push((qid.to_string(), q.to_string()));
    }
    Ok(out)
}

/// Counts behind precision and recall: (relevant retrieved in top-K,
/// retrieved considered, total relevant).
pub fn match_counts(results: &[ElementKey], relevant: &BTreeSet<ElementKey>, cutoff: usize) -> (usize, usize, usize) {
    let top = &results[..cutoff.min(results.len())];
    let hits = top.iter().filter(|r| relevant.contains(*r)).count();
    (hits, top.len(), relevant.len())
}

/// precision = hits / min(K, |results|), recall = hits / |relevant|; each is
/// 0 when its denominator is 0.
pub fn precision_recall(results: &[ElementKey], relevant: &BTreeSet<ElementKey>, cutoff: usize) -> (f64, f64) {
    assert!(cutoff >= 1, "cutoff must be at least 1");
    let (hits, retrieved, total) = match_counts(results, relevant, cutoff);
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    (ratio(hits, retrieved), ratio(hits, total))
}

pub fn result_keys(results: &[ScoredElement]) -> Vec<ElementKey> {
    results.iter().map(|r| (r.doc.clone(), r.dewey.clone())).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryReport {
    pub query_id: String,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub filtered_time: Duration,
    pub unfiltered_time: Duration,
    pub filtered_candidates: usize,
    pub unfiltered_candidates: usize,
    /// Top-K of the filtered run.
    pub results: Vec<ScoredElement>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub queries: Vec<QueryReport>,
}

impl EvalReport {
    fn mean(&self, pick: impl Fn(&QueryReport) -> Option<f64>) -> Option<f64> {
        let xs: Vec<f64> = self.queries.iter().filter_map(pick).collect();
        (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
    }

    pub fn mean_precision(&self) -> Option<f64> {
        self.mean(|q| q.precision)
    }

    pub fn mean_recall(&self) -> Option<f64> {
        self.mean(|q| q.recall)
    }

    /// Tab-separated table with a header and a trailing `MEAN` row.
    pub fn to_tsv(&self) -> String {
        let opt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), format_sig9);
        let ms = |d: Duration| format!("{:.3}", d.as_secs_f64() * 1e3);
        let mut out = String::from(
            "query\tprecision\trecall\tcandidates_filtered\tcandidates_unfiltered\tms_filtered\tms_unfiltered\n",
        );
        for q in &self.queries {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                q.query_id,
                opt(q.precision),
                opt(q.recall),
                q.filtered_candidates,
                q.unfiltered_candidates,
                ms(q.filtered_time),
                ms(q.unfiltered_time)
            );
        }
        if !self.queries.is_empty() {
            let n = self.queries.len() as u32;
            let total = |f: fn(&QueryReport) -> Duration| self.queries.iter().map(f).sum::<Duration>() / n;
            let _ = writeln!(
                out,
                "MEAN\t{}\t{}\t-\t-\t{}\t{}",
                opt(self.mean_precision()),
                opt(self.mean_recall()),
                ms(total(|q| q.filtered_time)),
                ms(total(|q| q.unfiltered_time))
            );
        }
        out
    }
}

struct ModeRun {
    median: Duration,
    outcome: QueryOutcome,
}

fn run_mode(index: &IndexArtifact, query: &str, cfg: &QueryConfig, repetitions: usize) -> Result<ModeRun> {
    let mut times = Vec::with_capacity(repetitions);
    let mut first: Option<QueryOutcome> = None;
    for _ in 0..repetitions {
        let start = Instant::now();
        let outcome = match execute(index, query, cfg) {
            Ok(o) => o,
            Err(Error::EmptyQueryAfterStopwords(_)) => QueryOutcome {
                results: vec![],
                candidate_count: 0,
            },
            Err(e) => return Err(e),
        };
        times.push(start.elapsed());
        match &first {
            None => first = Some(outcome),
            Some(f) if *f != outcome => {
                return Err(Error::Invariant(format!(
                    "query `{query}` produced different results across repetitions"
                )))
            }
            Some(_) => {}
        }
    }
    times.sort();
    Ok(ModeRun {
        median: times[times.len() / 2],
        outcome: first.expect("at least one repetition"),
    })
}

/// Runs every query with the filter on and off, `repetitions` times each,
/// recording median wall time, |A| and, when judgments are given,
/// precision/recall of the filtered top-K. Queries run sequentially.
pub fn evaluate(
    index: &IndexArtifact,
    queries: &[(String, String)],
    qrels: Option<&Qrels>,
    cfg: &QueryConfig,
    repetitions: usize,
) -> Result<EvalReport> {
    if repetitions < 3 {
        return Err(Error::InvalidConfig("timing needs at least 3 repetitions".into()));
    }
    let filtered_cfg = cfg.clone().with_filter(true);
    let unfiltered_cfg = cfg.clone().with_filter(false);
    let mut report = EvalReport::default();
    for (qid, text) in queries {
        let filtered = run_mode(index, text, &filtered_cfg, repetitions)?;
        let unfiltered = run_mode(index, text, &unfiltered_cfg, repetitions)?;
        let (precision, recall) = match qrels {
            Some(q) => {
                let empty = BTreeSet::new();
                let relevant = q.relevant(qid).unwrap_or(&empty);
                let (p, r) = precision_recall(&result_keys(&filtered.outcome.results), relevant, cfg.top_k());
                (Some(p), Some(r))
            }
            None => (None, None),
        };
        report.queries.push(QueryReport {
            query_id: qid.clone(),
            precision,
            recall,
            filtered_time: filtered.median,
            unfiltered_time: unfiltered.median,
            filtered_candidates: filtered.outcome.candidate_count,
            unfiltered_candidates: unfiltered.outcome.candidate_count,
            results: filtered.outcome.results,
        });
    }
    Ok(report)
}

pub fn timing_compare(
    index: &IndexArtifact,
    queries: &[(String, String)],
    cfg: &QueryConfig,
    repetitions: usize,
) -> Result<EvalReport> {
    evaluate(index, queries, None, cfg, repetitions)
}
