//! Query execution: namespace relevance filtering, tf-ief scoring, overlap
//! merging and the combined correlation/text score.

use std::cmp::Ordering;
use std::collections::HashSet;

use crate::concept::{prefix_correlation, CorrelationProvider, CorrelationTable};
use crate::dewey::DeweyId;
use crate::error::{Error, Result};
use crate::format::format_sig9;
use crate::index::{IndexArtifact, FORMAT_VERSION};
use crate::scoring::{accumulate_values, QueryVector};
use crate::tokenize::{tokenize, Stopwords};

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelevanceClass {
    High,
    Common,
    Irrelevant,
}

impl RelevanceClass {
    pub fn admits(self) -> bool {
        !matches!(self, RelevanceClass::Irrelevant)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryConfig {
    lambda1: f64,
    lambda2: f64,
    a1: f64,
    a2: f64,
    top_k: usize,
    rank: Option<usize>,
    filter_enabled: bool,
    correlation_override: Option<CorrelationTable>,
    stopwords: Stopwords,
}

impl Default for QueryConfig {
    fn default() -> Self {
        QueryConfig {
            lambda1: 0.9,
            lambda2: 0.6,
            a1: 0.9,
            a2: 0.1,
            top_k: 20,
            rank: None,
            filter_enabled: true,
            correlation_override: None,
            stopwords: Stopwords::default(),
        }
    }
}

impl QueryConfig {
    /// Requires `0 ≤ λ2 ≤ λ1 ≤ 1`, `a1 + a2 = 1` and `0 ≤ a2 ≤ a1 ≤ 1`.
    pub fn new(lambda1: f64, lambda2: f64, a1: f64, a2: f64) -> Result<Self> {
        let all_finite = [lambda1, lambda2, a1, a2].iter().all(|x| x.is_finite());
        if !all_finite || !(0.0 <= lambda2 && lambda2 <= lambda1 && lambda1 <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "thresholds must satisfy 0 <= lambda2 <= lambda1 <= 1 (got lambda1 = {lambda1}, lambda2 = {lambda2})"
            )));
        }
        if (a1 + a2 - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidConfig(format!(
                "weights must satisfy a1 + a2 = 1 (got a1 = {a1}, a2 = {a2})"
            )));
        }
        if !(0.0 <= a2 && a2 <= a1 && a1 <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "weights must satisfy 0 <= a2 <= a1 <= 1 (got a1 = {a1}, a2 = {a2})"
            )));
        }
        Ok(QueryConfig {
            lambda1,
            lambda2,
            a1,
            a2,
            ..Self::default()
        })
    }

    pub fn with_top_k(mut self, top_k: usize) -> Result<Self> {
        if top_k == 0 {
            return Err(Error::InvalidConfig("result cutoff K must be at least 1".into()));
        }
        self.top_k = top_k;
        Ok(self)
    }

    /// Concept-space rank used for correlations; defaults to the index's.
    pub fn with_rank(mut self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig("SVD rank k must be at least 1".into()));
        }
        self.rank = Some(k);
        Ok(self)
    }

    pub fn with_filter(mut self, enabled: bool) -> Self {
        self.filter_enabled = enabled;
        self
    }

    pub fn with_correlation_override(mut self, table: CorrelationTable) -> Self {
        self.correlation_override = Some(table);
        self
    }

    pub fn with_stopwords(mut self, stopwords: Stopwords) -> Self {
        self.stopwords = stopwords;
        self
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }
    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }
    pub fn a1(&self) -> f64 {
        self.a1
    }
    pub fn a2(&self) -> f64 {
        self.a2
    }
    pub fn top_k(&self) -> usize {
        self.top_k
    }
    pub fn rank(&self) -> Option<usize> {
        self.rank
    }
    pub fn filter_enabled(&self) -> bool {
        self.filter_enabled
    }
    pub fn correlation_override(&self) -> Option<&CorrelationTable> {
        self.correlation_override.as_ref()
    }
    pub fn stopwords(&self) -> &Stopwords {
        &self.stopwords
    }
}

/// High on `[λ1, 1]`, Common on `[λ2, λ1)`, Irrelevant below `λ2`.
pub fn classify_relevance(corr: f64, cfg: &QueryConfig) -> RelevanceClass {
    if corr >= cfg.lambda1 {
        RelevanceClass::High
    } else if corr >= cfg.lambda2 {
        RelevanceClass::Common
    } else {
        RelevanceClass::Irrelevant
    }
}

/// Mean correlation of `label` over the query terms it is High or Common
/// relevant to, or `None` when no term passes.
pub fn label_correlation<P: CorrelationProvider + ?Sized>(
    label: &str,
    query_terms: &[String],
    cfg: &QueryConfig,
    provider: &P,
) -> Option<f64> {
    let passing: Vec<f64> = query_terms
        .iter()
        .map(|t| prefix_correlation(provider, label, t))
        .filter(|&c| classify_relevance(c, cfg).admits())
        .collect();
    if passing.is_empty() {
        None
    } else {
        Some(passing.iter().sum::<f64>() / passing.len() as f64)
    }
}

/// Set A: element positions in the index with their per-element correlation,
/// in index order.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub members: Vec<(usize, f64)>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, element: usize) -> bool {
        self.members.binary_search_by_key(&element, |&(e, _)| e).is_ok()
    }
}

pub fn build_candidate_set<P: CorrelationProvider + ?Sized>(
    index: &IndexArtifact,
    query_terms: &[String],
    cfg: &QueryConfig,
    provider: &P,
) -> CandidateSet {
    if query_terms.is_empty() {
        return CandidateSet { members: vec![] };
    }
    if !cfg.filter_enabled {
        return CandidateSet {
            members: (0..index.elements.len()).map(|e| (e, 0.0)).collect(),
        };
    }
    // distinct query terms
    let mut distinct: Vec<String> = query_terms.to_vec();
    distinct.sort();
    distinct.dedup();

    let layout = &index.layout;
    let per_label: Vec<Option<f64>> = layout
        .labels
        .iter()
        .map(|label| label_correlation(label, &distinct, cfg, provider))
        .collect();
    let members = layout
        .label_of
        .iter()
        .enumerate()
        .filter_map(|(e, label)| per_label[(*label)?].map(|c| (e, c)))
        .collect();
    CandidateSet { members }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredElement {
    pub doc: String,
    pub dewey: DeweyId,
    pub parent: Option<DeweyId>,
    pub value: f64,
    pub correlation: f64,
    pub final_score: f64,
}

impl ScoredElement {
    pub fn new(doc: impl Into<String>, dewey: DeweyId, value: f64, correlation: f64) -> Self {
        ScoredElement {
            doc: doc.into(),
            parent: dewey.parent(),
            dewey,
            value,
            correlation,
            final_score: 0.0,
        }
    }
}

fn by_final_score(a: &ScoredElement, b: &ScoredElement) -> Ordering {
    b.final_score
        .total_cmp(&a.final_score)
        .then(a.dewey.depth().cmp(&b.dewey.depth()))
        .then_with(|| a.dewey.cmp(&b.dewey))
        .then_with(|| a.doc.cmp(&b.doc))
}

/// Scores every element as `a1·correlation + a2·value` and sorts descending,
/// ties to the shallower then lexicographically smaller Dewey id.
pub fn final_rank(mut candidates: Vec<ScoredElement>, cfg: &QueryConfig) -> Vec<ScoredElement> {
    for c in &mut candidates {
        c.final_score = cfg.a1 * c.correlation + cfg.a2 * c.value;
    }
    candidates.sort_by(by_final_score);
    candidates
}

/// Removes ancestor/descendant overlaps.
///
/// Text-matched elements (value > 0) are taken greedily by descending value,
/// shallower first on ties; an element is dropped when a kept one is its
/// ancestor or descendant. Zero-value elements form groups of connected
/// subtrees, each represented by its shallowest member; these may sit under
/// a kept text-matched element. The result is ordered by final score.
pub fn merge_overlaps(results: Vec<ScoredElement>) -> Vec<ScoredElement> {
    let (matched, semantic): (Vec<_>, Vec<_>) = results.into_iter().partition(|r| r.value > 0.0);

    let mut order: Vec<ScoredElement> = matched;
    order.sort_by(|a, b| {
        b.value
            .total_cmp(&a.value)
            .then(a.dewey.depth().cmp(&b.dewey.depth()))
            .then_with(|| a.doc.cmp(&b.doc))
            .then_with(|| a.dewey.cmp(&b.dewey))
    });
    let mut kept_ids: HashSet<(String, DeweyId)> = HashSet::new();
    let mut has_kept_descendant: HashSet<(String, DeweyId)> = HashSet::new();
    let mut kept = Vec::new();
    for r in order {
        let key = (r.doc.clone(), r.dewey.clone());
        if has_kept_descendant.contains(&key) {
            continue;
        }
        if r.dewey.ancestors().any(|a| kept_ids.contains(&(r.doc.clone(), a))) {
            continue;
        }
        for a in r.dewey.ancestors() {
            has_kept_descendant.insert((r.doc.clone(), a));
        }
        kept_ids.insert(key);
        kept.push(r);
    }

    let zero: HashSet<(String, DeweyId)> = semantic.iter().map(|r| (r.doc.clone(), r.dewey.clone())).collect();
    kept.extend(
        semantic
            .into_iter()
            .filter(|r| !r.dewey.ancestors().any(|a| zero.contains(&(r.doc.clone(), a)))),
    );

    kept.sort_by(by_final_score);
    kept
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryOutcome {
    pub results: Vec<ScoredElement>,
    /// |A|
    pub candidate_count: usize,
}

/// Tokenize → candidate set → values → merge → combined rank → top K.
pub fn nfa_query(index: &IndexArtifact, query: &str, cfg: &QueryConfig) -> Result<Vec<ScoredElement>> {
    execute(index, query, cfg).map(|o| o.results)
}

pub fn execute(index: &IndexArtifact, query: &str, cfg: &QueryConfig) -> Result<QueryOutcome> {
    if index.format_version != FORMAT_VERSION {
        return Err(Error::IndexVersionMismatch {
            expected: FORMAT_VERSION.to_string(),
            found: index.format_version.to_string(),
        });
    }
    let terms = tokenize(query, &cfg.stopwords);
    if terms.is_empty() {
        return Err(Error::EmptyQueryAfterStopwords(query.to_string()));
    }

    let candidates = match &cfg.correlation_override {
        Some(table) => build_candidate_set(index, &terms, cfg, table),
        None => {
            let provider = index.concept_correlation(cfg.rank.unwrap_or(index.k()))?;
            build_candidate_set(index, &terms, cfg, &provider)
        }
    };

    let qv = QueryVector::new(terms, &index.vocabulary, &index.stats);
    let ids: Vec<usize> = candidates.members.iter().map(|&(e, _)| e).collect();
    let values = accumulate_values(&qv, &ids, &index.elements, &index.stats);

    let mut survivors = merge_positions(index, &candidates, &values, cfg.filter_enabled);
    let score = |slot: usize| cfg.a1 * candidates.members[slot].1 + cfg.a2 * values[slot];
    let by_score = |&x: &usize, &y: &usize| {
        let (ex, ey) = (
            &index.elements[candidates.members[x].0],
            &index.elements[candidates.members[y].0],
        );
        score(y)
            .total_cmp(&score(x))
            .then(ex.dewey.depth().cmp(&ey.dewey.depth()))
            .then_with(|| ex.dewey.cmp(&ey.dewey))
            .then_with(|| index.docs[ex.doc].cmp(&index.docs[ey.doc]))
    };
    if survivors.len() > cfg.top_k {
        survivors.select_nth_unstable_by(cfg.top_k - 1, by_score);
        survivors.truncate(cfg.top_k);
    }
    survivors.sort_by(by_score);

    let results = survivors
        .into_iter()
        .map(|slot| {
            let (e, corr) = candidates.members[slot];
            let record = &index.elements[e];
            let mut hit = ScoredElement::new(index.docs[record.doc].clone(), record.dewey.clone(), values[slot], corr);
            hit.final_score = score(slot);
            hit
        })
        .collect();
    Ok(QueryOutcome {
        results,
        candidate_count: candidates.len(),
    })
}

/// [`merge_overlaps`] over positions in the index, returning the surviving
/// slots of `candidates`. Without the filter no element is semantically
/// admitted, so zero-value candidates are dropped instead of grouped.
fn merge_positions(index: &IndexArtifact, candidates: &CandidateSet, values: &[f64], semantic: bool) -> Vec<usize> {
    let n = index.elements.len();
    let parents = &index.layout.parents;
    let ancestors = |mut e: usize| {
        std::iter::from_fn(move || {
            e = parents[e]?;
            Some(e)
        })
    };

    let mut matched: Vec<usize> = (0..values.len()).filter(|&s| values[s] > 0.0).collect();
    matched.sort_by(|&x, &y| {
        let (ex, ey) = (
            &index.elements[candidates.members[x].0],
            &index.elements[candidates.members[y].0],
        );
        values[y]
            .total_cmp(&values[x])
            .then(ex.dewey.depth().cmp(&ey.dewey.depth()))
            .then_with(|| index.docs[ex.doc].cmp(&index.docs[ey.doc]))
            .then_with(|| ex.dewey.cmp(&ey.dewey))
    });
    let mut kept = vec![false; n];
    let mut has_kept_descendant = vec![false; n];
    let mut survivors = Vec::new();
    for slot in matched {
        let e = candidates.members[slot].0;
        if has_kept_descendant[e] || ancestors(e).any(|a| kept[a]) {
            continue;
        }
        for a in ancestors(e) {
            has_kept_descendant[a] = true;
        }
        kept[e] = true;
        survivors.push(slot);
    }

    if semantic {
        let mut zero = vec![false; n];
        for (slot, &(e, _)) in candidates.members.iter().enumerate() {
            zero[e] = values[slot] <= 0.0;
        }
        survivors.extend(
            (0..values.len())
                .filter(|&s| values[s] <= 0.0)
                .filter(|&s| !ancestors(candidates.members[s].0).any(|a| zero[a])),
        );
    }
    survivors
}

/// One line per result: rank, Dewey, parent Dewey (`-` for a root),
/// document id, final score, value, correlation; tab-separated with floats
/// at nine significant digits.
pub fn render_results(results: &[ScoredElement]) -> String {
    let mut out = String::new();
    for (rank, r) in results.iter().enumerate() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            rank + 1,
            r.dewey,
            r.parent.as_ref().map_or_else(|| "-".to_string(), |p| p.to_string()),
            r.doc,
            format_sig9(r.final_score),
            format_sig9(r.value),
            format_sig9(r.correlation)
        ));
    }
    out
}
