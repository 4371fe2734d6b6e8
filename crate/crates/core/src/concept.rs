//! Rank-k latent concept space and namespace-keyword correlation.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix, NormalizedMatrix};
use crate::svd::{compute_svd, Svd, SvdOptions};
use crate::tokenize::{tokenize, Stopwords};

#[derive(Debug, Clone)]
pub struct ConceptSpace {
    pub k: usize,
    pub terms: Vec<String>,
    /// σ_1..σ_k, all positive and non-increasing.
    pub singular_values: Vec<f64>,
    /// Every singular value of the decomposed matrix.
    pub full_rank_values: Vec<f64>,
    pub u_k: DenseMatrix,
    pub v_k: DenseMatrix,
    /// Row i of `U_k` scaled by the singular values.
    pub term_coords: Vec<Vec<f64>>,
    /// `U_k S_k V_kᵀ`.
    pub reconstruction: DenseMatrix,
}

/// Keeps the leading `k` singular triples of `factors`.
pub fn truncate(factors: &Svd, terms: &[String], k: usize) -> Result<ConceptSpace> {
    let rank = factors.numerical_rank();
    if k == 0 || k > rank {
        return Err(Error::RankOutOfRange { k, rank });
    }
    assert_eq!(terms.len(), factors.u.rows(), "one term per matrix row");

    let mut u_k = DenseMatrix::zeros(factors.u.rows(), k);
    let mut v_k = DenseMatrix::zeros(factors.v.rows(), k);
    for c in 0..k {
        u_k.column_mut(c).copy_from_slice(factors.u.column(c));
        v_k.column_mut(c).copy_from_slice(factors.v.column(c));
    }
    let singular_values = factors.singular_values[..k].to_vec();
    let term_coords = (0..u_k.rows())
        .map(|i| (0..k).map(|c| u_k.get(i, c) * singular_values[c]).collect())
        .collect();

    Ok(ConceptSpace {
        k,
        terms: terms.to_vec(),
        reconstruction: factors.reconstruct(k),
        full_rank_values: factors.singular_values.clone(),
        singular_values,
        u_k,
        v_k,
        term_coords,
    })
}

impl ConceptSpace {
    /// Decomposes `m1` and keeps `k` dimensions, clamped to the numerical rank.
    pub fn build(m1: &NormalizedMatrix, k: usize, options: SvdOptions) -> Result<Self> {
        let factors = compute_svd(&m1.values, options)?;
        let rank = factors.numerical_rank();
        if rank == 0 {
            return Err(Error::EmptyCorpus);
        }
        truncate(&factors, &m1.terms, k.clamp(1, rank))
    }

    fn index_of(&self, term: &str) -> Option<usize> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }

    pub fn coords(&self, term: &str) -> Option<&[f64]> {
        self.index_of(term).map(|i| self.term_coords[i].as_slice())
    }

    /// Cosine between the two terms' concept coordinates, which equals the
    /// cosine between their rows of the rank-k reconstruction.
    pub fn term_correlation(&self, t1: &str, t2: &str) -> Result<f64> {
        let a = self.coords(t1).ok_or_else(|| Error::UnknownTerm(t1.to_string()))?;
        let b = self.coords(t2).ok_or_else(|| Error::UnknownTerm(t2.to_string()))?;
        Ok(cosine(a, b))
    }
}

/// Cosine similarity clamped to [-1, 1]; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot(a, b) / (na * nb)).clamp(-1.0, 1.0)
}

/// Source of `correlation(label, keyword)` values. Implementations are total:
/// unknown terms correlate 0.
pub trait CorrelationProvider {
    fn correlation(&self, label: &str, keyword: &str) -> f64;
}

impl CorrelationProvider for ConceptSpace {
    fn correlation(&self, label: &str, keyword: &str) -> f64 {
        self.term_correlation(label, keyword).unwrap_or(0.0)
    }
}

pub fn prefix_correlation<P: CorrelationProvider + ?Sized>(provider: &P, label: &str, keyword: &str) -> f64 {
    provider.correlation(label, keyword)
}

/// Explicit symmetric (term, term) → correlation table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorrelationTable {
    values: BTreeMap<(String, String), f64>,
}

fn ordered_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl CorrelationTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, label: &str, keyword: &str, value: f64) -> Result<()> {
        if !(-1.0..=1.0).contains(&value) {
            return Err(Error::Domain(format!(
                "correlation {value} for ({label}, {keyword}) outside [-1, 1]"
            )));
        }
        self.values.insert(ordered_key(label, keyword), value);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Parses `label<TAB>keyword<TAB>value` lines; `#` starts a comment line.
    /// Terms are normalized through the tokenizer.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut table = CorrelationTable::new();
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
            let [label, keyword, value] = fields[..] else {
                return Err(bad("expected `label<TAB>keyword<TAB>value`".into()));
            };
            let term = |raw: &str| match tokenize(raw, &Stopwords::none()).as_slice() {
                [t] => Ok(t.clone()),
                _ => Err(bad(format!("`{raw}` is not a single term"))),
            };
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| bad(format!("`{value}` is not a number")))?;
            table
                .insert(&term(label)?, &term(keyword)?, value)
                .map_err(|e| bad(e.to_string()))?;
        }
        Ok(table)
    }
}

impl CorrelationProvider for CorrelationTable {
    fn correlation(&self, label: &str, keyword: &str) -> f64 {
        self.values.get(&ordered_key(label, keyword)).copied().unwrap_or(0.0)
    }
}
