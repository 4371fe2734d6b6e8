//! tf-ief weights and the length-normalized text-match value of elements.

use std::borrow::Borrow;
use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Sorted term list; a term's position is its id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
}

impl Vocabulary {
    /// `terms` must be strictly increasing.
    pub fn from_sorted(terms: Vec<String>) -> Result<Self> {
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("vocabulary must be sorted and unique".into()));
        }
        Ok(Vocabulary { terms })
    }

    pub fn id(&self, term: &str) -> Option<u32> {
        self.terms
            .binary_search_by(|t| t.as_str().cmp(term))
            .ok()
            .map(|i| i as u32)
    }

    pub fn term(&self, id: u32) -> &str {
        &self.terms[id as usize]
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }
}

/// `N` and per-term element frequency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusStats {
    pub n: u32,
    /// Indexed by term id; 0 for terms that occur in no element text.
    pub ef: Vec<u32>,
}

impl CorpusStats {
    /// ief of a term id; terms with ef = 0 carry no weight.
    pub fn ief(&self, term: u32) -> f64 {
        match self.ef.get(term as usize) {
            Some(&ef) if ef > 0 => compute_ief(self.n, ef).unwrap_or(0.0),
            _ => 0.0,
        }
    }
}

pub fn compute_ief(n: u32, ef: u32) -> Result<f64> {
    if n == 0 || ef == 0 || ef > n {
        return Err(Error::Domain(format!("ief undefined for N = {n}, ef = {ef}")));
    }
    Ok((n as f64 / ef as f64).log10())
}

pub fn weight_element(tf: u32, ief: f64) -> f64 {
    if tf == 0 {
        0.0
    } else {
        (1.0 + (tf as f64).log10()) * ief
    }
}

pub fn weight_query(tf_q: u32, ief: f64) -> Result<f64> {
    if tf_q == 0 {
        return Err(Error::Domain("query term frequency must be at least 1".into()));
    }
    Ok((1.0 + (tf_q as f64).log10()) * ief)
}

/// Per-element subtree term frequencies and weight-vector norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementStats {
    /// (term id, tf) sorted by term id, tf > 0.
    pub tf: Vec<(u32, u32)>,
    pub length: f64,
}

impl ElementStats {
    pub fn new(mut tf: Vec<(u32, u32)>, stats: &CorpusStats) -> Self {
        tf.retain(|&(_, c)| c > 0);
        tf.sort_unstable();
        let length = element_length(&tf, stats);
        ElementStats { tf, length }
    }

    pub fn tf_of(&self, term: u32) -> u32 {
        self.tf
            .binary_search_by_key(&term, |&(t, _)| t)
            .map_or(0, |i| self.tf[i].1)
    }
}

/// Euclidean norm of the element's full weight vector.
pub fn element_length(tf: &[(u32, u32)], stats: &CorpusStats) -> f64 {
    tf.iter()
        .map(|&(t, c)| weight_element(c, stats.ief(t)).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryVector {
    pub terms: Vec<String>,
    pub tf_q: BTreeMap<String, u32>,
    /// (term id, W_{t,q}) for in-vocabulary query terms, sorted by id.
    pub weights: Vec<(u32, f64)>,
}

impl QueryVector {
    pub fn new(terms: Vec<String>, vocab: &Vocabulary, stats: &CorpusStats) -> Self {
        let mut tf_q = BTreeMap::new();
        for t in &terms {
            *tf_q.entry(t.clone()).or_insert(0u32) += 1;
        }
        let mut weights: Vec<(u32, f64)> = tf_q
            .iter()
            .filter_map(|(t, &c)| {
                let id = vocab.id(t)?;
                Some((id, weight_query(c, stats.ief(id)).expect("count >= 1")))
            })
            .collect();
        weights.sort_by_key(|&(id, _)| id);
        QueryVector { terms, tf_q, weights }
    }

    /// |q| over in-vocabulary terms.
    pub fn norm(&self) -> f64 {
        self.weights.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }
}

/// `value[e] = Σ_t W_{t,e}·W_{t,q} / length[e]` for each candidate, in
/// candidate order. Elements of zero length get 0. The query norm is not
/// divided out.
pub fn accumulate_values<E: Borrow<ElementStats>>(
    query: &QueryVector,
    candidates: &[usize],
    elements: &[E],
    stats: &CorpusStats,
) -> Vec<f64> {
    candidates
        .iter()
        .map(|&e| {
            let element: &ElementStats = elements[e].borrow();
            if element.length == 0.0 {
                return 0.0;
            }
            let dot: f64 = query
                .weights
                .iter()
                .map(|&(t, wq)| weight_element(element.tf_of(t), stats.ief(t)) * wq)
                .sum();
            dot / element.length
        })
        .collect()
}
