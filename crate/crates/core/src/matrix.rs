//! Dense column-major matrices and the term-element matrix built from a corpus.

use std::collections::BTreeSet;

use crate::dewey::DeweyId;
use crate::error::{Error, Result};
use crate::ingest::{subtree_terms_all, ElementNode};

#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from row slices; all rows must have equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(n_rows, n_cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), n_cols, "ragged rows");
            for (j, &x) in row.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[c * self.rows + r]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, x: f64) {
        self.data[c * self.rows + r] = x;
    }

    pub fn column(&self, c: usize) -> &[f64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn column_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    /// Mutable access to two distinct columns at once.
    pub fn column_pair_mut(&mut self, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
        assert!(p < q);
        let (head, tail) = self.data.split_at_mut(q * self.rows);
        (&mut head[p * self.rows..(p + 1) * self.rows], &mut tail[..self.rows])
    }

    pub fn row(&self, r: usize) -> Vec<f64> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for c in 0..self.cols {
            for r in 0..self.rows {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            for k in 0..self.cols {
                let b = other.get(k, j);
                if b == 0.0 {
                    continue;
                }
                let a_col = self.column(k);
                for (o, &a) in out.column_mut(j).iter_mut().zip(a_col) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Largest |(QᵀQ − I)_{ij}| over the columns of `self`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.cols {
            for j in i..self.cols {
                let dot = dot(self.column(i), self.column(j));
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

impl std::fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "DenseMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|x| format!("{x:>9.4}")).collect();
            writeln!(f, "  [{}]", row.join(" "))?;
        }
        Ok(())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Column position of an element: owning document and its Dewey label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementRef {
    pub doc: usize,
    pub dewey: DeweyId,
}

/// Raw subtree term frequencies; rows are terms, columns elements.
#[derive(Debug, Clone)]
pub struct TermElementMatrix {
    pub terms: Vec<String>,
    pub element_ids: Vec<ElementRef>,
    pub counts: DenseMatrix,
}

impl TermElementMatrix {
    pub fn term_index(&self, term: &str) -> Option<usize> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }
}

/// Builds the matrix over every element of every tree. The vocabulary is the
/// sorted union of all text terms and all namespace labels.
pub fn build_matrix(corpus: &[ElementNode]) -> Result<TermElementMatrix> {
    let per_doc: Vec<_> = corpus.iter().map(subtree_terms_all).collect();
    let n_elements: usize = per_doc.iter().map(Vec::len).sum();
    if n_elements == 0 {
        return Err(Error::EmptyCorpus);
    }

    let mut vocab = BTreeSet::new();
    for (node, counts) in per_doc.iter().flatten() {
        vocab.extend(counts.keys().cloned());
        if let Some(label) = node.label() {
            vocab.insert(label.to_string());
        }
    }
    let terms: Vec<String> = vocab.into_iter().collect();

    let mut counts = DenseMatrix::zeros(terms.len(), n_elements);
    let mut element_ids = Vec::with_capacity(n_elements);
    for (doc, elements) in per_doc.iter().enumerate() {
        for (node, tf) in elements {
            let col = element_ids.len();
            for (term, &c) in tf {
                let row = terms.binary_search(term).expect("term collected above");
                counts.set(row, col, c as f64);
            }
            element_ids.push(ElementRef {
                doc,
                dewey: node.dewey.clone(),
            });
        }
    }
    Ok(TermElementMatrix {
        terms,
        element_ids,
        counts,
    })
}

/// Column-normalized term-element matrix.
#[derive(Debug, Clone)]
pub struct NormalizedMatrix {
    pub terms: Vec<String>,
    pub element_ids: Vec<ElementRef>,
    pub values: DenseMatrix,
}

/// Divides every nonzero column by its Euclidean norm; zero columns stay zero.
pub fn normalize_columns(m: &TermElementMatrix) -> NormalizedMatrix {
    let mut values = m.counts.clone();
    for c in 0..values.cols() {
        let col = values.column_mut(c);
        let norm = dot(col, col).sqrt();
        if norm > 0.0 {
            col.iter_mut().for_each(|x| *x /= norm);
        }
    }
    NormalizedMatrix {
        terms: m.terms.clone(),
        element_ids: m.element_ids.clone(),
        values,
    }
}
