//! The queryable index artifact, its builder and the `NFAX/1` text format.
//!
//! ```text
//! HEADER  NFAX  1  <N>  <k>
//! VOCAB   <term id>  <term>
//! ELEM    <elem id>  <doc id>  <dewey>  <parent dewey|->  <label|->  <length>
//! POST    <term id>  <elem id>  <tf>
//! SING    <index>  <singular value>
//! COORD   <term id>  <c_1> ... <c_k>
//! END     <number of preceding records>
//! ```
//!
//! Fields are tab-separated. Floats carry nine significant digits; the
//! builder rounds the concept space the same way, so a built artifact and its
//! reloaded copy compare equal. Element lengths are recomputed from the
//! postings on load and checked against the stored value.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use crate::concept::{cosine, ConceptSpace, CorrelationProvider};
use crate::dewey::DeweyId;
use crate::error::{Error, Result};
use crate::format::{format_sig9, quantize_sig9};
use crate::ingest::{parse_document, ElementNode, NamespaceMap};
use crate::matrix::{build_matrix, normalize_columns};
use crate::scoring::{CorpusStats, ElementStats, Vocabulary};
use crate::svd::SvdOptions;
use crate::tokenize::Stopwords;

pub const FORMAT_TAG: &str = "NFAX";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ElementRecord {
    /// Position in [`IndexArtifact::docs`].
    pub doc: usize,
    pub dewey: DeweyId,
    pub label: Option<String>,
    pub stats: ElementStats,
}

impl std::borrow::Borrow<ElementStats> for ElementRecord {
    fn borrow(&self) -> &ElementStats {
        &self.stats
    }
}

impl ElementRecord {
    pub fn parent(&self) -> Option<DeweyId> {
        self.dewey.parent()
    }
}

/// Immutable, shareable index over a document collection.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexArtifact {
    pub format_version: u32,
    pub docs: Vec<String>,
    pub vocabulary: Vocabulary,
    pub stats: CorpusStats,
    /// Grouped by document, document order within each.
    pub elements: Vec<ElementRecord>,
    pub singular_values: Vec<f64>,
    /// Per term id, `k` concept coordinates.
    pub coords: Vec<Vec<f64>>,
    pub(crate) layout: Layout,
}

/// Lookup tables derived from `elements`.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Layout {
    /// Position of each element's parent.
    pub parents: Vec<Option<usize>>,
    /// Distinct namespace labels, sorted.
    pub labels: Vec<String>,
    /// Position in `labels` of each element's label.
    pub label_of: Vec<Option<usize>>,
}

impl Layout {
    fn derive(elements: &[ElementRecord]) -> std::result::Result<Self, usize> {
        let position: HashMap<(usize, &DeweyId), usize> = elements
            .iter()
            .enumerate()
            .map(|(i, e)| ((e.doc, &e.dewey), i))
            .collect();
        let mut parents = Vec::with_capacity(elements.len());
        for (i, e) in elements.iter().enumerate() {
            match e.dewey.parent() {
                None => parents.push(None),
                Some(p) => parents.push(Some(*position.get(&(e.doc, &p)).ok_or(i)?)),
            }
        }
        let labels: Vec<String> = elements
            .iter()
            .filter_map(|e| e.label.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let label_of = elements
            .iter()
            .map(|e| e.label.as_ref().map(|l| labels.binary_search(l).expect("collected")))
            .collect();
        Ok(Layout {
            parents,
            labels,
            label_of,
        })
    }
}

impl IndexArtifact {
    fn with_layout(mut self) -> std::result::Result<Self, usize> {
        self.layout = Layout::derive(&self.elements)?;
        Ok(self)
    }

    /// Retained concept-space rank.
    pub fn k(&self) -> usize {
        self.singular_values.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    /// Concept-space correlation provider over the first `k` dimensions.
    pub fn concept_correlation(&self, k: usize) -> Result<ConceptCorrelation<'_>> {
        if k == 0 || k > self.k() {
            return Err(Error::RankOutOfRange { k, rank: self.k() });
        }
        Ok(ConceptCorrelation { index: self, k })
    }

    pub fn find(&self, doc: &str, dewey: &DeweyId) -> Option<usize> {
        let doc = self.docs.iter().position(|d| d == doc)?;
        self.elements.iter().position(|e| e.doc == doc && &e.dewey == dewey)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut records = 0usize;
        let mut line = |out: &mut String, s: String| {
            out.push_str(&s);
            out.push('\n');
            records += 1;
        };
        line(
            &mut out,
            format!(
                "HEADER\t{FORMAT_TAG}\t{}\t{}\t{}",
                self.format_version,
                self.stats.n,
                self.k()
            ),
        );
        for (id, term) in self.vocabulary.terms().iter().enumerate() {
            line(&mut out, format!("VOCAB\t{id}\t{term}"));
        }
        for (id, e) in self.elements.iter().enumerate() {
            line(
                &mut out,
                format!(
                    "ELEM\t{id}\t{}\t{}\t{}\t{}\t{}",
                    self.docs[e.doc],
                    e.dewey,
                    e.parent().map_or_else(|| "-".to_string(), |p| p.to_string()),
                    e.label.as_deref().unwrap_or("-"),
                    format_sig9(e.stats.length)
                ),
            );
        }
        let mut postings: Vec<(u32, usize, u32)> = self
            .elements
            .iter()
            .enumerate()
            .flat_map(|(id, e)| e.stats.tf.iter().map(move |&(t, c)| (t, id, c)))
            .collect();
        postings.sort_unstable();
        for (t, e, c) in postings {
            line(&mut out, format!("POST\t{t}\t{e}\t{c}"));
        }
        for (i, s) in self.singular_values.iter().enumerate() {
            line(&mut out, format!("SING\t{i}\t{}", format_sig9(*s)));
        }
        for (t, coords) in self.coords.iter().enumerate() {
            let mut s = format!("COORD\t{t}");
            for c in coords {
                let _ = write!(s, "\t{}", format_sig9(*c));
            }
            line(&mut out, s);
        }
        let _ = writeln!(out, "END\t{records}");
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Parser::default().parse(text)
    }
}

/// Concept-space correlation read from a loaded index.
#[derive(Debug, Clone, Copy)]
pub struct ConceptCorrelation<'a> {
    index: &'a IndexArtifact,
    k: usize,
}

impl CorrelationProvider for ConceptCorrelation<'_> {
    fn correlation(&self, label: &str, keyword: &str) -> f64 {
        let vocab = &self.index.vocabulary;
        match (vocab.id(label), vocab.id(keyword)) {
            (Some(a), Some(b)) => cosine(
                &self.index.coords[a as usize][..self.k],
                &self.index.coords[b as usize][..self.k],
            ),
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IndexBuilder {
    pub ns_map: NamespaceMap,
    pub stopwords: Stopwords,
    /// Requested concept-space rank, clamped to what the corpus supports.
    pub k: usize,
    pub svd: SvdOptions,
    docs: Vec<(String, ElementNode)>,
}

impl Default for IndexBuilder {
    fn default() -> Self {
        IndexBuilder {
            ns_map: NamespaceMap::new(),
            stopwords: Stopwords::default(),
            k: 2,
            svd: SvdOptions::default(),
            docs: Vec::new(),
        }
    }
}

impl IndexBuilder {
    pub fn new(ns_map: NamespaceMap, stopwords: Stopwords, k: usize) -> Self {
        IndexBuilder {
            ns_map,
            stopwords,
            k,
            ..Self::default()
        }
    }

    pub fn add_document(&mut self, doc_id: &str, xml_text: &str) -> Result<()> {
        if doc_id.is_empty() || doc_id.contains(['\t', '\n', '\r']) {
            return Err(Error::Domain(format!("unusable document id {doc_id:?}")));
        }
        let tree = parse_document(xml_text, &self.ns_map, &self.stopwords)?;
        self.docs.push((doc_id.to_string(), tree));
        Ok(())
    }

    pub fn add_tree(&mut self, doc_id: &str, tree: ElementNode) {
        self.docs.push((doc_id.to_string(), tree));
    }

    pub fn build(self) -> Result<IndexArtifact> {
        let (doc_ids, trees): (Vec<String>, Vec<ElementNode>) = self.docs.into_iter().unzip();
        let matrix = build_matrix(&trees)?;
        let n = matrix.element_ids.len();
        let n_terms = matrix.terms.len();

        let nonzero_cols = (0..n)
            .filter(|&c| matrix.counts.column(c).iter().any(|&x| x != 0.0))
            .count();
        if n_terms == 0 || nonzero_cols == 0 {
            return Err(Error::EmptyCorpus);
        }
        let k = self.k.max(1).min(n_terms).min(nonzero_cols);
        let normalized = normalize_columns(&matrix);
        let space = ConceptSpace::build(&normalized, k, self.svd)?;

        let ef: Vec<u32> = (0..n_terms)
            .map(|t| (0..n).filter(|&c| matrix.counts.get(t, c) > 0.0).count() as u32)
            .collect();
        let stats = CorpusStats { n: n as u32, ef };

        let labels = trees
            .iter()
            .flat_map(|t| t.preorder().into_iter().map(|node| node.label().map(str::to_string)));
        let elements = matrix
            .element_ids
            .iter()
            .zip(labels)
            .enumerate()
            .map(|(col, (eref, label))| {
                let tf = matrix
                    .counts
                    .column(col)
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0.0)
                    .map(|(t, &c)| (t as u32, c as u32))
                    .collect();
                ElementRecord {
                    doc: eref.doc,
                    dewey: eref.dewey.clone(),
                    label,
                    stats: ElementStats::new(tf, &stats),
                }
            })
            .collect();

        Ok(IndexArtifact {
            format_version: FORMAT_VERSION,
            docs: doc_ids,
            vocabulary: Vocabulary::from_sorted(matrix.terms)?,
            stats,
            elements,
            singular_values: space.singular_values.iter().map(|&s| quantize_sig9(s)).collect(),
            coords: space
                .term_coords
                .iter()
                .map(|row| row.iter().map(|&c| quantize_sig9(c)).collect())
                .collect(),
            layout: Layout::default(),
        }
        .with_layout()
        .expect("trees are prefix-closed"))
    }
}

#[derive(Default)]
struct Parser {
    line: usize,
}

impl Parser {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::IndexFormat {
            line: self.line,
            message: message.into(),
        }
    }

    fn num<T: std::str::FromStr>(&self, field: &str, what: &str) -> Result<T> {
        field.parse().map_err(|_| self.err(format!("bad {what} `{field}`")))
    }

    fn float(&self, field: &str) -> Result<f64> {
        let x: f64 = self.num(field, "number")?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(self.err(format!("non-finite number `{field}`")))
        }
    }

    fn parse(mut self, text: &str) -> Result<IndexArtifact> {
        let mut lines = text.lines();
        let mut records = 0usize;

        self.line = 1;
        let header = lines.next().ok_or_else(|| self.err("empty index"))?;
        let f: Vec<&str> = header.split('\t').collect();
        if f.first() != Some(&"HEADER") || f.len() != 5 {
            return Err(self.err("missing HEADER"));
        }
        if f[1] != FORMAT_TAG || f[2] != FORMAT_VERSION.to_string() {
            return Err(Error::IndexVersionMismatch {
                expected: format!("{FORMAT_TAG}/{FORMAT_VERSION}"),
                found: format!("{}/{}", f[1], f[2]),
            });
        }
        let n: u32 = self.num(f[3], "element count")?;
        let k: usize = self.num(f[4], "rank")?;
        records += 1;

        let mut terms = Vec::new();
        let mut docs: Vec<String> = Vec::new();
        let mut elements: Vec<ElementRecord> = Vec::new();
        let mut lengths = Vec::new();
        let mut tf: Vec<Vec<(u32, u32)>> = Vec::new();
        let mut ef: Vec<u32> = Vec::new();
        let mut singular_values = Vec::new();
        let mut coords: Vec<Vec<f64>> = Vec::new();
        let mut ended = false;
        let mut section = 0u8;

        for raw in lines {
            self.line += 1;
            if ended {
                return Err(self.err("content after END"));
            }
            let f: Vec<&str> = raw.split('\t').collect();
            let order = match f[0] {
                "VOCAB" => 1,
                "ELEM" => 2,
                "POST" => 3,
                "SING" => 4,
                "COORD" => 5,
                "END" => 6,
                other => return Err(self.err(format!("unknown record `{other}`"))),
            };
            if order < section {
                return Err(self.err(format!("`{}` out of section order", f[0])));
            }
            section = order;
            let expect = |count: usize, s: &Self| {
                if f.len() == count {
                    Ok(())
                } else {
                    Err(s.err(format!("`{}` needs {} fields, found {}", f[0], count, f.len())))
                }
            };
            let sequential = |id: usize, next: usize, s: &Self| {
                if id == next {
                    Ok(())
                } else {
                    Err(s.err(format!("expected id {next}, found {id}")))
                }
            };
            match f[0] {
                "VOCAB" => {
                    expect(3, &self)?;
                    sequential(self.num(f[1], "term id")?, terms.len(), &self)?;
                    terms.push(f[2].to_string());
                }
                "ELEM" => {
                    expect(7, &self)?;
                    sequential(self.num(f[1], "element id")?, elements.len(), &self)?;
                    let doc = match docs.iter().rposition(|d| d == f[2]) {
                        Some(i) => i,
                        None => {
                            docs.push(f[2].to_string());
                            docs.len() - 1
                        }
                    };
                    let dewey: DeweyId = f[3].parse().map_err(|_| self.err("bad Dewey id"))?;
                    let parent = dewey.parent().map_or_else(|| "-".to_string(), |p| p.to_string());
                    if parent != f[4] {
                        return Err(self.err(format!("parent `{}` does not match `{}`", f[4], f[3])));
                    }
                    let label = (f[5] != "-").then(|| f[5].to_string());
                    self.float(f[6])?;
                    lengths.push((self.line, f[6].to_string()));
                    tf.push(Vec::new());
                    elements.push(ElementRecord {
                        doc,
                        dewey,
                        label,
                        stats: ElementStats {
                            tf: Vec::new(),
                            length: 0.0,
                        },
                    });
                }
                "POST" => {
                    expect(4, &self)?;
                    let t: u32 = self.num(f[1], "term id")?;
                    let e: usize = self.num(f[2], "element id")?;
                    let c: u32 = self.num(f[3], "tf")?;
                    if t as usize >= terms.len() || e >= elements.len() || c == 0 {
                        return Err(self.err("posting out of range"));
                    }
                    if ef.len() < terms.len() {
                        ef.resize(terms.len(), 0);
                    }
                    ef[t as usize] += 1;
                    tf[e].push((t, c));
                }
                "SING" => {
                    expect(3, &self)?;
                    sequential(self.num(f[1], "singular index")?, singular_values.len(), &self)?;
                    singular_values.push(self.float(f[2])?);
                }
                "COORD" => {
                    expect(2 + k, &self)?;
                    sequential(self.num(f[1], "term id")?, coords.len(), &self)?;
                    coords.push(f[2..].iter().map(|x| self.float(x)).collect::<Result<_>>()?);
                }
                "END" => {
                    expect(2, &self)?;
                    let count: usize = self.num(f[1], "record count")?;
                    if count != records {
                        return Err(self.err(format!("END says {count} records, found {records}")));
                    }
                    ended = true;
                    continue;
                }
                _ => unreachable!(),
            }
            records += 1;
        }

        if !ended {
            return Err(self.err("truncated index: no END record"));
        }
        if elements.len() != n as usize {
            return Err(self.err(format!("HEADER says N = {n}, found {} elements", elements.len())));
        }
        if singular_values.len() != k || coords.len() != terms.len() {
            return Err(self.err("concept space does not match HEADER rank or vocabulary"));
        }
        ef.resize(terms.len(), 0);
        let stats = CorpusStats { n, ef };
        // recomputed from the postings and checked against the stored value
        for ((element, tf), (line, stored)) in elements.iter_mut().zip(tf).zip(lengths) {
            element.stats = ElementStats::new(tf, &stats);
            if format_sig9(element.stats.length) != stored {
                self.line = line;
                return Err(self.err(format!(
                    "stored length {stored} disagrees with postings ({})",
                    format_sig9(element.stats.length)
                )));
            }
        }
        let vocabulary = Vocabulary::from_sorted(terms).map_err(|e| self.err(e.to_string()))?;
        IndexArtifact {
            format_version: FORMAT_VERSION,
            docs,
            vocabulary,
            stats,
            elements,
            singular_values,
            coords,
            layout: Layout::default(),
        }
        .with_layout()
        .map_err(|e| Error::IndexFormat {
            line: 0,
            message: format!("element {e} has no parent record"),
        })
    }
}
