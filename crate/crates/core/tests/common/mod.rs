#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use nsfilter::matrix::{normalize_columns, DenseMatrix, ElementRef, NormalizedMatrix, TermElementMatrix};
use nsfilter::{CorrelationTable, DeweyId, IndexArtifact, IndexBuilder, NamespaceMap, Stopwords};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// The worked-example document, with the root tag spelled consistently.
pub const RECORD_XML: &str = r#"<root1>
  <c:cs xmlns:c="http://...../computer">
    <c:DBMS>
      <c:DB>attribute</c:DB>
      <c:DB>Management</c:DB>
    </c:DBMS>
    <c:programming>
      <c:complexity>data and space</c:complexity>
      <c:time>data in computer's Algorithm</c:time>
    </c:programming>
    <c:java>data of Algorithm in computer science</c:java>
  </c:cs>
  <n:joy xmlns:n="http://...../happiness">
    <n:entertainment>
      <n:in>no space with audience's joy</n:in>
      <n:out>jackson dance in large space</n:out>
    </n:entertainment>
  </n:joy>
</root1>
"#;

pub const NS_MAP: &str = "http://...../happiness\tjoy\n";

pub const SEEDED_CORRELATIONS: &str = "\
computer\tdata\t0.9984
computer\tspace\t0.3168
computer\talgorithm\t0.6558
joy\tdata\t0.0642
joy\tspace\t0.3470
joy\talgorithm\t-0.0899
";

pub const QUERY: &str = "data and space in algorithm";

pub const TERMS: [&str; 5] = ["computer", "data", "space", "algorithm", "joy"];

/// Term-element counts, with the (space, fifth column) entry 0 as in the
/// normalized reference matrix.
pub const M_CORRECTED: [[f64; 8]; 5] = [
    [0., 0., 1., 0., 1., 1., 0., 0.],
    [0., 0., 1., 1., 1., 1., 0., 0.],
    [0., 0., 1., 1., 0., 0., 1., 1.],
    [0., 0., 0., 0., 1., 1., 0., 0.],
    [0., 0., 0., 0., 0., 0., 1., 0.],
];

#[allow(clippy::approx_constant)]
pub const M1_REFERENCE: [[f64; 8]; 5] = [
    [0., 0., 0.5774, 0., 0.5774, 0.5774, 0., 0.],
    [0., 0., 0.5774, 0.7071, 0.5774, 0.5774, 0., 0.],
    [0., 0., 0.5774, 0.7071, 0., 0., 0.7071, 1.],
    [0., 0., 0., 0., 0.5774, 0.5774, 0., 0.],
    [0., 0., 0., 0., 0., 0., 0.7071, 0.],
];

pub const SINGULAR_REFERENCE: [f64; 5] = [1.8397, 1.3770, 0.6569, 0.4126, 0.3433];

pub const M2_REFERENCE: [[f64; 8]; 5] = [
    [0., 0., 0.4024, 0.2472, 0.5804, 0.5804, -0.0650, -0.0321],
    [0., 0., 0.5707, 0.4292, 0.6475, 0.6475, 0.0937, 0.1492],
    [0., 0., 0.5813, 0.7346, -0.0059, -0.0059, 0.7997, 0.8897],
    [0., 0., 0.2490, 0.1097, 0.4559, 0.4559, -0.1426, -0.1271],
    [0., 0., 0.0950, 0.1587, -0.0874, -0.0874, 0.2222, 0.2413],
];

/// Rank-2 concept-space cosines of the corrected matrix, computed ahead of
/// the build with an independent LAPACK-backed dense SVD (numpy) in double
/// precision.
pub mod oracle {
    pub const COMPUTER_DATA: f64 = 0.9650582287783432;
    pub const COMPUTER_SPACE: f64 = 0.2282179351565291;
    pub const COMPUTER_ALGORITHM: f64 = 0.9723095977114882;
    pub const JOY_ALGORITHM: f64 = -0.3503838741408683;
    pub const JOY_SPACE: f64 = 0.938564262344433;
    pub const SINGULAR_VALUES: [f64; 5] = [
        1.839662996993,
        1.376948082867,
        0.656941057897,
        0.412602017302,
        0.343281307897,
    ];
}

/// The corrected count matrix with rows reordered alphabetically, as the
/// matrix builder lays out its vocabulary. Returns the sorted terms and
/// the row permutation applied.
pub fn fixture_counts() -> (TermElementMatrix, Vec<usize>) {
    let mut order: Vec<usize> = (0..TERMS.len()).collect();
    order.sort_by_key(|&i| TERMS[i]);
    let rows: Vec<[f64; 8]> = order.iter().map(|&i| M_CORRECTED[i]).collect();
    let matrix = TermElementMatrix {
        terms: order.iter().map(|&i| TERMS[i].to_string()).collect(),
        element_ids: (0..8u32)
            .map(|c| ElementRef {
                doc: 0,
                dewey: DeweyId::root().child(c + 1),
            })
            .collect(),
        counts: DenseMatrix::from_rows(&rows),
    };
    (matrix, order)
}

pub fn fixture_m1() -> (NormalizedMatrix, Vec<usize>) {
    let (counts, order) = fixture_counts();
    (normalize_columns(&counts), order)
}

pub fn seeded_correlations() -> CorrelationTable {
    CorrelationTable::parse(SEEDED_CORRELATIONS, "seeded_correlations").unwrap()
}

pub fn ns_map() -> NamespaceMap {
    NamespaceMap::parse(NS_MAP, "ns_map").unwrap()
}

pub fn record_index() -> IndexArtifact {
    let mut b = IndexBuilder::new(ns_map(), Stopwords::default(), 2);
    b.add_document("record.xml", RECORD_XML).unwrap();
    b.build().unwrap()
}

// ---------------------------------------------------------------------------
// Random mini-corpora with a dense brute-force scoring reference.

#[derive(Debug, Clone)]
pub struct MiniNode {
    pub doc: usize,
    pub dewey: Vec<u32>,
    pub tokens: Vec<String>,
    pub children: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct MiniCorpus {
    pub vocab_size: usize,
    pub nodes: Vec<MiniNode>,
    pub roots: Vec<usize>,
}

pub fn term(i: usize) -> String {
    format!("t{i}")
}

impl MiniCorpus {
    pub fn random(rng: &mut StdRng, max_elements: usize, max_terms: usize) -> Self {
        let vocab_size = rng.random_range(1..=max_terms);
        let total = rng.random_range(1..=max_elements);
        let docs = rng.random_range(1..=3usize).min(total);
        let mut nodes: Vec<MiniNode> = Vec::new();
        let mut roots = Vec::new();
        for doc in 0..docs {
            roots.push(nodes.len());
            nodes.push(MiniNode {
                doc,
                dewey: vec![0],
                tokens: vec![],
                children: vec![],
            });
        }
        while nodes.len() < total {
            let parent = rng.random_range(0..nodes.len());
            let mut dewey = nodes[parent].dewey.clone();
            dewey.push(nodes[parent].children.len() as u32 + 1);
            let id = nodes.len();
            nodes[parent].children.push(id);
            nodes.push(MiniNode {
                doc: nodes[parent].doc,
                dewey,
                tokens: vec![],
                children: vec![],
            });
        }
        for node in &mut nodes {
            let n_tokens = rng.random_range(0..=4);
            node.tokens = (0..n_tokens).map(|_| term(rng.random_range(0..vocab_size))).collect();
        }
        MiniCorpus {
            vocab_size,
            nodes,
            roots,
        }
    }

    fn write(&self, id: usize, out: &mut String) {
        let node = &self.nodes[id];
        out.push_str("<e>");
        out.push_str(&node.tokens.join(" "));
        for &c in &node.children {
            out.push(' ');
            self.write(c, out);
        }
        out.push_str("</e>");
    }

    pub fn xml(&self, doc: usize) -> String {
        let mut s = String::new();
        self.write(self.roots[doc], &mut s);
        s
    }

    pub fn index(&self) -> IndexArtifact {
        let mut b = IndexBuilder::default();
        for doc in 0..self.roots.len() {
            b.add_document(&format!("doc{doc}"), &self.xml(doc)).unwrap();
        }
        b.build().unwrap()
    }

    /// Nodes whose Dewey id extends `id`'s within the same document.
    fn subtree_counts(&self, id: usize) -> BTreeMap<String, u32> {
        let me = &self.nodes[id];
        let mut counts = BTreeMap::new();
        for other in &self.nodes {
            if other.doc == me.doc && other.dewey.starts_with(&me.dewey) {
                for t in &other.tokens {
                    *counts.entry(t.clone()).or_insert(0) += 1;
                }
            }
        }
        counts
    }

    pub fn has_text(&self) -> bool {
        self.nodes.iter().any(|n| !n.tokens.is_empty())
    }
}

pub struct DenseReference {
    /// key: (doc id, dotted Dewey)
    pub value: BTreeMap<(String, String), f64>,
    pub cosine: BTreeMap<(String, String), f64>,
}

/// Materializes full dense weight vectors over every term and scores each
/// element as `q·e / |e|` and `q·e / (|q||e|)`.
pub fn dense_reference(corpus: &MiniCorpus, query: &[String]) -> DenseReference {
    let terms: Vec<String> = (0..corpus.vocab_size).map(term).collect();
    let n = corpus.nodes.len() as f64;
    let subtree: Vec<BTreeMap<String, u32>> = (0..corpus.nodes.len()).map(|i| corpus.subtree_counts(i)).collect();
    let ief: Vec<f64> = terms
        .iter()
        .map(|t| {
            let ef = subtree.iter().filter(|c| c.contains_key(t)).count() as f64;
            if ef == 0.0 {
                0.0
            } else {
                (n / ef).log10()
            }
        })
        .collect();
    let q: Vec<f64> = terms
        .iter()
        .zip(&ief)
        .map(|(t, &w)| {
            let tf = query.iter().filter(|x| *x == t).count();
            if tf == 0 {
                0.0
            } else {
                (1.0 + (tf as f64).log10()) * w
            }
        })
        .collect();
    let q_norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut value = BTreeMap::new();
    let mut cosine = BTreeMap::new();
    for (i, node) in corpus.nodes.iter().enumerate() {
        let e: Vec<f64> = terms
            .iter()
            .zip(&ief)
            .map(|(t, &w)| match subtree[i].get(t) {
                Some(&tf) => (1.0 + (tf as f64).log10()) * w,
                None => 0.0,
            })
            .collect();
        let e_norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dot: f64 = q.iter().zip(&e).map(|(a, b)| a * b).sum();
        let dewey: Vec<String> = node.dewey.iter().map(u32::to_string).collect();
        let key = (format!("doc{}", node.doc), dewey.join("."));
        value.insert(key.clone(), if e_norm == 0.0 { 0.0 } else { dot / e_norm });
        cosine.insert(
            key,
            if e_norm == 0.0 || q_norm == 0.0 {
                0.0
            } else {
                dot / (q_norm * e_norm)
            },
        );
    }
    DenseReference { value, cosine }
}

pub fn random_query(rng: &mut StdRng, vocab_size: usize) -> Vec<String> {
    let len = rng.random_range(1..=5);
    (0..len).map(|_| term(rng.random_range(0..vocab_size + 2))).collect()
}

// ---------------------------------------------------------------------------
// Large two-topic corpus for the filter-efficiency comparison.

pub const MUSIC_WORDS: [&str; 12] = [
    "music", "pitch", "step", "octave", "voice", "staff", "beam", "eighth", "duration", "natural", "16th", "measure",
];
pub const FURNITURE_WORDS: [&str; 12] = [
    "furniture",
    "table",
    "chair",
    "width",
    "length",
    "coffee",
    "oak",
    "drawer",
    "shelf",
    "desk",
    "cabinet",
    "sofa",
];

pub const SHARED_WORDS: [&str; 3] = ["type", "list", "size"];

/// `docs` documents of 50 elements each (root, 7 sections, 6 leaves per
/// section). Even documents are bound to a music namespace, odd ones to a
/// furniture namespace, and draw their leaf text from that topic. A few
/// shared words occur in both topics, far more often under music.
pub fn two_topic_corpus(docs: usize, seed: u64) -> IndexArtifact {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut b = IndexBuilder::default();
    for d in 0..docs {
        let (uri, words, shared) = if d % 2 == 0 {
            ("urn:corpus:music", &MUSIC_WORDS, 0.4)
        } else {
            ("urn:corpus:furniture", &FURNITURE_WORDS, 0.2)
        };
        let mut xml = format!(r#"<t:doc xmlns:t="{uri}">"#);
        for _ in 0..7 {
            xml.push_str("<t:section>");
            for _ in 0..6 {
                xml.push_str("<t:item>");
                let n = rng.random_range(2..=5);
                let mut text: Vec<&str> = (0..n).map(|_| words[rng.random_range(0..words.len())]).collect();
                if rng.random_bool(shared) {
                    text.push(SHARED_WORDS[rng.random_range(0..SHARED_WORDS.len())]);
                }
                xml.push_str(&text.join(" "));
                xml.push_str("</t:item>");
            }
            xml.push_str("</t:section>");
        }
        xml.push_str("</t:doc>");
        b.add_document(&format!("doc{d:04}.xml"), &xml).unwrap();
    }
    b.build().unwrap()
}

pub fn keyset(items: &[(&str, &str)]) -> BTreeSet<(String, DeweyId)> {
    items.iter().map(|(d, e)| (d.to_string(), e.parse().unwrap())).collect()
}
