//! XML documents to Dewey-labelled element trees.

use std::collections::BTreeMap;

use quick_xml::events::Event;
use quick_xml::name::ResolveResult;
use quick_xml::NsReader;

use crate::dewey::DeweyId;
use crate::error::{Error, Result};
use crate::tokenize::{tokenize, Stopwords};

/// Term multiset.
pub type TermCounts = BTreeMap<String, u32>;

/// Explicit namespace URI to semantic label table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NamespaceMap(BTreeMap<String, String>);

impl NamespaceMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, uri: impl Into<String>, label: &str) -> Result<()> {
        let label = single_token(label).ok_or_else(|| Error::EmptyLabel(label.to_string()))?;
        self.0.insert(uri.into(), label);
        Ok(())
    }

    pub fn get(&self, uri: &str) -> Option<&str> {
        self.0.get(uri).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(u, l)| (u.as_str(), l.as_str()))
    }

    /// Parses `uri<TAB>label` lines; `#` starts a comment line.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut map = NamespaceMap::new();
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
            let (uri, label) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected `uri<TAB>label`".into()))?;
            let label = single_token(label).ok_or_else(|| bad(format!("label `{label}` is not a single term")))?;
            map.0.insert(uri.trim().to_string(), label);
        }
        Ok(map)
    }
}

fn single_token(label: &str) -> Option<String> {
    match tokenize(label, &Stopwords::none()).as_slice() {
        [only] => Some(only.clone()),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamespaceBinding {
    pub prefix: String,
    pub uri: String,
    pub semantic_label: String,
}

/// Label for a namespace URI: the explicit map entry when present, else the
/// last non-empty path segment of the URI, lowercased. A segment that splits
/// into several terms contributes its last term.
pub fn resolve_semantic_label(uri: &str, ns_map: &NamespaceMap) -> Result<String> {
    if let Some(label) = ns_map.get(uri) {
        return Ok(label.to_string());
    }
    uri.split('/')
        .rev()
        .find(|seg| !seg.trim().is_empty())
        .and_then(|seg| tokenize(seg, &Stopwords::none()).pop())
        .ok_or_else(|| Error::EmptyLabel(uri.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementNode {
    pub dewey: DeweyId,
    pub tag: String,
    /// Own binding, or the nearest ancestor's when the element has none.
    pub binding: Option<NamespaceBinding>,
    pub direct_tokens: Vec<String>,
    pub children: Vec<ElementNode>,
}

impl ElementNode {
    pub fn label(&self) -> Option<&str> {
        self.binding.as_ref().map(|b| b.semantic_label.as_str())
    }

    /// All nodes of the subtree in document order.
    pub fn preorder(&self) -> Vec<&ElementNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            out.push(node);
            stack.extend(node.children.iter().rev());
        }
        out
    }

    pub fn element_count(&self) -> usize {
        1 + self.children.iter().map(ElementNode::element_count).sum::<usize>()
    }
}

/// Multiset union of the node's own tokens and those of every descendant.
pub fn subtree_terms(node: &ElementNode) -> TermCounts {
    let mut counts = TermCounts::new();
    for n in node.preorder() {
        for t in &n.direct_tokens {
            *counts.entry(t.clone()).or_insert(0) += 1;
        }
    }
    counts
}

/// Subtree term counts for every node of a tree, in document order, computed
/// bottom-up in a single pass.
pub fn subtree_terms_all(root: &ElementNode) -> Vec<(&ElementNode, TermCounts)> {
    fn walk<'a>(node: &'a ElementNode, out: &mut Vec<(&'a ElementNode, TermCounts)>) -> TermCounts {
        let slot = out.len();
        out.push((node, TermCounts::new()));
        let mut counts = TermCounts::new();
        for t in &node.direct_tokens {
            *counts.entry(t.clone()).or_insert(0) += 1;
        }
        for child in &node.children {
            for (t, c) in walk(child, out) {
                *counts.entry(t).or_insert(0) += c;
            }
        }
        out[slot].1 = counts.clone();
        counts
    }
    let mut out = Vec::with_capacity(root.element_count());
    walk(root, &mut out);
    out
}

struct OpenElement {
    node: ElementNode,
    text: String,
}

fn malformed(reader: &NsReader<&[u8]>, message: impl std::fmt::Display) -> Error {
    Error::MalformedXml {
        position: reader.error_position().max(reader.buffer_position()),
        message: message.to_string(),
    }
}

fn predefined_entity(name: &str) -> Option<char> {
    Some(match name {
        "lt" => '<',
        "gt" => '>',
        "amp" => '&',
        "apos" => '\'',
        "quot" => '"',
        _ => return None,
    })
}

/// Parses one XML document into an element tree. Attribute values, comments
/// and processing instructions contribute no terms.
pub fn parse_document(xml_text: &str, ns_map: &NamespaceMap, stopwords: &Stopwords) -> Result<ElementNode> {
    let mut reader = NsReader::from_str(xml_text);
    let mut stack: Vec<OpenElement> = Vec::new();
    let mut root: Option<ElementNode> = None;

    loop {
        let step = reader
            .read_resolved_event()
            .map(|(resolved, event)| {
                let resolved = match resolved {
                    ResolveResult::Bound(ns) => Ok(Some(String::from_utf8_lossy(ns.as_ref()).into_owned())),
                    ResolveResult::Unbound => Ok(None),
                    ResolveResult::Unknown(prefix) => Err(String::from_utf8_lossy(&prefix).into_owned()),
                };
                (resolved, event)
            })
            .map_err(|e| e.to_string());
        let (resolved, event) = step.map_err(|m| malformed(&reader, m))?;
        let resolved = resolved.map_err(Error::UnresolvablePrefix)?;
        match event {
            Event::Start(ref start) | Event::Empty(ref start) => {
                if root.is_some() {
                    return Err(malformed(&reader, "content after the root element"));
                }
                let is_empty = matches!(event, Event::Empty(_));
                let qname = start.name();
                let tag = String::from_utf8_lossy(qname.as_ref()).into_owned();
                let prefix = qname
                    .prefix()
                    .map(|p| String::from_utf8_lossy(p.as_ref()).into_owned())
                    .unwrap_or_default();
                let binding = match resolved {
                    Some(uri) => Some(NamespaceBinding {
                        semantic_label: resolve_semantic_label(&uri, ns_map)?,
                        prefix,
                        uri,
                    }),
                    None => stack.last().and_then(|p| p.node.binding.clone()),
                };
                let dewey = match stack.last_mut() {
                    Some(parent) => {
                        parent.text.push(' ');
                        parent.node.dewey.child(parent.node.children.len() as u32 + 1)
                    }
                    None => DeweyId::root(),
                };
                let open = OpenElement {
                    node: ElementNode {
                        dewey,
                        tag,
                        binding,
                        direct_tokens: Vec::new(),
                        children: Vec::new(),
                    },
                    text: String::new(),
                };
                if is_empty {
                    close(open, &mut stack, &mut root, stopwords);
                } else {
                    stack.push(open);
                }
            }
            Event::End(_) => {
                let open = stack.pop().ok_or_else(|| malformed(&reader, "unexpected end tag"))?;
                close(open, &mut stack, &mut root, stopwords);
            }
            Event::Text(text) => {
                let decoded = text.decode().map_err(|e| malformed(&reader, e))?;
                match stack.last_mut() {
                    Some(open) => open.text.push_str(&decoded),
                    None if decoded.trim().is_empty() => {}
                    None => return Err(malformed(&reader, "text outside the root element")),
                }
            }
            Event::CData(cdata) => {
                let decoded = cdata.decode().map_err(|e| malformed(&reader, e))?;
                if let Some(open) = stack.last_mut() {
                    open.text.push_str(&decoded);
                }
            }
            Event::GeneralRef(reference) => {
                let ch = match reference.resolve_char_ref().map_err(|e| malformed(&reader, e))? {
                    Some(ch) => ch,
                    None => {
                        let name = reference.decode().map_err(|e| malformed(&reader, e))?;
                        predefined_entity(&name)
                            .ok_or_else(|| malformed(&reader, format!("undefined entity `&{name};`")))?
                    }
                };
                if let Some(open) = stack.last_mut() {
                    open.text.push(ch);
                }
            }
            Event::Eof => break,
            Event::Comment(_) | Event::Decl(_) | Event::PI(_) | Event::DocType(_) => {}
        }
    }

    if let Some(open) = stack.last() {
        return Err(Error::MalformedXml {
            position: xml_text.len() as u64,
            message: format!("unclosed element `{}`", open.node.tag),
        });
    }
    root.ok_or_else(|| Error::MalformedXml {
        position: xml_text.len() as u64,
        message: "no root element".into(),
    })
}

fn close(mut open: OpenElement, stack: &mut [OpenElement], root: &mut Option<ElementNode>, stopwords: &Stopwords) {
    open.node.direct_tokens = tokenize(&open.text, stopwords);
    match stack.last_mut() {
        Some(parent) => parent.node.children.push(open.node),
        None => *root = Some(open.node),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(xml: &str) -> Result<ElementNode> {
        parse_document(xml, &NamespaceMap::new(), &Stopwords::default())
    }

    #[test]
    fn degenerate_document() {
        let root = parse("<a/>").unwrap();
        assert_eq!(root.dewey, DeweyId::root());
        assert!(root.binding.is_none());
        assert!(root.direct_tokens.is_empty() && root.children.is_empty());
    }

    #[test]
    fn sibling_numbering_is_one_based() {
        let root = parse("<a><b/><b/></a>").unwrap();
        let ids: Vec<String> = root.children.iter().map(|c| c.dewey.to_string()).collect();
        assert_eq!(ids, ["0.1", "0.2"]);
    }

    #[test]
    fn label_fallback_and_map() {
        let empty = NamespaceMap::new();
        assert_eq!(
            resolve_semantic_label("http://...../computer", &empty).unwrap(),
            "computer"
        );
        assert_eq!(resolve_semantic_label("http://x/A/B", &empty).unwrap(), "b");
        assert_eq!(resolve_semantic_label("http://x/A/B/", &empty).unwrap(), "b");
        let mut map = NamespaceMap::new();
        map.insert("http://...../happiness", "joy").unwrap();
        assert_eq!(resolve_semantic_label("http://...../happiness", &map).unwrap(), "joy");
        assert!(matches!(
            resolve_semantic_label("http://x/--/", &empty),
            Err(Error::EmptyLabel(_))
        ));
    }

    #[test]
    fn namespace_inheritance() {
        let xml = r#"<r><c:a xmlns:c="http://x/computer"><b>text</b></c:a><d/></r>"#;
        let root = parse(xml).unwrap();
        assert!(root.binding.is_none());
        let a = &root.children[0];
        assert_eq!(a.label(), Some("computer"));
        assert_eq!(a.binding.as_ref().unwrap().prefix, "c");
        assert_eq!(a.children[0].label(), Some("computer"));
        assert!(root.children[1].binding.is_none());
    }

    #[test]
    fn default_namespace_binds() {
        let root = parse(r#"<r xmlns="urn:music"><n>x</n></r>"#).unwrap();
        assert_eq!(root.label(), Some("music"));
        assert_eq!(root.binding.as_ref().unwrap().prefix, "");
    }

    #[test]
    fn unknown_prefix_is_reported() {
        assert!(matches!(parse("<c:a/>"), Err(Error::UnresolvablePrefix(p)) if p == "c"));
    }

    #[test]
    fn malformed_is_reported_with_position() {
        match parse("<a><b></a>") {
            Err(Error::MalformedXml { position, .. }) => assert!(position > 0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("<a>"), Err(Error::MalformedXml { .. })));
        assert!(matches!(parse(""), Err(Error::MalformedXml { .. })));
        assert!(matches!(parse("<a/><b/>"), Err(Error::MalformedXml { .. })));
        assert!(matches!(parse("<a>&bogus;</a>"), Err(Error::MalformedXml { .. })));
    }

    #[test]
    fn attributes_and_comments_ignored_entities_expanded() {
        let root = parse(r#"<a title="hidden words"><!-- secret -->R&amp;D &#x41;pple</a>"#).unwrap();
        assert_eq!(root.direct_tokens, ["r", "d", "apple"]);
    }

    #[test]
    fn mixed_content_does_not_glue_words() {
        let root = parse("<a>foo<b>x</b>bar</a>").unwrap();
        assert_eq!(root.direct_tokens, ["foo", "bar"]);
    }

    #[test]
    fn subtree_union() {
        let root = parse("<r><p>x</p><p>x y</p></r>").unwrap();
        let counts = subtree_terms(&root);
        assert_eq!(counts.get("x"), Some(&2));
        assert_eq!(counts.get("y"), Some(&1));
        let leaf = &root.children[1];
        assert_eq!(
            subtree_terms(leaf).values().sum::<u32>(),
            leaf.direct_tokens.len() as u32
        );
    }

    #[test]
    fn ns_map_file() {
        let map = NamespaceMap::parse("# labels\nhttp://a/happiness\tJoy\n\n", "map.tsv").unwrap();
        assert_eq!(map.get("http://a/happiness"), Some("joy"));
        assert!(NamespaceMap::parse("no-tab-here\n", "m").is_err());
        assert!(NamespaceMap::parse("u\ttwo words\n", "m").is_err());
    }
}
