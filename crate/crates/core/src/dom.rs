//! Owned HTML document tree.
//!
//! Parsing goes through html5ever's tree builder, so malformed markup is
//! recovered the way a browser would recover it: missing `html`/`head`/`body`
//! elements are synthesized and unclosed tags are closed in document order.
//! The resulting tree is converted into plain owned [`DomNode`] values which
//! the rest of the crate walks and rewrites freely.

use std::fmt::Write as _;

use html5ever::tendril::TendrilSink;
use html5ever::tree_builder::TreeBuilderOpts;
use html5ever::{parse_document, ParseOpts};
use markup5ever_rcdom::{Handle, NodeData, RcDom};
use serde::{Deserialize, Serialize};

/// Default cap on the size of a document accepted by [`parse_html`].
pub const DEFAULT_MAX_INPUT_BYTES: usize = 8 * 1024 * 1024;

const MAX_SETTLE_PASSES: usize = 8;

/// Elements nested deeper than this are hoisted to the ancestor at this depth.
/// Browsers apply the same kind of cap; it keeps every tree walk in the crate
/// within a bounded recursion depth.
pub const MAX_TREE_DEPTH: usize = 512;

/// Elements whose content never contributes visible text.
const INVISIBLE: &[&str] = &[
    "script", "style", "noscript", "template", "iframe", "noembed", "noframes",
];

/// Elements whose text children are serialized verbatim.
const RAW_TEXT: &[&str] = &[
    "script",
    "style",
    "xmp",
    "iframe",
    "noembed",
    "noframes",
    "plaintext",
];

const VOID: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "keygen", "link", "meta", "param",
    "source", "track", "wbr",
];

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum DomError {
    #[error("input of {len} bytes exceeds the {limit} byte limit")]
    InputTooLarge { len: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub tag: String,
    pub attributes: Vec<Attribute>,
    pub children: Vec<DomNode>,
}

impl Element {
    pub fn new(tag: impl Into<String>) -> Self {
        Self {
            tag: tag.into().to_lowercase(),
            attributes: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn with_attr(mut self, name: &str, value: impl Into<String>) -> Self {
        self.set_attr(name, value);
        self
    }

    pub fn with_child(mut self, child: DomNode) -> Self {
        self.children.push(child);
        self
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attributes
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.value.as_str())
    }

    /// Sets an attribute, keeping its position if it already exists.
    pub fn set_attr(&mut self, name: &str, value: impl Into<String>) {
        let name = name.to_lowercase();
        let value = value.into();
        match self.attributes.iter_mut().find(|a| a.name == name) {
            Some(a) => a.value = value,
            None => self.attributes.push(Attribute { name, value }),
        }
    }

    pub fn remove_attr(&mut self, name: &str) -> Option<String> {
        let pos = self.attributes.iter().position(|a| a.name == name)?;
        Some(self.attributes.remove(pos).value)
    }

    pub fn is(&self, tag: &str) -> bool {
        self.tag == tag
    }

    /// True for elements whose subtree is never rendered as text.
    pub fn is_invisible(&self) -> bool {
        INVISIBLE.contains(&self.tag.as_str())
    }

    pub fn is_void(&self) -> bool {
        VOID.contains(&self.tag.as_str())
    }
}

/// One node of a parsed page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum DomNode {
    Element(Element),
    Text { text: String },
    Comment { text: String },
}

impl DomNode {
    pub fn text(s: impl Into<String>) -> Self {
        DomNode::Text { text: s.into() }
    }

    pub fn comment(s: impl Into<String>) -> Self {
        DomNode::Comment { text: s.into() }
    }

    pub fn element(tag: &str, children: Vec<DomNode>) -> Self {
        DomNode::Element(Element {
            tag: tag.to_lowercase(),
            attributes: Vec::new(),
            children,
        })
    }

    pub fn as_element(&self) -> Option<&Element> {
        match self {
            DomNode::Element(e) => Some(e),
            _ => None,
        }
    }

    pub fn as_element_mut(&mut self) -> Option<&mut Element> {
        match self {
            DomNode::Element(e) => Some(e),
            _ => None,
        }
    }

    pub fn tag(&self) -> Option<&str> {
        self.as_element().map(|e| e.tag.as_str())
    }

    pub fn children(&self) -> &[DomNode] {
        match self {
            DomNode::Element(e) => &e.children,
            _ => &[],
        }
    }

    /// Follows `path` as a list of child indices starting at `self`.
    pub fn descendant(&self, path: &[usize]) -> Option<&DomNode> {
        path.iter()
            .try_fold(self, |node, &i| node.children().get(i))
    }

    pub fn descendant_mut(&mut self, path: &[usize]) -> Option<&mut DomNode> {
        let mut node = self;
        for &i in path {
            node = match node {
                DomNode::Element(e) => e.children.get_mut(i)?,
                _ => return None,
            };
        }
        Some(node)
    }
}

/// A parsed page: the `html` element plus where it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageDocument {
    pub root: DomNode,
    pub source_url: Option<String>,
    pub raw_byte_length: usize,
}

impl PageDocument {
    /// Child index of `body` within the root element.
    fn body_index(&self) -> usize {
        self.root
            .children()
            .iter()
            .position(|c| c.tag() == Some("body"))
            .expect("normalized document always has a body")
    }

    pub fn body(&self) -> &DomNode {
        &self.root.children()[self.body_index()]
    }

    pub fn body_mut(&mut self) -> &mut DomNode {
        let idx = self.body_index();
        match &mut self.root {
            DomNode::Element(e) => &mut e.children[idx],
            _ => unreachable!("document root is an element"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParseConfig {
    pub max_input_bytes: usize,
}

impl Default for ParseConfig {
    fn default() -> Self {
        Self {
            max_input_bytes: DEFAULT_MAX_INPUT_BYTES,
        }
    }
}

/// Parses `input` with the default size cap.
pub fn parse_html(input: &[u8], source_url: Option<&str>) -> Result<PageDocument, DomError> {
    parse_html_with(input, source_url, &ParseConfig::default())
}

pub fn parse_html_with(
    input: &[u8],
    source_url: Option<&str>,
    cfg: &ParseConfig,
) -> Result<PageDocument, DomError> {
    if input.len() > cfg.max_input_bytes {
        return Err(DomError::InputTooLarge {
            len: input.len(),
            limit: cfg.max_input_bytes,
        });
    }

    let (text, transcoded) = decode(input);

    let mut root = build_tree(&text);
    if transcoded {
        declare_utf8(&mut root);
    }
    let root = settle(root);

    Ok(PageDocument {
        root,
        source_url: source_url.map(str::to_owned),
        raw_byte_length: input.len(),
    })
}

/// Some recovered trees (foster-parented content, misnested formatting and
/// list items) re-parse differently from how they serialize. Passing the
/// tree back through the parser until it stops changing gives one for which
/// parse(serialize(doc)) == doc.
pub(crate) fn settle(mut root: DomNode) -> DomNode {
    for _ in 0..MAX_SETTLE_PASSES {
        let mut html = String::from("<!DOCTYPE html>");
        write_node(&root, false, &mut html);
        let next = build_tree(&html);
        if next == root {
            break;
        }
        root = next;
    }
    root
}

fn build_tree(text: &str) -> DomNode {
    let opts = ParseOpts {
        tree_builder: TreeBuilderOpts {
            // noscript content becomes a regular subtree instead of raw text.
            scripting_enabled: false,
            // Missing doctype parses in no-quirks mode, the same mode the
            // serialized output (which always carries a doctype) parses in.
            iframe_srcdoc: true,
            drop_doctype: true,
            ..Default::default()
        },
        ..Default::default()
    };
    let dom = parse_document(RcDom::default(), opts).one(text);

    let html = dom
        .document
        .children
        .borrow()
        .iter()
        .find(|h| matches!(&h.data, NodeData::Element { name, .. } if &*name.local == "html"))
        .cloned();
    let mut root = match html {
        Some(h) => convert(&h, 0).unwrap_or_else(|| DomNode::element("html", Vec::new())),
        None => DomNode::element("html", Vec::new()),
    };
    normalize_root(&mut root);
    root
}

/// Decodes input bytes. A BOM wins, then a non-UTF-8 `<meta charset>`
/// declaration; otherwise bytes are read as UTF-8 with replacement.
fn decode(input: &[u8]) -> (std::borrow::Cow<'_, str>, bool) {
    if let Some((enc, bom_len)) = encoding_rs::Encoding::for_bom(input) {
        let (text, _) = enc.decode_without_bom_handling(&input[bom_len..]);
        return (text, enc != encoding_rs::UTF_8);
    }
    if let Some(enc) = sniff_meta_charset(input) {
        if enc != encoding_rs::UTF_8 && enc != encoding_rs::UTF_16LE && enc != encoding_rs::UTF_16BE
        {
            let (text, _) = enc.decode_without_bom_handling(input);
            return (text, true);
        }
    }
    (String::from_utf8_lossy(input), false)
}

/// Looks for a charset declaration in the first 1024 bytes.
fn sniff_meta_charset(input: &[u8]) -> Option<&'static encoding_rs::Encoding> {
    let head = &input[..input.len().min(1024)];
    let lower: Vec<u8> = head.to_ascii_lowercase();
    let mut from = 0;
    while let Some(start) = find(&lower[from..], b"<meta").map(|i| i + from) {
        let end = find(&lower[start..], b">").map_or(lower.len(), |i| i + start);
        let tag = &lower[start..end];
        if let Some(cs) = find(tag, b"charset") {
            let rest = &tag[cs + b"charset".len()..];
            let rest = trim_ascii_start(rest);
            if let Some(rest) = rest.strip_prefix(b"=") {
                let rest = trim_ascii_start(rest);
                let rest = rest
                    .strip_prefix(b"\"")
                    .or_else(|| rest.strip_prefix(b"'"))
                    .unwrap_or(rest);
                let label_end = rest
                    .iter()
                    .position(|b| {
                        matches!(b, b'"' | b'\'' | b';' | b'/' | b' ' | b'\t' | b'\n' | b'\r')
                    })
                    .unwrap_or(rest.len());
                if let Some(enc) = encoding_rs::Encoding::for_label(&rest[..label_end]) {
                    return Some(enc);
                }
            }
        }
        from = end;
        if from >= lower.len() {
            break;
        }
    }
    None
}

fn find(hay: &[u8], needle: &[u8]) -> Option<usize> {
    hay.windows(needle.len()).position(|w| w == needle)
}

fn trim_ascii_start(s: &[u8]) -> &[u8] {
    let n = s.iter().take_while(|b| b.is_ascii_whitespace()).count();
    &s[n..]
}

fn convert(handle: &Handle, depth: usize) -> Option<DomNode> {
    let mut node = shallow(handle)?;
    if let DomNode::Element(el) = &mut node {
        let kids = child_handles(handle);
        if depth + 1 >= MAX_TREE_DEPTH {
            flatten_into(&kids, &mut el.children);
        } else {
            el.children = kids.iter().filter_map(|k| convert(k, depth + 1)).collect();
        }
        merge_adjacent_text(&mut el.children);
    }
    Some(node)
}

/// Converts one node without its children.
fn shallow(handle: &Handle) -> Option<DomNode> {
    match &handle.data {
        NodeData::Text { contents } => Some(DomNode::text(contents.borrow().to_string())),
        NodeData::Comment { contents } => Some(DomNode::comment(contents.to_string())),
        NodeData::Element { name, attrs, .. } => {
            let mut el = Element::new(&*name.local);
            for a in attrs.borrow().iter() {
                let attr_name = match &a.name.prefix {
                    Some(p) => format!("{}:{}", p, &*a.name.local),
                    None => a.name.local.to_string(),
                }
                .to_lowercase();
                if el.attr(&attr_name).is_none() {
                    el.attributes.push(Attribute {
                        name: attr_name,
                        value: a.value.to_string(),
                    });
                }
            }
            Some(DomNode::Element(el))
        }
        _ => None,
    }
}

/// Children of a node, reading through to template contents.
fn child_handles(handle: &Handle) -> Vec<Handle> {
    if let NodeData::Element {
        template_contents, ..
    } = &handle.data
    {
        if let Some(frag) = &*template_contents.borrow() {
            return frag.children.borrow().clone();
        }
    }
    handle.children.borrow().clone()
}

/// Appends the subtrees of `kids` to `out` as a flat preorder sequence of
/// childless elements and text.
fn flatten_into(kids: &[Handle], out: &mut Vec<DomNode>) {
    let mut stack: Vec<Handle> = kids.iter().rev().cloned().collect();
    while let Some(h) = stack.pop() {
        if let Some(node) = shallow(&h) {
            out.push(node);
        }
        stack.extend(child_handles(&h).into_iter().rev());
    }
}

pub(crate) fn merge_adjacent_text(children: &mut Vec<DomNode>) {
    let mut out: Vec<DomNode> = Vec::with_capacity(children.len());
    for child in children.drain(..) {
        match (out.last_mut(), child) {
            (Some(DomNode::Text { text: prev }), DomNode::Text { text }) => prev.push_str(&text),
            (_, DomNode::Text { text }) if text.is_empty() => {}
            (_, c) => out.push(c),
        }
    }
    *children = out;
}

fn normalize_root(root: &mut DomNode) {
    let DomNode::Element(html) = root else {
        *root = DomNode::element("html", Vec::new());
        return normalize_root(root);
    };
    if !html.children.iter().any(|c| c.tag() == Some("body")) {
        html.children.push(DomNode::element("body", Vec::new()));
    }
}

/// After transcoding, rewrites charset declarations so the tree describes
/// its own UTF-8 serialization.
fn declare_utf8(root: &mut DomNode) {
    let DomNode::Element(html) = root else { return };
    for head in html.children.iter_mut().filter_map(DomNode::as_element_mut) {
        if !head.is("head") {
            continue;
        }
        for meta in head.children.iter_mut().filter_map(DomNode::as_element_mut) {
            if !meta.is("meta") {
                continue;
            }
            if meta.attr("charset").is_some() {
                meta.set_attr("charset", "utf-8");
            }
            let is_content_type = meta
                .attr("http-equiv")
                .is_some_and(|v| v.eq_ignore_ascii_case("content-type"));
            if is_content_type && meta.attr("content").is_some() {
                meta.set_attr("content", "text/html; charset=utf-8");
            }
        }
    }
}

/// Serializes a document as UTF-8 HTML, prefixed with `<!DOCTYPE html>`.
pub fn serialize_html(doc: &PageDocument) -> Vec<u8> {
    let mut out = String::with_capacity(doc.raw_byte_length + 64);
    out.push_str("<!DOCTYPE html>");
    write_node(&doc.root, false, &mut out);
    out.into_bytes()
}

/// Serializes a single subtree.
pub fn serialize_node(node: &DomNode) -> String {
    let mut out = String::new();
    write_node(node, false, &mut out);
    out
}

fn write_node(node: &DomNode, raw_parent: bool, out: &mut String) {
    match node {
        DomNode::Text { text } if raw_parent => out.push_str(text),
        DomNode::Text { text } => escape_into(text, false, out),
        DomNode::Comment { text } => {
            let _ = write!(out, "<!--{text}-->");
        }
        DomNode::Element(el) => {
            out.push('<');
            out.push_str(&el.tag);
            for a in &el.attributes {
                out.push(' ');
                out.push_str(&a.name);
                out.push_str("=\"");
                escape_into(&a.value, true, out);
                out.push('"');
            }
            out.push('>');
            if el.is_void() {
                return;
            }
            // The parser drops one newline right after these start tags.
            if matches!(el.tag.as_str(), "pre" | "textarea" | "listing") {
                if let Some(DomNode::Text { text }) = el.children.first() {
                    if text.starts_with('\n') {
                        out.push('\n');
                    }
                }
            }
            let raw = RAW_TEXT.contains(&el.tag.as_str());
            for c in &el.children {
                write_node(c, raw, out);
            }
            out.push_str("</");
            out.push_str(&el.tag);
            out.push('>');
        }
    }
}

fn escape_into(s: &str, attr: bool, out: &mut String) {
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' if attr => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
}

/// Rendered text of a subtree: text nodes outside script/style/noscript/
/// template (and other never-rendered elements) joined in document order,
/// whitespace runs collapsed to one space and trimmed.
pub fn visible_text(node: &DomNode) -> String {
    let mut pieces = Vec::new();
    collect_text(node, &mut pieces);
    collapse_whitespace(&pieces.join(" "))
}

fn collect_text<'a>(node: &'a DomNode, out: &mut Vec<&'a str>) {
    match node {
        DomNode::Text { text } => out.push(text),
        DomNode::Comment { .. } => {}
        DomNode::Element(el) if el.is_invisible() => {}
        DomNode::Element(el) => el.children.iter().for_each(|c| collect_text(c, out)),
    }
}

pub(crate) fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}
