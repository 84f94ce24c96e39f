//! Page segmentation.
//!
//! A page is cut into atomic blocks (block-level elements that contain no
//! further block-level elements, plus runs of inline content that sit between
//! blocks). Adjacent sibling blocks whose text densities are close are then
//! fused left to right, and every resulting group becomes one [`Segment`]
//! carrying its text tokens, links and images.

mod tokens;
mod triple;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dom::{visible_text, DomNode, Element, PageDocument};

pub use tokens::{normalize_token, tokenize};
pub use triple::{extract_triple, extract_triple_at};

/// Marker attribute carried by the placeholder that replaces a blocked segment.
pub const DUMMY_ATTR: &str = "data-segfilter";
pub const DUMMY_ATTR_VALUE: &str = "blocked";
/// Set on anchors whose `href` was removed by link hiding. Holds the url
/// tokens that were kept, which still count as the link's url tokens.
pub const UNLINKED_ATTR: &str = "data-segfilter-unlinked";

pub const DEFAULT_BLOCK_TAGS: &[&str] = &[
    "address",
    "article",
    "aside",
    "blockquote",
    "div",
    "dl",
    "fieldset",
    "figure",
    "footer",
    "form",
    "h1",
    "h2",
    "h3",
    "h4",
    "h5",
    "h6",
    "header",
    "hr",
    "li",
    "main",
    "nav",
    "ol",
    "p",
    "pre",
    "section",
    "table",
    "td",
    "ul",
];

/// Child indices leading from `body` to a node.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodePath(pub Vec<usize>);

impl NodePath {
    pub fn child(&self, i: usize) -> NodePath {
        let mut v = self.0.clone();
        v.push(i);
        NodePath(v)
    }
}

impl std::fmt::Display for NodePath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "/{}", parts.join("/"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkItem {
    pub href: String,
    pub anchor_tokens: Vec<String>,
    pub url_tokens: Vec<String>,
    pub node_path: NodePath,
}

impl LinkItem {
    /// Anchor tokens followed by URL tokens: everything the link filter scores.
    pub fn scored_tokens(&self) -> impl Iterator<Item = &String> {
        self.anchor_tokens.iter().chain(&self.url_tokens)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageItem {
    pub src: String,
    pub alt_tokens: Vec<String>,
    pub node_path: NodePath,
}

/// The text / link / image evidence of one segment.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentContent {
    pub text_tokens: Vec<String>,
    pub links: Vec<LinkItem>,
    pub images: Vec<ImageItem>,
}

impl SegmentContent {
    pub fn is_empty(&self) -> bool {
        self.text_tokens.is_empty() && self.links.is_empty() && self.images.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub index: usize,
    /// One path per root node, all siblings under the same parent.
    pub node_paths: Vec<NodePath>,
    pub nodes: Vec<DomNode>,
    pub content: SegmentContent,
    pub density: f64,
    pub is_dummy: bool,
}

impl Segment {
    /// True when this segment is a single placeholder left by a previous
    /// filtering pass.
    pub fn is_placeholder(&self) -> bool {
        matches!(self.nodes.as_slice(), [DomNode::Element(e)] if is_dummy_marker(e))
    }
}

pub fn is_dummy_marker(el: &Element) -> bool {
    el.attr(DUMMY_ATTR) == Some(DUMMY_ATTR_VALUE)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmenterConfig {
    pub block_tags: BTreeSet<String>,
    pub wrap_width: usize,
    pub merge_threshold: f64,
    pub drop_empty: bool,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        Self {
            block_tags: DEFAULT_BLOCK_TAGS.iter().map(|t| t.to_string()).collect(),
            wrap_width: 80,
            merge_threshold: 2.0,
            drop_empty: true,
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("wrap width must be at least 1")]
    ZeroWrapWidth,
    #[error("merge threshold must be a non-negative number, got {0}")]
    BadMergeThreshold(f64),
}

impl SegmenterConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.wrap_width == 0 {
            return Err(ConfigError::ZeroWrapWidth);
        }
        if self.merge_threshold.is_nan() || self.merge_threshold < 0.0 {
            return Err(ConfigError::BadMergeThreshold(self.merge_threshold));
        }
        Ok(())
    }

    fn is_block(&self, tag: &str) -> bool {
        self.block_tags.contains(tag)
    }
}

/// Tokens per wrapped line of a block's visible text.
pub fn text_density(block: &DomNode, wrap_width: usize) -> f64 {
    density_of(&visible_text(block), wrap_width)
}

fn density_of(text: &str, wrap_width: usize) -> f64 {
    let tokens = tokenize(text).len();
    let chars = text.chars().count();
    let lines = chars.div_ceil(wrap_width.max(1)).max(1);
    tokens as f64 / lines as f64
}

/// Splits the body of `doc` into segments in document order.
pub fn segment_page(doc: &PageDocument, cfg: &SegmenterConfig) -> Vec<Segment> {
    let body = doc.body();
    let marks = Marks::compute(body, cfg);
    let mut walker = Walker {
        cfg,
        chains: Vec::new(),
    };
    walker.container(body, &marks, &NodePath::default());

    let mut segments = Vec::new();
    for chain in walker.chains {
        for group in merge_chain(chain, cfg.merge_threshold) {
            let roots: Vec<(NodePath, &DomNode)> = group
                .iter()
                .flat_map(|u| u.paths.iter())
                .map(|p| (p.clone(), body.descendant(&p.0).expect("path from walk")))
                .collect();
            let content = extract_triple_at(&roots);
            if cfg.drop_empty && content.is_empty() {
                continue;
            }
            let text = group
                .iter()
                .map(|u| u.text.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            segments.push(Segment {
                index: segments.len(),
                node_paths: roots.iter().map(|(p, _)| p.clone()).collect(),
                nodes: roots.iter().map(|(_, n)| (*n).clone()).collect(),
                content,
                density: density_of(&text, cfg.wrap_width),
                is_dummy: false,
            });
        }
    }
    segments
}

/// For each node, whether any element strictly below it is block-level.
/// Mirrors the tree shape so the walk can look it up by child index.
struct Marks {
    block_below: bool,
    kids: Vec<Marks>,
}

impl Marks {
    fn compute(node: &DomNode, cfg: &SegmenterConfig) -> Marks {
        match node {
            DomNode::Element(el) if !el.is_invisible() => {
                let kids: Vec<Marks> = el.children.iter().map(|c| Marks::compute(c, cfg)).collect();
                let block_below = el.children.iter().zip(&kids).any(|(c, m)| {
                    m.block_below
                        || c.as_element().is_some_and(|e| {
                            !e.is_invisible() && (cfg.is_block(&e.tag) || is_dummy_marker(e))
                        })
                });
                Marks { block_below, kids }
            }
            _ => Marks {
                block_below: false,
                kids: Vec::new(),
            },
        }
    }
}

/// An atomic block: one block element or a run of inline siblings.
struct Unit {
    paths: Vec<NodePath>,
    text: String,
    density: f64,
    /// Placeholders never fuse with neighbours.
    sealed: bool,
}

struct Walker<'a> {
    cfg: &'a SegmenterConfig,
    /// Sequences of adjacent sibling units; only units within one chain may fuse.
    chains: Vec<Vec<Unit>>,
}

impl Walker<'_> {
    fn container(&mut self, node: &DomNode, marks: &Marks, path: &NodePath) {
        let children = node.children();
        let mut seq: Vec<Unit> = Vec::new();
        let mut run: Vec<usize> = Vec::new();

        for (i, child) in children.iter().enumerate() {
            let DomNode::Element(el) = child else {
                run.push(i);
                continue;
            };
            if el.is_invisible() {
                run.push(i);
            } else if is_dummy_marker(el) {
                self.flush_run(children, path, &mut run, &mut seq);
                seq.push(self.unit(children, path, &[i], true));
            } else if marks.kids[i].block_below {
                self.flush_run(children, path, &mut run, &mut seq);
                self.chains.push(std::mem::take(&mut seq));
                self.container(child, &marks.kids[i], &path.child(i));
            } else if self.cfg.is_block(&el.tag) {
                self.flush_run(children, path, &mut run, &mut seq);
                seq.push(self.unit(children, path, &[i], false));
            } else {
                run.push(i);
            }
        }
        self.flush_run(children, path, &mut run, &mut seq);
        self.chains.push(seq);
    }

    fn flush_run(
        &self,
        children: &[DomNode],
        path: &NodePath,
        run: &mut Vec<usize>,
        seq: &mut Vec<Unit>,
    ) {
        let first = run.iter().position(|&i| is_significant(&children[i]));
        let last = run.iter().rposition(|&i| is_significant(&children[i]));
        if let (Some(first), Some(last)) = (first, last) {
            let idx = run[first..=last].to_vec();
            seq.push(self.unit(children, path, &idx, false));
        }
        run.clear();
    }

    fn unit(&self, children: &[DomNode], path: &NodePath, idx: &[usize], sealed: bool) -> Unit {
        let text = idx
            .iter()
            .map(|&i| visible_text(&children[i]))
            .filter(|t| !t.is_empty())
            .collect::<Vec<_>>()
            .join(" ");
        Unit {
            paths: idx.iter().map(|&i| path.child(i)).collect(),
            density: density_of(&text, self.cfg.wrap_width),
            text,
            sealed,
        }
    }
}

/// Inline content worth wrapping: non-blank text or a rendered element.
fn is_significant(node: &DomNode) -> bool {
    match node {
        DomNode::Text { text } => !text.trim().is_empty(),
        DomNode::Comment { .. } => false,
        DomNode::Element(el) => !el.is_invisible(),
    }
}

/// Greedy left-to-right fusion: a unit joins the current group when its
/// density is within `threshold` of the group's last unit.
fn merge_chain(chain: Vec<Unit>, threshold: f64) -> Vec<Vec<Unit>> {
    let mut groups: Vec<Vec<Unit>> = Vec::new();
    for unit in chain {
        if let Some(group) = groups.last_mut() {
            let last = group.last().expect("groups are never empty");
            if !unit.sealed && !last.sealed && (last.density - unit.density).abs() <= threshold {
                group.push(unit);
                continue;
            }
        }
        groups.push(vec![unit]);
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::parse_html;

    fn segs(html: &str, cfg: &SegmenterConfig) -> Vec<Segment> {
        segment_page(&parse_html(html.as_bytes(), None).unwrap(), cfg)
    }

    fn words(n: usize) -> String {
        (0..n)
            .map(|i| format!("w{i}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    #[test]
    fn single_block() {
        let s = segs("<p>a b c</p>", &SegmenterConfig::default());
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].content.text_tokens, vec!["a", "b", "c"]);
        assert_eq!(s[0].node_paths, vec![NodePath(vec![0])]);
        assert!(!s[0].is_dummy);
    }

    #[test]
    fn empty_body() {
        assert!(segs("", &SegmenterConfig::default()).is_empty());
        assert!(segs("  \n <!-- x -->", &SegmenterConfig::default()).is_empty());
    }

    #[test]
    fn greedy_merge_follows_density_difference() {
        // 10 tokens in 29 chars is one line (density 10); 2 tokens is density 2.
        let html = format!("<p>{}</p><p>{}</p>", words(10), words(2));
        let mut cfg = SegmenterConfig::default();
        assert_eq!(segs(&html, &cfg).len(), 2);
        cfg.merge_threshold = 10.0;
        let merged = segs(&html, &cfg);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].node_paths.len(), 2);
        assert_eq!(merged[0].content.text_tokens.len(), 12);
    }

    #[test]
    fn density_examples() {
        assert_eq!(text_density(&DomNode::element("div", vec![]), 80), 0.0);
        // 10 tokens spread over 120 characters wraps onto two lines.
        let text = format!("{}{}", "abcdefghijk ".repeat(9), "x".repeat(12));
        assert_eq!(text.chars().count(), 120);
        let p = DomNode::element("p", vec![DomNode::text(text)]);
        assert_eq!(text_density(&p, 80), 5.0);
        let p = DomNode::element("p", vec![DomNode::text("one two three")]);
        assert_eq!(text_density(&p, 80), 3.0);
    }

    #[test]
    fn inline_runs_between_blocks_become_units() {
        let s = segs(
            "<div>intro words here <p>para</p> trailing bit</div>",
            &SegmenterConfig {
                merge_threshold: 0.0,
                ..Default::default()
            },
        );
        let texts: Vec<_> = s.iter().map(|s| s.content.text_tokens.join(" ")).collect();
        assert_eq!(texts, vec!["intro words here", "para", "trailing bit"]);
        assert_eq!(s[0].node_paths, vec![NodePath(vec![0, 0])]);
        assert_eq!(s[1].node_paths, vec![NodePath(vec![0, 1])]);
    }

    #[test]
    fn containers_break_adjacency() {
        // Both paragraphs have density 1, but they live under different parents.
        let s = segs(
            "<div><p>alpha</p></div><div><p>beta</p></div>",
            &SegmenterConfig::default(),
        );
        assert_eq!(s.len(), 2);
        let s = segs("<p>alpha</p><p>beta</p>", &SegmenterConfig::default());
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn placeholders_are_never_fused() {
        let html = format!(
            r#"<p>alpha</p><div {DUMMY_ATTR}="{DUMMY_ATTR_VALUE}">[segment blocked]</div><p>beta</p>"#
        );
        let s = segs(&html, &SegmenterConfig::default());
        assert_eq!(s.len(), 3);
        assert!(s[1].is_placeholder());
        assert!(!s[1].is_dummy);
    }

    #[test]
    fn empty_blocks_are_dropped_unless_configured() {
        let html = "<p>a</p><hr><p>b</p>";
        let cfg = SegmenterConfig {
            merge_threshold: 0.0,
            ..Default::default()
        };
        assert_eq!(segs(html, &cfg).len(), 2);
        let keep = SegmenterConfig {
            drop_empty: false,
            ..cfg
        };
        assert_eq!(segs(html, &keep).len(), 3);
    }

    #[test]
    fn indices_are_sequential() {
        let s = segs(
            "<ul><li>one</li><li>two two two two two two</li></ul><p>x</p>",
            &SegmenterConfig::default(),
        );
        for (i, seg) in s.iter().enumerate() {
            assert_eq!(seg.index, i);
        }
    }

    #[test]
    fn config_validation() {
        assert!(SegmenterConfig::default().validate().is_ok());
        let bad = SegmenterConfig {
            wrap_width: 0,
            ..Default::default()
        };
        assert_eq!(bad.validate(), Err(ConfigError::ZeroWrapWidth));
        let bad = SegmenterConfig {
            merge_threshold: f64::NAN,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
