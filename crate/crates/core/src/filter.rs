//! Scoring segments against a profile and rewriting the page.
//!
//! Each segment gets a text, link and image weight (+1 per liked token, -1
//! per unliked token). A segment whose total reaches the threshold is kept;
//! otherwise it is replaced by a placeholder element marked
//! `data-segfilter="blocked"`. In link-hiding mode, links carrying an unliked
//! keyword lose their `href` instead whenever the segment is shown anyway or
//! de-linking brings it back over the threshold. A de-linked anchor keeps its
//! url tokens minus the unliked ones in `data-segfilter-unlinked`, so that
//! filtering the output again scores it at least as high and leaves it alone.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::dom::{merge_adjacent_text, settle, DomNode, Element, PageDocument};
use crate::profile::ProfileBag;
use crate::segment::{
    extract_triple_at, segment_page, NodePath, Segment, SegmentContent, SegmenterConfig,
    DUMMY_ATTR, DUMMY_ATTR_VALUE, UNLINKED_ATTR,
};

pub const DEFAULT_DUMMY_MESSAGE: &str = "[segment blocked]";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SegmentScore {
    pub text_weight: i64,
    pub link_weight: i64,
    pub image_weight: i64,
    pub total: i64,
}

impl SegmentScore {
    pub fn new(text_weight: i64, link_weight: i64, image_weight: i64) -> Self {
        Self {
            text_weight,
            link_weight,
            image_weight,
            total: text_weight + link_weight + image_weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Disposition {
    Display,
    Block,
    /// Shown, with `href` removed from the anchors at these paths.
    LinkHide(Vec<NodePath>),
}

impl Disposition {
    pub fn name(&self) -> &'static str {
        match self {
            Disposition::Display => "display",
            Disposition::Block => "block",
            Disposition::LinkHide(_) => "linkhide",
        }
    }

    /// Whether the segment's content stays visible on the filtered page.
    pub fn is_visible(&self) -> bool {
        !matches!(self, Disposition::Block)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum FilterMode {
    #[default]
    Block,
    LinkHide,
}

impl std::str::FromStr for FilterMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "block" => Ok(FilterMode::Block),
            "linkhide" => Ok(FilterMode::LinkHide),
            other => Err(format!(
                "unknown filter mode {other:?} (expected block or linkhide)"
            )),
        }
    }
}

/// How matching tokens are counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Counting {
    /// Every occurrence of a keyword counts.
    #[default]
    Occurrences,
    /// Each distinct keyword counts once per component.
    UniqueTerms,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterConfig {
    pub mode: FilterMode,
    pub dummy_message: String,
    pub threshold_override: Option<i64>,
    pub counting: Counting,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            mode: FilterMode::Block,
            dummy_message: DEFAULT_DUMMY_MESSAGE.to_owned(),
            threshold_override: None,
            counting: Counting::Occurrences,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilteredSegment {
    pub segment: Segment,
    pub score: SegmentScore,
    pub disposition: Disposition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilteredPage {
    pub segments: Vec<FilteredSegment>,
    pub document: PageDocument,
}

/// Sum of keyword weights over token occurrences.
pub fn component_weight<'a>(tokens: impl IntoIterator<Item = &'a String>, bag: &ProfileBag) -> i64 {
    component_weight_with(tokens, bag, Counting::Occurrences)
}

pub fn component_weight_with<'a>(
    tokens: impl IntoIterator<Item = &'a String>,
    bag: &ProfileBag,
    counting: Counting,
) -> i64 {
    match counting {
        Counting::Occurrences => tokens.into_iter().map(|t| bag.weight_of(t)).sum(),
        Counting::UniqueTerms => tokens
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(|t| bag.weight_of(t))
            .sum(),
    }
}

pub fn text_weight(content: &SegmentContent, bag: &ProfileBag) -> i64 {
    component_weight(&content.text_tokens, bag)
}

/// Weight of anchor text and URL tokens of every link, in order.
pub fn link_weight(content: &SegmentContent, bag: &ProfileBag) -> i64 {
    component_weight(content.links.iter().flat_map(|l| l.scored_tokens()), bag)
}

pub fn image_weight(content: &SegmentContent, bag: &ProfileBag) -> i64 {
    component_weight(content.images.iter().flat_map(|i| &i.alt_tokens), bag)
}

pub fn score_content(
    content: &SegmentContent,
    bag: &ProfileBag,
    counting: Counting,
) -> SegmentScore {
    SegmentScore::new(
        component_weight_with(&content.text_tokens, bag, counting),
        component_weight_with(
            content.links.iter().flat_map(|l| l.scored_tokens()),
            bag,
            counting,
        ),
        component_weight_with(
            content.images.iter().flat_map(|i| &i.alt_tokens),
            bag,
            counting,
        ),
    )
}

/// `Display` when the total reaches the threshold (inclusive), else `Block`.
pub fn decide(score: &SegmentScore, threshold: i64) -> Disposition {
    if score.total >= threshold {
        Disposition::Display
    } else {
        Disposition::Block
    }
}

fn dummy_element(message: &str) -> Element {
    Element::new("div")
        .with_attr(DUMMY_ATTR, DUMMY_ATTR_VALUE)
        .with_child(DomNode::text(message))
}

/// The placeholder that takes a blocked segment's place.
pub fn make_dummy_segment(cfg: &FilterConfig, index: usize) -> Segment {
    Segment {
        index,
        node_paths: Vec::new(),
        nodes: vec![DomNode::Element(dummy_element(&cfg.dummy_message))],
        content: SegmentContent::default(),
        density: 0.0,
        is_dummy: true,
    }
}

/// Removes `href` from every anchor in `segment` whose anchor or URL tokens
/// include an unliked keyword, and scores what is left.
///
/// The returned segment's content treats each de-linked anchor as plain
/// text; its nodes carry the unlinked marker exactly as the page will. Also
/// returns the paths of the de-linked anchors.
pub fn apply_link_hiding(segment: &Segment, bag: &ProfileBag) -> (Segment, Vec<NodePath>) {
    let offending: Vec<(NodePath, String)> = segment
        .content
        .links
        .iter()
        .filter(|l| l.scored_tokens().any(|t| bag.unlike().contains(t)))
        .map(|l| (l.node_path.clone(), kept_url_tokens(&l.url_tokens, bag)))
        .collect();
    if offending.is_empty() {
        return (segment.clone(), Vec::new());
    }

    let mut out = segment.clone();
    for (path, _) in &offending {
        if let Some(anchor) = locate_mut(&out.node_paths, &mut out.nodes, path) {
            anchor.remove_attr("href");
            anchor.remove_attr(UNLINKED_ATTR);
        }
    }
    let roots: Vec<(NodePath, &DomNode)> = out
        .node_paths
        .iter()
        .cloned()
        .zip(out.nodes.iter())
        .collect();
    out.content = extract_triple_at(&roots);
    for (path, kept) in &offending {
        if let Some(anchor) = locate_mut(&out.node_paths, &mut out.nodes, path) {
            anchor.set_attr(UNLINKED_ATTR, kept.as_str());
        }
    }
    (out, offending.into_iter().map(|(p, _)| p).collect())
}

fn kept_url_tokens(url_tokens: &[String], bag: &ProfileBag) -> String {
    url_tokens
        .iter()
        .filter(|t| !bag.unlike().contains(*t))
        .map(String::as_str)
        .collect::<Vec<_>>()
        .join(" ")
}

fn locate_mut<'a>(
    root_paths: &[NodePath],
    roots: &'a mut [DomNode],
    target: &NodePath,
) -> Option<&'a mut Element> {
    let k = root_paths.iter().position(|p| target.0.starts_with(&p.0))?;
    let rest = &target.0[root_paths[k].0.len()..];
    roots[k].descendant_mut(rest)?.as_element_mut()
}

/// Segments, scores and rewrites `doc`.
///
/// The threshold is `fcfg.threshold_override` when set, otherwise the
/// profile's. Placeholders left by an earlier run are passed through as
/// displayed, so filtering a filtered page changes nothing.
pub fn filter_page(
    doc: &PageDocument,
    bag: &ProfileBag,
    scfg: &SegmenterConfig,
    fcfg: &FilterConfig,
) -> FilteredPage {
    let (segments, mut document) = filter_once(doc, bag, scfg, fcfg);
    // Removing a subtree can strip the context that kept its neighbours in
    // place (a `select` shielding a nested `a`, say), so the rewritten page
    // may not survive a round trip through the parser. Settle it and filter
    // again until it does; the output is then a fixed point of filtering.
    for _ in 0..MAX_REFILTER_PASSES {
        let settled = settle(document.root.clone());
        if settled == document.root {
            break;
        }
        document.root = settled;
        document = filter_once(&document, bag, scfg, fcfg).1;
    }
    FilteredPage { segments, document }
}

const MAX_REFILTER_PASSES: usize = 4;

fn filter_once(
    doc: &PageDocument,
    bag: &ProfileBag,
    scfg: &SegmenterConfig,
    fcfg: &FilterConfig,
) -> (Vec<FilteredSegment>, PageDocument) {
    let threshold = fcfg.threshold_override.unwrap_or(bag.threshold());
    let segments = segment_page(doc, scfg);

    let mut results = Vec::with_capacity(segments.len());
    let mut strip: Vec<(NodePath, String)> = Vec::new();
    let mut replace: Vec<Vec<NodePath>> = Vec::new();

    for segment in segments {
        if segment.is_placeholder() {
            results.push(FilteredSegment {
                segment: Segment {
                    content: SegmentContent::default(),
                    is_dummy: true,
                    ..segment
                },
                score: SegmentScore::default(),
                disposition: Disposition::Display,
            });
            continue;
        }

        let score = score_content(&segment.content, bag, fcfg.counting);
        let decision = decide(&score, threshold);

        if fcfg.mode == FilterMode::LinkHide {
            let (hidden, paths) = apply_link_hiding(&segment, bag);
            if !paths.is_empty() {
                let rescored = score_content(&hidden.content, bag, fcfg.counting);
                // Offending links never stay live in this mode: a segment shown
                // anyway loses them too, and a blocked one comes back if losing
                // them lifts it to the threshold.
                if decision == Disposition::Display
                    || decide(&rescored, threshold) == Disposition::Display
                {
                    strip.extend(
                        segment
                            .content
                            .links
                            .iter()
                            .filter(|l| paths.contains(&l.node_path))
                            .map(|l| (l.node_path.clone(), kept_url_tokens(&l.url_tokens, bag))),
                    );
                    results.push(FilteredSegment {
                        segment: hidden,
                        score: rescored,
                        disposition: Disposition::LinkHide(paths),
                    });
                    continue;
                }
            }
        }

        if decision == Disposition::Block {
            replace.push(segment.node_paths.clone());
        }
        results.push(FilteredSegment {
            segment,
            score,
            disposition: decision,
        });
    }

    let document = rewrite(doc, &strip, &replace, &fcfg.dummy_message);
    (results, document)
}

enum Edit {
    Replace,
    Remove,
}

fn rewrite(
    doc: &PageDocument,
    strip: &[(NodePath, String)],
    replace: &[Vec<NodePath>],
    message: &str,
) -> PageDocument {
    let mut out = doc.clone();
    let body = out.body_mut();

    for (path, kept) in strip {
        if let Some(el) = body
            .descendant_mut(&path.0)
            .and_then(DomNode::as_element_mut)
        {
            el.remove_attr("href");
            el.set_attr(UNLINKED_ATTR, kept.as_str());
        }
    }

    let mut edits: Vec<(&NodePath, Edit)> = Vec::new();
    for roots in replace {
        let mut it = roots.iter();
        if let Some(first) = it.next() {
            edits.push((first, Edit::Replace));
        }
        edits.extend(it.map(|p| (p, Edit::Remove)));
    }
    // Later siblings first, so earlier paths stay valid.
    edits.sort_by(|a, b| b.0.cmp(a.0));

    for (path, edit) in edits {
        let Some((&idx, parent_path)) = path.0.split_last() else {
            continue;
        };
        let placeholder = match edit {
            Edit::Replace => Some(placeholder_for(&ancestor_tags(body, parent_path), message)),
            Edit::Remove => None,
        };
        let Some(DomNode::Element(parent)) = body.descendant_mut(parent_path) else {
            continue;
        };
        match edit {
            Edit::Replace => {
                parent.children[idx] = placeholder.expect("built for replace");
            }
            Edit::Remove => {
                parent.children.remove(idx);
            }
        }
    }
    merge_text_recursive(body);
    out
}

/// Tags from `body` down to the node at `path`, inclusive.
fn ancestor_tags<'a>(body: &'a DomNode, path: &[usize]) -> Vec<&'a str> {
    let mut tags = vec!["body"];
    let mut node = body;
    for &i in path {
        match node.children().get(i) {
            Some(child) => {
                tags.extend(child.tag());
                node = child;
            }
            None => break,
        }
    }
    tags
}

/// The placeholder, adapted so an HTML parser leaves it where it is put:
/// a `div` directly inside table structure would be moved out of the table,
/// and one anywhere inside a `p` would close that paragraph.
fn placeholder_for(ancestors: &[&str], message: &str) -> DomNode {
    let mut dummy = dummy_element(message);
    if ancestors.contains(&"p") {
        dummy.tag = "span".to_owned();
    }
    let dummy = DomNode::Element(dummy);
    match ancestors.last().copied().unwrap_or("body") {
        "tr" => DomNode::element("td", vec![dummy]),
        "table" | "tbody" | "thead" | "tfoot" => {
            DomNode::element("tr", vec![DomNode::element("td", vec![dummy])])
        }
        _ => dummy,
    }
}

fn merge_text_recursive(node: &mut DomNode) {
    if let DomNode::Element(el) = node {
        merge_adjacent_text(&mut el.children);
        el.children.iter_mut().for_each(merge_text_recursive);
    }
}
