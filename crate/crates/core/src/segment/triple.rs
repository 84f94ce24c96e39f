use crate::dom::DomNode;

use super::{tokenize, ImageItem, LinkItem, NodePath, SegmentContent, UNLINKED_ATTR};

/// Extracts the text / link / image triple from a list of sibling nodes.
///
/// Link and image paths are relative to the list: the first index selects
/// the node, the rest descend from it.
pub fn extract_triple(nodes: &[DomNode]) -> SegmentContent {
    let roots: Vec<(NodePath, &DomNode)> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (NodePath(vec![i]), n))
        .collect();
    extract_triple_at(&roots)
}

/// Like [`extract_triple`], with each root's own path used as the base for
/// link and image locations.
///
/// Text under an anchor that has an `href` is credited to that anchor only.
/// An anchor de-linked by the filter (no `href`, but an unlinked marker)
/// still counts as a link, with the marker's tokens as its url tokens.
/// Alt text is only read from `img` elements, and only into the image list.
pub fn extract_triple_at(roots: &[(NodePath, &DomNode)]) -> SegmentContent {
    let mut content = SegmentContent::default();
    for (path, node) in roots {
        visit(node, path, None, &mut content);
    }
    content
}

fn visit(node: &DomNode, path: &NodePath, anchor: Option<usize>, out: &mut SegmentContent) {
    match node {
        DomNode::Text { text } => {
            let toks = tokenize(text);
            match anchor {
                Some(i) => out.links[i].anchor_tokens.extend(toks),
                None => out.text_tokens.extend(toks),
            }
        }
        DomNode::Comment { .. } => {}
        DomNode::Element(el) if el.is_invisible() => {}
        DomNode::Element(el) => {
            let mut anchor = anchor;
            if el.is("a") {
                let target = match (el.attr("href"), el.attr(UNLINKED_ATTR)) {
                    (Some(href), _) => Some((href, tokenize(href))),
                    (None, Some(kept)) => Some(("", tokenize(kept))),
                    (None, None) => None,
                };
                if let Some((href, url_tokens)) = target {
                    out.links.push(LinkItem {
                        href: href.to_owned(),
                        anchor_tokens: Vec::new(),
                        url_tokens,
                        node_path: path.clone(),
                    });
                    anchor = Some(out.links.len() - 1);
                }
            } else if el.is("img") {
                out.images.push(ImageItem {
                    src: el.attr("src").unwrap_or_default().to_owned(),
                    alt_tokens: el.attr("alt").map(tokenize).unwrap_or_default(),
                    node_path: path.clone(),
                });
            }
            for (i, child) in el.children.iter().enumerate() {
                visit(child, &path.child(i), anchor, out);
            }
        }
    }
}
