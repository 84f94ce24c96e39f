//! JSON views of segment listings and filter score reports.

use serde::Serialize;

use crate::filter::FilteredPage;
use crate::segment::{NodePath, Segment};

#[derive(Debug, Serialize)]
pub struct SegmentRecord<'a> {
    pub index: usize,
    pub node_path: &'a [NodePath],
    pub density: f64,
    pub text_tokens: &'a [String],
    pub links: Vec<LinkRecord<'a>>,
    pub images: Vec<ImageRecord<'a>>,
}

#[derive(Debug, Serialize)]
pub struct LinkRecord<'a> {
    pub href: &'a str,
    pub anchor_tokens: &'a [String],
    pub url_tokens: &'a [String],
}

#[derive(Debug, Serialize)]
pub struct ImageRecord<'a> {
    pub src: &'a str,
    pub alt_tokens: &'a [String],
}

#[derive(Debug, Serialize)]
pub struct ReportRecord {
    pub index: usize,
    pub text_weight: i64,
    pub link_weight: i64,
    pub image_weight: i64,
    pub total: i64,
    pub disposition: &'static str,
}

pub fn segment_records(segments: &[Segment]) -> Vec<SegmentRecord<'_>> {
    segments
        .iter()
        .map(|s| SegmentRecord {
            index: s.index,
            node_path: &s.node_paths,
            density: s.density,
            text_tokens: &s.content.text_tokens,
            links: s
                .content
                .links
                .iter()
                .map(|l| LinkRecord {
                    href: &l.href,
                    anchor_tokens: &l.anchor_tokens,
                    url_tokens: &l.url_tokens,
                })
                .collect(),
            images: s
                .content
                .images
                .iter()
                .map(|i| ImageRecord {
                    src: &i.src,
                    alt_tokens: &i.alt_tokens,
                })
                .collect(),
        })
        .collect()
}

pub fn report_records(page: &FilteredPage) -> Vec<ReportRecord> {
    page.segments
        .iter()
        .map(|f| ReportRecord {
            index: f.segment.index,
            text_weight: f.score.text_weight,
            link_weight: f.score.link_weight,
            image_weight: f.score.image_weight,
            total: f.score.total,
            disposition: f.disposition.name(),
        })
        .collect()
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("records serialize");
    out.push('\n');
    out
}

pub fn segments_json(segments: &[Segment]) -> String {
    to_json(&segment_records(segments))
}

pub fn report_json(page: &FilteredPage) -> String {
    to_json(&report_records(page))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::parse_html;
    use crate::filter::{filter_page, FilterConfig};
    use crate::profile::ProfileBag;
    use crate::segment::{segment_page, SegmenterConfig};

    #[test]
    fn segment_listing_shape() {
        let doc = parse_html(
            br#"<p>Hello <a href="/games/x">Play</a> <img src="a.png" alt="Poker"></p>"#,
            None,
        )
        .unwrap();
        let segs = segment_page(&doc, &SegmenterConfig::default());
        let v: serde_json::Value = serde_json::from_str(&segments_json(&segs)).unwrap();
        assert_eq!(
            v,
            serde_json::json!([{
                "index": 0,
                "node_path": [[0]],
                "density": segs[0].density,
                "text_tokens": ["hello"],
                "links": [{"href": "/games/x", "anchor_tokens": ["play"], "url_tokens": ["games", "x"]}],
                "images": [{"src": "a.png", "alt_tokens": ["poker"]}],
            }])
        );
    }

    #[test]
    fn report_shape() {
        let doc = parse_html(b"<div><p>news news</p></div><div><p>games</p></div>", None).unwrap();
        let bag = ProfileBag::new(["news"], ["games"], 0).unwrap();
        let page = filter_page(
            &doc,
            &bag,
            &SegmenterConfig::default(),
            &FilterConfig::default(),
        );
        let v: serde_json::Value = serde_json::from_str(&report_json(&page)).unwrap();
        assert_eq!(
            v,
            serde_json::json!([
                {"index": 0, "text_weight": 2, "link_weight": 0, "image_weight": 0, "total": 2, "disposition": "display"},
                {"index": 1, "text_weight": -1, "link_weight": 0, "image_weight": 0, "total": -1, "disposition": "block"},
            ])
        );
    }
}
