//! wasm-bindgen bindings for the browser demo in `www/`.
//!
//! Each exported function takes and returns JSON strings. The `*_json`
//! functions carry the logic and run natively too, which is what the tests use.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use segfilter::dom::{parse_html, serialize_html};
use segfilter::eval::{session_metrics, PageResult};
use segfilter::export::{report_records, segments_json, to_json, ReportRecord};
use segfilter::filter::{filter_page, FilterConfig, FilterMode};
use segfilter::profile::load_profile;
use segfilter::segment::{segment_page, SegmenterConfig};

#[derive(Serialize)]
struct Filtered {
    html: String,
    blocked: usize,
    report: Vec<ReportRecord>,
}

#[derive(Deserialize)]
struct SessionInput {
    id: String,
    pages: Vec<PageResult>,
}

pub fn segment_json(html: &str) -> Result<String, String> {
    let doc = parse_html(html.as_bytes(), None).map_err(|e| e.to_string())?;
    Ok(segments_json(&segment_page(
        &doc,
        &SegmenterConfig::default(),
    )))
}

/// `mode` is `block` or `linkhide`.
pub fn filter_json(html: &str, profile: &str, mode: &str) -> Result<String, String> {
    let bag = load_profile(profile.as_bytes()).map_err(|e| e.to_string())?;
    let mode: FilterMode = mode.parse()?;
    let doc = parse_html(html.as_bytes(), None).map_err(|e| e.to_string())?;
    let fcfg = FilterConfig {
        mode,
        ..FilterConfig::default()
    };
    let page = filter_page(&doc, &bag, &SegmenterConfig::default(), &fcfg);
    let report = report_records(&page);
    let out = Filtered {
        html: String::from_utf8_lossy(&serialize_html(&page.document)).into_owned(),
        blocked: report.iter().filter(|r| r.disposition == "block").count(),
        report,
    };
    Ok(to_json(&out))
}

/// Input: `{"id": "...", "pages": [PageResult, ...]}`.
pub fn session_json(input: &str) -> Result<String, String> {
    let s: SessionInput = serde_json::from_str(input).map_err(|e| e.to_string())?;
    let row = session_metrics(&s.id, &s.pages).map_err(|e| e.to_string())?;
    Ok(to_json(&row))
}

#[wasm_bindgen]
pub fn segment(html: &str) -> Result<String, JsError> {
    segment_json(html).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn filter(html: &str, profile: &str, mode: &str) -> Result<String, JsError> {
    filter_json(html, profile, mode).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn session(input: &str) -> Result<String, JsError> {
    session_json(input).map_err(|e| JsError::new(&e))
}
