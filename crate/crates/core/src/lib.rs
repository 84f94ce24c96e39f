//! Segmentation-based personalized filtering of web pages.
//!
//! A page is parsed ([`dom`]), cut into coherent segments ([`segment`]),
//! and each segment's text, links and image alt text are scored against a
//! [`profile::ProfileBag`] of liked and unliked keywords ([`filter`]).
//! Segments scoring below the profile threshold are replaced by a marked
//! placeholder, or have their offending links removed. [`eval`] computes
//! session metrics for filter decisions against labelled pages.

pub mod dom;
pub mod eval;
pub mod export;
pub mod filter;
pub mod profile;
pub mod segment;

pub use dom::{parse_html, serialize_html, visible_text, DomNode, PageDocument};
pub use filter::{filter_page, Disposition, FilterConfig, FilterMode, FilteredPage, SegmentScore};
pub use profile::ProfileBag;
pub use segment::{segment_page, Segment, SegmentContent, SegmenterConfig};
