//! Session metrics for filter decisions against labelled segments.
//!
//! Per session: mean segment count (MSC), mean filtered segment count
//! (MFSC), mean false positives (MFP), mean false negatives (MFN) and
//! accuracy = 100 * (MSC - MFP - MFN) / MSC.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::filter::Disposition;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("no label for segment {index} of page {page_id:?}")]
    MissingLabel { page_id: String, index: usize },
    #[error("duplicate label for segment {index} of page {page_id:?}")]
    DuplicateLabel { page_id: String, index: usize },
    #[error("session {0:?} has no pages")]
    EmptySession(String),
    #[error("page {0:?} has no segments")]
    EmptyPage(String),
    #[error("nothing to aggregate")]
    EmptyInput,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentLabel {
    pub page_id: String,
    pub segment_index: usize,
    pub should_block: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageResult {
    pub page_id: String,
    pub segment_count: usize,
    pub filtered_count: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub session_id: String,
    pub msc: f64,
    pub mfsc: f64,
    pub mfp: f64,
    pub mfn: f64,
    pub accuracy_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub mean_msc: f64,
    pub mean_mfsc: f64,
    pub mean_mfp: f64,
    pub mean_mfn: f64,
    pub mean_accuracy: f64,
}

/// Looks up labels by `(page_id, segment_index)`.
#[derive(Debug, Default)]
pub struct LabelSet {
    map: HashMap<(String, usize), bool>,
}

impl LabelSet {
    pub fn new(labels: impl IntoIterator<Item = SegmentLabel>) -> Result<Self, EvalError> {
        let mut map = HashMap::new();
        for l in labels {
            if map
                .insert((l.page_id.clone(), l.segment_index), l.should_block)
                .is_some()
            {
                return Err(EvalError::DuplicateLabel {
                    page_id: l.page_id,
                    index: l.segment_index,
                });
            }
        }
        Ok(Self { map })
    }

    pub fn should_block(&self, page_id: &str, index: usize) -> Option<bool> {
        self.map.get(&(page_id.to_owned(), index)).copied()
    }
}

/// Counts false positives (blocked but labelled to show) and false
/// negatives (shown but labelled to block). Link-hidden segments count as
/// shown.
pub fn compare(
    page_id: &str,
    dispositions: &[Disposition],
    labels: &LabelSet,
) -> Result<(usize, usize), EvalError> {
    let mut fp = 0;
    let mut fneg = 0;
    for (index, d) in dispositions.iter().enumerate() {
        let should_block =
            labels
                .should_block(page_id, index)
                .ok_or_else(|| EvalError::MissingLabel {
                    page_id: page_id.to_owned(),
                    index,
                })?;
        match (d.is_visible(), should_block) {
            (false, false) => fp += 1,
            (true, true) => fneg += 1,
            _ => {}
        }
    }
    Ok((fp, fneg))
}

/// Builds a [`PageResult`] from one page's dispositions.
pub fn page_result(
    page_id: &str,
    dispositions: &[Disposition],
    labels: &LabelSet,
) -> Result<PageResult, EvalError> {
    let (false_positives, false_negatives) = compare(page_id, dispositions, labels)?;
    Ok(PageResult {
        page_id: page_id.to_owned(),
        segment_count: dispositions.len(),
        filtered_count: dispositions.iter().filter(|d| !d.is_visible()).count(),
        false_positives,
        false_negatives,
    })
}

/// `100 * (msc - mfp - mfn) / msc`, rounded half-up to three decimals.
pub fn accuracy_percent(msc: f64, mfp: f64, mfn: f64) -> f64 {
    round_to(100.0 * (msc - mfp - mfn) / msc, 3)
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    // Nudge by a relative epsilon so values like 89.15995 stored just
    // under the half still round up.
    let scaled = x * scale;
    (scaled + scaled.abs() * 1e-12).round() / scale
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len() as f64;
    values.sum::<f64>() / n
}

pub fn session_metrics(session_id: &str, pages: &[PageResult]) -> Result<MetricsRow, EvalError> {
    if pages.is_empty() {
        return Err(EvalError::EmptySession(session_id.to_owned()));
    }
    if let Some(p) = pages.iter().find(|p| p.segment_count == 0) {
        return Err(EvalError::EmptyPage(p.page_id.clone()));
    }
    let msc = mean(pages.iter().map(|p| p.segment_count as f64));
    let mfsc = mean(pages.iter().map(|p| p.filtered_count as f64));
    let mfp = mean(pages.iter().map(|p| p.false_positives as f64));
    let mfn = mean(pages.iter().map(|p| p.false_negatives as f64));
    Ok(MetricsRow {
        session_id: session_id.to_owned(),
        msc,
        mfsc,
        mfp,
        mfn,
        accuracy_percent: accuracy_percent(msc, mfp, mfn),
    })
}

/// Column means across sessions, rounded to two decimals.
pub fn aggregate(rows: &[MetricsRow]) -> Result<Summary, EvalError> {
    if rows.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let col = |f: fn(&MetricsRow) -> f64| round_to(mean(rows.iter().map(f)), 2);
    Ok(Summary {
        mean_msc: col(|r| r.msc),
        mean_mfsc: col(|r| r.mfsc),
        mean_mfp: col(|r| r.mfp),
        mean_mfn: col(|r| r.mfn),
        mean_accuracy: col(|r| r.accuracy_percent),
    })
}

/// Plain-text table: Session, MSC, MFSC, MFP, MFN, Accuracy(%), one row per
/// session followed by the column means.
pub fn render_table(rows: &[MetricsRow], summary: Option<&Summary>) -> String {
    let header = ["Session", "MSC", "MFSC", "MFP", "MFN", "Accuracy(%)"];
    let mut cells: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            [
                r.session_id.clone(),
                format!("{:.2}", r.msc),
                format!("{:.2}", r.mfsc),
                format!("{:.2}", r.mfp),
                format!("{:.2}", r.mfn),
                format!("{:.3}", r.accuracy_percent),
            ]
        })
        .collect();
    if let Some(s) = summary {
        cells.push([
            "Mean".to_owned(),
            format!("{:.2}", s.mean_msc),
            format!("{:.2}", s.mean_mfsc),
            format!("{:.2}", s.mean_mfp),
            format!("{:.2}", s.mean_mfn),
            format!("{:.2}", s.mean_accuracy),
        ]);
    }

    let mut widths = header.map(str::len);
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }

    let mut out = String::new();
    let line = |out: &mut String, row: &[&str]| {
        for (i, (c, w)) in row.iter().zip(widths).enumerate() {
            if i == 0 {
                let _ = write!(out, "{c:<w$}");
            } else {
                let _ = write!(out, "  {c:>w$}");
            }
        }
        out.push('\n');
    };
    line(&mut out, &header);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    line(
        &mut out,
        &rule.iter().map(String::as_str).collect::<Vec<_>>(),
    );
    for (i, row) in cells.iter().enumerate() {
        if summary.is_some() && i == rows.len() {
            line(
                &mut out,
                &rule.iter().map(String::as_str).collect::<Vec<_>>(),
            );
        }
        line(
            &mut out,
            &row.iter().map(String::as_str).collect::<Vec<_>>(),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use Disposition::*;

    fn labels(page: &str, flags: &[bool]) -> LabelSet {
        LabelSet::new(flags.iter().enumerate().map(|(i, &b)| SegmentLabel {
            page_id: page.into(),
            segment_index: i,
            should_block: b,
        }))
        .unwrap()
    }

    #[test]
    fn compare_examples() {
        let l = labels("p", &[false, true, true]);
        assert_eq!(compare("p", &[Display, Block, Block], &l), Ok((0, 0)));
        let l = labels("p", &[false, true, true, false]);
        assert_eq!(
            compare("p", &[Block, Display, Display, Display], &l),
            Ok((1, 2))
        );
        assert_eq!(compare("p", &[], &LabelSet::default()), Ok((0, 0)));
    }

    #[test]
    fn linkhide_counts_as_shown() {
        let l = labels("p", &[true, false]);
        assert_eq!(
            compare("p", &[LinkHide(vec![]), LinkHide(vec![])], &l),
            Ok((0, 1))
        );
    }

    #[test]
    fn missing_and_duplicate_labels() {
        let l = labels("p", &[false]);
        assert_eq!(
            compare("p", &[Display, Display], &l),
            Err(EvalError::MissingLabel {
                page_id: "p".into(),
                index: 1
            })
        );
        assert_eq!(
            compare("q", &[Display], &l),
            Err(EvalError::MissingLabel {
                page_id: "q".into(),
                index: 0
            })
        );
        let dup = SegmentLabel {
            page_id: "p".into(),
            segment_index: 0,
            should_block: false,
        };
        assert!(matches!(
            LabelSet::new([dup.clone(), dup]),
            Err(EvalError::DuplicateLabel { .. })
        ));
    }

    #[test]
    fn page_result_counts() {
        let l = labels("p", &[true, false, false]);
        let r = page_result("p", &[Block, Block, Display], &l).unwrap();
        assert_eq!(
            r,
            PageResult {
                page_id: "p".into(),
                segment_count: 3,
                filtered_count: 2,
                false_positives: 1,
                false_negatives: 0,
            }
        );
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy_percent(27.52, 1.2, 1.5), 90.189);
        assert_eq!(accuracy_percent(30.25, 0.8, 1.2), 93.388);
        assert_eq!(accuracy_percent(12.0, 0.0, 0.0), 100.0);
    }

    #[test]
    fn session_metrics_means() {
        let page = |n, f, fp, fneg| PageResult {
            page_id: "x".into(),
            segment_count: n,
            filtered_count: f,
            false_positives: fp,
            false_negatives: fneg,
        };
        let row = session_metrics("s", &[page(10, 2, 1, 0), page(20, 4, 0, 1)]).unwrap();
        assert_eq!((row.msc, row.mfsc, row.mfp, row.mfn), (15.0, 3.0, 0.5, 0.5));
        assert_eq!(row.accuracy_percent, 93.333);
        assert_eq!(
            session_metrics("s", &[]),
            Err(EvalError::EmptySession("s".into()))
        );
        assert_eq!(
            session_metrics("s", &[page(0, 0, 0, 0)]),
            Err(EvalError::EmptyPage("x".into()))
        );
    }

    #[test]
    fn aggregate_single_row_is_identity() {
        let row = MetricsRow {
            session_id: "1".into(),
            msc: 27.52,
            mfsc: 5.2,
            mfp: 1.2,
            mfn: 1.5,
            accuracy_percent: 90.189,
        };
        let s = aggregate(std::slice::from_ref(&row)).unwrap();
        assert_eq!(
            (s.mean_msc, s.mean_mfsc, s.mean_mfp, s.mean_mfn),
            (27.52, 5.2, 1.2, 1.5)
        );
        assert_eq!(aggregate(&[]), Err(EvalError::EmptyInput));
    }

    #[test]
    fn table_layout() {
        let row = MetricsRow {
            session_id: "1".into(),
            msc: 27.52,
            mfsc: 5.2,
            mfp: 1.2,
            mfn: 1.5,
            accuracy_percent: 90.189,
        };
        let s = aggregate(std::slice::from_ref(&row)).unwrap();
        let t = render_table(&[row], Some(&s));
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "Session    MSC  MFSC   MFP   MFN  Accuracy(%)");
        assert_eq!(lines[2], "1        27.52  5.20  1.20  1.50       90.189");
        assert_eq!(lines[4], "Mean     27.52  5.20  1.20  1.50        90.19");
    }
}
