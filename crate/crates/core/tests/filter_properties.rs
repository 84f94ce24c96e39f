mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use segfilter::dom::{parse_html, serialize_html, DomNode, PageDocument};
use segfilter::filter::{filter_page, Disposition, FilterConfig, FilterMode};
use segfilter::profile::ProfileBag;
use segfilter::segment::{is_dummy_marker, segment_page, SegmenterConfig};

fn case(seed: u64) -> (PageDocument, ProfileBag) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let doc = parse_html(common::random_page(&mut rng).as_bytes(), None).unwrap();
    let (like, unlike) = common::random_tracks(&mut rng);
    let threshold = rng.gen_range(-2..=1);
    (doc, ProfileBag::new(&like, &unlike, threshold).unwrap())
}

fn cfg(mode: FilterMode) -> FilterConfig {
    FilterConfig {
        mode,
        ..Default::default()
    }
}

fn count_markers(node: &DomNode) -> usize {
    match node {
        DomNode::Element(el) => {
            usize::from(is_dummy_marker(el)) + el.children.iter().map(count_markers).sum::<usize>()
        }
        _ => 0,
    }
}

fn idempotent(doc: &PageDocument, bag: &ProfileBag, mode: FilterMode) -> Result<(), TestCaseError> {
    let scfg = SegmenterConfig::default();
    let first = serialize_html(&filter_page(doc, bag, &scfg, &cfg(mode)).document);
    let reparsed = parse_html(&first, None).unwrap();
    let second = serialize_html(&filter_page(&reparsed, bag, &scfg, &cfg(mode)).document);
    prop_assert_eq!(
        String::from_utf8(first).unwrap(),
        String::from_utf8(second).unwrap()
    );
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn scores_decompose_and_counts_match(seed in any::<u64>(), linkhide in any::<bool>()) {
        let (doc, bag) = case(seed);
        let mode = if linkhide { FilterMode::LinkHide } else { FilterMode::Block };
        let scfg = SegmenterConfig::default();
        let page = filter_page(&doc, &bag, &scfg, &cfg(mode));
        let segs = segment_page(&doc, &scfg);
        prop_assert_eq!(page.segments.len(), segs.len());
        let mut blocked = 0;
        for (f, s) in page.segments.iter().zip(&segs) {
            prop_assert_eq!(f.segment.index, s.index);
            let sc = f.score;
            prop_assert_eq!(sc.total, sc.text_weight + sc.link_weight + sc.image_weight);
            if mode == FilterMode::Block {
                prop_assert!(!matches!(f.disposition, Disposition::LinkHide(_)));
            }
            if f.disposition == Disposition::Block {
                blocked += 1;
            }
        }
        prop_assert_eq!(count_markers(page.document.body()), blocked);
    }

    #[test]
    fn idempotent_on_generated_pages(seed in any::<u64>()) {
        let (doc, bag) = case(seed);
        idempotent(&doc, &bag, FilterMode::Block)?;
        idempotent(&doc, &bag, FilterMode::LinkHide)?;
    }

    #[test]
    fn idempotent_on_soup(html in common::soup(), seed in any::<u64>()) {
        let doc = parse_html(html.as_bytes(), None).unwrap();
        let (_, bag) = case(seed);
        idempotent(&doc, &bag, FilterMode::Block)?;
        idempotent(&doc, &bag, FilterMode::LinkHide)?;
    }

    #[test]
    fn no_unlikes_means_nothing_blocked(seed in any::<u64>(), threshold in -5i64..=0) {
        let (doc, bag) = case(seed);
        let bag = ProfileBag::new(bag.like(), &std::collections::BTreeSet::new(), threshold).unwrap();
        for mode in [FilterMode::Block, FilterMode::LinkHide] {
            let page = filter_page(&doc, &bag, &SegmenterConfig::default(), &cfg(mode));
            prop_assert!(page.segments.iter().all(|s| s.disposition == Disposition::Display));
            prop_assert_eq!(&page.document, &doc);
        }
    }

    #[test]
    fn linkhide_never_blocks_more(seed in any::<u64>()) {
        let (doc, bag) = case(seed);
        let scfg = SegmenterConfig::default();
        let count = |mode| {
            filter_page(&doc, &bag, &scfg, &cfg(mode))
                .segments
                .iter()
                .filter(|s| s.disposition == Disposition::Block)
                .count()
        };
        prop_assert!(count(FilterMode::LinkHide) <= count(FilterMode::Block));
    }
}
