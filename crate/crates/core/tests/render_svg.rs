mod common;

use std::path::PathBuf;

use common::*;
use layout_rectifier::grid::Boundary;
use layout_rectifier::render::{render_diff, render_svg, RenderStyle};
use layout_rectifier::{construct_grid, extract_alignments, Error};

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn count_class(svg: &str, class: &str) -> usize {
    let doc = roxmltree::Document::parse(svg).expect("well-formed SVG");
    doc.descendants()
        .filter(|n| n.attribute("class") == Some(class))
        .count()
}

fn sample() -> layout_rectifier::Layout {
    layout_from_edges(&[
        ("title", "title", [0.1, 0.05, 0.9, 0.15]),
        ("body", "text", [0.1, 0.2, 0.48, 0.9]),
        ("photo", "image", [0.52, 0.2, 0.9, 0.6]),
    ])
}

#[test]
fn matches_golden_file() {
    let l = sample();
    let grid = construct_grid(&l, Boundary::UNIT, 0.01, "sample");
    let rel = extract_alignments(&l, 18.0);
    let svg = render_svg(&l, &RenderStyle::default(), Some(&grid), Some(&rel));
    let path = golden("sample.svg");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &svg).unwrap();
    }
    let expected = std::fs::read_to_string(&path).expect("golden file present");
    assert_eq!(svg, expected);
}

#[test]
fn one_rect_per_element() {
    for s in 0..10 {
        let l = grid_layout(s, 3, 4, 1 + s as usize);
        let svg = render_svg(&l, &RenderStyle::default(), None, None);
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let rects = doc
            .descendants()
            .filter(|n| n.has_tag_name("rect") && n.attribute("class") == Some("element"));
        assert_eq!(rects.count(), l.len());
    }
}

#[test]
fn diff_draws_one_arrow_per_element() {
    let before = sample();
    let after = jitter(&before, 0.02, 3);
    let svg = render_diff(&before, &after, &RenderStyle::default()).unwrap();
    assert_eq!(count_class(&svg, "element"), 2 * before.len());
    assert_eq!(count_class(&svg, "move"), before.len());

    let other = layout_of(&[("x", "text", [0.5, 0.5, 0.2, 0.2])]);
    assert!(matches!(
        render_diff(&before, &other, &RenderStyle::default()),
        Err(Error::IdMismatch(_))
    ));
}
