#![allow(dead_code)]

use layout_rectifier::{BBox, Element, GridIndex, Layout};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gap between neighboring cells of the synthetic grids; twice the default
/// gutter so both cell edges sit on the inset snap lines.
pub const CELL_GAP: f64 = 0.02;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn layout_of(items: &[(&str, &str, [f64; 4])]) -> Layout {
    Layout::new(
        1.0,
        1.0,
        items
            .iter()
            .map(|(id, c, b)| Element::new(*id, *c, BBox::from_array(*b)))
            .collect(),
    )
    .unwrap()
}

/// Boxes given by edges `[l, t, r, b]`.
pub fn layout_from_edges(items: &[(&str, &str, [f64; 4])]) -> Layout {
    Layout::new(
        1.0,
        1.0,
        items
            .iter()
            .map(|(id, c, e)| Element::new(*id, *c, BBox::from_edges(e[0], e[1], e[2], e[3])))
            .collect(),
    )
    .unwrap()
}

/// Cut `[lo, hi]` into `n` tracks of random relative size. Interior grid
/// lines fall between tracks and each track stays one gutter clear of them.
fn tracks(rng: &mut ChaCha8Rng, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..2.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut lines = vec![lo];
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        lines.push(lo + (hi - lo) * acc / total);
    }
    lines[n] = hi;
    let g = CELL_GAP / 2.0;
    (0..n)
        .map(|k| {
            let a = if k == 0 { lines[k] } else { lines[k] + g };
            let b = if k + 1 == n { lines[k + 1] } else { lines[k + 1] - g };
            (a, b)
        })
        .collect()
}

/// A layout whose boxes fill whole cells (or horizontal runs of cells) of
/// a random column/row grid. Every edge lies on a cell boundary.
pub fn grid_layout(seed: u64, cols: usize, rows: usize, n: usize) -> Layout {
    let mut r = rng(seed);
    let margin = 0.06;
    let cs = tracks(&mut r, margin, 1.0 - margin, cols);
    let rs = tracks(&mut r, margin, 1.0 - margin, rows);
    let mut free = vec![vec![true; cols]; rows];
    let cats = ["title", "text", "image"];
    let mut elements = Vec::new();
    let mut attempts = 0;
    while elements.len() < n && attempts < 10_000 {
        attempts += 1;
        let row = r.random_range(0..rows);
        let c0 = r.random_range(0..cols);
        let free_cells = free.iter().flatten().filter(|&&f| f).count();
        let spare = free_cells > n - elements.len();
        let span = if spare && r.random_bool(0.3) { 2 } else { 1 };
        let c1 = (c0 + span - 1).min(cols - 1);
        if !(c0..=c1).all(|c| free[row][c]) {
            continue;
        }
        free[row][c0..=c1].fill(false);
        let bbox = BBox::from_edges(cs[c0].0, rs[row].0, cs[c1].1, rs[row].1);
        let cat = cats[r.random_range(0..cats.len())];
        elements.push(Element::new(format!("e{:02}", elements.len()), cat, bbox));
    }
    assert_eq!(elements.len(), n, "grid too small for {n} elements");
    Layout::new(1.0, 1.0, elements).unwrap()
}

pub fn index_of(corpus: &[Layout], gutter: f64) -> GridIndex {
    let named: Vec<(String, Layout)> = corpus
        .iter()
        .enumerate()
        .map(|(k, l)| (format!("L{k:02}"), l.clone()))
        .collect();
    GridIndex::build(&named, gutter).unwrap()
}

/// Move every edge by up to `amount`, keeping sizes positive.
pub fn jitter(layout: &Layout, amount: f64, seed: u64) -> Layout {
    let mut r = rng(seed);
    let boxes: Vec<BBox> = layout
        .boxes()
        .iter()
        .map(|b| {
            let mut d = || r.random_range(-amount..=amount);
            BBox::from_edges(b.left() + d(), b.top() + d(), b.right() + d(), b.bottom() + d())
        })
        .collect();
    layout.with_boxes(&boxes)
}

/// Nearest box to the right of box `i` that shares part of its row band.
pub fn right_neighbor(layout: &Layout, i: usize) -> Option<usize> {
    let a = &layout.elements[i].bbox;
    layout
        .elements
        .iter()
        .enumerate()
        .filter(|(j, e)| {
            *j != i && e.bbox.left() >= a.right() && e.bbox.top() < a.bottom() && a.top() < e.bbox.bottom()
        })
        .min_by(|x, y| x.1.bbox.left().total_cmp(&y.1.bbox.left()))
        .map(|(j, _)| j)
}
