use serde::Serialize;

use crate::energy::EnergyModel;
use crate::grid::SnapLineSet;
use crate::layout::{BBox, MIN_SIZE};

/// Candidates closer than this in every parameter are duplicates.
const DEDUP_TOL: f64 = 1e-12;
/// Energies closer than this are treated as tied.
const ENERGY_TIE_TOL: f64 = 1e-12;
/// Slack allowed past the canvas edge before a candidate is dropped.
const CANVAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoveKind {
    Identity,
    SnapLeft,
    SnapRight,
    SnapBothH,
    SnapCenterH,
    SnapTop,
    SnapBottom,
    SnapBothV,
    SnapCenterV,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapCandidate {
    pub element_index: usize,
    pub new_box: BBox,
    pub move_kind: MoveKind,
}

/// The `k` lines nearest to `v`, nearest first; equidistant lines in
/// ascending order.
fn nearest(lines: &[f64], v: f64, k: usize) -> Vec<f64> {
    let mut sorted: Vec<f64> = lines.to_vec();
    sorted.sort_by(|a, b| (a - v).abs().total_cmp(&(b - v).abs()).then(a.total_cmp(b)));
    sorted.truncate(k);
    sorted
}

/// Axis-generic view: `(lo, hi)` span of the box on one axis.
struct Axis {
    horizontal: bool,
}

impl Axis {
    fn span(&self, b: &BBox) -> (f64, f64) {
        if self.horizontal {
            (b.left(), b.right())
        } else {
            (b.top(), b.bottom())
        }
    }

    fn with_span(&self, b: &BBox, lo: f64, hi: f64) -> BBox {
        if self.horizontal {
            BBox::from_edges(lo, b.top(), hi, b.bottom())
        } else {
            BBox::from_edges(b.left(), lo, b.right(), hi)
        }
    }

    fn shifted(&self, b: &BBox, d: f64) -> BBox {
        if self.horizontal {
            b.translated(d, 0.0)
        } else {
            b.translated(0.0, d)
        }
    }

    fn kinds(&self) -> [MoveKind; 4] {
        if self.horizontal {
            [
                MoveKind::SnapLeft,
                MoveKind::SnapRight,
                MoveKind::SnapCenterH,
                MoveKind::SnapBothH,
            ]
        } else {
            [
                MoveKind::SnapTop,
                MoveKind::SnapBottom,
                MoveKind::SnapCenterV,
                MoveKind::SnapBothV,
            ]
        }
    }
}

fn axis_candidates(b: &BBox, lines: &[f64], k: usize, axis: Axis, out: &mut Vec<(BBox, MoveKind)>) {
    let (lo, hi) = axis.span(b);
    let mid = 0.5 * (lo + hi);
    let [k_lo, k_hi, k_mid, k_both] = axis.kinds();
    let near_lo = nearest(lines, lo, k);
    let near_hi = nearest(lines, hi, k);
    out.extend(near_lo.iter().map(|&l| (axis.shifted(b, l - lo), k_lo)));
    out.extend(near_hi.iter().map(|&l| (axis.shifted(b, l - hi), k_hi)));
    out.extend(
        nearest(lines, mid, k)
            .into_iter()
            .map(|l| (axis.shifted(b, l - mid), k_mid)),
    );

    let mut spans: Vec<(f64, BBox)> = Vec::new();
    for &l in &near_lo {
        for &r in &near_hi {
            if r - l >= MIN_SIZE {
                let nb = axis.with_span(b, l, r);
                spans.push((nb.displacement(b), nb));
            }
        }
    }
    spans.sort_by(|a, c| {
        a.0.total_cmp(&c.0)
            .then(axis.span(&a.1).0.total_cmp(&axis.span(&c.1).0))
            .then(axis.span(&a.1).1.total_cmp(&axis.span(&c.1).1))
    });
    out.extend(spans.into_iter().take(k).map(|(_, nb)| (nb, k_both)));
}

fn inside_canvas(b: &BBox) -> bool {
    b.left() >= -CANVAS_TOL && b.top() >= -CANVAS_TOL && b.right() <= 1.0 + CANVAS_TOL && b.bottom() <= 1.0 + CANVAS_TOL
}

fn near_equal(a: &BBox, b: &BBox) -> bool {
    a.to_array()
        .iter()
        .zip(b.to_array())
        .all(|(u, v)| (u - v).abs() <= DEDUP_TOL)
}

/// Snap moves of one element against the `k` nearest grid lines per edge.
/// The identity move comes first; moves that leave the canvas and
/// duplicates of earlier moves are dropped.
pub fn enumerate_candidates(element_index: usize, current: &BBox, lines: &SnapLineSet, k: usize) -> Vec<SnapCandidate> {
    let mut raw = vec![(*current, MoveKind::Identity)];
    axis_candidates(current, &lines.vertical, k, Axis { horizontal: true }, &mut raw);
    axis_candidates(current, &lines.horizontal, k, Axis { horizontal: false }, &mut raw);
    let mut out: Vec<SnapCandidate> = Vec::with_capacity(raw.len());
    for (new_box, move_kind) in raw {
        if !inside_canvas(&new_box) || out.iter().any(|c| near_equal(&c.new_box, &new_box)) {
            continue;
        }
        out.push(SnapCandidate {
            element_index,
            new_box,
            move_kind,
        });
    }
    out
}

/// Indices by descending area; equal areas keep layout order.
pub(crate) fn visit_order(boxes: &[BBox]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|&a, &b| boxes[b].area().total_cmp(&boxes[a].area()).then(a.cmp(&b)));
    order
}

/// One search-and-snap pass. Each element in turn takes the candidate
/// minimizing its share of the energy with all other boxes held fixed.
pub fn stage_a(model: &EnergyModel<'_>, boxes: &[BBox], lines: &SnapLineSet, k: usize) -> Vec<BBox> {
    let mut cur = boxes.to_vec();
    for i in visit_order(boxes) {
        let start = cur[i];
        let mut best = (model.element_energy(&cur, i), 0.0, start);
        for c in enumerate_candidates(i, &start, lines, k).into_iter().skip(1) {
            cur[i] = c.new_box;
            let e = model.element_energy(&cur, i);
            let d = c.new_box.displacement(&start);
            if e < best.0 - ENERGY_TIE_TOL || (e <= best.0 + ENERGY_TIE_TOL && d < best.1) {
                best = (e, d, c.new_box);
            }
        }
        cur[i] = best.2;
    }
    cur.iter().map(BBox::clamped_to_canvas).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::{AlignmentKind, AlignmentRelationSet};
    use crate::config::RectifyConfig;
    use crate::criteria::CriteriaSet;
    use crate::layout::{Element, Layout};

    fn lines(v: &[f64], h: &[f64]) -> SnapLineSet {
        SnapLineSet {
            vertical: v.to_vec(),
            horizontal: h.to_vec(),
        }
    }

    #[test]
    fn nearest_line_choice() {
        let b = BBox::from_edges(0.26, 0.3, 0.36, 0.4);
        let c = enumerate_candidates(0, &b, &lines(&[0.0, 0.5, 1.0], &[]), 1);
        let left: Vec<_> = c.iter().filter(|c| c.move_kind == MoveKind::SnapLeft).collect();
        assert_eq!(left.len(), 1);
        assert!((left[0].new_box.left() - 0.5).abs() < 1e-12);
        assert_eq!(c[0].move_kind, MoveKind::Identity);
    }

    #[test]
    fn span_candidate() {
        let b = BBox::from_edges(0.05, 0.3, 0.45, 0.4);
        let c = enumerate_candidates(0, &b, &lines(&[0.0, 0.5, 1.0], &[]), 1);
        let both: Vec<_> = c.iter().filter(|c| c.move_kind == MoveKind::SnapBothH).collect();
        assert_eq!(both.len(), 1);
        assert!((both[0].new_box.w - 0.5).abs() < 1e-12);
        assert_eq!(both[0].new_box.top(), b.top());
    }

    #[test]
    fn on_line_snap_deduplicated() {
        let b = BBox::from_edges(0.5, 0.3, 0.7, 0.4);
        let c = enumerate_candidates(0, &b, &lines(&[0.5], &[]), 1);
        assert!(c.iter().all(|c| c.move_kind != MoveKind::SnapLeft));
        assert!(c.len() <= 8 + 2 + 1);
    }

    #[test]
    fn candidate_count_bound() {
        let b = BBox::new(0.43, 0.52, 0.17, 0.11);
        let grid = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
        for k in 1..4 {
            let c = enumerate_candidates(0, &b, &lines(&grid, &grid), k);
            assert!(c.len() <= 8 * k + 2 * k * k + 1);
            assert!(c.iter().all(|c| inside_canvas(&c.new_box)));
        }
    }

    fn layout(boxes: &[[f64; 4]]) -> Layout {
        Layout::new(
            1.0,
            1.0,
            boxes
                .iter()
                .enumerate()
                .map(|(k, b)| Element::new(format!("e{k}"), "text", BBox::from_array(*b)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn snaps_a_near_miss() {
        let l = layout(&[[0.3, 0.3, 0.2, 0.2], [0.295, 0.7, 0.2, 0.2]]);
        // e1 left edge 0.195, 0.005 short of the line e0 already sits on
        let g = lines(&[0.2, 0.4, 0.6, 0.8], &[0.2, 0.4, 0.6, 0.8]);
        let r = AlignmentRelationSet::new();
        let m = EnergyModel::new(&l, &r, &CriteriaSet::default(), &RectifyConfig::default(), None).unwrap();
        let out = stage_a(&m, &l.boxes(), &g, 3);
        assert!((out[1].left() - 0.2).abs() < 1e-12, "{:?}", out[1]);
        assert_eq!(out[0], l.elements[0].bbox);
    }

    #[test]
    fn on_grid_is_fixed() {
        let l = layout(&[[0.3, 0.3, 0.2, 0.2], [0.3, 0.7, 0.2, 0.2]]);
        let g = lines(&[0.2, 0.4, 0.6, 0.8], &[0.2, 0.4, 0.6, 0.8]);
        let r = crate::alignment::extract_alignments(&l, 18.0);
        let m = EnergyModel::new(&l, &r, &CriteriaSet::default(), &RectifyConfig::default(), None).unwrap();
        assert_eq!(stage_a(&m, &l.boxes(), &g, 3), l.boxes());
    }

    #[test]
    fn related_pair_converges_on_shared_line() {
        let l = layout(&[[0.305, 0.3, 0.2, 0.1], [0.295, 0.6, 0.2, 0.1]]);
        let mut r = AlignmentRelationSet::new();
        r.insert("e0", "e1", AlignmentKind::Left);
        let m = EnergyModel::new(&l, &r, &CriteriaSet::default(), &RectifyConfig::default(), None).unwrap();
        let g = lines(&[0.2, 0.6], &[]);
        let out = stage_a(&m, &l.boxes(), &g, 1);
        assert!(
            (out[0].left() - 0.2).abs() < 1e-12 && (out[1].left() - 0.2).abs() < 1e-12,
            "{out:?}"
        );
        assert!(AlignmentKind::Left.residual(&out[0], &out[1]) < 1e-12);
    }
}
