//! Perceptual alignment relations between element pairs.
//!
//! Two corresponding edges are aligned when the segment joining them,
//! measured across the gap separating the boxes, deviates from the axis by
//! less than the configured angle.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::layout::{BBox, Layout};

/// Gap used when the boxes' extents overlap along the measuring axis.
pub const COINCIDENT_GAP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlignmentKind {
    Left,
    Right,
    #[serde(rename = "vmid")]
    VMid,
    LeftRight,
    Top,
    Bottom,
    #[serde(rename = "hmid")]
    HMid,
    TopBottom,
}

/// A single edge coordinate of a box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Left,
    Right,
    CenterX,
    Top,
    Bottom,
    CenterY,
}

impl Edge {
    #[inline]
    pub fn of(self, b: &BBox) -> f64 {
        match self {
            Edge::Left => b.left(),
            Edge::Right => b.right(),
            Edge::CenterX => b.x,
            Edge::Top => b.top(),
            Edge::Bottom => b.bottom(),
            Edge::CenterY => b.y,
        }
    }
}

impl AlignmentKind {
    /// Edges whose coordinates the relation equates.
    pub fn edges(self) -> &'static [Edge] {
        use AlignmentKind::*;
        match self {
            Left => &[Edge::Left],
            Right => &[Edge::Right],
            VMid => &[Edge::CenterX],
            LeftRight => &[Edge::Left, Edge::Right],
            Top => &[Edge::Top],
            Bottom => &[Edge::Bottom],
            HMid => &[Edge::CenterY],
            TopBottom => &[Edge::Top, Edge::Bottom],
        }
    }

    pub fn is_vertical(self) -> bool {
        use AlignmentKind::*;
        matches!(self, Left | Right | VMid | LeftRight)
    }

    /// Single-edge kinds implied by this kind.
    pub fn atoms(self) -> &'static [AlignmentKind] {
        use AlignmentKind::*;
        match self {
            LeftRight => &[Left, Right],
            TopBottom => &[Top, Bottom],
            Left => &[Left],
            Right => &[Right],
            VMid => &[VMid],
            Top => &[Top],
            Bottom => &[Bottom],
            HMid => &[HMid],
        }
    }

    /// Sum of absolute coordinate differences over the relation's edges.
    #[inline]
    pub fn residual(self, a: &BBox, b: &BBox) -> f64 {
        self.edges().iter().map(|e| (e.of(a) - e.of(b)).abs()).sum()
    }
}

/// Relation between the elements with ids `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AlignmentRelation {
    pub i: String,
    pub j: String,
    pub kind: AlignmentKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AlignmentRelationSet {
    relations: BTreeSet<AlignmentRelation>,
}

impl AlignmentRelationSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert a relation, normalizing the id order.
    pub fn insert(&mut self, a: &str, b: &str, kind: AlignmentKind) {
        assert_ne!(a, b, "an element cannot align with itself");
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        self.relations.insert(AlignmentRelation {
            i: i.to_string(),
            j: j.to_string(),
            kind,
        });
    }

    pub fn iter(&self) -> impl Iterator<Item = &AlignmentRelation> {
        self.relations.iter()
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn contains(&self, a: &str, b: &str, kind: AlignmentKind) -> bool {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        self.relations.contains(&AlignmentRelation {
            i: i.to_string(),
            j: j.to_string(),
            kind,
        })
    }

    /// Ids of the elements related to `id`.
    pub fn partners<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.relations.iter().filter_map(move |r| {
            if r.i == id {
                Some(r.j.as_str())
            } else if r.j == id {
                Some(r.i.as_str())
            } else {
                None
            }
        })
    }

    /// The set with compound kinds split into their single-edge parts.
    pub fn expanded(&self) -> BTreeSet<AlignmentRelation> {
        self.relations
            .iter()
            .flat_map(|r| {
                r.kind.atoms().iter().map(|&kind| AlignmentRelation {
                    i: r.i.clone(),
                    j: r.j.clone(),
                    kind,
                })
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let list: Vec<&AlignmentRelation> = self.relations.iter().collect();
        serde_json::to_string_pretty(&list).expect("relation serialization cannot fail") + "\n"
    }
}

/// Continuity test: the edge offset must stay within `tan(angle)` of the gap
/// separating the boxes (never less than [`COINCIDENT_GAP`]).
pub fn aligned(edge_a: f64, edge_b: f64, perp_gap: f64, angle_deg: f64) -> bool {
    let slope = angle_deg.to_radians().tan();
    (edge_a - edge_b).abs() <= slope * perp_gap.max(COINCIDENT_GAP)
}

fn gap(lo_a: f64, hi_a: f64, lo_b: f64, hi_b: f64) -> f64 {
    (lo_b - hi_a).max(lo_a - hi_b).max(0.0)
}

/// All pairwise relations of `layout`. Vertical kinds are measured across
/// the vertical gap between the boxes, horizontal kinds across the
/// horizontal gap.
pub fn extract_alignments(layout: &Layout, angle_deg: f64) -> AlignmentRelationSet {
    use AlignmentKind::*;
    let mut set = AlignmentRelationSet::new();
    let els = &layout.elements;
    for p in 0..els.len() {
        for q in (p + 1)..els.len() {
            let (a, b) = (&els[p].bbox, &els[q].bbox);
            let v_gap = gap(a.top(), a.bottom(), b.top(), b.bottom());
            let h_gap = gap(a.left(), a.right(), b.left(), b.right());
            let test = |kind: AlignmentKind, gap: f64| {
                let e = kind.edges()[0];
                aligned(e.of(a), e.of(b), gap, angle_deg)
            };
            let (id_a, id_b) = (els[p].id.as_str(), els[q].id.as_str());

            let (left, right) = (test(Left, v_gap), test(Right, v_gap));
            if left && right {
                set.insert(id_a, id_b, LeftRight);
            } else if left {
                set.insert(id_a, id_b, Left);
            } else if right {
                set.insert(id_a, id_b, Right);
            }
            if test(VMid, v_gap) {
                set.insert(id_a, id_b, VMid);
            }

            let (top, bottom) = (test(Top, h_gap), test(Bottom, h_gap));
            if top && bottom {
                set.insert(id_a, id_b, TopBottom);
            } else if top {
                set.insert(id_a, id_b, Top);
            } else if bottom {
                set.insert(id_a, id_b, Bottom);
            }
            if test(HMid, h_gap) {
                set.insert(id_a, id_b, HMid);
            }
        }
    }
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::Element;

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
    fn aligned_predicate() {
        assert!(aligned(0.3, 0.3, 0.0, 18.0));
        assert!(aligned(0.3, 0.3, 0.7, 18.0));
        // tan(18 deg) * 0.1 = 0.032492
        assert!(!aligned(0.1, 0.2, 0.1, 18.0));
        assert!(aligned(0.20, 0.23, 0.1, 18.0));
        assert!(!aligned(0.20, 0.233, 0.1, 18.0));
    }

    #[test]
    fn stacked_left_edges() {
        // same left edge, different widths, vertical gap 0.05
        let l = layout(&[[0.3, 0.2, 0.4, 0.1], [0.25, 0.35, 0.3, 0.1]]);
        let r = extract_alignments(&l, 18.0);
        assert!(r.contains("e0", "e1", AlignmentKind::Left));
        assert!(!r.contains("e0", "e1", AlignmentKind::LeftRight));
        assert!(r.iter().all(|x| x.kind.is_vertical()));
    }

    #[test]
    fn identical_boxes_side_by_side() {
        let l = layout(&[[0.2, 0.5, 0.2, 0.2], [0.6, 0.5, 0.2, 0.2]]);
        let r = extract_alignments(&l, 18.0);
        let kinds: Vec<AlignmentKind> = r.iter().map(|x| x.kind).collect();
        assert_eq!(kinds, vec![AlignmentKind::HMid, AlignmentKind::TopBottom]);
    }

    #[test]
    fn single_element_has_no_relations() {
        assert!(extract_alignments(&layout(&[[0.5, 0.5, 0.2, 0.2]]), 18.0).is_empty());
    }

    #[test]
    fn relation_ids_are_ordered_and_partners_listed() {
        let mut s = AlignmentRelationSet::new();
        s.insert("b", "a", AlignmentKind::Top);
        let r = s.iter().next().unwrap();
        assert_eq!((r.i.as_str(), r.j.as_str()), ("a", "b"));
        assert_eq!(s.partners("b").collect::<Vec<_>>(), vec!["a"]);
        assert!(s.to_json().contains("\"top\""));
    }

    #[test]
    fn kind_names() {
        assert_eq!(
            serde_json::to_string(&AlignmentKind::LeftRight).unwrap(),
            "\"left-right\""
        );
        assert_eq!(serde_json::to_string(&AlignmentKind::VMid).unwrap(), "\"vmid\"");
        assert_eq!(
            serde_json::to_string(&AlignmentKind::TopBottom).unwrap(),
            "\"top-bottom\""
        );
    }
}
