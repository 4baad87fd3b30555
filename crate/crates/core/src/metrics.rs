//! Evaluation metrics.

use serde::Serialize;

use crate::criteria::{overlap_weight, CriteriaSet, Role};
use crate::energy::{ioca, nearest_edge_distance};
use crate::error::Result;
use crate::grid::layout_similarity;
use crate::layout::Layout;
use crate::saliency::SaliencyMap;

const ALIGN_MAX_DIST: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MetricBundle {
    pub align: f64,
    pub ove: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cont: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occ: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub similarity: Option<f64>,
}

/// Mean over elements of `-ln(1 - d)`, `d` being the smallest same-kind
/// edge offset to any other element.
pub fn metric_align(layout: &Layout) -> f64 {
    let n = layout.len();
    if n < 2 {
        return 0.0;
    }
    let boxes = layout.boxes();
    let sum: f64 = (0..n)
        .filter_map(|i| nearest_edge_distance(&boxes, i))
        .map(|d| (1.0 - d.clamp(0.0, ALIGN_MAX_DIST)).ln().abs())
        .sum();
    sum / n as f64
}

/// Mean over elements of the covered fraction of their area, counting only
/// pairs that may not overlap.
pub fn metric_overlap(layout: &Layout, criteria: &CriteriaSet) -> f64 {
    let n = layout.len();
    if n == 0 {
        return 0.0;
    }
    let roles: Vec<Role> = layout.elements.iter().map(|e| criteria.role(&e.category)).collect();
    let mut sum = 0.0;
    for (i, a) in layout.elements.iter().enumerate() {
        let area = a.bbox.area();
        if area <= 0.0 {
            continue;
        }
        for (j, b) in layout.elements.iter().enumerate() {
            if i != j && overlap_weight(roles[i], roles[j]) != 0.0 {
                sum += a.bbox.intersection_area(&b.bbox) / area;
            }
        }
    }
    sum / n as f64
}

/// Mean over child elements of their best coverage by a parent element.
/// `None` when the layout has no child elements.
pub fn metric_containment(layout: &Layout, criteria: &CriteriaSet) -> Result<Option<f64>> {
    let parents: Vec<_> = layout
        .elements
        .iter()
        .filter(|e| criteria.role(&e.category) == Role::Parent)
        .collect();
    let mut total = 0.0;
    let mut count = 0usize;
    for c in layout
        .elements
        .iter()
        .filter(|e| criteria.role(&e.category) == Role::Child)
    {
        let mut best = 0.0f64;
        for p in &parents {
            best = best.max(ioca(&c.bbox, &p.bbox)?);
        }
        total += best;
        count += 1;
    }
    Ok((count > 0).then(|| total / count as f64))
}

/// Mean saliency over the union of element footprints.
pub fn metric_occlusion(layout: &Layout, saliency: &SaliencyMap) -> f64 {
    let (w, h) = (saliency.width(), saliency.height());
    let mut mask = vec![false; w * h];
    for e in &layout.elements {
        let r = saliency.footprint(&e.bbox);
        for y in r.y0..r.y1 {
            mask[y * w + r.x0..y * w + r.x1].fill(true);
        }
    }
    let mut mass = 0u64;
    let mut count = 0u64;
    for y in 0..h {
        for x in 0..w {
            if mask[y * w + x] {
                mass += u64::from(saliency.level(x, y));
                count += 1;
            }
        }
    }
    if count == 0 {
        0.0
    } else {
        mass as f64 / (255.0 * count as f64)
    }
}

pub fn metric_similarity(a: &Layout, b: &Layout) -> f64 {
    layout_similarity(a, b)
}

pub fn load_saliency(path: impl AsRef<std::path::Path>) -> Result<SaliencyMap> {
    SaliencyMap::load(path)
}

/// All applicable metrics. Containment is reported only when the criteria
/// name child categories.
pub fn evaluate(
    layout: &Layout,
    criteria: &CriteriaSet,
    reference: Option<&Layout>,
    saliency: Option<&SaliencyMap>,
) -> Result<MetricBundle> {
    let cont = if criteria.child.is_empty() {
        None
    } else {
        metric_containment(layout, criteria)?
    };
    Ok(MetricBundle {
        align: metric_align(layout),
        ove: metric_overlap(layout, criteria),
        cont,
        occ: saliency.map(|s| metric_occlusion(layout, s)),
        similarity: reference.map(|r| metric_similarity(layout, r)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::parse_criteria;
    use crate::layout::{BBox, Element};

    fn layout(items: &[(&str, &str, [f64; 4])]) -> Layout {
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

    fn magazine() -> CriteriaSet {
        parse_criteria(br#"{"parent": ["image"], "child": ["text-over-image"], "others": ["text"]}"#).unwrap()
    }

    #[test]
    fn align_values() {
        assert_eq!(metric_align(&layout(&[("a", "text", [0.5, 0.5, 0.2, 0.2])])), 0.0);
        let aligned = layout(&[("a", "text", [0.3, 0.2, 0.4, 0.1]), ("b", "text", [0.3, 0.6, 0.2, 0.1])]);
        assert_eq!(metric_align(&aligned), 0.0);
        // smallest same-kind offset 0.1 for both elements
        let off = layout(&[("a", "text", [0.2, 0.2, 0.2, 0.2]), ("b", "text", [0.4, 0.7, 0.4, 0.4])]);
        assert!((metric_align(&off) - 0.105_360_5).abs() < 1e-6);
    }

    #[test]
    fn overlap_values() {
        let doc = CriteriaSet::default();
        let disjoint = layout(&[("a", "text", [0.2, 0.2, 0.1, 0.1]), ("b", "text", [0.7, 0.7, 0.1, 0.1])]);
        assert_eq!(metric_overlap(&disjoint, &doc), 0.0);
        let twins = layout(&[("a", "text", [0.5, 0.5, 0.2, 0.2]), ("b", "text", [0.5, 0.5, 0.2, 0.2])]);
        assert!((metric_overlap(&twins, &doc) - 1.0).abs() < 1e-12);
        let m = layout(&[
            ("img", "image", [0.5, 0.5, 0.4, 0.4]),
            ("cap", "text-over-image", [0.5, 0.5, 0.2, 0.2]),
        ]);
        assert_eq!(metric_overlap(&m, &magazine()), 0.0);
    }

    #[test]
    fn containment_values() {
        let c = magazine();
        let inside = layout(&[
            ("img", "image", [0.5, 0.5, 0.4, 0.4]),
            ("cap", "text-over-image", [0.5, 0.5, 0.2, 0.2]),
        ]);
        assert_eq!(metric_containment(&inside, &c).unwrap(), Some(1.0));
        let outside = layout(&[
            ("img", "image", [0.2, 0.2, 0.2, 0.2]),
            ("cap", "text-over-image", [0.7, 0.7, 0.2, 0.2]),
        ]);
        assert_eq!(metric_containment(&outside, &c).unwrap(), Some(0.0));
        let quarter = layout(&[
            ("img", "image", [0.4, 0.5, 0.2, 0.2]),
            ("cap", "text-over-image", [0.55, 0.5, 0.2, 0.2]),
        ]);
        assert!((metric_containment(&quarter, &c).unwrap().unwrap() - 0.25).abs() < 1e-12);
        let none = layout(&[("img", "image", [0.5, 0.5, 0.2, 0.2])]);
        assert_eq!(metric_containment(&none, &c).unwrap(), None);
        assert_eq!(evaluate(&none, &CriteriaSet::default(), None, None).unwrap().cont, None);
    }

    #[test]
    fn occlusion_values() {
        let l = layout(&[
            ("a", "text", [0.25, 0.5, 0.5, 1.0]),
            ("b", "text", [0.25, 0.5, 0.5, 1.0]),
        ]);
        let zero = SaliencyMap::from_levels(16, 16, vec![0; 256]).unwrap();
        assert_eq!(metric_occlusion(&l, &zero), 0.0);
        let uniform = SaliencyMap::from_levels(16, 16, vec![51; 256]).unwrap();
        assert!((metric_occlusion(&l, &uniform) - 0.2).abs() < 1e-12);
        let mut levels = vec![0u8; 256];
        for y in 0..16 {
            for x in 0..8 {
                levels[y * 16 + x] = 255;
            }
        }
        let half = SaliencyMap::from_levels(16, 16, levels).unwrap();
        assert_eq!(metric_occlusion(&l, &half), 1.0);
    }

    #[test]
    fn bundle_serializes_present_fields_only() {
        let l = layout(&[("a", "text", [0.5, 0.5, 0.2, 0.2])]);
        let b = evaluate(&l, &CriteriaSet::default(), Some(&l), None).unwrap();
        assert_eq!(b.similarity, Some(1.0));
        let json = serde_json::to_string(&b).unwrap();
        assert!(json.contains("similarity") && !json.contains("occ") && !json.contains("cont"));
    }
}
