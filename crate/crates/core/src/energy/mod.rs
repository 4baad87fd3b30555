//! Layout energy terms and the gradient of the continuous objective.

pub mod geometry;
mod model;

use serde::Serialize;

pub use geometry::{
    contain_neg, contain_neg_literal, contain_pos, diou_cost, ioca, iou, normalized_center_distance,
    NegativeContainment,
};
pub(crate) use model::nearest_edge_distance;
pub use model::EnergyModel;

use crate::alignment::AlignmentRelationSet;
use crate::config::RectifyConfig;
use crate::criteria::CriteriaSet;
use crate::error::{Error, Result};
use crate::layout::{BBox, Layout};
use crate::saliency::SaliencyMap;

/// Per-element `(d/dx, d/dy, d/dw, d/dh)`.
pub type Gradient = Vec<[f64; 4]>;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EnergyBreakdown {
    pub align: f64,
    pub dist: f64,
    pub ove: f64,
    pub cont: f64,
    pub aspect: f64,
    pub size: f64,
    pub occ: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        align: f64,
        dist: f64,
        ove: f64,
        cont: f64,
        aspect: f64,
        size: f64,
        occ: f64,
        lambda_aspect: f64,
        lambda_size: f64,
    ) -> Self {
        Self {
            align,
            dist,
            ove,
            cont,
            aspect,
            size,
            occ,
            total: align + dist + ove + cont + lambda_aspect * aspect + lambda_size * size + occ,
        }
    }
}

fn check_pairing(layout: &Layout, original: &Layout) -> Result<()> {
    if layout.len() != original.len() {
        return Err(Error::IdMismatch(format!(
            "{} elements against {} in the original",
            layout.len(),
            original.len()
        )));
    }
    for (a, b) in layout.elements.iter().zip(&original.elements) {
        if a.id != b.id {
            return Err(Error::IdMismatch(format!("'{}' paired with '{}'", a.id, b.id)));
        }
    }
    Ok(())
}

/// Model whose reference layout is `layout` itself; for terms that do not
/// look at the original.
fn standalone<'a>(
    layout: &Layout,
    relations: &AlignmentRelationSet,
    criteria: &CriteriaSet,
    saliency: Option<&'a SaliencyMap>,
) -> Result<EnergyModel<'a>> {
    EnergyModel::new(layout, relations, criteria, &RectifyConfig::default(), saliency)
}

/// Paired residuals over `relations` (each relation counted once) plus the
/// nearest-edge loss of every element without relations.
pub fn energy_align(layout: &Layout, relations: &AlignmentRelationSet) -> Result<f64> {
    let m = standalone(layout, relations, &CriteriaSet::default(), None)?;
    Ok(m.align(&layout.boxes()))
}

pub fn energy_overlap(layout: &Layout, criteria: &CriteriaSet) -> Result<f64> {
    let m = standalone(layout, &AlignmentRelationSet::new(), criteria, None)?;
    Ok(m.overlap(&layout.boxes()))
}

pub fn energy_containment(layout: &Layout, criteria: &CriteriaSet) -> Result<f64> {
    let m = standalone(layout, &AlignmentRelationSet::new(), criteria, None)?;
    Ok(m.containment(&layout.boxes()))
}

pub fn energy_aspect(layout: &Layout, original: &Layout, criteria: &CriteriaSet) -> Result<f64> {
    check_pairing(layout, original)?;
    for (e, o) in layout.elements.iter().zip(&original.elements) {
        if criteria.keeps_aspect(&e.category) && (e.bbox.h == 0.0 || o.bbox.h == 0.0) {
            return Err(Error::InvalidElement {
                id: e.id.clone(),
                reason: "aspect ratio of a zero-height box".into(),
            });
        }
    }
    let m = EnergyModel::new(
        original,
        &AlignmentRelationSet::new(),
        criteria,
        &RectifyConfig::default(),
        None,
    )?;
    Ok(m.aspect(&layout.boxes()))
}

pub fn energy_size(layout: &Layout, original: &Layout, criteria: &CriteriaSet) -> Result<f64> {
    check_pairing(layout, original)?;
    let m = EnergyModel::new(
        original,
        &AlignmentRelationSet::new(),
        criteria,
        &RectifyConfig::default(),
        None,
    )?;
    Ok(m.size(&layout.boxes()))
}

pub fn energy_dist(layout: &Layout, original: &Layout) -> Result<f64> {
    check_pairing(layout, original)?;
    Ok(layout
        .elements
        .iter()
        .zip(&original.elements)
        .map(|(e, o)| (e.bbox.x - o.bbox.x).powi(2) + (e.bbox.y - o.bbox.y).powi(2))
        .sum())
}

pub fn energy_occlusion(layout: &Layout, saliency: &SaliencyMap) -> f64 {
    layout.elements.iter().map(|e| saliency.mean_in_box(&e.bbox)).sum()
}

/// Every term of `layout` measured against `original`. The occlusion term
/// is present only when a saliency map is given.
pub fn total_energy(
    layout: &Layout,
    original: &Layout,
    relations: &AlignmentRelationSet,
    criteria: &CriteriaSet,
    config: &RectifyConfig,
    saliency: Option<&SaliencyMap>,
) -> Result<EnergyBreakdown> {
    check_pairing(layout, original)?;
    let m = EnergyModel::new(original, relations, criteria, config, saliency)?;
    Ok(m.breakdown(&layout.boxes()))
}

/// Gradient of the continuous objective (overlap, containment and the
/// weighted preservation terms).
pub fn gradient(
    layout: &Layout,
    original: &Layout,
    relations: &AlignmentRelationSet,
    criteria: &CriteriaSet,
    config: &RectifyConfig,
) -> Result<Gradient> {
    check_pairing(layout, original)?;
    let m = EnergyModel::new(original, relations, criteria, config, None)?;
    m.stage_b_gradient(&layout.boxes())
}

/// Smallest absolute difference between any two same-axis edges of two
/// distinct boxes. The pair costs are non-smooth where this is zero.
pub fn nearest_kink(boxes: &[BBox]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in boxes.iter().enumerate() {
        for b in &boxes[i + 1..] {
            for (p, q) in [(a.left(), a.right()), (a.top(), a.bottom())]
                .into_iter()
                .zip([(b.left(), b.right()), (b.top(), b.bottom())])
            {
                for (u, v) in [(p.0, q.0), (p.1, q.1), (p.0, q.1), (p.1, q.0)] {
                    best = best.min((u - v).abs());
                }
            }
        }
    }
    best
}
