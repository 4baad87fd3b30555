//! Two-stage rectification: grid snapping alternated with gradient steps,
//! repeated per exemplar grid.

mod adam;
mod snap;

use rayon::prelude::*;
use serde::Serialize;

pub use adam::{stage_b, AdamState};
pub use snap::{enumerate_candidates, stage_a, MoveKind, SnapCandidate};

use crate::alignment::{extract_alignments, AlignmentRelationSet};
use crate::config::{FlawWeights, RectifyConfig};
use crate::criteria::CriteriaSet;
use crate::energy::{EnergyBreakdown, EnergyModel};
use crate::error::{Error, Result};
use crate::grid::{layout_similarity, retrieve_exemplars, GridIndex, GridSystem};
use crate::layout::Layout;
use crate::metrics::{evaluate, MetricBundle};
use crate::saliency::SaliencyMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    A,
    B,
}

/// Energy after one stage of one round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub exemplar: String,
    pub round: usize,
    pub stage: Stage,
    pub energy: EnergyBreakdown,
}

/// The outcome of rectifying against one exemplar grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub source_id: String,
    pub layout: Layout,
    pub flaw_score: f64,
    /// Layout similarity of the branch output to the input.
    pub similarity: f64,
    pub trace: Vec<TraceRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RectifyResult {
    pub layout: Layout,
    pub exemplar_source: String,
    pub flaw_score: f64,
    pub metrics_before: MetricBundle,
    pub metrics_after: MetricBundle,
    pub relations: AlignmentRelationSet,
    /// Every branch in retrieval order; the chosen one included.
    pub branches: Vec<Branch>,
}

impl RectifyResult {
    pub fn trace(&self) -> &[TraceRecord] {
        self.branches
            .iter()
            .find(|b| b.source_id == self.exemplar_source)
            .map_or(&[], |b| &b.trace)
    }
}

/// Weighted sum of the flaw metrics; lower is better. Containment counts
/// only when the layout holds child elements, occlusion only with a map.
pub fn flaw_score(
    layout: &Layout,
    criteria: &CriteriaSet,
    saliency: Option<&SaliencyMap>,
    weights: &FlawWeights,
) -> Result<f64> {
    let m = evaluate(layout, criteria, None, saliency)?;
    Ok(weights.align * m.align
        + weights.ove * m.ove
        + m.cont.map_or(0.0, |c| weights.cont * (1.0 - c))
        + m.occ.map_or(0.0, |o| weights.occ * o))
}

/// `outer_iters` rounds of snapping followed by `adam_iters` gradient steps,
/// starting from the model's original layout.
pub fn run_branch(
    model: &EnergyModel<'_>,
    original: &Layout,
    grid: &GridSystem,
    criteria: &CriteriaSet,
    config: &RectifyConfig,
    saliency: Option<&SaliencyMap>,
) -> Result<Branch> {
    let lines = grid.snap_lines();
    let mut boxes = original.boxes();
    let mut trace = Vec::with_capacity(2 * config.outer_iters);
    let mut record = |round, stage, boxes: &[_]| {
        trace.push(TraceRecord {
            exemplar: grid.source_id.clone(),
            round,
            stage,
            energy: model.breakdown(boxes),
        })
    };
    for round in 0..config.outer_iters {
        boxes = stage_a(model, &boxes, &lines, config.snap_lines_per_side);
        record(round, Stage::A, &boxes);
        if config.adam_iters > 0 {
            let mut state = AdamState::new(
                4 * boxes.len(),
                config.adam_lr,
                config.adam_beta1,
                config.adam_beta2,
                config.adam_eps,
            );
            boxes = stage_b(model, &boxes, config.adam_iters, &mut state, |_, _| {})?;
            record(round, Stage::B, &boxes);
        }
    }
    let layout = original.with_boxes(&boxes);
    Ok(Branch {
        source_id: grid.source_id.clone(),
        flaw_score: flaw_score(&layout, criteria, saliency, &config.flaw_weights)?,
        similarity: layout_similarity(&layout, original),
        layout,
        trace,
    })
}

/// Repair `input` against the `num_exemplars` most similar grids of the
/// index and keep the branch with the lowest flaw score. Ties prefer the
/// output closer to the input, then the smaller source id.
pub fn rectify(
    input: &Layout,
    criteria: &CriteriaSet,
    index: &GridIndex,
    config: &RectifyConfig,
    saliency: Option<&SaliencyMap>,
) -> Result<RectifyResult> {
    config.validate()?;
    let criteria = criteria.clone().normalized()?;
    let universe = (!criteria.universe().is_empty()).then_some(&criteria);
    input.validate(universe)?;
    if index.is_empty() {
        return Err(Error::EmptyGridIndex);
    }
    let original = input.clamped_to_canvas();
    let relations = extract_alignments(&original, config.align_angle_deg);
    let model = EnergyModel::new(&original, &relations, &criteria, config, saliency)?;
    let exemplars = retrieve_exemplars(&original, &index.entries, config.num_exemplars);
    log::debug!(
        "rectifying {} elements against {} exemplars, {} relations",
        original.len(),
        exemplars.len(),
        relations.len()
    );

    let branches: Vec<Branch> = exemplars
        .par_iter()
        .map(|ex| run_branch(&model, &original, ex.grid, &criteria, config, saliency))
        .collect::<Result<_>>()?;
    let best = branches
        .iter()
        .min_by(|a, b| {
            a.flaw_score
                .total_cmp(&b.flaw_score)
                .then(b.similarity.total_cmp(&a.similarity))
                .then(a.source_id.cmp(&b.source_id))
        })
        .expect("index is non-empty");
    for b in &branches {
        log::debug!("exemplar {}: flaw score {:.6}", b.source_id, b.flaw_score);
    }

    Ok(RectifyResult {
        layout: best.layout.clone(),
        exemplar_source: best.source_id.clone(),
        flaw_score: best.flaw_score,
        metrics_before: evaluate(input, &criteria, None, saliency)?,
        metrics_after: evaluate(&best.layout, &criteria, Some(input), saliency)?,
        relations,
        branches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
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

    #[test]
    fn flaw_score_of_clean_layout() {
        let l = layout(&[("a", "text", [0.3, 0.2, 0.4, 0.1]), ("b", "text", [0.3, 0.6, 0.4, 0.1])]);
        assert_eq!(
            flaw_score(&l, &CriteriaSet::default(), None, &FlawWeights::default()).unwrap(),
            0.0
        );
        let mag = crate::criteria::parse_criteria(br#"{"parent": ["image"], "child": ["caption"]}"#).unwrap();
        let inside = layout(&[
            ("i", "image", [0.5, 0.5, 0.4, 0.4]),
            ("c", "caption", [0.5, 0.5, 0.2, 0.2]),
        ]);
        let s = flaw_score(&inside, &mag, None, &FlawWeights::default()).unwrap();
        let m = evaluate(&inside, &mag, None, None).unwrap();
        assert!((s - (m.align + m.ove)).abs() < 1e-15);
    }

    #[test]
    fn overlapping_pair_is_separated() {
        let l = layout(&[
            ("a", "text", [0.45, 0.5, 0.3, 0.2]),
            ("b", "text", [0.55, 0.52, 0.3, 0.2]),
        ]);
        let m = EnergyModel::new(
            &l,
            &AlignmentRelationSet::new(),
            &CriteriaSet::default(),
            &RectifyConfig::default(),
            None,
        )
        .unwrap();
        let mut s = AdamState::new(8, 0.01, 0.9, 0.999, 1e-8);
        let out = stage_b(&m, &l.boxes(), 100, &mut s, |_, _| {}).unwrap();
        assert!(m.overlap(&out) < 1e-3, "{}", m.overlap(&out));
    }

    #[test]
    fn empty_index_is_rejected() {
        let l = layout(&[("a", "text", [0.5, 0.5, 0.2, 0.2])]);
        let idx = GridIndex {
            gutter: 0.01,
            boundary: crate::grid::Boundary::UNIT,
            entries: vec![],
        };
        let r = rectify(&l, &CriteriaSet::default(), &idx, &RectifyConfig::default(), None);
        assert!(matches!(r, Err(Error::EmptyGridIndex)));
    }
}
