use std::collections::HashMap;

use crate::alignment::{AlignmentKind, AlignmentRelationSet, Edge};
use crate::config::RectifyConfig;
use crate::criteria::{containment_weight, overlap_weight, CriteriaSet, Role};
use crate::error::{Error, Result};
use crate::layout::{BBox, Layout};
use crate::saliency::SaliencyMap;

use super::geometry::{contain_neg_s, contain_pos_s, pair_cost_grad, pair_geom, NegativeContainment};
use super::{EnergyBreakdown, Gradient};

/// Lower clamp of the unpaired alignment log argument.
const UNPAIRED_LOG_FLOOR: f64 = 1e-6;

const EDGES: [Edge; 6] = [
    Edge::Left,
    Edge::CenterX,
    Edge::Right,
    Edge::Top,
    Edge::CenterY,
    Edge::Bottom,
];

/// Smallest coordinate difference over the six edge kinds between box `i`
/// and any other box, or `None` for a single-box layout.
pub(crate) fn nearest_edge_distance(boxes: &[BBox], i: usize) -> Option<f64> {
    let own = EDGES.map(|e| e.of(&boxes[i]));
    boxes
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, b)| {
            EDGES
                .iter()
                .zip(own)
                .map(|(e, v)| (e.of(b) - v).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(f64::min)
}

/// `-ln(1 - d)` with the argument clamped away from zero.
pub(crate) fn unpaired_loss(d: f64) -> f64 {
    (1.0 - d).clamp(UNPAIRED_LOG_FLOOR, 1.0).ln().abs()
}

#[inline]
fn strictly_overlapping(a: &BBox, b: &BBox) -> bool {
    a.left() < b.right() && b.left() < a.right() && a.top() < b.bottom() && b.top() < a.bottom()
}

/// The rectification energy bound to one input layout.
///
/// Boxes passed to the evaluation methods are in the input's element order.
/// Relations are resolved to indices once at construction.
#[derive(Debug, Clone)]
pub struct EnergyModel<'a> {
    ids: Vec<String>,
    original: Vec<BBox>,
    roles: Vec<Role>,
    keep_aspect: Vec<bool>,
    keep_size: Vec<bool>,
    relations: Vec<(usize, usize, AlignmentKind)>,
    relations_of: Vec<Vec<usize>>,
    unpaired: Vec<usize>,
    lambda_aspect: f64,
    lambda_size: f64,
    negative: NegativeContainment,
    saliency: Option<&'a SaliencyMap>,
}

impl<'a> EnergyModel<'a> {
    pub fn new(
        original: &Layout,
        relations: &AlignmentRelationSet,
        criteria: &CriteriaSet,
        config: &RectifyConfig,
        saliency: Option<&'a SaliencyMap>,
    ) -> Result<Self> {
        let n = original.len();
        let index: HashMap<&str, usize> = original
            .elements
            .iter()
            .enumerate()
            .map(|(k, e)| (e.id.as_str(), k))
            .collect();
        let mut resolved = Vec::with_capacity(relations.len());
        let mut relations_of = vec![Vec::new(); n];
        for r in relations.iter() {
            let lookup = |id: &str| {
                index.get(id).copied().ok_or_else(|| Error::InvalidElement {
                    id: id.to_string(),
                    reason: "alignment relation refers to an unknown element".into(),
                })
            };
            let (i, j) = (lookup(&r.i)?, lookup(&r.j)?);
            relations_of[i].push(resolved.len());
            relations_of[j].push(resolved.len());
            resolved.push((i, j, r.kind));
        }
        let unpaired = (0..n).filter(|&k| relations_of[k].is_empty()).collect();
        let cats = original.elements.iter().map(|e| e.category.as_str());
        Ok(Self {
            ids: original.elements.iter().map(|e| e.id.clone()).collect(),
            original: original.boxes(),
            roles: cats.clone().map(|c| criteria.role(c)).collect(),
            keep_aspect: cats.clone().map(|c| criteria.keeps_aspect(c)).collect(),
            keep_size: cats.map(|c| criteria.keeps_size(c)).collect(),
            relations: resolved,
            relations_of,
            unpaired,
            lambda_aspect: config.lambda_aspect,
            lambda_size: config.lambda_size,
            negative: if config.eq3_literal {
                NegativeContainment::Literal
            } else {
                NegativeContainment::Behavioral
            },
            saliency,
        })
    }

    pub fn len(&self) -> usize {
        self.original.len()
    }

    pub fn is_empty(&self) -> bool {
        self.original.is_empty()
    }

    pub fn original(&self) -> &[BBox] {
        &self.original
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn is_content_aware(&self) -> bool {
        self.saliency.is_some()
    }

    pub fn lambdas(&self) -> (f64, f64) {
        (self.lambda_aspect, self.lambda_size)
    }

    pub fn paired_align(&self, boxes: &[BBox]) -> f64 {
        self.relations
            .iter()
            .map(|&(i, j, kind)| kind.residual(&boxes[i], &boxes[j]))
            .sum()
    }

    pub fn unpaired_align(&self, boxes: &[BBox]) -> f64 {
        self.unpaired
            .iter()
            .filter_map(|&k| nearest_edge_distance(boxes, k))
            .map(unpaired_loss)
            .sum()
    }

    pub fn align(&self, boxes: &[BBox]) -> f64 {
        self.paired_align(boxes) + self.unpaired_align(boxes)
    }

    fn dist_of(&self, boxes: &[BBox], i: usize) -> f64 {
        let (b, o) = (&boxes[i], &self.original[i]);
        (b.x - o.x).powi(2) + (b.y - o.y).powi(2)
    }

    pub fn dist(&self, boxes: &[BBox]) -> f64 {
        (0..boxes.len()).map(|i| self.dist_of(boxes, i)).sum()
    }

    fn neg_pair(&self, child: &BBox, parent: &BBox, child_leads: bool) -> f64 {
        if self.negative == NegativeContainment::Behavioral && !strictly_overlapping(child, parent) {
            return 0.0;
        }
        let p = |b: &BBox| [b.x, b.y, b.w, b.h];
        contain_neg_s(&pair_geom(p(child), p(parent), child_leads), self.negative)
    }

    /// Both orderings of the negative containment cost for the pair (i, j).
    fn overlap_pair(&self, boxes: &[BBox], i: usize, j: usize) -> f64 {
        if overlap_weight(self.roles[i], self.roles[j]) == 0.0 {
            return 0.0;
        }
        self.neg_pair(&boxes[i], &boxes[j], i < j) + self.neg_pair(&boxes[j], &boxes[i], j < i)
    }

    /// `(child, parent)` indices when the pair is a sanctioned containment.
    fn containment_roles(&self, i: usize, j: usize) -> Option<(usize, usize)> {
        if containment_weight(self.roles[i], self.roles[j]) == 0.0 {
            None
        } else if self.roles[i] == Role::Child {
            Some((i, j))
        } else {
            Some((j, i))
        }
    }

    fn containment_pair(&self, boxes: &[BBox], i: usize, j: usize) -> f64 {
        match self.containment_roles(i, j) {
            Some((c, p)) => {
                let q = |b: &BBox| [b.x, b.y, b.w, b.h];
                2.0 * contain_pos_s(&pair_geom(q(&boxes[c]), q(&boxes[p]), c < p))
            }
            None => 0.0,
        }
    }

    pub fn overlap(&self, boxes: &[BBox]) -> f64 {
        let mut total = 0.0;
        for i in 0..boxes.len() {
            for j in (i + 1)..boxes.len() {
                total += self.overlap_pair(boxes, i, j);
            }
        }
        total
    }

    pub fn containment(&self, boxes: &[BBox]) -> f64 {
        let mut total = 0.0;
        for i in 0..boxes.len() {
            for j in (i + 1)..boxes.len() {
                total += self.containment_pair(boxes, i, j);
            }
        }
        total
    }

    fn aspect_of(&self, boxes: &[BBox], i: usize) -> f64 {
        if !self.keep_aspect[i] {
            return 0.0;
        }
        let (b, o) = (&boxes[i], &self.original[i]);
        (b.w / b.h - o.w / o.h).powi(2)
    }

    pub fn aspect(&self, boxes: &[BBox]) -> f64 {
        (0..boxes.len()).map(|i| self.aspect_of(boxes, i)).sum()
    }

    fn size_of(&self, boxes: &[BBox], i: usize) -> f64 {
        if !self.keep_size[i] {
            return 0.0;
        }
        let (b, o) = (&boxes[i], &self.original[i]);
        (b.w - o.w).powi(2) + (b.h - o.h).powi(2)
    }

    pub fn size(&self, boxes: &[BBox]) -> f64 {
        (0..boxes.len()).map(|i| self.size_of(boxes, i)).sum()
    }

    fn occ_of(&self, boxes: &[BBox], i: usize) -> f64 {
        self.saliency.map_or(0.0, |s| s.mean_in_box(&boxes[i]))
    }

    pub fn occlusion(&self, boxes: &[BBox]) -> f64 {
        (0..boxes.len()).map(|i| self.occ_of(boxes, i)).sum()
    }

    pub fn breakdown(&self, boxes: &[BBox]) -> EnergyBreakdown {
        EnergyBreakdown::assemble(
            self.align(boxes),
            self.dist(boxes),
            self.overlap(boxes),
            self.containment(boxes),
            self.aspect(boxes),
            self.size(boxes),
            self.occlusion(boxes),
            self.lambda_aspect,
            self.lambda_size,
        )
    }

    /// Every energy term that depends on box `i`. Differences of this value
    /// between two configurations differing only in box `i` equal the
    /// difference of the total energy.
    pub fn element_energy(&self, boxes: &[BBox], i: usize) -> f64 {
        let paired: f64 = self.relations_of[i]
            .iter()
            .map(|&r| {
                let (a, b, kind) = self.relations[r];
                kind.residual(&boxes[a], &boxes[b])
            })
            .sum();
        let mut pairs = 0.0;
        for j in 0..boxes.len() {
            if j != i {
                pairs += self.overlap_pair(boxes, i, j) + self.containment_pair(boxes, i, j);
            }
        }
        paired
            + self.unpaired_align(boxes)
            + self.dist_of(boxes, i)
            + pairs
            + self.lambda_aspect * self.aspect_of(boxes, i)
            + self.lambda_size * self.size_of(boxes, i)
            + self.occ_of(boxes, i)
    }

    /// The continuous-stage objective: overlap, containment and the weighted
    /// preservation terms.
    pub fn stage_b_objective(&self, boxes: &[BBox]) -> f64 {
        self.overlap(boxes)
            + self.containment(boxes)
            + self.lambda_aspect * self.aspect(boxes)
            + self.lambda_size * self.size(boxes)
    }

    /// Gradient of [`Self::stage_b_objective`] with respect to every box's
    /// `(x, y, w, h)`.
    pub fn stage_b_gradient(&self, boxes: &[BBox]) -> Result<Gradient> {
        let n = boxes.len();
        let mut grad = vec![[0.0; 4]; n];
        let scatter = |grad: &mut Gradient, a: usize, b: usize, d: &[f64; 8], scale: f64, term: &'static str| {
            if d.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteGradient {
                    id: self.ids[a].clone(),
                    term,
                });
            }
            for k in 0..4 {
                grad[a][k] += scale * d[k];
                grad[b][k] += scale * d[k + 4];
            }
            Ok(())
        };
        let negative = self.negative;
        for i in 0..n {
            for j in (i + 1)..n {
                if overlap_weight(self.roles[i], self.roles[j]) != 0.0
                    && (negative == NegativeContainment::Literal || strictly_overlapping(&boxes[i], &boxes[j]))
                {
                    let g = pair_cost_grad(&boxes[i], &boxes[j], true, |g| contain_neg_s(g, negative));
                    scatter(&mut grad, i, j, &g.d, 1.0, "overlap")?;
                    let g = pair_cost_grad(&boxes[j], &boxes[i], false, |g| contain_neg_s(g, negative));
                    scatter(&mut grad, j, i, &g.d, 1.0, "overlap")?;
                }
                if let Some((c, p)) = self.containment_roles(i, j) {
                    let g = pair_cost_grad(&boxes[c], &boxes[p], c < p, contain_pos_s);
                    scatter(&mut grad, c, p, &g.d, 2.0, "containment")?;
                }
            }
        }
        for i in 0..n {
            let (b, o) = (&boxes[i], &self.original[i]);
            if self.keep_aspect[i] {
                let r = b.w / b.h - o.w / o.h;
                let gw = self.lambda_aspect * 2.0 * r / b.h;
                let gh = -self.lambda_aspect * 2.0 * r * b.w / (b.h * b.h);
                if !(gw.is_finite() && gh.is_finite()) {
                    return Err(Error::NonFiniteGradient {
                        id: self.ids[i].clone(),
                        term: "aspect",
                    });
                }
                grad[i][2] += gw;
                grad[i][3] += gh;
            }
            if self.keep_size[i] {
                grad[i][2] += self.lambda_size * 2.0 * (b.w - o.w);
                grad[i][3] += self.lambda_size * 2.0 * (b.h - o.h);
            }
        }
        Ok(grad)
    }
}
