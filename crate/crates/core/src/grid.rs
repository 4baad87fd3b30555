//! Grid systems estimated from corpus layouts, and exemplar retrieval.
//!
//! A grid shares one corpus-wide boundary (the margins) and takes its
//! interior column and row lines from the edges of a single layout. Edges
//! closer than two gutters collapse into one line.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::geometry::iou;
use crate::error::{Error, Result};
use crate::layout::{BBox, Element, Layout};

/// Values closer than this are treated as the same snap position.
pub const SNAP_DEDUP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    pub left: f64,
    pub top: f64,
    pub right: f64,
    pub bottom: f64,
}

impl Boundary {
    pub const UNIT: Boundary = Boundary {
        left: 0.0,
        top: 0.0,
        right: 1.0,
        bottom: 1.0,
    };

    pub fn to_array(self) -> [f64; 4] {
        [self.left, self.top, self.right, self.bottom]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Self {
            left: v[0],
            top: v[1],
            right: v[2],
            bottom: v[3],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSystem {
    pub margin_left: f64,
    pub margin_top: f64,
    pub margin_right: f64,
    pub margin_bottom: f64,
    pub col_lines: Vec<f64>,
    pub row_lines: Vec<f64>,
    pub gutter: f64,
    pub source_id: String,
}

/// Legal edge positions derived from a grid, sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SnapLineSet {
    pub vertical: Vec<f64>,
    pub horizontal: Vec<f64>,
}

/// Extreme element edges over the whole corpus, clamped to the canvas.
pub fn corpus_boundary<'a, I>(corpus: I) -> Result<Boundary>
where
    I: IntoIterator<Item = &'a Layout>,
{
    let mut b = Boundary {
        left: f64::INFINITY,
        top: f64::INFINITY,
        right: f64::NEG_INFINITY,
        bottom: f64::NEG_INFINITY,
    };
    let mut any = false;
    for layout in corpus {
        for e in &layout.elements {
            any = true;
            b.left = b.left.min(e.bbox.left());
            b.top = b.top.min(e.bbox.top());
            b.right = b.right.max(e.bbox.right());
            b.bottom = b.bottom.max(e.bbox.bottom());
        }
    }
    if !any {
        return Err(Error::EmptyCorpus);
    }
    Ok(Boundary {
        left: b.left.clamp(0.0, 1.0),
        top: b.top.clamp(0.0, 1.0),
        right: b.right.clamp(0.0, 1.0),
        bottom: b.bottom.clamp(0.0, 1.0),
    })
}

/// Absorbs rounding in gaps that are nominally exactly two gutters.
const MERGE_SLACK: f64 = 1e-9;

/// Collapse sorted positions into lines at least `2 * gutter` apart.
///
/// Runs of positions whose consecutive gaps are within the tolerance form a
/// cluster; a cluster holding a boundary edge resolves to that edge, any
/// other to the midpoint of its extent.
fn merge_lines(edges: impl Iterator<Item = f64>, lo: f64, hi: f64, gutter: f64) -> Vec<f64> {
    let tol = (2.0 * gutter).max(1e-9);
    let mut values: Vec<f64> = edges.map(|v| v.clamp(lo, hi)).collect();
    values.push(lo);
    values.push(hi);
    values.sort_by(f64::total_cmp);

    let mut lines = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > tol + MERGE_SLACK {
            let (a, b) = (values[start], values[k - 1]);
            let rep = if a == lo {
                lo
            } else if b == hi {
                hi
            } else {
                0.5 * (a + b)
            };
            lines.push(rep);
            start = k;
        }
    }
    if lines.len() == 1 && lo < hi {
        // boundary narrower than two gutters
        lines = vec![lo, hi];
    }
    lines
}

pub fn construct_grid(layout: &Layout, boundary: Boundary, gutter: f64, source_id: impl Into<String>) -> GridSystem {
    let cols = merge_lines(
        layout.elements.iter().flat_map(|e| [e.bbox.left(), e.bbox.right()]),
        boundary.left,
        boundary.right,
        gutter,
    );
    let rows = merge_lines(
        layout.elements.iter().flat_map(|e| [e.bbox.top(), e.bbox.bottom()]),
        boundary.top,
        boundary.bottom,
        gutter,
    );
    GridSystem {
        margin_left: boundary.left,
        margin_top: boundary.top,
        margin_right: boundary.right,
        margin_bottom: boundary.bottom,
        col_lines: cols,
        row_lines: rows,
        gutter,
        source_id: source_id.into(),
    }
}

fn inset_lines(lines: &[f64], gutter: f64) -> Vec<f64> {
    let n = lines.len();
    let mut out = Vec::with_capacity(2 * n);
    for (k, &x) in lines.iter().enumerate() {
        if k == 0 {
            out.extend([x, x + gutter]);
        } else if k + 1 == n {
            out.extend([x - gutter, x]);
        } else {
            out.extend([x - gutter, x + gutter]);
        }
    }
    for v in &mut out {
        *v = v.clamp(0.0, 1.0);
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|b, a| (*b - *a).abs() <= SNAP_DEDUP_TOL);
    out
}

impl GridSystem {
    pub fn boundary(&self) -> Boundary {
        Boundary {
            left: self.margin_left,
            top: self.margin_top,
            right: self.margin_right,
            bottom: self.margin_bottom,
        }
    }

    /// Positions element edges may snap to: every interior line contributes
    /// both gutter sides, boundary lines contribute themselves and their
    /// inward inset.
    pub fn snap_lines(&self) -> SnapLineSet {
        SnapLineSet {
            vertical: inset_lines(&self.col_lines, self.gutter),
            horizontal: inset_lines(&self.row_lines, self.gutter),
        }
    }
}

pub fn snap_lines(grid: &GridSystem) -> SnapLineSet {
    grid.snap_lines()
}

/// Greedy category-constrained matching score from `a` towards `b`.
fn directed_similarity(a: &[Element], b: &[Element]) -> f64 {
    let n = a.len().max(b.len());
    if n == 0 {
        return 1.0;
    }
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| {
        a[j].bbox
            .area()
            .partial_cmp(&a[i].bbox.area())
            .unwrap_or(Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut used = vec![false; b.len()];
    let mut total = 0.0;
    for i in order {
        let mut best: Option<(usize, f64)> = None;
        for (j, e) in b.iter().enumerate() {
            if used[j] || e.category != a[i].category {
                continue;
            }
            let v = iou(&a[i].bbox, &e.bbox);
            if v > 0.0 && best.is_none_or(|(_, bv)| v > bv) {
                best = Some((j, v));
            }
        }
        if let Some((j, v)) = best {
            used[j] = true;
            total += v;
        }
    }
    total / n as f64
}

/// Symmetric IoU-based similarity of two element lists, in [0, 1].
pub fn element_similarity(a: &[Element], b: &[Element]) -> f64 {
    0.5 * (directed_similarity(a, b) + directed_similarity(b, a))
}

pub fn layout_similarity(a: &Layout, b: &Layout) -> f64 {
    element_similarity(&a.elements, &b.elements)
}

/// A corpus grid together with the boxes of the layout it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct GridEntry {
    pub grid: GridSystem,
    pub elements: Vec<Element>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridIndex {
    pub gutter: f64,
    pub boundary: Boundary,
    pub entries: Vec<GridEntry>,
}

/// A retrieved grid and the similarity of its source layout to the query.
#[derive(Debug, Clone, Copy)]
pub struct Exemplar<'a> {
    pub grid: &'a GridSystem,
    pub similarity: f64,
}

pub fn retrieve_exemplars<'a>(input: &Layout, index: &'a [GridEntry], m: usize) -> Vec<Exemplar<'a>> {
    let mut scored: Vec<Exemplar<'a>> = index
        .iter()
        .map(|e| Exemplar {
            grid: &e.grid,
            similarity: element_similarity(&input.elements, &e.elements),
        })
        .collect();
    scored.sort_by(|a, b| {
        b.similarity
            .total_cmp(&a.similarity)
            .then_with(|| a.grid.source_id.cmp(&b.grid.source_id))
    });
    scored.truncate(m);
    scored
}

#[derive(Serialize, Deserialize)]
struct RawIndex {
    gutter: f64,
    boundary: [f64; 4],
    grids: Vec<RawGrid>,
}

#[derive(Serialize, Deserialize)]
struct RawGrid {
    source_id: String,
    col_lines: Vec<f64>,
    row_lines: Vec<f64>,
    elements: Vec<RawGridElement>,
}

#[derive(Serialize, Deserialize)]
struct RawGridElement {
    category: String,
    #[serde(rename = "box")]
    bbox: [f64; 4],
}

fn check_lines(lines: &[f64], lo: f64, hi: f64, what: &str, id: &str) -> Result<()> {
    let ok = lines.len() >= 2
        && lines.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v))
        && lines.windows(2).all(|w| w[0] < w[1])
        && lines[0] == lo
        && lines[lines.len() - 1] == hi;
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidGridIndex(format!(
            "grid `{id}`: {what} must be strictly increasing within [0,1] and span the boundary"
        )))
    }
}

impl GridIndex {
    /// Build one grid per corpus layout against the shared corpus boundary.
    pub fn build(corpus: &[(String, Layout)], gutter: f64) -> Result<Self> {
        let boundary = corpus_boundary(corpus.iter().map(|(_, l)| l))?;
        let entries = corpus
            .par_iter()
            .map(|(id, layout)| GridEntry {
                grid: construct_grid(layout, boundary, gutter, id.clone()),
                elements: layout.elements.clone(),
            })
            .collect();
        Ok(Self {
            gutter,
            boundary,
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, source_id: &str) -> Option<&GridEntry> {
        self.entries.iter().find(|e| e.grid.source_id == source_id)
    }

    pub fn to_json(&self) -> String {
        let raw = RawIndex {
            gutter: self.gutter,
            boundary: self.boundary.to_array(),
            grids: self
                .entries
                .iter()
                .map(|e| RawGrid {
                    source_id: e.grid.source_id.clone(),
                    col_lines: e.grid.col_lines.clone(),
                    row_lines: e.grid.row_lines.clone(),
                    elements: e
                        .elements
                        .iter()
                        .map(|el| RawGridElement {
                            category: el.category.clone(),
                            bbox: el.bbox.to_array(),
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("grid index serialization cannot fail") + "\n"
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let raw: RawIndex = serde_json::from_slice(bytes)?;
        if !(raw.gutter.is_finite() && raw.gutter >= 0.0) {
            return Err(Error::InvalidGridIndex("gutter must be non-negative".into()));
        }
        let boundary = Boundary::from_array(raw.boundary);
        if !(boundary.left < boundary.right && boundary.top < boundary.bottom) {
            return Err(Error::InvalidGridIndex("boundary must have positive extent".into()));
        }
        let mut entries = Vec::with_capacity(raw.grids.len());
        for g in raw.grids {
            check_lines(&g.col_lines, boundary.left, boundary.right, "col_lines", &g.source_id)?;
            check_lines(&g.row_lines, boundary.top, boundary.bottom, "row_lines", &g.source_id)?;
            let elements = g
                .elements
                .into_iter()
                .enumerate()
                .map(|(k, e)| Element::new(format!("{}#{k}", g.source_id), e.category, BBox::from_array(e.bbox)))
                .collect();
            entries.push(GridEntry {
                grid: GridSystem {
                    margin_left: boundary.left,
                    margin_top: boundary.top,
                    margin_right: boundary.right,
                    margin_bottom: boundary.bottom,
                    col_lines: g.col_lines,
                    row_lines: g.row_lines,
                    gutter: raw.gutter,
                    source_id: g.source_id,
                },
                elements,
            });
        }
        Ok(Self {
            gutter: raw.gutter,
            boundary,
            entries,
        })
    }
}
