//! Layout domain types and their canonical JSON form.
//!
//! Boxes are stored as normalized center/size `[x, y, w, h]`; edges are
//! derived on demand. Serialization writes every real with exactly six
//! decimals so that the output is byte-stable across runs and platforms.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::Deserialize;

use crate::criteria::CriteriaSet;
use crate::error::{Error, Result};

/// Slack allowed around the unit canvas at ingest.
pub const INGEST_TOLERANCE: f64 = 0.05;

/// Smallest width or height a rectified box may have.
pub const MIN_SIZE: f64 = 1e-3;

/// Axis-aligned box in normalized canvas units, center + size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    pub fn from_edges(left: f64, top: f64, right: f64, bottom: f64) -> Self {
        Self {
            x: 0.5 * (left + right),
            y: 0.5 * (top + bottom),
            w: right - left,
            h: bottom - top,
        }
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.w, self.h]
    }

    #[inline]
    pub fn left(&self) -> f64 {
        self.x - 0.5 * self.w
    }

    #[inline]
    pub fn right(&self) -> f64 {
        self.x + 0.5 * self.w
    }

    #[inline]
    pub fn top(&self) -> f64 {
        self.y - 0.5 * self.h
    }

    #[inline]
    pub fn bottom(&self) -> f64 {
        self.y + 0.5 * self.h
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Area of the intersection with `other` (0 when disjoint).
    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let ow = (self.right().min(other.right()) - self.left().max(other.left())).max(0.0);
        let oh = (self.bottom().min(other.bottom()) - self.top().max(other.top())).max(0.0);
        ow * oh
    }

    pub fn translated(&self, dx: f64, dy: f64) -> BBox {
        BBox::new(self.x + dx, self.y + dy, self.w, self.h)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.w.is_finite() && self.h.is_finite()
    }

    /// Project onto the unit canvas with sizes floored at [`MIN_SIZE`].
    ///
    /// Boxes already inside the canvas are returned bit-for-bit unchanged.
    pub fn clamped_to_canvas(&self) -> BBox {
        let (l, r) = clamp_span(self.left(), self.right());
        let (t, b) = clamp_span(self.top(), self.bottom());
        let mut out = *self;
        if l != self.left() || r != self.right() {
            out.x = 0.5 * (l + r);
            out.w = r - l;
        }
        if t != self.top() || b != self.bottom() {
            out.y = 0.5 * (t + b);
            out.h = b - t;
        }
        out
    }

    /// L1 distance between parameter vectors.
    pub fn displacement(&self, other: &BBox) -> f64 {
        (self.x - other.x).abs() + (self.y - other.y).abs() + (self.w - other.w).abs() + (self.h - other.h).abs()
    }
}

fn clamp_span(lo: f64, hi: f64) -> (f64, f64) {
    if lo >= 0.0 && hi <= 1.0 && hi - lo >= MIN_SIZE {
        return (lo, hi);
    }
    let mut lo = lo.clamp(0.0, 1.0);
    let mut hi = hi.clamp(0.0, 1.0);
    if hi - lo < MIN_SIZE {
        let mid = (0.5 * (lo + hi)).clamp(0.5 * MIN_SIZE, 1.0 - 0.5 * MIN_SIZE);
        lo = mid - 0.5 * MIN_SIZE;
        hi = mid + 0.5 * MIN_SIZE;
    }
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub id: String,
    pub category: String,
    pub bbox: BBox,
}

impl Element {
    pub fn new(id: impl Into<String>, category: impl Into<String>, bbox: BBox) -> Self {
        Self {
            id: id.into(),
            category: category.into(),
            bbox,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub canvas_width: f64,
    pub canvas_height: f64,
    pub elements: Vec<Element>,
}

#[derive(Deserialize)]
struct RawLayout {
    canvas_width: f64,
    canvas_height: f64,
    elements: Vec<RawElement>,
}

#[derive(Deserialize)]
struct RawElement {
    id: String,
    category: String,
    #[serde(rename = "box")]
    bbox: [f64; 4],
}

impl Layout {
    /// Build and validate a layout.
    pub fn new(canvas_width: f64, canvas_height: f64, elements: Vec<Element>) -> Result<Self> {
        let layout = Self {
            canvas_width,
            canvas_height,
            elements,
        };
        layout.validate(None)?;
        Ok(layout)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn boxes(&self) -> Vec<BBox> {
        self.elements.iter().map(|e| e.bbox).collect()
    }

    /// Same layout with its boxes replaced, in element order.
    pub fn with_boxes(&self, boxes: &[BBox]) -> Layout {
        debug_assert_eq!(boxes.len(), self.elements.len());
        let mut out = self.clone();
        for (e, b) in out.elements.iter_mut().zip(boxes) {
            e.bbox = *b;
        }
        out
    }

    pub fn clamped_to_canvas(&self) -> Layout {
        let boxes: Vec<BBox> = self.elements.iter().map(|e| e.bbox.clamped_to_canvas()).collect();
        self.with_boxes(&boxes)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.elements.iter().position(|e| e.id == id)
    }

    /// Check every layout invariant. When `universe` is given, element
    /// categories must be declared by it.
    pub fn validate(&self, universe: Option<&CriteriaSet>) -> Result<()> {
        if !(self.canvas_width.is_finite() && self.canvas_width > 0.0) {
            return Err(Error::InvalidLayout("canvas_width must be positive".into()));
        }
        if !(self.canvas_height.is_finite() && self.canvas_height > 0.0) {
            return Err(Error::InvalidLayout("canvas_height must be positive".into()));
        }
        if self.elements.is_empty() {
            return Err(Error::InvalidLayout("layout has no elements".into()));
        }
        let mut seen = HashSet::with_capacity(self.elements.len());
        for e in &self.elements {
            let fail = |reason: String| Error::InvalidElement {
                id: e.id.clone(),
                reason,
            };
            if !seen.insert(e.id.as_str()) {
                return Err(fail("duplicate id".into()));
            }
            let b = &e.bbox;
            if !b.is_finite() {
                return Err(fail("non-finite box coordinate".into()));
            }
            if b.w <= 0.0 || b.h <= 0.0 {
                return Err(fail(format!("box has non-positive size {}x{}", b.w, b.h)));
            }
            let lo = -INGEST_TOLERANCE;
            let hi = 1.0 + INGEST_TOLERANCE;
            for (name, v) in [
                ("left", b.left()),
                ("right", b.right()),
                ("top", b.top()),
                ("bottom", b.bottom()),
            ] {
                if v < lo || v > hi {
                    return Err(fail(format!("{name} edge {v} outside the canvas")));
                }
            }
            if let Some(c) = universe {
                if !c.contains(&e.category) {
                    return Err(fail(format!("unknown category `{}`", e.category)));
                }
            }
        }
        Ok(())
    }

    /// Canonical JSON: fixed field order, six decimals, one element per line.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(out, "  \"canvas_width\": {},", fmt_real(self.canvas_width));
        let _ = writeln!(out, "  \"canvas_height\": {},", fmt_real(self.canvas_height));
        out.push_str("  \"elements\": [");
        for (k, e) in self.elements.iter().enumerate() {
            out.push_str(if k == 0 { "\n" } else { ",\n" });
            let _ = write!(
                out,
                "    {{\"id\": {}, \"category\": {}, \"box\": [{}, {}, {}, {}]}}",
                json_string(&e.id),
                json_string(&e.category),
                fmt_real(e.bbox.x),
                fmt_real(e.bbox.y),
                fmt_real(e.bbox.w),
                fmt_real(e.bbox.h),
            );
        }
        out.push_str("\n  ]\n}\n");
        out
    }
}

/// Round to six decimals and print with exactly six, never as `-0.000000`.
pub fn fmt_real(v: f64) -> String {
    let r = (v * 1e6).round() / 1e6;
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{r:.6}")
}

pub(crate) fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization cannot fail")
}

/// Parse and validate a layout document.
pub fn parse_layout(bytes: &[u8]) -> Result<Layout> {
    parse_layout_checked(bytes, None)
}

/// Parse a layout, additionally requiring every category to be declared by
/// `criteria`.
pub fn parse_layout_checked(bytes: &[u8], criteria: Option<&CriteriaSet>) -> Result<Layout> {
    let raw: RawLayout = serde_json::from_slice(bytes)?;
    let layout = Layout {
        canvas_width: raw.canvas_width,
        canvas_height: raw.canvas_height,
        elements: raw
            .elements
            .into_iter()
            .map(|e| Element {
                id: e.id,
                category: e.category,
                bbox: BBox::from_array(e.bbox),
            })
            .collect(),
    };
    layout.validate(criteria)?;
    Ok(layout)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"canvas_width":612,"canvas_height":792,"elements":[{"id":"e0","category":"text","box":[0.5,0.5,0.4,0.1]}]}"#;

    #[test]
    fn parses_minimal_document() {
        let l = parse_layout(MINIMAL.as_bytes()).unwrap();
        assert_eq!(l.len(), 1);
        assert_eq!(l.elements[0].id, "e0");
        assert_eq!(l.elements[0].bbox, BBox::new(0.5, 0.5, 0.4, 0.1));
        assert_eq!(l.canvas_width, 612.0);
    }

    #[test]
    fn round_trip_is_identity() {
        let l = parse_layout(MINIMAL.as_bytes()).unwrap();
        let text = l.to_json();
        let again = parse_layout(text.as_bytes()).unwrap();
        assert_eq!(l, again);
        assert_eq!(text, again.to_json());
    }

    #[test]
    fn zero_width_names_the_element() {
        let doc = MINIMAL.replace("0.4,0.1", "0.0,0.1");
        let err = parse_layout(doc.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("e0"), "{err}");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let doc = r#"{"canvas_width":1,"canvas_height":1,"elements":[
            {"id":"a","category":"text","box":[0.2,0.2,0.1,0.1]},
            {"id":"a","category":"text","box":[0.6,0.6,0.1,0.1]}]}"#;
        let err = parse_layout(doc.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::InvalidElement { ref id, .. } if id == "a"));
    }

    #[test]
    fn overshoot_within_tolerance_is_accepted() {
        let doc = MINIMAL.replace("[0.5,0.5,0.4,0.1]", "[0.5,0.5,1.08,0.1]");
        assert!(parse_layout(doc.as_bytes()).is_ok());
        let doc = MINIMAL.replace("[0.5,0.5,0.4,0.1]", "[0.5,0.5,1.2,0.1]");
        assert!(parse_layout(doc.as_bytes()).is_err());
    }

    #[test]
    fn empty_and_malformed_rejected() {
        assert!(parse_layout(br#"{"canvas_width":1,"canvas_height":1,"elements":[]}"#).is_err());
        assert!(matches!(parse_layout(b"{not json"), Err(Error::Json(_))));
        assert!(parse_layout(b"\xff\xfe").is_err());
        let short_box = MINIMAL.replace("0.4,0.1]", "0.4]");
        assert!(parse_layout(short_box.as_bytes()).is_err());
    }

    #[test]
    fn unknown_category_rejected_with_universe() {
        let c = crate::criteria::parse_criteria(br#"{"others":["title"]}"#).unwrap();
        let err = parse_layout_checked(MINIMAL.as_bytes(), Some(&c)).unwrap_err();
        assert!(err.to_string().contains("e0"));
    }

    #[test]
    fn negative_zero_is_normalized() {
        assert_eq!(fmt_real(-0.0), "0.000000");
        assert_eq!(fmt_real(-1e-9), "0.000000");
        assert_eq!(fmt_real(0.1234565), "0.123457");
    }

    #[test]
    fn clamp_leaves_inside_boxes_untouched() {
        let b = BBox::new(0.3, 0.7, 0.2 + 1e-17, 0.1);
        assert_eq!(b.clamped_to_canvas(), b);
        let c = BBox::new(0.0, 0.5, 0.2, 0.2).clamped_to_canvas();
        assert!((c.left() - 0.0).abs() < 1e-15 && (c.right() - 0.1).abs() < 1e-15);
        let tiny = BBox::new(1.0, 0.5, 0.0004, 0.2).clamped_to_canvas();
        assert!(tiny.w >= MIN_SIZE - 1e-15 && tiny.right() <= 1.0);
    }
}
