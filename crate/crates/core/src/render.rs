//! Deterministic SVG rendering of layouts and before/after diffs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::alignment::{AlignmentRelationSet, Edge};
use crate::error::{Error, Result};
use crate::grid::GridSystem;
use crate::layout::{BBox, Layout};

#[derive(Debug, Clone, PartialEq)]
pub struct RenderStyle {
    /// Pixel width of one panel; the height follows the canvas aspect.
    pub canvas_px: f64,
    /// Per-category overrides of the hashed default colors, as `#rrggbb`.
    pub colors: BTreeMap<String, String>,
    pub stroke_width: f64,
    pub fill_opacity: f64,
    /// Categories drawn with `parent_opacity` so children stay visible.
    pub parent_categories: BTreeSet<String>,
    pub parent_opacity: f64,
    pub show_grid: bool,
    pub show_snap_lines: bool,
    pub show_relations: bool,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            canvas_px: 400.0,
            colors: BTreeMap::new(),
            stroke_width: 1.5,
            fill_opacity: 0.45,
            parent_categories: BTreeSet::new(),
            parent_opacity: 0.2,
            show_grid: true,
            show_snap_lines: false,
            show_relations: true,
        }
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Hashed hue at fixed saturation and lightness.
pub fn category_color(category: &str) -> String {
    let hue = (fnv1a(category) % 360) as f64;
    let (s, l) = (0.65, 0.48);
    let c = (1.0 - (2.0 * l - 1.0f64).abs()) * s;
    let hp = hue / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let byte = |v: f64| ((v + m) * 255.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", byte(r), byte(g), byte(b))
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

struct Frame {
    ox: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        self.ox + v * self.w
    }
    fn y(&self, v: f64) -> f64 {
        v * self.h
    }
}

fn panel_height(layout: &Layout, style: &RenderStyle) -> f64 {
    style.canvas_px * layout.canvas_height / layout.canvas_width
}

fn color_of<'a>(style: &'a RenderStyle, category: &str) -> std::borrow::Cow<'a, str> {
    match style.colors.get(category) {
        Some(c) => c.as_str().into(),
        None => category_color(category).into(),
    }
}

fn panel(
    out: &mut String,
    layout: &Layout,
    style: &RenderStyle,
    f: &Frame,
    grid: Option<&GridSystem>,
    relations: Option<&AlignmentRelationSet>,
) {
    let _ = writeln!(
        out,
        r##"  <rect class="canvas" x="{}" y="0.00" width="{}" height="{}" fill="#ffffff" stroke="#404040" stroke-width="1"/>"##,
        num(f.ox),
        num(f.w),
        num(f.h)
    );
    if let Some(g) = grid {
        if style.show_grid {
            for &v in &g.col_lines {
                let _ = writeln!(
                    out,
                    r##"  <line class="grid-col" x1="{0}" y1="0.00" x2="{0}" y2="{1}" stroke="#9090c0" stroke-width="0.75"/>"##,
                    num(f.x(v)),
                    num(f.h)
                );
            }
            for &v in &g.row_lines {
                let _ = writeln!(
                    out,
                    r##"  <line class="grid-row" x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#9090c0" stroke-width="0.75"/>"##,
                    num(f.x(0.0)),
                    num(f.y(v)),
                    num(f.x(1.0))
                );
            }
        }
        if style.show_snap_lines {
            let s = g.snap_lines();
            for &v in &s.vertical {
                let _ = writeln!(
                    out,
                    r##"  <line class="snap" x1="{0}" y1="0.00" x2="{0}" y2="{1}" stroke="#c09090" stroke-width="0.5" stroke-dasharray="2 2"/>"##,
                    num(f.x(v)),
                    num(f.h)
                );
            }
            for &v in &s.horizontal {
                let _ = writeln!(
                    out,
                    r##"  <line class="snap" x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#c09090" stroke-width="0.5" stroke-dasharray="2 2"/>"##,
                    num(f.x(0.0)),
                    num(f.y(v)),
                    num(f.x(1.0))
                );
            }
        }
    }
    for e in &layout.elements {
        let b = &e.bbox;
        let color = color_of(style, &e.category);
        let opacity = if style.parent_categories.contains(&e.category) {
            style.parent_opacity
        } else {
            style.fill_opacity
        };
        let _ = writeln!(
            out,
            r#"  <rect class="element" data-id="{id}" data-category="{cat}" x="{}" y="{}" width="{}" height="{}" fill="{color}" fill-opacity="{}" stroke="{color}" stroke-width="{}"/>"#,
            num(f.x(b.left())),
            num(f.y(b.top())),
            num(b.w * f.w),
            num(b.h * f.h),
            num(opacity),
            num(style.stroke_width),
            id = escape(&e.id),
            cat = escape(&e.category),
        );
        let _ = writeln!(
            out,
            r##"  <text x="{}" y="{}" font-family="monospace" font-size="9" fill="#202020">{}</text>"##,
            num(f.x(b.left()) + 2.0),
            num(f.y(b.top()) + 10.0),
            escape(&e.id)
        );
    }
    if let (Some(rel), true) = (relations, style.show_relations) {
        for r in rel.iter() {
            let (Some(i), Some(j)) = (layout.index_of(&r.i), layout.index_of(&r.j)) else {
                continue;
            };
            let (a, b) = (&layout.elements[i].bbox, &layout.elements[j].bbox);
            let edge = r.kind.edges()[0];
            let (x1, y1, x2, y2) = if r.kind.is_vertical() {
                (edge.of(a), a.y, edge.of(b), b.y)
            } else {
                (a.x, edge.of(a), b.x, edge.of(b))
            };
            let _ = writeln!(
                out,
                r##"  <line class="relation" data-kind="{}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#e07020" stroke-width="0.75" stroke-dasharray="3 2"/>"##,
                serde_json::to_value(r.kind)
                    .ok()
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default(),
                num(f.x(x1)),
                num(f.y(y1)),
                num(f.x(x2)),
                num(f.y(y2))
            );
        }
    }
}

fn header(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{1}" viewBox="0 0 {0} {1}">"#,
        num(width),
        num(height)
    );
}

/// One rect per element in layout order, plus optional grid and relation
/// overlays.
pub fn render_svg(
    layout: &Layout,
    style: &RenderStyle,
    grid: Option<&GridSystem>,
    relations: Option<&AlignmentRelationSet>,
) -> String {
    let h = panel_height(layout, style);
    let mut out = String::new();
    header(&mut out, style.canvas_px, h);
    let f = Frame {
        ox: 0.0,
        w: style.canvas_px,
        h,
    };
    panel(&mut out, layout, style, &f, grid, relations);
    out.push_str("</svg>\n");
    out
}

const DIFF_GAP: f64 = 20.0;

/// Before and after panels side by side with an arrow per element from its
/// old center to its new one, drawn in the after panel.
pub fn render_diff(before: &Layout, after: &Layout, style: &RenderStyle) -> Result<String> {
    fn ids(l: &Layout) -> BTreeSet<&str> {
        l.elements.iter().map(|e| e.id.as_str()).collect()
    }
    if ids(before) != ids(after) || before.len() != after.len() {
        return Err(Error::IdMismatch("before and after hold different element ids".into()));
    }
    let h = panel_height(before, style);
    let mut out = String::new();
    header(&mut out, 2.0 * style.canvas_px + DIFF_GAP, h);
    out.push_str(concat!(
        "  <defs><marker id=\"arrow\" markerWidth=\"6\" markerHeight=\"6\" refX=\"5\" refY=\"3\" orient=\"auto\">",
        "<path d=\"M0,0 L6,3 L0,6 z\" fill=\"#d02020\"/></marker></defs>\n"
    ));
    let left = Frame {
        ox: 0.0,
        w: style.canvas_px,
        h,
    };
    let right = Frame {
        ox: style.canvas_px + DIFF_GAP,
        w: style.canvas_px,
        h,
    };
    panel(&mut out, before, style, &left, None, None);
    panel(&mut out, after, style, &right, None, None);
    for e in &after.elements {
        let old: &BBox = &before.elements[before.index_of(&e.id).expect("ids checked")].bbox;
        let _ = writeln!(
            out,
            r##"  <line class="move" data-id="{}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#d02020" stroke-width="1" marker-end="url(#arrow)"/>"##,
            escape(&e.id),
            num(right.x(Edge::CenterX.of(old))),
            num(right.y(Edge::CenterY.of(old))),
            num(right.x(e.bbox.x)),
            num(right.y(e.bbox.y))
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
