//! Box overlap measures and the containment cost functions.
//!
//! The pairwise costs are written once over [`Scalar`] so the same code
//! evaluates plain values (`f64`) and forward-mode derivatives ([`Dual`])
//! with respect to the eight parameters of a box pair.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::layout::BBox;

pub(crate) trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn value(self) -> f64;
    fn cst(v: f64) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
}

/// Value plus partial derivatives with respect to `[x, y, w, h]` of the
/// first box (slots 0..4) and the second box (slots 4..8).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dual {
    pub v: f64,
    pub d: [f64; 8],
}

impl Dual {
    pub fn var(v: f64, slot: usize) -> Self {
        let mut d = [0.0; 8];
        d[slot] = 1.0;
        Self { v, d }
    }

    pub fn pair(a: &BBox, b: &BBox) -> ([Dual; 4], [Dual; 4]) {
        (
            [
                Dual::var(a.x, 0),
                Dual::var(a.y, 1),
                Dual::var(a.w, 2),
                Dual::var(a.h, 3),
            ],
            [
                Dual::var(b.x, 4),
                Dual::var(b.y, 5),
                Dual::var(b.w, 6),
                Dual::var(b.h, 7),
            ],
        )
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, o: Dual) -> Dual {
        let mut d = self.d;
        for (x, y) in d.iter_mut().zip(o.d) {
            *x += y;
        }
        Dual { v: self.v + o.v, d }
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, o: Dual) -> Dual {
        let mut d = self.d;
        for (x, y) in d.iter_mut().zip(o.d) {
            *x -= y;
        }
        Dual { v: self.v - o.v, d }
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, o: Dual) -> Dual {
        let d = std::array::from_fn(|k| self.d[k] * o.v + self.v * o.d[k]);
        Dual { v: self.v * o.v, d }
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, o: Dual) -> Dual {
        let inv = 1.0 / o.v;
        let q = self.v * inv;
        let d = std::array::from_fn(|k| (self.d[k] - q * o.d[k]) * inv);
        Dual { v: q, d }
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(self) -> Dual {
        let mut d = self.d;
        for x in &mut d {
            *x = -*x;
        }
        Dual { v: -self.v, d }
    }
}

impl Scalar for Dual {
    #[inline]
    fn value(self) -> f64 {
        self.v
    }
    #[inline]
    fn cst(v: f64) -> Self {
        Dual { v, d: [0.0; 8] }
    }
}

/// Overlap fraction of the child and normalized squared center distance.
pub(crate) struct PairGeom<S> {
    pub ioca: S,
    /// rho^2 / c^2: squared center distance over the squared diagonal of the
    /// smallest enclosing box.
    pub dist: S,
}

/// `a` sorts before `b`; on exact ties the leading box counts as first.
#[inline]
fn before(a: f64, b: f64, a_leads: bool) -> bool {
    a < b || (a == b && a_leads)
}

/// Geometry of a (child, parent) pair. `child_leads` fixes the subgradient
/// at coincident edges: the child is treated as displaced infinitesimally
/// up and to the left of the parent.
#[inline]
pub(crate) fn pair_geom<S: Scalar>(c: [S; 4], p: [S; 4], child_leads: bool) -> PairGeom<S> {
    let half = S::cst(0.5);
    let (cl, cr) = (c[0] - half * c[2], c[0] + half * c[2]);
    let (ct, cb) = (c[1] - half * c[3], c[1] + half * c[3]);
    let (pl, pr) = (p[0] - half * p[2], p[0] + half * p[2]);
    let (pt, pb) = (p[1] - half * p[3], p[1] + half * p[3]);

    let span = |c_lo: S, c_hi: S, p_lo: S, p_hi: S| -> (S, S, bool) {
        let lo_first = before(c_lo.value(), p_lo.value(), child_leads);
        let hi_first = before(c_hi.value(), p_hi.value(), child_leads);
        let inner_hi = if hi_first { c_hi } else { p_hi };
        let inner_lo = if lo_first { p_lo } else { c_lo };
        let outer_hi = if hi_first { p_hi } else { c_hi };
        let outer_lo = if lo_first { c_lo } else { p_lo };
        let overlap = inner_hi - inner_lo;
        let overlap = if overlap.value() > 0.0 { overlap } else { S::cst(0.0) };
        let inside = !lo_first && hi_first;
        (overlap, outer_hi - outer_lo, inside)
    };
    let (ow, ew, inside_x) = span(cl, cr, pl, pr);
    let (oh, eh, inside_y) = span(ct, cb, pt, pb);

    let ioca = if inside_x && inside_y {
        S::cst(1.0)
    } else if ow.value() > 0.0 && oh.value() > 0.0 {
        ow * oh / (c[2] * c[3])
    } else {
        S::cst(0.0)
    };
    let dx = c[0] - p[0];
    let dy = c[1] - p[1];
    let rho2 = dx * dx + dy * dy;
    let diag2 = ew * ew + eh * eh;
    PairGeom {
        ioca,
        dist: rho2 / diag2,
    }
}

#[inline]
pub(crate) fn contain_pos_s<S: Scalar>(g: &PairGeom<S>) -> S {
    let one = S::cst(1.0);
    let weight = one - g.ioca;
    one - (g.ioca - weight * g.dist)
}

#[inline]
pub(crate) fn contain_neg_s<S: Scalar>(g: &PairGeom<S>, variant: NegativeContainment) -> S {
    let one = S::cst(1.0);
    match variant {
        NegativeContainment::Behavioral => g.ioca * (one - g.dist),
        NegativeContainment::Literal => one - (g.ioca + g.ioca * g.dist),
    }
}

/// Form of the negative containment cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NegativeContainment {
    /// `IoCA * (1 - rho^2/c^2)`: maximal at coincident centers, zero once
    /// the boxes are disjoint.
    #[default]
    Behavioral,
    /// `1 - (IoCA + IoCA * rho^2/c^2)` as printed.
    Literal,
}

fn params(b: &BBox) -> [f64; 4] {
    [b.x, b.y, b.w, b.h]
}

pub fn iou(a: &BBox, b: &BBox) -> f64 {
    if a == b {
        return 1.0;
    }
    let inter = a.intersection_area(b);
    if inter <= 0.0 {
        return 0.0;
    }
    (inter / (a.area() + b.area() - inter)).clamp(0.0, 1.0)
}

/// Intersection over the child's own area.
pub fn ioca(child: &BBox, parent: &BBox) -> Result<f64> {
    let area = child.area();
    // also rejects NaN
    if area.is_nan() || area <= 0.0 {
        return Err(Error::ZeroArea);
    }
    let inside = child.left() >= parent.left()
        && child.right() <= parent.right()
        && child.top() >= parent.top()
        && child.bottom() <= parent.bottom();
    if inside {
        return Ok(1.0);
    }
    Ok((child.intersection_area(parent) / area).clamp(0.0, 1.0))
}

/// Squared center distance over the squared diagonal of the enclosing box.
pub fn normalized_center_distance(a: &BBox, b: &BBox) -> f64 {
    pair_geom(params(a), params(b), true).dist
}

/// Distance-IoU cost, `1 - IoU + rho^2/c^2`.
pub fn diou_cost(a: &BBox, b: &BBox) -> f64 {
    1.0 - iou(a, b) + normalized_center_distance(a, b)
}

/// Positive containment cost: zero once `child` lies inside `parent`.
pub fn contain_pos(child: &BBox, parent: &BBox) -> f64 {
    contain_pos_s(&pair_geom(params(child), params(parent), true))
}

/// Negative containment cost: zero once the boxes are disjoint.
pub fn contain_neg(child: &BBox, parent: &BBox) -> f64 {
    contain_neg_s(
        &pair_geom(params(child), params(parent), true),
        NegativeContainment::Behavioral,
    )
}

pub fn contain_neg_literal(child: &BBox, parent: &BBox) -> f64 {
    contain_neg_s(
        &pair_geom(params(child), params(parent), true),
        NegativeContainment::Literal,
    )
}

/// Value and gradient (child params, then parent params) of a pair cost.
pub(crate) fn pair_cost_grad(
    child: &BBox,
    parent: &BBox,
    child_leads: bool,
    cost: impl Fn(&PairGeom<Dual>) -> Dual,
) -> Dual {
    let (c, p) = Dual::pair(child, parent);
    cost(&pair_geom(c, p, child_leads))
}
