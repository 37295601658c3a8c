//! Newton polygons of polynomials over a tower, with exact rational slopes.
//!
//! The polygon of `f = sum a_i X^i` is the lower convex hull of the points
//! `(i, v(a_i))` taken over indices with `a_i != 0`.  Coefficients that vanish
//! modulo `p^N` contribute no point; callers that need to distinguish exact
//! zeros from losses of precision must check their inputs before calling.

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::{rat, Rat};
use crate::tower::{Repr, TowerRing};
use num_traits::Zero;

/// One maximal segment of the lower hull.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    // slope of the segment, strictly increasing along the hull
    pub slope: Rat,
    // horizontal extent, always positive
    pub length: u64,
}

/// Lower convex hull of the coefficient valuation points of a polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NPolygon {
    vertices: Vec<(usize, Rat)>,
    segments: Vec<Segment>,
}

impl NPolygon {
    /// Hull vertices as (coefficient index, valuation), index increasing.
    pub fn vertices(&self) -> &[(usize, Rat)] {
        &self.vertices
    }

    /// Maximal segments with strictly increasing slopes.
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Index of the leftmost vertex, the order of vanishing at zero.
    pub fn ord_zero(&self) -> usize {
        self.vertices.first().map(|&(i, _)| i).unwrap_or(0)
    }

    /// Height of the hull above index `i`, None outside the hull's span.
    pub fn height_at(&self, i: usize) -> Option<Rat> {
        let (first, last) = (self.vertices.first()?, self.vertices.last()?);
        if i < first.0 || i > last.0 {
            return None;
        }
        let k = self.vertices.partition_point(|&(x, _)| x <= i);
        let (x1, y1) = &self.vertices[k - 1];
        if *x1 == i {
            return Some(y1.clone());
        }
        let (x2, y2) = &self.vertices[k];
        let t = rat((i - x1) as i64, (x2 - x1) as i64);
        Some(y1.clone() + (y2.clone() - y1.clone()) * t)
    }

    /// Valuations of the nonzero roots counted with multiplicity, ascending.
    ///
    /// Each segment of slope `s` and length `l` contributes `l` roots of
    /// valuation `-s`; the list has `degree - ord_zero` entries.
    pub fn root_valuations(&self) -> Vec<Rat> {
        let mut out = Vec::new();
        for seg in self.segments.iter().rev() {
            for _ in 0..seg.length {
                out.push(-seg.slope.clone());
            }
        }
        debug_assert!(out.windows(2).all(|w| w[0] <= w[1]));
        out
    }
}

/// Lower hull of valuation points with distinct, strictly increasing indices.
pub fn polygon_of_points(points: &[(usize, Rat)]) -> NPolygon {
    debug_assert!(points.windows(2).all(|w| w[0].0 < w[1].0));
    let mut hull: Vec<(usize, Rat)> = Vec::new();
    for p in points {
        while hull.len() >= 2 {
            let a = &hull[hull.len() - 2];
            let b = &hull[hull.len() - 1];
            // keep only strict left turns so collinear points merge
            let lhs = rat_of_usize(b.0 - a.0) * (p.1.clone() - a.1.clone());
            let rhs = (b.1.clone() - a.1.clone()) * rat_of_usize(p.0 - a.0);
            if lhs <= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p.clone());
    }
    let segments = hull
        .windows(2)
        .map(|w| {
            let run = w[1].0 - w[0].0;
            Segment {
                slope: (w[1].1.clone() - w[0].1.clone()) / rat_of_usize(run),
                length: run as u64,
            }
        })
        .collect();
    NPolygon {
        vertices: hull,
        segments,
    }
}

/// Newton polygon of a nonzero polynomial over a tower.
pub fn newton_polygon(ring: &TowerRing, f: &Poly<Repr>) -> Result<NPolygon> {
    let mut points = Vec::new();
    for (i, c) in f.coeffs().iter().enumerate() {
        if let Some(v) = ring.val(c) {
            points.push((i, v));
        }
    }
    if points.is_empty() {
        return Err(Error::InvalidArgument(
            "newton polygon of the zero polynomial".into(),
        ));
    }
    Ok(polygon_of_points(&points))
}

/// Valuations of the nonzero roots of `f`, ascending with multiplicity.
pub fn root_valuations(ring: &TowerRing, f: &Poly<Repr>) -> Result<Vec<Rat>> {
    Ok(newton_polygon(ring, f)?.root_valuations())
}

fn rat_of_usize(n: usize) -> Rat {
    debug_assert!(!n.is_zero());
    rat(n as i64, 1)
}
