//! Squarified treemap over weighted items.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::CommunityId;

/// Axis-aligned rectangle in the unit layout square, `y` pointing up.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub const UNIT: Rect = Rect {
        x: 0.0,
        y: 0.0,
        w: 1.0,
        h: 1.0,
    };

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Longer side over shorter side; infinite for degenerate rectangles.
    pub fn aspect(&self) -> f64 {
        let (a, b) = (self.w.max(self.h), self.w.min(self.h));
        if b > 0.0 {
            a / b
        } else {
            f64::INFINITY
        }
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + 0.5 * self.w, self.y + 0.5 * self.h)
    }

    /// Shrinks by `fraction` of the width and height on every side.
    pub fn inset(&self, fraction: f64) -> Rect {
        Rect {
            x: self.x + fraction * self.w,
            y: self.y + fraction * self.h,
            w: self.w * (1.0 - 2.0 * fraction),
            h: self.h * (1.0 - 2.0 * fraction),
        }
    }

    pub fn contains(&self, x: f64, y: f64, eps: f64) -> bool {
        x >= self.x - eps && x <= self.x + self.w + eps && y >= self.y - eps && y <= self.y + self.h + eps
    }

    /// Area of the intersection with `other`.
    pub fn overlap(&self, other: &Rect) -> f64 {
        let w = (self.x + self.w).min(other.x + other.w) - self.x.max(other.x);
        let h = (self.y + self.h).min(other.y + other.h) - self.y.max(other.y);
        w.max(0.0) * h.max(0.0)
    }
}

/// Squarified treemap of `weights` inside the unit square. Items are laid out
/// by descending weight, ties by id; cell areas are proportional to weights.
pub fn treemap(weights: &[(CommunityId, f64)]) -> Result<Vec<(CommunityId, Rect)>> {
    treemap_in(weights, Rect::UNIT)
}

pub fn treemap_in(weights: &[(CommunityId, f64)], bounds: Rect) -> Result<Vec<(CommunityId, Rect)>> {
    if weights.is_empty() {
        return Err(Error::NoCommunities);
    }
    if let Some((c, w)) = weights.iter().find(|(_, w)| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidConfig(format!("community {c} has weight {w}")));
    }
    let mut items = weights.to_vec();
    items.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let total: f64 = items.iter().map(|i| i.1).sum();
    let scale = bounds.area() / total;
    let areas: Vec<f64> = items.iter().map(|i| i.1 * scale).collect();
    let rects = squarify(&areas, bounds);
    Ok(items.into_iter().map(|i| i.0).zip(rects).collect())
}

fn worst(row: &[f64], side: f64) -> f64 {
    let s: f64 = row.iter().sum();
    let (lo, hi) = row
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &a| (lo.min(a), hi.max(a)));
    let s2 = s * s;
    let w2 = side * side;
    (w2 * hi / s2).max(s2 / (w2 * lo))
}

/// Lays out `areas` (summing to `bounds.area()`) in order.
fn squarify(areas: &[f64], bounds: Rect) -> Vec<Rect> {
    let mut out = Vec::with_capacity(areas.len());
    let mut free = bounds;
    let mut start = 0;
    while start < areas.len() {
        let side = free.w.min(free.h);
        let mut end = start + 1;
        while end < areas.len() && worst(&areas[start..=end], side) <= worst(&areas[start..end], side) {
            end += 1;
        }
        let last = end == areas.len();
        free = lay_row(&areas[start..end], free, last, &mut out);
        start = end;
    }
    out
}

/// Places one row along the shorter side of `free` and returns what is left.
/// The final row takes the remaining space exactly so the tiling is closed.
fn lay_row(row: &[f64], free: Rect, last: bool, out: &mut Vec<Rect>) -> Rect {
    let s: f64 = row.iter().sum();
    if free.w >= free.h {
        // a column on the left, items stacked upwards
        let width = if last { free.w } else { s / free.h };
        let mut y = free.y;
        for (i, &a) in row.iter().enumerate() {
            let h = if i + 1 == row.len() {
                free.y + free.h - y
            } else {
                a / width
            };
            out.push(Rect {
                x: free.x,
                y,
                w: width,
                h,
            });
            y += h;
        }
        Rect {
            x: free.x + width,
            y: free.y,
            w: free.w - width,
            h: free.h,
        }
    } else {
        // a row along the bottom, items left to right
        let height = if last { free.h } else { s / free.w };
        let mut x = free.x;
        for (i, &a) in row.iter().enumerate() {
            let w = if i + 1 == row.len() {
                free.x + free.w - x
            } else {
                a / height
            };
            out.push(Rect {
                x,
                y: free.y,
                w,
                h: height,
            });
            x += w;
        }
        Rect {
            x: free.x,
            y: free.y + height,
            w: free.w,
            h: free.h - height,
        }
    }
}
