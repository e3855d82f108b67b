use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::graph::CommunityId;
use crate::tree::CommunityTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rgba(pub [u8; 4]);

impl Rgba {
    pub const WHITE: Rgba = Rgba([255, 255, 255, 255]);
    pub const RED: Rgba = Rgba([230, 25, 25, 255]);
    pub const GREY: Rgba = Rgba([160, 160, 160, 255]);

    pub fn with_opacity(self, opacity: f64) -> Rgba {
        let a = (opacity.clamp(0.0, 1.0) * 255.0).round() as u8;
        Rgba([self.0[0], self.0[1], self.0[2], a])
    }

    pub fn opacity(self) -> f64 {
        self.0[3] as f64 / 255.0
    }

    pub fn mix(self, other: Rgba) -> Rgba {
        let m = |a: u8, b: u8| ((a as u16 + b as u16) / 2) as u8;
        Rgba([
            m(self.0[0], other.0[0]),
            m(self.0[1], other.0[1]),
            m(self.0[2], other.0[2]),
            m(self.0[3], other.0[3]),
        ])
    }

    fn from_hsv(h: f64, s: f64, v: f64) -> Rgba {
        let h = h.rem_euclid(1.0) * 6.0;
        let i = h.floor();
        let f = h - i;
        let (p, q, t) = (v * (1.0 - s), v * (1.0 - s * f), v * (1.0 - s * (1.0 - f)));
        let (r, g, b) = match i as u32 {
            0 => (v, t, p),
            1 => (q, v, p),
            2 => (p, v, t),
            3 => (p, q, v),
            4 => (t, p, v),
            _ => (v, p, q),
        };
        let q8 = |x: f64| (x * 255.0).round() as u8;
        Rgba([q8(r), q8(g), q8(b), 255])
    }
}

const GOLDEN: f64 = 0.618_033_988_749_895;

/// One color per community: distinct hues for the top level (golden-ratio
/// hue stepping), shades of the parent hue below, white for the root.
pub(crate) fn community_palette(tree: &CommunityTree) -> Vec<Rgba> {
    let mut colors = vec![Rgba::WHITE; tree.community_count()];
    let mut hue = vec![0.0f64; tree.community_count()];
    let mut used = HashSet::new();
    for (i, &c) in tree.top_level().iter().enumerate() {
        let mut h = 0.08 + i as f64 * GOLDEN;
        let band = (i / 12) as f64;
        let (s, v) = (0.75 - 0.1 * (band % 3.0), 0.95 - 0.12 * (band % 2.0));
        let mut col = Rgba::from_hsv(h, s, v);
        while !used.insert(col) {
            h += 0.001;
            col = Rgba::from_hsv(h, s, v);
        }
        colors[c.index()] = col;
        hue[c.index()] = h;
    }
    let mut stack: Vec<CommunityId> = tree.top_level().to_vec();
    while let Some(c) = stack.pop() {
        let kids = &tree.children[c.index()];
        for (j, &k) in kids.iter().enumerate() {
            let shade = if kids.len() > 1 {
                j as f64 / (kids.len() - 1) as f64
            } else {
                0.5
            };
            hue[k.index()] = hue[c.index()];
            colors[k.index()] = Rgba::from_hsv(hue[c.index()], 0.55 + 0.3 * shade, 0.8 + 0.15 * (1.0 - shade));
            stack.push(k);
        }
    }
    colors
}
