use graphsim_core::Graph;
use serde::{Deserialize, Serialize};

/// Canvas side at which the pixel sizes in [`StyleParams`] are defined.
pub const REFERENCE_CANVAS: u32 = 1024;
pub const NODE_BLUE: [u8; 3] = [31, 119, 180];
pub const EDGE_GRAY: [u8; 3] = [127, 127, 127];

pub const RADIUS_BASE: f64 = 40.0;
pub const RADIUS_MIN: f64 = 1.5;
pub const RADIUS_MAX: f64 = 16.0;
pub const WIDTH_BASE: f64 = 8.0;
pub const WIDTH_MIN: f64 = 0.1;
pub const WIDTH_MAX: f64 = 4.0;

/// Visual encoding shared by every layout. Sizes are pixels on a
/// [`REFERENCE_CANVAS`] canvas and scale linearly with the actual canvas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StyleParams {
    pub node_radius: f64,
    pub edge_width: f64,
    pub node_color: [u8; 3],
    pub edge_color: [u8; 3],
}

impl StyleParams {
    pub fn scaled(&self, canvas: u32) -> StyleParams {
        let f = canvas as f64 / REFERENCE_CANVAS as f64;
        StyleParams { node_radius: self.node_radius * f, edge_width: self.edge_width * f, ..*self }
    }
}

pub fn style_for_counts(nodes: usize, edges: usize) -> StyleParams {
    let n = nodes.max(1) as f64;
    // |E|/|V| * n reduces to the edge count.
    let e = edges.max(1) as f64;
    StyleParams {
        node_radius: (RADIUS_BASE / n.sqrt()).clamp(RADIUS_MIN, RADIUS_MAX),
        edge_width: (WIDTH_BASE / e.sqrt()).clamp(WIDTH_MIN, WIDTH_MAX),
        node_color: NODE_BLUE,
        edge_color: EDGE_GRAY,
    }
}

pub fn style_for(g: &Graph) -> StyleParams {
    style_for_counts(g.node_count(), g.edge_count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shrinks_with_size_and_density() {
        assert!(style_for_counts(10, 20).node_radius > style_for_counts(400, 800).node_radius);
        assert!(style_for_counts(50, 50).edge_width > style_for_counts(50, 400).edge_width);
    }

    #[test]
    fn bin_corners_stay_inside_clamps() {
        for n in [10usize, 20, 21, 50, 51, 200, 201, 400] {
            for d in [1.0, 1.99, 2.0, 2.99, 3.0, 10.0] {
                let m = (d * n as f64).round() as usize;
                let s = style_for_counts(n, m);
                let raw_r = RADIUS_BASE / (n as f64).sqrt();
                let raw_w = WIDTH_BASE / (m as f64).sqrt();
                assert!((RADIUS_MIN..=RADIUS_MAX).contains(&raw_r), "n={n}");
                assert!((WIDTH_MIN..=WIDTH_MAX).contains(&raw_w), "n={n} m={m}");
                assert_eq!((s.node_radius, s.edge_width), (raw_r, raw_w));
            }
        }
    }
}
