//! Layouts, standardized node-link rasters and rotation alignment of drawings.

pub mod align;
pub mod layout;
pub mod raster;
pub mod style;

pub use align::{
    apply_alignment, best_rotation, binarize, default_radii, iou_auc, preprocess_for_model, radii_for_canvas, rotate_image,
    AlignmentResult, Mask,
};
pub use layout::{draw, layout, layout_circular, layout_fr, layout_umap, Drawing};
pub use raster::{read_sidecar, render, write_sidecar, Provenance, RasterImage, STIMULUS_CANVAS};
pub use style::{style_for, StyleParams};

use graphsim_core::{Graph, LayoutKind};

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("canvas of {0}px is below the 256px minimum")]
    CanvasTooSmall(u32),
    #[error("drawing has {found} positions for {expected} nodes")]
    PositionCount { expected: usize, found: usize },
    #[error("mask has no foreground pixels")]
    EmptyMask,
    #[error("no dilation radii given")]
    NoRadii,
    #[error(transparent)]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Lays out and renders one stimulus with the shared style.
pub fn render_stimulus(graph_id: &str, g: &Graph, kind: LayoutKind, seed: u64, canvas: u32) -> Result<(Drawing, RasterImage), RenderError> {
    let d = draw(graph_id, kind, g, seed);
    let img = render(g, &d, &style_for(g), canvas)?;
    Ok((d, img))
}
