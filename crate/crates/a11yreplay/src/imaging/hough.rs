//! Hough line transform restricted to horizontal lines (theta = 0), which
//! is all the underline detector needs. Each row accumulates its longest
//! run of edge pixels, tolerating single-pixel gaps.

use super::EdgeMap;

/// Gaps up to this many pixels are bridged inside a run.
pub const RUN_GAP_TOLERANCE: usize = 1;

/// A detected horizontal line: the row and the pixel span of its run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HoughLine {
    pub row: usize,
    pub span: usize,
}

/// Longest gap-tolerant run of edge pixels in one row.
fn longest_run(edges: &EdgeMap, row: usize) -> usize {
    let mut best = 0usize;
    let mut start: Option<usize> = None;
    let mut last_edge = 0usize;
    for x in 0..edges.width() {
        if edges.at(x, row) {
            match start {
                Some(s) => {
                    if x - last_edge > RUN_GAP_TOLERANCE + 1 {
                        best = best.max(last_edge - s + 1);
                        start = Some(x);
                    }
                }
                None => start = Some(x),
            }
            last_edge = x;
        }
    }
    if let Some(s) = start {
        best = best.max(last_edge - s + 1);
    }
    best
}

/// Returns every row whose longest run covers at least
/// `min_width_frac` of the map width. `min_width_frac` must be in (0, 1].
pub fn hough_horizontal_lines(edges: &EdgeMap, min_width_frac: f64) -> Vec<HoughLine> {
    assert!(
        min_width_frac > 0.0 && min_width_frac <= 1.0,
        "min_width_frac out of range: {min_width_frac}"
    );
    let needed = min_width_frac * edges.width() as f64;
    (0..edges.height())
        .filter_map(|row| {
            let span = longest_run(edges, row);
            (span > 0 && span as f64 >= needed).then_some(HoughLine { row, span })
        })
        .collect()
}
