//! The pixel pipeline behind the Button Shapes heuristic: render a screen,
//! extract a text patch, binarize with Otsu, run Canny, and look for a
//! full-width horizontal line with the Hough transform.
//!
//! ```bash
//! cargo run -p a11yreplay --example underline_pipeline
//! ```

use a11yreplay::device_sim::{load_app, AccessibilityFeatureState};
use a11yreplay::imaging::{
    binarize, canny_edges, extract_patch, hough_horizontal_lines, otsu_threshold, render_screen,
    to_grayscale,
};

fn main() {
    let doc = serde_json::json!({
        "format_version": 1,
        "app_id": "demo",
        "app_name": "Demo",
        "width": 320,
        "height": 240,
        "initial_screen": "main",
        "screens": {
            "main": {
                "elements": [
                    {"name": "underlined", "kind": "Text", "text": "Continue Reading",
                     "clickable": true, "underlined": true, "box": [20, 30, 280, 70]},
                    {"name": "plain", "kind": "Text", "text": "Continue Reading",
                     "clickable": true, "box": [20, 100, 280, 140]}
                ]
            }
        }
    });
    let app = load_app(&doc.to_string()).unwrap();
    let screen = &app.screens["main"];
    let pixels = render_screen(screen, &AccessibilityFeatureState::default(), 320, 240);

    for def in &screen.elements {
        let name = def.name.as_deref().unwrap_or("?");
        let patch = extract_patch(&pixels, &def.bounds).unwrap();
        let gray = to_grayscale(&patch);
        let threshold = otsu_threshold(&gray);
        let binary = binarize(&gray, threshold);
        let edges = canny_edges(&binary, 40.0, 100.0);
        let lines = hough_horizontal_lines(&edges, 0.75);
        println!(
            "{name:>10}: otsu threshold {threshold:3}, {} edge px, full-width lines: {:?}",
            edges.count(),
            lines
                .iter()
                .map(|l| format!("row {} span {}", l.row, l.span))
                .collect::<Vec<_>>()
        );
    }
}
