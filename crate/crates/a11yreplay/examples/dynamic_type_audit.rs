//! The Dynamic Type heuristic on a pair of snapshots one size increment
//! apart: text elements are matched by fuzzy similarity, paired with their
//! icons, and each match must grow its box area by at least 10%.
//!
//! ```bash
//! cargo run -p a11yreplay --example dynamic_type_audit
//! ```

use a11yreplay::heuristics::{dynamic_type_check, partial_similarity, HeuristicConfig};
use a11yreplay::ui_model::{BoundingBox, ElementKind, ScreenSnapshot, UIElement};

fn text(label: &str, b: [i32; 4]) -> UIElement {
    UIElement::new(ElementKind::Text, Some(label), false, BoundingBox::new(b[0], b[1], b[2], b[3]))
}

fn main() {
    println!(
        "similarity(\"Following\", \"Following (3)\") = {}",
        partial_similarity("Following", "Following (3)")
    );

    let base = ScreenSnapshot::from_elements(
        vec![
            text("Following (3)", [60, 20, 220, 48]),
            text("New Episodes", [60, 80, 220, 108]),
            text("Downloaded", [60, 140, 220, 168]),
            UIElement::new(ElementKind::Icon, None, false, BoundingBox::new(30, 22, 50, 46)),
        ],
        400,
        800,
        false,
        "demo",
        "library",
    );
    let grown = ScreenSnapshot::from_elements(
        vec![
            text("Following (3)", [60, 20, 250, 54]),  // grows
            text("New Episodes", [60, 80, 220, 108]),  // static: a bug
            text("Downloaded", [60, 140, 244, 172]),   // grows
            UIElement::new(ElementKind::Icon, None, false, BoundingBox::new(30, 22, 50, 46)), // static icon: a bug
        ],
        400,
        800,
        false,
        "demo",
        "library",
    );

    let findings = dynamic_type_check(&base, &grown, &HeuristicConfig::default());
    println!("\nFindings ({}):", findings.len());
    for finding in findings {
        println!("  [{:?}/{:?}] {}", finding.kind, finding.verdict, finding.detail);
    }
}
