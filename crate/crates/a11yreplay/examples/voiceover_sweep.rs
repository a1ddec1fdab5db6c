//! Screen-reader traversal: right-swipe through a screen with an injected
//! focus-order cycle, watch the loop detector fire and break out, and turn
//! the traversal records into findings.
//!
//! ```bash
//! cargo run -p a11yreplay --example voiceover_sweep
//! ```

use a11yreplay::device_sim::{load_app, DeviceDriver, FeatureDelta, Session};
use a11yreplay::heuristics::collect_vo_findings;
use a11yreplay::voiceover::VoiceOverEngine;

fn main() {
    // A carousel row whose last item hands focus back to the first, with
    // regular content below it, plus one element VoiceOver cannot reach.
    let doc = serde_json::json!({
        "format_version": 1,
        "app_id": "carousel",
        "app_name": "Carousel",
        "width": 400,
        "height": 800,
        "initial_screen": "main",
        "screens": {
            "main": {
                "elements": [
                    {"name": "card_a", "kind": "Text", "text": "Card A", "box": [10, 40, 130, 60]},
                    {"name": "card_b", "kind": "Text", "text": "Card B", "box": [150, 40, 270, 60]},
                    {"name": "card_c", "kind": "Text", "text": "Card C", "box": [290, 40, 390, 60], "vo_next": "card_a"},
                    {"name": "headline", "kind": "Text", "text": "Top Headline", "box": [10, 120, 300, 150]},
                    {"name": "ghost", "kind": "Text", "text": "Unreachable label", "box": [10, 180, 300, 210],
                     "accessibility_exposed": false},
                    {"name": "footer", "kind": "Text", "text": "Footer", "box": [10, 240, 300, 270]}
                ]
            }
        }
    });
    let app = load_app(&doc.to_string()).unwrap();
    let mut session = Session::with_app(app);
    session.set_feature(&FeatureDelta::voiceover(true)).unwrap();
    session.launch_app("carousel").unwrap();

    let mut engine = VoiceOverEngine::new();
    let trace = engine.read_all(&mut session).unwrap();
    println!("Traversal ({} visits, truncated: {}):", trace.visited.len(), trace.truncated);
    for (i, visit) in trace.visited.iter().enumerate() {
        println!("  {i:>2}. {}", visit.caption);
    }
    if let Some(rec) = &trace.loop_record {
        println!(
            "\nLoop: visit {} repeated visit {} (broke out: {})",
            rec.repeat_index, rec.first_index, rec.broke_out
        );
    }

    // Try to activate the unreachable element by its coordinates.
    let (x, y) = (160, 195);
    let result = engine
        .activate_from_coordinates(&mut session, x, y, a11yreplay::ui_model::ElementKind::Text)
        .unwrap();
    println!(
        "\nActivation at ({x}, {y}): missing={} (forward {} / backward {} swipes)",
        result.missing, result.swipes_forward, result.swipes_backward
    );

    println!("\nFindings:");
    for finding in collect_vo_findings(engine.traces(), engine.activations()) {
        println!("  [{:?}] {}", finding.kind, finding.detail);
    }
}
