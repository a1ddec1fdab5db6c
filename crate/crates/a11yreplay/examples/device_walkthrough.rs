//! Drive the simulated device by hand: launch the bundled podcast app,
//! tap through a search flow, and dump the timestamped event log.
//!
//! ```bash
//! cargo run -p a11yreplay --example device_walkthrough
//! ```

use std::path::Path;

use a11yreplay::device_sim::{load_app_from_path, DeviceDriver, Session};
use a11yreplay::ui_model::serialize_elements;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/apps/podcast_app.json");
    let app = load_app_from_path(&path).expect("bundled app parses");
    let mut session = Session::with_app(app);

    let home = session.launch_app("podcast_app").unwrap();
    println!("Launched on \"{}\":\n{}\n", home.screen_id, serialize_elements(&home));

    // Tap the Search tab (center of its box), then run a query.
    let search_tab = home
        .elements
        .iter()
        .find(|e| e.text.as_deref() == Some("Search"))
        .unwrap();
    let (x, y) = search_tab.bounds.center();
    let search = session.tap(x, y).unwrap();
    println!("After tapping Search:\n{}\n", serialize_elements(&search));

    let field_id = search
        .elements
        .iter()
        .find(|e| e.kind == a11yreplay::ui_model::ElementKind::TextField)
        .unwrap()
        .id;
    let results = session.type_text(field_id, "Stuff You Should Know").unwrap();
    println!("After submitting a query -> \"{}\"\n", results.screen_id);

    println!("Event log:");
    for event in session.events() {
        println!("  {:>6} ms  {}", event.at_ms, event.action.label());
    }
}
