//! End-to-end run of one bundled test: parse the instructions, replay the
//! test with scripted agents, and export the chaptered recording (frames,
//! WebVTT chapters, report.json).
//!
//! ```bash
//! cargo run -p a11yreplay --example full_test_run
//! ```

use std::path::Path;
use std::sync::Arc;

use a11yreplay::agents::{Agents, ScriptedClient};
use a11yreplay::device_sim::{load_app_from_path, Session};
use a11yreplay::heuristics::HeuristicConfig;
use a11yreplay::report::export_report;
use a11yreplay::runner::{parse_instructions, Runner};

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let app = load_app_from_path(&root.join("fixtures/apps/podcast_app.json")).unwrap();
    let raw = std::fs::read_to_string(root.join("fixtures/tests/dt_episode_title.txt")).unwrap();
    let client =
        ScriptedClient::from_path(&root.join("fixtures/scripts/dt_episode_title.json")).unwrap();

    let mut agents = Agents::new(Arc::new(client));
    let mut spec = parse_instructions(&raw, Some(&mut agents)).unwrap();
    if spec.app_name.is_empty() {
        spec.app_name = app.app_name.clone();
    }

    let mut session = Session::new(0);
    session.add_app(app);
    let runner = Runner::new(&mut session, &mut agents, HeuristicConfig::default());
    let recording = runner.run_test(&spec, "podcast_app").unwrap();

    let out = std::env::temp_dir().join("a11yreplay_full_test_run");
    let report = export_report(&recording, &spec, &out).unwrap();

    println!("Status:   {:?}", report.status);
    println!("Frames:   {}", report.frames.len());
    println!("Chapters:");
    for chapter in &report.chapters {
        println!(
            "  {:>6}..{:<6} [{:?}] {}",
            chapter.start_ms, chapter.end_ms, chapter.kind, chapter.title
        );
    }
    println!("Findings:");
    for finding in &report.findings {
        println!("  [{:?}/{:?}] {}", finding.kind, finding.verdict, finding.detail);
    }
    println!("\nExported to {}", out.display());
}
