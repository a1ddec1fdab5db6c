//! The plan/act/evaluate loop with a deterministic scripted backend: the
//! planner proposes steps, the action agent grounds them to element ids,
//! the evaluator advances or replans. Prints each agent exchange.
//!
//! ```bash
//! cargo run -p a11yreplay --example scripted_session
//! ```

use std::path::Path;
use std::sync::Arc;

use a11yreplay::agents::{Agents, ScriptedClient};
use a11yreplay::device_sim::{load_app_from_path, Session};
use a11yreplay::heuristics::HeuristicConfig;
use a11yreplay::runner::{parse_instructions, Runner};

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let app = load_app_from_path(&root.join("fixtures/apps/podcast_app.json")).unwrap();
    let raw = std::fs::read_to_string(root.join("fixtures/tests/vo_share_episode.txt")).unwrap();
    let client =
        ScriptedClient::from_path(&root.join("fixtures/scripts/vo_share_episode.json")).unwrap();

    let mut agents = Agents::new(Arc::new(client));
    let mut spec = parse_instructions(&raw, Some(&mut agents)).unwrap();
    if spec.app_name.is_empty() {
        spec.app_name = app.app_name.clone();
    }
    println!("Parsed: app={:?} feature={} goal={:?}\n", spec.app_name, spec.feature, spec.goal);

    let mut session = Session::new(0);
    session.add_app(app);
    let runner = Runner::new(&mut session, &mut agents, HeuristicConfig::default());
    let recording = runner.run_test(&spec, "podcast_app").unwrap();
    println!("Final status: {:?}", recording.final_status);
    println!("Frames captured: {}", recording.frames.len());

    println!("\nAgent exchanges ({} turns):", agents.exchanges().len());
    for exchange in agents.exchanges() {
        println!(
            "  #{:<2} {:<10} [{}] -> {}",
            exchange.turn_index,
            format!("{:?}", exchange.agent_role),
            exchange.template_id,
            exchange.response.chars().take(72).collect::<String>()
        );
    }
}
