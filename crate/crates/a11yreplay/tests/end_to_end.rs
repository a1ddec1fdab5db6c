//! Integration coverage for the batch CLI, the bundled fixture app, the
//! HTTP chat-completions backend, and the audit-log replay contract.

mod common;

use std::io::{Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};

use a11yreplay::agents::{
    llm_complete, FifoEntry, HttpClientConfig, HttpLlmClient, LlmError, ScriptedClient,
    API_KEY_ENV,
};
use a11yreplay::cli::{cmd_check_heuristics, cmd_run, run_cli, BackendConfig, CheckConfig, CheckMode, RunConfig};
use a11yreplay::device_sim::{load_app_from_path, AccessibilityFeatureState};
use a11yreplay::heuristics::HeuristicConfig;
use a11yreplay::imaging::{render_screen, write_png};
use a11yreplay::recording::FinalStatus;
use a11yreplay::report::load_report;
use a11yreplay::ui_model::{ElementKind, ScreenSnapshot, UIElement};

use common::{corpus_app, run_scenario, run_scenario_with_client, scenario_rules, ScriptedStep};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

#[test]
fn bundled_app_has_golden_screen_and_element_counts() {
    let app = load_app_from_path(&fixture("fixtures/apps/podcast_app.json")).unwrap();
    assert_eq!(app.screens.len(), 6);
    let counts: Vec<(&str, usize)> = app
        .screens
        .iter()
        .map(|(id, s)| (id.as_str(), s.elements.len()))
        .collect();
    assert_eq!(
        counts,
        vec![
            ("episode", 5),
            ("home", 6),
            ("library", 8),
            ("results", 7),
            ("search", 8),
            ("share", 5),
        ]
    );
}

#[test]
fn cmd_run_executes_the_bundled_suite() {
    let out = tempfile::tempdir().unwrap();
    let tests: Vec<PathBuf> = [
        "vo_share_episode",
        "vo_library_order",
        "dt_episode_title",
        "bs_library",
        "bt_home",
    ]
    .iter()
    .map(|t| fixture(&format!("fixtures/tests/{t}.txt")))
    .collect();
    let config = RunConfig {
        app_definition: fixture("fixtures/apps/podcast_app.json"),
        instructions: tests,
        backend: BackendConfig::Scripted(fixture("fixtures/scripts")),
        out_dir: out.path().to_owned(),
        heuristics: HeuristicConfig::default(),
        parallelism: 3,
        seed: 0,
    };
    assert_eq!(cmd_run(&config), 0);

    // Every test exported a report; the DT test flags the static text.
    for test in ["vo_share_episode", "vo_library_order", "dt_episode_title", "bs_library", "bt_home"] {
        let report = load_report(&out.path().join(test).join("report.json"))
            .unwrap_or_else(|e| panic!("{test}: {e}"));
        assert_eq!(report.status, FinalStatus::Success, "{test}");
        assert!(out.path().join(test).join("chapters.vtt").exists());
        assert!(out.path().join(test).join("frame_00000.png").exists());
    }
    let dt = load_report(&out.path().join("dt_episode_title/report.json")).unwrap();
    let fails = dt
        .findings
        .iter()
        .filter(|f| f.verdict == a11yreplay::heuristics::Verdict::Fail)
        .count();
    assert_eq!(fails, 4, "the static text fails each of the 4 size pairs");
}

#[test]
fn cmd_run_rejects_missing_app_definition() {
    let out = tempfile::tempdir().unwrap();
    let config = RunConfig {
        app_definition: PathBuf::from("/nonexistent/app.json"),
        instructions: vec![fixture("fixtures/tests/bt_home.txt")],
        backend: BackendConfig::Scripted(fixture("fixtures/scripts")),
        out_dir: out.path().to_owned(),
        heuristics: HeuristicConfig::default(),
        parallelism: 1,
        seed: 0,
    };
    assert_eq!(cmd_run(&config), 2);
}

#[test]
fn navigation_failure_still_exports_with_exit_zero() {
    // A script whose evaluator always fails exhausts the replan budget;
    // the run exports a fail-status report but is not an infra error.
    let out = tempfile::tempdir().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let script = serde_json::json!({
        "mode": "rules",
        "rules": [
            {"contains": ["Formulate a tentative plan"],
             "response": "{\"steps\": [{\"thought\": \"t\", \"evaluation\": \"e\", \"action\": \"Tap the Home tab\", \"status\": \"todo\"}]}"},
            {"contains": ["revise the plan", "Feedback:"],
             "response": "{\"steps\": [{\"thought\": \"t\", \"evaluation\": \"e\", \"action\": \"Tap the Home tab\", \"status\": \"todo\"}]}"},
            {"contains": ["Current step: Tap the Home tab"],
             "response": "{\"thought\": \"t\", \"relevant_ui_ids\": [4], \"action\": {\"type\": \"tap\", \"id\": 4}}"},
            {"contains": ["Evaluating step:"],
             "response": "{\"evaluation_criteria\": \"c\", \"result\": \"failure\", \"explanation\": \"nothing happened\"}"}
        ]
    });
    let script_path = dir.path().join("always_fail.json");
    std::fs::write(&script_path, script.to_string()).unwrap();
    let instructions_path = dir.path().join("always_fail.txt");
    std::fs::write(&instructions_path, "iOS: Podcasts: Bold Text: Home stay\n").unwrap();

    let config = RunConfig {
        app_definition: fixture("fixtures/apps/podcast_app.json"),
        instructions: vec![instructions_path],
        backend: BackendConfig::Scripted(script_path),
        out_dir: out.path().to_owned(),
        heuristics: HeuristicConfig::default(),
        parallelism: 1,
        seed: 0,
    };
    assert_eq!(cmd_run(&config), 0, "navigation failure still exits 0");
    let report = load_report(&out.path().join("always_fail/report.json")).unwrap();
    assert_eq!(report.status, FinalStatus::Fail);
}

#[test]
fn scripted_fail_budget_stops_after_five_replans() {
    use a11yreplay::agents::Rule;
    let plan = "{\"steps\": [{\"thought\": \"t\", \"evaluation\": \"e\", \"action\": \"Tap the Home tab\", \"status\": \"todo\"}]}";
    let rules = vec![
        Rule {
            contains: vec!["Formulate a tentative plan".into()],
            lacks: vec![],
            response: plan.into(),
        },
        Rule {
            contains: vec!["Feedback:".into()],
            lacks: vec![],
            response: plan.into(),
        },
        Rule {
            contains: vec!["Current step: Tap the Home tab".into()],
            lacks: vec![],
            response: "{\"thought\": \"t\", \"relevant_ui_ids\": [3], \"action\": {\"type\": \"tap\", \"id\": 3}}".into(),
        },
        Rule {
            contains: vec!["Evaluating step:".into()],
            lacks: vec![],
            response: "{\"evaluation_criteria\": \"c\", \"result\": \"failure\", \"explanation\": \"still wrong\"}".into(),
        },
    ];
    let (recording, exchanges, _) = run_scenario(
        corpus_app(0, false),
        "iOS: App 0: Bold Text on the home screen",
        rules,
    );
    assert_eq!(recording.final_status, FinalStatus::Fail);
    // Per pass: 1 plan + 6 action/eval rounds (budget 5 replans) + 5 replans.
    let plan_calls = exchanges
        .iter()
        .filter(|e| e.agent_role == a11yreplay::agents::AgentRole::Planner)
        .count();
    assert_eq!(plan_calls, 2 * (1 + 5), "5 replans per pass, two passes");
}

#[test]
fn check_heuristics_dynamic_type_pair() {
    let dir = tempfile::tempdir().unwrap();
    let base = ScreenSnapshot::from_elements(
        vec![
            UIElement::new(ElementKind::Text, Some("Grows"), false, [20, 20, 180, 48].into()),
            UIElement::new(ElementKind::Text, Some("Static"), false, [20, 70, 180, 98].into()),
        ],
        400,
        300,
        false,
        "app",
        "shot",
    );
    let grown = ScreenSnapshot::from_elements(
        vec![
            UIElement::new(ElementKind::Text, Some("Grows"), false, [20, 20, 200, 52].into()),
            UIElement::new(ElementKind::Text, Some("Static"), false, [20, 70, 180, 98].into()),
        ],
        400,
        300,
        false,
        "app",
        "shot",
    );
    std::fs::write(
        dir.path().join("before.json"),
        serde_json::to_string(&base).unwrap(),
    )
    .unwrap();
    std::fs::write(
        dir.path().join("after.json"),
        serde_json::to_string(&grown).unwrap(),
    )
    .unwrap();
    let blank = a11yreplay::imaging::PixelBuffer::new_filled(400, 300, 3, 255);
    write_png(&dir.path().join("before.png"), &blank).unwrap();
    write_png(&dir.path().join("after.png"), &blank).unwrap();

    let config = CheckConfig {
        mode: CheckMode::DynamicType,
        before_image: Some(dir.path().join("before.png")),
        before_manifest: Some(dir.path().join("before.json")),
        after_image: Some(dir.path().join("after.png")),
        after_manifest: Some(dir.path().join("after.json")),
        image: None,
        manifest: None,
        out_dir: dir.path().join("out"),
        heuristics: HeuristicConfig::default(),
    };
    assert_eq!(cmd_check_heuristics(&config), 0);
    let fragment: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/findings.json")).unwrap())
            .unwrap();
    let findings = fragment["findings"].as_array().unwrap();
    assert_eq!(findings.len(), 2);
    assert!(findings.iter().any(|f| f["verdict"] == "fail"));
    assert!(dir.path().join("out/after_annotated.png").exists());
}

#[test]
fn check_heuristics_button_shapes_single_image() {
    let dir = tempfile::tempdir().unwrap();
    // Render a compliant screen: bare clickable text with an underline.
    let doc = serde_json::json!({
        "format_version": 1,
        "app_id": "one",
        "app_name": "One",
        "width": 300,
        "height": 200,
        "initial_screen": "main",
        "screens": {
            "main": {
                "elements": [
                    {"name": "t", "kind": "Text", "text": "Open Settings", "clickable": true,
                     "underlined": true, "box": [20, 40, 220, 80]}
                ]
            }
        }
    });
    let app = a11yreplay::device_sim::load_app(&doc.to_string()).unwrap();
    let pixels = render_screen(
        &app.screens["main"],
        &AccessibilityFeatureState {
            button_shapes_on: true,
            ..Default::default()
        },
        300,
        200,
    );
    write_png(&dir.path().join("shot.png"), &pixels).unwrap();
    let snapshot = ScreenSnapshot::from_elements(
        vec![UIElement::new(
            ElementKind::Text,
            Some("Open Settings"),
            true,
            [20, 40, 220, 80].into(),
        )],
        300,
        200,
        false,
        "one",
        "main",
    );
    std::fs::write(
        dir.path().join("shot.json"),
        serde_json::to_string(&snapshot).unwrap(),
    )
    .unwrap();

    let config = CheckConfig {
        mode: CheckMode::ButtonShapes,
        before_image: None,
        before_manifest: None,
        after_image: None,
        after_manifest: None,
        image: Some(dir.path().join("shot.png")),
        manifest: Some(dir.path().join("shot.json")),
        out_dir: dir.path().join("out"),
        heuristics: HeuristicConfig::default(),
    };
    assert_eq!(cmd_check_heuristics(&config), 0);
    let fragment: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/findings.json")).unwrap())
            .unwrap();
    let findings = fragment["findings"].as_array().unwrap();
    assert_eq!(findings.len(), 1);
    assert_eq!(findings[0]["verdict"], "pass");
}

#[test]
fn check_heuristics_missing_manifest_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = CheckConfig {
        mode: CheckMode::ButtonShapes,
        before_image: None,
        before_manifest: None,
        after_image: None,
        after_manifest: None,
        image: Some(dir.path().join("missing.png")),
        manifest: None,
        out_dir: dir.path().join("out"),
        heuristics: HeuristicConfig::default(),
    };
    assert_eq!(cmd_check_heuristics(&config), 2);
}

#[test]
fn cli_arg_parsing_maps_flags() {
    assert_eq!(
        BackendConfig::parse("scripted:/tmp/x", "gpt-4").unwrap(),
        BackendConfig::Scripted(PathBuf::from("/tmp/x"))
    );
    assert_eq!(
        BackendConfig::parse("http:https://llm.example/v1", "m").unwrap(),
        BackendConfig::Http {
            url: "https://llm.example/v1".into(),
            model: "m".into()
        }
    );
    assert!(BackendConfig::parse("ftp:x", "m").is_err());
    // Missing required args is a usage error.
    assert_eq!(run_cli(["a11yreplay", "run"]), 2);
}

// ---------------------------------------------------------------------
// HTTP backend against a local one-shot server.
// ---------------------------------------------------------------------

fn read_http_request(stream: &mut std::net::TcpStream) -> String {
    let mut buf = Vec::new();
    let mut chunk = [0u8; 4096];
    loop {
        let n = stream.read(&mut chunk).unwrap_or(0);
        if n == 0 {
            break;
        }
        buf.extend_from_slice(&chunk[..n]);
        let text = String::from_utf8_lossy(&buf);
        if let Some(header_end) = text.find("\r\n\r\n") {
            let content_length = text
                .lines()
                .find_map(|l| l.to_lowercase().strip_prefix("content-length:").map(|v| v.trim().parse::<usize>().ok()))
                .flatten()
                .unwrap_or(0);
            if buf.len() >= header_end + 4 + content_length {
                break;
            }
        }
    }
    String::from_utf8_lossy(&buf).into_owned()
}

fn respond(stream: &mut std::net::TcpStream, status: &str, body: &str) {
    let response = format!(
        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
    let _ = stream.write_all(response.as_bytes());
}

#[test]
fn http_backend_retries_transient_errors_and_sends_auth() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = std::thread::spawn(move || {
        let mut seen_requests = Vec::new();
        // First request: transient 500. Second: a completion.
        for attempt in 0..2 {
            let (mut stream, _) = listener.accept().unwrap();
            let request = read_http_request(&mut stream);
            seen_requests.push(request);
            if attempt == 0 {
                respond(&mut stream, "500 Internal Server Error", "{\"error\": \"boom\"}");
            } else {
                respond(
                    &mut stream,
                    "200 OK",
                    "{\"choices\": [{\"message\": {\"role\": \"assistant\", \"content\": \"pong\"}}]}",
                );
            }
        }
        seen_requests
    });

    std::env::set_var(API_KEY_ENV, "test-token-123");
    let mut config = HttpClientConfig::new(format!("http://{addr}"));
    config.model = "test-model".to_owned();
    let client = HttpLlmClient::new(config).unwrap();
    let response = llm_complete(&client, "ping").unwrap();
    assert_eq!(response, "pong");
    std::env::remove_var(API_KEY_ENV);

    let requests = server.join().unwrap();
    assert_eq!(requests.len(), 2, "500 then retry");
    for request in &requests {
        assert!(request.starts_with("POST /v1/chat/completions"), "{request}");
        assert!(
            request.to_lowercase().contains("authorization: bearer test-token-123"),
            "auth header missing"
        );
        assert!(request.contains("\"model\":\"test-model\""));
        assert!(request.contains("\"temperature\":0.0"));
        assert!(request.contains("ping"));
    }
}

#[test]
fn http_backend_gives_up_after_retry_budget() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = std::thread::spawn(move || {
        // 1 initial + 3 retries, all failing.
        for _ in 0..4 {
            let (mut stream, _) = listener.accept().unwrap();
            let _ = read_http_request(&mut stream);
            respond(&mut stream, "503 Service Unavailable", "{}");
        }
    });
    let client = HttpLlmClient::new(HttpClientConfig::new(format!("http://{addr}"))).unwrap();
    let err = llm_complete(&client, "ping").unwrap_err();
    assert!(matches!(err, LlmError::Http { status: 503, .. }));
    server.join().unwrap();
}

// ---------------------------------------------------------------------
// Feature replay sequences.
// ---------------------------------------------------------------------

fn count_actions(
    recording: &a11yreplay::recording::SessionRecording,
    matcher: impl Fn(&a11yreplay::device_sim::DeviceAction) -> bool,
) -> usize {
    recording
        .events
        .iter()
        .filter(|e| match &e.event {
            a11yreplay::recording::RecordingEvent::Action { action } => matcher(action),
            _ => false,
        })
        .count()
}

#[test]
fn dynamic_type_sequence_runs_five_cycles_and_four_pairwise_checks() {
    use a11yreplay::device_sim::DeviceAction;
    let steps = vec![ScriptedStep::tap("Open the featured digest", 2, "task_complete")];
    let (recording, _, _) = run_scenario(
        corpus_app(4, false),
        "iOS: App 4: Dynamic Type: Featured digest details",
        scenario_rules("Featured digest details", &steps),
    );
    assert_eq!(recording.final_status, FinalStatus::Success);
    assert_eq!(count_actions(&recording, |a| matches!(a, DeviceAction::Launch { .. })), 5);
    assert_eq!(count_actions(&recording, |a| matches!(a, DeviceAction::Kill { .. })), 5);

    // Both detail texts grow at every increment: 2 findings x 4 pairs,
    // all passes.
    let findings = recording.findings();
    assert_eq!(findings.len(), 8);
    assert!(findings
        .iter()
        .all(|f| f.verdict == a11yreplay::heuristics::Verdict::Pass));
}

#[test]
fn voiceover_test_replays_with_the_feature_on_then_off() {
    use a11yreplay::device_sim::DeviceAction;
    let steps = vec![ScriptedStep::tap("Tap the Settings tab", 5, "task_complete")];
    let (recording, _, _) = run_scenario(
        corpus_app(1, false),
        "iOS: App 1: VoiceOver: Verify navigation order in Settings",
        scenario_rules("navigation order in Settings", &steps),
    );
    assert_eq!(recording.final_status, FinalStatus::Success);
    assert_eq!(count_actions(&recording, |a| matches!(a, DeviceAction::Launch { .. })), 2);
    let feature_changes: Vec<String> = recording
        .events
        .iter()
        .filter_map(|e| match &e.event {
            a11yreplay::recording::RecordingEvent::Action {
                action: DeviceAction::SetFeature { summary },
            } => Some(summary.clone()),
            _ => None,
        })
        .collect();
    assert_eq!(feature_changes, vec!["voiceover=true", "voiceover=false"]);

    // The order-verification instruction triggers a read_all sweep: the
    // settings elements get announced via right swipes.
    let vo_swipes = count_actions(
        &recording,
        |a| matches!(a, DeviceAction::VoSwipe { direction, .. } if *direction == a11yreplay::ui_model::Direction::Right),
    );
    assert!(vo_swipes >= 5, "read_all must sweep the settings screen, saw {vo_swipes}");
}

// ---------------------------------------------------------------------
// Audit-log replay.
// ---------------------------------------------------------------------

/// Replaying a session's exchange log through the strict FIFO backend
/// (exact prompts asserted) reproduces the recording and the log itself.
#[test]
fn audit_log_replays_the_session_exactly() {
    let steps = vec![
        ScriptedStep::tap("Tap the Browse tab", 4, "success"),
        ScriptedStep::tap("Open the Weekly Digest item", 3, "task_complete"),
    ];
    let title = "iOS: App 0: VoiceOver: Open the Weekly Digest story";
    let rules = scenario_rules("Weekly Digest story", &steps);
    let (recording_a, exchanges_a, _) = run_scenario(corpus_app(0, false), title, rules);

    let fifo: Vec<FifoEntry> = exchanges_a
        .iter()
        .map(|e| FifoEntry {
            expect_exact: Some(e.prompt.clone()),
            expect_contains: vec![],
            response: e.response.clone(),
        })
        .collect();
    let (recording_b, exchanges_b, _) =
        run_scenario_with_client(corpus_app(0, false), title, ScriptedClient::fifo(fifo));

    assert_eq!(recording_a, recording_b, "replay must reproduce the session");
    assert_eq!(exchanges_a, exchanges_b);
}
