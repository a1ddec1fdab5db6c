//! Shared fixture corpus for the integration and acceptance suites:
//! synthetic app generators, scripted-agent scenario builders, and labeled
//! bug-injection sets for the heuristics.

#![allow(dead_code)]

use std::sync::Arc;

use serde_json::json;

use a11yreplay::agents::{Agents, LlmExchange, Rule, ScriptedClient};
use a11yreplay::device_sim::{load_app, AppModel, Session};
use a11yreplay::heuristics::HeuristicConfig;
use a11yreplay::recording::{RecordingEvent, SessionRecording};
use a11yreplay::runner::{parse_instructions, Runner, TestSpec};

/// One scripted plan step plus the canned action and evaluation for it.
#[derive(Clone)]
pub struct ScriptedStep {
    pub action_text: String,
    pub action: serde_json::Value,
    /// "success" or "task_complete".
    pub eval_result: &'static str,
}

impl ScriptedStep {
    pub fn tap(action_text: &str, id: u32, eval_result: &'static str) -> Self {
        ScriptedStep {
            action_text: action_text.to_owned(),
            action: json!({"type": "tap", "id": id}),
            eval_result,
        }
    }

    pub fn type_text(action_text: &str, id: u32, text: &str, eval_result: &'static str) -> Self {
        ScriptedStep {
            action_text: action_text.to_owned(),
            action: json!({"type": "text_entry", "id": id, "text": text}),
            eval_result,
        }
    }

    pub fn swipe(action_text: &str, direction: &str, eval_result: &'static str) -> Self {
        ScriptedStep {
            action_text: action_text.to_owned(),
            action: json!({"type": "swipe", "direction": direction, "x": 200, "y": 400}),
            eval_result,
        }
    }
}

pub fn plan_response(steps: &[ScriptedStep]) -> String {
    let wire: Vec<serde_json::Value> = steps
        .iter()
        .map(|s| {
            json!({
                "thought": format!("step toward the goal: {}", s.action_text),
                "evaluation": format!("check that \"{}\" worked", s.action_text),
                "action": s.action_text,
                "status": "todo"
            })
        })
        .collect();
    json!({ "steps": wire }).to_string()
}

/// The planner rule keys on "Formulate a tentative plan", which only the
/// initial planning template contains, so it can never hijack action,
/// evaluation, or replanning prompts.
pub fn planner_rule(goal_fragment: &str, steps: &[ScriptedStep]) -> Rule {
    Rule {
        contains: vec![
            "Formulate a tentative plan".to_owned(),
            goal_fragment.to_owned(),
        ],
        lacks: vec!["Feedback:".to_owned()],
        response: plan_response(steps),
    }
}

pub fn action_rule(step: &ScriptedStep) -> Rule {
    Rule {
        contains: vec![format!("Current step: {}", step.action_text)],
        lacks: vec![],
        response: json!({
            "thought": format!("executing: {}", step.action_text),
            "relevant_ui_ids": [],
            "action": step.action,
        })
        .to_string(),
    }
}

pub fn eval_rule(step: &ScriptedStep) -> Rule {
    Rule {
        contains: vec![format!("Evaluating step: {}", step.action_text)],
        lacks: vec![],
        response: json!({
            "evaluation_criteria": format!("did \"{}\" work", step.action_text),
            "result": step.eval_result,
            "explanation": format!("\"{}\" had the expected effect", step.action_text),
        })
        .to_string(),
    }
}

/// The straight-line rule set for a scenario: one plan, one action and one
/// evaluation rule per step.
pub fn scenario_rules(goal_fragment: &str, steps: &[ScriptedStep]) -> Vec<Rule> {
    let mut rules = vec![planner_rule(goal_fragment, steps)];
    rules.extend(steps.iter().map(action_rule));
    rules.extend(steps.iter().map(eval_rule));
    rules
}

/// A small tabbed app: home (featured button + tab bar), a scrollable
/// browse list, a detail screen with Dynamic Type overrides, a settings
/// screen, and a one-shot permission dialog wired to the Browse tab when
/// `with_dialog` is set.
pub fn corpus_app(index: usize, with_dialog: bool) -> AppModel {
    let app_id = format!("app{index}");
    let app_name = format!("App {index}");
    let browse_transition = if with_dialog {
        json!({"element": "tab_browse", "action": "tap", "to": "browse", "interrupt_once": "dialog"})
    } else {
        json!({"element": "tab_browse", "action": "tap", "to": "browse"})
    };
    let mut screens = json!({
        "home": {
            "elements": [
                {"name": "title", "kind": "Text", "text": app_name, "box": [20, 40, 200, 80]},
                {"name": "featured", "kind": "Button", "text": "Weekly Digest", "box": [20, 210, 300, 260]},
                {"name": "tab_home", "kind": "Tab", "text": "Home", "box": [10, 560, 130, 610], "page": "all"},
                {"name": "tab_browse", "kind": "Tab", "text": "Browse", "box": [140, 560, 260, 610], "page": "all"},
                {"name": "tab_settings", "kind": "Tab", "text": "Settings", "box": [270, 560, 390, 610], "page": "all"}
            ],
            "transitions": [
                {"element": "featured", "action": "tap", "to": "detail"},
                browse_transition,
                {"element": "tab_settings", "action": "tap", "to": "settings"}
            ]
        },
        "browse": {
            "scroll_extent": 1,
            "elements": [
                {"name": "back", "kind": "Icon", "box": [10, 30, 50, 70], "page": "all"},
                {"name": "heading", "kind": "Text", "text": "Browse", "box": [70, 35, 200, 75], "page": "all"},
                {"name": "row_digest", "kind": "Text", "text": "Weekly Digest", "clickable": true, "box": [20, 100, 380, 150], "page": 0},
                {"name": "row_recap", "kind": "Text", "text": "Monthly Recap", "clickable": true, "box": [20, 160, 380, 210], "page": 0},
                {"name": "row_archive", "kind": "Text", "text": "Archive Extras", "clickable": true, "box": [20, 100, 380, 150], "page": 1},
                {"name": "tab_home", "kind": "Tab", "text": "Home", "box": [10, 560, 130, 610], "page": "all"},
                {"name": "tab_browse", "kind": "Tab", "text": "Browse", "box": [140, 560, 260, 610], "page": "all"},
                {"name": "tab_settings", "kind": "Tab", "text": "Settings", "box": [270, 560, 390, 610], "page": "all"}
            ],
            "transitions": [
                {"element": "back", "action": "tap", "to": "home"},
                {"element": "row_digest", "action": "tap", "to": "detail"},
                {"element": "row_recap", "action": "tap", "to": "detail"},
                {"element": "row_archive", "action": "tap", "to": "detail"},
                {"element": "tab_home", "action": "tap", "to": "home"},
                {"element": "tab_settings", "action": "tap", "to": "settings"}
            ]
        },
        "detail": {
            "elements": [
                {"name": "back", "kind": "Icon", "box": [10, 30, 50, 70]},
                {"name": "headline", "kind": "Text", "text": "Digest Details", "box": [20, 100, 380, 150],
                 "boxes_by_size": {
                     "XL": [20, 100, 380, 155],
                     "XXL": [18, 98, 382, 158],
                     "XXXL": [16, 96, 384, 162],
                     "AX1": [12, 94, 388, 168]
                 }},
                {"name": "body", "kind": "Text", "text": "All the stories", "box": [20, 200, 380, 240],
                 "boxes_by_size": {
                     "XL": [20, 200, 380, 244],
                     "XXL": [18, 198, 382, 247],
                     "XXXL": [16, 196, 384, 251],
                     "AX1": [12, 194, 388, 256]
                 }},
                {"name": "read_more", "kind": "Button", "text": "Read More", "box": [20, 300, 180, 350]}
            ],
            "transitions": [
                {"element": "back", "action": "tap", "to": "browse"}
            ]
        },
        "settings": {
            "elements": [
                {"name": "heading", "kind": "Text", "text": "Settings", "box": [20, 40, 200, 80]},
                {"name": "notif", "kind": "Text", "text": "Notifications", "box": [20, 120, 250, 150]},
                {"name": "alerts", "kind": "Toggle", "text": "Alerts", "box": [280, 120, 360, 150]},
                {"name": "tab_home", "kind": "Tab", "text": "Home", "box": [10, 560, 130, 610], "page": "all"},
                {"name": "tab_browse", "kind": "Tab", "text": "Browse", "box": [140, 560, 260, 610], "page": "all"},
                {"name": "tab_settings", "kind": "Tab", "text": "Settings", "box": [270, 560, 390, 610], "page": "all"}
            ],
            "transitions": [
                {"element": "tab_home", "action": "tap", "to": "home"},
                {"element": "tab_browse", "action": "tap", "to": "browse"}
            ]
        }
    });
    if with_dialog {
        screens["dialog"] = json!({
            "elements": [
                {"name": "question", "kind": "Text", "text": "Allow notifications?", "box": [40, 300, 360, 350]},
                {"name": "allow", "kind": "Button", "text": "Allow", "box": [40, 380, 200, 430]},
                {"name": "deny", "kind": "Button", "text": "Deny", "box": [220, 380, 360, 430]}
            ],
            "transitions": [
                {"element": "allow", "action": "tap", "to": "home"},
                {"element": "deny", "action": "tap", "to": "home"}
            ]
        });
    }
    let doc = json!({
        "format_version": 1,
        "app_id": app_id,
        "app_name": app_name,
        "width": 400,
        "height": 800,
        "initial_screen": "home",
        "screens": screens
    });
    load_app(&doc.to_string()).expect("corpus app is valid")
}

/// Runs one scenario end to end with a scripted rule table.
pub fn run_scenario(
    app: AppModel,
    instructions: &str,
    rules: Vec<Rule>,
) -> (SessionRecording, Vec<LlmExchange>, TestSpec) {
    run_scenario_with_client(app, instructions, ScriptedClient::rules(rules))
}

/// Runs one scenario end to end with an arbitrary scripted client.
pub fn run_scenario_with_client(
    app: AppModel,
    instructions: &str,
    client: ScriptedClient,
) -> (SessionRecording, Vec<LlmExchange>, TestSpec) {
    let mut agents = Agents::new(Arc::new(client));
    let mut spec = parse_instructions(instructions, Some(&mut agents))
        .expect("instructions parse");
    if spec.app_name.is_empty() {
        spec.app_name = app.app_name.clone();
    }
    let app_id = app.app_id.clone();
    let mut session = Session::new(0);
    session.add_app(app);
    let runner = Runner::new(&mut session, &mut agents, HeuristicConfig::default());
    let recording = runner.run_test(&spec, &app_id).expect("run completes");
    (recording, agents.exchanges().to_vec(), spec)
}

/// Screen shown in the last screenshot before each app kill — the "final
/// screen" of every navigation pass.
pub fn final_screens(recording: &SessionRecording) -> Vec<String> {
    let mut finals = Vec::new();
    let mut last_shot: Option<String> = None;
    for event in &recording.events {
        match &event.event {
            RecordingEvent::Screenshot { screen_id, .. } => {
                last_shot = Some(screen_id.clone());
            }
            RecordingEvent::Action { action } => {
                if matches!(action, a11yreplay::device_sim::DeviceAction::Kill { .. }) {
                    if let Some(s) = last_shot.take() {
                        finals.push(s);
                    }
                }
            }
            _ => {}
        }
    }
    finals
}
