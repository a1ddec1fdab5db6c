//! Versioned prompt templates for the three agents. Template ids are
//! logged with every exchange so recorded sessions can be audited against
//! the wording that produced them.
//!
//! Placeholders use `{name}` and are substituted verbatim; screen text is
//! the serialized element list from [`crate::ui_model::serialize_elements`].

pub const PLANNER_TEMPLATE_ID: &str = "planner-v1";
pub const REPLAN_TEMPLATE_ID: &str = "replan-v1";
pub const ACTION_TEMPLATE_ID: &str = "action-v1";
pub const EVALUATION_TEMPLATE_ID: &str = "evaluation-v1";
pub const EXTRACT_TEMPLATE_ID: &str = "extract-v1";

pub const PLANNER_TEMPLATE: &str = r#"You are the planner for an automated accessibility test runner driving a mobile app.

Goal: {goal}
App under test: {app_name}

The current screen contains these UI elements:
{screen}

Formulate a tentative plan that navigates the app to accomplish the goal, one UI interaction per step (tap, swipe, enter text). Keep these rules in mind:
- If an unexpected state is encountered (a dialog, an error, the wrong screen), plan to traverse backward through the app to recover before continuing.
- It is fine to accept an imperfect plan when information is missing; the plan can be revised after each step.
- If the test needs a search but does not specify a query, provide reasonable search queries based on the app name and the current context of the screen.

Respond with a single JSON object of this exact shape:
{"steps": [{"thought": "how this step helps achieve the goal", "evaluation": "criteria that tell whether the step succeeded", "action": "a brief, specific instruction, e.g. Tap the Search tab", "status": "todo"}]}
Every step's status must be "todo"."#;

pub const REPLAN_TEMPLATE: &str = r#"You are the planner for an automated accessibility test runner driving a mobile app. A step of the current plan could not be completed, so revise the plan from that step onward.

Goal: {goal}
App under test: {app_name}

Previous plan:
{plan}

Step {step_index} ("{step_action}") did not complete.
Feedback: {feedback}

The current screen contains these UI elements:
{screen}

Keep these rules in mind:
- If an unexpected state is encountered, plan to traverse backward through the app to recover before continuing.
- It is fine to accept an imperfect plan; it can be revised again later.
- If the test needs a search but does not specify a query, provide reasonable search queries based on the app name and the current context of the screen.

Respond with a single JSON object containing only the revised steps from the failed step onward:
{"steps": [{"thought": "...", "evaluation": "...", "action": "...", "status": "todo"}]}"#;

pub const ACTION_TEMPLATE: &str = r#"You are the action agent for an automated accessibility test runner. Map the current plan step onto exactly one concrete action for this screen.

Current step: {step_action}
Step intent: {step_thought}

The current screen contains these UI elements:
{screen}

Available actions:
- tap: tap a UI element given its id. Tapping an element inferred to be non-clickable is acceptable if it is the only reasonable option on the screen.
- swipe: swipe in a cardinal direction (up/down/left/right) from an (x, y) coordinate. Swiping can be used to scroll to view more options on a screen.
- text_entry: tap a text field given its id, then type a string. If the text to enter is not provided, come up with appropriate text.
- stop: stop this step and hand feedback to the planner. The feedback must specify what information an updated plan needs.

Respond with a single JSON object of this exact shape:
{"thought": "...", "relevant_ui_ids": [1, 2], "action": {"type": "tap", "id": 1}}
where "action" is one of:
{"type": "tap", "id": <id>}
{"type": "swipe", "direction": "up"|"down"|"left"|"right", "x": <x>, "y": <y>}
{"type": "text_entry", "id": <id>, "text": "..."}
{"type": "stop", "feedback": "..."}"#;

pub const EVALUATION_TEMPLATE: &str = r#"You are the evaluation agent for an automated accessibility test runner. Judge whether the action just executed moved the test forward.

Goal: {goal}

Current plan:
{plan}

Evaluating step: {step_action}
Executed action:
{action}

Screen before the action:
{before}

Screen after the action:
{after}

Hints:
- If the UI elements significantly change, the action likely succeeded.
- If the state of the current screen changes but a new view is not opened, err on the side of the action succeeding.
- If the last action was a scroll or swipe but the screen did not change, the action likely failed.
- If the target element is not visible, more scrolling may be required.
- If the last action was to click on a text field, the evaluation should be whether a keyboard is visible.

Respond with a single JSON object of this exact shape:
{"evaluation_criteria": "...", "result": "success"|"failure"|"task_complete", "explanation": "..."}
Use "task_complete" only when the overall goal has been achieved; on failure the explanation is fed back to the planner."#;

pub const EXTRACT_TEMPLATE: &str = r#"You are helping an automated accessibility test runner parse a manual test instruction.

Instruction text:
{raw}

Identify the app under test, the accessibility feature being tested (one of VoiceOver, DynamicType, BoldText, ButtonShapes), and the navigation goal.

Respond with a single JSON object of this exact shape:
{"app_name": "...", "feature": "VoiceOver", "goal": "..."}"#;

/// Substitutes `{name}` placeholders. Unknown placeholders are left alone.
pub fn fill(template: &str, substitutions: &[(&str, &str)]) -> String {
    let mut out = template.to_owned();
    for (name, value) in substitutions {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    out
}
