//! The three LLM-backed agents (planner, action, evaluation), their typed
//! exchange records, and the per-session audit log.
//!
//! Agents are stateless prompt-to-response mappings; [`Agents`] holds the
//! client handle, the reprompt policy for unparseable responses, and the
//! exchange log that makes a session auditable and replayable.

mod client;
mod parse;
pub mod prompts;

pub use client::{
    llm_complete, FifoEntry, HttpClientConfig, HttpLlmClient, LlmClient, LlmError, Rule,
    ScriptFile, ScriptedClient, API_KEY_ENV, MAX_RETRIES,
};
pub use parse::{extract_structured_block, ParseError};

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ui_model::{screen_text_ids, Direction};

/// Reprompt attempts after a response fails to parse.
pub const REPROMPT_LIMIT: usize = 2;
/// Replans allowed per navigation run before giving up.
pub const MAX_REPLANS: usize = 5;
/// Total actions allowed per navigation run.
pub const MAX_ACTIONS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepStatus {
    Todo,
    Success,
}

/// One step of a tentative plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    pub thought: String,
    pub evaluation: String,
    pub action: String,
    pub status: StepStatus,
}

/// A tentative plan; `revision` counts replans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub goal: String,
    pub revision: u32,
    pub steps: Vec<PlanStep>,
}

/// The single concrete action chosen for a step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AgentAction {
    Tap { id: u32 },
    Swipe { direction: Direction, x: i32, y: i32 },
    TextEntry { id: u32, text: String },
    Stop { feedback: String },
}

impl AgentAction {
    pub fn label(&self) -> String {
        match self {
            AgentAction::Tap { id } => format!("Tap element {id}"),
            AgentAction::Swipe { direction, x, y } => format!("Swipe {direction} from ({x}, {y})"),
            AgentAction::TextEntry { id, text } => format!("Type \"{text}\" into element {id}"),
            AgentAction::Stop { feedback } => format!("Stop: {feedback}"),
        }
    }
}

/// Action-agent output: chain-of-thought plus one action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionCommand {
    pub thought: String,
    pub relevant_ui_ids: Vec<u32>,
    pub action: AgentAction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalOutcome {
    Success,
    Failure,
    TaskComplete,
}

/// Evaluation-agent output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub evaluation_criteria: String,
    pub result: EvalOutcome,
    pub explanation: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentRole {
    Planner,
    Action,
    Evaluation,
}

/// One audited prompt/response pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmExchange {
    pub turn_index: usize,
    pub agent_role: AgentRole,
    pub template_id: String,
    pub prompt: String,
    pub response: String,
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("llm call failed: {0}")]
    Client(#[from] LlmError),
    #[error("planner response unusable after {attempts} attempts: {detail}")]
    Planning { attempts: usize, detail: String },
    #[error("action response unusable after {attempts} attempts: {detail}")]
    Action { attempts: usize, detail: String },
    #[error("instruction extraction failed: {0}")]
    Extraction(String),
}

#[derive(Deserialize)]
struct PlanWire {
    steps: Vec<StepWire>,
}

#[derive(Deserialize)]
struct StepWire {
    thought: String,
    evaluation: String,
    action: String,
    #[serde(default)]
    #[allow(dead_code)]
    status: Option<String>,
}

#[derive(Deserialize)]
struct ActionWire {
    thought: String,
    #[serde(default)]
    relevant_ui_ids: Vec<u32>,
    action: AgentAction,
}

#[derive(Deserialize)]
struct EvalWire {
    evaluation_criteria: String,
    result: EvalOutcome,
    #[serde(default)]
    explanation: String,
}

#[derive(Deserialize)]
struct ExtractWire {
    #[serde(default)]
    app_name: String,
    feature: String,
    #[serde(default)]
    goal: String,
}

/// Extracted fields from the instruction-parsing fallback call.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedInstruction {
    pub app_name: String,
    pub feature: String,
    pub goal: String,
}

/// Session-scoped agent frontend: issues prompts, parses and validates
/// responses, reprompts on parse failures, and logs every exchange.
pub struct Agents {
    client: Arc<dyn LlmClient>,
    exchanges: Vec<LlmExchange>,
    app_name: String,
}

impl Agents {
    pub fn new(client: Arc<dyn LlmClient>) -> Self {
        Agents {
            client,
            exchanges: Vec::new(),
            app_name: String::new(),
        }
    }

    /// Full audit log, in turn order.
    pub fn exchanges(&self) -> &[LlmExchange] {
        &self.exchanges
    }

    pub fn client(&self) -> &Arc<dyn LlmClient> {
        &self.client
    }

    fn complete_logged(
        &mut self,
        role: AgentRole,
        template_id: &str,
        prompt: &str,
    ) -> Result<String, AgentError> {
        let response = llm_complete(self.client.as_ref(), prompt)?;
        self.exchanges.push(LlmExchange {
            turn_index: self.exchanges.len(),
            agent_role: role,
            template_id: template_id.to_owned(),
            prompt: prompt.to_owned(),
            response: response.clone(),
        });
        Ok(response)
    }

    /// Prompt, parse, and reprompt up to [`REPROMPT_LIMIT`] times when the
    /// response cannot be parsed/validated. Returns the last error detail
    /// on exhaustion.
    fn complete_parsed<T>(
        &mut self,
        role: AgentRole,
        template_id: &str,
        prompt: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<T, (usize, String)> {
        let mut attempts = 0;
        let mut current_prompt = prompt.to_owned();
        loop {
            attempts += 1;
            let response = self
                .complete_logged(role, template_id, &current_prompt)
                .map_err(|e| (attempts, e.to_string()))?;
            match parse(&response) {
                Ok(value) => return Ok(value),
                Err(detail) if attempts <= REPROMPT_LIMIT => {
                    current_prompt = format!(
                        "{prompt}\n\nYour previous response could not be used ({detail}). \
                         Respond with only the JSON object requested."
                    );
                }
                Err(detail) => return Err((attempts, detail)),
            }
        }
    }

    fn parse_plan(response: &str) -> Result<Vec<PlanStep>, String> {
        let wire: PlanWire = parse::parse_response(response).map_err(|e| e.to_string())?;
        if wire.steps.is_empty() {
            return Err("plan has no steps".to_owned());
        }
        Ok(wire
            .steps
            .into_iter()
            .map(|s| PlanStep {
                thought: s.thought,
                evaluation: s.evaluation,
                action: s.action,
                status: StepStatus::Todo,
            })
            .collect())
    }

    /// Asks the planner for a tentative plan; all steps start as todo.
    pub fn propose_plan(
        &mut self,
        goal: &str,
        app_name: &str,
        screen_text: &str,
    ) -> Result<Plan, AgentError> {
        self.app_name = app_name.to_owned();
        let prompt = prompts::fill(
            prompts::PLANNER_TEMPLATE,
            &[("goal", goal), ("app_name", app_name), ("screen", screen_text)],
        );
        let steps = self
            .complete_parsed(
                AgentRole::Planner,
                prompts::PLANNER_TEMPLATE_ID,
                &prompt,
                Self::parse_plan,
            )
            .map_err(|(attempts, detail)| AgentError::Planning { attempts, detail })?;
        Ok(Plan {
            goal: goal.to_owned(),
            revision: 0,
            steps,
        })
    }

    /// Replans from `current_step_index` onward. Steps before the index are
    /// preserved byte for byte; the revision counter increments.
    pub fn replan(
        &mut self,
        previous: &Plan,
        current_step_index: usize,
        feedback: &str,
        screen_text: &str,
    ) -> Result<Plan, AgentError> {
        assert!(
            current_step_index < previous.steps.len(),
            "replan index {current_step_index} out of range"
        );
        let plan_json =
            serde_json::to_string_pretty(previous).expect("plan serializes");
        let step_action = previous.steps[current_step_index].action.clone();
        let app_name = self.app_name.clone();
        let prompt = prompts::fill(
            prompts::REPLAN_TEMPLATE,
            &[
                ("goal", previous.goal.as_str()),
                ("app_name", app_name.as_str()),
                ("plan", plan_json.as_str()),
                ("step_index", &current_step_index.to_string()),
                ("step_action", step_action.as_str()),
                ("feedback", feedback),
                ("screen", screen_text),
            ],
        );
        let new_tail = self
            .complete_parsed(
                AgentRole::Planner,
                prompts::REPLAN_TEMPLATE_ID,
                &prompt,
                Self::parse_plan,
            )
            .map_err(|(attempts, detail)| AgentError::Planning { attempts, detail })?;

        let mut steps: Vec<PlanStep> = previous.steps[..current_step_index].to_vec();
        steps.extend(new_tail);
        Ok(Plan {
            goal: previous.goal.clone(),
            revision: previous.revision + 1,
            steps,
        })
    }

    /// Grounds one plan step into a concrete action. A tap or text entry
    /// referencing an id that is not on the screen comes back as a `Stop`
    /// carrying feedback for the replanner.
    pub fn next_action(
        &mut self,
        step: &PlanStep,
        screen_text: &str,
    ) -> Result<ActionCommand, AgentError> {
        debug_assert_eq!(step.status, StepStatus::Todo);
        let prompt = prompts::fill(
            prompts::ACTION_TEMPLATE,
            &[
                ("step_action", step.action.as_str()),
                ("step_thought", step.thought.as_str()),
                ("screen", screen_text),
            ],
        );
        let parse = |response: &str| -> Result<ActionCommand, String> {
            let wire: ActionWire = parse::parse_response(response).map_err(|e| e.to_string())?;
            if let AgentAction::Stop { feedback } = &wire.action {
                if feedback.trim().is_empty() {
                    return Err("stop action needs non-empty feedback".to_owned());
                }
            }
            Ok(ActionCommand {
                thought: wire.thought,
                relevant_ui_ids: wire.relevant_ui_ids,
                action: wire.action,
            })
        };
        let command = self
            .complete_parsed(AgentRole::Action, prompts::ACTION_TEMPLATE_ID, &prompt, parse)
            .map_err(|(attempts, detail)| AgentError::Action { attempts, detail })?;

        // Validate referenced ids against the screen the agent saw.
        let ids = screen_text_ids(screen_text);
        let referenced = match &command.action {
            AgentAction::Tap { id } | AgentAction::TextEntry { id, .. } => Some(*id),
            _ => None,
        };
        if let Some(id) = referenced {
            if !ids.contains(&id) {
                return Ok(ActionCommand {
                    thought: command.thought,
                    relevant_ui_ids: command.relevant_ui_ids,
                    action: AgentAction::Stop {
                        feedback: format!(
                            "element id {id} is not on the current screen; the plan may need \
                             scrolling or a different element"
                        ),
                    },
                });
            }
        }
        Ok(command)
    }

    /// Judges an executed action. An unparseable evaluation degrades to a
    /// failure result so the planner can recover.
    pub fn evaluate_action(
        &mut self,
        goal: &str,
        plan: &Plan,
        command: &ActionCommand,
        before_text: &str,
        after_text: &str,
    ) -> Result<EvaluationResult, AgentError> {
        let plan_json = serde_json::to_string_pretty(plan).expect("plan serializes");
        let action_json =
            serde_json::to_string_pretty(command).expect("command serializes");
        let step_action = plan
            .steps
            .iter()
            .find(|s| s.status == StepStatus::Todo)
            .map(|s| s.action.clone())
            .unwrap_or_default();
        let prompt = prompts::fill(
            prompts::EVALUATION_TEMPLATE,
            &[
                ("goal", goal),
                ("plan", plan_json.as_str()),
                ("step_action", step_action.as_str()),
                ("action", action_json.as_str()),
                ("before", before_text),
                ("after", after_text),
            ],
        );
        let parse = |response: &str| -> Result<EvaluationResult, String> {
            let wire: EvalWire = parse::parse_response(response).map_err(|e| e.to_string())?;
            let explanation = if wire.explanation.trim().is_empty() {
                match wire.result {
                    EvalOutcome::Failure => "no explanation provided".to_owned(),
                    _ => wire.explanation,
                }
            } else {
                wire.explanation
            };
            Ok(EvaluationResult {
                evaluation_criteria: wire.evaluation_criteria,
                result: wire.result,
                explanation,
            })
        };
        match self.complete_parsed(
            AgentRole::Evaluation,
            prompts::EVALUATION_TEMPLATE_ID,
            &prompt,
            parse,
        ) {
            Ok(result) => Ok(result),
            Err((_, _)) => Ok(EvaluationResult {
                evaluation_criteria: String::new(),
                result: EvalOutcome::Failure,
                explanation: "evaluator unparseable".to_owned(),
            }),
        }
    }

    /// One-shot fallback used when rule-based instruction parsing fails.
    pub fn extract_instruction_fields(
        &mut self,
        raw: &str,
    ) -> Result<ExtractedInstruction, AgentError> {
        let prompt = prompts::fill(prompts::EXTRACT_TEMPLATE, &[("raw", raw)]);
        let parse = |response: &str| -> Result<ExtractedInstruction, String> {
            let wire: ExtractWire = parse::parse_response(response).map_err(|e| e.to_string())?;
            Ok(ExtractedInstruction {
                app_name: wire.app_name,
                feature: wire.feature,
                goal: wire.goal,
            })
        };
        self.complete_parsed(
            AgentRole::Planner,
            prompts::EXTRACT_TEMPLATE_ID,
            &prompt,
            parse,
        )
        .map_err(|(_, detail)| AgentError::Extraction(detail))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan_response(actions: &[&str]) -> String {
        let steps: Vec<serde_json::Value> = actions
            .iter()
            .map(|a| {
                serde_json::json!({
                    "thought": format!("need to {a}"),
                    "evaluation": format!("{a} happened"),
                    "action": a,
                    "status": "todo"
                })
            })
            .collect();
        serde_json::json!({ "steps": steps }).to_string()
    }

    fn agents_with_responses(responses: Vec<String>) -> Agents {
        Agents::new(Arc::new(ScriptedClient::fifo_responses(responses)))
    }

    #[test]
    fn scripted_plan_parses_with_all_steps_todo() {
        let mut agents = agents_with_responses(vec![plan_response(&["a", "b", "c"])]);
        let plan = agents.propose_plan("goal", "App", "(1) [Tab (Clickable)] \"Search\" (0, 0) to (10, 10)").unwrap();
        assert_eq!(plan.steps.len(), 3);
        assert!(plan.steps.iter().all(|s| s.status == StepStatus::Todo));
        assert_eq!(plan.revision, 0);
    }

    #[test]
    fn plan_wrapped_in_prose_and_fences_is_extracted() {
        let body = plan_response(&["tap"]);
        let mut agents =
            agents_with_responses(vec![format!("Sure! Here's a plan.\n```json\n{body}\n```")]);
        let plan = agents.propose_plan("goal", "App", "").unwrap();
        assert_eq!(plan.steps[0].action, "tap");
    }

    #[test]
    fn plan_missing_action_field_errors_after_reprompts() {
        let bad = r#"{"steps": [{"thought": "t", "evaluation": "e"}]}"#;
        let mut agents =
            agents_with_responses(vec![bad.to_owned(), bad.to_owned(), bad.to_owned()]);
        let err = agents.propose_plan("goal", "App", "").unwrap_err();
        match err {
            AgentError::Planning { attempts, .. } => assert_eq!(attempts, 1 + REPROMPT_LIMIT),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn replan_preserves_prefix_bytes_and_bumps_revision() {
        let mut agents = agents_with_responses(vec![
            plan_response(&["a", "b", "c", "d"]),
            plan_response(&["c2", "d2"]),
        ]);
        let mut plan = agents.propose_plan("goal", "App", "").unwrap();
        plan.steps[0].status = StepStatus::Success;
        plan.steps[1].status = StepStatus::Success;
        let before = serde_json::to_string(&plan.steps[..2]).unwrap();
        let revised = agents.replan(&plan, 2, "element not visible", "").unwrap();
        let after = serde_json::to_string(&revised.steps[..2]).unwrap();
        assert_eq!(before, after);
        assert_eq!(revised.revision, 1);
        assert_eq!(revised.steps.len(), 4);
        assert_eq!(revised.steps[2].action, "c2");
    }

    #[test]
    fn replan_at_step_zero_replaces_everything() {
        let mut agents = agents_with_responses(vec![
            plan_response(&["a", "b"]),
            plan_response(&["x", "y", "z"]),
        ]);
        let plan = agents.propose_plan("goal", "App", "").unwrap();
        let revised = agents.replan(&plan, 0, "start over", "").unwrap();
        assert_eq!(revised.steps.len(), 3);
        assert_eq!(revised.revision, 1);
        assert_eq!(revised.steps[0].action, "x");
    }

    fn todo_step(action: &str) -> PlanStep {
        PlanStep {
            thought: "t".into(),
            evaluation: "e".into(),
            action: action.into(),
            status: StepStatus::Todo,
        }
    }

    #[test]
    fn action_agent_grounds_tap_to_screen_id() {
        let resp = r#"{"thought": "the Search tab is element 4", "relevant_ui_ids": [4], "action": {"type": "tap", "id": 4}}"#;
        let mut agents = agents_with_responses(vec![resp.to_owned()]);
        let screen = "(4) [Tab (Clickable)] \"Search\" (100, 700) to (200, 760)";
        let cmd = agents.next_action(&todo_step("Tap the Search tab"), screen).unwrap();
        assert_eq!(cmd.action, AgentAction::Tap { id: 4 });
    }

    #[test]
    fn unknown_id_becomes_stop_with_feedback() {
        let resp = r#"{"thought": "tap it", "relevant_ui_ids": [9], "action": {"type": "tap", "id": 9}}"#;
        let mut agents = agents_with_responses(vec![resp.to_owned()]);
        let screen = "(1) [Text] \"Hello\" (0, 0) to (10, 10)";
        let cmd = agents.next_action(&todo_step("Tap the Search tab"), screen).unwrap();
        match cmd.action {
            AgentAction::Stop { feedback } => assert!(feedback.contains("9")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stop_requires_feedback() {
        let empty = r#"{"thought": "t", "relevant_ui_ids": [], "action": {"type": "stop", "feedback": ""}}"#;
        let good = r#"{"thought": "t", "relevant_ui_ids": [], "action": {"type": "stop", "feedback": "need scroll"}}"#;
        let mut agents = agents_with_responses(vec![empty.to_owned(), good.to_owned()]);
        let cmd = agents.next_action(&todo_step("impossible"), "").unwrap();
        assert_eq!(
            cmd.action,
            AgentAction::Stop { feedback: "need scroll".to_owned() }
        );
        // The reprompt consumed the second scripted response.
        assert_eq!(agents.exchanges().len(), 2);
    }

    fn eval_response(result: &str, explanation: &str) -> String {
        serde_json::json!({
            "evaluation_criteria": "c",
            "result": result,
            "explanation": explanation
        })
        .to_string()
    }

    #[test]
    fn evaluation_parses_all_three_outcomes() {
        let mut agents = agents_with_responses(vec![
            eval_response("success", "moved on"),
            eval_response("failure", "screen did not change"),
            eval_response("task_complete", "done"),
        ]);
        let plan = Plan { goal: "g".into(), revision: 0, steps: vec![todo_step("a")] };
        let cmd = ActionCommand {
            thought: "t".into(),
            relevant_ui_ids: vec![],
            action: AgentAction::Swipe { direction: Direction::Up, x: 10, y: 10 },
        };
        let r1 = agents.evaluate_action("g", &plan, &cmd, "before", "after").unwrap();
        assert_eq!(r1.result, EvalOutcome::Success);
        let r2 = agents.evaluate_action("g", &plan, &cmd, "same", "same").unwrap();
        assert_eq!(r2.result, EvalOutcome::Failure);
        assert!(!r2.explanation.is_empty());
        let r3 = agents.evaluate_action("g", &plan, &cmd, "b", "a").unwrap();
        assert_eq!(r3.result, EvalOutcome::TaskComplete);
    }

    #[test]
    fn unparseable_evaluation_degrades_to_failure() {
        let mut agents = agents_with_responses(vec![
            "garbage".to_owned(),
            "more garbage".to_owned(),
            "still garbage".to_owned(),
        ]);
        let plan = Plan { goal: "g".into(), revision: 0, steps: vec![todo_step("a")] };
        let cmd = ActionCommand {
            thought: "t".into(),
            relevant_ui_ids: vec![],
            action: AgentAction::Tap { id: 1 },
        };
        let r = agents.evaluate_action("g", &plan, &cmd, "b", "a").unwrap();
        assert_eq!(r.result, EvalOutcome::Failure);
        assert_eq!(r.explanation, "evaluator unparseable");
    }

    #[test]
    fn exchange_log_has_strictly_increasing_turns() {
        let mut agents = agents_with_responses(vec![
            plan_response(&["a"]),
            eval_response("success", "ok"),
        ]);
        let plan = agents.propose_plan("g", "App", "").unwrap();
        let cmd = ActionCommand {
            thought: "t".into(),
            relevant_ui_ids: vec![],
            action: AgentAction::Tap { id: 1 },
        };
        agents.evaluate_action("g", &plan, &cmd, "b", "a").unwrap();
        let turns: Vec<usize> = agents.exchanges().iter().map(|e| e.turn_index).collect();
        assert_eq!(turns, vec![0, 1]);
    }
}
