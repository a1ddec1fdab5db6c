//! Test orchestration: stages the device for the feature under test, runs
//! the plan/act/evaluate loop (routing input through VoiceOver gestures
//! while the screen reader is on), executes the feature-specific replay
//! sequence, and assembles the session recording.

mod instructions;

pub use instructions::{
    parse_instructions, parse_instructions_rules, Difficulty, Feature, SpecError, TestSpec,
};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::agents::{
    AgentAction, AgentError, Agents, EvalOutcome, MAX_ACTIONS, MAX_REPLANS,
};
use crate::device_sim::{DeviceDriver, DeviceError, DynamicTypeSize, FeatureDelta};
use crate::heuristics::{
    button_shapes_check, collect_vo_findings, dynamic_type_check, HeuristicConfig,
    HeuristicFinding, Verdict,
};
use crate::recording::{FinalStatus, Frame, Overlay, RecordingEvent, SessionRecording};
use crate::report::ISSUE_CHAPTER_MS;
use crate::ui_model::{serialize_elements, Direction, ScreenSnapshot};
use crate::voiceover::{vo_scroll, VoError, VoiceOverEngine};

/// Budget caps for one navigation run.
#[derive(Debug, Clone, Copy)]
pub struct NavLimits {
    pub max_actions: usize,
    pub max_replans: usize,
}

impl Default for NavLimits {
    fn default() -> Self {
        NavLimits {
            max_actions: MAX_ACTIONS,
            max_replans: MAX_REPLANS,
        }
    }
}

/// How one navigation run ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NavResult {
    pub reached: bool,
    pub steps_succeeded: usize,
    pub reason: Option<String>,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    VoiceOver(#[from] VoError),
    #[error("action referenced element id {0} missing from the previous snapshot")]
    StaleElement(u32),
}

/// Maps an agent swipe direction onto the three-finger scroll direction
/// that pans content the same way.
fn swipe_to_scroll(direction: Direction) -> Direction {
    match direction {
        Direction::Up => Direction::Down,
        Direction::Down => Direction::Up,
        Direction::Left => Direction::Right,
        Direction::Right => Direction::Left,
    }
}

/// Whether the instructions ask for element/navigation-order verification,
/// which triggers a full `read_all` sweep at the final step.
pub fn wants_read_all(spec: &TestSpec) -> bool {
    let mut text = spec.title.clone();
    text.push(' ');
    text.push_str(&spec.steps.join(" "));
    if let Some(expected) = &spec.expected_results {
        text.push(' ');
        text.push_str(expected);
    }
    let lower = text.to_lowercase();
    [
        "navigation order",
        "element order",
        "reading order",
        "read all",
        "all elements",
        "order of elements",
    ]
    .iter()
    .any(|needle| lower.contains(needle))
}

/// Executes one test against a device driver and a set of agents.
pub struct Runner<'a> {
    driver: &'a mut dyn DeviceDriver,
    agents: &'a mut Agents,
    cfg: HeuristicConfig,
    limits: NavLimits,
    recording: SessionRecording,
    engine: VoiceOverEngine,
    /// Last snapshot/frame per screen visited in the current pass.
    pass_screens: BTreeMap<String, (ScreenSnapshot, usize)>,
    fail_findings: usize,
}

impl<'a> Runner<'a> {
    pub fn new(
        driver: &'a mut dyn DeviceDriver,
        agents: &'a mut Agents,
        cfg: HeuristicConfig,
    ) -> Self {
        Runner {
            driver,
            agents,
            cfg,
            limits: NavLimits::default(),
            recording: SessionRecording::new(),
            engine: VoiceOverEngine::new(),
            pass_screens: BTreeMap::new(),
            fail_findings: 0,
        }
    }

    pub fn with_limits(mut self, limits: NavLimits) -> Self {
        self.limits = limits;
        self
    }

    pub fn engine(&self) -> &VoiceOverEngine {
        &self.engine
    }

    fn drain(&mut self) {
        let events = self.driver.take_events();
        self.recording.push_device_events(events);
    }

    fn chapter(&mut self, title: impl Into<String>) {
        self.recording.push(
            self.driver.now_ms(),
            RecordingEvent::ChapterBoundary { title: title.into() },
        );
    }

    fn capture_frame(&mut self, overlays: Vec<Overlay>) -> Result<usize, RunError> {
        let pixels = self.driver.capture_pixels()?;
        let frame = Frame {
            at_ms: self.driver.now_ms(),
            screen_id: self.driver.current_screen_id().unwrap_or_default(),
            pixels,
            overlays,
        };
        Ok(self.recording.push_frame(frame))
    }

    /// Records findings: one Finding event each (1 ms apart for stable
    /// chapter cuts) plus a box overlay on the hinted or best-matching
    /// frame.
    fn emit_findings(&mut self, findings: Vec<HeuristicFinding>, frame_hint: Option<usize>) {
        let last = self.recording.events.last().map(|e| e.at_ms + 1).unwrap_or(0);
        let base = self.driver.now_ms().max(last);
        for (i, finding) in findings.into_iter().enumerate() {
            let overlay = Overlay::FindingBox {
                region: finding.region,
                color: finding.color_role,
            };
            let target = frame_hint.or_else(|| {
                self.recording
                    .frames
                    .iter()
                    .rposition(|f| f.screen_id == finding.screen_id)
            });
            if let Some(idx) = target {
                self.recording.frames[idx].overlays.push(overlay);
            }
            if finding.verdict == Verdict::Fail {
                self.fail_findings += 1;
            }
            self.recording
                .push(base + i as u64, RecordingEvent::Finding { finding });
        }
    }

    fn launch(&mut self, app_id: &str) -> Result<ScreenSnapshot, RunError> {
        let snapshot = self.driver.launch_app(app_id)?;
        self.drain();
        let frame = self.capture_frame(vec![])?;
        self.pass_screens
            .insert(snapshot.screen_id.clone(), (snapshot.clone(), frame));
        Ok(snapshot)
    }

    fn kill(&mut self) -> Result<(), RunError> {
        self.driver.kill_app()?;
        self.drain();
        Ok(())
    }

    fn set_feature(&mut self, delta: &FeatureDelta) -> Result<(), RunError> {
        self.driver.set_feature(delta)?;
        self.drain();
        Ok(())
    }

    /// Executes one grounded action, returning the post-action snapshot.
    fn execute(
        &mut self,
        snapshot: &ScreenSnapshot,
        action: &AgentAction,
    ) -> Result<(ScreenSnapshot, Vec<Overlay>), RunError> {
        let vo_on = self.driver.feature().voiceover_on;
        let result = match action {
            AgentAction::Tap { id } => {
                let element = snapshot
                    .element_by_id(*id)
                    .ok_or(RunError::StaleElement(*id))?
                    .clone();
                let (cx, cy) = element.bounds.center();
                let after = if vo_on {
                    self.engine
                        .activate_from_coordinates(self.driver, cx, cy, element.kind)?;
                    self.driver.snapshot()?
                } else {
                    self.driver.tap(cx, cy)?
                };
                (after, vec![Overlay::TapCross { x: cx, y: cy }])
            }
            AgentAction::TextEntry { id, text } => {
                let element = snapshot
                    .element_by_id(*id)
                    .ok_or(RunError::StaleElement(*id))?
                    .clone();
                let (cx, cy) = element.bounds.center();
                let after = if vo_on {
                    self.engine
                        .activate_from_coordinates(self.driver, cx, cy, element.kind)?;
                    self.driver.type_keys(text)?
                } else {
                    self.driver.type_text(*id, text)?
                };
                (after, vec![Overlay::TapCross { x: cx, y: cy }])
            }
            AgentAction::Swipe { direction, x, y } => {
                let after = if vo_on {
                    vo_scroll(self.driver, swipe_to_scroll(*direction))?;
                    self.driver.snapshot()?
                } else {
                    self.driver.swipe(*direction, (*x, *y))?
                };
                (
                    after,
                    vec![Overlay::SwipeArrow {
                        x: *x,
                        y: *y,
                        direction: *direction,
                    }],
                )
            }
            AgentAction::Stop { .. } => unreachable!("stop handled by the navigation loop"),
        };
        Ok(result)
    }

    /// The plan/act/evaluate loop for one navigation goal.
    pub fn navigate(&mut self, goal: &str, app_name: &str) -> Result<NavResult, RunError> {
        let snapshot = self.driver.snapshot()?;
        let screen_text = serialize_elements(&snapshot);
        let mut plan = self.agents.propose_plan(goal, app_name, &screen_text)?;
        self.recording.push(
            self.driver.now_ms(),
            RecordingEvent::PlanRevision {
                revision: plan.revision,
                reason: "initial plan".to_owned(),
            },
        );

        let mut actions_used = 0usize;
        let mut replans = 0usize;
        let mut steps_succeeded = 0usize;
        let mut index = 0usize;
        loop {
            if index >= plan.steps.len() {
                return Ok(NavResult {
                    reached: true,
                    steps_succeeded,
                    reason: None,
                });
            }
            if actions_used >= self.limits.max_actions {
                return Ok(NavResult {
                    reached: false,
                    steps_succeeded,
                    reason: Some(format!("action budget ({}) exhausted", self.limits.max_actions)),
                });
            }

            let step = plan.steps[index].clone();
            self.chapter(step.action.clone());
            let before = self.driver.snapshot()?;
            let before_text = serialize_elements(&before);
            let command = self.agents.next_action(&step, &before_text)?;

            if let AgentAction::Stop { feedback } = &command.action {
                replans += 1;
                if replans > self.limits.max_replans {
                    return Ok(NavResult {
                        reached: false,
                        steps_succeeded,
                        reason: Some(format!(
                            "replan budget ({}) exhausted: {feedback}",
                            self.limits.max_replans
                        )),
                    });
                }
                plan = self.agents.replan(&plan, index, feedback, &before_text)?;
                self.recording.push(
                    self.driver.now_ms(),
                    RecordingEvent::PlanRevision {
                        revision: plan.revision,
                        reason: feedback.clone(),
                    },
                );
                continue;
            }

            actions_used += 1;
            let (after, overlays) = self.execute(&before, &command.action)?;
            self.drain();
            let frame = self.capture_frame(overlays)?;
            self.pass_screens
                .insert(after.screen_id.clone(), (after.clone(), frame));
            let after_text = serialize_elements(&after);

            let evaluation =
                self.agents
                    .evaluate_action(goal, &plan, &command, &before_text, &after_text)?;
            match evaluation.result {
                EvalOutcome::Success => {
                    plan.steps[index].status = crate::agents::StepStatus::Success;
                    steps_succeeded += 1;
                    index += 1;
                }
                EvalOutcome::TaskComplete => {
                    plan.steps[index].status = crate::agents::StepStatus::Success;
                    steps_succeeded += 1;
                    return Ok(NavResult {
                        reached: true,
                        steps_succeeded,
                        reason: None,
                    });
                }
                EvalOutcome::Failure => {
                    replans += 1;
                    if replans > self.limits.max_replans {
                        return Ok(NavResult {
                            reached: false,
                            steps_succeeded,
                            reason: Some(format!(
                                "replan budget ({}) exhausted: {}",
                                self.limits.max_replans, evaluation.explanation
                            )),
                        });
                    }
                    plan =
                        self.agents
                            .replan(&plan, index, &evaluation.explanation, &after_text)?;
                    self.recording.push(
                        self.driver.now_ms(),
                        RecordingEvent::PlanRevision {
                            revision: plan.revision,
                            reason: evaluation.explanation.clone(),
                        },
                    );
                }
            }
        }
    }

    /// Runs the full feature-specific replay sequence for one test.
    pub fn run_test(
        mut self,
        spec: &TestSpec,
        app_id: &str,
    ) -> Result<SessionRecording, RunError> {
        let goal = spec.navigation_goal();
        let results = match spec.feature {
            Feature::VoiceOver => self.run_voiceover(spec, app_id, &goal)?,
            Feature::DynamicType => self.run_dynamic_type(spec, app_id, &goal)?,
            Feature::BoldText => {
                self.run_feature_pair(spec, app_id, &goal, Feature::BoldText)?
            }
            Feature::ButtonShapes => {
                self.run_feature_pair(spec, app_id, &goal, Feature::ButtonShapes)?
            }
        };

        // Trailing boundary so issue chapters always have room before the
        // final timestamp.
        let slack = ISSUE_CHAPTER_MS * (self.fail_findings as u64 + 1);
        let last = self.recording.events.last().map(|e| e.at_ms).unwrap_or(0);
        self.recording.push(
            self.driver.now_ms().max(last) + slack,
            RecordingEvent::ChapterBoundary {
                title: "Summary".to_owned(),
            },
        );

        self.recording.final_status = if results.iter().all(|r| r.reached) {
            FinalStatus::Success
        } else if results.iter().any(|r| r.steps_succeeded > 0) {
            FinalStatus::Partial
        } else {
            FinalStatus::Fail
        };
        Ok(self.recording)
    }

    fn run_voiceover(
        &mut self,
        spec: &TestSpec,
        app_id: &str,
        goal: &str,
    ) -> Result<Vec<NavResult>, RunError> {
        self.chapter("Enable VoiceOver");
        self.set_feature(&FeatureDelta::voiceover(true))?;
        self.launch(app_id)?;
        let first = self.navigate(goal, &spec.app_name)?;

        if wants_read_all(spec) {
            self.chapter("Read all elements");
            self.engine.read_all(self.driver)?;
            self.drain();
            self.capture_frame(vec![])?;
        }

        let findings = collect_vo_findings(self.engine.traces(), self.engine.activations());
        self.emit_findings(findings, None);
        self.kill()?;

        self.chapter("Replay with VoiceOver off");
        self.set_feature(&FeatureDelta::voiceover(false))?;
        self.launch(app_id)?;
        let second = self.navigate(goal, &spec.app_name)?;
        self.kill()?;
        Ok(vec![first, second])
    }

    fn run_dynamic_type(
        &mut self,
        spec: &TestSpec,
        app_id: &str,
        goal: &str,
    ) -> Result<Vec<NavResult>, RunError> {
        let passes = [
            DynamicTypeSize::XL,
            DynamicTypeSize::XXL,
            DynamicTypeSize::XXXL,
            DynamicTypeSize::AX1,
            DynamicTypeSize::Off,
        ];
        let mut shots: BTreeMap<DynamicTypeSize, (ScreenSnapshot, usize)> = BTreeMap::new();
        let mut results = Vec::new();
        for size in passes {
            self.chapter(format!("Dynamic Type {size} pass"));
            self.launch(app_id)?;
            self.set_feature(&FeatureDelta::dynamic_type(size))?;
            results.push(self.navigate(goal, &spec.app_name)?);
            let snapshot = self.driver.snapshot()?;
            let frame = self.capture_frame(vec![])?;
            shots.insert(size, (snapshot, frame));
            self.kill()?;
        }

        let chain = [
            (DynamicTypeSize::Off, DynamicTypeSize::XL),
            (DynamicTypeSize::XL, DynamicTypeSize::XXL),
            (DynamicTypeSize::XXL, DynamicTypeSize::XXXL),
            (DynamicTypeSize::XXXL, DynamicTypeSize::AX1),
        ];
        for (base_size, grown_size) in chain {
            let (base, _) = &shots[&base_size];
            let (grown, frame) = &shots[&grown_size];
            let findings = dynamic_type_check(base, grown, &self.cfg);
            self.emit_findings(findings, Some(*frame));
        }
        Ok(results)
    }

    fn run_feature_pair(
        &mut self,
        spec: &TestSpec,
        app_id: &str,
        goal: &str,
        feature: Feature,
    ) -> Result<Vec<NavResult>, RunError> {
        let label = match feature {
            Feature::BoldText => "Bold Text",
            _ => "Button Shapes",
        };
        let delta = |on: bool| match feature {
            Feature::BoldText => FeatureDelta::bold_text(on),
            _ => FeatureDelta::button_shapes(on),
        };

        let mut results = Vec::new();
        for enabled in [true, false] {
            self.chapter(format!("{label} {} pass", if enabled { "on" } else { "off" }));
            self.pass_screens.clear();
            self.set_feature(&delta(enabled))?;
            self.launch(app_id)?;
            results.push(self.navigate(goal, &spec.app_name)?);
            // Pairwise screenshots of every screen this pass touched.
            let snapshot = self.driver.snapshot()?;
            let frame = self.capture_frame(vec![])?;
            self.pass_screens
                .insert(snapshot.screen_id.clone(), (snapshot, frame));

            if feature == Feature::ButtonShapes && enabled {
                let screens: Vec<(ScreenSnapshot, usize)> =
                    self.pass_screens.values().cloned().collect();
                for (snapshot, frame) in screens {
                    let pixels = self.recording.frames[frame].pixels.clone();
                    let (findings, _notes) = button_shapes_check(&snapshot, &pixels, &self.cfg);
                    self.emit_findings(findings, Some(frame));
                }
            }
            self.kill()?;
        }
        Ok(results)
    }
}
