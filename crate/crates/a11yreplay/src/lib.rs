//! Accessibility test replay for mobile apps.
//!
//! `a11yreplay` interprets natural-language accessibility test instructions,
//! replays them against a simulated mobile device through a three-agent
//! plan/act/evaluate loop, navigates screens the way a screen-reader user
//! would when VoiceOver is under test, flags accessibility issues with a set
//! of deterministic heuristics, and exports a chaptered, annotated recording
//! (frame sequence, WebVTT chapter manifest, and a structured JSON report).
//!
//! The crate is organized around a handful of subsystems:
//!
//! - [`ui_model`] — UI element and screen types plus the element-stream
//!   transforms (reading order, plain-text serialization, keyboard and
//!   caption-panel filtering) that feed the agents.
//! - [`device_sim`] — a deterministic simulated device behind the
//!   [`device_sim::DeviceDriver`] trait, loaded from JSON app definitions.
//! - [`agents`] — planner / action / evaluation agents, prompt templates,
//!   response parsing, and the LLM client abstraction (scripted and HTTP).
//! - [`voiceover`] — the VoiceOver gesture engine: traversal, activation,
//!   loop detection and breakout.
//! - [`imaging`] — pixel buffers, Otsu thresholding, Canny edges, a
//!   horizontal Hough transform, and the synthetic screen renderer.
//! - [`heuristics`] — the accessibility-issue detectors (Dynamic Type
//!   growth, Button Shapes underlines, VoiceOver loops and missing
//!   elements).
//! - [`runner`] — instruction parsing and test orchestration.
//! - [`report`] — chapter building, frame annotation, and export.
//! - [`cli`] — the batch entry points used by the `a11yreplay` binary.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod agents;
pub mod cli;
pub mod device_sim;
pub mod heuristics;
pub mod imaging;
pub mod recording;
pub mod report;
pub mod runner;
pub mod ui_model;
pub mod voiceover;
