//! The session recording: a timestamped event timeline plus captured
//! frames. The runner appends to it while a test executes; the report
//! module turns it into chapters, annotated frames, and the JSON report.

use serde::{Deserialize, Serialize};

use crate::device_sim::DeviceEvent;
use crate::heuristics::{ColorRole, HeuristicFinding};
use crate::imaging::PixelBuffer;
use crate::ui_model::{BoundingBox, Direction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FinalStatus {
    Success,
    /// One or more steps completed but the final state was not reached.
    Partial,
    Fail,
}

/// Annotation drawn onto a frame at export time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Overlay {
    TapCross { x: i32, y: i32 },
    SwipeArrow { x: i32, y: i32, direction: Direction },
    FindingBox { region: BoundingBox, color: ColorRole },
}

/// One captured frame. Overlays are applied non-destructively at export.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub at_ms: u64,
    pub screen_id: String,
    pub pixels: PixelBuffer,
    pub overlays: Vec<Overlay>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum RecordingEvent {
    /// A device action (tap, swipe, gesture, launch...).
    Action { action: crate::device_sim::DeviceAction },
    /// A frame was captured.
    Screenshot { frame_index: usize, screen_id: String },
    Finding { finding: HeuristicFinding },
    PlanRevision { revision: u32, reason: String },
    /// Start of a named chapter (a plan step or a staging phase).
    ChapterBoundary { title: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedEvent {
    pub at_ms: u64,
    #[serde(flatten)]
    pub event: RecordingEvent,
}

/// Everything one test run produced, in timeline order.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecording {
    pub events: Vec<TimedEvent>,
    pub frames: Vec<Frame>,
    pub final_status: FinalStatus,
}

impl SessionRecording {
    pub fn new() -> Self {
        SessionRecording {
            events: Vec::new(),
            frames: Vec::new(),
            final_status: FinalStatus::Fail,
        }
    }

    /// Appends an event, keeping timestamps non-decreasing.
    pub fn push(&mut self, at_ms: u64, event: RecordingEvent) {
        debug_assert!(
            self.events.last().map(|e| e.at_ms <= at_ms) != Some(false),
            "event timestamps must be non-decreasing"
        );
        self.events.push(TimedEvent { at_ms, event });
    }

    /// Appends drained device events as Action entries.
    pub fn push_device_events(&mut self, events: Vec<DeviceEvent>) {
        for e in events {
            self.push(e.at_ms, RecordingEvent::Action { action: e.action });
        }
    }

    /// Adds a frame and its Screenshot event; returns the frame index.
    pub fn push_frame(&mut self, frame: Frame) -> usize {
        let index = self.frames.len();
        self.push(
            frame.at_ms,
            RecordingEvent::Screenshot {
                frame_index: index,
                screen_id: frame.screen_id.clone(),
            },
        );
        self.frames.push(frame);
        index
    }

    pub fn findings(&self) -> Vec<&HeuristicFinding> {
        self.events
            .iter()
            .filter_map(|e| match &e.event {
                RecordingEvent::Finding { finding } => Some(finding),
                _ => None,
            })
            .collect()
    }

    pub fn span_ms(&self) -> Option<(u64, u64)> {
        let first = self.events.first()?.at_ms;
        let last = self.events.last()?.at_ms;
        Some((first, last))
    }
}

impl Default for SessionRecording {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamps_stay_ordered_and_findings_filter() {
        let mut rec = SessionRecording::new();
        rec.push(0, RecordingEvent::ChapterBoundary { title: "Setup".into() });
        rec.push(
            10,
            RecordingEvent::Finding {
                finding: crate::heuristics::HeuristicFinding::new(
                    crate::heuristics::FindingKind::VoiceOverLoop,
                    BoundingBox::new(0, 0, 5, 5),
                    "s",
                    crate::heuristics::Verdict::Fail,
                    "loop",
                ),
            },
        );
        assert_eq!(rec.findings().len(), 1);
        assert_eq!(rec.span_ms(), Some((0, 10)));
    }
}
