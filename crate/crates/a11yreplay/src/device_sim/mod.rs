//! A deterministic simulated mobile device.
//!
//! [`Session`] runs one app-under-test at a time against an [`AppModel`]
//! screen graph. It implements [`DeviceDriver`], the surface the test
//! runner and the VoiceOver engine program against, so a real device
//! backend could be substituted later. All timing is simulated: every
//! action advances a virtual clock by a fixed cost, which makes recordings
//! reproducible byte for byte.

mod app_model;
mod keyboard;
mod state;

pub use app_model::{
    load_app, load_app_from_path, AppModel, ElementDef, LoadError, PageSpec, ScreenDef,
    TransitionAction, TransitionDef, FORMAT_VERSION,
};
pub use state::{
    AccessibilityFeatureState, DeviceState, DynamicTypeSize, ElementRef, FeatureDelta,
    VOICEOVER_SPEAKING_RATE,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{render_screen_page, PixelBuffer};
use crate::ui_model::{
    self, BoundingBox, Direction, ElementKind, ScreenSnapshot, UIElement,
    DEFAULT_CAPTION_HEIGHT_FRAC,
};

/// Simulated action costs in milliseconds.
pub mod timing {
    pub const TAP_MS: u64 = 300;
    pub const SWIPE_MS: u64 = 500;
    pub const VO_SWIPE_MS: u64 = 400;
    pub const DOUBLE_TAP_MS: u64 = 300;
    pub const KEYSTROKE_MS: u64 = 80;
    pub const LAUNCH_MS: u64 = 1000;
    pub const KILL_MS: u64 = 500;
    pub const FEATURE_MS: u64 = 200;
    pub const VO_SCROLL_MS: u64 = 600;
    pub const VO_TOUCH_MS: u64 = 200;
    /// Caption dwell per announced character at the VoiceOver default rate.
    pub const CAPTION_MS_PER_CHAR: u64 = 30;
}

/// Something the device did, for the session event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeviceAction {
    Launch { app_id: String },
    Kill { app_id: String },
    Tap { x: i32, y: i32 },
    Swipe { direction: Direction, x: i32, y: i32 },
    TypeText { text: String },
    SetFeature { summary: String },
    VoSwipe { direction: Direction, landed: Option<String> },
    VoDoubleTap { target: Option<String> },
    VoFocusTouch { x: i32, y: i32, hit: bool },
    VoJumpToTab { landed: Option<String> },
    VoJumpToFirst { landed: Option<String> },
    VoScroll { direction: Direction },
}

impl DeviceAction {
    /// Short human-readable label used in recordings and summaries.
    pub fn label(&self) -> String {
        match self {
            DeviceAction::Launch { app_id } => format!("Launch {app_id}"),
            DeviceAction::Kill { app_id } => format!("Kill {app_id}"),
            DeviceAction::Tap { x, y } => format!("Tap ({x}, {y})"),
            DeviceAction::Swipe { direction, x, y } => format!("Swipe {direction} from ({x}, {y})"),
            DeviceAction::TypeText { text } => format!("Type \"{text}\""),
            DeviceAction::SetFeature { summary } => format!("Set {summary}"),
            DeviceAction::VoSwipe { direction, landed } => match landed {
                Some(caption) => format!("VoiceOver {direction} swipe to \"{caption}\""),
                None => format!("VoiceOver {direction} swipe (no move)"),
            },
            DeviceAction::VoDoubleTap { target } => match target {
                Some(caption) => format!("VoiceOver double tap \"{caption}\""),
                None => "VoiceOver double tap".to_owned(),
            },
            DeviceAction::VoFocusTouch { x, y, hit } => {
                format!("VoiceOver touch ({x}, {y}){}", if *hit { "" } else { " missed" })
            }
            DeviceAction::VoJumpToTab { landed } => match landed {
                Some(caption) => format!("VoiceOver jump to tab \"{caption}\""),
                None => "VoiceOver jump to tab (none)".to_owned(),
            },
            DeviceAction::VoJumpToFirst { landed } => match landed {
                Some(caption) => format!("VoiceOver jump to first \"{caption}\""),
                None => "VoiceOver jump to first (none)".to_owned(),
            },
            DeviceAction::VoScroll { direction } => format!("VoiceOver scroll {direction}"),
        }
    }
}

/// Timestamped entry in the append-only session event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceEvent {
    pub at_ms: u64,
    pub action: DeviceAction,
}

/// The element currently under the VoiceOver cursor.
#[derive(Debug, Clone, PartialEq)]
pub struct VoFocus {
    pub element: ElementRef,
    pub kind: ElementKind,
    pub caption: String,
    pub bounds: BoundingBox,
}

#[derive(Debug, Error)]
pub enum DeviceError {
    #[error("no app launched")]
    NoApp,
    #[error("unknown app \"{0}\"")]
    UnknownApp(String),
    #[error("element id {0} is not a text field")]
    NotATextField(u32),
    #[error("element id {0} does not resolve to an app element")]
    InvalidTarget(u32),
    #[error("no text field focused")]
    NoFieldFocused,
    #[error("VoiceOver is off")]
    VoiceOverOff,
    #[error("VoiceOver cursor is not on an element")]
    NoVoCursor,
    #[error("invalid feature change: {0}")]
    InvalidFeature(String),
}

/// The device surface the runner and VoiceOver engine program against.
///
/// [`Session`] implements this with a simulator; a real device backend
/// would implement the same contract.
pub trait DeviceDriver {
    fn launch_app(&mut self, app_id: &str) -> Result<ScreenSnapshot, DeviceError>;
    fn kill_app(&mut self) -> Result<(), DeviceError>;
    /// Current screen as an element snapshot, filtered the way detections
    /// are fed to the agents (keyboard keys stripped, captions removed).
    fn snapshot(&mut self) -> Result<ScreenSnapshot, DeviceError>;
    /// Pixels of the current screen.
    fn capture_pixels(&mut self) -> Result<PixelBuffer, DeviceError>;
    fn tap(&mut self, x: i32, y: i32) -> Result<ScreenSnapshot, DeviceError>;
    fn swipe(&mut self, direction: Direction, origin: (i32, i32))
        -> Result<ScreenSnapshot, DeviceError>;
    /// Taps the element with the given snapshot id and types `text`.
    fn type_text(&mut self, element_id: u32, text: &str) -> Result<ScreenSnapshot, DeviceError>;
    /// Types into the already-focused field (keystrokes only).
    fn type_keys(&mut self, text: &str) -> Result<ScreenSnapshot, DeviceError>;
    fn set_feature(&mut self, delta: &FeatureDelta) -> Result<(), DeviceError>;
    fn feature(&self) -> AccessibilityFeatureState;
    fn screen_dims(&self) -> (i32, i32);
    fn current_screen_id(&self) -> Option<String>;

    // VoiceOver gesture primitives.
    fn vo_right_swipe(&mut self) -> Result<Option<VoFocus>, DeviceError>;
    fn vo_left_swipe(&mut self) -> Result<Option<VoFocus>, DeviceError>;
    fn vo_double_tap(&mut self) -> Result<ScreenSnapshot, DeviceError>;
    fn vo_focus(&self) -> Option<VoFocus>;
    /// VoiceOver touch: focuses the exposed element at a point, if any.
    fn vo_focus_at(&mut self, x: i32, y: i32) -> Result<Option<VoFocus>, DeviceError>;
    fn vo_jump_to_leftmost_tab(&mut self) -> Result<Option<VoFocus>, DeviceError>;
    fn vo_jump_to_first(&mut self) -> Result<Option<VoFocus>, DeviceError>;
    fn vo_scroll(&mut self, direction: Direction) -> Result<ScreenSnapshot, DeviceError>;

    fn now_ms(&self) -> u64;
    /// Drains events logged since the last call.
    fn take_events(&mut self) -> Vec<DeviceEvent>;
}

/// What a serialized element id resolved to in the last snapshot.
#[derive(Debug, Clone, PartialEq)]
enum SnapshotTarget {
    Def(usize),
    KeyboardKey,
    CaptionPanel,
}

/// One simulated device running one test session. Single-threaded;
/// independent sessions share nothing.
pub struct Session {
    apps: BTreeMap<String, AppModel>,
    state: DeviceState,
    clock_ms: u64,
    events: Vec<DeviceEvent>,
    taken: usize,
    last_id_map: Vec<SnapshotTarget>,
    last_caption: Option<String>,
    seed: u64,
}

impl Session {
    pub fn new(seed: u64) -> Self {
        Session {
            apps: BTreeMap::new(),
            state: DeviceState::default(),
            clock_ms: 0,
            events: Vec::new(),
            taken: 0,
            last_id_map: Vec::new(),
            last_caption: None,
            seed,
        }
    }

    pub fn with_app(model: AppModel) -> Self {
        let mut s = Session::new(0);
        s.add_app(model);
        s
    }

    pub fn add_app(&mut self, model: AppModel) {
        self.apps.insert(model.app_id.clone(), model);
    }

    pub fn app(&self, app_id: &str) -> Option<&AppModel> {
        self.apps.get(app_id)
    }

    pub fn state(&self) -> &DeviceState {
        &self.state
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Full event log since session start (not drained by `take_events`).
    pub fn events(&self) -> &[DeviceEvent] {
        &self.events
    }

    fn advance(&mut self, ms: u64) {
        self.clock_ms += ms;
    }

    fn log(&mut self, action: DeviceAction) {
        self.events.push(DeviceEvent {
            at_ms: self.clock_ms,
            action,
        });
    }

    fn current_app_model(&self) -> Result<&AppModel, DeviceError> {
        let app_id = self.state.current_app.as_ref().ok_or(DeviceError::NoApp)?;
        self.apps.get(app_id).ok_or(DeviceError::NoApp)
    }

    fn current_screen(&self) -> Result<(&str, &ScreenDef), DeviceError> {
        let app = self.current_app_model()?;
        let screen_id = self.state.current_screen.as_deref().ok_or(DeviceError::NoApp)?;
        let screen = app.screen(screen_id).ok_or(DeviceError::NoApp)?;
        Ok((screen_id, screen))
    }

    fn visible_indices(&self) -> Result<Vec<usize>, DeviceError> {
        let (_, screen) = self.current_screen()?;
        Ok(screen
            .elements
            .iter()
            .enumerate()
            .filter(|(_, d)| d.page.visible_at(self.state.scroll_offset))
            .map(|(i, _)| i)
            .collect())
    }

    /// Exposed, visible element indices in screen-reader order: explicit
    /// `vo_order_index` when present, reading order otherwise.
    fn vo_order(&self) -> Result<Vec<usize>, DeviceError> {
        let (_, screen) = self.current_screen()?;
        let size = self.state.feature.dynamic_type_size;
        let mut reachable: Vec<usize> = self
            .visible_indices()?
            .into_iter()
            .filter(|&i| screen.elements[i].accessibility_exposed)
            .collect();
        if reachable
            .iter()
            .all(|&i| screen.elements[i].vo_order_index.is_some())
            && !reachable.is_empty()
        {
            reachable.sort_by_key(|&i| screen.elements[i].vo_order_index);
            return Ok(reachable);
        }
        let boxes: Vec<BoundingBox> = reachable
            .iter()
            .map(|&i| screen.elements[i].box_for(size))
            .collect();
        let band = ui_model::row_band_px(self.current_app_model()?.height);
        Ok(ui_model::reading_order_indices(&boxes, band)
            .into_iter()
            .map(|p| reachable[p])
            .collect())
    }

    fn focus_for(&self, index: usize) -> Result<VoFocus, DeviceError> {
        let (screen_id, screen) = self.current_screen()?;
        let def = &screen.elements[index];
        Ok(VoFocus {
            element: ElementRef::new(screen_id, index),
            kind: def.kind,
            caption: def.caption(),
            bounds: def.box_for(self.state.feature.dynamic_type_size),
        })
    }

    fn caption_dwell_ms(&self, caption: &str) -> u64 {
        let rate = self.state.feature.speaking_rate.max(f64::EPSILON);
        let chars = caption.chars().count() as f64;
        (chars * timing::CAPTION_MS_PER_CHAR as f64 * (VOICEOVER_SPEAKING_RATE / rate)).round()
            as u64
    }

    /// Moves the VoiceOver cursor to `index`, announcing its caption.
    fn vo_move_cursor(&mut self, index: usize) -> Result<VoFocus, DeviceError> {
        let focus = self.focus_for(index)?;
        self.state.vo_cursor = Some(focus.element.clone());
        self.last_caption = Some(focus.caption.clone());
        self.advance(self.caption_dwell_ms(&focus.caption));
        Ok(focus)
    }

    fn reset_vo_cursor(&mut self) {
        self.state.vo_cursor = None;
        if self.state.feature.voiceover_on {
            if let Ok(order) = self.vo_order() {
                if let Some(&first) = order.first() {
                    if let Ok(focus) = self.focus_for(first) {
                        self.state.vo_cursor = Some(focus.element);
                        self.last_caption = Some(focus.caption);
                    }
                }
            }
        }
    }

    fn apply_screen_change(&mut self, to: &str) {
        self.state.current_screen = Some(to.to_owned());
        self.state.scroll_offset = 0;
        self.state.focused_field = None;
        self.reset_vo_cursor();
    }

    /// Fires the tap semantics of an element: focuses text fields and
    /// follows tap transitions (honoring one-shot interrupts).
    fn activate_element(&mut self, index: usize) -> Result<(), DeviceError> {
        let (screen_id, screen) = self.current_screen()?;
        let screen_id = screen_id.to_owned();
        let def = &screen.elements[index];
        let is_text_field = def.kind == ElementKind::TextField;
        let name = def.name.clone();
        let transition = name.as_ref().and_then(|n| {
            screen
                .transitions
                .iter()
                .find(|t| t.element == *n && t.action == TransitionAction::Tap)
                .cloned()
        });

        if is_text_field {
            self.state.focused_field = Some(index);
            return Ok(());
        }
        self.state.focused_field = None;

        let Some(name) = name else {
            return Ok(());
        };
        if let Some(t) = transition {
            let key = (screen_id.clone(), name);
            let target = match &t.interrupt_once {
                Some(interrupt) if !self.state.fired_interrupts.contains(&key) => {
                    self.state.fired_interrupts.insert(key);
                    interrupt.clone()
                }
                _ => t.to.clone(),
            };
            if target != screen_id {
                self.apply_screen_change(&target);
            }
        }
        Ok(())
    }

    /// Index of the topmost visible element containing the point; later
    /// definition order means closer to the top of the z-stack.
    fn hit_test(&self, x: i32, y: i32) -> Result<Option<usize>, DeviceError> {
        let (_, screen) = self.current_screen()?;
        let size = self.state.feature.dynamic_type_size;
        Ok(self
            .visible_indices()?
            .into_iter()
            .filter(|&i| screen.elements[i].box_for(size).contains(x, y))
            .next_back())
    }

    fn require_vo(&self) -> Result<(), DeviceError> {
        if self.state.feature.voiceover_on {
            Ok(())
        } else {
            Err(DeviceError::VoiceOverOff)
        }
    }

    fn vo_successor(&self, current: &ElementRef) -> Result<Option<usize>, DeviceError> {
        let (screen_id, screen) = self.current_screen()?;
        if current.screen_id != screen_id {
            // Stale cursor after a screen change; restart from the top.
            return Ok(self.vo_order()?.first().copied());
        }
        let def = &screen.elements[current.index];
        if let Some(next_name) = &def.vo_next {
            if let Some(idx) = screen.element_index(next_name) {
                let next = &screen.elements[idx];
                if next.accessibility_exposed && next.page.visible_at(self.state.scroll_offset) {
                    return Ok(Some(idx));
                }
            }
            return Ok(None);
        }
        let order = self.vo_order()?;
        match order.iter().position(|&i| i == current.index) {
            Some(pos) => Ok(order.get(pos + 1).copied()),
            None => Ok(order.first().copied()),
        }
    }

    fn vo_predecessor(&self, current: &ElementRef) -> Result<Option<usize>, DeviceError> {
        let (screen_id, _) = self.current_screen()?;
        if current.screen_id != screen_id {
            return Ok(None);
        }
        let order = self.vo_order()?;
        match order.iter().position(|&i| i == current.index) {
            Some(0) | None => Ok(None),
            Some(pos) => Ok(order.get(pos - 1).copied()),
        }
    }

    fn resolve_id(&self, element_id: u32) -> Result<usize, DeviceError> {
        match self.last_id_map.get(element_id.saturating_sub(1) as usize) {
            Some(SnapshotTarget::Def(idx)) => Ok(*idx),
            Some(_) => Err(DeviceError::InvalidTarget(element_id)),
            None => Err(DeviceError::InvalidTarget(element_id)),
        }
    }

    fn build_snapshot(&mut self) -> Result<ScreenSnapshot, DeviceError> {
        let app = self.current_app_model()?;
        let (width, height) = (app.width, app.height);
        let app_id = app.app_id.clone();
        let (screen_id, screen) = self.current_screen()?;
        let screen_id = screen_id.to_owned();
        let size = self.state.feature.dynamic_type_size;

        let mut targets: Vec<SnapshotTarget> = Vec::new();
        let mut elements: Vec<UIElement> = Vec::new();
        for idx in self.visible_indices()? {
            let def = &screen.elements[idx];
            elements.push(UIElement::new(
                def.kind,
                def.text.as_deref(),
                def.is_clickable(),
                def.box_for(size),
            ));
            targets.push(SnapshotTarget::Def(idx));
        }
        if let Some(field_idx) = self.state.focused_field {
            let label = screen.elements[field_idx]
                .submit_label
                .clone()
                .unwrap_or_else(|| "return".to_owned());
            for key in keyboard::key_elements(width, height, &label) {
                elements.push(key);
                targets.push(SnapshotTarget::KeyboardKey);
            }
        }
        if self.state.feature.captions_on {
            let caption = self
                .last_caption
                .clone()
                .unwrap_or_else(|| "VoiceOver on".to_owned());
            elements.push(UIElement::new(
                ElementKind::Text,
                Some(&caption),
                false,
                BoundingBox::new(10, height * 80 / 100, width - 10, height - 10),
            ));
            targets.push(SnapshotTarget::CaptionPanel);
        }

        // Stash the target index in `id` so it survives filtering/sorting.
        for (i, el) in elements.iter_mut().enumerate() {
            el.id = i as u32;
        }
        ui_model::flag_back_buttons(&mut elements, width, height);

        let provisional = ScreenSnapshot {
            elements,
            width,
            height,
            keyboard_visible: false,
            app_id: app_id.clone(),
            screen_id: screen_id.clone(),
        };
        let (keyboard_visible, filtered) = ui_model::detect_keyboard(&provisional);
        let mut snap = ScreenSnapshot {
            elements: filtered,
            keyboard_visible,
            ..provisional
        };
        if self.state.feature.captions_on {
            snap = ui_model::filter_caption_panel(&snap, DEFAULT_CAPTION_HEIGHT_FRAC);
        }

        let band = ui_model::row_band_px(height);
        let mut sorted = ui_model::sort_reading_order(&snap.elements, band);
        self.last_id_map = sorted
            .iter()
            .map(|el| targets[el.id as usize].clone())
            .collect();
        ui_model::assign_ids(&mut sorted);
        snap.elements = sorted;
        Ok(snap)
    }
}

impl DeviceDriver for Session {
    fn launch_app(&mut self, app_id: &str) -> Result<ScreenSnapshot, DeviceError> {
        let app = self
            .apps
            .get(app_id)
            .ok_or_else(|| DeviceError::UnknownApp(app_id.to_owned()))?;
        let initial = app.initial_screen.clone();
        self.advance(timing::LAUNCH_MS);
        self.state.current_app = Some(app_id.to_owned());
        self.state.recording = true;
        self.apply_screen_change(&initial);
        self.log(DeviceAction::Launch {
            app_id: app_id.to_owned(),
        });
        self.build_snapshot()
    }

    fn kill_app(&mut self) -> Result<(), DeviceError> {
        let Some(app_id) = self.state.current_app.take() else {
            return Ok(()); // killing with no app is a no-op
        };
        self.advance(timing::KILL_MS);
        self.state.current_screen = None;
        self.state.scroll_offset = 0;
        self.state.focused_field = None;
        self.state.vo_cursor = None;
        self.log(DeviceAction::Kill { app_id });
        Ok(())
    }

    fn snapshot(&mut self) -> Result<ScreenSnapshot, DeviceError> {
        self.build_snapshot()
    }

    fn capture_pixels(&mut self) -> Result<PixelBuffer, DeviceError> {
        let app = self.current_app_model()?;
        let (width, height) = (app.width, app.height);
        let (_, screen) = self.current_screen()?;
        Ok(render_screen_page(
            screen,
            &self.state.feature,
            width,
            height,
            self.state.scroll_offset,
        ))
    }

    fn tap(&mut self, x: i32, y: i32) -> Result<ScreenSnapshot, DeviceError> {
        self.current_screen()?;
        self.advance(timing::TAP_MS);
        self.log(DeviceAction::Tap { x, y });
        if let Some(idx) = self.hit_test(x, y)? {
            self.activate_element(idx)?;
        }
        self.build_snapshot()
    }

    fn swipe(
        &mut self,
        direction: Direction,
        origin: (i32, i32),
    ) -> Result<ScreenSnapshot, DeviceError> {
        let (_, screen) = self.current_screen()?;
        let extent = screen.scroll_extent;
        let swipe_target = screen.swipe_transitions.get(&direction).cloned();
        self.advance(timing::SWIPE_MS);
        self.log(DeviceAction::Swipe {
            direction,
            x: origin.0,
            y: origin.1,
        });
        match direction {
            Direction::Up => {
                self.state.scroll_offset = (self.state.scroll_offset + 1).min(extent);
            }
            Direction::Down => {
                self.state.scroll_offset = (self.state.scroll_offset - 1).max(0);
            }
            Direction::Left | Direction::Right => {
                if let Some(target) = swipe_target {
                    self.apply_screen_change(&target);
                }
            }
        }
        self.build_snapshot()
    }

    fn type_text(&mut self, element_id: u32, text: &str) -> Result<ScreenSnapshot, DeviceError> {
        let idx = self.resolve_id(element_id)?;
        let (_, screen) = self.current_screen()?;
        if screen.elements[idx].kind != ElementKind::TextField {
            return Err(DeviceError::NotATextField(element_id));
        }
        self.advance(timing::TAP_MS); // focusing tap
        self.state.focused_field = Some(idx);
        self.enter_text(idx, text)
    }

    fn type_keys(&mut self, text: &str) -> Result<ScreenSnapshot, DeviceError> {
        let idx = self.state.focused_field.ok_or(DeviceError::NoFieldFocused)?;
        self.enter_text(idx, text)
    }

    fn set_feature(&mut self, delta: &FeatureDelta) -> Result<(), DeviceError> {
        if let Some(rate) = delta.speaking_rate {
            if !(rate > 0.0 && rate <= 1.0) {
                return Err(DeviceError::InvalidFeature(format!(
                    "speaking_rate {rate} outside (0, 1]"
                )));
            }
        }
        let was_on = self.state.feature.voiceover_on;
        let turning_on = delta.voiceover_on == Some(true) && !was_on;
        let turning_off = delta.voiceover_on == Some(false) && was_on;

        self.advance(timing::FEATURE_MS);
        let f = &mut self.state.feature;
        if let Some(v) = delta.voiceover_on {
            f.voiceover_on = v;
        }
        if turning_on {
            f.captions_on = true;
            f.speaking_rate = VOICEOVER_SPEAKING_RATE;
        }
        if turning_off {
            f.captions_on = false;
        }
        if let Some(v) = delta.speaking_rate {
            f.speaking_rate = v;
        }
        if let Some(v) = delta.captions_on {
            if v && !f.voiceover_on {
                return Err(DeviceError::InvalidFeature(
                    "captions require VoiceOver".to_owned(),
                ));
            }
            f.captions_on = v;
        }
        if let Some(v) = delta.dynamic_type_size {
            f.dynamic_type_size = v;
        }
        if let Some(v) = delta.bold_text_on {
            f.bold_text_on = v;
        }
        if let Some(v) = delta.button_shapes_on {
            f.button_shapes_on = v;
        }

        if turning_on {
            self.reset_vo_cursor();
        }
        if turning_off {
            self.state.vo_cursor = None;
        }
        self.log(DeviceAction::SetFeature {
            summary: delta.summary(),
        });
        Ok(())
    }

    fn feature(&self) -> AccessibilityFeatureState {
        self.state.feature
    }

    fn screen_dims(&self) -> (i32, i32) {
        self.current_app_model()
            .map(|a| (a.width, a.height))
            .unwrap_or((0, 0))
    }

    fn current_screen_id(&self) -> Option<String> {
        self.state.current_screen.clone()
    }

    fn vo_right_swipe(&mut self) -> Result<Option<VoFocus>, DeviceError> {
        self.require_vo()?;
        self.advance(timing::VO_SWIPE_MS);
        let next = match self.state.vo_cursor.clone() {
            Some(cursor) => self.vo_successor(&cursor)?,
            None => self.vo_order()?.first().copied(),
        };
        let focus = match next {
            Some(idx) => Some(self.vo_move_cursor(idx)?),
            None => None,
        };
        self.log(DeviceAction::VoSwipe {
            direction: Direction::Right,
            landed: focus.as_ref().map(|f| f.caption.clone()),
        });
        Ok(focus)
    }

    fn vo_left_swipe(&mut self) -> Result<Option<VoFocus>, DeviceError> {
        self.require_vo()?;
        self.advance(timing::VO_SWIPE_MS);
        let prev = match self.state.vo_cursor.clone() {
            Some(cursor) => self.vo_predecessor(&cursor)?,
            None => None,
        };
        let focus = match prev {
            Some(idx) => Some(self.vo_move_cursor(idx)?),
            None => None,
        };
        self.log(DeviceAction::VoSwipe {
            direction: Direction::Left,
            landed: focus.as_ref().map(|f| f.caption.clone()),
        });
        Ok(focus)
    }

    fn vo_double_tap(&mut self) -> Result<ScreenSnapshot, DeviceError> {
        self.require_vo()?;
        let cursor = self.state.vo_cursor.clone().ok_or(DeviceError::NoVoCursor)?;
        self.advance(timing::DOUBLE_TAP_MS);
        let caption = self.focus_for(cursor.index).ok().map(|f| f.caption);
        self.log(DeviceAction::VoDoubleTap { target: caption });
        self.activate_element(cursor.index)?;
        self.build_snapshot()
    }

    fn vo_focus(&self) -> Option<VoFocus> {
        let cursor = self.state.vo_cursor.clone()?;
        self.focus_for(cursor.index).ok()
    }

    fn vo_focus_at(&mut self, x: i32, y: i32) -> Result<Option<VoFocus>, DeviceError> {
        self.require_vo()?;
        self.advance(timing::VO_TOUCH_MS);
        let (_, screen) = self.current_screen()?;
        let size = self.state.feature.dynamic_type_size;
        let hit = self
            .visible_indices()?
            .into_iter()
            .filter(|&i| {
                screen.elements[i].accessibility_exposed
                    && screen.elements[i].box_for(size).contains(x, y)
            })
            .next_back();
        let focus = match hit {
            Some(idx) => Some(self.vo_move_cursor(idx)?),
            None => None,
        };
        self.log(DeviceAction::VoFocusTouch {
            x,
            y,
            hit: focus.is_some(),
        });
        Ok(focus)
    }

    fn vo_jump_to_leftmost_tab(&mut self) -> Result<Option<VoFocus>, DeviceError> {
        self.require_vo()?;
        self.advance(timing::VO_TOUCH_MS);
        let (_, screen) = self.current_screen()?;
        let size = self.state.feature.dynamic_type_size;
        let leftmost = self
            .visible_indices()?
            .into_iter()
            .filter(|&i| {
                screen.elements[i].kind == ElementKind::Tab
                    && screen.elements[i].accessibility_exposed
            })
            .min_by_key(|&i| screen.elements[i].box_for(size).x0);
        let focus = match leftmost {
            Some(idx) => Some(self.vo_move_cursor(idx)?),
            None => None,
        };
        self.log(DeviceAction::VoJumpToTab {
            landed: focus.as_ref().map(|f| f.caption.clone()),
        });
        Ok(focus)
    }

    fn vo_jump_to_first(&mut self) -> Result<Option<VoFocus>, DeviceError> {
        self.require_vo()?;
        self.advance(timing::VO_TOUCH_MS);
        let first = self.vo_order()?.first().copied();
        let focus = match first {
            Some(idx) => Some(self.vo_move_cursor(idx)?),
            None => None,
        };
        self.log(DeviceAction::VoJumpToFirst {
            landed: focus.as_ref().map(|f| f.caption.clone()),
        });
        Ok(focus)
    }

    fn vo_scroll(&mut self, direction: Direction) -> Result<ScreenSnapshot, DeviceError> {
        self.require_vo()?;
        let (_, screen) = self.current_screen()?;
        let extent = screen.scroll_extent;
        // A three-finger scroll pans content the way a touch swipe in the
        // opposite direction would.
        let swipe_target = match direction {
            Direction::Left => screen.swipe_transitions.get(&Direction::Right).cloned(),
            Direction::Right => screen.swipe_transitions.get(&Direction::Left).cloned(),
            _ => None,
        };
        self.advance(timing::VO_SCROLL_MS);
        self.log(DeviceAction::VoScroll { direction });
        match direction {
            Direction::Down => {
                self.state.scroll_offset = (self.state.scroll_offset + 1).min(extent);
            }
            Direction::Up => {
                self.state.scroll_offset = (self.state.scroll_offset - 1).max(0);
            }
            Direction::Left | Direction::Right => {
                if let Some(target) = swipe_target {
                    self.apply_screen_change(&target);
                }
            }
        }
        self.build_snapshot()
    }

    fn now_ms(&self) -> u64 {
        self.clock_ms
    }

    fn take_events(&mut self) -> Vec<DeviceEvent> {
        let new = self.events[self.taken..].to_vec();
        self.taken = self.events.len();
        new
    }
}

impl Session {
    fn enter_text(&mut self, idx: usize, text: &str) -> Result<ScreenSnapshot, DeviceError> {
        let (screen_id, screen) = self.current_screen()?;
        let screen_id = screen_id.to_owned();
        let name = screen.elements[idx].name.clone();
        // Prefer an exact query match over the wildcard; empty text never
        // submits.
        let submit = name.as_ref().and_then(|n| {
            let candidates: Vec<&TransitionDef> = screen
                .transitions
                .iter()
                .filter(|t| t.element == *n && t.action == TransitionAction::Submit)
                .collect();
            candidates
                .iter()
                .find(|t| t.query.as_deref() == Some(text) && !text.is_empty())
                .or_else(|| {
                    if text.is_empty() {
                        None
                    } else {
                        candidates.iter().find(|t| t.query.as_deref() == Some("*"))
                    }
                })
                .map(|t| (*t).clone())
        });

        self.advance(text.chars().count() as u64 * timing::KEYSTROKE_MS);
        self.state
            .field_texts
            .insert((screen_id.clone(), idx), text.to_owned());
        self.log(DeviceAction::TypeText {
            text: text.to_owned(),
        });

        if let Some(t) = submit {
            self.state.focused_field = None;
            if t.to != screen_id {
                self.apply_screen_change(&t.to);
            }
        }
        self.build_snapshot()
    }
}
