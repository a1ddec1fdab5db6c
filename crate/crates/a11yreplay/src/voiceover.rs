//! VoiceOver gesture engine: sequential traversal (`read_all`), locating
//! and activating elements by coordinates, page scrolling, and focus-order
//! loop detection with geometric breakout.
//!
//! The engine drives a [`DeviceDriver`] through the same gestures a screen
//! reader user would issue and keeps an audit of every traversal sweep so
//! the heuristics can mine it for focus-order bugs.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device_sim::{DeviceDriver, DeviceError, ElementRef, VoFocus};
use crate::ui_model::{BoundingBox, Direction, ElementKind};

/// Cap on elements visited during the pre-tab `read_all` sweep.
pub const VO_VISIT_CAP: usize = 50;

#[derive(Debug, Error)]
pub enum VoError {
    #[error("VoiceOver is off")]
    VoiceOverOff,
    #[error(transparent)]
    Device(#[from] DeviceError),
}

/// One element the cursor landed on, with the announced caption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Visit {
    pub screen_id: String,
    pub element: ElementRef,
    pub caption: String,
}

/// A focus-order cycle: the element that came back under the cursor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopRecord {
    pub repeated_element: ElementRef,
    pub region: BoundingBox,
    pub screen_id: String,
    pub first_index: usize,
    pub repeat_index: usize,
    pub broke_out: bool,
}

/// One directional traversal sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitTrace {
    pub visited: Vec<Visit>,
    pub truncated: bool,
    pub loop_record: Option<LoopRecord>,
}

/// Outcome of locating and activating an element by coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationResult {
    pub activated: Option<ElementRef>,
    pub swipes_forward: usize,
    pub swipes_backward: usize,
    /// True when both search directions were exhausted without finding an
    /// element containing the requested point.
    pub missing: bool,
    /// Box of the element the coordinates pointed at (the detection), used
    /// to flag missing-element findings.
    pub target_box: BoundingBox,
    pub screen_id: String,
}

enum VisitOutcome {
    New,
    /// This visit created the sweep's loop record.
    FirstRevisit,
    /// A revisit after a loop was already recorded; terminal.
    RepeatRevisit,
}

/// Bookkeeping for one directional sweep.
struct Sweep {
    visited: Vec<Visit>,
    seen: HashMap<ElementRef, usize>,
    loop_record: Option<LoopRecord>,
    truncated: bool,
}

impl Sweep {
    fn new() -> Self {
        Sweep {
            visited: Vec::new(),
            seen: HashMap::new(),
            loop_record: None,
            truncated: false,
        }
    }

    fn record(&mut self, focus: &VoFocus) -> usize {
        self.visited.push(Visit {
            screen_id: focus.element.screen_id.clone(),
            element: focus.element.clone(),
            caption: focus.caption.clone(),
        });
        self.visited.len() - 1
    }

    /// A deliberate cursor move (jump, breakout landing): recorded but
    /// never treated as a loop.
    fn jump_visit(&mut self, focus: &VoFocus) {
        let idx = self.record(focus);
        self.seen.entry(focus.element.clone()).or_insert(idx);
    }

    /// A swipe-driven move; revisits fire loop detection.
    fn swipe_visit(&mut self, focus: &VoFocus) -> VisitOutcome {
        let idx = self.record(focus);
        match self.seen.get(&focus.element) {
            Some(&first) => {
                if self.loop_record.is_some() {
                    return VisitOutcome::RepeatRevisit;
                }
                self.loop_record = Some(LoopRecord {
                    repeated_element: focus.element.clone(),
                    region: focus.bounds,
                    screen_id: focus.element.screen_id.clone(),
                    first_index: first,
                    repeat_index: idx,
                    broke_out: false,
                });
                VisitOutcome::FirstRevisit
            }
            None => {
                self.seen.insert(focus.element.clone(), idx);
                VisitOutcome::New
            }
        }
    }

    fn into_trace(self) -> VisitTrace {
        VisitTrace {
            visited: self.visited,
            truncated: self.truncated,
            loop_record: self.loop_record,
        }
    }
}

fn require_vo(driver: &dyn DeviceDriver) -> Result<(), VoError> {
    if driver.feature().voiceover_on {
        Ok(())
    } else {
        Err(VoError::VoiceOverOff)
    }
}

/// Moves the cursor to the exposed element just below a detected loop:
/// the candidate with the smallest `y0` strictly greater than the loop
/// element's `y1`. Returns false when nothing below can take focus.
pub fn break_out_of_loop(
    driver: &mut dyn DeviceDriver,
    record: &mut LoopRecord,
) -> Result<bool, VoError> {
    require_vo(driver)?;
    let snapshot = driver.snapshot()?;
    let mut candidates: Vec<BoundingBox> = snapshot
        .elements
        .iter()
        .map(|e| e.bounds)
        .filter(|b| b.y0 > record.region.y1)
        .collect();
    candidates.sort_by_key(|b| (b.y0, b.x0));
    for bounds in candidates {
        let (cx, cy) = bounds.center();
        if driver.vo_focus_at(cx, cy)?.is_some() {
            record.broke_out = true;
            return Ok(true);
        }
    }
    Ok(false)
}

/// What a guarded swipe did to the sweep.
enum SweepStep {
    Moved(VoFocus),
    End,
}

/// Issues one directional swipe, running loop detection and breakout.
fn guarded_swipe(
    driver: &mut dyn DeviceDriver,
    sweep: &mut Sweep,
    forward: bool,
) -> Result<SweepStep, VoError> {
    let focus = if forward {
        driver.vo_right_swipe()?
    } else {
        driver.vo_left_swipe()?
    };
    let Some(focus) = focus else {
        return Ok(SweepStep::End);
    };
    match sweep.swipe_visit(&focus) {
        VisitOutcome::New => Ok(SweepStep::Moved(focus)),
        VisitOutcome::RepeatRevisit => Ok(SweepStep::End),
        VisitOutcome::FirstRevisit => {
            let mut record = sweep.loop_record.take().expect("record just created");
            let broke = break_out_of_loop(driver, &mut record)?;
            sweep.loop_record = Some(record);
            if !broke {
                return Ok(SweepStep::End);
            }
            let landing = driver.vo_focus().ok_or(DeviceError::NoVoCursor)?;
            sweep.jump_visit(&landing);
            Ok(SweepStep::Moved(landing))
        }
    }
}

/// Accumulates traversal traces and activation results for one session.
#[derive(Default)]
pub struct VoiceOverEngine {
    traces: Vec<VisitTrace>,
    activations: Vec<ActivationResult>,
}

impl VoiceOverEngine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn traces(&self) -> &[VisitTrace] {
        &self.traces
    }

    pub fn activations(&self) -> &[ActivationResult] {
        &self.activations
    }

    /// Right-swipes through the screen's exposed elements in traversal
    /// order, up to [`VO_VISIT_CAP`] visits, then walks the tab bar left to
    /// right (activating each tab) if one exists. Loop detection runs
    /// throughout; a detected loop triggers a breakout below the repeated
    /// element so the sweep can finish.
    pub fn read_all(&mut self, driver: &mut dyn DeviceDriver) -> Result<VisitTrace, VoError> {
        require_vo(driver)?;
        let mut sweep = Sweep::new();

        if let Some(first) = driver.vo_jump_to_first()? {
            sweep.jump_visit(&first);
            loop {
                if sweep.visited.len() >= VO_VISIT_CAP {
                    sweep.truncated = true;
                    break;
                }
                match guarded_swipe(driver, &mut sweep, true)? {
                    SweepStep::Moved(_) => {}
                    SweepStep::End => break,
                }
            }
        }

        // Tab bar walk: activate each tab from left to right, one visit per
        // tab; tab contents are not swept.
        let mut last_tab_x = i32::MIN;
        loop {
            let snapshot = driver.snapshot()?;
            let next_tab = snapshot
                .elements
                .iter()
                .filter(|e| e.kind == ElementKind::Tab && e.bounds.x0 > last_tab_x)
                .min_by_key(|e| e.bounds.x0)
                .cloned();
            let Some(tab) = next_tab else { break };
            last_tab_x = tab.bounds.x0;
            let (cx, cy) = tab.bounds.center();
            if let Some(focus) = driver.vo_focus_at(cx, cy)? {
                sweep.jump_visit(&focus);
                driver.vo_double_tap()?;
            }
        }

        let trace = sweep.into_trace();
        self.traces.push(trace.clone());
        Ok(trace)
    }

    /// Locates the element containing `(x, y)` with swipes and activates it
    /// with a double tap.
    ///
    /// Tabs jump straight to the leftmost tab and sweep right. Everything
    /// else sweeps forward from the current cursor to the end, then
    /// backward to the start; if neither direction finds a containing
    /// element the command returns without activating (`missing = true`).
    pub fn activate_from_coordinates(
        &mut self,
        driver: &mut dyn DeviceDriver,
        x: i32,
        y: i32,
        ui_type: ElementKind,
    ) -> Result<ActivationResult, VoError> {
        require_vo(driver)?;
        let snapshot = driver.snapshot()?;
        let screen_id = snapshot.screen_id.clone();
        let target_box = intended_target_box(&snapshot.elements, x, y, ui_type);

        let mut result = ActivationResult {
            activated: None,
            swipes_forward: 0,
            swipes_backward: 0,
            missing: false,
            target_box,
            screen_id,
        };

        if ui_type == ElementKind::Tab {
            let mut sweep = Sweep::new();
            let mut current = driver.vo_jump_to_leftmost_tab()?;
            if let Some(f) = &current {
                sweep.jump_visit(f);
            }
            while let Some(f) = current.take() {
                if f.kind == ElementKind::Tab && f.bounds.contains(x, y) {
                    driver.vo_double_tap()?;
                    result.activated = Some(f.element);
                    break;
                }
                match guarded_swipe(driver, &mut sweep, true)? {
                    SweepStep::Moved(next) => {
                        result.swipes_forward += 1;
                        current = Some(next);
                    }
                    SweepStep::End => break,
                }
            }
            self.traces.push(sweep.into_trace());
        } else {
            // Forward from the current cursor position.
            let mut sweep = Sweep::new();
            let mut current = driver.vo_focus();
            loop {
                if let Some(f) = &current {
                    if f.bounds.contains(x, y) {
                        driver.vo_double_tap()?;
                        result.activated = Some(f.element.clone());
                        break;
                    }
                }
                match guarded_swipe(driver, &mut sweep, true)? {
                    SweepStep::Moved(next) => {
                        result.swipes_forward += 1;
                        current = Some(next);
                    }
                    SweepStep::End => break,
                }
            }
            self.traces.push(sweep.into_trace());

            // Backward toward the first element if the forward sweep missed.
            if result.activated.is_none() {
                let mut back = Sweep::new();
                loop {
                    match guarded_swipe(driver, &mut back, false)? {
                        SweepStep::Moved(f) => {
                            result.swipes_backward += 1;
                            if f.bounds.contains(x, y) {
                                driver.vo_double_tap()?;
                                result.activated = Some(f.element);
                                break;
                            }
                        }
                        SweepStep::End => break,
                    }
                }
                self.traces.push(back.into_trace());
            }
        }

        result.missing = result.activated.is_none();
        self.activations.push(result.clone());
        Ok(result)
    }
}

/// Scrolls one page with the three-finger gesture.
pub fn vo_scroll(driver: &mut dyn DeviceDriver, direction: Direction) -> Result<(), VoError> {
    require_vo(driver)?;
    driver.vo_scroll(direction)?;
    Ok(())
}

/// The detection box the coordinates point at: prefer a kind match, then
/// the smallest containing box, then a small region around the point.
fn intended_target_box(
    elements: &[crate::ui_model::UIElement],
    x: i32,
    y: i32,
    ui_type: ElementKind,
) -> BoundingBox {
    let containing: Vec<&crate::ui_model::UIElement> = elements
        .iter()
        .filter(|e| e.bounds.contains(x, y))
        .collect();
    containing
        .iter()
        .find(|e| e.kind == ui_type)
        .or_else(|| containing.iter().min_by_key(|e| e.bounds.area()))
        .map(|e| e.bounds)
        .unwrap_or_else(|| BoundingBox::new(x, y, x, y).expanded(20))
}
