//! App definitions: the screen graph a simulated device runs.
//!
//! Definitions are human-editable JSON documents with a top-level
//! `{format_version, app_id, app_name, width, height, initial_screen,
//! screens}` object. [`load_app`] validates the document into an
//! [`AppModel`] and reports the offending screen/element on failure.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ui_model::{BoundingBox, Direction, ElementKind};

use super::state::DynamicTypeSize;

/// Current app-definition document version.
pub const FORMAT_VERSION: u32 = 1;

/// Which scroll page(s) expose an element.
///
/// Serialized as an integer page index or the string `"all"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PageSpecRaw", into = "PageSpecRaw")]
pub enum PageSpec {
    /// Visible regardless of scroll offset (tab bars, navigation chrome).
    All,
    /// Visible only at this scroll offset.
    Page(i32),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PageSpecRaw {
    Num(i32),
    Str(String),
}

impl TryFrom<PageSpecRaw> for PageSpec {
    type Error = String;

    fn try_from(raw: PageSpecRaw) -> Result<Self, Self::Error> {
        match raw {
            PageSpecRaw::Num(n) => Ok(PageSpec::Page(n)),
            PageSpecRaw::Str(s) if s == "all" => Ok(PageSpec::All),
            PageSpecRaw::Str(s) => Err(format!("invalid page spec \"{s}\" (want a number or \"all\")")),
        }
    }
}

impl From<PageSpec> for PageSpecRaw {
    fn from(p: PageSpec) -> Self {
        match p {
            PageSpec::All => PageSpecRaw::Str("all".to_owned()),
            PageSpec::Page(n) => PageSpecRaw::Num(n),
        }
    }
}

impl Default for PageSpec {
    fn default() -> Self {
        PageSpec::Page(0)
    }
}

impl PageSpec {
    pub fn visible_at(&self, offset: i32) -> bool {
        match self {
            PageSpec::All => true,
            PageSpec::Page(p) => *p == offset,
        }
    }
}

/// One element of a screen definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementDef {
    /// Stable name used by transitions, containers, and traversal overrides.
    #[serde(default)]
    pub name: Option<String>,
    pub kind: ElementKind,
    #[serde(default)]
    pub text: Option<String>,
    /// Defaults by kind: Buttons and Tabs are clickable, the rest are not.
    #[serde(default)]
    pub clickable: Option<bool>,
    #[serde(rename = "box")]
    pub bounds: BoundingBox,
    /// Per-Dynamic-Type-size box overrides; missing sizes fall back to `box`.
    #[serde(default)]
    pub boxes_by_size: BTreeMap<DynamicTypeSize, BoundingBox>,
    /// Whether the renderer draws an underline beneath this element's text.
    #[serde(default)]
    pub underlined: bool,
    /// Name of the container element this one sits inside, if any.
    #[serde(default)]
    pub container: Option<String>,
    /// Whether the screen reader can reach this element.
    #[serde(default = "default_true")]
    pub accessibility_exposed: bool,
    /// Explicit screen-reader traversal position. Either every exposed
    /// element on a screen has one or none does.
    #[serde(default)]
    pub vo_order_index: Option<u32>,
    /// Traversal successor override; the mechanism for wiring focus-order
    /// cycles into fixtures.
    #[serde(default)]
    pub vo_next: Option<String>,
    #[serde(default)]
    pub page: PageSpec,
    /// Submit-key label shown while this text field is focused.
    #[serde(default)]
    pub submit_label: Option<String>,
}

fn default_true() -> bool {
    true
}

impl ElementDef {
    pub fn is_clickable(&self) -> bool {
        self.clickable
            .unwrap_or(matches!(self.kind, ElementKind::Button | ElementKind::Tab))
    }

    /// The element's box at the given Dynamic Type size.
    pub fn box_for(&self, size: DynamicTypeSize) -> BoundingBox {
        self.boxes_by_size.get(&size).copied().unwrap_or(self.bounds)
    }

    /// Caption a screen reader would announce: the text, or the kind name
    /// for textless elements.
    pub fn caption(&self) -> String {
        self.text.clone().unwrap_or_else(|| self.kind.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionAction {
    Tap,
    Submit,
}

impl fmt::Display for TransitionAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionAction::Tap => f.write_str("tap"),
            TransitionAction::Submit => f.write_str("submit"),
        }
    }
}

/// Edge of the screen graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionDef {
    /// Name of the source element.
    pub element: String,
    pub action: TransitionAction,
    pub to: String,
    /// For submit transitions: the query text that triggers this edge, or
    /// `"*"` for any non-empty text.
    #[serde(default)]
    pub query: Option<String>,
    /// Screen shown the first time this transition fires (permission
    /// prompts and similar one-shot dialogs); later activations go to `to`.
    #[serde(default)]
    pub interrupt_once: Option<String>,
}

/// One screen of an app.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenDef {
    pub elements: Vec<ElementDef>,
    #[serde(default)]
    pub transitions: Vec<TransitionDef>,
    /// Number of additional pages reachable by scrolling.
    #[serde(default)]
    pub scroll_extent: i32,
    /// Screen-level swipe edges keyed by swipe direction.
    #[serde(default)]
    pub swipe_transitions: BTreeMap<Direction, String>,
}

impl ScreenDef {
    pub fn element_index(&self, name: &str) -> Option<usize> {
        self.elements
            .iter()
            .position(|e| e.name.as_deref() == Some(name))
    }
}

/// A validated app definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppModel {
    pub format_version: u32,
    pub app_id: String,
    /// Human-readable name matched against test instructions.
    #[serde(default)]
    pub app_name: String,
    pub width: i32,
    pub height: i32,
    pub initial_screen: String,
    pub screens: BTreeMap<String, ScreenDef>,
}

impl AppModel {
    pub fn screen(&self, id: &str) -> Option<&ScreenDef> {
        self.screens.get(id)
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("invalid app definition JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format_version {found} (expected {FORMAT_VERSION})")]
    UnsupportedVersion { found: u32 },
    #[error("unknown screen \"{screen}\" referenced by {context}")]
    UnknownScreen { screen: String, context: String },
    #[error("unknown element \"{element}\" referenced by {context} on screen \"{screen}\"")]
    UnknownElement {
        screen: String,
        element: String,
        context: String,
    },
    #[error("screen \"{screen}\": {detail}")]
    InvalidScreen { screen: String, detail: String },
    #[error("screen \"{screen}\", element \"{element}\": {detail}")]
    InvalidElement {
        screen: String,
        element: String,
        detail: String,
    },
    #[error("failed to read app definition: {0}")]
    Io(#[from] std::io::Error),
}

fn element_label(def: &ElementDef, index: usize) -> String {
    def.name
        .clone()
        .unwrap_or_else(|| format!("#{index} ({})", def.kind))
}

/// Parses and validates an app-definition document.
pub fn load_app(document: &str) -> Result<AppModel, LoadError> {
    let model: AppModel = serde_json::from_str(document)?;
    validate(&model)?;
    Ok(model)
}

/// Reads an app definition from a file.
pub fn load_app_from_path(path: &Path) -> Result<AppModel, LoadError> {
    let text = std::fs::read_to_string(path)?;
    load_app(&text)
}

fn validate(model: &AppModel) -> Result<(), LoadError> {
    if model.format_version != FORMAT_VERSION {
        return Err(LoadError::UnsupportedVersion {
            found: model.format_version,
        });
    }
    if !model.screens.contains_key(&model.initial_screen) {
        return Err(LoadError::UnknownScreen {
            screen: model.initial_screen.clone(),
            context: "initial_screen".to_owned(),
        });
    }

    for (screen_id, screen) in &model.screens {
        validate_screen(model, screen_id, screen)?;
    }
    Ok(())
}

fn validate_screen(model: &AppModel, screen_id: &str, screen: &ScreenDef) -> Result<(), LoadError> {
    let invalid_screen = |detail: String| LoadError::InvalidScreen {
        screen: screen_id.to_owned(),
        detail,
    };

    if screen.scroll_extent < 0 {
        return Err(invalid_screen("scroll_extent must be >= 0".to_owned()));
    }

    let mut names = BTreeSet::new();
    for (i, def) in screen.elements.iter().enumerate() {
        if let Some(name) = &def.name {
            if !names.insert(name.clone()) {
                return Err(invalid_screen(format!("duplicate element name \"{name}\"")));
            }
        }
        validate_element(model, screen_id, screen, i, def)?;
    }

    // vo_order_index is all-or-none across exposed elements and unique.
    let exposed: Vec<&ElementDef> = screen
        .elements
        .iter()
        .filter(|d| d.accessibility_exposed)
        .collect();
    let with_index = exposed.iter().filter(|d| d.vo_order_index.is_some()).count();
    if with_index != 0 && with_index != exposed.len() {
        return Err(invalid_screen(
            "vo_order_index must be set on all exposed elements or none".to_owned(),
        ));
    }
    let mut seen = BTreeSet::new();
    for def in &exposed {
        if let Some(idx) = def.vo_order_index {
            if !seen.insert(idx) {
                return Err(invalid_screen(format!("duplicate vo_order_index {idx}")));
            }
        }
    }

    for t in &screen.transitions {
        if screen.element_index(&t.element).is_none() {
            return Err(LoadError::UnknownElement {
                screen: screen_id.to_owned(),
                element: t.element.clone(),
                context: "transition".to_owned(),
            });
        }
        for target in [Some(&t.to), t.interrupt_once.as_ref()].into_iter().flatten() {
            if !model.screens.contains_key(target) {
                return Err(LoadError::UnknownScreen {
                    screen: target.clone(),
                    context: format!("transition from \"{}\" on \"{screen_id}\"", t.element),
                });
            }
        }
        if t.action == TransitionAction::Submit && t.query.is_none() {
            return Err(invalid_screen(format!(
                "submit transition from \"{}\" needs a query",
                t.element
            )));
        }
    }

    for (direction, target) in &screen.swipe_transitions {
        if !model.screens.contains_key(target) {
            return Err(LoadError::UnknownScreen {
                screen: target.clone(),
                context: format!("swipe-{direction} transition on \"{screen_id}\""),
            });
        }
    }

    Ok(())
}

fn validate_element(
    model: &AppModel,
    screen_id: &str,
    screen: &ScreenDef,
    index: usize,
    def: &ElementDef,
) -> Result<(), LoadError> {
    let invalid = |detail: String| LoadError::InvalidElement {
        screen: screen_id.to_owned(),
        element: element_label(def, index),
        detail,
    };

    if def.kind == ElementKind::Tab && def.clickable == Some(false) {
        return Err(invalid("tabs must be clickable".to_owned()));
    }
    if !def.accessibility_exposed && def.vo_order_index.is_some() {
        return Err(invalid(
            "unexposed elements cannot carry a vo_order_index".to_owned(),
        ));
    }
    if let PageSpec::Page(p) = def.page {
        if p < 0 || p > screen.scroll_extent {
            return Err(invalid(format!(
                "page {p} outside scroll extent {}",
                screen.scroll_extent
            )));
        }
    }

    let screen_box = BoundingBox::new(0, 0, model.width, model.height);
    let mut all_boxes = vec![def.bounds];
    all_boxes.extend(def.boxes_by_size.values().copied());
    for b in all_boxes {
        if !screen_box.contains_box(&b) {
            return Err(invalid(format!(
                "box ({}, {}) to ({}, {}) exceeds screen {}x{}",
                b.x0, b.y0, b.x1, b.y1, model.width, model.height
            )));
        }
    }

    if let Some(container) = &def.container {
        let Some(ci) = screen.element_index(container) else {
            return Err(LoadError::UnknownElement {
                screen: screen_id.to_owned(),
                element: container.clone(),
                context: format!("container of \"{}\"", element_label(def, index)),
            });
        };
        let cbox = screen.elements[ci].bounds;
        if !cbox.contains_box(&def.bounds) {
            return Err(invalid(format!(
                "not geometrically inside container \"{container}\""
            )));
        }
    }

    if let Some(next) = &def.vo_next {
        if screen.element_index(next).is_none() {
            return Err(LoadError::UnknownElement {
                screen: screen_id.to_owned(),
                element: next.clone(),
                context: format!("vo_next of \"{}\"", element_label(def, index)),
            });
        }
    }

    Ok(())
}
