//! UI element and screen types, plus the element-stream transforms applied
//! before a screen is described to the agents: reading-order sorting,
//! plain-text serialization, keyboard detection, caption-panel filtering,
//! and back-button flagging.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reading-order row band, as a fraction of screen height.
pub const DEFAULT_ROW_BAND_FRAC: f64 = 0.04;
/// Height of the VoiceOver caption panel, as a fraction of screen height.
pub const DEFAULT_CAPTION_HEIGHT_FRAC: f64 = 0.22;
/// Minimum number of single-character text detections in the lower third of
/// a screen that indicates an on-screen keyboard (rather than stray glyphs).
pub const KEYBOARD_KEY_THRESHOLD: usize = 10;
/// Labels a keyboard submit key may carry. These survive keyboard filtering
/// so the agents can still submit a form.
pub const SUBMIT_KEY_LABELS: [&str; 5] = ["return", "search", "go", "done", "send"];

/// A swipe or scroll direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Left => "left",
            Direction::Right => "right",
        };
        f.write_str(s)
    }
}

/// Axis-aligned box in pixels, origin top-left, y grows downward.
///
/// Serialized as a `[x0, y0, x1, y1]` array in JSON documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[i32; 4]", into = "[i32; 4]")]
pub struct BoundingBox {
    pub x0: i32,
    pub y0: i32,
    pub x1: i32,
    pub y1: i32,
}

impl From<[i32; 4]> for BoundingBox {
    fn from(v: [i32; 4]) -> Self {
        BoundingBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BoundingBox> for [i32; 4] {
    fn from(b: BoundingBox) -> Self {
        [b.x0, b.y0, b.x1, b.y1]
    }
}

impl BoundingBox {
    /// Builds a box, normalizing corner order and clamping at zero.
    pub fn new(x0: i32, y0: i32, x1: i32, y1: i32) -> Self {
        let (x0, x1) = (x0.min(x1).max(0), x0.max(x1).max(0));
        let (y0, y1) = (y0.min(y1).max(0), y0.max(y1).max(0));
        BoundingBox { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> i32 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> i32 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> i64 {
        self.width() as i64 * self.height() as i64
    }

    pub fn center(&self) -> (i32, i32) {
        ((self.x0 + self.x1) / 2, (self.y0 + self.y1) / 2)
    }

    pub fn center_y(&self) -> i32 {
        (self.y0 + self.y1) / 2
    }

    /// Point containment, edges inclusive.
    pub fn contains(&self, x: i32, y: i32) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    /// Full geometric containment of `other` inside `self`.
    pub fn contains_box(&self, other: &BoundingBox) -> bool {
        other.x0 >= self.x0 && other.x1 <= self.x1 && other.y0 >= self.y0 && other.y1 <= self.y1
    }

    /// Grows the box by `pad` on every side, clamping at zero.
    pub fn expanded(&self, pad: i32) -> BoundingBox {
        BoundingBox::new(self.x0 - pad, self.y0 - pad, self.x1 + pad, self.y1 + pad)
    }
}

/// Classification of a detected UI element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ElementKind {
    Button,
    Tab,
    Icon,
    Toggle,
    Text,
    TextField,
    Image,
    Container,
    Other,
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ElementKind::Button => "Button",
            ElementKind::Tab => "Tab",
            ElementKind::Icon => "Icon",
            ElementKind::Toggle => "Toggle",
            ElementKind::Text => "Text",
            ElementKind::TextField => "TextField",
            ElementKind::Image => "Image",
            ElementKind::Container => "Container",
            ElementKind::Other => "Other",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ElementKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "Button" => ElementKind::Button,
            "Tab" => ElementKind::Tab,
            "Icon" => ElementKind::Icon,
            "Toggle" => ElementKind::Toggle,
            "Text" => ElementKind::Text,
            "TextField" => ElementKind::TextField,
            "Image" => ElementKind::Image,
            "Container" => ElementKind::Container,
            "Other" => ElementKind::Other,
            _ => return Err(()),
        })
    }
}

/// A detected UI element as presented to the agents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UIElement {
    /// Position in the serialized element list, 1-based. Assigned when the
    /// snapshot is finalized; ids restart for every snapshot.
    pub id: u32,
    pub kind: ElementKind,
    #[serde(default)]
    pub text: Option<String>,
    pub clickable: bool,
    pub bounds: BoundingBox,
    #[serde(default)]
    pub is_back_button: bool,
}

impl UIElement {
    pub fn new(kind: ElementKind, text: Option<&str>, clickable: bool, bounds: BoundingBox) -> Self {
        UIElement {
            id: 0,
            kind,
            text: text.map(str::to_owned),
            clickable,
            bounds,
            is_back_button: false,
        }
    }
}

/// All elements detected on one screen, in reading order, ids assigned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenSnapshot {
    pub elements: Vec<UIElement>,
    pub width: i32,
    pub height: i32,
    pub keyboard_visible: bool,
    pub app_id: String,
    pub screen_id: String,
}

impl ScreenSnapshot {
    /// Sorts `elements` in reading order, assigns 1-based ids, and wraps
    /// them into a snapshot.
    pub fn from_elements(
        elements: Vec<UIElement>,
        width: i32,
        height: i32,
        keyboard_visible: bool,
        app_id: impl Into<String>,
        screen_id: impl Into<String>,
    ) -> Self {
        let band = row_band_px(height);
        let mut sorted = sort_reading_order(&elements, band);
        assign_ids(&mut sorted);
        ScreenSnapshot {
            elements: sorted,
            width,
            height,
            keyboard_visible,
            app_id: app_id.into(),
            screen_id: screen_id.into(),
        }
    }

    pub fn element_by_id(&self, id: u32) -> Option<&UIElement> {
        self.elements.iter().find(|el| el.id == id)
    }
}

/// Default reading-order band in pixels for a given screen height.
pub fn row_band_px(height: i32) -> i32 {
    ((height as f64 * DEFAULT_ROW_BAND_FRAC).round() as i32).max(1)
}

/// Reassigns ids to match list position, starting at 1.
pub fn assign_ids(elements: &mut [UIElement]) {
    for (i, el) in elements.iter_mut().enumerate() {
        el.id = (i + 1) as u32;
    }
}

/// Orders `boxes` in reading order and returns the permutation of indices.
///
/// Elements are grouped into horizontal bands: an element joins the current
/// band when its vertical center is less than `row_band_px` below the band's
/// first element. Bands run top to bottom, and elements within a band run
/// left to right by `x0`. Ties keep input order.
pub fn reading_order_indices(boxes: &[BoundingBox], row_band_px: i32) -> Vec<usize> {
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by_key(|&i| boxes[i].center_y());

    let mut bands: Vec<Vec<usize>> = Vec::new();
    let mut anchor = i32::MIN;
    for i in order {
        let cy = boxes[i].center_y();
        if bands.is_empty() || cy - anchor >= row_band_px {
            bands.push(vec![i]);
            anchor = cy;
        } else {
            bands.last_mut().expect("band exists").push(i);
        }
    }
    for band in &mut bands {
        band.sort_by_key(|&i| boxes[i].x0);
    }
    bands.into_iter().flatten().collect()
}

/// Sorts elements into reading order (top-to-bottom bands, left-to-right
/// within a band). The output is a permutation of the input.
pub fn sort_reading_order(elements: &[UIElement], row_band_px: i32) -> Vec<UIElement> {
    let boxes: Vec<BoundingBox> = elements.iter().map(|el| el.bounds).collect();
    reading_order_indices(&boxes, row_band_px)
        .into_iter()
        .map(|i| elements[i].clone())
        .collect()
}

fn escape_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out
}

fn unescape_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some(other) => out.push(other),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Formats one element as a serialized line:
/// `(<id>) [<Kind>[ (Clickable)]] "<text>" (<x0>, <y0>) to (<x1>, <y1>)`.
///
/// The quoted text segment is omitted for textless elements; back buttons
/// get a trailing ` [Back]` marker. The format is a stable wire contract
/// consumed by agent prompts.
pub fn format_element_line(el: &UIElement) -> String {
    let clickable = if el.clickable { " (Clickable)" } else { "" };
    let mut line = format!("({}) [{}{}]", el.id, el.kind, clickable);
    if let Some(text) = &el.text {
        line.push_str(&format!(" \"{}\"", escape_text(text)));
    }
    let b = el.bounds;
    line.push_str(&format!(" ({}, {}) to ({}, {})", b.x0, b.y0, b.x1, b.y1));
    if el.is_back_button {
        line.push_str(" [Back]");
    }
    line
}

/// Serializes a snapshot into the plain-text element list fed to the
/// agents, one line per element. Empty screens serialize to an empty string.
pub fn serialize_elements(screen: &ScreenSnapshot) -> String {
    screen
        .elements
        .iter()
        .map(format_element_line)
        .collect::<Vec<_>>()
        .join("\n")
}

/// Collects the element ids present in a serialized element list.
pub fn screen_text_ids(text: &str) -> BTreeSet<u32> {
    text.lines()
        .filter_map(|line| {
            let rest = line.strip_prefix('(')?;
            let end = rest.find(')')?;
            rest[..end].parse::<u32>().ok()
        })
        .collect()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LineParseError {
    #[error("malformed element line at {at}: {detail}")]
    Malformed { at: String, detail: String },
}

fn malformed(at: &str, detail: &str) -> LineParseError {
    LineParseError::Malformed {
        at: at.to_owned(),
        detail: detail.to_owned(),
    }
}

/// Parses a serialized element line back into an element.
///
/// This is the reference grammar for the wire format; round-tripping
/// through [`format_element_line`] recovers id, kind, clickability, text,
/// and box exactly.
pub fn parse_element_line(line: &str) -> Result<UIElement, LineParseError> {
    let rest = line
        .strip_prefix('(')
        .ok_or_else(|| malformed(line, "expected leading '('"))?;
    let close = rest
        .find(") [")
        .ok_or_else(|| malformed(line, "expected ') ['"))?;
    let id: u32 = rest[..close]
        .parse()
        .map_err(|_| malformed(line, "bad id"))?;
    let rest = &rest[close + 3..];

    let bracket_end = rest
        .find(']')
        .ok_or_else(|| malformed(line, "expected ']'"))?;
    let kind_str = &rest[..bracket_end];
    let (kind_str, clickable) = match kind_str.strip_suffix(" (Clickable)") {
        Some(k) => (k, true),
        None => (kind_str, false),
    };
    let kind: ElementKind = kind_str
        .parse()
        .map_err(|_| malformed(line, "unknown element kind"))?;
    let mut rest = &rest[bracket_end + 1..];

    let mut text = None;
    if let Some(after_quote) = rest.strip_prefix(" \"") {
        // Find the closing quote, skipping escaped characters.
        let mut end = None;
        let mut escaped = false;
        for (i, c) in after_quote.char_indices() {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                end = Some(i);
                break;
            }
        }
        let end = end.ok_or_else(|| malformed(line, "unterminated text"))?;
        text = Some(unescape_text(&after_quote[..end]));
        rest = &after_quote[end + 1..];
    }

    let rest = rest
        .strip_prefix(" (")
        .ok_or_else(|| malformed(line, "expected coordinates"))?;
    let (coords, trailer) = rest
        .split_once(')')
        .map(|(a, b)| {
            let b = b.strip_prefix(" to (").unwrap_or(b);
            (a.to_owned(), b.to_owned())
        })
        .ok_or_else(|| malformed(line, "bad coordinates"))?;
    let (x0, y0) = parse_pair(&coords).ok_or_else(|| malformed(line, "bad first corner"))?;
    let (second, trailer) = trailer
        .split_once(')')
        .ok_or_else(|| malformed(line, "bad second corner"))?;
    let (x1, y1) = parse_pair(second).ok_or_else(|| malformed(line, "bad second corner"))?;
    let is_back_button = trailer.trim() == "[Back]";
    if !trailer.trim().is_empty() && !is_back_button {
        return Err(malformed(line, "unexpected trailer"));
    }

    Ok(UIElement {
        id,
        kind,
        text,
        clickable,
        bounds: BoundingBox::new(x0, y0, x1, y1),
        is_back_button,
    })
}

fn parse_pair(s: &str) -> Option<(i32, i32)> {
    let (a, b) = s.split_once(", ")?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn in_lower_third(bounds: &BoundingBox, height: i32) -> bool {
    3 * bounds.y0 >= 2 * height
}

fn is_submit_label(text: &str) -> bool {
    let lower = text.to_lowercase();
    SUBMIT_KEY_LABELS.contains(&lower.as_str())
}

/// Detects an on-screen keyboard from single-character text detections in
/// the lower third of the screen and strips the key elements.
///
/// When a keyboard is detected, every element in the lower third is removed
/// except submit keys (see [`SUBMIT_KEY_LABELS`]); elements above the lower
/// third are never touched. Without a keyboard the input passes through
/// unchanged.
pub fn detect_keyboard(screen: &ScreenSnapshot) -> (bool, Vec<UIElement>) {
    let key_count = screen
        .elements
        .iter()
        .filter(|el| {
            el.kind == ElementKind::Text
                && el.text.as_deref().map(|t| t.chars().count() == 1) == Some(true)
                && in_lower_third(&el.bounds, screen.height)
        })
        .count();

    if key_count < KEYBOARD_KEY_THRESHOLD {
        return (false, screen.elements.clone());
    }

    let filtered = screen
        .elements
        .iter()
        .filter(|el| {
            !in_lower_third(&el.bounds, screen.height)
                || el.text.as_deref().map(is_submit_label) == Some(true)
        })
        .cloned()
        .collect();
    (true, filtered)
}

/// Removes elements that lie entirely within the bottom caption-panel band,
/// so VoiceOver captions never leak into the element stream the agents see.
///
/// `caption_height_frac` must be in (0, 0.5); elements straddling the band
/// boundary are kept.
pub fn filter_caption_panel(screen: &ScreenSnapshot, caption_height_frac: f64) -> ScreenSnapshot {
    assert!(
        caption_height_frac > 0.0 && caption_height_frac < 0.5,
        "caption_height_frac out of range: {caption_height_frac}"
    );
    let band_top = (1.0 - caption_height_frac) * screen.height as f64;
    let mut out = screen.clone();
    out.elements.retain(|el| (el.bounds.y0 as f64) < band_top);
    out
}

/// Flags top-left back buttons: Button or Icon elements whose box starts in
/// the top quarter and left third of the screen.
pub fn flag_back_buttons(elements: &mut [UIElement], width: i32, height: i32) {
    for el in elements {
        el.is_back_button = matches!(el.kind, ElementKind::Button | ElementKind::Icon)
            && 4 * el.bounds.y0 < height
            && 3 * el.bounds.x0 < width;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn el(kind: ElementKind, text: Option<&str>, clickable: bool, b: [i32; 4]) -> UIElement {
        UIElement::new(kind, text, clickable, BoundingBox::new(b[0], b[1], b[2], b[3]))
    }

    #[test]
    fn golden_serialized_line() {
        let mut button = el(
            ElementKind::Button,
            Some("Try It Free"),
            true,
            [194, 1563, 1042, 1744],
        );
        button.id = 3;
        assert_eq!(
            format_element_line(&button),
            "(3) [Button (Clickable)] \"Try It Free\" (194, 1563) to (1042, 1744)"
        );
    }

    #[test]
    fn textless_element_omits_quote_segment() {
        let mut icon = el(ElementKind::Icon, None, false, [10, 10, 50, 50]);
        icon.id = 1;
        assert_eq!(format_element_line(&icon), "(1) [Icon] (10, 10) to (50, 50)");
    }

    #[test]
    fn empty_screen_serializes_empty() {
        let screen = ScreenSnapshot::from_elements(vec![], 400, 800, false, "app", "s");
        assert_eq!(serialize_elements(&screen), "");
    }

    #[test]
    fn back_button_marker_round_trips() {
        let mut b = el(ElementKind::Icon, None, true, [10, 20, 40, 60]);
        b.id = 2;
        b.is_back_button = true;
        let line = format_element_line(&b);
        assert!(line.ends_with(" [Back]"));
        assert_eq!(parse_element_line(&line).unwrap(), b);
    }

    #[test]
    fn reading_order_same_band_sorts_by_x() {
        // Vertical centers 4px apart with a 24px band: one band, x order.
        let a = el(ElementKind::Text, Some("right"), false, [500, 90, 540, 110]);
        let b = el(ElementKind::Text, Some("left"), false, [20, 94, 60, 114]);
        let sorted = sort_reading_order(&[a.clone(), b.clone()], 24);
        assert_eq!(sorted, vec![b, a]);
    }

    #[test]
    fn reading_order_distinct_bands_sort_by_y() {
        let top = el(ElementKind::Text, Some("top"), false, [900, 90, 940, 110]);
        let bottom = el(ElementKind::Text, Some("bottom"), false, [10, 390, 50, 410]);
        let sorted = sort_reading_order(&[bottom.clone(), top.clone()], 24);
        assert_eq!(sorted, vec![top, bottom]);
    }

    #[test]
    fn reading_order_empty_input() {
        assert!(sort_reading_order(&[], 24).is_empty());
    }

    /// Exhaustive pairwise check of the two-element comparator: for every
    /// combination of vertical gap and x order, the output order matches
    /// the band rule directly.
    #[test]
    fn reading_order_pairwise_comparator() {
        let band = 24;
        for dy in [-30i32, -23, -4, 0, 4, 23, 30] {
            for (xa, xb) in [(500, 20), (20, 500), (100, 100)] {
                let a = el(ElementKind::Text, Some("a"), false, [xa, 100, xa + 40, 120]);
                let b = el(
                    ElementKind::Text,
                    Some("b"),
                    false,
                    [xb, 100 + dy, xb + 40, 120 + dy],
                );
                let sorted = sort_reading_order(&[a.clone(), b.clone()], band);
                let same_band = (a.bounds.center_y() - b.bounds.center_y()).abs() < band;
                let a_first = if same_band {
                    match xa.cmp(&xb) {
                        std::cmp::Ordering::Less => true,
                        std::cmp::Ordering::Greater => false,
                        std::cmp::Ordering::Equal => dy >= 0, // stable y order
                    }
                } else {
                    a.bounds.center_y() < b.bounds.center_y()
                };
                let expected = if a_first {
                    vec![a.clone(), b.clone()]
                } else {
                    vec![b.clone(), a.clone()]
                };
                assert_eq!(sorted, expected, "dy={dy} xa={xa} xb={xb}");
            }
        }
    }

    fn keyboard_screen(keys: usize, submit: Option<&str>) -> ScreenSnapshot {
        let mut elements = vec![
            el(ElementKind::Text, Some("Header"), false, [10, 40, 200, 80]),
            el(ElementKind::TextField, Some("query"), true, [10, 120, 380, 160]),
        ];
        for i in 0..keys {
            let x = 10 + (i as i32 % 10) * 38;
            let y = 560 + (i as i32 / 10) * 40;
            let letter = char::from(b'a' + (i as u8 % 26)).to_string();
            elements.push(el(
                ElementKind::Text,
                Some(&letter),
                false,
                [x, y, x + 30, y + 30],
            ));
        }
        if let Some(label) = submit {
            elements.push(el(ElementKind::Text, Some(label), false, [320, 640, 390, 670]));
        }
        ScreenSnapshot::from_elements(elements, 400, 800, false, "app", "s")
    }

    #[test]
    fn keyboard_detected_and_filtered_keeps_submit() {
        let screen = keyboard_screen(26, Some("search"));
        let (visible, filtered) = detect_keyboard(&screen);
        assert!(visible);
        let texts: Vec<_> = filtered
            .iter()
            .map(|e| e.text.clone().unwrap_or_default())
            .collect();
        assert!(texts.contains(&"search".to_owned()));
        assert!(texts.contains(&"Header".to_owned()));
        assert!(texts.contains(&"query".to_owned()));
        assert_eq!(filtered.len(), 3);
    }

    #[test]
    fn no_single_char_elements_means_no_keyboard() {
        let screen = keyboard_screen(0, None);
        let (visible, filtered) = detect_keyboard(&screen);
        assert!(!visible);
        assert_eq!(filtered, screen.elements);
    }

    #[test]
    fn five_keys_is_below_threshold() {
        let screen = keyboard_screen(5, None);
        let (visible, filtered) = detect_keyboard(&screen);
        assert!(!visible);
        assert_eq!(filtered, screen.elements);
    }

    #[test]
    fn caption_filter_removes_elements_fully_in_band() {
        let inside = el(ElementKind::Text, Some("caption"), false, [10, 700, 390, 760]);
        let straddling = el(ElementKind::Text, Some("edge"), false, [10, 600, 390, 700]);
        let top = el(ElementKind::Text, Some("top"), false, [10, 40, 200, 80]);
        let screen = ScreenSnapshot::from_elements(
            vec![inside, straddling.clone(), top.clone()],
            400,
            800,
            false,
            "app",
            "s",
        );
        let filtered = filter_caption_panel(&screen, 0.22);
        let texts: Vec<_> = filtered
            .elements
            .iter()
            .map(|e| e.text.clone().unwrap_or_default())
            .collect();
        assert_eq!(texts, vec!["top", "edge"]);
    }

    #[test]
    fn caption_filter_no_bottom_elements_unchanged() {
        let top = el(ElementKind::Text, Some("top"), false, [10, 40, 200, 80]);
        let screen = ScreenSnapshot::from_elements(vec![top], 400, 800, false, "app", "s");
        let filtered = filter_caption_panel(&screen, 0.22);
        assert_eq!(filtered.elements, screen.elements);
    }

    #[test]
    fn back_button_flagging_rule() {
        let mut elements = vec![
            el(ElementKind::Icon, None, true, [10, 20, 40, 60]), // top-left icon
            el(ElementKind::Icon, None, true, [300, 20, 340, 60]), // top-right
            el(ElementKind::Icon, None, true, [10, 400, 40, 440]), // mid-screen
            el(ElementKind::Text, Some("t"), false, [10, 20, 40, 60]), // wrong kind
        ];
        flag_back_buttons(&mut elements, 400, 800);
        let flags: Vec<_> = elements.iter().map(|e| e.is_back_button).collect();
        assert_eq!(flags, vec![true, false, false, false]);
    }

    #[test]
    fn screen_text_ids_extracts_ids() {
        let text = "(1) [Icon] (0, 0) to (5, 5)\n(2) [Text] \"x\" (0, 10) to (5, 15)";
        let ids = screen_text_ids(text);
        assert_eq!(ids.into_iter().collect::<Vec<_>>(), vec![1, 2]);
    }

    fn arb_element() -> impl Strategy<Value = UIElement> {
        let kind = prop_oneof![
            Just(ElementKind::Button),
            Just(ElementKind::Tab),
            Just(ElementKind::Icon),
            Just(ElementKind::Toggle),
            Just(ElementKind::Text),
            Just(ElementKind::TextField),
            Just(ElementKind::Image),
            Just(ElementKind::Container),
            Just(ElementKind::Other),
        ];
        (
            kind,
            proptest::option::of("[a-zA-Z0-9 \"\\\\]{0,12}"),
            any::<bool>(),
            0..380i32,
            0..780i32,
            1..40i32,
            1..40i32,
            any::<bool>(),
        )
            .prop_map(|(kind, text, clickable, x0, y0, w, h, back)| {
                let mut e = UIElement::new(
                    kind,
                    text.as_deref(),
                    clickable || kind == ElementKind::Tab,
                    BoundingBox::new(x0, y0, x0 + w, y0 + h),
                );
                e.is_back_button = back;
                e
            })
    }

    proptest! {
        #[test]
        fn serialized_line_round_trips(mut element in arb_element(), id in 1u32..500) {
            element.id = id;
            let line = format_element_line(&element);
            let parsed = parse_element_line(&line).unwrap();
            prop_assert_eq!(parsed, element);
        }

        #[test]
        fn reading_order_is_permutation(elements in proptest::collection::vec(arb_element(), 0..12)) {
            let sorted = sort_reading_order(&elements, 24);
            let mut a: Vec<String> = elements.iter().map(format_element_line).collect();
            let mut b: Vec<String> = sorted.iter().map(format_element_line).collect();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn keyboard_filter_never_touches_upper_screen(elements in proptest::collection::vec(arb_element(), 0..24)) {
            let screen = ScreenSnapshot::from_elements(elements, 400, 800, false, "app", "s");
            let (_, filtered) = detect_keyboard(&screen);
            for el in &screen.elements {
                if 3 * el.bounds.y0 < 2 * screen.height {
                    prop_assert!(filtered.contains(el));
                }
            }
        }

        #[test]
        fn serialization_is_injective(a in arb_element(), b in arb_element(), id in 1u32..100) {
            let mut a = a;
            let mut b = b;
            a.id = id;
            b.id = id;
            let same_tuple = a == b;
            let same_line = format_element_line(&a) == format_element_line(&b);
            prop_assert_eq!(same_tuple, same_line);
        }
    }
}
