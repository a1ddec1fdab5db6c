//! Deterministic synthetic renderer: turns a simulator screen definition
//! into pixels so the pixel-based heuristics have something real to chew
//! on.
//!
//! Text is drawn as word blobs: one dark rectangle per word, capped at 60%
//! of the text box width and separated by 6px gaps, so a genuine underline
//! is the only stroke in a text patch that can span 75% of its width.
//! Underlined elements get a solid 2px line across the full text box.

use crate::device_sim::{AccessibilityFeatureState, ScreenDef};
use crate::ui_model::{BoundingBox, ElementKind};

use super::draw::{fill_rect, fill_rounded_rect, stroke_rect, Rgb};
use super::PixelBuffer;

const BACKGROUND: Rgb = [255, 255, 255];
const INK: Rgb = [30, 30, 30];
const CONTAINER_FILL: Rgb = [229, 229, 234];
const ICON_FILL: Rgb = [60, 60, 60];
const IMAGE_FILL: Rgb = [200, 200, 200];
const FIELD_BORDER: Rgb = [150, 150, 150];

/// Base word-blob height in pixels before Dynamic Type scaling.
const BASE_FONT_PX: f64 = 13.0;
/// Gap between word blobs; wide enough that edge runs never bridge words.
const WORD_GAP_PX: i32 = 6;
/// No single word blob may exceed this fraction of its text box width.
const MAX_BLOB_FRAC: f64 = 0.6;

/// Renders the elements visible on page 0. Pure function of its inputs.
pub fn render_screen(
    screen: &ScreenDef,
    feature: &AccessibilityFeatureState,
    width: i32,
    height: i32,
) -> PixelBuffer {
    render_screen_page(screen, feature, width, height, 0)
}

/// Renders the elements visible at the given scroll offset.
pub fn render_screen_page(
    screen: &ScreenDef,
    feature: &AccessibilityFeatureState,
    width: i32,
    height: i32,
    scroll_offset: i32,
) -> PixelBuffer {
    let mut buf = PixelBuffer::new_filled(width.max(1) as usize, height.max(1) as usize, 3, 0);
    fill_rect(&mut buf, 0, 0, width, height, BACKGROUND);

    let size = feature.dynamic_type_size;
    let visible: Vec<_> = screen
        .elements
        .iter()
        .filter(|d| d.page.visible_at(scroll_offset))
        .collect();

    // Containers first so text and icons draw on top of the fills.
    if feature.button_shapes_on {
        for def in &visible {
            if matches!(
                def.kind,
                ElementKind::Button | ElementKind::Tab | ElementKind::Container
            ) {
                let b = def.box_for(size);
                fill_rounded_rect(&mut buf, b.x0, b.y0, b.x1, b.y1, 8, CONTAINER_FILL);
            }
        }
    }

    for def in &visible {
        let b = def.box_for(size);
        match def.kind {
            ElementKind::Icon => {
                let inset_x = b.width() / 5;
                let inset_y = b.height() / 5;
                fill_rect(
                    &mut buf,
                    b.x0 + inset_x,
                    b.y0 + inset_y,
                    b.x1 - inset_x,
                    b.y1 - inset_y,
                    ICON_FILL,
                );
            }
            ElementKind::Image => {
                fill_rect(&mut buf, b.x0, b.y0, b.x1, b.y1, IMAGE_FILL);
            }
            ElementKind::TextField => {
                stroke_rect(&mut buf, b.x0, b.y0, b.x1, b.y1, 1, FIELD_BORDER);
            }
            ElementKind::Toggle => {
                fill_rounded_rect(&mut buf, b.x0, b.y0, b.x1, b.y1, b.height() / 2, IMAGE_FILL);
            }
            _ => {}
        }
        if matches!(
            def.kind,
            ElementKind::Text | ElementKind::Button | ElementKind::Tab
        ) {
            if let Some(text) = def.text.as_deref() {
                if !text.is_empty() {
                    draw_text_blobs(&mut buf, &b, text, def.underlined, feature);
                }
            }
        }
    }
    buf
}

/// Draws one dark rectangle per word plus the optional underline.
fn draw_text_blobs(
    buf: &mut PixelBuffer,
    bounds: &BoundingBox,
    text: &str,
    underlined: bool,
    feature: &AccessibilityFeatureState,
) {
    let box_w = bounds.width();
    let box_h = bounds.height();
    if box_w < 4 || box_h < 4 {
        return;
    }

    let scale = feature.dynamic_type_size.font_scale();
    let mut font_h = (BASE_FONT_PX * scale).round() as i32;
    if feature.bold_text_on {
        font_h += 1;
    }
    let reserve = if underlined { 10 } else { 4 };
    let blob_h = font_h.min(box_h - reserve).max(2);
    let blob_top = bounds.y0 + 2;
    let blob_bottom = blob_top + blob_h;

    let cap = ((box_w as f64) * MAX_BLOB_FRAC).floor() as i32;
    let mut x = bounds.x0 + 3;
    for word in text.split_whitespace() {
        let natural = 6 * word.chars().count() as i32 + 4;
        let blob_w = natural.clamp(8, cap.max(8));
        if x + 8 > bounds.x1 - 3 {
            break; // out of room; no wrapping
        }
        let end = (x + blob_w).min(bounds.x1 - 3);
        fill_rect(buf, x, blob_top, end, blob_bottom, INK);
        x = end + WORD_GAP_PX;
    }

    if underlined {
        let y = (blob_bottom + 2).min(bounds.y1 - 4);
        fill_rect(buf, bounds.x0, y, bounds.x1, y + 2, INK);
    }
}
