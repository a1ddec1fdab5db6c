//! Synthetic on-screen keyboard injected into snapshots while a text field
//! is focused, mirroring what pixel-based detection would report: one
//! single-character text element per key plus a labeled submit key.

use crate::ui_model::{BoundingBox, ElementKind, UIElement};

const ROWS: [&str; 3] = ["qwertyuiop", "asdfghjkl", "zxcvbnm"];

/// Builds the key elements for a keyboard laid out in the lower third of a
/// `width` x `height` screen. Keys sit just above the caption band so the
/// two filters compose in either order.
pub fn key_elements(width: i32, height: i32, submit_label: &str) -> Vec<UIElement> {
    let mut keys = Vec::new();
    let top = height * 68 / 100;
    let row_h = height * 3 / 100;
    for (r, row) in ROWS.iter().enumerate() {
        let y0 = top + r as i32 * (row_h + 2);
        let count = row.chars().count() as i32;
        let key_w = (width - 20) / count;
        for (c, ch) in row.chars().enumerate() {
            let x0 = 10 + c as i32 * key_w;
            keys.push(UIElement::new(
                ElementKind::Text,
                Some(&ch.to_string()),
                false,
                BoundingBox::new(x0, y0, x0 + key_w - 4, y0 + row_h),
            ));
        }
    }
    // Submit key to the right of the bottom row.
    let y0 = top + 2 * (row_h + 2);
    keys.push(UIElement::new(
        ElementKind::Text,
        Some(submit_label),
        false,
        BoundingBox::new(width * 78 / 100, y0, width - 10, y0 + row_h),
    ));
    keys
}
