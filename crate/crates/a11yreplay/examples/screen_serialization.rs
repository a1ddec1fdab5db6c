//! Build a screen snapshot, serialize it into the plain-text element list
//! the agents consume, and parse a line back through the reference
//! grammar.
//!
//! ```bash
//! cargo run -p a11yreplay --example screen_serialization
//! ```

use a11yreplay::ui_model::{
    detect_keyboard, format_element_line, parse_element_line, serialize_elements, BoundingBox,
    ElementKind, ScreenSnapshot, UIElement,
};

fn main() {
    let elements = vec![
        UIElement::new(ElementKind::Text, Some("Podcasts"), false, BoundingBox::new(20, 40, 200, 80)),
        UIElement::new(ElementKind::Button, Some("Try It Free"), true, BoundingBox::new(194, 563, 380, 640)),
        UIElement::new(ElementKind::Icon, None, true, BoundingBox::new(10, 30, 50, 70)),
        UIElement::new(ElementKind::Tab, Some("Search"), true, BoundingBox::new(140, 560, 260, 610)),
    ];
    let screen = ScreenSnapshot::from_elements(elements, 400, 800, false, "demo", "home");

    println!("Serialized element list:\n");
    let text = serialize_elements(&screen);
    println!("{text}\n");

    let first_line = text.lines().next().unwrap();
    let parsed = parse_element_line(first_line).unwrap();
    println!("Round-tripped first line -> id {} kind {} at {:?}", parsed.id, parsed.kind, parsed.bounds);
    assert_eq!(format_element_line(&parsed), first_line);

    let (keyboard_visible, _) = detect_keyboard(&screen);
    println!("Keyboard detected: {keyboard_visible}");
}
