//! Small drawing helpers over RGB pixel buffers, shared by the synthetic
//! renderer and report-frame annotation.

use super::PixelBuffer;

pub type Rgb = [u8; 3];

#[inline]
fn put_rgb(buf: &mut PixelBuffer, x: i32, y: i32, color: Rgb) {
    if x < 0 || y < 0 || x as usize >= buf.width() || y as usize >= buf.height() {
        return;
    }
    for (c, &v) in color.iter().enumerate() {
        buf.put(x as usize, y as usize, c, v);
    }
}

/// Fills `[x0, x1) x [y0, y1)`, clipped to the buffer.
pub fn fill_rect(buf: &mut PixelBuffer, x0: i32, y0: i32, x1: i32, y1: i32, color: Rgb) {
    for y in y0.max(0)..y1.min(buf.height() as i32) {
        for x in x0.max(0)..x1.min(buf.width() as i32) {
            put_rgb(buf, x, y, color);
        }
    }
}

/// Strokes the rectangle border with the given thickness, clipped.
pub fn stroke_rect(
    buf: &mut PixelBuffer,
    x0: i32,
    y0: i32,
    x1: i32,
    y1: i32,
    thickness: i32,
    color: Rgb,
) {
    fill_rect(buf, x0, y0, x1, y0 + thickness, color);
    fill_rect(buf, x0, y1 - thickness, x1, y1, color);
    fill_rect(buf, x0, y0, x0 + thickness, y1, color);
    fill_rect(buf, x1 - thickness, y0, x1, y1, color);
}

/// Fills a rectangle with rounded corners of the given radius.
pub fn fill_rounded_rect(
    buf: &mut PixelBuffer,
    x0: i32,
    y0: i32,
    x1: i32,
    y1: i32,
    radius: i32,
    color: Rgb,
) {
    let r = radius.max(0);
    for y in y0.max(0)..y1.min(buf.height() as i32) {
        for x in x0.max(0)..x1.min(buf.width() as i32) {
            let dx = if x < x0 + r {
                x0 + r - x
            } else if x >= x1 - r {
                x - (x1 - r - 1)
            } else {
                0
            };
            let dy = if y < y0 + r {
                y0 + r - y
            } else if y >= y1 - r {
                y - (y1 - r - 1)
            } else {
                0
            };
            if dx * dx + dy * dy <= r * r {
                put_rgb(buf, x, y, color);
            }
        }
    }
}

/// Bresenham line with square brush of the given thickness.
pub fn draw_line(
    buf: &mut PixelBuffer,
    (mut x0, mut y0): (i32, i32),
    (x1, y1): (i32, i32),
    thickness: i32,
    color: Rgb,
) {
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let half = thickness / 2;
    loop {
        for oy in -half..=half {
            for ox in -half..=half {
                put_rgb(buf, x0 + ox, y0 + oy, color);
            }
        }
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
}
