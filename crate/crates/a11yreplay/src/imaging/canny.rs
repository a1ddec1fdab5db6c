//! Canny edge detection over 8-bit gray buffers.
//!
//! Pipeline: 5x5 Gaussian blur (the classic integer sigma~1.4 kernel) ->
//! Sobel gradients -> non-maximum suppression over four quantized
//! directions -> double threshold -> hysteresis by 8-connectivity.
//!
//! The blur and gradients are exact integer arithmetic, so the edge map is
//! invariant under adding a constant to every pixel (absent saturation).

use super::{EdgeMap, PixelBuffer};

/// Classic 5x5 Gaussian kernel for sigma 1.4; weights sum to 159.
const GAUSSIAN: [[i64; 5]; 5] = [
    [2, 4, 5, 4, 2],
    [4, 9, 12, 9, 4],
    [5, 12, 15, 12, 5],
    [4, 9, 12, 9, 4],
    [2, 4, 5, 4, 2],
];
const GAUSSIAN_SUM: i64 = 159;

fn clamp(v: i64, lo: i64, hi: i64) -> usize {
    v.max(lo).min(hi) as usize
}

/// Blur with replicated borders; integer rounding keeps +c shifts exact.
fn gaussian_blur(gray: &PixelBuffer) -> Vec<i64> {
    let (w, h) = (gray.width(), gray.height());
    let mut out = vec![0i64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0i64;
            for (ky, row) in GAUSSIAN.iter().enumerate() {
                for (kx, &weight) in row.iter().enumerate() {
                    let sx = clamp(x as i64 + kx as i64 - 2, 0, w as i64 - 1);
                    let sy = clamp(y as i64 + ky as i64 - 2, 0, h as i64 - 1);
                    acc += weight * gray.sample(sx, sy, 0) as i64;
                }
            }
            // Round-to-nearest division.
            out[y * w + x] = (acc + GAUSSIAN_SUM / 2) / GAUSSIAN_SUM;
        }
    }
    out
}

fn sobel(blurred: &[i64], w: usize, h: usize) -> (Vec<i64>, Vec<i64>) {
    let mut gx = vec![0i64; w * h];
    let mut gy = vec![0i64; w * h];
    let at = |x: i64, y: i64| -> i64 {
        blurred[clamp(y, 0, h as i64 - 1) * w + clamp(x, 0, w as i64 - 1)]
    };
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let i = y as usize * w + x as usize;
            gx[i] = -at(x - 1, y - 1) + at(x + 1, y - 1) - 2 * at(x - 1, y) + 2 * at(x + 1, y)
                - at(x - 1, y + 1)
                + at(x + 1, y + 1);
            gy[i] = -at(x - 1, y - 1) - 2 * at(x, y - 1) - at(x + 1, y - 1)
                + at(x - 1, y + 1)
                + 2 * at(x, y + 1)
                + at(x + 1, y + 1);
        }
    }
    (gx, gy)
}

/// Quantizes a gradient direction to 0, 45, 90, or 135 degrees.
fn quantize_direction(gx: i64, gy: i64) -> u8 {
    let angle = (gy as f64).atan2(gx as f64).to_degrees();
    let angle = if angle < 0.0 { angle + 180.0 } else { angle };
    if !(22.5..157.5).contains(&angle) {
        0
    } else if angle < 67.5 {
        45
    } else if angle < 112.5 {
        90
    } else {
        135
    }
}

/// Runs the full Canny pipeline. `low`/`high` are hysteresis thresholds on
/// the Sobel gradient magnitude; `0 <= low < high` is required.
pub fn canny_edges(gray: &PixelBuffer, low: f64, high: f64) -> EdgeMap {
    assert!(gray.is_gray(), "canny needs a gray buffer");
    assert!(low >= 0.0 && low < high, "need 0 <= low < high");
    let (w, h) = (gray.width(), gray.height());
    let mut edges = EdgeMap::new(w, h);
    if w < 3 || h < 3 {
        return edges;
    }

    let blurred = gaussian_blur(gray);
    let (gx, gy) = sobel(&blurred, w, h);
    let mag: Vec<f64> = gx
        .iter()
        .zip(&gy)
        .map(|(&x, &y)| ((x * x + y * y) as f64).sqrt())
        .collect();

    // Non-maximum suppression. Ties break toward the positive direction so
    // a symmetric step keeps a single-pixel line.
    let mut thinned = vec![0.0f64; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            let m = mag[i];
            if m == 0.0 {
                continue;
            }
            let (neg, pos) = match quantize_direction(gx[i], gy[i]) {
                0 => (mag[i - 1], mag[i + 1]),
                45 => (mag[i - w - 1], mag[i + w + 1]),
                90 => (mag[i - w], mag[i + w]),
                _ => (mag[i - w + 1], mag[i + w - 1]),
            };
            // `>=` toward the negative side, `>` toward the positive side:
            // a two-pixel plateau keeps exactly one pixel.
            if m >= neg && m > pos {
                thinned[i] = m;
            }
        }
    }

    // Double threshold + hysteresis (BFS from strong pixels).
    let mut strong: Vec<usize> = Vec::new();
    let mut state = vec![0u8; w * h]; // 0 none, 1 weak, 2 strong
    for (i, &m) in thinned.iter().enumerate() {
        if m >= high {
            state[i] = 2;
            strong.push(i);
        } else if m >= low {
            state[i] = 1;
        }
    }
    let mut queue = strong;
    while let Some(i) = queue.pop() {
        let (x, y) = (i % w, i / w);
        edges.set(x, y, true);
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let ni = ny as usize * w + nx as usize;
                if state[ni] == 1 {
                    state[ni] = 2;
                    queue.push(ni);
                }
            }
        }
    }
    edges
}
