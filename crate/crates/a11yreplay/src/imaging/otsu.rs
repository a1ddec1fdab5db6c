//! Otsu's method: the global threshold maximizing between-class variance
//! over the 256-bin histogram.

use super::PixelBuffer;

/// Returns the threshold in `[0, 255]` that maximizes between-class
/// variance, breaking ties toward the smallest threshold. Pixels strictly
/// above the threshold are foreground (see [`super::binarize`]).
///
/// A constant image degenerately returns its single value.
pub fn otsu_threshold(gray: &PixelBuffer) -> u8 {
    assert!(gray.is_gray(), "otsu needs a gray buffer");
    let mut hist = [0u64; 256];
    for &v in gray.data() {
        hist[v as usize] += 1;
    }

    let (min, max) = gray
        .data()
        .iter()
        .fold((255u8, 0u8), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if min == max {
        return min;
    }

    let total: u64 = gray.data().len() as u64;
    let total_sum: f64 = hist
        .iter()
        .enumerate()
        .map(|(v, &n)| v as f64 * n as f64)
        .sum();

    let mut best_t = 0u8;
    let mut best_var = f64::MIN;
    let mut count_bg = 0u64; // pixels <= t
    let mut sum_bg = 0.0;
    for t in 0..=255usize {
        count_bg += hist[t];
        sum_bg += t as f64 * hist[t] as f64;
        let count_fg = total - count_bg;
        if count_bg == 0 || count_fg == 0 {
            continue;
        }
        let w0 = count_bg as f64 / total as f64;
        let w1 = count_fg as f64 / total as f64;
        let mu0 = sum_bg / count_bg as f64;
        let mu1 = (total_sum - sum_bg) / count_fg as f64;
        let between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if between > best_var {
            best_var = between;
            best_t = t as u8;
        }
    }
    best_t
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: recomputes between-class variance per threshold
    /// from scratch with direct two-pass sums over the histogram.
    fn brute_force_otsu(gray: &PixelBuffer) -> u8 {
        let mut hist = [0u64; 256];
        for &v in gray.data() {
            hist[v as usize] += 1;
        }
        let total = gray.data().len() as f64;
        let mut best = (0u8, f64::MIN);
        for t in 0..=255usize {
            let mut c0 = 0.0;
            let mut s0 = 0.0;
            let mut c1 = 0.0;
            let mut s1 = 0.0;
            for (v, &n) in hist.iter().enumerate() {
                if v <= t {
                    c0 += n as f64;
                    s0 += (v * n as usize) as f64;
                } else {
                    c1 += n as f64;
                    s1 += (v * n as usize) as f64;
                }
            }
            if c0 == 0.0 || c1 == 0.0 {
                continue;
            }
            let var = (c0 / total) * (c1 / total) * (s0 / c0 - s1 / c1).powi(2);
            if var > best.1 {
                best = (t as u8, var);
            }
        }
        best.0
    }

    #[test]
    fn bimodal_image_separates_the_classes() {
        let mut buf = PixelBuffer::new_filled(10, 10, 1, 50);
        for i in 0..50 {
            buf.put(i % 10, i / 10, 0, 200);
        }
        let t = otsu_threshold(&buf);
        assert!((50..200).contains(&t), "t={t}");
    }

    #[test]
    fn constant_image_returns_its_value() {
        let buf = PixelBuffer::new_filled(6, 6, 1, 128);
        assert_eq!(otsu_threshold(&buf), 128);
    }

    #[test]
    fn matches_brute_force_on_100_random_images() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for case in 0..100 {
            let mut buf = PixelBuffer::new_filled(32, 32, 1, 0);
            for y in 0..32 {
                for x in 0..32 {
                    buf.put(x, y, 0, rng.gen());
                }
            }
            // Guarantee at least two distinct values so the degenerate
            // constant-image rule stays out of the comparison.
            buf.put(0, 0, 0, 0);
            buf.put(1, 0, 0, 255);
            assert_eq!(
                otsu_threshold(&buf),
                brute_force_otsu(&buf),
                "case {case}"
            );
        }
    }
}
