//! Accessibility-issue detectors: Dynamic Type growth, Button Shapes
//! underline correctness, VoiceOver focus loops, and missing VoiceOver
//! elements. Detectors are pure functions over snapshots, pixels, and
//! traversal records; every threshold flows from [`HeuristicConfig`].

use serde::{Deserialize, Serialize};

use crate::imaging::{
    binarize, canny_edges, extract_patch, hough_horizontal_lines, otsu_threshold, to_grayscale,
    ImagingError, PixelBuffer,
};
use crate::ui_model::{BoundingBox, ElementKind, ScreenSnapshot, UIElement};
use crate::voiceover::{ActivationResult, VisitTrace};

/// Detector thresholds. Defaults: 50% partial-similarity floor for text
/// matching, 10% minimum area growth per Dynamic Type increment, 75% width
/// span for an underline, icon-text gap capped at half the icon width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicConfig {
    pub partial_similarity_min: f64,
    pub growth_min: f64,
    pub underline_span_min: f64,
    pub icon_gap_max_frac: f64,
    /// Canny hysteresis thresholds used by the underline detector.
    pub canny_low: f64,
    pub canny_high: f64,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            partial_similarity_min: 0.50,
            growth_min: 0.10,
            underline_span_min: 0.75,
            icon_gap_max_frac: 0.5,
            canny_low: 40.0,
            canny_high: 100.0,
        }
    }
}

impl HeuristicConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("partial_similarity_min", self.partial_similarity_min),
            ("growth_min", self.growth_min),
            ("underline_span_min", self.underline_span_min),
            ("icon_gap_max_frac", self.icon_gap_max_frac),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(format!("{name} must be in (0, 1], got {v}"));
            }
        }
        if !(self.canny_low >= 0.0 && self.canny_low < self.canny_high) {
            return Err(format!(
                "need 0 <= canny_low < canny_high, got {} and {}",
                self.canny_low, self.canny_high
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FindingKind {
    DynamicTypeNoGrowth,
    IconNoGrowth,
    ButtonShapeUnderlinedInContainer,
    ClickableTextNotUnderlined,
    VoiceOverLoop,
    VoiceOverMissingElement,
}

impl FindingKind {
    fn is_voiceover(self) -> bool {
        matches!(
            self,
            FindingKind::VoiceOverLoop | FindingKind::VoiceOverMissingElement
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Fail,
    Pass,
}

/// Overlay color class for a finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColorRole {
    IssueOrange,
    IssueCyan,
    PassGreen,
}

/// One flagged check: a pass or fail verdict anchored to a screen region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicFinding {
    pub kind: FindingKind,
    pub region: BoundingBox,
    pub screen_id: String,
    pub verdict: Verdict,
    pub detail: String,
    pub color_role: ColorRole,
}

impl HeuristicFinding {
    /// Builds a finding with the color derived from verdict and kind:
    /// passes are green, VoiceOver issues cyan, everything else orange.
    pub fn new(
        kind: FindingKind,
        region: BoundingBox,
        screen_id: impl Into<String>,
        verdict: Verdict,
        detail: impl Into<String>,
    ) -> Self {
        let color_role = match verdict {
            Verdict::Pass => ColorRole::PassGreen,
            Verdict::Fail if kind.is_voiceover() => ColorRole::IssueCyan,
            Verdict::Fail => ColorRole::IssueOrange,
        };
        let detail = detail.into();
        debug_assert!(
            verdict == Verdict::Pass || !detail.is_empty(),
            "fail findings carry a detail"
        );
        HeuristicFinding {
            kind,
            region,
            screen_id: screen_id.into(),
            verdict,
            detail,
            color_role,
        }
    }
}

fn levenshtein(a: &[char], b: &[char]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut row = vec![i + 1];
        for (j, cb) in b.iter().enumerate() {
            let cost = if ca == cb { prev[j] } else { 1 + prev[j].min(prev[j + 1]).min(row[j]) };
            row.push(cost);
        }
        prev = row;
    }
    prev[b.len()]
}

/// Windowed similarity in `[0, 1]`: the best match of the shorter string
/// against every equal-length window of the longer, scored by edit
/// distance. Both empty scores 1; one empty scores 0.
pub fn partial_similarity(a: &str, b: &str) -> f64 {
    let a_chars: Vec<char> = a.chars().collect();
    let b_chars: Vec<char> = b.chars().collect();
    if a_chars.is_empty() && b_chars.is_empty() {
        return 1.0;
    }
    if a_chars.is_empty() || b_chars.is_empty() {
        return 0.0;
    }
    let (short, long) = if a_chars.len() <= b_chars.len() {
        (&a_chars, &b_chars)
    } else {
        (&b_chars, &a_chars)
    };
    let n = short.len();
    let mut best = 0.0f64;
    for start in 0..=(long.len() - n) {
        let window = &long[start..start + n];
        let d = levenshtein(short, window);
        best = best.max(1.0 - d as f64 / n.max(1) as f64);
    }
    best
}

fn is_text_element(el: &UIElement) -> bool {
    el.kind == ElementKind::Text && el.text.as_deref().map(|t| !t.is_empty()) == Some(true)
}

/// Pairs text elements across two snapshots of the same screen by greedy
/// best-first partial similarity. Each element matches at most once; pairs
/// scoring below `partial_similarity_min` are rejected, and unmatched
/// elements are excluded. Ties break toward reading order.
pub fn match_text_elements<'a>(
    base: &'a ScreenSnapshot,
    grown: &'a ScreenSnapshot,
    cfg: &HeuristicConfig,
) -> Vec<(&'a UIElement, &'a UIElement)> {
    let base_texts: Vec<&UIElement> = base.elements.iter().filter(|e| is_text_element(e)).collect();
    let grown_texts: Vec<&UIElement> =
        grown.elements.iter().filter(|e| is_text_element(e)).collect();

    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (bi, b) in base_texts.iter().enumerate() {
        for (gi, g) in grown_texts.iter().enumerate() {
            let sim = partial_similarity(
                b.text.as_deref().unwrap_or(""),
                g.text.as_deref().unwrap_or(""),
            );
            if sim >= cfg.partial_similarity_min {
                candidates.push((sim, bi, gi));
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    let mut base_used = vec![false; base_texts.len()];
    let mut grown_used = vec![false; grown_texts.len()];
    let mut pairs = Vec::new();
    for (_, bi, gi) in candidates {
        if !base_used[bi] && !grown_used[gi] {
            base_used[bi] = true;
            grown_used[gi] = true;
            pairs.push((base_texts[bi], grown_texts[gi]));
        }
    }
    pairs
}

/// Greedily pairs icons with the text element to their immediate right.
///
/// Pairs minimize the horizontal gap (`text.x0 - icon.x1`, non-negative);
/// icons are excluded when the gap exceeds `icon_gap_max_frac` of the icon
/// width or when the icon's top and bottom are not bounded by the text
/// element's box. Each icon and text element matches at most once.
pub fn pair_icons<'a>(
    snapshot: &'a ScreenSnapshot,
    cfg: &HeuristicConfig,
) -> Vec<(&'a UIElement, &'a UIElement)> {
    let icons: Vec<&UIElement> = snapshot
        .elements
        .iter()
        .filter(|e| e.kind == ElementKind::Icon)
        .collect();
    let texts: Vec<&UIElement> = snapshot.elements.iter().filter(|e| is_text_element(e)).collect();

    let mut candidates: Vec<(i32, usize, usize)> = Vec::new();
    for (ii, icon) in icons.iter().enumerate() {
        for (ti, text) in texts.iter().enumerate() {
            let gap = text.bounds.x0 - icon.bounds.x1;
            if gap < 0 {
                continue;
            }
            let max_gap_bp = icon.bounds.width() as i64 * basis_points(cfg.icon_gap_max_frac);
            if gap as i64 * 10_000 > max_gap_bp {
                continue;
            }
            let bounded =
                icon.bounds.y0 >= text.bounds.y0 && icon.bounds.y1 <= text.bounds.y1;
            if !bounded {
                continue;
            }
            candidates.push((gap, ii, ti));
        }
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut icon_used = vec![false; icons.len()];
    let mut text_used = vec![false; texts.len()];
    let mut pairs = Vec::new();
    for (_, ii, ti) in candidates {
        if !icon_used[ii] && !text_used[ti] {
            icon_used[ii] = true;
            text_used[ti] = true;
            pairs.push((icons[ii], texts[ti]));
        }
    }
    pairs
}

/// Fractional thresholds resolve to basis points so boundary comparisons
/// are exact integer arithmetic (10% growth of area 14400 is exactly
/// 15840, not a float one ulp above it).
fn basis_points(fraction: f64) -> i64 {
    (fraction * 10_000.0).round() as i64
}

fn area_grew(base: &BoundingBox, grown: &BoundingBox, growth_min: f64) -> bool {
    grown.area() * 10_000 >= base.area() * (10_000 + basis_points(growth_min))
}

/// Compares two snapshots of the same screen captured one Dynamic Type
/// increment apart. Each matched text pair and each retained icon pair
/// yields exactly one finding: pass when the box area grew by at least
/// `growth_min`, fail otherwise.
pub fn dynamic_type_check(
    base: &ScreenSnapshot,
    grown: &ScreenSnapshot,
    cfg: &HeuristicConfig,
) -> Vec<HeuristicFinding> {
    let mut findings = Vec::new();
    let pairs = match_text_elements(base, grown, cfg);

    let base_icons = pair_icons(base, cfg);
    let grown_icons = pair_icons(grown, cfg);
    let icon_for = |pairs: &[(&UIElement, &UIElement)], text_id: u32| -> Option<BoundingBox> {
        pairs
            .iter()
            .find(|(_, t)| t.id == text_id)
            .map(|(i, _)| i.bounds)
    };

    for (b, g) in &pairs {
        let grew = area_grew(&b.bounds, &g.bounds, cfg.growth_min);
        let pct = if b.bounds.area() > 0 {
            100.0 * (g.bounds.area() as f64 / b.bounds.area() as f64 - 1.0)
        } else {
            0.0
        };
        let label = g.text.as_deref().unwrap_or("");
        findings.push(HeuristicFinding::new(
            FindingKind::DynamicTypeNoGrowth,
            g.bounds,
            grown.screen_id.clone(),
            if grew { Verdict::Pass } else { Verdict::Fail },
            format!(
                "text \"{label}\" area changed {pct:+.1}% (needs >= {:.0}%)",
                cfg.growth_min * 100.0
            ),
        ));

        if let (Some(bi), Some(gi)) = (icon_for(&base_icons, b.id), icon_for(&grown_icons, g.id)) {
            let icon_grew = area_grew(&bi, &gi, cfg.growth_min);
            let ipct = if bi.area() > 0 {
                100.0 * (gi.area() as f64 / bi.area() as f64 - 1.0)
            } else {
                0.0
            };
            findings.push(HeuristicFinding::new(
                FindingKind::IconNoGrowth,
                gi,
                grown.screen_id.clone(),
                if icon_grew { Verdict::Pass } else { Verdict::Fail },
                format!(
                    "icon beside \"{label}\" area changed {ipct:+.1}% (needs >= {:.0}%)",
                    cfg.growth_min * 100.0
                ),
            ));
        }
    }
    findings
}

/// Glyph-only labels (no alphanumeric content) are exempt from the
/// underline requirement.
fn is_glyph_only(text: &str) -> bool {
    !text.chars().any(|c| c.is_alphanumeric())
}

/// Pixel-level underline decision for one text box.
pub fn detect_underline(
    pixels: &PixelBuffer,
    bounds: &BoundingBox,
    cfg: &HeuristicConfig,
) -> Result<bool, ImagingError> {
    let patch = extract_patch(pixels, bounds)?;
    let gray = to_grayscale(&patch);
    let binary = binarize(&gray, otsu_threshold(&gray));
    let edges = canny_edges(&binary, cfg.canny_low, cfg.canny_high);
    Ok(!hough_horizontal_lines(&edges, cfg.underline_span_min).is_empty())
}

/// Checks Button Shapes conventions on one screen captured with the
/// feature enabled.
///
/// Text inside a clickable container (Button or Tab) must not be
/// underlined; bare clickable text must be. Returns one finding per
/// checked element plus notes for elements skipped (zero-area boxes,
/// glyph-only labels).
pub fn button_shapes_check(
    snapshot: &ScreenSnapshot,
    pixels: &PixelBuffer,
    cfg: &HeuristicConfig,
) -> (Vec<HeuristicFinding>, Vec<String>) {
    let containers: Vec<&UIElement> = snapshot
        .elements
        .iter()
        .filter(|e| matches!(e.kind, ElementKind::Button | ElementKind::Tab) && e.clickable)
        .collect();

    let mut findings = Vec::new();
    let mut notes = Vec::new();
    for el in snapshot.elements.iter().filter(|e| is_text_element(e)) {
        let text = el.text.as_deref().unwrap_or("");
        let container = containers.iter().find(|c| c.bounds.contains_box(&el.bounds));

        if el.bounds.area() == 0 {
            notes.push(format!(
                "skipped \"{text}\" on {}: zero-area text box",
                snapshot.screen_id
            ));
            continue;
        }

        let underlined = match detect_underline(pixels, &el.bounds, cfg) {
            Ok(u) => u,
            Err(e) => {
                notes.push(format!(
                    "skipped \"{text}\" on {}: {e}",
                    snapshot.screen_id
                ));
                continue;
            }
        };

        if container.is_some() {
            let (verdict, detail) = if underlined {
                (
                    Verdict::Fail,
                    format!("\"{text}\" sits inside a button shape and is also underlined"),
                )
            } else {
                (Verdict::Pass, format!("\"{text}\" inside a button shape, no underline"))
            };
            findings.push(HeuristicFinding::new(
                FindingKind::ButtonShapeUnderlinedInContainer,
                el.bounds,
                snapshot.screen_id.clone(),
                verdict,
                detail,
            ));
        } else if el.clickable {
            if is_glyph_only(text) {
                notes.push(format!(
                    "skipped \"{text}\" on {}: glyph-only label exempt from underlining",
                    snapshot.screen_id
                ));
                continue;
            }
            let (verdict, detail) = if underlined {
                (Verdict::Pass, format!("clickable text \"{text}\" is underlined"))
            } else {
                (
                    Verdict::Fail,
                    format!("clickable text \"{text}\" outside any button shape is not underlined"),
                )
            };
            findings.push(HeuristicFinding::new(
                FindingKind::ClickableTextNotUnderlined,
                el.bounds,
                snapshot.screen_id.clone(),
                verdict,
                detail,
            ));
        }
    }
    (findings, notes)
}

/// Converts traversal records into findings: one `VoiceOverLoop` per loop
/// record and one `VoiceOverMissingElement` per missing activation.
pub fn collect_vo_findings(
    traces: &[VisitTrace],
    activations: &[ActivationResult],
) -> Vec<HeuristicFinding> {
    let mut findings = Vec::new();
    for trace in traces {
        if let Some(rec) = &trace.loop_record {
            findings.push(HeuristicFinding::new(
                FindingKind::VoiceOverLoop,
                rec.region,
                rec.screen_id.clone(),
                Verdict::Fail,
                format!(
                    "focus returned to an already-visited element (visit {} repeats visit {}); {}",
                    rec.repeat_index,
                    rec.first_index,
                    if rec.broke_out {
                        "traversal continued below the loop"
                    } else {
                        "no element below to continue from"
                    }
                ),
            ));
        }
    }
    for activation in activations.iter().filter(|a| a.missing) {
        findings.push(HeuristicFinding::new(
            FindingKind::VoiceOverMissingElement,
            activation.target_box,
            activation.screen_id.clone(),
            Verdict::Fail,
            format!(
                "detected element at ({}, {}) to ({}, {}) cannot be reached by the screen reader",
                activation.target_box.x0,
                activation.target_box.y0,
                activation.target_box.x1,
                activation.target_box.y1
            ),
        ));
    }
    findings
}
