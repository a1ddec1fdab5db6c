//! Report export: chapter building, frame annotation, and the on-disk
//! artifact (numbered PNG frames, a WebVTT chapter manifest, and
//! `report.json`).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::heuristics::{ColorRole, HeuristicFinding, Verdict};
use crate::imaging::{self, PixelBuffer, Rgb};
use crate::recording::{FinalStatus, Overlay, RecordingEvent, SessionRecording};
use crate::runner::TestSpec;
use crate::ui_model::Direction;

/// Exported recordings are presented sped up by this factor; chapter cue
/// times in the manifest are divided by it.
pub const DEFAULT_SPEEDUP: f64 = 2.5;
/// Nominal duration of an issue chapter inserted at a finding.
pub const ISSUE_CHAPTER_MS: u64 = 1500;
/// report.json schema version.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Annotation colors.
pub const COLOR_ISSUE_ORANGE: Rgb = [0xFF, 0x8C, 0x00];
pub const COLOR_ISSUE_CYAN: Rgb = [0x00, 0xB7, 0xEB];
pub const COLOR_PASS_GREEN: Rgb = [0x2E, 0x8B, 0x57];
pub const COLOR_CURSOR_PINK: Rgb = [0xFF, 0x69, 0xB4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChapterKind {
    Step,
    Issue,
}

/// A named, non-overlapping span of the recording timeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChapterMarker {
    pub start_ms: u64,
    pub end_ms: u64,
    pub title: String,
    pub kind: ChapterKind,
    /// Index into the report's findings for issue chapters.
    #[serde(default)]
    pub finding_ref: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub at_ms: u64,
    pub file: String,
}

/// The exported report, mirrored byte-for-byte in `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub schema_version: u32,
    pub spec: TestSpec,
    pub status: FinalStatus,
    pub speedup_factor: f64,
    pub chapters: Vec<ChapterMarker>,
    pub findings: Vec<HeuristicFinding>,
    pub frames: Vec<FrameEntry>,
    /// Findings not referenced by any chapter (passes).
    pub residual_findings: Vec<usize>,
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("cannot write to {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("frame encode failed: {0}")]
    Frame(#[from] imaging::ImagingError),
    #[error("report serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

/// Builds the chapter list: one step chapter per boundary event, one issue
/// chapter per fail finding at the finding's timestamp. Chapters partition
/// the recording span exactly; issue chapters split whatever step chapter
/// they land inside.
pub fn build_chapters(recording: &SessionRecording) -> Vec<ChapterMarker> {
    let Some((start, end)) = recording.span_ms() else {
        return Vec::new();
    };
    let end = end.max(start + 1);

    // Step boundaries in timeline order.
    let mut steps: Vec<(u64, String)> = recording
        .events
        .iter()
        .filter_map(|e| match &e.event {
            RecordingEvent::ChapterBoundary { title } => Some((e.at_ms, title.clone())),
            _ => None,
        })
        .collect();
    steps.sort_by_key(|(ts, _)| *ts);

    // Issue windows, sequenced so coincident findings stay disjoint.
    let mut fails: Vec<(u64, usize, String)> = Vec::new();
    let mut finding_index = 0usize;
    for e in &recording.events {
        if let RecordingEvent::Finding { finding } = &e.event {
            if finding.verdict == Verdict::Fail {
                fails.push((e.at_ms, finding_index, issue_title(finding)));
            }
            finding_index += 1;
        }
    }
    let mut issue_windows: Vec<(u64, u64, usize, String)> = Vec::new();
    let mut cursor = 0u64;
    for (ts, idx, title) in fails {
        let begin = ts.max(cursor);
        let finish = (begin + ISSUE_CHAPTER_MS).min(end);
        if begin < finish {
            issue_windows.push((begin, finish, idx, title));
            cursor = finish;
        }
    }

    // Cut points partition the span.
    let mut cuts: Vec<u64> = vec![start, end];
    cuts.extend(steps.iter().map(|(ts, _)| *ts));
    for (b, f, _, _) in &issue_windows {
        cuts.push(*b);
        cuts.push(*f);
    }
    cuts.sort_unstable();
    cuts.dedup();
    cuts.retain(|&c| c >= start && c <= end);

    let mut chapters: Vec<ChapterMarker> = Vec::new();
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a == b {
            continue;
        }
        let issue = issue_windows
            .iter()
            .find(|(begin, finish, _, _)| *begin <= a && a < *finish);
        let (title, kind, finding_ref) = match issue {
            Some((_, _, idx, title)) => (title.clone(), ChapterKind::Issue, Some(*idx)),
            None => {
                let step = steps
                    .iter()
                    .rev()
                    .find(|(ts, _)| *ts <= a)
                    .map(|(_, t)| t.clone())
                    .unwrap_or_else(|| "Setup".to_owned());
                (step, ChapterKind::Step, None)
            }
        };
        // Merge with the previous chapter when nothing changed.
        if let Some(last) = chapters.last_mut() {
            if last.title == title && last.kind == kind && last.finding_ref == finding_ref {
                last.end_ms = b;
                continue;
            }
        }
        chapters.push(ChapterMarker {
            start_ms: a,
            end_ms: b,
            title,
            kind,
            finding_ref,
        });
    }
    chapters
}

fn issue_title(finding: &HeuristicFinding) -> String {
    format!("Issue: {:?}", finding.kind)
}

fn color_for(role: ColorRole) -> Rgb {
    match role {
        ColorRole::IssueOrange => COLOR_ISSUE_ORANGE,
        ColorRole::IssueCyan => COLOR_ISSUE_CYAN,
        ColorRole::PassGreen => COLOR_PASS_GREEN,
    }
}

/// Draws overlays onto a copy of the frame: pink crosshairs for taps,
/// direction arrows for swipes, and colored boxes for findings. The input
/// buffer is untouched.
pub fn annotate_frame(frame: &PixelBuffer, overlays: &[Overlay]) -> PixelBuffer {
    let mut out = frame.clone();
    for overlay in overlays {
        match overlay {
            Overlay::TapCross { x, y } => {
                imaging::fill_rect(&mut out, x - 14, y - 2, x + 14, y + 2, COLOR_CURSOR_PINK);
                imaging::fill_rect(&mut out, x - 2, y - 14, x + 2, y + 14, COLOR_CURSOR_PINK);
            }
            Overlay::SwipeArrow { x, y, direction } => {
                let (dx, dy) = match direction {
                    Direction::Up => (0, -40),
                    Direction::Down => (0, 40),
                    Direction::Left => (-40, 0),
                    Direction::Right => (40, 0),
                };
                let tip = (x + dx, y + dy);
                imaging::draw_line(&mut out, (*x, *y), tip, 3, COLOR_CURSOR_PINK);
                // Arrowhead: two short strokes back from the tip.
                let (hx, hy) = (dx / 4, dy / 4);
                imaging::draw_line(
                    &mut out,
                    tip,
                    (tip.0 - hx - hy / 2, tip.1 - hy - hx / 2),
                    3,
                    COLOR_CURSOR_PINK,
                );
                imaging::draw_line(
                    &mut out,
                    tip,
                    (tip.0 - hx + hy / 2, tip.1 - hy + hx / 2),
                    3,
                    COLOR_CURSOR_PINK,
                );
            }
            Overlay::FindingBox { region, color } => {
                imaging::stroke_rect(
                    &mut out,
                    region.x0 - 2,
                    region.y0 - 2,
                    region.x1 + 2,
                    region.y1 + 2,
                    3,
                    color_for(*color),
                );
            }
        }
    }
    out
}

/// Formats milliseconds of presentation time as a WebVTT timestamp.
fn vtt_timestamp(ms: u64) -> String {
    let hours = ms / 3_600_000;
    let minutes = (ms % 3_600_000) / 60_000;
    let seconds = (ms % 60_000) / 1000;
    let millis = ms % 1000;
    format!("{hours:02}:{minutes:02}:{seconds:02}.{millis:03}")
}

/// Renders the chapter manifest. Cue times are recording milliseconds
/// divided by the speedup factor (the playback timeline of the sped-up
/// recording).
pub fn chapters_to_vtt(chapters: &[ChapterMarker], speedup: f64) -> String {
    let mut out = String::from("WEBVTT\n");
    for (i, chapter) in chapters.iter().enumerate() {
        let start = (chapter.start_ms as f64 / speedup).round() as u64;
        let mut end = (chapter.end_ms as f64 / speedup).round() as u64;
        if end <= start {
            end = start + 1;
        }
        out.push_str(&format!(
            "\n{}\n{} --> {}\n{}\n",
            i + 1,
            vtt_timestamp(start),
            vtt_timestamp(end),
            chapter.title
        ));
    }
    out
}

fn write_file(path: &Path, bytes: &[u8], written: &mut Vec<PathBuf>) -> Result<(), ExportError> {
    fs::write(path, bytes).map_err(|source| ExportError::Io {
        path: path.to_owned(),
        source,
    })?;
    written.push(path.to_owned());
    Ok(())
}

/// Writes the full artifact into `out_dir`: `frame_%05d.png` (annotated),
/// `chapters.vtt`, and `report.json`. Files written before a failure are
/// removed again.
pub fn export_report(
    recording: &SessionRecording,
    spec: &TestSpec,
    out_dir: &Path,
) -> Result<TestReport, ExportError> {
    fs::create_dir_all(out_dir).map_err(|source| ExportError::Io {
        path: out_dir.to_owned(),
        source,
    })?;
    let mut written: Vec<PathBuf> = Vec::new();
    let result = export_inner(recording, spec, out_dir, &mut written);
    if result.is_err() {
        for path in written {
            let _ = fs::remove_file(path);
        }
    }
    result
}

fn export_inner(
    recording: &SessionRecording,
    spec: &TestSpec,
    out_dir: &Path,
    written: &mut Vec<PathBuf>,
) -> Result<TestReport, ExportError> {
    let chapters = build_chapters(recording);
    let findings: Vec<HeuristicFinding> =
        recording.findings().into_iter().cloned().collect();

    let mut frames = Vec::new();
    for (i, frame) in recording.frames.iter().enumerate() {
        let file = format!("frame_{i:05}.png");
        let annotated = annotate_frame(&frame.pixels, &frame.overlays);
        let path = out_dir.join(&file);
        imaging::write_png(&path, &annotated)?;
        written.push(path);
        frames.push(FrameEntry {
            at_ms: frame.at_ms,
            file,
        });
    }

    let referenced: Vec<usize> = chapters.iter().filter_map(|c| c.finding_ref).collect();
    let residual_findings: Vec<usize> = (0..findings.len())
        .filter(|i| !referenced.contains(i))
        .collect();

    let report = TestReport {
        schema_version: REPORT_SCHEMA_VERSION,
        spec: spec.clone(),
        status: recording.final_status,
        speedup_factor: DEFAULT_SPEEDUP,
        chapters,
        findings,
        frames,
        residual_findings,
    };

    let vtt = chapters_to_vtt(&report.chapters, report.speedup_factor);
    write_file(&out_dir.join("chapters.vtt"), vtt.as_bytes(), written)?;
    let json = serde_json::to_string_pretty(&report)?;
    write_file(
        &out_dir.join("report.json"),
        format!("{json}\n").as_bytes(),
        written,
    )?;
    Ok(report)
}

/// Reads back an exported `report.json`.
pub fn load_report(path: &Path) -> Result<TestReport, ExportError> {
    let text = fs::read_to_string(path).map_err(|source| ExportError::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristics::{FindingKind, HeuristicFinding};
    use crate::recording::{Frame, RecordingEvent};
    use crate::ui_model::BoundingBox;

    fn boundary(rec: &mut SessionRecording, at: u64, title: &str) {
        rec.push(at, RecordingEvent::ChapterBoundary { title: title.to_owned() });
    }

    fn fail_finding(region: BoundingBox) -> HeuristicFinding {
        HeuristicFinding::new(
            FindingKind::VoiceOverLoop,
            region,
            "main",
            Verdict::Fail,
            "looped",
        )
    }

    #[test]
    fn three_step_run_without_findings_gives_three_chapters() {
        let mut rec = SessionRecording::new();
        boundary(&mut rec, 0, "Step one");
        boundary(&mut rec, 1000, "Step two");
        boundary(&mut rec, 2500, "Step three");
        rec.push(4000, RecordingEvent::PlanRevision { revision: 0, reason: "x".into() });
        let chapters = build_chapters(&rec);
        assert_eq!(chapters.len(), 3);
        assert_eq!(chapters[0].start_ms, 0);
        assert_eq!(chapters[2].end_ms, 4000);
        let titles: Vec<&str> = chapters.iter().map(|c| c.title.as_str()).collect();
        assert_eq!(titles, vec!["Step one", "Step two", "Step three"]);
    }

    #[test]
    fn issue_chapter_splits_its_step_chapter() {
        let mut rec = SessionRecording::new();
        boundary(&mut rec, 0, "Step one");
        rec.push(
            2000,
            RecordingEvent::Finding { finding: fail_finding(BoundingBox::new(0, 0, 10, 10)) },
        );
        boundary(&mut rec, 8000, "Step two");
        boundary(&mut rec, 9000, "Summary");
        let chapters = build_chapters(&rec);
        // Partition: [0,2000) step, [2000,3500) issue, [3500,8000) step, [8000,9000) step two.
        assert_eq!(chapters[0].kind, ChapterKind::Step);
        assert_eq!(chapters[1].kind, ChapterKind::Issue);
        assert_eq!(chapters[1].start_ms, 2000);
        assert_eq!(chapters[1].finding_ref, Some(0));
        assert_eq!(chapters[2].title, "Step one");
        // Exhaustive, ordered, non-overlapping cover of the span.
        assert_eq!(chapters.first().unwrap().start_ms, 0);
        assert_eq!(chapters.last().unwrap().end_ms, 9000);
        for pair in chapters.windows(2) {
            assert_eq!(pair[0].end_ms, pair[1].start_ms);
        }
    }

    #[test]
    fn empty_recording_has_no_chapters() {
        assert!(build_chapters(&SessionRecording::new()).is_empty());
    }

    #[test]
    fn coincident_findings_get_sequential_windows() {
        let mut rec = SessionRecording::new();
        boundary(&mut rec, 0, "Step");
        for i in 0..3 {
            rec.push(
                1000 + i,
                RecordingEvent::Finding {
                    finding: fail_finding(BoundingBox::new(0, 0, 10, 10)),
                },
            );
        }
        boundary(&mut rec, 10_000, "Summary");
        let chapters = build_chapters(&rec);
        let issues: Vec<&ChapterMarker> =
            chapters.iter().filter(|c| c.kind == ChapterKind::Issue).collect();
        assert_eq!(issues.len(), 3);
        for pair in issues.windows(2) {
            assert!(pair[0].end_ms <= pair[1].start_ms);
        }
        for pair in chapters.windows(2) {
            assert_eq!(pair[0].end_ms, pair[1].start_ms, "partition holds");
        }
    }

    #[test]
    fn annotation_leaves_input_untouched_and_copies() {
        let base = PixelBuffer::new_filled(60, 60, 3, 255);
        let out = annotate_frame(&base, &[Overlay::TapCross { x: 30, y: 30 }]);
        assert!(base.data().iter().all(|&v| v == 255), "input unmodified");
        assert_ne!(out, base);
        assert_eq!(
            [out.sample(30, 30, 0), out.sample(30, 30, 1), out.sample(30, 30, 2)],
            [0xFF, 0x69, 0xB4]
        );
    }

    #[test]
    fn no_overlays_returns_identical_copy() {
        let mut base = PixelBuffer::new_filled(20, 20, 3, 100);
        base.put(3, 3, 1, 42);
        assert_eq!(annotate_frame(&base, &[]), base);
    }

    #[test]
    fn finding_box_strokes_only_near_the_region() {
        let base = PixelBuffer::new_filled(100, 100, 3, 255);
        let region = BoundingBox::new(40, 40, 60, 60);
        let out = annotate_frame(
            &base,
            &[Overlay::FindingBox { region, color: ColorRole::IssueOrange }],
        );
        // Far corner untouched.
        assert_eq!(out.sample(5, 5, 0), 255);
        assert_eq!(out.sample(5, 5, 1), 255);
        // Stroke present on the border.
        assert_eq!(out.sample(40, 38, 0), 0xFF);
        assert_eq!(out.sample(40, 38, 1), 0x8C);
    }

    #[test]
    fn vtt_timestamps_divide_by_speedup() {
        let chapters = vec![
            ChapterMarker {
                start_ms: 0,
                end_ms: 2500,
                title: "Step one".into(),
                kind: ChapterKind::Step,
                finding_ref: None,
            },
            ChapterMarker {
                start_ms: 2500,
                end_ms: 5000,
                title: "Step two".into(),
                kind: ChapterKind::Step,
                finding_ref: None,
            },
        ];
        let vtt = chapters_to_vtt(&chapters, 2.5);
        assert!(vtt.starts_with("WEBVTT\n"));
        assert!(vtt.contains("00:00:00.000 --> 00:00:01.000"), "{vtt}");
        assert!(vtt.contains("00:00:01.000 --> 00:00:02.000"), "{vtt}");
        assert!(vtt.contains("Step one"));
    }

    #[test]
    fn export_round_trips_and_reexports_identically() {
        let dir = tempfile::tempdir().unwrap();
        let mut rec = SessionRecording::new();
        boundary(&mut rec, 0, "Step one");
        rec.push_frame(Frame {
            at_ms: 100,
            screen_id: "main".into(),
            pixels: PixelBuffer::new_filled(40, 40, 3, 250),
            overlays: vec![Overlay::TapCross { x: 20, y: 20 }],
        });
        rec.push(
            500,
            RecordingEvent::Finding { finding: fail_finding(BoundingBox::new(5, 5, 15, 15)) },
        );
        boundary(&mut rec, 5000, "Summary");
        rec.final_status = FinalStatus::Success;

        let spec = TestSpec {
            title: "iOS: App: VoiceOver: Do a thing".into(),
            app_name: "App".into(),
            feature: crate::runner::Feature::VoiceOver,
            goal: "Do a thing".into(),
            steps: vec![],
            expected_results: None,
            difficulty: None,
        };

        let out1 = dir.path().join("a");
        let out2 = dir.path().join("b");
        let report1 = export_report(&rec, &spec, &out1).unwrap();
        let report2 = export_report(&rec, &spec, &out2).unwrap();
        assert_eq!(report1, report2);

        let loaded = load_report(&out1.join("report.json")).unwrap();
        assert_eq!(loaded, report1);

        for file in ["report.json", "chapters.vtt", "frame_00000.png"] {
            let a = std::fs::read(out1.join(file)).unwrap();
            let b = std::fs::read(out2.join(file)).unwrap();
            assert_eq!(a, b, "{file} must re-export byte-identically");
        }
        assert_eq!(report1.speedup_factor, 2.5);
        assert_eq!(report1.chapters.last().unwrap().end_ms, 5000);
    }

    #[test]
    fn unreferenced_pass_findings_land_in_residual() {
        let dir = tempfile::tempdir().unwrap();
        let mut rec = SessionRecording::new();
        boundary(&mut rec, 0, "Step");
        rec.push(
            100,
            RecordingEvent::Finding {
                finding: HeuristicFinding::new(
                    FindingKind::DynamicTypeNoGrowth,
                    BoundingBox::new(0, 0, 10, 10),
                    "main",
                    Verdict::Pass,
                    "grew fine",
                ),
            },
        );
        boundary(&mut rec, 2000, "Summary");
        rec.final_status = FinalStatus::Success;
        let spec = TestSpec {
            title: "t".into(),
            app_name: "a".into(),
            feature: crate::runner::Feature::DynamicType,
            goal: "g".into(),
            steps: vec![],
            expected_results: None,
            difficulty: None,
        };
        let report = export_report(&rec, &spec, &dir.path().join("out")).unwrap();
        assert_eq!(report.residual_findings, vec![0]);
        assert!(report.chapters.iter().all(|c| c.finding_ref.is_none()));
    }
}
