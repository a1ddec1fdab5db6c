//! Batch entry points behind the `a11yreplay` binary: `run` executes
//! instruction files against an app definition and exports one report per
//! test; `check-heuristics` runs a single detector on externally supplied
//! screenshots and element manifests.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::agents::{Agents, HttpClientConfig, HttpLlmClient, LlmClient, ScriptedClient};
use crate::device_sim::{load_app_from_path, AppModel, Session};
use crate::heuristics::{
    button_shapes_check, dynamic_type_check, HeuristicConfig, HeuristicFinding, Verdict,
};
use crate::imaging;
use crate::recording::FinalStatus;
use crate::report::{annotate_frame, export_report, REPORT_SCHEMA_VERSION};
use crate::recording::Overlay;
use crate::runner::{parse_instructions, Runner, TestSpec};
use crate::ui_model::ScreenSnapshot;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFRA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Which completion backend a run uses.
#[derive(Debug, Clone, PartialEq)]
pub enum BackendConfig {
    /// `scripted:<path>` — a script file, or a directory holding one
    /// `<test-stem>.json` script per instruction file.
    Scripted(PathBuf),
    /// `http:<url>` — an OpenAI-compatible chat-completions endpoint.
    Http { url: String, model: String },
}

impl BackendConfig {
    pub fn parse(value: &str, model: &str) -> Result<Self, String> {
        if let Some(path) = value.strip_prefix("scripted:") {
            return Ok(BackendConfig::Scripted(PathBuf::from(path)));
        }
        if let Some(url) = value.strip_prefix("http:") {
            return Ok(BackendConfig::Http {
                url: url.to_owned(),
                model: model.to_owned(),
            });
        }
        Err(format!(
            "backend must be scripted:<path> or http:<url>, got {value:?}"
        ))
    }
}

/// Configuration for one batch run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub app_definition: PathBuf,
    pub instructions: Vec<PathBuf>,
    pub backend: BackendConfig,
    pub out_dir: PathBuf,
    pub heuristics: HeuristicConfig,
    pub parallelism: usize,
    pub seed: u64,
}

struct RunRow {
    test: String,
    status: Option<FinalStatus>,
    findings: usize,
    fails: usize,
    out: String,
    error: Option<String>,
}

fn status_label(status: Option<FinalStatus>) -> &'static str {
    match status {
        Some(FinalStatus::Success) => "success",
        Some(FinalStatus::Partial) => "partial",
        Some(FinalStatus::Fail) => "fail",
        None => "error",
    }
}

fn script_for(backend_path: &Path, instructions: &Path) -> PathBuf {
    if backend_path.is_dir() {
        let stem = instructions
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        backend_path.join(format!("{stem}.json"))
    } else {
        backend_path.to_owned()
    }
}

fn build_client(
    backend: &BackendConfig,
    instructions: &Path,
) -> Result<Arc<dyn LlmClient>, String> {
    match backend {
        BackendConfig::Scripted(path) => {
            let script_path = script_for(path, instructions);
            ScriptedClient::from_path(&script_path)
                .map(|c| Arc::new(c) as Arc<dyn LlmClient>)
                .map_err(|e| format!("{}: {e}", script_path.display()))
        }
        BackendConfig::Http { url, model } => {
            let mut cfg = HttpClientConfig::new(url.clone());
            cfg.model = model.clone();
            HttpLlmClient::new(cfg)
                .map(|c| Arc::new(c) as Arc<dyn LlmClient>)
                .map_err(|e| e.to_string())
        }
    }
}

fn run_one(
    config: &RunConfig,
    app: &AppModel,
    instructions_path: &Path,
) -> Result<RunRow, String> {
    let test_name = instructions_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| instructions_path.display().to_string());
    let raw = std::fs::read_to_string(instructions_path)
        .map_err(|e| format!("{}: {e}", instructions_path.display()))?;

    let client = build_client(&config.backend, instructions_path)?;
    let mut agents = Agents::new(client);
    let mut spec: TestSpec =
        parse_instructions(&raw, Some(&mut agents)).map_err(|e| e.to_string())?;
    if spec.app_name.is_empty() {
        spec.app_name = app.app_name.clone();
    }

    let mut session = Session::new(config.seed);
    session.add_app(app.clone());
    let runner = Runner::new(&mut session, &mut agents, config.heuristics);
    let recording = runner.run_test(&spec, &app.app_id).map_err(|e| e.to_string())?;

    let out = config.out_dir.join(&test_name);
    let report = export_report(&recording, &spec, &out).map_err(|e| e.to_string())?;
    let fails = report
        .findings
        .iter()
        .filter(|f| f.verdict == Verdict::Fail)
        .count();
    Ok(RunRow {
        test: test_name,
        status: Some(report.status),
        findings: report.findings.len(),
        fails,
        out: out.display().to_string(),
        error: None,
    })
}

/// Runs every instruction file, exports reports, and prints a summary
/// table in input order. Navigation failures still export and exit 0;
/// infrastructure errors exit non-zero.
pub fn cmd_run(config: &RunConfig) -> i32 {
    if config.parallelism < 1 {
        eprintln!("error: --parallel must be >= 1");
        return EXIT_USAGE;
    }
    if config.instructions.is_empty() {
        eprintln!("error: no instruction files given");
        return EXIT_USAGE;
    }
    if let Err(e) = config.heuristics.validate() {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    let app = match load_app_from_path(&config.app_definition) {
        Ok(app) => app,
        Err(e) => {
            eprintln!("error: {}: {e}", config.app_definition.display());
            return EXIT_USAGE;
        }
    };

    // Fixed-size worker pool over an atomic job index; results keep input
    // order.
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<RunRow>>> =
        Mutex::new((0..config.instructions.len()).map(|_| None).collect());
    let workers = config.parallelism.min(config.instructions.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(path) = config.instructions.get(i) else {
                    break;
                };
                let row = run_one(config, &app, path).unwrap_or_else(|error| RunRow {
                    test: path
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| path.display().to_string()),
                    status: None,
                    findings: 0,
                    fails: 0,
                    out: String::new(),
                    error: Some(error),
                });
                rows.lock().expect("rows lock")[i] = Some(row);
            });
        }
    });

    let rows = rows.into_inner().expect("rows lock");
    let mut exit = EXIT_OK;
    println!("{:<32} {:<8} {:>8} {:>6}  {}", "test", "status", "findings", "fails", "out");
    for row in rows.into_iter().flatten() {
        match &row.error {
            Some(error) => {
                println!("{:<32} {:<8} {:>8} {:>6}  {}", row.test, "error", "-", "-", error);
                exit = EXIT_INFRA;
            }
            None => {
                println!(
                    "{:<32} {:<8} {:>8} {:>6}  {}",
                    row.test,
                    status_label(row.status),
                    row.findings,
                    row.fails,
                    row.out
                );
            }
        }
    }
    exit
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckMode {
    /// Compare a baseline and a grown screenshot pair.
    DynamicType,
    /// Inspect a single screenshot captured with Button Shapes on.
    ButtonShapes,
}

/// Configuration for `check-heuristics`.
#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub mode: CheckMode,
    pub before_image: Option<PathBuf>,
    pub before_manifest: Option<PathBuf>,
    pub after_image: Option<PathBuf>,
    pub after_manifest: Option<PathBuf>,
    pub image: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub heuristics: HeuristicConfig,
}

fn load_manifest(path: &Path) -> Result<ScreenSnapshot, String> {
    let text =
        std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_findings_fragment(
    out_dir: &Path,
    findings: &[HeuristicFinding],
) -> Result<(), String> {
    std::fs::create_dir_all(out_dir).map_err(|e| format!("{}: {e}", out_dir.display()))?;
    let fragment = serde_json::json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "findings": findings,
    });
    let path = out_dir.join("findings.json");
    std::fs::write(&path, format!("{:#}\n", fragment))
        .map_err(|e| format!("{}: {e}", path.display()))
}

fn annotate_to(
    out_dir: &Path,
    name: &str,
    image: &imaging::PixelBuffer,
    findings: &[HeuristicFinding],
) -> Result<(), String> {
    let overlays: Vec<Overlay> = findings
        .iter()
        .map(|f| Overlay::FindingBox {
            region: f.region,
            color: f.color_role,
        })
        .collect();
    let annotated = annotate_frame(image, &overlays);
    imaging::write_png(&out_dir.join(name), &annotated).map_err(|e| e.to_string())
}

fn check_heuristics_inner(config: &CheckConfig) -> Result<(usize, usize), String> {
    let findings = match config.mode {
        CheckMode::DynamicType => {
            let (Some(before_img), Some(before_man), Some(after_img), Some(after_man)) = (
                &config.before_image,
                &config.before_manifest,
                &config.after_image,
                &config.after_manifest,
            ) else {
                return Err(
                    "dynamic-type mode needs --before, --before-manifest, --after, \
                     --after-manifest"
                        .to_owned(),
                );
            };
            let base = load_manifest(before_man)?;
            let grown = load_manifest(after_man)?;
            let before = imaging::read_png(before_img).map_err(|e| e.to_string())?;
            let after = imaging::read_png(after_img).map_err(|e| e.to_string())?;
            let findings = dynamic_type_check(&base, &grown, &config.heuristics);
            std::fs::create_dir_all(&config.out_dir)
                .map_err(|e| format!("{}: {e}", config.out_dir.display()))?;
            annotate_to(&config.out_dir, "before_annotated.png", &before, &[])?;
            annotate_to(&config.out_dir, "after_annotated.png", &after, &findings)?;
            findings
        }
        CheckMode::ButtonShapes => {
            let (Some(image_path), Some(manifest_path)) = (&config.image, &config.manifest)
            else {
                return Err("button-shapes mode needs --image and --manifest".to_owned());
            };
            let snapshot = load_manifest(manifest_path)?;
            let image = imaging::read_png(image_path).map_err(|e| e.to_string())?;
            let (findings, notes) =
                button_shapes_check(&snapshot, &image, &config.heuristics);
            for note in notes {
                eprintln!("note: {note}");
            }
            std::fs::create_dir_all(&config.out_dir)
                .map_err(|e| format!("{}: {e}", config.out_dir.display()))?;
            annotate_to(&config.out_dir, "annotated.png", &image, &findings)?;
            findings
        }
    };
    write_findings_fragment(&config.out_dir, &findings)?;
    let fails = findings.iter().filter(|f| f.verdict == Verdict::Fail).count();
    Ok((findings.len(), fails))
}

/// Runs one heuristic on supplied screenshots and element manifests,
/// writing `findings.json` and annotated images.
pub fn cmd_check_heuristics(config: &CheckConfig) -> i32 {
    if let Err(e) = config.heuristics.validate() {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    match check_heuristics_inner(config) {
        Ok((total, fails)) => {
            println!(
                "{total} finding(s), {fails} fail(s); wrote {}",
                config.out_dir.join("findings.json").display()
            );
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

/// Command-line interface of the `a11yreplay` binary.
#[derive(Debug, Parser)]
#[command(
    name = "a11yreplay",
    about = "Replay natural-language accessibility tests against a simulated device"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    /// Minimum area growth per Dynamic Type increment (fraction).
    #[arg(long)]
    pub growth_min: Option<f64>,
    /// Minimum partial similarity for text matching (fraction).
    #[arg(long)]
    pub similarity_min: Option<f64>,
    /// Minimum width fraction an underline must span.
    #[arg(long)]
    pub underline_span_min: Option<f64>,
    /// Maximum icon-to-text gap as a fraction of icon width.
    #[arg(long)]
    pub icon_gap_max: Option<f64>,
    /// Canny low hysteresis threshold.
    #[arg(long)]
    pub canny_low: Option<f64>,
    /// Canny high hysteresis threshold.
    #[arg(long)]
    pub canny_high: Option<f64>,
}

impl ThresholdArgs {
    pub fn apply(&self, cfg: &mut HeuristicConfig) {
        if let Some(v) = self.growth_min {
            cfg.growth_min = v;
        }
        if let Some(v) = self.similarity_min {
            cfg.partial_similarity_min = v;
        }
        if let Some(v) = self.underline_span_min {
            cfg.underline_span_min = v;
        }
        if let Some(v) = self.icon_gap_max {
            cfg.icon_gap_max_frac = v;
        }
        if let Some(v) = self.canny_low {
            cfg.canny_low = v;
        }
        if let Some(v) = self.canny_high {
            cfg.canny_high = v;
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run instruction files against an app definition and export reports.
    Run {
        /// App definition JSON.
        #[arg(long)]
        app: PathBuf,
        /// Instruction text files (one test each).
        #[arg(long, num_args = 1.., required = true)]
        tests: Vec<PathBuf>,
        /// Backend: scripted:<path> or http:<url>.
        #[arg(long)]
        backend: String,
        /// Output directory; one subdirectory per test.
        #[arg(long)]
        out: PathBuf,
        /// Worker pool size for independent test sessions.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Session seed recorded for reproducibility.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Model name for the HTTP backend.
        #[arg(long, default_value = "gpt-4")]
        model: String,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
    /// Run one heuristic on supplied screenshots and element manifests.
    CheckHeuristics {
        #[arg(long, value_enum)]
        mode: CheckMode,
        /// Baseline screenshot (dynamic-type mode).
        #[arg(long)]
        before: Option<PathBuf>,
        /// Baseline element manifest JSON (dynamic-type mode).
        #[arg(long)]
        before_manifest: Option<PathBuf>,
        /// Grown screenshot (dynamic-type mode).
        #[arg(long)]
        after: Option<PathBuf>,
        /// Grown element manifest JSON (dynamic-type mode).
        #[arg(long)]
        after_manifest: Option<PathBuf>,
        /// Screenshot (button-shapes mode).
        #[arg(long)]
        image: Option<PathBuf>,
        /// Element manifest JSON (button-shapes mode).
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Output directory for findings.json and annotated images.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
}

/// Parses argv and dispatches; returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own help/usage text.
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Run {
            app,
            tests,
            backend,
            out,
            parallel,
            seed,
            model,
            thresholds,
        } => {
            let backend = match BackendConfig::parse(&backend, &model) {
                Ok(b) => b,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_USAGE;
                }
            };
            let mut heuristics = HeuristicConfig::default();
            thresholds.apply(&mut heuristics);
            cmd_run(&RunConfig {
                app_definition: app,
                instructions: tests,
                backend,
                out_dir: out,
                heuristics,
                parallelism: parallel,
                seed,
            })
        }
        Command::CheckHeuristics {
            mode,
            before,
            before_manifest,
            after,
            after_manifest,
            image,
            manifest,
            out,
            thresholds,
        } => {
            let mut heuristics = HeuristicConfig::default();
            thresholds.apply(&mut heuristics);
            cmd_check_heuristics(&CheckConfig {
                mode,
                before_image: before,
                before_manifest,
                after_image: after,
                after_manifest,
                image,
                manifest,
                out_dir: out,
                heuristics,
            })
        }
    }
}
