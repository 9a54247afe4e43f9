//! Subcommand implementations: what each one runs and the files it writes.
//!
//! Exit codes are the library's severity split: 0 success, 1 a check ran
//! and failed, 2 config or I/O rejection, 3 runtime alarm. Timestamps go
//! in the manifest field excluded from canonical bytes, so identical
//! configs give identical canonical manifests.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

use magnon_core::encoder::embed_mode;
use magnon_core::export::write_profile_csv;
use magnon_core::{
    figure_run, max_diffusion_mode, min_diffusion_mode, probability_profile, reference_config,
    run_check, run_timeline, ChainConfig, ChainModel, ChainSpectrum, CheckId, EncodingSubspace,
    Error, ExcitationState, ExperimentTimeline, FigureId, FigureRun, Manifest, Profile, Result,
    TimelineSegment,
};

use crate::config::{
    load, resolve_encoder, validate_path_component, EncoderMode, ExperimentConfig, Format,
    SweepConfig,
};
use crate::CommonArgs;

/// Default output root when neither --out nor the config names one.
pub const OUT_ENV: &str = "MAGNONCTL_OUT";

fn resolve_out(flag: Option<&Path>, cfg: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.map(Path::to_path_buf))
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Seconds since the Unix epoch, as a string for the manifest timestamp
/// field (the one excluded from canonical bytes).
fn timestamp() -> String {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
        .to_string()
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn load_or_default(args: &CommonArgs) -> Result<ExperimentConfig> {
    match &args.config {
        Some(path) => load(path),
        None => Ok(ExperimentConfig::default()),
    }
}

/// Columnar JSON twin of the profile CSV.
fn profile_json(profile: &Profile) -> String {
    let sites: Vec<usize> = (1..=profile.n_sites()).collect();
    let value = json!({
        "site": sites,
        "probability": profile.probabilities(),
    });
    let mut text = serde_json::to_string_pretty(&value).expect("profile serializes");
    text.push('\n');
    text
}

fn write_profile(dir: &Path, stem: &str, profile: &Profile, format: Format) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}.{}", format.extension()));
    match format {
        Format::Csv => write_profile_csv(profile, &path)?,
        Format::Json => write_text(&path, &profile_json(profile))?,
    }
    Ok(path)
}

// ---- encode -----------------------------------------------------------------

/// Complex launch state as "site,re,im" rows, full-precision scientific.
fn state_csv(state: &ExcitationState) -> String {
    let mut text = String::from("site,re,im\n");
    for (i, amp) in state.amplitudes().iter().enumerate() {
        text.push_str(&format!("{},{:e},{:e}\n", i + 1, amp.re, amp.im));
    }
    text
}

fn state_json(state: &ExcitationState) -> String {
    let sites: Vec<usize> = (1..=state.n_sites()).collect();
    let re: Vec<f64> = state.amplitudes().iter().map(|a| a.re).collect();
    let im: Vec<f64> = state.amplitudes().iter().map(|a| a.im).collect();
    let value = json!({"site": sites, "re": re, "im": im});
    let mut text = serde_json::to_string_pretty(&value).expect("state serializes");
    text.push('\n');
    text
}

/// Four significant digits for the printed beta table; full precision
/// lives in the manifest. Display then picks the shortest decimal, so
/// 0.57735... prints as 0.5774 and -0.5 stays -0.5.
fn sig4(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(3 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

pub fn cmd_encode(args: &CommonArgs) -> Result<ExitCode> {
    let cfg = load_or_default(args)?;
    if cfg.timeline.is_some() || cfg.captures.is_some() {
        return Err(Error::InvalidConfig(
            "encode runs no timeline; remove `timeline` and `captures` from the config".into(),
        ));
    }
    let chain = cfg.chain.unwrap_or_else(reference_config);
    chain.validate()?;
    let enc = resolve_encoder(cfg.encoder.as_ref(), &chain)?;
    let mode = match enc.mode {
        EncoderMode::MaxDiffusion => max_diffusion_mode(&enc.subspace)?,
        EncoderMode::MinDiffusion => min_diffusion_mode(&enc.subspace)?,
    };
    let state = embed_mode(&enc.subspace, &mode)?;

    println!(
        "encoding subspace: {} sites {:?} on a {}-site chain",
        enc.subspace.len(),
        enc.subspace.sites(),
        chain.n_sites
    );
    println!("mode: {}, eigenvalue = {}", enc.mode.name(), mode.eigenvalue);
    for (offset, beta) in enc.subspace.offsets().iter().zip(&mode.betas) {
        let site = (enc.subspace.m0() as i64 + offset) as usize;
        let tag = if *offset == 0 {
            "0".to_string()
        } else {
            format!("{offset:+}")
        };
        println!("beta[{tag:>2}] = {}  (site {site})", sig4(*beta));
    }

    let out_dir = resolve_out(args.out.as_deref(), cfg.out.as_deref());
    let format = args.format.or(cfg.format).unwrap_or_default();
    create_dir(&out_dir)?;

    let state_path = out_dir.join(format!("encoded-state.{}", format.extension()));
    match format {
        Format::Csv => write_text(&state_path, &state_csv(&state))?,
        Format::Json => write_text(&state_path, &state_json(&state))?,
    }

    let body = json!({
        "operation": "encode",
        "chain": chain,
        "encoder": {
            "m0": enc.subspace.m0(),
            "offsets": enc.subspace.offsets(),
            "sites": enc.subspace.sites(),
            "mode": enc.mode.name(),
        },
        "eigenvalue": mode.eigenvalue,
        "betas": mode.betas,
        "files": [file_name(&state_path)],
    });
    let manifest_path = out_dir.join("encode.manifest.json");
    Manifest::new(body)
        .with_timestamp(timestamp())
        .write(&manifest_path)?;
    println!("wrote {}", state_path.display());
    println!("wrote {}", manifest_path.display());
    Ok(ExitCode::SUCCESS)
}

// ---- figure -----------------------------------------------------------------

/// Figure parameters are pinned to the reference chain; a config may
/// restate them but not change them.
fn ensure_reference(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.encoder.is_some() || cfg.timeline.is_some() || cfg.captures.is_some() {
        return Err(Error::InvalidConfig(
            "figure runs are pinned; remove `encoder`, `timeline`, `captures` \
             (custom timelines run as sweep config entries)"
                .into(),
        ));
    }
    if let Some(chain) = &cfg.chain {
        if *chain != reference_config() {
            return Err(Error::InvalidConfig(format!(
                "figure runs pin the reference chain {:?}; remove `chain` or match it",
                reference_config()
            )));
        }
    }
    Ok(())
}

fn write_figure(run: &FigureRun, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    match format {
        Format::Csv => run.write_to(dir),
        Format::Json => {
            create_dir(dir)?;
            let mut written = Vec::with_capacity(run.captures.len() + 1);
            for cap in &run.captures {
                written.push(write_profile(dir, &cap.file_stem, &cap.profile, Format::Json)?);
            }
            let manifest_path = dir.join(format!("figure-{}.manifest.json", run.name));
            run.manifest.write(&manifest_path)?;
            written.push(manifest_path);
            Ok(written)
        }
    }
}

pub fn cmd_figure(which: &str, args: &CommonArgs) -> Result<ExitCode> {
    let id: FigureId = which.parse()?;
    let cfg = load_or_default(args)?;
    ensure_reference(&cfg)?;
    let out_dir = resolve_out(args.out.as_deref(), cfg.out.as_deref());
    let format = args.format.or(cfg.format).unwrap_or_default();

    let mut run = figure_run(id)?;
    run.manifest = run.manifest.with_timestamp(timestamp());
    let files = write_figure(&run, &out_dir, format)?;
    for path in &files {
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

// ---- check ------------------------------------------------------------------

pub fn cmd_check(which: &str, args: &CommonArgs) -> Result<ExitCode> {
    let id: CheckId = which.parse()?;
    if args.config.is_some() {
        return Err(Error::InvalidConfig(
            "checks are fully pinned and take no --config".into(),
        ));
    }
    let report = run_check(id)?;
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    print!("{text}");

    // The JSON verdict owns stdout; file notes go to stderr.
    if let Some(out) = &args.out {
        create_dir(out)?;
        let path = out.join(format!("check-{}.manifest.json", report.check));
        report.manifest().with_timestamp(timestamp()).write(&path)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

// ---- sweep ------------------------------------------------------------------

/// A sweep config entry with every validation already done, ready to run
/// on a worker thread.
struct PreparedExperiment {
    chain: ChainConfig,
    subspace: EncodingSubspace,
    mode: EncoderMode,
    segments: Vec<TimelineSegment>,
    /// One stem per capture, plus the fixed "final" and manifest names.
    stems: Vec<String>,
}

enum JobKind {
    Figure(FigureId),
    Check(CheckId),
    Experiment(Box<PreparedExperiment>),
}

struct Job {
    name: String,
    dir: PathBuf,
    format: Format,
    kind: JobKind,
}

/// What one finished run contributes to stdout, the summary manifest,
/// and the process exit code.
struct RunOutcome {
    exit: u8,
    line: String,
    entry: Value,
}

/// Stems that would collide with the files every experiment writes.
const RESERVED_STEMS: [&str; 2] = ["final", "experiment.manifest"];

fn prepare_experiment(name: &str, cfg: &ExperimentConfig) -> Result<PreparedExperiment> {
    if cfg.out.is_some() {
        return Err(Error::InvalidConfig(format!(
            "run '{name}': the sweep assigns per-run directories; remove `out`"
        )));
    }
    let chain = cfg.chain.unwrap_or_else(reference_config);
    chain.validate()?;
    let enc = resolve_encoder(cfg.encoder.as_ref(), &chain)?;
    let specs = cfg.timeline.clone().unwrap_or_default();
    let mut segments = Vec::with_capacity(specs.len());
    for spec in &specs {
        segments.push(spec.to_segment(&chain)?);
    }
    let n_captures: usize = specs.iter().map(|s| s.capture_count()).sum();
    let stems = match &cfg.captures {
        Some(stems) => {
            if stems.len() != n_captures {
                return Err(Error::InvalidConfig(format!(
                    "run '{name}': {} capture stems for {} snapshots",
                    stems.len(),
                    n_captures
                )));
            }
            let mut seen = HashSet::new();
            for stem in stems {
                validate_path_component("capture stem", stem)?;
                if RESERVED_STEMS.contains(&stem.as_str()) {
                    return Err(Error::InvalidConfig(format!(
                        "run '{name}': capture stem '{stem}' is reserved"
                    )));
                }
                if !seen.insert(stem.as_str()) {
                    return Err(Error::InvalidConfig(format!(
                        "run '{name}': duplicate capture stem '{stem}'"
                    )));
                }
            }
            stems.clone()
        }
        None => (0..n_captures).map(|i| format!("capture-{i:02}")).collect(),
    };
    Ok(PreparedExperiment {
        chain,
        subspace: enc.subspace,
        mode: enc.mode,
        segments,
        stems,
    })
}

/// Timeline echo for the manifest, in the same schema the config parser
/// reads (schedules in explicit form), so the manifest re-runs as-is.
fn timeline_echo(segments: &[TimelineSegment]) -> Value {
    segments
        .iter()
        .map(|segment| match segment {
            TimelineSegment::Free { two_j_t, capture } => {
                json!({"free": {"two_j_t": two_j_t, "capture": capture}})
            }
            TimelineSegment::Schedule {
                schedule,
                capture_at,
                capture_post_final_kick,
            } => json!({"schedule": {
                "kicks": {"explicit": schedule},
                "capture_at": capture_at,
                "capture_post_final_kick": capture_post_final_kick,
            }}),
        })
        .collect::<Vec<_>>()
        .into()
}

fn run_experiment(job: &Job, prep: &PreparedExperiment) -> Result<RunOutcome> {
    let spectrum = ChainSpectrum::new(&prep.chain, ChainModel::Heisenberg)?;
    let mode = match prep.mode {
        EncoderMode::MaxDiffusion => max_diffusion_mode(&prep.subspace)?,
        EncoderMode::MinDiffusion => min_diffusion_mode(&prep.subspace)?,
    };
    let initial = embed_mode(&prep.subspace, &mode)?;
    let timeline = ExperimentTimeline::new(prep.segments.clone());
    let record = run_timeline(&spectrum, &initial, &timeline)?;

    create_dir(&job.dir)?;
    let mut files = Vec::new();
    let mut capture_entries = Vec::new();
    for (cap, stem) in record.captures.iter().zip(&prep.stems) {
        let profile = probability_profile(&cap.state);
        let path = write_profile(&job.dir, stem, &profile, job.format)?;
        capture_entries.push(json!({
            "file": file_name(&path),
            "label": cap.label,
            "two_j_time": cap.two_j_time,
            "kicks_applied": cap.kicks_applied,
        }));
        files.push(path);
    }
    let final_profile = probability_profile(&record.final_state);
    let final_path = write_profile(&job.dir, "final", &final_profile, job.format)?;
    files.push(final_path.clone());

    let body = json!({
        "operation": "experiment",
        "chain": prep.chain,
        "encoder": {
            "m0": prep.subspace.m0(),
            "offsets": prep.subspace.offsets(),
            "mode": prep.mode.name(),
        },
        "timeline": timeline_echo(&prep.segments),
        "captures": capture_entries,
        "final": {
            "file": file_name(&final_path),
            "two_j_time": record.total_two_j_time,
            "kicks_applied": record.total_kicks,
        },
        "max_norm_drift": record.max_norm_drift,
    });
    let manifest_path = job.dir.join("experiment.manifest.json");
    Manifest::new(body)
        .with_timestamp(timestamp())
        .write(&manifest_path)?;
    files.push(manifest_path);

    Ok(RunOutcome {
        exit: 0,
        line: format!(
            "run {}: experiment wrote {} files ({} kicks, 2Jt = {})",
            job.name,
            files.len(),
            record.total_kicks,
            record.total_two_j_time
        ),
        entry: json!({
            "name": job.name,
            "kind": "experiment",
            "exit": 0,
            "files": files.iter().map(|p| file_name(p)).collect::<Vec<_>>(),
        }),
    })
}

fn run_job(job: &Job) -> Result<RunOutcome> {
    match &job.kind {
        JobKind::Figure(id) => {
            let mut run = figure_run(*id)?;
            run.manifest = run.manifest.with_timestamp(timestamp());
            let files = write_figure(&run, &job.dir, job.format)?;
            Ok(RunOutcome {
                exit: 0,
                line: format!(
                    "run {}: figure {} wrote {} files",
                    job.name,
                    id.name(),
                    files.len()
                ),
                entry: json!({
                    "name": job.name,
                    "kind": "figure",
                    "target": id.name(),
                    "exit": 0,
                    "files": files.iter().map(|p| file_name(p)).collect::<Vec<_>>(),
                }),
            })
        }
        JobKind::Check(id) => {
            let report = run_check(*id)?;
            create_dir(&job.dir)?;
            let path = job.dir.join(format!("check-{}.manifest.json", report.check));
            report.manifest().with_timestamp(timestamp()).write(&path)?;
            let exit = u8::from(!report.passed);
            Ok(RunOutcome {
                exit,
                line: format!(
                    "run {}: check {} {}",
                    job.name,
                    report.check,
                    if report.passed { "passed" } else { "FAILED" }
                ),
                entry: json!({
                    "name": job.name,
                    "kind": "check",
                    "target": report.check,
                    "exit": exit,
                    "passed": report.passed,
                    "files": [file_name(&path)],
                }),
            })
        }
        JobKind::Experiment(prep) => run_experiment(job, prep),
    }
}

fn execute_job(job: &Job) -> RunOutcome {
    run_job(job).unwrap_or_else(|e| {
        let exit = if e.is_runtime_alarm() { 3 } else { 2 };
        RunOutcome {
            exit,
            line: format!("run {}: error: {e}", job.name),
            entry: json!({
                "name": job.name,
                "exit": exit,
                "error": e.to_string(),
            }),
        }
    })
}

pub fn cmd_sweep(args: &CommonArgs) -> Result<ExitCode> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("sweep requires --config <plan.json>".into()))?;
    let plan: SweepConfig = load(path)?;
    if plan.runs.is_empty() {
        return Err(Error::InvalidConfig("sweep plan has no runs".into()));
    }
    let out_root = resolve_out(args.out.as_deref(), plan.out.as_deref());

    // Validate the whole plan before any thread or directory exists.
    let mut seen = HashSet::new();
    let mut jobs = Vec::with_capacity(plan.runs.len());
    for entry in &plan.runs {
        validate_path_component("run name", &entry.name)?;
        if !seen.insert(entry.name.as_str()) {
            return Err(Error::InvalidConfig(format!(
                "duplicate run name '{}'",
                entry.name
            )));
        }
        let picks =
            usize::from(entry.figure.is_some()) + usize::from(entry.check.is_some()) + usize::from(entry.config.is_some());
        if picks != 1 {
            return Err(Error::InvalidConfig(format!(
                "run '{}' must set exactly one of `figure`, `check`, `config`",
                entry.name
            )));
        }
        let kind = if let Some(f) = &entry.figure {
            JobKind::Figure(f.parse()?)
        } else if let Some(c) = &entry.check {
            JobKind::Check(c.parse()?)
        } else {
            let cfg = entry.config.as_ref().expect("picks == 1");
            JobKind::Experiment(Box::new(prepare_experiment(&entry.name, cfg)?))
        };
        let format = args
            .format
            .or_else(|| entry.config.as_ref().and_then(|c| c.format))
            .or(plan.format)
            .unwrap_or_default();
        jobs.push(Job {
            name: entry.name.clone(),
            dir: out_root.join(&entry.name),
            format,
            kind,
        });
    }
    create_dir(&out_root)?;

    let mut outcomes: Vec<Option<RunOutcome>> = Vec::new();
    outcomes.resize_with(jobs.len(), || None);
    std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|job| scope.spawn(move || execute_job(job)))
            .collect();
        for (slot, handle) in outcomes.iter_mut().zip(handles) {
            *slot = Some(handle.join().unwrap_or_else(|_| RunOutcome {
                exit: 3,
                line: "run ?: worker thread panicked".into(),
                entry: json!({"exit": 3, "error": "worker thread panicked"}),
            }));
        }
    });
    let outcomes: Vec<RunOutcome> = outcomes
        .into_iter()
        .map(|o| o.expect("every job joined"))
        .collect();

    let body = json!({
        "operation": "sweep",
        "runs": outcomes.iter().map(|o| o.entry.clone()).collect::<Vec<_>>(),
    });
    let summary_path = out_root.join("sweep.manifest.json");
    Manifest::new(body)
        .with_timestamp(timestamp())
        .write(&summary_path)?;

    for outcome in &outcomes {
        println!("{}", outcome.line);
    }
    println!("wrote {}", summary_path.display());

    let worst = outcomes.iter().map(|o| o.exit).max().unwrap_or(0);
    Ok(ExitCode::from(worst))
}
