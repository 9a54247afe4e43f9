//! Named reference experiments: the four figure timelines and the five
//! identity checks, shared verbatim by the CLI and the acceptance suite so
//! both always run the same physics with the same frozen parameters.
//!
//! Reference chain: N = 201, J = 1, T0 = 0.125 (so 2JT0 = 0.25), n0 = 101,
//! B = 0. Packets launch from the five-site comb at m0 (101 centered,
//! 30 near the left end), fly for 2Jt1 = 15, and the stopping experiments
//! run C = 0.5 with 200 kicks before a 2Jt2 = 30 relaunch window.

use crate::analysis::{
    fidelity, max_amplitude_deviation, packet_summary, probability_profile, PacketSummary,
    Profile,
};
use crate::chain::{run_events, ChainConfig, ChainModel, ChainSpectrum};
use crate::control::{
    naive_schedule, run_timeline, table1_schedule, ExperimentTimeline, KickConvention,
    StoppingParams, TimelineSegment,
};
use crate::encoder::{max_diffusion_mode, max_diffusion_state, EncodingSubspace};
use crate::error::{Error, Result};
use crate::export::{write_profile_csv, Manifest};
use crate::oracle::run_events_full;
use crate::rotor::{mapping_residual, parity_identity_residual, resonance_propagator, RotorState};
use crate::state::ExcitationState;
use crate::tolerances as tol;
use serde::Serialize;
use serde_json::json;
use std::path::{Path, PathBuf};

/// The chain every reference figure runs on.
pub fn reference_config() -> ChainConfig {
    ChainConfig::new(201, 1.0, 0.125, 101, 0.0).expect("reference parameters are valid")
}

/// Launch-to-capture flight time, 2J units.
pub const T1_TWO_J: f64 = 15.0;
/// Post-stop relaunch window, 2J units.
pub const T2_TWO_J: f64 = 30.0;
/// Late capture of the centered free run, 2J units past t1.
pub const T2_CENTERED_FREE: f64 = 30.0;
/// Late capture of the reflected run, 2J units past t1.
pub const T2_REFLECTED_FREE: f64 = 45.0;
/// Kick coefficient of the stopping experiments.
pub const STOP_C: f64 = 0.5;
/// Half-length of the antisymmetric sequence (2M+1 = 201 kicks).
pub const STOP_M: usize = 100;
/// Kick count of the naive stopping experiment.
pub const NAIVE_KICKS: usize = 200;
/// Mid-run capture points of both stopping experiments.
pub const STOP_CAPTURES: [usize; 2] = [100, 200];
/// Launch site of the centered experiments.
pub const CENTERED_M0: usize = 101;
/// Launch site of the reflected experiment.
pub const REFLECTED_M0: usize = 30;

/// One emitted profile of a figure run.
#[derive(Debug, Clone)]
pub struct FigureCapture {
    /// File stem of the CSV this capture exports to (e.g. "fig3b").
    pub file_stem: String,
    /// Where in the timeline it was taken ("t=15", "k=200", …).
    pub label: String,
    pub two_j_time: f64,
    pub kicks_applied: usize,
    pub profile: Profile,
}

/// A completed figure run: captures plus the manifest describing them.
#[derive(Debug, Clone)]
pub struct FigureRun {
    pub name: &'static str,
    pub config: ChainConfig,
    pub captures: Vec<FigureCapture>,
    pub manifest: Manifest,
}

impl FigureRun {
    /// Writes each capture CSV and the manifest into `dir` (created if
    /// missing). Returns the written paths, manifest last.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::with_capacity(self.captures.len() + 1);
        for cap in &self.captures {
            let path = dir.join(format!("{}.csv", cap.file_stem));
            write_profile_csv(&cap.profile, &path)?;
            written.push(path);
        }
        let manifest_path = dir.join(format!("figure-{}.manifest.json", self.name));
        self.manifest.write(&manifest_path)?;
        written.push(manifest_path);
        Ok(written)
    }
}

/// Which reference figure to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    CenteredPair,   // 1a
    ReflectedPair,  // 1b
    NaiveStop,      // 2
    StopRelaunch,   // 3
}

impl FigureId {
    pub const ALL: [FigureId; 4] = [
        FigureId::CenteredPair,
        FigureId::ReflectedPair,
        FigureId::NaiveStop,
        FigureId::StopRelaunch,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FigureId::CenteredPair => "1a",
            FigureId::ReflectedPair => "1b",
            FigureId::NaiveStop => "2",
            FigureId::StopRelaunch => "3",
        }
    }
}

impl std::str::FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1a" => Ok(FigureId::CenteredPair),
            "1b" => Ok(FigureId::ReflectedPair),
            "2" => Ok(FigureId::NaiveStop),
            "3" => Ok(FigureId::StopRelaunch),
            other => Err(Error::InvalidConfig(format!(
                "unknown figure '{other}' (expected 1a, 1b, 2, or 3)"
            ))),
        }
    }
}

pub fn figure_run(id: FigureId) -> Result<FigureRun> {
    match id {
        FigureId::CenteredPair => centered_pair_run(),
        FigureId::ReflectedPair => reflected_pair_run(),
        FigureId::NaiveStop => naive_stop_run(),
        FigureId::StopRelaunch => stop_relaunch_run(),
    }
}

fn encoder_subspace(m0: usize) -> Result<EncodingSubspace> {
    EncodingSubspace::five_site(m0, reference_config().n_sites)
}

fn summary_value(summary: &PacketSummary) -> serde_json::Value {
    serde_json::to_value(summary).expect("packet summary serializes")
}

fn chain_value(cfg: &ChainConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("chain config serializes")
}

/// Free flight of the centered pair: captures at 2Jt = 15 and 45.
fn centered_pair_run() -> Result<FigureRun> {
    let cfg = reference_config();
    let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg)?;
    let sub = encoder_subspace(CENTERED_M0)?;
    let encoded = max_diffusion_state(&sub)?;
    let timeline = ExperimentTimeline::new(vec![
        TimelineSegment::Free {
            two_j_t: T1_TWO_J,
            capture: true,
        },
        TimelineSegment::Free {
            two_j_t: T2_CENTERED_FREE,
            capture: true,
        },
    ]);
    let record = run_timeline(&spectrum, &encoded, &timeline)?;
    let early = probability_profile(&record.captures[0].state);
    let late = probability_profile(&record.captures[1].state);
    let early_summary = packet_summary(&early)?;
    let late_summary = packet_summary(&late)?;
    let betas = max_diffusion_mode(&sub)?.betas;

    let min_peak = early_summary
        .packets
        .iter()
        .map(|p| p.peak_probability)
        .fold(f64::INFINITY, f64::min);
    let manifest = Manifest::new(json!({
        "experiment": "figure-1a",
        "chain": chain_value(&cfg),
        "encoder": {"m0": CENTERED_M0, "offsets": sub.offsets(), "betas": betas},
        "timeline": {"two_j_t1": T1_TWO_J, "two_j_t2": T2_CENTERED_FREE},
        "files": {"t15": "fig1a_t15.csv", "t45": "fig1a_t45.csv"},
        "measurements": {
            "mirror_asymmetry_t15": early.mirror_asymmetry(),
            "mirror_asymmetry_t45": late.mirror_asymmetry(),
            "background_max_t15": early_summary.background_max,
            "min_peak_t15": min_peak,
            "background_to_peak_ratio_t15": early_summary.background_max / min_peak,
            "max_norm_drift": record.max_norm_drift,
            "packets_t15": summary_value(&early_summary),
            "packets_t45": summary_value(&late_summary),
        },
    }));

    Ok(FigureRun {
        name: "1a",
        config: cfg,
        captures: vec![
            FigureCapture {
                file_stem: "fig1a_t15".into(),
                label: record.captures[0].label.clone(),
                two_j_time: record.captures[0].two_j_time,
                kicks_applied: 0,
                profile: early,
            },
            FigureCapture {
                file_stem: "fig1a_t45".into(),
                label: record.captures[1].label.clone(),
                two_j_time: record.captures[1].two_j_time,
                kicks_applied: 0,
                profile: late,
            },
        ],
        manifest,
    })
}

/// Free flight from m0 = 30: the left packet reflects off the end and the
/// late capture shows the co-moving pair 2(m0−1) sites apart.
fn reflected_pair_run() -> Result<FigureRun> {
    let cfg = reference_config();
    let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg)?;
    let sub = encoder_subspace(REFLECTED_M0)?;
    let encoded = max_diffusion_state(&sub)?;
    let timeline = ExperimentTimeline::new(vec![
        TimelineSegment::Free {
            two_j_t: T1_TWO_J,
            capture: true,
        },
        TimelineSegment::Free {
            two_j_t: T2_REFLECTED_FREE,
            capture: true,
        },
    ]);
    let record = run_timeline(&spectrum, &encoded, &timeline)?;
    let early = probability_profile(&record.captures[0].state);
    let late = probability_profile(&record.captures[1].state);
    let early_summary = packet_summary(&early)?;
    let late_summary = packet_summary(&late)?;

    let manifest = Manifest::new(json!({
        "experiment": "figure-1b",
        "chain": chain_value(&cfg),
        "encoder": {"m0": REFLECTED_M0, "offsets": sub.offsets()},
        "timeline": {"two_j_t1": T1_TWO_J, "two_j_t2": T2_REFLECTED_FREE},
        "files": {"t15": "fig1b_t15.csv", "t60": "fig1b_t60.csv"},
        "measurements": {
            "peak_separation_t60": late_summary.peak_separation,
            "expected_separation": tol::REFLECTED_PAIR_SEPARATION,
            "max_norm_drift": record.max_norm_drift,
            "packets_t15": summary_value(&early_summary),
            "packets_t60": summary_value(&late_summary),
        },
    }));

    Ok(FigureRun {
        name: "1b",
        config: cfg,
        captures: vec![
            FigureCapture {
                file_stem: "fig1b_t15".into(),
                label: record.captures[0].label.clone(),
                two_j_time: record.captures[0].two_j_time,
                kicks_applied: 0,
                profile: early,
            },
            FigureCapture {
                file_stem: "fig1b_t60".into(),
                label: record.captures[1].label.clone(),
                two_j_time: record.captures[1].two_j_time,
                kicks_applied: 0,
                profile: late,
            },
        ],
        manifest,
    })
}

/// Shared plumbing for the two stopping figures: launch, fly 2Jt1, run the
/// schedule with captures at 100/200 kicks, then relaunch. The relaunch
/// free segment is t2 − T0 because the period loop has already appended
/// one free step after the final kick; the clean reference is the same
/// launch flown free for t1 + T0·s + (t2 − T0·s) + … i.e. plain t1 + t2
/// once the sequence's net V^1 is counted.
struct StoppingRun {
    pre_stop: ExcitationState,
    captures: Vec<crate::control::TimelineCapture>,
    post_final_kick: Option<ExcitationState>,
    final_state: ExcitationState,
    reference: ExcitationState,
    max_norm_drift: f64,
}

fn stopping_run(
    spectrum: &ChainSpectrum,
    schedule: crate::control::KickSchedule,
    capture_post_final_kick: bool,
) -> Result<StoppingRun> {
    let cfg = spectrum.config();
    let sub = encoder_subspace(CENTERED_M0)?;
    let encoded = max_diffusion_state(&sub)?;
    let timeline = ExperimentTimeline::new(vec![
        TimelineSegment::Free {
            two_j_t: T1_TWO_J,
            capture: true,
        },
        TimelineSegment::Schedule {
            schedule,
            capture_at: STOP_CAPTURES.to_vec(),
            capture_post_final_kick,
        },
        TimelineSegment::Free {
            two_j_t: T2_TWO_J - cfg.two_j_t0(),
            capture: true,
        },
    ]);
    let record = run_timeline(spectrum, &encoded, &timeline)?;
    let reference = spectrum.evolve_two_j_t(&encoded, T1_TWO_J + T2_TWO_J)?;
    let mut captures = record.captures;
    let pre_stop = captures[0].state.clone();
    let post_final_kick = if capture_post_final_kick {
        let idx = captures
            .iter()
            .position(|c| c.label == "post-final-kick")
            .expect("requested capture exists");
        Some(captures.remove(idx).state)
    } else {
        None
    };
    Ok(StoppingRun {
        pre_stop,
        captures,
        post_final_kick,
        final_state: record.final_state,
        reference,
        max_norm_drift: record.max_norm_drift,
    })
}

/// Largest half-centroid displacement between two profiles, split at the
/// launch site. Robust where peak detection is not: a scrambled relaunch
/// still has well-defined half masses.
fn pair_displacement(a: &Profile, b: &Profile) -> f64 {
    let (al, ar) = a.half_centroids(CENTERED_M0);
    let (bl, br) = b.half_centroids(CENTERED_M0);
    (al - bl).abs().max((ar - br).abs())
}

/// Constant-C kicks hold the pair but scramble the relaunch.
fn naive_stop_run() -> Result<FigureRun> {
    let cfg = reference_config();
    let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg)?;
    let schedule = naive_schedule(STOP_C, NAIVE_KICKS, &cfg)?;
    let run = stopping_run(&spectrum, schedule, false)?;

    let k100 = probability_profile(&run.captures[1].state);
    let k200 = probability_profile(&run.captures[2].state);
    let final_profile = probability_profile(&run.final_state);
    let pre_profile = probability_profile(&run.pre_stop);

    let stop_displacement = pair_displacement(&pre_profile, &k200);
    let relaunch_displacement = pair_displacement(&k200, &final_profile);
    let relaunch_fidelity = fidelity(&run.final_state, &run.reference)?;

    let manifest = Manifest::new(json!({
        "experiment": "figure-2",
        "chain": chain_value(&cfg),
        "encoder": {"m0": CENTERED_M0},
        "schedule": {"kind": "naive", "C": STOP_C, "kicks": NAIVE_KICKS,
                     "convention": "kick-then-free"},
        "timeline": {"two_j_t1": T1_TWO_J, "two_j_t2": T2_TWO_J},
        "files": {"k100": "fig2a.csv", "k200": "fig2b.csv", "relaunch": "fig2c.csv"},
        "measurements": {
            "stop_centroid_displacement": stop_displacement,
            "relaunch_fidelity_vs_reference": relaunch_fidelity,
            "post_relaunch_centroid_displacement": relaunch_displacement,
            "max_norm_drift": run.max_norm_drift,
            "packets_k100": summary_value(&packet_summary(&k100)?),
            "packets_k200": summary_value(&packet_summary(&k200)?),
            "packets_relaunch": summary_value(&packet_summary(&final_profile)?),
        },
    }));

    Ok(FigureRun {
        name: "2",
        config: cfg,
        captures: vec![
            FigureCapture {
                file_stem: "fig2a".into(),
                label: run.captures[1].label.clone(),
                two_j_time: run.captures[1].two_j_time,
                kicks_applied: run.captures[1].kicks_applied,
                profile: k100,
            },
            FigureCapture {
                file_stem: "fig2b".into(),
                label: run.captures[2].label.clone(),
                two_j_time: run.captures[2].two_j_time,
                kicks_applied: run.captures[2].kicks_applied,
                profile: k200,
            },
            FigureCapture {
                file_stem: "fig2c".into(),
                label: run.captures[3].label.clone(),
                two_j_time: run.captures[3].two_j_time,
                kicks_applied: run.captures[3].kicks_applied,
                profile: final_profile,
            },
        ],
        manifest,
    })
}

/// The antisymmetric sequence: stop for 2M kicks, restore, relaunch.
fn stop_relaunch_run() -> Result<FigureRun> {
    let cfg = reference_config();
    let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg)?;
    let params = StoppingParams::new(STOP_C, STOP_M)?;
    let schedule = table1_schedule(&params, &cfg);
    let chaos_warning = params.chaos_warning(cfg.two_j_t0());
    let run = stopping_run(&spectrum, schedule, true)?;

    let k100 = probability_profile(&run.captures[1].state);
    let k200 = probability_profile(&run.captures[2].state);
    let final_profile = probability_profile(&run.final_state);
    let pre_profile = probability_profile(&run.pre_stop);
    let post_final_kick = run.post_final_kick.as_ref().expect("captured");

    let restoration_fidelity = fidelity(post_final_kick, &run.pre_stop)?;
    let relaunch_deviation = max_amplitude_deviation(&run.final_state, &run.reference)?;
    let reference_profile = probability_profile(&run.reference);
    let final_profile_deviation = final_profile.max_abs_diff(&reference_profile);
    let stop_displacement = pair_displacement(&pre_profile, &k200);
    // The 200-kick snapshot differs from the restored state only by the
    // final kick's diagonal phases, so their profiles must agree; record
    // the residual as evidence.
    let pfk_profile_vs_k200 = probability_profile(post_final_kick).max_abs_diff(&k200);

    let manifest = Manifest::new(json!({
        "experiment": "figure-3",
        "chain": chain_value(&cfg),
        "encoder": {"m0": CENTERED_M0},
        "schedule": {"kind": "antisymmetric", "C": STOP_C, "M": STOP_M,
                     "kicks": 2 * STOP_M + 1, "convention": "kick-then-free",
                     "residual_free_steps": 1,
                     "chaos_warning": chaos_warning},
        "timeline": {"two_j_t1": T1_TWO_J, "two_j_t2": T2_TWO_J},
        "files": {"k100": "fig3a.csv", "k200": "fig3b.csv", "relaunch": "fig3c.csv"},
        "measurements": {
            "restoration_fidelity": restoration_fidelity,
            "restoration_infidelity": 1.0 - restoration_fidelity,
            "relaunch_amplitude_deviation": relaunch_deviation,
            "final_profile_deviation_vs_reference": final_profile_deviation,
            "stop_centroid_displacement": stop_displacement,
            "post_final_kick_profile_vs_k200": pfk_profile_vs_k200,
            "max_norm_drift": run.max_norm_drift,
            "packets_k100": summary_value(&packet_summary(&k100)?),
            "packets_k200": summary_value(&packet_summary(&k200)?),
            "packets_relaunch": summary_value(&packet_summary(&final_profile)?),
        },
    }));

    Ok(FigureRun {
        name: "3",
        config: cfg,
        captures: vec![
            FigureCapture {
                file_stem: "fig3a".into(),
                label: run.captures[1].label.clone(),
                two_j_time: run.captures[1].two_j_time,
                kicks_applied: run.captures[1].kicks_applied,
                profile: k100,
            },
            FigureCapture {
                file_stem: "fig3b".into(),
                label: run.captures[2].label.clone(),
                two_j_time: run.captures[2].two_j_time,
                kicks_applied: run.captures[2].kicks_applied,
                profile: k200,
            },
            FigureCapture {
                file_stem: "fig3c".into(),
                label: run.captures[3].label.clone(),
                two_j_time: run.captures[3].two_j_time,
                kicks_applied: run.captures[3].kicks_applied,
                profile: final_profile,
            },
        ],
        manifest,
    })
}

// ---- identity checks --------------------------------------------------------

/// One measured quantity of a check, with the bound it must satisfy.
#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub label: String,
    pub measured: f64,
    pub bound: f64,
    /// "<=" or ">=": how `measured` relates to `bound` when passing.
    pub relation: &'static str,
    pub passed: bool,
}

impl CheckItem {
    fn at_most(label: impl Into<String>, measured: f64, bound: f64) -> Self {
        CheckItem {
            label: label.into(),
            measured,
            bound,
            relation: "<=",
            passed: measured <= bound,
        }
    }

    fn at_least(label: impl Into<String>, measured: f64, bound: f64) -> Self {
        CheckItem {
            label: label.into(),
            measured,
            bound,
            relation: ">=",
            passed: measured >= bound,
        }
    }
}

/// Machine-readable verdict of one identity check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check: &'static str,
    pub passed: bool,
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    fn from_items(check: &'static str, items: Vec<CheckItem>) -> Self {
        CheckReport {
            check,
            passed: items.iter().all(|i| i.passed),
            items,
        }
    }

    pub fn manifest(&self) -> Manifest {
        Manifest::new(serde_json::to_value(self).expect("check report serializes"))
    }
}

/// Which identity check to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckId {
    ParityIdentity,
    SequenceIdentity,
    Mapping,
    Oracle,
    DiffusionRate,
}

impl CheckId {
    pub const ALL: [CheckId; 5] = [
        CheckId::ParityIdentity,
        CheckId::SequenceIdentity,
        CheckId::Mapping,
        CheckId::Oracle,
        CheckId::DiffusionRate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckId::ParityIdentity => "parity-identity",
            CheckId::SequenceIdentity => "sequence-identity",
            CheckId::Mapping => "mapping",
            CheckId::Oracle => "oracle",
            CheckId::DiffusionRate => "diffusion-rate",
        }
    }
}

impl std::str::FromStr for CheckId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckId::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = CheckId::ALL.iter().map(|c| c.name()).collect();
                Error::InvalidConfig(format!(
                    "unknown check '{s}' (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

pub fn run_check(id: CheckId) -> Result<CheckReport> {
    match id {
        CheckId::ParityIdentity => check_parity_identity(),
        CheckId::SequenceIdentity => check_sequence_identity(),
        CheckId::Mapping => check_mapping(),
        CheckId::Oracle => check_oracle(),
        CheckId::DiffusionRate => check_diffusion_rate(),
    }
}

/// v(k) = u(2π)·v(−k)·u(2π) on truncated rotor matrices.
fn check_parity_identity() -> Result<CheckReport> {
    let mut items = Vec::new();
    for &(k, size) in &[(0.1, 256), (0.25, 256), (1.0, 256), (5.0, 512)] {
        let residual = parity_identity_residual(k, size);
        items.push(CheckItem::at_most(
            format!("parity residual, k={k}, size={size}"),
            residual,
            tol::PARITY_RESIDUAL_TOL,
        ));
    }
    Ok(CheckReport::from_items("parity-identity", items))
}

/// Full antisymmetric-sequence product vs V^1 on the hopping band.
fn check_sequence_identity() -> Result<CheckReport> {
    let cfg = ChainConfig::new(64, 1.0, 0.125, 33, 0.0)?;
    let spectrum = ChainSpectrum::new(&cfg, ChainModel::PureHopping)?;
    let schedule = table1_schedule(&StoppingParams::new(0.5, 4)?, &cfg);
    debug_assert_eq!(schedule.convention, KickConvention::KickThenFree);
    let op = crate::control::sequence_operator(&spectrum, &schedule)?;
    let v = spectrum.free_propagator(cfg.kick_period);
    let residual = op.max_abs_diff_up_to_phase(&v);
    let items = vec![CheckItem::at_most(
        "sequence operator vs V^s, s=1 (C=0.5, M=4, N=64, kick-then-free)",
        residual,
        tol::SEQUENCE_RESIDUAL_TOL,
    )];
    Ok(CheckReport::from_items("sequence-identity", items))
}

/// Chain free step vs rotor resonance propagator on the bulk window.
fn check_mapping() -> Result<CheckReport> {
    let cfg = reference_config();
    let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg)?;
    let chain_v = spectrum.free_propagator(cfg.kick_period);
    let rotor_v = resonance_propagator(cfg.two_j_t0(), cfg.n_sites);
    let residual = mapping_residual(&chain_v, &rotor_v, (51, 151))?;
    let items = vec![CheckItem::at_most(
        "chain V(2JT0) vs rotor v(k), central 101 sites, k=0.25",
        residual,
        tol::MAPPING_RESIDUAL_TOL,
    )];
    Ok(CheckReport::from_items("mapping", items))
}

/// Sector engine vs full 2^N brute force on seeded random schedules.
fn check_oracle() -> Result<CheckReport> {
    let mut items = Vec::new();
    for &n in &[8usize, 10, 12] {
        let cfg = ChainConfig::new(n, 1.0, 0.125, n / 2 + 1, 0.2)?;
        let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg)?;
        let schedule = crate::control::random_schedule(1.5, 20, 1000 + n as u64, &cfg)?;
        let events = schedule.to_events()?;
        let initial = ExcitationState::from_site_coefficients(
            n,
            &[2, n / 2 + 1, n - 1],
            &[0.5, -0.7, 0.5],
        )?;
        let sector = run_events(&spectrum, &initial, &events)?;
        let full = run_events_full(&cfg, &initial, &events)?;
        let deviation = max_amplitude_deviation(&sector, &full.final_state)?;
        items.push(CheckItem::at_most(
            format!("sector vs 2^{n} oracle, 20 kicks, amplitude deviation"),
            deviation,
            tol::ORACLE_AMPLITUDE_TOL,
        ));
        items.push(CheckItem::at_most(
            format!("sector leakage, N={n}"),
            full.leakage,
            1e-30,
        ));
    }
    Ok(CheckReport::from_items("oracle", items))
}

/// Measured resonance diffusion rate vs the operator expectation.
fn check_diffusion_rate() -> Result<CheckReport> {
    let k = 0.25;
    let size = 82;
    let sub = EncodingSubspace::five_site(41, size)?;
    let a = crate::encoder::resonance_diffusion_constant(k);
    let mut rates = Vec::new();
    let mut items = Vec::new();
    for (mode, tag) in [
        (max_diffusion_mode(&sub)?, "max"),
        (crate::encoder::min_diffusion_mode(&sub)?, "min"),
    ] {
        let state = RotorState::from_level_coefficients(size, &sub.sites(), &mode.betas)?;
        let measured = crate::encoder::measured_diffusion_rate(&state, k, 50)?;
        let predicted = a * crate::encoder::expectation_sin_sq(&state);
        items.push(CheckItem::at_most(
            format!("{tag}-D state: |measured/predicted − 1|, k={k}, 50 steps"),
            (measured / predicted - 1.0).abs(),
            tol::DIFFUSION_RATE_REL_TOL,
        ));
        rates.push(measured);
    }
    items.push(CheckItem::at_most(
        "rate ratio max/min vs (2+√3)², relative",
        (rates[0] / rates[1] / tol::RATE_RATIO_FIVE_STATE - 1.0).abs(),
        tol::RATE_RATIO_REL_TOL,
    ));
    items.push(CheckItem::at_least(
        "rate ratio max/min",
        rates[0] / rates[1],
        1.0,
    ));
    Ok(CheckReport::from_items("diffusion-rate", items))
}
