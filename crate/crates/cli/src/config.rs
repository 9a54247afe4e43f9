//! JSON config schema and its mapping onto core chain/timeline types.
//! Every container rejects unknown keys so a typo cannot silently change
//! an experiment.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use magnon_core::{
    naive_schedule, table1_schedule, ChainConfig, EncodingSubspace, Error, KickSchedule, Result,
    StoppingParams, TimelineSegment,
};

/// Snapshot file format. Manifests are always JSON.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// One experiment: chain, launch state, kick/free timeline, snapshots.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Chain geometry; the reference chain when omitted.
    pub chain: Option<ChainConfig>,
    /// Launch-state recipe; five-site max-diffusion comb at the kick
    /// center when omitted.
    pub encoder: Option<EncoderSpec>,
    /// Segments applied in order; empty means the encoded state is the
    /// final state.
    pub timeline: Option<Vec<SegmentSpec>>,
    /// File stems for the capture snapshots, in capture order.
    pub captures: Option<Vec<String>>,
    /// Output directory; --out overrides, $MAGNONCTL_OUT is the fallback.
    pub out: Option<PathBuf>,
    /// Snapshot format; --format overrides.
    pub format: Option<Format>,
}

/// Launch-state recipe: which comb and which diffusion extremum.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderSpec {
    /// Comb center; the chain's kick center when omitted.
    pub m0: Option<usize>,
    /// Comb size (odd, site spacing 2); 5 when omitted.
    pub states: Option<usize>,
    pub mode: Option<EncoderMode>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EncoderMode {
    #[default]
    MaxDiffusion,
    MinDiffusion,
}

impl EncoderMode {
    pub fn name(self) -> &'static str {
        match self {
            EncoderMode::MaxDiffusion => "max-diffusion",
            EncoderMode::MinDiffusion => "min-diffusion",
        }
    }
}

/// Launch-state recipe with defaults filled in.
pub struct ResolvedEncoder {
    pub subspace: EncodingSubspace,
    pub mode: EncoderMode,
}

pub fn resolve_encoder(
    spec: Option<&EncoderSpec>,
    chain: &ChainConfig,
) -> Result<ResolvedEncoder> {
    let m0 = spec.and_then(|s| s.m0).unwrap_or(chain.kick_center);
    let states = spec.and_then(|s| s.states).unwrap_or(5);
    if states == 0 {
        return Err(Error::InvalidConfig(
            "encoder needs at least one state".into(),
        ));
    }
    // Comb of `states` sites spaced 2 around m0; the subspace constructor
    // enforces the odd count and the chain-edge margins.
    let offsets: Vec<i64> = (0..states)
        .map(|i| 2 * i as i64 - (states as i64 - 1))
        .collect();
    let subspace = EncodingSubspace::new(m0, offsets, chain.n_sites)?;
    Ok(ResolvedEncoder {
        subspace,
        mode: spec.and_then(|s| s.mode).unwrap_or_default(),
    })
}

/// One timeline segment as written in config JSON.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SegmentSpec {
    Free {
        two_j_t: f64,
        #[serde(default)]
        capture: bool,
    },
    Schedule(ScheduleSegmentSpec),
}

/// A kick schedule plus its snapshot points.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSegmentSpec {
    pub kicks: ScheduleSpec,
    /// One-based kick indices to snapshot after.
    #[serde(default)]
    pub capture_at: Vec<usize>,
    #[serde(default)]
    pub capture_post_final_kick: bool,
}

/// Named schedule constructors plus a fully explicit escape hatch.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    /// Antisymmetric stop/relaunch sequence, 2M+1 kicks.
    Table1 { c: f64, m: usize },
    /// Constant-coefficient kicks, the unstaggered control case.
    Naive { c: f64, kicks: usize },
    Explicit(KickSchedule),
}

impl ScheduleSpec {
    pub fn build(&self, chain: &ChainConfig) -> Result<KickSchedule> {
        match self {
            ScheduleSpec::Table1 { c, m } => {
                let params = StoppingParams::new(*c, *m)?;
                if let Some(warning) = params.chaos_warning(chain.two_j_t0()) {
                    eprintln!("warning: {warning}");
                }
                Ok(table1_schedule(&params, chain))
            }
            ScheduleSpec::Naive { c, kicks } => naive_schedule(*c, *kicks, chain),
            ScheduleSpec::Explicit(schedule) => {
                schedule.validate()?;
                schedule.matches_config(chain)?;
                Ok(schedule.clone())
            }
        }
    }
}

impl SegmentSpec {
    pub fn to_segment(&self, chain: &ChainConfig) -> Result<TimelineSegment> {
        Ok(match self {
            SegmentSpec::Free { two_j_t, capture } => TimelineSegment::Free {
                two_j_t: *two_j_t,
                capture: *capture,
            },
            SegmentSpec::Schedule(spec) => TimelineSegment::Schedule {
                schedule: spec.kicks.build(chain)?,
                capture_at: spec.capture_at.clone(),
                capture_post_final_kick: spec.capture_post_final_kick,
            },
        })
    }

    /// Snapshots this segment will emit.
    pub fn capture_count(&self) -> usize {
        match self {
            SegmentSpec::Free { capture, .. } => usize::from(*capture),
            SegmentSpec::Schedule(spec) => {
                spec.capture_at.len() + usize::from(spec.capture_post_final_kick)
            }
        }
    }
}

/// Sweep plan: independent runs fanned out concurrently, one output
/// directory per run.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub runs: Vec<SweepEntry>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

/// One sweep run. Exactly one of `figure`, `check`, `config` picks what
/// it does.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepEntry {
    /// Directory name under the sweep root.
    pub name: String,
    pub figure: Option<String>,
    pub check: Option<String>,
    pub config: Option<ExperimentConfig>,
}

/// Names that become files or directories: ASCII alphanumerics plus
/// '.', '_', '-', no leading dot.
pub fn validate_path_component(what: &str, name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && !name.starts_with('.')
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "{what} '{name}' is not path-safe (ASCII alphanumerics, '.', '_', '-', \
             no leading dot)"
        )))
    }
}

pub fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
