//! Kick schedules and their execution: naive constant-C stopping, the
//! antisymmetric stop/relaunch sequence, and staggered J-sign-reversal
//! echoes.
//!
//! The stop/relaunch sequence over 2M+1 periods is
//!
//! ```text
//!   C_j = C/2 + 2π,  C×(M−1),  2π,  (−C)×(M−1),  −C/2
//! ```
//!
//! Splitting each kick into halves and using u(x+2π) = S·u(x) (S the
//! staggering signs) together with S·V·S = V⁻¹ telescopes the product of
//! all 2M+1 kicks and the 2M free steps *between* them to the identity, up
//! to global phase. In kick-then-free bookkeeping each period appends its
//! free step after the kick, so the full 2M+1-period product carries one
//! residual free step: it equals V(2JT0)·(phase). The frozen convention is
//! therefore s = 1 residual free step for kick-then-free, s = 0 for
//! symmetric-half-step (whose completing half-kick is the last operation of
//! the final period). Downstream time accounting uses `residual_free_steps`
//! rather than hard-coding either number.
//!
//! The telescoping argument needs S·V·S = V⁻¹, which holds for the pure
//! hopping band; the physical chain's edge diagonal terms break it only at
//! the boundary, so bulk packets restore to the same tolerance.

use crate::chain::{
    kick_operator, kick_operator_windowed, ChainConfig, ChainSpectrum, DiagonalUnitary,
    Propagator, PropagatorKind,
};
use crate::error::{Error, Result};
use crate::state::ExcitationState;
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// How a schedule entry C_j is turned into a one-period operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KickConvention {
    /// U(C_j) then V(2JT0). The physical reading of "kick at the start of
    /// each period"; leaves one residual free step after the final kick.
    #[default]
    KickThenFree,
    /// u(C_j/2), V(2JT0), u(C_j/2): the grouping used by the telescoping
    /// proof. No residual free step.
    SymmetricHalfStep,
}

/// Free steps remaining after the last kick of a schedule run under the
/// given convention, the time-shift the relaunch bookkeeping must absorb.
pub fn residual_free_steps(convention: KickConvention) -> usize {
    match convention {
        KickConvention::KickThenFree => 1,
        KickConvention::SymmetricHalfStep => 0,
    }
}

/// Ordered kick coefficients plus the shared period/center they presume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KickSchedule {
    pub convention: KickConvention,
    /// Kick period, raw time units.
    #[serde(rename = "T0")]
    pub period: f64,
    /// Parabola center site (one-based).
    #[serde(rename = "n0")]
    pub center: usize,
    /// Kick coefficients C_j in application order.
    pub entries: Vec<f64>,
    /// Optional site window (lo, hi), one-based inclusive: kick phases act
    /// only inside it. Used for selective single-packet addressing; no
    /// restoration property is claimed for windowed schedules.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(usize, usize)>,
}

impl KickSchedule {
    pub fn new(
        convention: KickConvention,
        period: f64,
        center: usize,
        entries: Vec<f64>,
    ) -> Result<Self> {
        let schedule = KickSchedule {
            convention,
            period,
            center,
            entries,
            window: None,
        };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::InvalidConfig("schedule has no entries".into()));
        }
        if self.period <= 0.0 || !self.period.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "schedule period must be positive and finite, got {}",
                self.period
            )));
        }
        if self.center == 0 {
            return Err(Error::InvalidConfig(
                "schedule center site must be ≥ 1".into(),
            ));
        }
        if let Some(c) = self.entries.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite kick entry {c}")));
        }
        if let Some((lo, hi)) = self.window {
            if lo == 0 || lo > hi {
                return Err(Error::InvalidConfig(format!(
                    "kick window ({lo}, {hi}) is empty or zero-based"
                )));
            }
        }
        Ok(())
    }

    pub fn with_window(mut self, lo: usize, hi: usize) -> Result<Self> {
        self.window = Some((lo, hi));
        self.validate()?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total schedule duration in raw time.
    pub fn duration(&self) -> f64 {
        self.period * self.entries.len() as f64
    }

    /// Checks the schedule's period/center against a chain config, so a
    /// schedule file can't silently run on the wrong chain.
    pub fn matches_config(&self, cfg: &ChainConfig) -> Result<()> {
        let rel = (self.period - cfg.kick_period).abs() / cfg.kick_period;
        if rel > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "schedule period {} does not match chain kick period {}",
                self.period, cfg.kick_period
            )));
        }
        if self.center != cfg.kick_center {
            return Err(Error::InvalidConfig(format!(
                "schedule center {} does not match chain kick center {}",
                self.center, cfg.kick_center
            )));
        }
        if let Some((_, hi)) = self.window {
            if hi > cfg.n_sites {
                return Err(Error::InvalidConfig(format!(
                    "kick window upper bound {hi} exceeds chain length {}",
                    cfg.n_sites
                )));
            }
        }
        Ok(())
    }

    fn kick_for(&self, strength: f64, cfg: &ChainConfig) -> Result<DiagonalUnitary> {
        kick_operator_windowed(strength, cfg, self.window)
    }

    /// The schedule as a flat pulse program, consumable by both the sector
    /// engine and the full-space oracle. Windowed schedules don't flatten:
    /// the pulse-event vocabulary has whole-chain kicks only.
    pub fn to_events(&self) -> Result<Vec<crate::chain::PulseEvent>> {
        use crate::chain::PulseEvent;
        if self.window.is_some() {
            return Err(Error::InvalidConfig(
                "windowed schedules have no pulse-event form".into(),
            ));
        }
        let mut events = Vec::with_capacity(3 * self.entries.len());
        for &c in &self.entries {
            match self.convention {
                KickConvention::KickThenFree => {
                    events.push(PulseEvent::Kick { strength: c });
                    events.push(PulseEvent::Free { time: self.period });
                }
                KickConvention::SymmetricHalfStep => {
                    events.push(PulseEvent::Kick { strength: 0.5 * c });
                    events.push(PulseEvent::Free { time: self.period });
                    events.push(PulseEvent::Kick { strength: 0.5 * c });
                }
            }
        }
        Ok(events)
    }
}

/// Base coefficient and half-length of the stop/relaunch sequence
/// (2M+1 kicks stop the packet for 2M periods, then relaunch it).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingParams {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "M")]
    pub m: usize,
}

/// Classical chaos border for the kicked-chain map: schedules with
/// |2JT0·C| beyond this leave the KAM-trapped regime and stop poorly.
pub const CHAOS_BORDER: f64 = 0.97;

impl StoppingParams {
    pub fn new(c: f64, m: usize) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "stopping coefficient must be finite, got {c}"
            )));
        }
        if m < 1 {
            return Err(Error::InvalidConfig(
                "stopping sequence needs half-length M ≥ 1".into(),
            ));
        }
        Ok(StoppingParams { c, m })
    }

    /// The shifted coefficient C' = C + 4π carried by the opening kick
    /// (whose entry is C'/2 = C/2 + 2π).
    pub fn c_prime(&self) -> f64 {
        self.c + 4.0 * PI
    }

    /// |K| of the equivalent classical standard map; kept well below
    /// [`CHAOS_BORDER`] the kicks trap rather than diffuse.
    pub fn classical_kick(&self, two_j_t0: f64) -> f64 {
        (two_j_t0 * self.c).abs()
    }

    /// Advisory emitted when the schedule leaves the KAM regime.
    pub fn chaos_warning(&self, two_j_t0: f64) -> Option<String> {
        let k = self.classical_kick(two_j_t0);
        (k > CHAOS_BORDER).then(|| {
            format!(
                "classical kick |2JT0·C| = {k:.3} exceeds the chaos border \
                 {CHAOS_BORDER}; stopping quality degrades outside the KAM \
                 regime"
            )
        })
    }
}

/// The antisymmetric stop/relaunch schedule:
/// [C/2+2π] ++ [C]×(M−1) ++ [2π] ++ [−C]×(M−1) ++ [−C/2], length 2M+1.
pub fn table1_schedule(params: &StoppingParams, cfg: &ChainConfig) -> KickSchedule {
    let (c, m) = (params.c, params.m);
    let mut entries = Vec::with_capacity(2 * m + 1);
    entries.push(0.5 * c + 2.0 * PI);
    entries.extend(std::iter::repeat_n(c, m - 1));
    entries.push(2.0 * PI);
    entries.extend(std::iter::repeat_n(-c, m - 1));
    entries.push(-0.5 * c);
    KickSchedule {
        convention: KickConvention::KickThenFree,
        period: cfg.kick_period,
        center: cfg.kick_center,
        entries,
        window: None,
    }
}

/// Constant-coefficient stopping: `count` identical kicks of strength C.
pub fn naive_schedule(c: f64, count: usize, cfg: &ChainConfig) -> Result<KickSchedule> {
    if count == 0 {
        return Err(Error::InvalidConfig(
            "naive schedule needs at least one kick".into(),
        ));
    }
    if !c.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "kick coefficient must be finite, got {c}"
        )));
    }
    KickSchedule::new(
        KickConvention::KickThenFree,
        cfg.kick_period,
        cfg.kick_center,
        vec![c; count],
    )
}

/// Seeded random schedule with entries uniform in [−magnitude, magnitude];
/// exercise fodder for the engine-equivalence checks.
pub fn random_schedule(
    magnitude: f64,
    count: usize,
    seed: u64,
    cfg: &ChainConfig,
) -> Result<KickSchedule> {
    if count == 0 {
        return Err(Error::InvalidConfig(
            "random schedule needs at least one kick".into(),
        ));
    }
    if magnitude <= 0.0 || !magnitude.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "kick magnitude must be positive and finite, got {magnitude}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..count)
        .map(|_| (2.0 * rng.random::<f64>() - 1.0) * magnitude)
        .collect();
    KickSchedule::new(
        KickConvention::KickThenFree,
        cfg.kick_period,
        cfg.kick_center,
        entries,
    )
}

/// Norm drift beyond this aborts a run: the engines are unitary to machine
/// precision, so larger drift means corrupted input or a broken operator.
pub const NORM_ALARM: f64 = 1e-9;

/// State snapshot taken after `after_kicks` complete periods.
#[derive(Debug, Clone)]
pub struct Capture {
    pub after_kicks: usize,
    pub state: ExcitationState,
}

/// Everything a schedule run leaves behind.
#[derive(Debug, Clone)]
pub struct RunRecord {
    /// Requested mid-run snapshots, ascending in `after_kicks`.
    pub captures: Vec<Capture>,
    /// State immediately after the final kick completes, before any
    /// residual free step (equals `final_state` under symmetric-half-step).
    pub post_final_kick: ExcitationState,
    /// State after all periods, residual free step included.
    pub final_state: ExcitationState,
    /// Largest |‖ψ‖ − 1| seen at any point of the run.
    pub max_norm_drift: f64,
}

/// Runs a schedule period by period, capturing the state after the
/// requested kick counts. Capture indices are 1-based and must not exceed
/// the schedule length.
pub fn run_schedule(
    spectrum: &ChainSpectrum,
    initial: &ExcitationState,
    schedule: &KickSchedule,
    capture_at: &[usize],
) -> Result<RunRecord> {
    let cfg = spectrum.config();
    schedule.matches_config(cfg)?;
    if initial.n_sites() != spectrum.n() {
        return Err(Error::DimensionMismatch {
            expected: spectrum.n(),
            actual: initial.n_sites(),
        });
    }
    for &idx in capture_at {
        if idx == 0 || idx > schedule.len() {
            return Err(Error::InvalidConfig(format!(
                "capture index {idx} outside 1..={}",
                schedule.len()
            )));
        }
    }
    let mut wanted: Vec<usize> = capture_at.to_vec();
    wanted.sort_unstable();
    wanted.dedup();

    let mut state = initial.clone();
    let mut max_drift = (state.norm() - 1.0).abs();
    let mut captures = Vec::with_capacity(wanted.len());
    let mut post_final_kick = None;
    let last = schedule.len();

    for (j, &c) in schedule.entries.iter().enumerate() {
        match schedule.convention {
            KickConvention::KickThenFree => {
                let kicked = schedule.kick_for(c, cfg)?.apply(&state)?;
                if j + 1 == last {
                    post_final_kick = Some(kicked.clone());
                }
                state = spectrum.evolve(&kicked, schedule.period)?;
            }
            KickConvention::SymmetricHalfStep => {
                let half = schedule.kick_for(0.5 * c, cfg)?;
                state = half.apply(&spectrum.evolve(&half.apply(&state)?, schedule.period)?)?;
                if j + 1 == last {
                    post_final_kick = Some(state.clone());
                }
            }
        }
        max_drift = max_drift.max((state.norm() - 1.0).abs());
        if max_drift > NORM_ALARM {
            return Err(Error::NormDrift {
                norm: state.norm(),
                tolerance: NORM_ALARM,
            });
        }
        if wanted.binary_search(&(j + 1)).is_ok() {
            captures.push(Capture {
                after_kicks: j + 1,
                state: state.clone(),
            });
        }
    }

    Ok(RunRecord {
        captures,
        post_final_kick: post_final_kick.expect("schedule validated non-empty"),
        final_state: state,
        max_norm_drift: max_drift,
    })
}

/// Dense-product budget for [`sequence_operator`].
pub const SEQUENCE_OPERATOR_MAX_SITES: usize = 256;

/// The full ordered product of a schedule's kick and free-step unitaries,
/// for operator-level identity checks. Dense N×N products, so the chain
/// must be modest.
pub fn sequence_operator(spectrum: &ChainSpectrum, schedule: &KickSchedule) -> Result<Propagator> {
    let cfg = spectrum.config();
    schedule.matches_config(cfg)?;
    let n = spectrum.n();
    if n > SEQUENCE_OPERATOR_MAX_SITES {
        return Err(Error::InvalidConfig(format!(
            "sequence_operator builds dense products; N = {n} exceeds {SEQUENCE_OPERATOR_MAX_SITES}"
        )));
    }
    let v = spectrum.free_propagator(schedule.period);
    let mut product = Array2::<Complex64>::eye(n);
    for &c in &schedule.entries {
        match schedule.convention {
            KickConvention::KickThenFree => {
                product = schedule.kick_for(c, cfg)?.scale_rows(&product);
                product = v.matrix.dot(&product);
            }
            KickConvention::SymmetricHalfStep => {
                let half = schedule.kick_for(0.5 * c, cfg)?;
                product = half.scale_rows(&product);
                product = v.matrix.dot(&product);
                product = half.scale_rows(&product);
            }
        }
    }
    Ok(Propagator {
        matrix: product,
        kind: PropagatorKind::Composite,
    })
}

/// U(2π)·V(2JT0)·U(2π): the staggered step that propagates bulk packets as
/// if the coupling sign were reversed. Exact on the hopping band; the
/// physical chain's edge diagonal does not flip, so the equivalence to
/// V(−2JT0) is bulk-only.
pub fn reversed_j_step(spectrum: &ChainSpectrum) -> Result<Propagator> {
    let cfg = spectrum.config();
    let stagger = kick_operator(2.0 * PI, cfg)?;
    let v = spectrum.free_propagator(cfg.kick_period);
    let mut m = stagger.scale_rows(&v.matrix);
    // Right multiplication by a diagonal scales columns.
    for (j, phase) in stagger.phases.iter().enumerate() {
        for item in m.column_mut(j).iter_mut() {
            *item *= phase;
        }
    }
    Ok(Propagator {
        matrix: m,
        kind: PropagatorKind::Composite,
    })
}

/// One leg of an experiment timeline.
#[derive(Debug, Clone)]
pub enum TimelineSegment {
    /// Free flight for a dimensionless duration 2Jt; optionally snapshot
    /// the state when it ends.
    Free { two_j_t: f64, capture: bool },
    /// A kick schedule with mid-run capture indices; optionally snapshot
    /// the post-final-kick state too.
    Schedule {
        schedule: KickSchedule,
        capture_at: Vec<usize>,
        capture_post_final_kick: bool,
    },
}

/// Ordered segments applied to one initial state.
#[derive(Debug, Clone, Default)]
pub struct ExperimentTimeline {
    pub segments: Vec<TimelineSegment>,
}

impl ExperimentTimeline {
    pub fn new(segments: Vec<TimelineSegment>) -> Self {
        ExperimentTimeline { segments }
    }
}

/// A snapshot emitted by [`run_timeline`], tagged with where it was taken.
#[derive(Debug, Clone)]
pub struct TimelineCapture {
    /// Human-readable origin: "t=15" for free-segment ends, "k=100" for
    /// mid-schedule captures, "post-final-kick" for the completing kick.
    pub label: String,
    /// Cumulative dimensionless time 2Jt when the snapshot was taken.
    pub two_j_time: f64,
    /// Cumulative kicks applied when the snapshot was taken.
    pub kicks_applied: usize,
    pub state: ExcitationState,
}

/// Everything a timeline run leaves behind.
#[derive(Debug, Clone)]
pub struct TimelineRecord {
    pub captures: Vec<TimelineCapture>,
    pub final_state: ExcitationState,
    pub max_norm_drift: f64,
    /// Total dimensionless duration 2Jt of the run.
    pub total_two_j_time: f64,
    pub total_kicks: usize,
}

/// Executes segments in order, accumulating time/kick bookkeeping and the
/// requested snapshots. Deterministic: identical inputs give identical
/// records.
pub fn run_timeline(
    spectrum: &ChainSpectrum,
    initial: &ExcitationState,
    timeline: &ExperimentTimeline,
) -> Result<TimelineRecord> {
    let mut state = initial.clone();
    let mut captures = Vec::new();
    let mut max_drift = (state.norm() - 1.0).abs();
    let mut two_j_time = 0.0;
    let mut kicks = 0usize;

    for segment in &timeline.segments {
        match segment {
            TimelineSegment::Free { two_j_t, capture } => {
                if *two_j_t < 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "free segment duration 2Jt = {two_j_t} is negative"
                    )));
                }
                state = spectrum.evolve_two_j_t(&state, *two_j_t)?;
                two_j_time += two_j_t;
                max_drift = max_drift.max((state.norm() - 1.0).abs());
                if *capture {
                    captures.push(TimelineCapture {
                        label: format!("t={two_j_time}"),
                        two_j_time,
                        kicks_applied: kicks,
                        state: state.clone(),
                    });
                }
            }
            TimelineSegment::Schedule {
                schedule,
                capture_at,
                capture_post_final_kick,
            } => {
                let record = run_schedule(spectrum, &state, schedule, capture_at)?;
                let period_two_j = 2.0 * spectrum.config().coupling * schedule.period;
                for cap in record.captures {
                    captures.push(TimelineCapture {
                        label: format!("k={}", kicks + cap.after_kicks),
                        two_j_time: two_j_time + period_two_j * cap.after_kicks as f64,
                        kicks_applied: kicks + cap.after_kicks,
                        state: cap.state,
                    });
                }
                if *capture_post_final_kick {
                    captures.push(TimelineCapture {
                        label: "post-final-kick".into(),
                        two_j_time: two_j_time
                            + period_two_j
                                * (schedule.len() - residual_free_steps(schedule.convention))
                                    as f64,
                        kicks_applied: kicks + schedule.len(),
                        state: record.post_final_kick.clone(),
                    });
                }
                two_j_time += period_two_j * schedule.len() as f64;
                kicks += schedule.len();
                max_drift = max_drift.max(record.max_norm_drift);
                state = record.final_state;
            }
        }
        if max_drift > NORM_ALARM {
            return Err(Error::NormDrift {
                norm: state.norm(),
                tolerance: NORM_ALARM,
            });
        }
    }

    Ok(TimelineRecord {
        captures,
        final_state: state,
        max_norm_drift: max_drift,
        total_two_j_time: two_j_time,
        total_kicks: kicks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{bessel_kernel, ChainModel};
    use crate::encoder::{max_diffusion_state, EncodingSubspace};
    use ndarray::Array1;

    fn cfg201() -> ChainConfig {
        ChainConfig::new(201, 1.0, 0.125, 101, 0.0).unwrap()
    }

    fn small_cfg(n: usize) -> ChainConfig {
        ChainConfig::new(n, 1.0, 0.125, n / 2 + 1, 0.0).unwrap()
    }

    /// Probability centroids of the left/right halves of the chain, split
    /// at the kick center; enough to track a symmetric packet pair.
    fn half_centroids(state: &ExcitationState, center: usize) -> (f64, f64) {
        crate::analysis::probability_profile(state).half_centroids(center)
    }

    fn packet_pair(spectrum: &ChainSpectrum, two_j_t: f64) -> ExcitationState {
        let sub = EncodingSubspace::five_site(101, 201).unwrap();
        let encoded = max_diffusion_state(&sub).unwrap();
        spectrum
            .evolve(&encoded, spectrum.config().time_for(two_j_t))
            .unwrap()
    }

    #[test]
    fn table1_entries_match_frozen_layout() {
        let cfg = cfg201();
        let s1 = table1_schedule(&StoppingParams::new(0.5, 1).unwrap(), &cfg);
        assert_eq!(s1.entries.len(), 3);
        assert_eq!(s1.entries[0], 0.25 + 2.0 * PI);
        assert_eq!(s1.entries[1], 2.0 * PI);
        assert_eq!(s1.entries[2], -0.25);

        let s2 = table1_schedule(&StoppingParams::new(0.5, 2).unwrap(), &cfg);
        assert_eq!(
            s2.entries,
            vec![2.0 * PI + 0.25, 0.5, 2.0 * PI, -0.5, -0.25]
        );

        let s100 = table1_schedule(&StoppingParams::new(0.5, 100).unwrap(), &cfg);
        assert_eq!(s100.entries.len(), 201);
        assert_eq!(s100.entries[0], 0.25 + 2.0 * PI);
        assert_eq!(s100.entries[100], 2.0 * PI);
        assert_eq!(s100.entries[200], -0.25);
        // Antisymmetry makes the total kick budget 4π for every M.
        let total: f64 = s100.entries.iter().sum();
        assert!((total - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn stopping_params_guards_and_warning() {
        assert!(StoppingParams::new(0.5, 0).is_err());
        assert!(StoppingParams::new(f64::NAN, 3).is_err());
        let p = StoppingParams::new(0.5, 100).unwrap();
        assert!((p.c_prime() - (0.5 + 4.0 * PI)).abs() < 1e-15);
        assert!(p.chaos_warning(0.25).is_none());
        let hot = StoppingParams::new(8.0, 5).unwrap();
        assert!(hot.chaos_warning(0.25).is_some());
    }

    #[test]
    fn naive_schedule_shape() {
        let cfg = cfg201();
        let s = naive_schedule(0.5, 200, &cfg).unwrap();
        assert_eq!(s.entries, vec![0.5; 200]);
        assert!(naive_schedule(0.0, 3, &cfg).is_ok());
        assert!(naive_schedule(0.5, 0, &cfg).is_err());
    }

    #[test]
    fn schedule_json_round_trip() {
        let cfg = cfg201();
        let s = table1_schedule(&StoppingParams::new(0.5, 2).unwrap(), &cfg);
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"convention\":\"kick-then-free\""));
        assert!(json.contains("\"T0\":0.125"));
        assert!(json.contains("\"n0\":101"));
        let back: KickSchedule = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        // Unknown keys are rejected, not ignored.
        let bad = json.replacen("\"T0\"", "\"T1\"", 1);
        assert!(serde_json::from_str::<KickSchedule>(&bad).is_err());
    }

    #[test]
    fn schedule_config_mismatch_is_caught() {
        let cfg = cfg201();
        let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg).unwrap();
        let mut s = naive_schedule(0.5, 3, &cfg).unwrap();
        s.center = 100;
        let psi = ExcitationState::site_basis(201, 101).unwrap();
        assert!(run_schedule(&spectrum, &psi, &s, &[]).is_err());
    }

    #[test]
    fn all_zero_schedule_is_free_evolution() {
        let cfg = small_cfg(64);
        let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg).unwrap();
        let psi = ExcitationState::site_basis(64, 20).unwrap();
        let s = naive_schedule(0.0, 7, &cfg).unwrap();
        let record = run_schedule(&spectrum, &psi, &s, &[]).unwrap();
        let free = spectrum.evolve(&psi, 7.0 * cfg.kick_period).unwrap();
        for (a, b) in record
            .final_state
            .amplitudes()
            .iter()
            .zip(free.amplitudes().iter())
        {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn sequence_operator_zero_schedule_is_v_power() {
        let cfg = small_cfg(32);
        let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg).unwrap();
        let s = naive_schedule(0.0, 3, &cfg).unwrap();
        let op = sequence_operator(&spectrum, &s).unwrap();
        let v3 = spectrum.free_propagator(3.0 * cfg.kick_period);
        assert!(op.max_abs_diff(&v3) < 1e-13);
    }

    #[test]
    fn sequence_operator_rejects_big_chains() {
        let cfg = small_cfg(300);
        let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg).unwrap();
        let s = naive_schedule(0.5, 2, &cfg).unwrap();
        assert!(sequence_operator(&spectrum, &s).is_err());
    }

    #[test]
    fn double_stagger_schedule_collapses_to_identity() {
        // [2π, 2π] under kick-then-free: V·S·V·S = V·V⁻¹ = 1 on the pure
        // hopping band, and u(2π)² = u(4π) = 1 makes the kicks cancel.
        let cfg = small_cfg(32);
        let spectrum = ChainSpectrum::new(&cfg, ChainModel::PureHopping).unwrap();
        let s = KickSchedule::new(
            KickConvention::KickThenFree,
            cfg.kick_period,
            cfg.kick_center,
            vec![2.0 * PI, 2.0 * PI],
        )
        .unwrap();
        let op = sequence_operator(&spectrum, &s).unwrap();
        let eye = Propagator {
            matrix: Array2::<Complex64>::eye(32),
            kind: PropagatorKind::Composite,
        };
        assert!(op.max_abs_diff(&eye) < 1e-13);
        // And the half-kick route: u(4π) is the literal identity.
        let u4 = kick_operator(4.0 * PI, &cfg).unwrap();
        for p in u4.phases.iter() {
            assert_eq!(*p, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn table1_sequence_is_v_to_the_s() {
        // The frozen identity: on the pure hopping band the full 2M+1
        // period product equals V^s up to global phase, s = 1 residual
        // free step under kick-then-free.
        let cfg = ChainConfig::new(64, 1.0, 0.125, 33, 0.0).unwrap();
        let spectrum = ChainSpectrum::new(&cfg, ChainModel::PureHopping).unwrap();
        let schedule = table1_schedule(&StoppingParams::new(0.5, 4).unwrap(), &cfg);
        let op = sequence_operator(&spectrum, &schedule).unwrap();
        let v = spectrum.free_propagator(cfg.kick_period);
        let residual = op.max_abs_diff_up_to_phase(&v);
        assert!(
            residual < 1e-12,
            "sequence vs V^1 residual {residual:.3e} exceeds 1e-12"
        );
        // Stripping the residual free step leaves the identity.
        let v_dag = v.matrix.t().mapv(|z| z.conj());
        let pfk = Propagator {
            matrix: v_dag.dot(&op.matrix),
            kind: PropagatorKind::Composite,
        };
        let eye = Propagator {
            matrix: Array2::<Complex64>::eye(64),
            kind: PropagatorKind::Composite,
        };
        assert!(pfk.max_abs_diff_up_to_phase(&eye) < 1e-12);
    }

    #[test]
    fn run_schedule_restores_bulk_state_after_final_kick() {
        // State-level version of the sequence identity, via the recorded
        // post-final-kick snapshot.
        let cfg = ChainConfig::new(64, 1.0, 0.125, 33, 0.0).unwrap();
        let spectrum = ChainSpectrum::new(&cfg, ChainModel::PureHopping).unwrap();
        let schedule = table1_schedule(&StoppingParams::new(0.5, 2).unwrap(), &cfg);
        let psi = ExcitationState::from_site_coefficients(
            64,
            &[31, 32, 33, 34, 35],
            &[0.2, -0.4, 0.7, -0.4, 0.2],
        )
        .unwrap();
        let record = run_schedule(&spectrum, &psi, &schedule, &[2, 4, 5]).unwrap();
        assert_eq!(
            record
                .captures
                .iter()
                .map(|c| c.after_kicks)
                .collect::<Vec<_>>(),
            vec![2, 4, 5]
        );
        let overlap = psi.overlap(&record.post_final_kick).norm_sqr();
        assert!(
            overlap > 1.0 - 1e-12,
            "post-final-kick fidelity {overlap} below restoration bar"
        );
        // final_state is exactly one more free step.
        let relaunched = spectrum
            .evolve(&record.post_final_kick, cfg.kick_period)
            .unwrap();
        for (a, b) in record
            .final_state
            .amplitudes()
            .iter()
            .zip(relaunched.amplitudes().iter())
        {
            assert!((a - b).norm() < 1e-13);
        }
        assert!(record.max_norm_drift < 1e-13);
    }

    #[test]
    fn symmetric_convention_agrees_with_regrouped_product() {
        // u(C/2)·V·u(C/2) per entry: for a single entry this equals the
        // kick-then-free operator conjugated by half-kicks.
        let cfg = small_cfg(32);
        let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg).unwrap();
        let c = 0.7;
        let sym = KickSchedule::new(
            KickConvention::SymmetricHalfStep,
            cfg.kick_period,
            cfg.kick_center,
            vec![c],
        )
        .unwrap();
        let op = sequence_operator(&spectrum, &sym).unwrap();
        let half = kick_operator(0.5 * c, &cfg).unwrap();
        let v = spectrum.free_propagator(cfg.kick_period);
        let mut want = half.scale_rows(&v.matrix);
        for (j, phase) in half.phases.iter().enumerate() {
            for item in want.column_mut(j).iter_mut() {
                *item *= phase;
            }
        }
        let want = Propagator {
            matrix: want,
            kind: PropagatorKind::Composite,
        };
        assert!(op.max_abs_diff(&want) < 1e-13);
        assert_eq!(residual_free_steps(KickConvention::SymmetricHalfStep), 0);
        assert_eq!(residual_free_steps(KickConvention::KickThenFree), 1);
    }

    #[test]
    fn norm_alarm_fires_on_corrupted_input() {
        let cfg = small_cfg(16);
        let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg).unwrap();
        let mut arr = Array1::<Complex64>::zeros(16);
        arr[7] = Complex64::new(1.0 + 5e-9, 0.0);
        let bad = ExcitationState::from_array_unchecked(arr);
        let s = naive_schedule(0.5, 2, &cfg).unwrap();
        let res = run_schedule(&spectrum, &bad, &s, &[]);
        assert!(matches!(res, Err(Error::NormDrift { .. })));
    }

    #[test]
    fn capture_indices_validated() {
        let cfg = small_cfg(16);
        let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg).unwrap();
        let psi = ExcitationState::site_basis(16, 8).unwrap();
        let s = naive_schedule(0.5, 4, &cfg).unwrap();
        assert!(run_schedule(&spectrum, &psi, &s, &[0]).is_err());
        assert!(run_schedule(&spectrum, &psi, &s, &[5]).is_err());
        assert!(run_schedule(&spectrum, &psi, &s, &[4, 1, 1]).is_ok());
    }

    #[test]
    fn windowed_kick_spares_sites_outside() {
        let cfg = cfg201();
        let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg).unwrap();
        let s = naive_schedule(0.7, 1, &cfg)
            .unwrap()
            .with_window(1, 90)
            .unwrap();
        // Packet far outside the window: the kick is a no-op there, so the
        // run is plain free evolution.
        let right = ExcitationState::site_basis(201, 150).unwrap();
        let rec = run_schedule(&spectrum, &right, &s, &[]).unwrap();
        let free = spectrum.evolve(&right, cfg.kick_period).unwrap();
        for (a, b) in rec
            .final_state
            .amplitudes()
            .iter()
            .zip(free.amplitudes().iter())
        {
            assert!((a - b).norm() < 1e-12);
        }
        // A state spread inside the window feels it. (A single-site state
        // would not: a diagonal kick only contributes a global phase.)
        let left = ExcitationState::from_site_coefficients(
            201,
            &[48, 50, 52],
            &[0.5, std::f64::consts::FRAC_1_SQRT_2, 0.5],
        )
        .unwrap();
        let rec_l = run_schedule(&spectrum, &left, &s, &[]).unwrap();
        let free_l = spectrum.evolve(&left, cfg.kick_period).unwrap();
        let fid = rec_l.final_state.overlap(&free_l).norm_sqr();
        assert!(fid < 1.0 - 1e-6, "windowed kick had no effect: {fid}");
    }

    #[test]
    fn reversed_step_echo_refocuses_bulk_pair() {
        let cfg = cfg201();
        let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg).unwrap();
        let pair = packet_pair(&spectrum, 15.0);
        let reversed = reversed_j_step(&spectrum).unwrap();
        let forward = spectrum.free_propagator(cfg.kick_period);
        let mut state = pair.clone();
        let steps = 40;
        for _ in 0..steps {
            state = forward.apply(&state).unwrap();
        }
        for _ in 0..steps {
            state = reversed.apply(&state).unwrap();
        }
        let fid = state.overlap(&pair).norm_sqr();
        assert!(fid > 0.999, "echo fidelity {fid} below 0.999");
        assert!((state.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reversed_step_matches_negative_kernel_in_bulk() {
        let cfg = cfg201();
        let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg).unwrap();
        let reversed = reversed_j_step(&spectrum).unwrap();
        let negative = bessel_kernel(&cfg, -cfg.kick_period).unwrap();
        let mut worst = 0.0f64;
        for i in 50..151 {
            for j in 50..151 {
                worst = worst.max((reversed.matrix[[i, j]] - negative.matrix[[i, j]]).norm());
            }
        }
        assert!(
            worst < 1e-6,
            "central-block reversal residual {worst:.3e} exceeds 1e-6"
        );
    }

    #[test]
    fn table1_restoration_on_heisenberg_pair() {
        // Module-scale version of the stop/relaunch experiment (M = 10);
        // the full M = 100 figure run lives in the acceptance suite.
        let cfg = cfg201();
        let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg).unwrap();
        let pair = packet_pair(&spectrum, 15.0);
        let params = StoppingParams::new(0.5, 10).unwrap();
        let schedule = table1_schedule(&params, &cfg);
        let record = run_schedule(&spectrum, &pair, &schedule, &[]).unwrap();
        let fid = record.post_final_kick.overlap(&pair).norm_sqr();
        assert!(
            fid > 1.0 - 1e-12,
            "restoration fidelity 1 - {:.3e} below bar",
            1.0 - fid
        );

        // Relaunch bookkeeping: the sequence acts as V^1, so free flight
        // afterwards must match the unstopped reference shifted by one
        // period.
        let relaunch_two_j_t = 10.0;
        let final_state = spectrum
            .evolve_two_j_t(&record.final_state, relaunch_two_j_t - cfg.two_j_t0())
            .unwrap();
        let reference = spectrum
            .evolve_two_j_t(&pair, relaunch_two_j_t)
            .unwrap();
        let mut aligned_diff = 0.0f64;
        // Align global phase on the largest amplitude before comparing.
        let pivot = reference
            .amplitudes()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(i, _)| i)
            .unwrap();
        let phase = reference.amplitudes()[pivot] / final_state.amplitudes()[pivot];
        let phase = phase / phase.norm();
        for (a, b) in final_state
            .amplitudes()
            .iter()
            .zip(reference.amplitudes().iter())
        {
            aligned_diff = aligned_diff.max((a * phase - b).norm());
        }
        assert!(
            aligned_diff < 1e-9,
            "relaunch deviates from reference by {aligned_diff:.3e}"
        );
    }

    #[test]
    fn naive_stop_freezes_then_fails_to_relaunch() {
        let cfg = cfg201();
        let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg).unwrap();
        let pair = packet_pair(&spectrum, 15.0);
        let schedule = naive_schedule(0.5, 200, &cfg).unwrap();
        let record = run_schedule(&spectrum, &pair, &schedule, &[100, 200]).unwrap();

        // Frozen during the kicks: centroids barely move over 200 periods.
        let (l0, r0) = half_centroids(&pair, 101);
        let (l2, r2) = half_centroids(&record.captures[1].state, 101);
        assert!(
            (l2 - l0).abs() <= 2.0 && (r2 - r0).abs() <= 2.0,
            "naive stop drifted: left {l0}->{l2}, right {r0}->{r2}"
        );

        // Relaunch fails: fidelity to the clean reference collapses...
        let relaunch_two_j_t = 30.0;
        let relaunched = spectrum
            .evolve_two_j_t(&record.final_state, relaunch_two_j_t - cfg.two_j_t0())
            .unwrap();
        let reference = spectrum.evolve_two_j_t(&pair, relaunch_two_j_t).unwrap();
        let fid = relaunched.overlap(&reference).norm_sqr();
        assert!(fid < 0.9, "naive relaunch fidelity {fid} suspiciously high");

        // ...because the packets stay put instead of flying on.
        let (l3, r3) = half_centroids(&relaunched, 101);
        let (lf, rf) = half_centroids(&record.final_state, 101);
        assert!(
            (l3 - lf).abs() < 3.0 && (r3 - rf).abs() < 3.0,
            "naively stopped packets moved after relaunch: left {lf}->{l3}, right {rf}->{r3}"
        );
    }

    #[test]
    fn zeno_scaling_displacement_shrinks_with_period() {
        // Fixed kick budget C·count and fixed total stop time; finer
        // periods freeze the packet harder.
        let mut displacements = Vec::new();
        for &(c, count, period) in
            &[(1.0f64, 60usize, 0.25f64), (0.5, 120, 0.125), (0.25, 240, 0.0625)]
        {
            let cfg = ChainConfig::new(201, 1.0, period, 101, 0.0).unwrap();
            let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg).unwrap();
            let pair = packet_pair(&spectrum, 15.0);
            let schedule = naive_schedule(c, count, &cfg).unwrap();
            let record = run_schedule(&spectrum, &pair, &schedule, &[]).unwrap();
            let (l0, r0) = half_centroids(&pair, 101);
            let (l1, r1) = half_centroids(&record.final_state, 101);
            displacements.push((l1 - l0).abs().max((r1 - r0).abs()));
        }
        assert!(
            displacements[0] > displacements[1] && displacements[1] > displacements[2],
            "Zeno scaling not monotonic: {displacements:?}"
        );
    }

    #[test]
    fn empty_timeline_returns_initial() {
        let cfg = small_cfg(16);
        let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg).unwrap();
        let psi = ExcitationState::site_basis(16, 8).unwrap();
        let record = run_timeline(&spectrum, &psi, &ExperimentTimeline::default()).unwrap();
        assert!(record.captures.is_empty());
        assert_eq!(record.total_kicks, 0);
        assert_eq!(record.total_two_j_time, 0.0);
        assert_eq!(record.final_state, psi);
    }

    #[test]
    fn timeline_bookkeeping_adds_up() {
        let cfg = cfg201();
        let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg).unwrap();
        let sub = EncodingSubspace::five_site(101, 201).unwrap();
        let encoded = max_diffusion_state(&sub).unwrap();
        let schedule = table1_schedule(&StoppingParams::new(0.5, 2).unwrap(), &cfg);
        let timeline = ExperimentTimeline::new(vec![
            TimelineSegment::Free {
                two_j_t: 15.0,
                capture: true,
            },
            TimelineSegment::Schedule {
                schedule: schedule.clone(),
                capture_at: vec![2],
                capture_post_final_kick: true,
            },
            TimelineSegment::Free {
                two_j_t: 10.0,
                capture: true,
            },
        ]);
        let record = run_timeline(&spectrum, &encoded, &timeline).unwrap();
        assert_eq!(record.total_kicks, 5);
        let want_time = 15.0 + 5.0 * cfg.two_j_t0() + 10.0;
        assert!((record.total_two_j_time - want_time).abs() < 1e-12);
        let labels: Vec<&str> = record.captures.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, vec!["t=15", "k=2", "post-final-kick", "t=26.25"]);
        assert_eq!(record.captures[1].kicks_applied, 2);
        assert_eq!(record.captures[2].kicks_applied, 5);
        // Timeline result equals running the pieces by hand.
        let by_hand = {
            let s1 = spectrum.evolve_two_j_t(&encoded, 15.0).unwrap();
            let r = run_schedule(&spectrum, &s1, &schedule, &[]).unwrap();
            spectrum.evolve_two_j_t(&r.final_state, 10.0).unwrap()
        };
        for (a, b) in record
            .final_state
            .amplitudes()
            .iter()
            .zip(by_hand.amplitudes().iter())
        {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn events_form_matches_direct_run() {
        let cfg = small_cfg(32);
        let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg).unwrap();
        let psi = ExcitationState::site_basis(32, 12).unwrap();
        for convention in [
            KickConvention::KickThenFree,
            KickConvention::SymmetricHalfStep,
        ] {
            let s = KickSchedule::new(convention, cfg.kick_period, cfg.kick_center, vec![0.4, -0.9])
                .unwrap();
            let record = run_schedule(&spectrum, &psi, &s, &[]).unwrap();
            let via_events =
                crate::chain::run_events(&spectrum, &psi, &s.to_events().unwrap()).unwrap();
            for (a, b) in record
                .final_state
                .amplitudes()
                .iter()
                .zip(via_events.amplitudes().iter())
            {
                assert!((a - b).norm() < 1e-13);
            }
        }
        let windowed = naive_schedule(0.5, 2, &cfg)
            .unwrap()
            .with_window(1, 10)
            .unwrap();
        assert!(windowed.to_events().is_err());
    }

    #[test]
    fn timeline_rejects_negative_free_segment() {
        let cfg = small_cfg(16);
        let spectrum = ChainSpectrum::new(&cfg, ChainModel::Heisenberg).unwrap();
        let psi = ExcitationState::site_basis(16, 8).unwrap();
        let timeline = ExperimentTimeline::new(vec![TimelineSegment::Free {
            two_j_t: -1.0,
            capture: false,
        }]);
        assert!(run_timeline(&spectrum, &psi, &timeline).is_err());
    }
}
