//! Wavepacket control on a spin chain, restricted to its single-excitation
//! sector.
//!
//! The crate covers the full experiment cycle: encode a slow-dispersing
//! packet pair on a sparse comb of sites, let it fly, freeze it in place
//! with a train of parabolically phased kicks, and relaunch it with the
//! original coherence intact. The stopping sequence works because each kick
//! period maps onto one step of a quantum kicked rotor at resonance, where
//! an antisymmetric strength pattern telescopes to a single free step.
//!
//! Module map:
//!
//! - [`chain`]: sector Hamiltonian, exact spectral propagators, kick phases;
//! - [`encoder`]: packet shapes from diffusion-rate extremals;
//! - [`control`]: kick schedules and multi-segment experiment timelines;
//! - [`rotor`]: the rotor picture and its parity/mapping identities;
//! - [`analysis`], [`export`]: profiles, packet statistics, fidelities,
//!   byte-stable CSV/JSON emission;
//! - [`experiments`]: frozen reference figures and identity checks, shared
//!   by the CLI and the acceptance tests;
//! - [`oracle`]: brute-force full-Hilbert-space cross-check for small chains;
//! - [`stdmap`]: classical standard map, for kick-strength chaos estimates;
//! - [`tolerances`]: every numeric bound the test suite holds the crate to.
//!
//! Conventions: sites and rotor levels are one-based; times are quoted as
//! the dimensionless 2Jt unless a function says otherwise; all propagators
//! are exactly unitary up to rounding, and runners alarm on norm drift
//! rather than renormalize.

pub mod analysis;
pub mod bessel;
pub mod chain;
pub mod control;
pub mod eigen;
pub mod encoder;
pub mod error;
pub mod experiments;
pub mod export;
pub mod oracle;
pub mod rotor;
pub mod state;
pub mod stdmap;
pub mod tolerances;

pub use analysis::{
    centroid_track, fidelity, max_amplitude_deviation, max_centroid_displacement, packet_summary,
    packet_summary_with, probability_profile, CentroidSample, Packet, PacketSummary, Profile,
};
pub use chain::{
    bessel_kernel, kick_operator, run_events, single_excitation_hamiltonian, ChainConfig,
    ChainModel, ChainSpectrum, DiagonalUnitary, Propagator, PropagatorKind, PulseEvent,
    SectorConstants, SectorHamiltonian,
};
pub use control::{
    naive_schedule, random_schedule, run_schedule, run_timeline, sequence_operator,
    table1_schedule, ExperimentTimeline, KickConvention, KickSchedule, RunRecord, StoppingParams,
    TimelineCapture, TimelineRecord, TimelineSegment,
};
pub use encoder::{
    max_diffusion_mode, max_diffusion_state, min_diffusion_mode, min_diffusion_state,
    DiffusionMode, EncodingSubspace,
};
pub use error::{Error, Result};
pub use experiments::{
    figure_run, reference_config, run_check, CheckId, CheckReport, FigureId, FigureRun,
};
pub use export::Manifest;
pub use state::ExcitationState;
