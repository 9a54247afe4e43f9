//! The open spin chain restricted to its single-excitation sector, and the
//! unitaries that drive it: exact free propagation from a spectral
//! decomposition, the translation-invariant Bessel kernel approximation, and
//! the instantaneous parabolic kicks.
//!
//! Basis and conventions: |m⟩ means "the flipped spin sits on site m",
//! m = 1..=N. With exchange J > 0 the sector Hamiltonian is tridiagonal:
//! hopping ⟨m|H|m±1⟩ = -J everywhere, bulk diagonal 0, and end diagonal
//! ⟨1|H|1⟩ = ⟨N|H|N⟩ = -J (sites 1 and N touch one bond instead of two).
//! Constants that shift every sector level equally (the bulk zz energy
//! -J(N-5)/2 and the uniform-field energy -B(2-N)) are dropped and recorded
//! in [`SectorConstants`]; they amount to a global phase.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::bessel_j;
use crate::eigen::{SymTridiag, TridiagEigen};
use crate::error::{Error, Result};
use crate::state::ExcitationState;

/// Geometry and scales of one chain experiment. Times are raw; the
/// dimensionless knobs of the dynamics are 2·J·T0 (per-period free step) and
/// 2·J·t (elapsed evolution), exposed via [`ChainConfig::two_j_t0`] and
/// [`ChainConfig::time_for`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    /// Number of sites N (at least 5 so the chain has a genuine bulk).
    pub n_sites: usize,
    /// Exchange coupling J > 0.
    pub coupling: f64,
    /// Kick period T0 > 0.
    pub kick_period: f64,
    /// Center site n0 of the parabolic kick profile (one-based).
    pub kick_center: usize,
    /// Uniform field B. Within the sector it only contributes a global
    /// phase, but the full-space oracle keeps it.
    pub uniform_field: f64,
}

impl ChainConfig {
    pub fn new(
        n_sites: usize,
        coupling: f64,
        kick_period: f64,
        kick_center: usize,
        uniform_field: f64,
    ) -> Result<Self> {
        let cfg = ChainConfig {
            n_sites,
            coupling,
            kick_period,
            kick_center,
            uniform_field,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 5 {
            return Err(Error::InvalidConfig(format!(
                "n_sites = {} but the chain needs at least 5 sites",
                self.n_sites
            )));
        }
        if self.coupling <= 0.0 || !self.coupling.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "coupling J must be positive and finite, got {}",
                self.coupling
            )));
        }
        if self.kick_period <= 0.0 || !self.kick_period.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "kick period T0 must be positive and finite, got {}",
                self.kick_period
            )));
        }
        if self.kick_center == 0 || self.kick_center > self.n_sites {
            return Err(Error::InvalidConfig(format!(
                "kick center {} outside 1..={}",
                self.kick_center, self.n_sites
            )));
        }
        if !self.uniform_field.is_finite() {
            return Err(Error::InvalidConfig("uniform field must be finite".into()));
        }
        Ok(())
    }

    /// The dimensionless per-period free step 2·J·T0.
    pub fn two_j_t0(&self) -> f64 {
        2.0 * self.coupling * self.kick_period
    }

    /// Raw time for a requested dimensionless duration 2·J·t.
    pub fn time_for(&self, two_j_t: f64) -> f64 {
        two_j_t / (2.0 * self.coupling)
    }
}

/// Which tridiagonal model backs the free propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainModel {
    /// Single-excitation block of the isotropic chain with open ends: the -J
    /// end-site diagonal is kept.
    Heisenberg,
    /// Same hopping with zero diagonal everywhere: the N-site slice of the
    /// infinite chain. The staggering sign pattern flips this Hamiltonian's
    /// sign *exactly*, so the kick-sequence identities hold to machine
    /// precision at finite N (on the open-ended model they hold in the bulk).
    PureHopping,
}

/// Constant energies dropped from the sector Hamiltonian; they multiply the
/// whole sector by a global phase and carry no dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorConstants {
    /// Bulk zz exchange energy: -J(N-5)/2.
    pub zz: f64,
    /// Uniform-field energy of a one-up configuration: -B(2-N).
    pub field: f64,
}

/// Sector Hamiltonian together with the constants removed from it.
#[derive(Debug, Clone)]
pub struct SectorHamiltonian {
    pub matrix: SymTridiag,
    pub dropped: SectorConstants,
}

/// Tridiagonal sector Hamiltonian of the open chain (see module docs for the
/// derivation of the end-site shift and the dropped constants).
pub fn single_excitation_hamiltonian(cfg: &ChainConfig) -> Result<SectorHamiltonian> {
    cfg.validate()?;
    let n = cfg.n_sites;
    let j = cfg.coupling;
    let mut diag = vec![0.0; n];
    diag[0] = -j;
    diag[n - 1] = -j;
    let matrix = SymTridiag::new(diag, vec![-j; n - 1])?;
    Ok(SectorHamiltonian {
        matrix,
        dropped: SectorConstants {
            zz: -j * (n as f64 - 5.0) / 2.0,
            field: -cfg.uniform_field * (2.0 - n as f64),
        },
    })
}

/// Zero-diagonal hopping Hamiltonian (the [`ChainModel::PureHopping`] model).
pub fn pure_hopping_hamiltonian(cfg: &ChainConfig) -> Result<SymTridiag> {
    cfg.validate()?;
    SymTridiag::new(vec![0.0; cfg.n_sites], vec![-cfg.coupling; cfg.n_sites - 1])
}

/// Provenance tag for a dense unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropagatorKind {
    /// Built from the exact spectral decomposition of a chain model.
    ExactSpectral,
    /// Translation-invariant Bessel kernel: exact for the infinite chain,
    /// approximate near open ends.
    BesselApprox,
    /// Closed-form kicked-rotor operator on the cosine basis.
    RotorCosine,
    /// Product of other unitaries.
    Composite,
}

/// Dense unitary on the sector (or on a rotor basis of the same shape).
#[derive(Debug, Clone)]
pub struct Propagator {
    pub matrix: Array2<Complex64>,
    pub kind: PropagatorKind,
}

impl Propagator {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    /// max |(P†P - I)_{ab}|: how far from unitary the matrix is.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in a..n {
                let mut acc = Complex64::ZERO;
                for k in 0..n {
                    acc += self.matrix[[k, a]].conj() * self.matrix[[k, b]];
                }
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }

    pub fn apply(&self, state: &ExcitationState) -> Result<ExcitationState> {
        if state.n_sites() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                actual: state.n_sites(),
            });
        }
        Ok(ExcitationState::from_array_unchecked(
            self.matrix.dot(state.amplitudes()),
        ))
    }

    /// max elementwise |self - other|.
    pub fn max_abs_diff(&self, other: &Propagator) -> f64 {
        let mut worst = 0.0f64;
        for (a, b) in self.matrix.iter().zip(other.matrix.iter()) {
            worst = worst.max((a - b).norm());
        }
        worst
    }

    /// max elementwise |self - e^{iφ}·other| minimized over the global phase
    /// φ (estimated from the largest-magnitude entry of `other`).
    pub fn max_abs_diff_up_to_phase(&self, other: &Propagator) -> f64 {
        let mut pivot = 0usize;
        let mut best = 0.0f64;
        for (idx, b) in other.matrix.iter().enumerate() {
            if b.norm() > best {
                best = b.norm();
                pivot = idx;
            }
        }
        if best == 0.0 {
            return self.max_abs_diff(other);
        }
        let a_piv = self.matrix.as_slice().unwrap()[pivot];
        let b_piv = other.matrix.as_slice().unwrap()[pivot];
        let phase = if a_piv.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            let q = a_piv / b_piv;
            q / q.norm()
        };
        let mut worst = 0.0f64;
        for (a, b) in self.matrix.iter().zip(other.matrix.iter()) {
            worst = worst.max((a - phase * b).norm());
        }
        worst
    }
}

/// Instantaneous diagonal unitary (a kick).
#[derive(Debug, Clone)]
pub struct DiagonalUnitary {
    pub phases: Array1<Complex64>,
}

impl DiagonalUnitary {
    pub fn n(&self) -> usize {
        self.phases.len()
    }

    pub fn apply(&self, state: &ExcitationState) -> Result<ExcitationState> {
        if state.n_sites() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                actual: state.n_sites(),
            });
        }
        let amp: Array1<Complex64> = state
            .amplitudes()
            .iter()
            .zip(self.phases.iter())
            .map(|(a, p)| a * p)
            .collect();
        Ok(ExcitationState::from_array_unchecked(amp))
    }

    /// Dense form, for operator products.
    pub fn to_matrix(&self) -> Array2<Complex64> {
        let n = self.n();
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            m[[i, i]] = self.phases[i];
        }
        m
    }

    /// Scales each row of `m` by the corresponding phase, i.e. D·m.
    pub fn scale_rows(&self, m: &Array2<Complex64>) -> Array2<Complex64> {
        let mut out = m.clone();
        for (i, mut row) in out.rows_mut().into_iter().enumerate() {
            let p = self.phases[i];
            row.map_inplace(|x| *x *= p);
        }
        out
    }
}

// ---- kick phases -----------------------------------------------------------

/// fl(2π) and the remainder 2π - fl(2π), for double-double reduction.
const TWO_PI_HI: f64 = std::f64::consts::TAU;
const TWO_PI_LO: f64 = 2.4492935982947064e-16;

/// Residual strengths below this are treated as exact multiples of 2π:
/// fl(2π) itself lands 2.4e-16 away, while every physical kick strength in
/// use is ≥ 1e-3, so the gap is unambiguous.
const STRENGTH_SNAP: f64 = 1e-13;

/// Splits a kick strength C into q·2π + rest with |rest| ≤ π, the subtraction
/// done in double-double so no precision is lost, and `rest` snapped to zero
/// when C is a 2π multiple up to representation error.
fn split_strength(c: f64) -> (i64, f64) {
    let q = (c / TWO_PI_HI).round();
    // rest = c - q·2π, with q·2π_hi folded in by fused multiply-add (one
    // rounding) and the 2π tail corrected separately.
    let r = q.mul_add(-TWO_PI_HI, c) - q * TWO_PI_LO;
    if r.abs() <= STRENGTH_SNAP {
        (q as i64, 0.0)
    } else {
        (q as i64, r)
    }
}

/// exp(-i·a·k) for integer k with the product a·k reduced modulo 2π in
/// double-double arithmetic. Keeps the phase accurate to ~1e-15 in absolute
/// angle even when a·k is thousands of radians (k here is a squared site
/// offset, up to ~1e4 on transfer-scale chains).
fn unit_phase(a: f64, k: i64) -> Complex64 {
    let kf = k as f64; // exact: |k| < 2^53
    let p = a * kf;
    let err = a.mul_add(kf, -p); // exact low part of the product
    let q = (p / TWO_PI_HI).round();
    let r = q.mul_add(-TWO_PI_HI, p) - q * TWO_PI_LO + err;
    Complex64::new(r.cos(), -r.sin())
}

/// Phase generator exp[-i (strength/2)(offset)²] for integer offsets, with
/// the 2π-multiple part of the strength peeled off once at construction.
/// Shared by the chain kick and the rotor free factor (same functional form,
/// different physical reading).
#[derive(Debug, Clone, Copy)]
pub(crate) struct ParabolicPhases {
    q: i64,
    half_rest: f64,
    rest_is_zero: bool,
}

impl ParabolicPhases {
    pub(crate) fn new(strength: f64) -> Self {
        let (q, rest) = split_strength(strength);
        ParabolicPhases {
            q,
            half_rest: 0.5 * rest,
            rest_is_zero: rest == 0.0,
        }
    }

    pub(crate) fn phase(&self, d: i64) -> Complex64 {
        // exp[-i(q·2π/2)d²] = (-1)^{q·d²} = (-1)^{q·d}: exact sign flips.
        let stagger = if (self.q * d).rem_euclid(2) == 1 {
            -1.0
        } else {
            1.0
        };
        if self.rest_is_zero {
            Complex64::new(stagger, 0.0)
        } else {
            stagger * unit_phase(self.half_rest, d * d)
        }
    }
}

/// One parabolic kick of strength C: site m picks up exp[-i (C/2)(m-n0)²].
///
/// The strength is reduced modulo 2π: the exact multiple contributes the
/// staggered sign pattern (-1)^{q·(m-n0)} (since (-1)^{k²} = (-1)^k), applied
/// as literal sign flips, and only the sub-2π remainder enters the
/// trigonometric phase. This keeps C = 2π exactly equal to the staggering and
/// keeps sequence cancellations at machine precision.
pub fn kick_operator(strength: f64, cfg: &ChainConfig) -> Result<DiagonalUnitary> {
    kick_operator_windowed(strength, cfg, None)
}

/// [`kick_operator`] restricted to a site window (one-based, inclusive):
/// sites outside the window see no field at all. Physically the stopping
/// field only needs to cover the neighborhood of the packets.
pub fn kick_operator_windowed(
    strength: f64,
    cfg: &ChainConfig,
    window: Option<(usize, usize)>,
) -> Result<DiagonalUnitary> {
    cfg.validate()?;
    if let Some((lo, hi)) = window {
        if lo == 0 || hi > cfg.n_sites || lo > hi {
            return Err(Error::InvalidConfig(format!(
                "kick window {lo}..={hi} invalid for {} sites",
                cfg.n_sites
            )));
        }
    }
    let gen = ParabolicPhases::new(strength);
    let n0 = cfg.kick_center as i64;
    let phases: Array1<Complex64> = (1..=cfg.n_sites as i64)
        .map(|m| {
            if let Some((lo, hi)) = window {
                if (m as usize) < lo || (m as usize) > hi {
                    return Complex64::new(1.0, 0.0);
                }
            }
            gen.phase(m - n0)
        })
        .collect();
    Ok(DiagonalUnitary { phases })
}

// ---- free propagation ------------------------------------------------------

/// Spectral decomposition of one chain model; the factory for exact free
/// propagators at any time.
#[derive(Debug, Clone)]
pub struct ChainSpectrum {
    config: ChainConfig,
    model: ChainModel,
    values: Vec<f64>,
    /// Row j holds eigenvector j (rows orthonormal); row-major storage makes
    /// the propagator assembly cache-friendly.
    modes: Array2<f64>,
    sector: Option<SectorConstants>,
}

impl ChainSpectrum {
    pub fn new(cfg: &ChainConfig, model: ChainModel) -> Result<Self> {
        let (matrix, sector) = match model {
            ChainModel::Heisenberg => {
                let h = single_excitation_hamiltonian(cfg)?;
                (h.matrix, Some(h.dropped))
            }
            ChainModel::PureHopping => (pure_hopping_hamiltonian(cfg)?, None),
        };
        let TridiagEigen { values, vectors } = matrix.decompose()?;
        Ok(ChainSpectrum {
            config: *cfg,
            model,
            values,
            modes: vectors.reversed_axes().as_standard_layout().to_owned(),
            sector,
        })
    }

    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    pub fn model(&self) -> ChainModel {
        self.model
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// Constants dropped from the sector Hamiltonian (open-chain model only).
    pub fn sector_constants(&self) -> Option<SectorConstants> {
        self.sector
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Exact free step V(t) = exp(-i·H·t) as a dense unitary.
    pub fn free_propagator(&self, t: f64) -> Propagator {
        let n = self.n();
        let phases: Vec<Complex64> = self
            .values
            .iter()
            .map(|&lam| {
                let arg = lam * t;
                Complex64::new(arg.cos(), -arg.sin())
            })
            .collect();
        let mut v = Array2::<Complex64>::zeros((n, n));
        for (row, &pj) in self.modes.rows().into_iter().zip(&phases) {
            for m in 0..n {
                let w = pj * row[m];
                if w.norm_sqr() == 0.0 {
                    continue;
                }
                let vm = &mut v.row_mut(m);
                for nn in 0..n {
                    vm[nn] += w * row[nn];
                }
            }
        }
        Propagator {
            matrix: v,
            kind: PropagatorKind::ExactSpectral,
        }
    }

    /// Applies exp(-i·H·t) to a state without materializing the matrix
    /// (two real mat-vecs each way).
    pub fn evolve(&self, state: &ExcitationState, t: f64) -> Result<ExcitationState> {
        let n = self.n();
        if state.n_sites() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: state.n_sites(),
            });
        }
        let re: Array1<f64> = state.amplitudes().iter().map(|a| a.re).collect();
        let im: Array1<f64> = state.amplitudes().iter().map(|a| a.im).collect();
        let c_re = self.modes.dot(&re);
        let c_im = self.modes.dot(&im);
        let mut d_re = Array1::<f64>::zeros(n);
        let mut d_im = Array1::<f64>::zeros(n);
        for j in 0..n {
            let arg = self.values[j] * t;
            let (s, c) = arg.sin_cos();
            // (c - i·s)(c_re + i·c_im)
            d_re[j] = c * c_re[j] + s * c_im[j];
            d_im[j] = c * c_im[j] - s * c_re[j];
        }
        let out_re = self.modes.t().dot(&d_re);
        let out_im = self.modes.t().dot(&d_im);
        let amp: Array1<Complex64> = out_re
            .iter()
            .zip(out_im.iter())
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect();
        Ok(ExcitationState::from_array_unchecked(amp))
    }

    /// Dimensionless-time variant of [`ChainSpectrum::evolve`].
    pub fn evolve_two_j_t(&self, state: &ExcitationState, two_j_t: f64) -> Result<ExcitationState> {
        self.evolve(state, self.config.time_for(two_j_t))
    }
}

/// Translation-invariant approximation to the free step: ⟨m|V(t)|n⟩ =
/// i^{m-n}·J_{m-n}(2Jt). Exact on the infinite chain; on the open chain it
/// misses the end reflections, so it is tagged [`PropagatorKind::BesselApprox`].
pub fn bessel_kernel(cfg: &ChainConfig, t: f64) -> Result<Propagator> {
    cfg.validate()?;
    let n = cfg.n_sites;
    let x = 2.0 * cfg.coupling * t;
    // One Bessel evaluation per distinct offset, not per matrix entry; the
    // m < n half takes the negative-order reflection J_{-k} = (-1)^k J_k by
    // hand, same sign rule as `bessel_j`.
    let offsets: Vec<f64> = (0..n as i64).map(|k| bessel_j(k, x)).collect();
    let mut v = Array2::<Complex64>::zeros((n, n));
    for m in 0..n {
        for nn in 0..n {
            let k = m as i64 - nn as i64;
            let j = if k < 0 && k & 1 != 0 {
                -offsets[k.unsigned_abs() as usize]
            } else {
                offsets[k.unsigned_abs() as usize]
            };
            v[[m, nn]] = ipow(k) * j;
        }
    }
    Ok(Propagator {
        matrix: v,
        kind: PropagatorKind::BesselApprox,
    })
}

/// i^k for any integer k. Callers pair this with Bessel tables indexed by
/// |k| and fold the J_{-k} = (-1)^k J_k reflection themselves.
pub(crate) fn ipow(k: i64) -> Complex64 {
    match k.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// One kicked-chain period: the kick fires first, then the free step, the
/// propagator over [jT0-0⁺, (j+1)T0-0⁺] is V(T0)·U(C_j).
pub fn apply_step(
    state: &ExcitationState,
    kick: &DiagonalUnitary,
    free: &Propagator,
) -> Result<ExcitationState> {
    free.apply(&kick.apply(state)?)
}

/// Flat description of a pulse program: what happens to the state, in order.
/// Both the sector engine and the full-space oracle consume this, which is
/// what makes them directly comparable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PulseEvent {
    /// Free evolution for raw time t.
    Free { time: f64 },
    /// Instantaneous parabolic kick of the given strength.
    Kick { strength: f64 },
}

/// Runs a pulse program with the sector engine.
pub fn run_events(
    spectrum: &ChainSpectrum,
    initial: &ExcitationState,
    events: &[PulseEvent],
) -> Result<ExcitationState> {
    let mut state = initial.clone();
    for ev in events {
        state = match *ev {
            PulseEvent::Free { time } => spectrum.evolve(&state, time)?,
            PulseEvent::Kick { strength } => {
                kick_operator(strength, spectrum.config())?.apply(&state)?
            }
        };
    }
    Ok(state)
}
