//! The δ-kicked rotor written in the half-line cosine basis
//! |m⟩ ~ cos(mθ), m ≥ 1, the picture in which one kicked-chain period and
//! one rotor period are the same pair of operators with the roles swapped:
//! the chain's free flight is the rotor's kick exp(i·k·cosθ) with k = 2JT0,
//! and the chain's parabolic kick is the rotor's free flight with ħ_eff = C.
//!
//! Two half-line facts drive the tests here. First, the parity identity
//! v(k) = u(2π)·v(-k)·u(2π) is *exact* in this basis, correction term and
//! all, because (-1)^{m+n}·(-1)^{m±n} = 1. Second, v is not quite unitary:
//! the basis starts at m = 1 while exp(i·k·cosθ) also talks to the uniform
//! m = 0 mode, so column n of v is short by exactly 2·J_n(k)² of norm. That
//! deficit dies superexponentially in n (far from the corner v is unitary
//! to machine precision), and every norm statement below is phrased against
//! the closed form rather than wishing the corner away.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::bessel::bessel_j;
use crate::chain::{ipow, DiagonalUnitary, ParabolicPhases, Propagator, PropagatorKind};
use crate::error::{Error, Result};

/// Parameters of the mapped rotor. `k` plays 2JT0, `hbar_eff` plays the kick
/// coefficient C, `n_tilde0` plays the kick center n0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorParams {
    pub k: f64,
    pub hbar_eff: f64,
    pub n_tilde0: i64,
    pub size: usize,
}

impl RotorParams {
    pub fn new(k: f64, hbar_eff: f64, n_tilde0: i64, size: usize) -> Result<Self> {
        if !k.is_finite() || !hbar_eff.is_finite() {
            return Err(Error::InvalidConfig(
                "rotor k and hbar_eff must be finite".into(),
            ));
        }
        let needed = minimum_size(k);
        if size < needed {
            return Err(Error::InvalidConfig(format!(
                "rotor truncation {size} too small for k = {k}: need ≥ {needed} \
                 to keep Bessel tails below 1e-14"
            )));
        }
        Ok(RotorParams {
            k,
            hbar_eff,
            n_tilde0,
            size,
        })
    }
}

/// Truncation floor 8·(k+10): J_l(k) tails are < 1e-14 well inside this.
pub fn minimum_size(k: f64) -> usize {
    (8.0 * (k.abs() + 10.0)).ceil() as usize
}

/// State over the cosine basis, m = 1..=size.
#[derive(Debug, Clone, PartialEq)]
pub struct RotorState {
    coeffs: Array1<Complex64>,
}

/// Rotor states are accepted as normalized when within this of unit norm
/// (tighter than the chain-state construction tolerance: rotor states come
/// from exact constructions, not measured data).
pub const ROTOR_NORM_TOL: f64 = 1e-12;

impl RotorState {
    pub fn from_amplitudes(coeffs: Array1<Complex64>) -> Result<Self> {
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > ROTOR_NORM_TOL {
            return Err(Error::NormDrift {
                norm,
                tolerance: ROTOR_NORM_TOL,
            });
        }
        Ok(RotorState { coeffs })
    }

    /// Real coefficients placed at the given one-based levels, normalized.
    pub fn from_level_coefficients(size: usize, levels: &[usize], coeffs: &[f64]) -> Result<Self> {
        if levels.len() != coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: levels.len(),
                actual: coeffs.len(),
            });
        }
        let mut amp = Array1::<Complex64>::zeros(size);
        for (&m, &c) in levels.iter().zip(coeffs.iter()) {
            if m == 0 || m > size {
                return Err(Error::InvalidConfig(format!(
                    "rotor level {m} outside 1..={size}"
                )));
            }
            amp[m - 1] += Complex64::new(c, 0.0);
        }
        let norm = amp.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidConfig("all-zero rotor state".into()));
        }
        amp.map_inplace(|c| *c /= norm);
        Ok(RotorState { coeffs: amp })
    }

    pub fn size(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &Array1<Complex64> {
        &self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probability(&self, level: usize) -> f64 {
        self.coeffs[level - 1].norm_sqr()
    }

    /// Kinetic energy (ħ²/2)·Σ m²|c_m|².
    pub fn energy(&self, hbar_eff: f64) -> f64 {
        0.5 * hbar_eff
            * hbar_eff
            * self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let m = (i + 1) as f64;
                    m * m * c.norm_sqr()
                })
                .sum::<f64>()
    }

    /// Applies a dense rotor operator.
    pub fn apply(&self, op: &Propagator) -> Result<RotorState> {
        if op.n() != self.size() {
            return Err(Error::DimensionMismatch {
                expected: self.size(),
                actual: op.n(),
            });
        }
        Ok(RotorState {
            coeffs: op.matrix.dot(&self.coeffs),
        })
    }
}

/// Free-rotation factor u(ħ): diagonal exp[-i(ħ/2)(n-ñ0)²], n = 1..=size.
/// Same 2π-exact phase handling as the chain kick, so u(4π) is the literal
/// identity and u(2π) the literal staggering.
pub fn rotor_kick_u(hbar_eff: f64, n_tilde0: i64, size: usize) -> DiagonalUnitary {
    let gen = ParabolicPhases::new(hbar_eff);
    let phases: Array1<Complex64> = (1..=size as i64).map(|n| gen.phase(n - n_tilde0)).collect();
    DiagonalUnitary { phases }
}

/// Kick factor v(k) = exp(i·k·cosθ) on the half-line basis:
/// v_{mn} = i^{m-n}·J_{m-n}(k) + i^{m+n}·J_{m+n}(k), m, n ≥ 1.
/// Entries are closed-form, so they do not depend on the truncation.
pub fn rotor_free_v_exact(k: f64, size: usize) -> Propagator {
    // One Bessel evaluation per order 0..2·size, shared by both terms. The
    // difference term needs the negative-order reflection J_{-l} = (-1)^l J_l
    // applied by hand (the table only holds l ≥ 0); same sign rule as
    // `bessel_j`, so the entries match the per-entry evaluation bitwise.
    let table: Vec<f64> = (0..=(2 * size as i64)).map(|l| bessel_j(l, k)).collect();
    let mut v = Array2::<Complex64>::zeros((size, size));
    for m in 1..=size as i64 {
        for n in 1..=size as i64 {
            let diff = m - n;
            let sum = m + n;
            let j_diff = if diff < 0 && diff & 1 != 0 {
                -table[diff.unsigned_abs() as usize]
            } else {
                table[diff.unsigned_abs() as usize]
            };
            v[[(m - 1) as usize, (n - 1) as usize]] =
                ipow(diff) * j_diff + ipow(sum) * table[sum as usize];
        }
    }
    Propagator {
        matrix: v,
        kind: PropagatorKind::RotorCosine,
    }
}

/// One full rotor period at the ħ = 4π quantum resonance: the free factor is
/// the identity there, so the period propagator is just v(k).
pub fn resonance_propagator(k: f64, size: usize) -> Propagator {
    rotor_free_v_exact(k, size)
}

/// Norm missing from column n of v(k): exactly 2·J_n(k)², the weight the
/// half-line operator sends into the excluded m = 0 mode. Superexponentially
/// small once n outruns k.
pub fn corner_deficit(k: f64, n: usize) -> f64 {
    let j = bessel_j(n as i64, k);
    2.0 * j * j
}

/// max elementwise |v(k) - u(2π)·v(-k)·u(2π)|. The identity is exact in this
/// basis (both Bessel terms flip consistently), so the residual is pure
/// floating-point noise, and with the sign-exact staggering and reflection
/// symmetries it is in fact bitwise zero.
pub fn parity_identity_residual(k: f64, size: usize) -> f64 {
    let v_plus = rotor_free_v_exact(k, size);
    let v_minus = rotor_free_v_exact(-k, size);
    let stagger = rotor_kick_u(2.0 * std::f64::consts::PI, 0, size);
    let mut worst = 0.0f64;
    for m in 0..size {
        for n in 0..size {
            let sandwiched = stagger.phases[m] * v_minus.matrix[[m, n]] * stagger.phases[n];
            worst = worst.max((v_plus.matrix[[m, n]] - sandwiched).norm());
        }
    }
    worst
}

/// max elementwise |chainV - rotorV| over a one-based site window (the
/// chain↔rotor dictionary says they agree in the bulk, where neither the
/// chain ends nor the rotor's m = 0 corner is felt).
pub fn mapping_residual(
    chain_v: &Propagator,
    rotor_v: &Propagator,
    window: (usize, usize),
) -> Result<f64> {
    let (lo, hi) = window;
    let n = chain_v.n().min(rotor_v.n());
    if lo == 0 || hi > n || lo > hi {
        return Err(Error::InvalidConfig(format!(
            "window {lo}..={hi} outside the shared 1..={n} range"
        )));
    }
    let mut worst = 0.0f64;
    for m in lo..=hi {
        for nn in lo..=hi {
            worst = worst
                .max((chain_v.matrix[[m - 1, nn - 1]] - rotor_v.matrix[[m - 1, nn - 1]]).norm());
        }
    }
    Ok(worst)
}
