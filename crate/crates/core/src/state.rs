//! Single-excitation states and their on-disk snapshot format.
//!
//! A state lives in the N-dimensional sector spanned by |m⟩ = "the excitation
//! sits on site m" (m = 1..=N, one-based like the site labels). Amplitudes
//! are stored zero-based internally; every public site index is one-based.

use std::path::Path;

use ndarray::Array1;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm discipline: states built by this crate are unit to ~1e-15; anything
/// further than this from 1 is rejected at construction / load time.
pub const NORM_CONSTRUCTION_TOL: f64 = 1e-9;

/// Normalized state of the single-excitation sector.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationState {
    amplitudes: Array1<Complex64>,
}

impl ExcitationState {
    /// Basis state: excitation localized on `site` (one-based).
    pub fn site_basis(n_sites: usize, site: usize) -> Result<Self> {
        if site == 0 || site > n_sites {
            return Err(Error::InvalidConfig(format!(
                "site index {site} outside 1..={n_sites}"
            )));
        }
        let mut amp = Array1::zeros(n_sites);
        amp[site - 1] = Complex64::new(1.0, 0.0);
        Ok(ExcitationState { amplitudes: amp })
    }

    /// Wraps amplitudes that are already normalized (to [`NORM_CONSTRUCTION_TOL`]).
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidConfig("empty amplitude vector".into()));
        }
        let state = ExcitationState {
            amplitudes: Array1::from(amplitudes),
        };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_CONSTRUCTION_TOL {
            return Err(Error::NormDrift {
                norm,
                tolerance: NORM_CONSTRUCTION_TOL,
            });
        }
        Ok(state)
    }

    /// Normalizes and wraps an arbitrary nonzero vector.
    pub fn from_unnormalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidConfig("empty amplitude vector".into()));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidConfig("zero vector has no direction".into()));
        }
        let amp: Vec<Complex64> = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(ExcitationState {
            amplitudes: Array1::from(amp),
        })
    }

    /// Real coefficients placed on selected sites (one-based), zero elsewhere.
    /// This is how encoded superpositions enter the chain.
    pub fn from_site_coefficients(n_sites: usize, sites: &[usize], coeffs: &[f64]) -> Result<Self> {
        if sites.len() != coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: sites.len(),
                actual: coeffs.len(),
            });
        }
        let mut amp = vec![Complex64::ZERO; n_sites];
        for (&site, &c) in sites.iter().zip(coeffs) {
            if site == 0 || site > n_sites {
                return Err(Error::InvalidConfig(format!(
                    "site index {site} outside 1..={n_sites}"
                )));
            }
            amp[site - 1] += Complex64::new(c, 0.0);
        }
        Self::from_unnormalized(amp)
    }

    pub fn n_sites(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut Array1<Complex64> {
        &mut self.amplitudes
    }

    pub(crate) fn from_array_unchecked(amplitudes: Array1<Complex64>) -> Self {
        ExcitationState { amplitudes }
    }

    /// Amplitude on `site` (one-based).
    pub fn amplitude(&self, site: usize) -> Complex64 {
        self.amplitudes[site - 1]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &ExcitationState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Occupation probability on `site` (one-based).
    pub fn probability(&self, site: usize) -> f64 {
        self.amplitudes[site - 1].norm_sqr()
    }

    // ---- snapshot format -------------------------------------------------

    /// Writes `{"version":1,"N":…,"amplitudes":[[re,im],…]}`.
    pub fn write_snapshot(&self, path: &Path) -> Result<()> {
        let file = SnapshotFile {
            version: SNAPSHOT_VERSION,
            n: self.n_sites(),
            amplitudes: self.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
        };
        let mut body = serde_json::to_string_pretty(&file)
            .map_err(|e| Error::format(path, e.to_string()))?;
        body.push('\n');
        std::fs::write(path, body).map_err(|e| Error::io(path, e))
    }

    /// Reads a snapshot, validating version, length, and norm.
    pub fn read_snapshot(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: SnapshotFile =
            serde_json::from_str(&body).map_err(|e| Error::format(path, e.to_string()))?;
        if file.version != SNAPSHOT_VERSION {
            return Err(Error::format(
                path,
                format!("unsupported snapshot version {}", file.version),
            ));
        }
        if file.amplitudes.len() != file.n {
            return Err(Error::format(
                path,
                format!(
                    "N = {} but {} amplitudes present",
                    file.n,
                    file.amplitudes.len()
                ),
            ));
        }
        let amp: Vec<Complex64> = file
            .amplitudes
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        Self::from_amplitudes(amp).map_err(|e| match e {
            Error::NormDrift { norm, tolerance } => Error::format(
                path,
                format!("snapshot norm {norm:.17e} outside 1 ± {tolerance:.1e}"),
            ),
            other => other,
        })
    }
}

const SNAPSHOT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotFile {
    version: u32,
    #[serde(rename = "N")]
    n: usize,
    amplitudes: Vec<[f64; 2]>,
}
