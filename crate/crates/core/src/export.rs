//! Plot-ready file output: CSV profiles and trajectories, JSON manifests.
//! Everything here is byte-deterministic for fixed input; manifests keep
//! their timestamp in a separate field excluded from the canonical bytes,
//! and JSON objects serialize with sorted keys.

use crate::analysis::Profile;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::Path;

/// CSV text for a profile: `site,probability` header, one row per site,
/// probabilities in full-precision scientific notation.
pub fn profile_csv(profile: &Profile) -> String {
    let mut out = String::with_capacity(24 * profile.n_sites() + 18);
    out.push_str("site,probability\n");
    for (i, p) in profile.probabilities().iter().enumerate() {
        out.push_str(&format!("{},{:e}\n", i + 1, p));
    }
    out
}

pub fn write_profile_csv(profile: &Profile, path: &Path) -> Result<()> {
    std::fs::write(path, profile_csv(profile)).map_err(|e| Error::io(path, e))
}

/// Reads back a profile CSV written by [`write_profile_csv`].
pub fn read_profile_csv(path: &Path) -> Result<Profile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some("site,probability") => {}
        other => {
            return Err(Error::format(
                path,
                format!("expected 'site,probability' header, got {other:?}"),
            ));
        }
    }
    let mut probabilities = Vec::new();
    for (row, line) in lines.enumerate() {
        let (site, prob) = line
            .split_once(',')
            .ok_or_else(|| Error::format(path, format!("row {}: no comma", row + 1)))?;
        let site: usize = site
            .parse()
            .map_err(|_| Error::format(path, format!("row {}: bad site '{site}'", row + 1)))?;
        if site != row + 1 {
            return Err(Error::format(
                path,
                format!("row {}: site column reads {site}", row + 1),
            ));
        }
        let p: f64 = prob
            .parse()
            .map_err(|_| Error::format(path, format!("row {}: bad probability '{prob}'", row + 1)))?;
        probabilities.push(p);
    }
    Profile::from_probabilities(probabilities)
}

/// CSV text for a classical trajectory: `step,theta,p` rows.
pub fn trajectory_csv(trajectory: &[(f64, f64)]) -> String {
    let mut out = String::with_capacity(48 * trajectory.len() + 13);
    out.push_str("step,theta,p\n");
    for (i, (theta, p)) in trajectory.iter().enumerate() {
        out.push_str(&format!("{},{:e},{:e}\n", i, theta, p));
    }
    out
}

pub fn write_trajectory_csv(trajectory: &[(f64, f64)], path: &Path) -> Result<()> {
    std::fs::write(path, trajectory_csv(trajectory)).map_err(|e| Error::io(path, e))
}

/// Manifest format version; bump on any schema change.
pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// A run manifest: schema version plus a deterministic body, with the
/// timestamp quarantined so canonical bytes stay reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    /// Deterministic content: parameters, measurements, emitted file names.
    pub body: Value,
    /// Wall-clock provenance; never part of [`Manifest::canonical_bytes`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
}

impl Manifest {
    pub fn new(body: Value) -> Self {
        Manifest {
            schema: MANIFEST_SCHEMA_VERSION,
            body,
            generated_at: None,
        }
    }

    pub fn with_timestamp(mut self, stamp: impl Into<String>) -> Self {
        self.generated_at = Some(stamp.into());
        self
    }

    /// The bytes that identify the run: schema + body, timestamp excluded,
    /// keys sorted. Two runs with identical inputs produce identical
    /// canonical bytes.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        #[derive(Serialize)]
        struct Canonical<'a> {
            schema: u32,
            body: &'a Value,
        }
        serde_json::to_vec_pretty(&Canonical {
            schema: self.schema,
            body: &self.body,
        })
        .expect("manifest body is valid JSON")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest is valid JSON")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        if manifest.schema != MANIFEST_SCHEMA_VERSION {
            return Err(Error::format(
                path,
                format!(
                    "manifest schema {} unsupported (this build reads {MANIFEST_SCHEMA_VERSION})",
                    manifest.schema
                ),
            ));
        }
        Ok(manifest)
    }
}
