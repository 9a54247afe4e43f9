//! Observables: site probability profiles, overlap fidelities, and packet
//! statistics (peaks, centroids, widths, background) for stopping and
//! transfer experiments.

use crate::control::TimelineCapture;
use crate::error::{Error, Result};
use crate::state::ExcitationState;

/// Tolerance on Σ p_m = 1 for anything claiming to be a profile.
pub const PROFILE_NORM_TOL: f64 = 1e-12;

/// Site probability profile p_m = |⟨m|ψ⟩|².
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    probabilities: Vec<f64>,
}

impl Profile {
    pub fn from_probabilities(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::InvalidConfig("empty profile".into()));
        }
        if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidConfig(
                "profile probabilities must be finite and non-negative".into(),
            ));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > PROFILE_NORM_TOL {
            return Err(Error::NormDrift {
                norm: total,
                tolerance: PROFILE_NORM_TOL,
            });
        }
        Ok(Profile { probabilities })
    }

    pub fn n_sites(&self) -> usize {
        self.probabilities.len()
    }

    /// One-based site probability.
    pub fn probability(&self, site: usize) -> f64 {
        self.probabilities[site - 1]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn max_probability(&self) -> f64 {
        self.probabilities.iter().fold(0.0, |a, &b| a.max(b))
    }

    /// Largest |p_m − p_{N+1−m}|: zero for profiles mirror-symmetric about
    /// the chain center.
    pub fn mirror_asymmetry(&self) -> f64 {
        let n = self.n_sites();
        let mut worst = 0.0f64;
        for m in 1..=n {
            worst = worst.max((self.probability(m) - self.probability(n + 1 - m)).abs());
        }
        worst
    }

    /// Σ p_m²: large for concentrated profiles, ~1/support for spread ones.
    pub fn inverse_participation_ratio(&self) -> f64 {
        self.probabilities.iter().map(|p| p * p).sum()
    }

    /// Largest elementwise deviation from another profile.
    pub fn max_abs_diff(&self, other: &Profile) -> f64 {
        self.probabilities
            .iter()
            .zip(other.probabilities.iter())
            .fold(0.0f64, |w, (a, b)| w.max((a - b).abs()))
    }

    /// Probability centroids of the two chain halves; left is sites
    /// 1..=split, right is the rest, each normalized by its own mass.
    /// Tracks a symmetric packet pair without depending on peak detection;
    /// a massless half yields NaN.
    pub fn half_centroids(&self, split: usize) -> (f64, f64) {
        let (mut lw, mut lc, mut rw, mut rc) = (0.0, 0.0, 0.0, 0.0);
        for m in 1..=self.n_sites() {
            let p = self.probability(m);
            if m <= split {
                lw += p;
                lc += p * m as f64;
            } else {
                rw += p;
                rc += p * m as f64;
            }
        }
        (lc / lw, rc / rw)
    }
}

pub fn probability_profile(state: &ExcitationState) -> Profile {
    Profile {
        probabilities: state.amplitudes().iter().map(|a| a.norm_sqr()).collect(),
    }
}

/// |⟨a|b⟩|²: symmetric and global-phase-insensitive.
pub fn fidelity(a: &ExcitationState, b: &ExcitationState) -> Result<f64> {
    if a.n_sites() != b.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: a.n_sites(),
            actual: b.n_sites(),
        });
    }
    Ok(a.overlap(b).norm_sqr())
}

/// Largest elementwise amplitude deviation after aligning the global phase
/// on the reference's largest component. Stricter than fidelity: it sees
/// site-local phase errors that |⟨a|b⟩|² averages away.
pub fn max_amplitude_deviation(state: &ExcitationState, reference: &ExcitationState) -> Result<f64> {
    if state.n_sites() != reference.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: reference.n_sites(),
            actual: state.n_sites(),
        });
    }
    let pivot = reference
        .amplitudes()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map(|(i, _)| i)
        .expect("states are non-empty");
    let num = reference.amplitudes()[pivot];
    let den = state.amplitudes()[pivot];
    if den.norm() == 0.0 {
        // No overlap at the pivot: phase alignment is meaningless, compare raw.
        return Ok(state
            .amplitudes()
            .iter()
            .zip(reference.amplitudes().iter())
            .fold(0.0f64, |w, (a, b)| w.max((a - b).norm())));
    }
    let phase = (num / den) / (num / den).norm();
    Ok(state
        .amplitudes()
        .iter()
        .zip(reference.amplitudes().iter())
        .fold(0.0f64, |w, (a, b)| w.max((a * phase - b).norm())))
}

/// One detected wavepacket.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Packet {
    /// Site of the packet's largest probability.
    pub peak_site: usize,
    pub peak_probability: f64,
    /// Probability-weighted mean site over the support.
    pub centroid: f64,
    /// RMS spread about the centroid over the support.
    pub rms_width: f64,
    /// Contiguous site interval (lo, hi) the packet occupies, one-based
    /// inclusive.
    pub support: (usize, usize),
}

/// Packet statistics for one profile.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PacketSummary {
    /// Detected packets, ascending by site.
    pub packets: Vec<Packet>,
    /// Largest probability strictly between the outermost packet supports
    /// (and outside every support); 0 when fewer than two packets exist.
    pub background_max: f64,
    /// Sites strictly between the two highest peaks (exclusive count:
    /// peaks at a and b bound |b − a| − 1 sites).
    pub peak_separation: Option<usize>,
    /// Detection threshold actually used (absolute probability).
    pub threshold: f64,
}

/// Default detection threshold as a fraction of the global maximum.
pub const PEAK_THRESHOLD_FRACTION: f64 = 0.1;
/// Super-threshold runs separated by fewer than this many sub-threshold
/// sites are treated as fringes of one packet, not separate packets.
pub const PEAK_MERGE_RADIUS: usize = 3;

pub fn packet_summary(profile: &Profile) -> Result<PacketSummary> {
    packet_summary_with(profile, PEAK_THRESHOLD_FRACTION, PEAK_MERGE_RADIUS)
}

/// Packet detection: contiguous runs of sites with p ≥ fraction·max are
/// packet supports; runs separated by gaps shorter than `merge_radius`
/// sites merge (interference fringes of a single dispersing packet dip
/// below threshold without marking a packet boundary).
pub fn packet_summary_with(
    profile: &Profile,
    threshold_fraction: f64,
    merge_radius: usize,
) -> Result<PacketSummary> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "threshold fraction must lie in (0, 1), got {threshold_fraction}"
        )));
    }
    let n = profile.n_sites();
    let threshold = threshold_fraction * profile.max_probability();

    // Super-threshold runs as (lo, hi) one-based inclusive.
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut open: Option<usize> = None;
    for m in 1..=n {
        let above = profile.probability(m) >= threshold;
        match (above, open) {
            (true, None) => open = Some(m),
            (false, Some(lo)) => {
                runs.push((lo, m - 1));
                open = None;
            }
            _ => {}
        }
    }
    if let Some(lo) = open {
        runs.push((lo, n));
    }

    // Merge runs with short gaps.
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for (lo, hi) in runs {
        match merged.last_mut() {
            Some((_, prev_hi)) if lo - *prev_hi - 1 < merge_radius => *prev_hi = hi,
            _ => merged.push((lo, hi)),
        }
    }

    let packets: Vec<Packet> = merged
        .iter()
        .map(|&(lo, hi)| {
            let mut peak_site = lo;
            let mut peak_probability = 0.0;
            let mut weight = 0.0;
            let mut first = 0.0;
            for m in lo..=hi {
                let p = profile.probability(m);
                if p > peak_probability {
                    peak_probability = p;
                    peak_site = m;
                }
                weight += p;
                first += p * m as f64;
            }
            let centroid = first / weight;
            let mut second = 0.0;
            for m in lo..=hi {
                let d = m as f64 - centroid;
                second += profile.probability(m) * d * d;
            }
            Packet {
                peak_site,
                peak_probability,
                centroid,
                rms_width: (second / weight).sqrt(),
                support: (lo, hi),
            }
        })
        .collect();

    let background_max = if packets.len() >= 2 {
        let lo = packets.first().unwrap().support.1;
        let hi = packets.last().unwrap().support.0;
        let mut worst = 0.0f64;
        for m in (lo + 1)..hi {
            if packets.iter().any(|p| m >= p.support.0 && m <= p.support.1) {
                continue;
            }
            worst = worst.max(profile.probability(m));
        }
        worst
    } else {
        0.0
    };

    let peak_separation = if packets.len() >= 2 {
        let mut by_height: Vec<&Packet> = packets.iter().collect();
        by_height.sort_by(|a, b| b.peak_probability.total_cmp(&a.peak_probability));
        Some(by_height[0].peak_site.abs_diff(by_height[1].peak_site) - 1)
    } else {
        None
    };

    Ok(PacketSummary {
        packets,
        background_max,
        peak_separation,
        threshold,
    })
}

/// Packet centroids of one capture.
#[derive(Debug, Clone)]
pub struct CentroidSample {
    pub label: String,
    pub two_j_time: f64,
    pub kicks_applied: usize,
    /// Centroids of detected packets, ascending by site.
    pub centroids: Vec<f64>,
}

/// Per-capture packet centroids, for displacement and speed bounds.
pub fn centroid_track(captures: &[TimelineCapture]) -> Result<Vec<CentroidSample>> {
    captures
        .iter()
        .map(|cap| {
            let summary = packet_summary(&probability_profile(&cap.state))?;
            Ok(CentroidSample {
                label: cap.label.clone(),
                two_j_time: cap.two_j_time,
                kicks_applied: cap.kicks_applied,
                centroids: summary.packets.iter().map(|p| p.centroid).collect(),
            })
        })
        .collect()
}

/// Largest |Δcentroid| between two samples, matching packets by order.
/// Errors if the packet counts differ; packets must not appear or vanish
/// between the compared captures.
pub fn max_centroid_displacement(a: &CentroidSample, b: &CentroidSample) -> Result<f64> {
    if a.centroids.len() != b.centroids.len() {
        return Err(Error::InvalidConfig(format!(
            "packet count changed between '{}' ({}) and '{}' ({})",
            a.label,
            a.centroids.len(),
            b.label,
            b.centroids.len()
        )));
    }
    Ok(a.centroids
        .iter()
        .zip(b.centroids.iter())
        .fold(0.0f64, |w, (x, y)| w.max((x - y).abs())))
}
