//! Brute-force cross-check engine: the *full* 2^N spin space, no sector
//! restriction, evolved by Chebyshev expansion of exp(-i·H·t) with the
//! Hamiltonian applied implicitly (bitmask hops, never a dense matrix).
//!
//! Nothing here shares code with the sector engine beyond the Bessel table:
//! the Hamiltonian is built from spin pair couplings, the propagation scheme
//! is polynomial rather than spectral, and the kick is a full-space diagonal.
//! Agreement between the two is therefore a real test, not a tautology.
//!
//! Basis: bit b of a mask set ⇔ the spin on site b+1 is flipped against the
//! background. The sector engine's |m⟩ is the mask 1 << (m-1).

use num_complex::Complex64;

use crate::bessel::bessel_j;
use crate::chain::{ipow, single_excitation_hamiltonian, ChainConfig, PulseEvent};
use crate::error::{Error, Result};
use crate::state::ExcitationState;

/// Hard cap on chain length: 2^16 amplitudes is still snappy, and the point
/// of this engine is small-N verification, not production runs.
pub const MAX_ORACLE_SITES: usize = 16;

/// Chebyshev terms are accumulated until the Bessel weights fall below this.
const TERM_CUTOFF: f64 = 1e-17;

/// The full-space chain: diagonal energies precomputed per basis mask,
/// hopping applied on the fly.
#[derive(Debug, Clone)]
pub struct FullChain {
    config: ChainConfig,
    dim: usize,
    diag: Vec<f64>,
    /// Enclosing spectral interval from Gershgorin rows, cached at build.
    bounds: (f64, f64),
}

impl FullChain {
    pub fn new(cfg: &ChainConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.n_sites;
        if n > MAX_ORACLE_SITES {
            return Err(Error::InvalidConfig(format!(
                "full-space engine caps at {MAX_ORACLE_SITES} sites, got {n}"
            )));
        }
        let j = cfg.coupling;
        let b = cfg.uniform_field;
        let dim = 1usize << n;
        let mut diag = Vec::with_capacity(dim);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for mask in 0..dim {
            // z_n = +1 background, -1 flipped.
            let mut zz = 0.0;
            let mut hops = 0usize;
            for site in 0..n - 1 {
                let a = (mask >> site) & 1;
                let c = (mask >> (site + 1)) & 1;
                if a == c {
                    zz += 1.0;
                } else {
                    zz -= 1.0;
                    hops += 1;
                }
            }
            let mut zsum = n as f64 - 2.0 * (mask.count_ones() as f64);
            zsum *= b;
            let d = -0.5 * j * zz + zsum;
            diag.push(d);
            let r = j * hops as f64;
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        Ok(FullChain {
            config: *cfg,
            dim,
            diag,
            bounds: (lo, hi),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    /// H·ψ, written into `out`. The exchange is -J/2·(σxσx + σyσy + σzσz)
    /// per bond: the zz part lives in the precomputed diagonal and the
    /// transverse part hops the flipped spin across a bond.
    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        let n = self.config.n_sites;
        let j = self.config.coupling;
        for (m, o) in out.iter_mut().enumerate() {
            *o = self.diag[m] * psi[m];
        }
        for site in 0..n - 1 {
            let pair = (1usize << site) | (1usize << (site + 1));
            for mask in 0..self.dim {
                let bits = mask & pair;
                if bits != 0 && bits != pair {
                    out[mask ^ pair] -= j * psi[mask];
                }
            }
        }
    }

    /// ⟨ψ|H|ψ⟩ (real for Hermitian H; the imaginary residue is roundoff).
    pub fn energy(&self, psi: &[Complex64]) -> f64 {
        let mut h_psi = vec![Complex64::ZERO; self.dim];
        self.apply(psi, &mut h_psi);
        psi.iter()
            .zip(h_psi.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    /// exp(-i·H·t)·ψ in place, by Chebyshev expansion on the Gershgorin
    /// interval: ψ ← e^{-ict} Σ_k (2-δ_k0)(-i)^k J_k(at) T_k((H-c)/a) ψ.
    pub fn evolve(&self, psi: &mut [Complex64], t: f64) -> Result<()> {
        if psi.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: psi.len(),
            });
        }
        if t == 0.0 {
            return Ok(());
        }
        let (lo, hi) = self.bounds;
        let center = 0.5 * (lo + hi);
        let half = (0.5 * (hi - lo)).max(1e-300);
        let x = half * t;
        let k_max = (x.abs().ceil() as usize) + 60 + (x.abs().powf(1.0 / 3.0) * 12.0) as usize;

        // Scaled application: y = ((H - c)/a)·v.
        let scaled_apply = |v: &[Complex64], y: &mut [Complex64]| {
            self.apply(v, y);
            let inv = 1.0 / half;
            for (o, s) in y.iter_mut().zip(v.iter()) {
                *o = (*o - center * s) * inv;
            }
        };

        let mut t_prev: Vec<Complex64> = psi.to_vec();
        let mut t_cur = vec![Complex64::ZERO; self.dim];
        scaled_apply(&t_prev, &mut t_cur);

        let mut acc: Vec<Complex64> = {
            let w0 = bessel_j(0, x);
            psi.iter().map(|a| w0 * a).collect()
        };
        let mut scratch = vec![Complex64::ZERO; self.dim];
        let mut k = 1usize;
        let mut small_run = 0usize;
        loop {
            let w = 2.0 * bessel_j(k as i64, x);
            let coef = ipow(-(k as i64)) * w;
            for (a, tk) in acc.iter_mut().zip(t_cur.iter()) {
                *a += coef * tk;
            }
            if w.abs() < TERM_CUTOFF {
                small_run += 1;
                if small_run >= 4 && (k as f64) > x.abs() {
                    break;
                }
            } else {
                small_run = 0;
            }
            if k >= k_max {
                break;
            }
            // T_{k+1} = 2·H̃·T_k - T_{k-1}
            scaled_apply(&t_cur, &mut scratch);
            for ((s, p), _) in scratch.iter_mut().zip(t_prev.iter()).zip(t_cur.iter()) {
                *s = 2.0 * *s - p;
            }
            std::mem::swap(&mut t_prev, &mut t_cur);
            std::mem::swap(&mut t_cur, &mut scratch);
            k += 1;
        }

        let arg = center * t;
        let global = Complex64::new(arg.cos(), -arg.sin());
        for (o, a) in psi.iter_mut().zip(acc.iter()) {
            *o = global * a;
        }
        Ok(())
    }

    /// Full-space parabolic kick: every flipped spin at site m contributes
    /// (C/2)(m-n0)² to the phase, so one-flip states reproduce the sector
    /// kick exactly and multi-flip states pick up the sum.
    pub fn kick(&self, psi: &mut [Complex64], strength: f64) -> Result<()> {
        if psi.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: psi.len(),
            });
        }
        let n = self.config.n_sites;
        let n0 = self.config.kick_center as i64;
        let half = 0.5 * strength;
        // Per-site phase contributions; a mask's phase is the sum over its
        // set bits, assembled once per mask.
        let site_terms: Vec<f64> = (1..=n as i64)
            .map(|m| {
                let d = m - n0;
                half * (d * d) as f64
            })
            .collect();
        for (mask, amp) in psi.iter_mut().enumerate() {
            let mut arg = 0.0;
            let mut bits = mask;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                arg += site_terms[b];
                bits &= bits - 1;
            }
            if arg != 0.0 {
                *amp *= Complex64::new(arg.cos(), -arg.sin());
            }
        }
        Ok(())
    }

    /// Embeds a sector state into the full space (one-flip masks).
    pub fn embed(&self, state: &ExcitationState) -> Result<Vec<Complex64>> {
        if state.n_sites() != self.config.n_sites {
            return Err(Error::DimensionMismatch {
                expected: self.config.n_sites,
                actual: state.n_sites(),
            });
        }
        let mut psi = vec![Complex64::ZERO; self.dim];
        for m in 0..self.config.n_sites {
            psi[1usize << m] = state.amplitudes()[m];
        }
        Ok(psi)
    }

    /// Reads the one-flip amplitudes back out; `leakage` is the probability
    /// that escaped the sector (zero up to roundoff; H conserves total σz).
    pub fn project(&self, psi: &[Complex64]) -> (ExcitationState, f64) {
        let n = self.config.n_sites;
        let mut amp = ndarray::Array1::<Complex64>::zeros(n);
        let mut inside = 0.0;
        for m in 0..n {
            let a = psi[1usize << m];
            amp[m] = a;
            inside += a.norm_sqr();
        }
        let total: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        (
            ExcitationState::from_array_unchecked(amp),
            (total - inside).max(0.0),
        )
    }
}

/// Outcome of a full-space pulse-program run, projected back to the sector.
#[derive(Debug, Clone)]
pub struct OracleRun {
    /// Sector amplitudes with the dropped-constant phase unwound, directly
    /// comparable to the sector engine's output.
    pub final_state: ExcitationState,
    /// Probability outside the one-flip sector at the end.
    pub leakage: f64,
    /// |norm(ψ_full) - 1| at the end: Chebyshev truncation error.
    pub norm_drift: f64,
}

/// Runs a pulse program on the full space from a sector initial state.
///
/// The sector engine works with the constant-stripped Hamiltonian; the full
/// space keeps those constants, so its sector block advances an extra global
/// phase e^{-i(E_zz+E_field)·t_free}. That phase is removed here, making the
/// two engines' amplitudes agree entrywise rather than merely up to phase.
pub fn run_events_full(
    cfg: &ChainConfig,
    initial: &ExcitationState,
    events: &[PulseEvent],
) -> Result<OracleRun> {
    let chain = FullChain::new(cfg)?;
    let mut psi = chain.embed(initial)?;
    let mut free_time = 0.0;
    for ev in events {
        match *ev {
            PulseEvent::Free { time } => {
                chain.evolve(&mut psi, time)?;
                free_time += time;
            }
            PulseEvent::Kick { strength } => chain.kick(&mut psi, strength)?,
        }
    }
    let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let (mut state, leakage) = chain.project(&psi);
    let dropped = single_excitation_hamiltonian(cfg)?.dropped;
    let arg = (dropped.zz + dropped.field) * free_time;
    let unwind = Complex64::new(arg.cos(), arg.sin());
    for a in state.amplitudes_mut().iter_mut() {
        *a *= unwind;
    }
    Ok(OracleRun {
        final_state: state,
        leakage,
        norm_drift: (norm - 1.0).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{kick_operator, ChainModel, ChainSpectrum};
    use crate::eigen::SymTridiag;

    fn cfg(n: usize) -> ChainConfig {
        ChainConfig::new(n, 1.0, 0.125, n / 2 + 1, 0.0).unwrap()
    }

    #[test]
    fn diagonal_energies_match_pair_counting() {
        // 5 sites, J = 2, B = 0.3. All-up mask 0: four aligned bonds and
        // Σσz = 5 → -J/2·4 + B·5 = -4 + 1.5.
        let c = ChainConfig::new(5, 2.0, 0.125, 3, 0.3).unwrap();
        let chain = FullChain::new(&c).unwrap();
        assert!((chain.diag[0] - (-4.0 + 1.5)).abs() < 1e-15);
        // Site-1 flip (mask 1): bond (1,2) anti, three aligned →
        // -J/2·(3 - 1) = -2; Σσz = 3 → +0.9.
        assert!((chain.diag[1] - (-2.0 + 0.9)).abs() < 1e-15);
        // Site-3 flip (mask 4): two anti bonds → -J/2·(2-2) = 0; field 0.9.
        assert!((chain.diag[4] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn one_flip_block_reproduces_sector_hamiltonian() {
        let c = ChainConfig::new(6, 1.7, 0.125, 3, 0.4).unwrap();
        let chain = FullChain::new(&c).unwrap();
        let h = single_excitation_hamiltonian(&c).unwrap();
        let shift = h.dropped.zz + h.dropped.field;
        let dense = h.matrix.to_dense();
        for m in 0..6usize {
            let mut basis = vec![Complex64::ZERO; chain.dim()];
            basis[1 << m] = Complex64::new(1.0, 0.0);
            let mut out = vec![Complex64::ZERO; chain.dim()];
            chain.apply(&basis, &mut out);
            for n in 0..6usize {
                let got = out[1 << n].re;
                let want = dense[[n, m]] + if m == n { shift } else { 0.0 };
                assert!(
                    (got - want).abs() < 1e-14,
                    "H[{n},{m}] = {got}, sector {want}"
                );
            }
            // No one-flip column reaches outside the sector.
            let leak: f64 = (0..chain.dim())
                .filter(|k| k.count_ones() != 1)
                .map(|k| out[k].norm_sqr())
                .sum();
            assert_eq!(leak, 0.0);
        }
    }

    #[test]
    fn chebyshev_reproduces_eigenphase() {
        // Embedded sector eigenvectors are exact eigenvectors of the full H
        // (eigenvalue shifted by the dropped constants), so the Chebyshev
        // engine must turn them by a pure phase.
        let c = ChainConfig::new(8, 1.0, 0.125, 4, 0.2).unwrap();
        let chain = FullChain::new(&c).unwrap();
        let h = single_excitation_hamiltonian(&c).unwrap();
        let eig = h.matrix.decompose().unwrap();
        let shift = h.dropped.zz + h.dropped.field;
        let t = 1.3;
        for j in [0usize, 3, 7] {
            let state = ExcitationState::from_unnormalized(
                eig.vectors
                    .column(j)
                    .iter()
                    .map(|&x| Complex64::new(x, 0.0))
                    .collect(),
            )
            .unwrap();
            let mut psi = chain.embed(&state).unwrap();
            chain.evolve(&mut psi, t).unwrap();
            let arg = (eig.values[j] + shift) * t;
            let phase = Complex64::new(arg.cos(), -arg.sin());
            let mut worst = 0.0f64;
            for m in 0..8usize {
                let want = phase * state.amplitudes()[m];
                worst = worst.max((psi[1 << m] - want).norm());
            }
            assert!(worst < 1e-12, "mode {j}: {worst:.3e}");
        }
    }

    #[test]
    fn chebyshev_composes_and_conserves() {
        let c = cfg(8);
        let chain = FullChain::new(&c).unwrap();
        // A two-excitation state: outside the sector on purpose.
        let mut psi = vec![Complex64::ZERO; chain.dim()];
        psi[0b00010010] = Complex64::new(0.6, 0.0);
        psi[0b00001100] = Complex64::new(0.0, 0.8);
        let e0 = chain.energy(&psi);
        let mut one_shot = psi.clone();
        chain.evolve(&mut one_shot, 0.9).unwrap();
        chain.evolve(&mut psi, 0.4).unwrap();
        chain.evolve(&mut psi, 0.5).unwrap();
        let mut worst = 0.0f64;
        for (a, b) in psi.iter().zip(one_shot.iter()) {
            worst = worst.max((a - b).norm());
        }
        assert!(worst < 1e-12, "composition gap {worst:.3e}");
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!((chain.energy(&psi) - e0).abs() < 1e-11);
    }

    #[test]
    fn full_kick_matches_sector_kick_on_one_flip_states() {
        let c = cfg(12);
        let chain = FullChain::new(&c).unwrap();
        let state = ExcitationState::from_site_coefficients(
            12,
            &[4, 6, 8],
            &[0.5, -0.7, 0.3],
        )
        .unwrap();
        let mut psi = chain.embed(&state).unwrap();
        chain.kick(&mut psi, 0.5).unwrap();
        let sector = kick_operator(0.5, &c).unwrap().apply(&state).unwrap();
        for m in 0..12usize {
            assert!(
                (psi[1 << m] - sector.amplitudes()[m]).norm() < 1e-13,
                "site {}",
                m + 1
            );
        }
    }

    #[test]
    fn sector_and_full_engines_agree_on_a_kicked_run() {
        let c = cfg(10);
        let spec = ChainSpectrum::new(&c, ChainModel::Heisenberg).unwrap();
        let initial = ExcitationState::from_site_coefficients(
            10,
            &[4, 5, 6, 7],
            &[0.3, 0.5, -0.5, 0.2],
        )
        .unwrap();
        let mut events = Vec::new();
        for k in 0..10 {
            events.push(PulseEvent::Kick {
                strength: if k % 2 == 0 { 0.5 } else { -0.5 },
            });
            events.push(PulseEvent::Free { time: c.kick_period });
        }
        let sector = crate::chain::run_events(&spec, &initial, &events).unwrap();
        let oracle = run_events_full(&c, &initial, &events).unwrap();
        assert!(oracle.leakage < 1e-24, "leakage {:.3e}", oracle.leakage);
        assert!(oracle.norm_drift < 1e-12);
        let mut worst = 0.0f64;
        for (a, b) in sector
            .amplitudes()
            .iter()
            .zip(oracle.final_state.amplitudes().iter())
        {
            worst = worst.max((a - b).norm());
        }
        assert!(worst < 1e-11, "engines disagree by {worst:.3e}");
    }

    #[test]
    fn gershgorin_encloses_the_sector_spectrum() {
        let c = cfg(8);
        let chain = FullChain::new(&c).unwrap();
        let h = single_excitation_hamiltonian(&c).unwrap();
        let eig = SymTridiag::new(h.matrix.diag().to_vec(), h.matrix.off().to_vec())
            .unwrap()
            .decompose()
            .unwrap();
        let shift = h.dropped.zz + h.dropped.field;
        let (lo, hi) = chain.bounds;
        for &lam in &eig.values {
            assert!(lam + shift >= lo - 1e-12 && lam + shift <= hi + 1e-12);
        }
    }

    #[test]
    fn size_cap_is_enforced() {
        assert!(FullChain::new(&cfg(17)).is_err());
    }
}
