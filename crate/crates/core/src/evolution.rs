//! Wavefunction propagation on the ring, substep by substep in `O(N)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, WalkError};
use crate::linalg::{spinor_norm, Spinor, ZERO};
use crate::operators::{coin, Chirality, WalkConfig};

/// Amplitudes `ψ_{n,σ}` stored at `2(n + N/2) + σ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkState {
    sites: usize,
    amplitudes: Vec<Complex64>,
    pub t: usize,
}

impl WalkState {
    pub fn from_amplitudes(sites: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 2 * sites {
            return Err(invalid(format!(
                "{} amplitudes for {sites} sites",
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|z| !z.is_finite()) {
            return Err(WalkError::InvalidState("non-finite amplitude".into()));
        }
        Ok(Self {
            sites,
            amplitudes,
            t: 0,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    fn index(&self, n: i64) -> usize {
        (n + (self.sites / 2) as i64).rem_euclid(self.sites as i64) as usize
    }

    pub fn amplitude(&self, n: i64, chirality: Chirality) -> Complex64 {
        self.amplitudes[2 * self.index(n) + chirality as usize]
    }

    /// `|ψ_{n,L}|² + |ψ_{n,R}|²` in storage order.
    pub fn distribution(&self) -> Vec<f64> {
        self.amplitudes
            .chunks_exact(2)
            .map(|p| p[0].norm_sqr() + p[1].norm_sqr())
            .collect()
    }

    pub fn total_probability(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Storage indices of the first and last site with nonzero amplitude.
    pub fn support(&self) -> Option<(usize, usize)> {
        let occupied = |j: &usize| self.amplitudes[2 * j] != ZERO || self.amplitudes[2 * j + 1] != ZERO;
        let first = (0..self.sites).find(occupied)?;
        let last = (0..self.sites).rev().find(occupied)?;
        Some((first, last))
    }
}

/// Normalized state localized at site `n0` with internal state `spinor`.
pub fn init_state(sites: usize, n0: i64, spinor: Spinor) -> Result<WalkState> {
    if sites < 4 || !sites.is_multiple_of(2) {
        return Err(invalid(format!(
            "lattice size must be even and at least 4, got {sites}"
        )));
    }
    let half = (sites / 2) as i64;
    if n0 < -half || n0 >= half {
        return Err(invalid(format!("site {n0} outside [{}, {}]", -half, half - 1)));
    }
    let norm = spinor_norm(&spinor);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(invalid("initial spinor must be nonzero and finite"));
    }
    let mut amplitudes = vec![ZERO; 2 * sites];
    let j = (n0 + half) as usize;
    amplitudes[2 * j] = spinor[0] / norm;
    amplitudes[2 * j + 1] = spinor[1] / norm;
    WalkState::from_amplitudes(sites, amplitudes)
}

fn apply_coin(psi: &mut [Complex64], theta: &[f64]) {
    for (pair, &th) in psi.chunks_exact_mut(2).zip(theta) {
        let [[a, b], [c, d]] = coin(th).0;
        let (l, r) = (pair[0], pair[1]);
        pair[0] = a * l + b * r;
        pair[1] = c * l + d * r;
    }
}

fn apply_phase_gain(psi: &mut [Complex64], c: &WalkConfig, substep: usize) {
    let (gl, gr) = (c.gain(substep, Chirality::Left), c.gain(substep, Chirality::Right));
    let (pl, pr) = (c.phase(substep, Chirality::Left), c.phase(substep, Chirality::Right));
    for (j, pair) in psi.chunks_exact_mut(2).enumerate() {
        pair[0] *= Complex64::from_polar(gl[j], pl[j]);
        pair[1] *= Complex64::from_polar(gr[j], pr[j]);
    }
}

/// L moves one site down, R one site up, periodically.
fn apply_shift(psi: &mut [Complex64]) {
    let sites = psi.len() / 2;
    let first_l = psi[0];
    for j in 0..sites - 1 {
        psi[2 * j] = psi[2 * (j + 1)];
    }
    psi[2 * (sites - 1)] = first_l;
    let last_r = psi[2 * sites - 1];
    for j in (1..sites).rev() {
        psi[2 * j + 1] = psi[2 * (j - 1) + 1];
    }
    psi[1] = last_r;
}

/// One full step `U = S G₂ Φ₂ C(θ₂) S G₁ Φ₁ C(θ₁)`.
pub fn step(s: &WalkState, c: &WalkConfig) -> Result<WalkState> {
    let mut next = s.clone();
    step_in_place(&mut next, c)?;
    Ok(next)
}

pub fn step_in_place(s: &mut WalkState, c: &WalkConfig) -> Result<()> {
    if s.sites != c.sites() {
        return Err(invalid(format!(
            "state has {} sites, configuration {}",
            s.sites,
            c.sites()
        )));
    }
    for substep in 0..2 {
        apply_coin(&mut s.amplitudes, c.theta(substep));
        apply_phase_gain(&mut s.amplitudes, c, substep);
        apply_shift(&mut s.amplitudes);
    }
    s.t += 1;
    Ok(())
}

/// Ring size that keeps a walker started at the origin clear of the seam
/// for `steps` steps.
pub fn auto_sites(steps: usize) -> usize {
    4 * steps + 8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionRecord {
    /// `|ψ_n(t)|²` for `t = 0..=T`, each in storage order.
    pub distributions: Vec<Vec<f64>>,
    /// `P(t)`.
    pub total_probability: Vec<f64>,
    pub final_state: WalkState,
}

/// Propagates `steps` steps. Fails with a boundary overflow as soon as the
/// support reaches the two outermost sites on either side, since the next
/// step could carry amplitude across the seam.
pub fn run(c: &WalkConfig, s0: &WalkState, steps: usize) -> Result<EvolutionRecord> {
    let mut state = s0.clone();
    let mut distributions = Vec::with_capacity(steps + 1);
    let mut total = Vec::with_capacity(steps + 1);
    distributions.push(state.distribution());
    total.push(state.total_probability());
    for t in 0..steps {
        if let Some((first, last)) = state.support() {
            if first < 2 || last + 2 >= state.sites {
                return Err(WalkError::BoundaryOverflow {
                    step: t,
                    sites: state.sites,
                });
            }
        }
        step_in_place(&mut state, c)?;
        let p = state.total_probability();
        if !p.is_finite() {
            return Err(WalkError::InvalidState(format!("probability overflowed at step {}", t + 1)));
        }
        distributions.push(state.distribution());
        total.push(p);
    }
    Ok(EvolutionRecord {
        distributions,
        total_probability: total,
        final_state: state,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthRegime {
    Unitary,
    BoundedOscillatory,
    Linear,
    Exponential,
}

struct Fit {
    slope: f64,
    r2: f64,
}

fn least_squares(x: &[f64], y: &[f64]) -> Fit {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Fit { slope, r2 }
}

pub const MIN_SERIES: usize = 50;

/// Classifies `P(t)` over the second half of the series.
///
/// Exponential needs a log-fit slope above `10⁻³` per step with `R² > 0.99`
/// and at least the `R²` of the straight-line fit; linear needs a straight
/// line with positive slope and `R² > 0.99`.
pub fn classify_growth(p: &[f64]) -> Result<GrowthRegime> {
    if p.len() < MIN_SERIES {
        return Err(invalid(format!(
            "growth classification needs at least {MIN_SERIES} points, got {}",
            p.len()
        )));
    }
    if p.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(invalid("probability series must be finite and positive"));
    }
    let end = p.len() - 1;
    let window = &p[end / 2..];
    let t: Vec<f64> = (end / 2..=end).map(|t| t as f64).collect();
    let max_dev = window.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    if max_dev < 1e-10 {
        return Ok(GrowthRegime::Unitary);
    }
    let logs: Vec<f64> = window.iter().map(|v| v.ln()).collect();
    let log_fit = least_squares(&t, &logs);
    let lin_fit = least_squares(&t, window);
    if log_fit.slope > 1e-3 && log_fit.r2 > 0.99 && log_fit.r2 >= lin_fit.r2 {
        return Ok(GrowthRegime::Exponential);
    }
    if lin_fit.slope > 0.0 && lin_fit.r2 > 0.99 {
        return Ok(GrowthRegime::Linear);
    }
    if max_dev < 0.5 {
        return Ok(GrowthRegime::BoundedOscillatory);
    }
    Err(WalkError::Unclassified { max_deviation: max_dev })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    /// `None` for a zero-variance distribution.
    pub excess_kurtosis: Option<f64>,
}

/// Moments of `|ψ_n|²/P` over site coordinates `n`.
pub fn distribution_moments(s: &WalkState) -> Result<Moments> {
    let dist = s.distribution();
    let total: f64 = dist.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(WalkError::InvalidState(format!("total probability {total}")));
    }
    let half = (s.sites / 2) as f64;
    let coords = || (0..s.sites).map(|j| j as f64 - half);
    let mean = coords().zip(&dist).map(|(n, w)| n * w).sum::<f64>() / total;
    let central = |k: i32| coords().zip(&dist).map(|(n, w)| (n - mean).powi(k) * w).sum::<f64>() / total;
    let variance = central(2);
    let excess_kurtosis = (variance > 0.0).then(|| central(4) / (variance * variance) - 3.0);
    Ok(Moments {
        mean,
        variance,
        excess_kurtosis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, I};
    use crate::momentum::exceptional_gamma;
    use crate::operators::{assemble_dense, Frame, HomogeneousParams};
    use std::f64::consts::PI;

    fn ring(sites: usize, eg: f64) -> WalkConfig {
        let p = HomogeneousParams::with_exp_gamma(PI / 4.0, -PI / 7.0, eg, 0.0).unwrap();
        WalkConfig::homogeneous(sites, &p).unwrap()
    }

    #[test]
    fn initial_states() {
        let s = init_state(8, 0, [ZERO, ONE]).unwrap();
        assert_eq!(s.amplitude(0, Chirality::Right), ONE);
        assert_eq!(s.total_probability(), 1.0);
        let s = init_state(8, 0, [ONE, ONE]).unwrap();
        assert!((s.total_probability() - 1.0).abs() < 1e-15);
        assert!(init_state(8, 0, [ZERO, ZERO]).is_err());
        assert!(init_state(8, 4, [ONE, ZERO]).is_err());
        assert!(init_state(8, -4, [ONE, ZERO]).is_ok());
    }

    #[test]
    fn free_walk_moves_two_sites() {
        let c = WalkConfig::homogeneous(8, &HomogeneousParams::new(0.0, 0.0, 0.0, 0.0).unwrap()).unwrap();
        let s = step(&init_state(8, 0, [ZERO, ONE]).unwrap(), &c).unwrap();
        assert_eq!(s.amplitude(2, Chirality::Right), ONE);
        assert_eq!(s.t, 1);
        let s = step(&init_state(8, 0, [ONE, ZERO]).unwrap(), &c).unwrap();
        assert_eq!(s.amplitude(-2, Chirality::Left), ONE);
    }

    #[test]
    fn swap_coin_reverses_direction() {
        // C(π/2) = iσ₁: R becomes L before each shift
        let c = WalkConfig::homogeneous(8, &HomogeneousParams::new(PI / 2.0, PI / 2.0, 0.0, 0.0).unwrap()).unwrap();
        let s = step(&init_state(8, 0, [ZERO, ONE]).unwrap(), &c).unwrap();
        // first substep moves R to n = −1 as L; second swaps back to R at n = 0
        assert!((s.amplitude(0, Chirality::Right) - I * I).norm() < 1e-15);
        assert!(s.amplitude(0, Chirality::Left).norm() < 1e-15);
    }

    #[test]
    fn step_matches_dense() {
        let c = ring(16, 1.1);
        let u = assemble_dense(&c, Frame::Original);
        let s = init_state(16, 0, [ZERO, ONE]).unwrap();
        let dense = u.mul_vec(s.amplitudes());
        let stepped = step(&s, &c).unwrap();
        let err = stepped.amplitudes().iter().zip(&dense).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
        assert!(step(&init_state(8, 0, [ONE, ZERO]).unwrap(), &c).is_err());
    }

    #[test]
    fn unitary_run_conserves_probability() {
        let rec = run(&ring(auto_sites(60), 1.0), &init_state(auto_sites(60), 0, [ZERO, ONE]).unwrap(), 60).unwrap();
        assert!(rec.total_probability.iter().all(|p| (p - 1.0).abs() < 1e-12));
        assert_eq!(rec.distributions.len(), 61);
        assert_eq!(rec.final_state.t, 60);
    }

    #[test]
    fn overflow_is_detected() {
        let c = ring(16, 1.0);
        let err = run(&c, &init_state(16, 0, [ZERO, ONE]).unwrap(), 10).unwrap_err();
        assert!(matches!(err, WalkError::BoundaryOverflow { sites: 16, .. }));
        assert!(run(&c, &init_state(16, 0, [ZERO, ONE]).unwrap(), 3).is_ok());
    }

    #[test]
    fn growth_regimes() {
        let unitary = vec![1.0; 100];
        assert_eq!(classify_growth(&unitary).unwrap(), GrowthRegime::Unitary);
        let exp: Vec<f64> = (0..100).map(|t| (0.05 * t as f64).exp()).collect();
        assert_eq!(classify_growth(&exp).unwrap(), GrowthRegime::Exponential);
        let lin: Vec<f64> = (0..100).map(|t| 1.0 + 0.1 * t as f64).collect();
        assert_eq!(classify_growth(&lin).unwrap(), GrowthRegime::Linear);
        let osc: Vec<f64> = (0..100).map(|t| 1.0 + 0.05 * (0.3 * t as f64).sin()).collect();
        assert_eq!(classify_growth(&osc).unwrap(), GrowthRegime::BoundedOscillatory);
        let wild: Vec<f64> = (0..100).map(|t| if t % 2 == 0 { 1.0 } else { 3.0 }).collect();
        assert!(matches!(classify_growth(&wild), Err(WalkError::Unclassified { .. })));
        assert!(classify_growth(&unitary[..49]).is_err());
    }

    #[test]
    fn exceptional_point_grows_linearly() {
        let eg = exceptional_gamma(PI / 4.0, -PI / 7.0).unwrap();
        let sites = auto_sites(200);
        let rec = run(&ring(sites, eg), &init_state(sites, 0, [ZERO, ONE]).unwrap(), 200).unwrap();
        assert_eq!(classify_growth(&rec.total_probability).unwrap(), GrowthRegime::Linear);
    }

    #[test]
    fn moments_of_localized_and_spread_states() {
        let m = distribution_moments(&init_state(8, 1, [ONE, ZERO]).unwrap()).unwrap();
        assert_eq!((m.mean, m.variance, m.excess_kurtosis), (1.0, 0.0, None));
        // two equal peaks at ±2: variance 4, excess kurtosis −2
        let mut amps = vec![ZERO; 16];
        amps[2 * 2] = ONE;
        amps[2 * 6 + 1] = ONE;
        let m = distribution_moments(&WalkState::from_amplitudes(8, amps).unwrap()).unwrap();
        assert!(m.mean.abs() < 1e-15 && (m.variance - 4.0).abs() < 1e-12);
        assert!((m.excess_kurtosis.unwrap() + 2.0).abs() < 1e-12);
        let zero = WalkState::from_amplitudes(4, vec![ZERO; 8]).unwrap();
        assert!(matches!(distribution_moments(&zero), Err(WalkError::InvalidState(_))));
    }
}
