//! Elemental operators of the two-step walk and their composition into
//! one-step evolution operators.
//!
//! Operators compose right to left: `U = S G₂ Φ₂ C(θ₂) S G₁ Φ₁ C(θ₁)` means the
//! first coin acts first. The symmetry time frame moves half of the first
//! coin to the end of the step, `U′ = C(θ₁/2) S G₂ Φ₂ C(θ₂) S G₁ Φ₁ C(θ₁/2)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Result};
use crate::linalg::{CMatrix, SpinorMatrix, I, ONE};

/// Which time frame an evolution operator is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    #[default]
    Original,
    Symmetry,
}

/// Internal state index, `L = 0`, `R = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chirality {
    Left = 0,
    Right = 1,
}

/// `e^{iθσ₁}`.
pub fn coin_matrix(theta: f64) -> Result<SpinorMatrix> {
    ensure_finite("theta", theta)?;
    Ok(coin(theta))
}

pub(crate) fn coin(theta: f64) -> SpinorMatrix {
    let (s, c) = theta.sin_cos();
    let c = Complex64::new(c, 0.0);
    let is = Complex64::new(0.0, s);
    SpinorMatrix::new(c, is, is, c)
}

/// `diag(g_L, g_R)`; both factors must be positive.
pub fn gain_matrix(gain_l: f64, gain_r: f64) -> Result<SpinorMatrix> {
    for (name, g) in [("gain_l", gain_l), ("gain_r", gain_r)] {
        ensure_finite(name, g)?;
        if g <= 0.0 {
            return Err(invalid(format!("{name} must be positive, got {g}")));
        }
    }
    Ok(SpinorMatrix::diag(
        Complex64::new(gain_l, 0.0),
        Complex64::new(gain_r, 0.0),
    ))
}

/// `diag(e^{iφ_L}, e^{iφ_R})`.
pub fn phase_matrix(phase_l: f64, phase_r: f64) -> Result<SpinorMatrix> {
    ensure_finite("phase_l", phase_l)?;
    ensure_finite("phase_r", phase_r)?;
    Ok(SpinorMatrix::diag(
        Complex64::from_polar(1.0, phase_l),
        Complex64::from_polar(1.0, phase_r),
    ))
}

/// Momentum-space shift `e^{ikσ₃}`: the left mover picks up `e^{+ik}`.
pub fn shift_bloch(k: f64) -> SpinorMatrix {
    sigma3_exp(Complex64::new(0.0, k))
}

/// `e^{zσ₃}` for complex `z`.
fn sigma3_exp(z: Complex64) -> SpinorMatrix {
    SpinorMatrix::diag(z.exp(), (-z).exp())
}

/// Parameters of the translation-invariant walk with `G̃₂ = G̃₁⁻¹ = e^{γσ₃}`
/// and `Φ̃₁ = Φ̃₂ = e^{iφσ₃}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousParams {
    pub theta1: f64,
    pub theta2: f64,
    pub gamma: f64,
    pub phi: f64,
}

impl HomogeneousParams {
    pub fn new(theta1: f64, theta2: f64, gamma: f64, phi: f64) -> Result<Self> {
        let p = Self {
            theta1,
            theta2,
            gamma,
            phi,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("theta1", self.theta1)?;
        ensure_finite("theta2", self.theta2)?;
        ensure_finite("gamma", self.gamma)?;
        ensure_finite("phi", self.phi)
    }

    /// Same angles with the gain given as `e^γ`.
    pub fn with_exp_gamma(theta1: f64, theta2: f64, exp_gamma: f64, phi: f64) -> Result<Self> {
        if !(exp_gamma > 0.0) {
            return Err(invalid(format!("e^gamma must be positive, got {exp_gamma}")));
        }
        Self::new(theta1, theta2, exp_gamma.ln(), phi)
    }

    fn gain(&self) -> SpinorMatrix {
        sigma3_exp(Complex64::new(self.gamma, 0.0))
    }

    fn gain_inv(&self) -> SpinorMatrix {
        sigma3_exp(Complex64::new(-self.gamma, 0.0))
    }

    fn phase(&self) -> SpinorMatrix {
        sigma3_exp(Complex64::new(0.0, self.phi))
    }
}

/// One-step Bloch matrix `Ũ(k)` in the requested frame.
pub fn bloch_step(k: f64, p: &HomogeneousParams, frame: Frame) -> SpinorMatrix {
    let s = shift_bloch(k);
    let (g, g_inv, ph) = (p.gain(), p.gain_inv(), p.phase());
    match frame {
        Frame::Original => s * g * ph * coin(p.theta2) * s * g_inv * ph * coin(p.theta1),
        Frame::Symmetry => {
            let half = coin(p.theta1 / 2.0);
            half * s * ph * g * coin(p.theta2) * g_inv * ph * s * half
        }
    }
}

/// Symmetry-frame Bloch matrix with the phase absorbed into the shift,
/// `C̃(θ₁/2) S̃(k+φ) G̃ C̃(θ₂) G̃⁻¹ S̃(k+φ) C̃(θ₁/2)`.
pub fn bloch_step_folded(k: f64, p: &HomogeneousParams) -> SpinorMatrix {
    let s = shift_bloch(k + p.phi);
    let half = coin(p.theta1 / 2.0);
    half * s * p.gain() * coin(p.theta2) * p.gain_inv() * s * half
}

/// `e^{iθ₁σ₁/2}`, the similarity taking the original frame to the symmetry frame.
pub fn frame_rotation(theta1: f64) -> SpinorMatrix {
    coin(theta1 / 2.0)
}

/// Position-dependent parameters of a walk on a ring of `N` sites labelled
/// `n ∈ {−N/2, …, N/2−1}`. Field vectors are indexed by `n + N/2`; the outer
/// array index is the substep (0 for the first coin, 1 for the second).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    sites: usize,
    theta: [Vec<f64>; 2],
    gain_l: [Vec<f64>; 2],
    gain_r: [Vec<f64>; 2],
    phase_l: [Vec<f64>; 2],
    phase_r: [Vec<f64>; 2],
}

/// Per-site parameter field for both substeps.
pub type Field = [Vec<f64>; 2];

impl WalkConfig {
    pub fn new(
        sites: usize,
        theta: Field,
        gain_l: Field,
        gain_r: Field,
        phase_l: Field,
        phase_r: Field,
    ) -> Result<Self> {
        let c = Self {
            sites,
            theta,
            gain_l,
            gain_r,
            phase_l,
            phase_r,
        };
        c.validate()?;
        Ok(c)
    }

    /// Builds every field from a closure `f(substep, n)` returning
    /// `(θ, g_L, g_R, φ_L, φ_R)`.
    pub fn from_fn(sites: usize, f: impl Fn(usize, i64) -> (f64, f64, f64, f64, f64)) -> Result<Self> {
        check_sites(sites)?;
        let mut fields: [Field; 5] = Default::default();
        for i in 0..2 {
            for field in fields.iter_mut() {
                field[i] = Vec::with_capacity(sites);
            }
            for j in 0..sites {
                let n = j as i64 - (sites / 2) as i64;
                let v = f(i, n);
                fields[0][i].push(v.0);
                fields[1][i].push(v.1);
                fields[2][i].push(v.2);
                fields[3][i].push(v.3);
                fields[4][i].push(v.4);
            }
        }
        let [theta, gain_l, gain_r, phase_l, phase_r] = fields;
        Self::new(sites, theta, gain_l, gain_r, phase_l, phase_r)
    }

    /// Translation-invariant ring carrying `HomogeneousParams`.
    pub fn homogeneous(sites: usize, p: &HomogeneousParams) -> Result<Self> {
        p.validate()?;
        let (eg, ph) = (p.gamma.exp(), p.phi);
        Self::from_fn(sites, |i, _| {
            let theta = if i == 0 { p.theta1 } else { p.theta2 };
            // first substep carries G̃⁻¹, second G̃
            let (gl, gr) = if i == 0 { (1.0 / eg, eg) } else { (eg, 1.0 / eg) };
            (theta, gl, gr, ph, -ph)
        })
    }

    /// The fibre-loop experiment: Hadamard coins, alternating gain and loss,
    /// and a period-4 phase pattern on the right mover. `N` must be a
    /// multiple of 4.
    pub fn experiment(sites: usize, gamma0: f64, phi0: f64) -> Result<Self> {
        ensure_finite("gamma0", gamma0)?;
        ensure_finite("phi0", phi0)?;
        if !sites.is_multiple_of(4) {
            return Err(invalid(format!(
                "experiment lattice must be a multiple of 4 sites, got {sites}"
            )));
        }
        let eg = gamma0.exp();
        Self::from_fn(sites, |i, n| {
            let (gl, gr) = if i == 0 { (eg, 1.0 / eg) } else { (1.0 / eg, eg) };
            (PI / 4.0, gl, gr, 0.0, experiment_phase(n, phi0))
        })
    }

    /// Four-region walk on the ring `n ∈ {−L, …, L−1}`: coins differ between
    /// `|n| ≤ L/2` and the outside, gains and phases between `n < 0` and
    /// `n ≥ 0`. The second-substep fields are the reflection partners of the
    /// first-substep fields about `q = 0` (`−n+1` for L, `−n−1` for R).
    pub fn four_region(half_width: usize) -> Result<Self> {
        if half_width < 2 || !half_width.is_multiple_of(2) {
            return Err(invalid(format!(
                "four-region half width L must be even and at least 2, got {half_width}"
            )));
        }
        let l = half_width as i64;
        let sites = 2 * half_width;
        let g1l = |n: i64| if n < 0 { 1.1 } else { 1.2 };
        let g1r = |n: i64| if n < 0 { 1.2 } else { 1.1 };
        let p1l = |n: i64| if n < 0 { PI / 4.0 } else { PI / 8.0 };
        let p1r = |n: i64| if n < 0 { -PI / 3.0 } else { -PI / 6.0 };
        let wrap = |n: i64| (n + l).rem_euclid(2 * l) - l;
        Self::from_fn(sites, |i, n| {
            let inner = n.abs() <= l / 2;
            if i == 0 {
                let theta = if inner { PI / 4.0 } else { -PI / 8.0 };
                (theta, g1l(n), g1r(n), p1l(n), p1r(n))
            } else {
                let theta = if inner { -PI / 3.0 } else { PI / 6.0 };
                let partner_l = wrap(1 - n);
                let partner_r = wrap(-1 - n);
                (
                    theta,
                    1.0 / g1l(partner_l),
                    1.0 / g1r(partner_r),
                    p1l(partner_l),
                    p1r(partner_r),
                )
            }
        })
    }

    fn validate(&self) -> Result<()> {
        check_sites(self.sites)?;
        let named: [(&str, &Field); 5] = [
            ("theta", &self.theta),
            ("gain_l", &self.gain_l),
            ("gain_r", &self.gain_r),
            ("phase_l", &self.phase_l),
            ("phase_r", &self.phase_r),
        ];
        for (name, field) in named {
            for (i, values) in field.iter().enumerate() {
                if values.len() != self.sites {
                    return Err(invalid(format!(
                        "{name}[{i}] has {} entries, expected {}",
                        values.len(),
                        self.sites
                    )));
                }
                for (j, &v) in values.iter().enumerate() {
                    if !v.is_finite() {
                        return Err(invalid(format!("{name}[{i}][{j}] is not finite")));
                    }
                    if name.starts_with("gain") && v <= 0.0 {
                        return Err(invalid(format!(
                            "{name}[{i}][{j}] must be positive, got {v}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Dimension of the position-space operators, `2N`.
    pub fn dim(&self) -> usize {
        2 * self.sites
    }

    /// Site coordinate of storage index `j`.
    pub fn coordinate(&self, j: usize) -> i64 {
        j as i64 - (self.sites / 2) as i64
    }

    /// Storage index of coordinate `n`, wrapping modulo `N`.
    pub fn index(&self, n: i64) -> usize {
        (n + (self.sites / 2) as i64).rem_euclid(self.sites as i64) as usize
    }

    pub fn theta(&self, substep: usize) -> &[f64] {
        &self.theta[substep]
    }

    pub fn gain(&self, substep: usize, chirality: Chirality) -> &[f64] {
        match chirality {
            Chirality::Left => &self.gain_l[substep],
            Chirality::Right => &self.gain_r[substep],
        }
    }

    pub fn phase(&self, substep: usize, chirality: Chirality) -> &[f64] {
        match chirality {
            Chirality::Left => &self.phase_l[substep],
            Chirality::Right => &self.phase_r[substep],
        }
    }

    pub fn fields(&self) -> (&Field, &Field, &Field, &Field, &Field) {
        (
            &self.theta,
            &self.gain_l,
            &self.gain_r,
            &self.phase_l,
            &self.phase_r,
        )
    }

    /// Returns a copy with one entry replaced; used to inject violations.
    pub fn with_entry(&self, field: ParamField, substep: usize, j: usize, value: f64) -> Result<Self> {
        let mut c = self.clone();
        let slot = match field {
            ParamField::Theta => &mut c.theta,
            ParamField::GainL => &mut c.gain_l,
            ParamField::GainR => &mut c.gain_r,
            ParamField::PhaseL => &mut c.phase_l,
            ParamField::PhaseR => &mut c.phase_r,
        };
        *slot
            .get_mut(substep)
            .and_then(|v| v.get_mut(j))
            .ok_or_else(|| invalid(format!("no entry ({substep}, {j})")))? = value;
        c.validate()?;
        Ok(c)
    }

    /// Recovers `HomogeneousParams` when every site carries the same values
    /// in the `G̃₂ = G̃₁⁻¹ = e^{γσ₃}`, `Φ̃ = e^{iφσ₃}` form.
    pub fn as_homogeneous(&self) -> Result<HomogeneousParams> {
        let tol = 1e-12;
        let uniform = |v: &[f64]| v.iter().all(|x| (x - v[0]).abs() <= tol);
        let all = [
            &self.theta, &self.gain_l, &self.gain_r, &self.phase_l, &self.phase_r,
        ];
        if !all.iter().all(|f| uniform(&f[0]) && uniform(&f[1])) {
            return Err(invalid("configuration is position dependent"));
        }
        let gamma = self.gain_l[1][0].ln();
        let phi = self.phase_l[0][0];
        let consistent = (self.gain_r[1][0].ln() + gamma).abs() <= tol
            && (self.gain_l[0][0].ln() + gamma).abs() <= tol
            && (self.gain_r[0][0].ln() - gamma).abs() <= tol
            && (self.phase_l[1][0] - phi).abs() <= tol
            && (self.phase_r[0][0] + phi).abs() <= tol
            && (self.phase_r[1][0] + phi).abs() <= tol;
        if !consistent {
            return Err(invalid(
                "uniform configuration is not of the e^{γσ₃}, e^{iφσ₃} form",
            ));
        }
        HomogeneousParams::new(self.theta[0][0], self.theta[1][0], gamma, phi)
    }
}

/// Names a position-dependent parameter field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParamField {
    Theta,
    GainL,
    GainR,
    PhaseL,
    PhaseR,
}

fn check_sites(sites: usize) -> Result<()> {
    if sites < 4 || !sites.is_multiple_of(2) {
        return Err(invalid(format!(
            "lattice size must be even and at least 4, got {sites}"
        )));
    }
    Ok(())
}

/// `φ_R(n)`: `−φ₀` where `(n+3) mod 4 ∈ {1, 2}`, `+φ₀` otherwise.
pub fn experiment_phase(n: i64, phi0: f64) -> f64 {
    match (n + 3).rem_euclid(4) {
        1 | 2 => -phi0,
        _ => phi0,
    }
}

fn block_diagonal(c: &WalkConfig, block: impl Fn(usize) -> SpinorMatrix) -> CMatrix {
    let mut m = CMatrix::zeros(c.dim(), c.dim());
    for j in 0..c.sites() {
        let b = block(j);
        for r in 0..2 {
            for col in 0..2 {
                m[(2 * j + r, 2 * j + col)] = b.0[r][col];
            }
        }
    }
    m
}

/// Position-space coin `C(θ_i)`; `scale` multiplies every angle (½ for the
/// split coin of the symmetry frame).
pub fn coin_operator(c: &WalkConfig, substep: usize, scale: f64) -> CMatrix {
    block_diagonal(c, |j| coin(c.theta[substep][j] * scale))
}

pub fn gain_operator(c: &WalkConfig, substep: usize) -> CMatrix {
    block_diagonal(c, |j| {
        SpinorMatrix::diag(
            Complex64::new(c.gain_l[substep][j], 0.0),
            Complex64::new(c.gain_r[substep][j], 0.0),
        )
    })
}

pub fn phase_operator(c: &WalkConfig, substep: usize) -> CMatrix {
    block_diagonal(c, |j| {
        SpinorMatrix::diag(
            Complex64::from_polar(1.0, c.phase_l[substep][j]),
            Complex64::from_polar(1.0, c.phase_r[substep][j]),
        )
    })
}

/// Position-space shift: L moves from `n` to `n−1`, R from `n` to `n+1`.
/// With `twist = K ≠ 0` the ring is one unit cell of an infinite chain with
/// `ψ(n+N) = e^{iK} ψ(n)`, so amplitude crossing the seam picks up `e^{±iK}`.
pub fn shift_operator(sites: usize, twist: f64) -> CMatrix {
    let dim = 2 * sites;
    let mut m = CMatrix::zeros(dim, dim);
    for j in 0..sites {
        let left_to = (j + sites - 1) % sites;
        m[(2 * left_to, 2 * j)] = if j == 0 {
            Complex64::from_polar(1.0, -twist)
        } else {
            ONE
        };
        let right_to = (j + 1) % sites;
        m[(2 * right_to + 1, 2 * j + 1)] = if j == sites - 1 {
            Complex64::from_polar(1.0, twist)
        } else {
            ONE
        };
    }
    m
}

/// Dense `2N × 2N` one-step operator on the periodic ring.
pub fn assemble_dense(c: &WalkConfig, frame: Frame) -> CMatrix {
    assemble_twisted(c, frame, 0.0)
}

/// Dense operator of the ring treated as a unit cell with Bloch phase `e^{iK}`.
pub fn assemble_twisted(c: &WalkConfig, frame: Frame, twist: f64) -> CMatrix {
    let shift = shift_operator(c.sites(), twist);
    let (first, last) = match frame {
        Frame::Original => (coin_operator(c, 0, 1.0), None),
        Frame::Symmetry => {
            let half = coin_operator(c, 0, 0.5);
            (half.clone(), Some(half))
        }
    };
    // accumulate from the right so every left factor is sparse
    let factors = [
        phase_operator(c, 0),
        gain_operator(c, 0),
        shift.clone(),
        coin_operator(c, 1, 1.0),
        phase_operator(c, 1),
        gain_operator(c, 1),
        shift,
    ];
    let mut acc = first;
    for f in &factors {
        acc = f * &acc;
    }
    if let Some(half) = last {
        acc = &half * &acc;
    }
    acc
}

/// Full lattice-size-independent check that a dense operator is unitary.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    (&u.adjoint() * u).distance_from_identity()
}

/// `Ũ′(k)` assembled entry by entry from the Pauli decomposition
/// `cos ε·σ₀ + i d₁σ₁ + d₂σ₂ − i d₃σ₃`; an independent route to the symmetry
/// frame Bloch matrix used by tests of the band formulas.
pub fn bloch_from_pauli(cos_eps: f64, d1: f64, d2: f64, d3: f64) -> SpinorMatrix {
    let c = Complex64::new(cos_eps, 0.0);
    SpinorMatrix::new(
        c - I * d3,
        I * d1 - I * d2,
        I * d1 + I * d2,
        c + I * d3,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn coin_special_angles() {
        assert!(coin_matrix(0.0).unwrap().max_abs_diff(&SpinorMatrix::IDENTITY) < 1e-15);
        let quarter = coin_matrix(PI / 2.0).unwrap();
        let expected = SpinorMatrix::new(ZERO, I, I, ZERO);
        assert!(quarter.max_abs_diff(&expected) < 1e-15);
        let eighth = coin_matrix(PI / 4.0).unwrap();
        let expected = SpinorMatrix::new(
            c(FRAC_1_SQRT_2, 0.0),
            c(0.0, FRAC_1_SQRT_2),
            c(0.0, FRAC_1_SQRT_2),
            c(FRAC_1_SQRT_2, 0.0),
        );
        assert!(eighth.max_abs_diff(&expected) < 1e-15);
        assert!((eighth.det() - ONE).norm() < 1e-15);
        assert!(coin_matrix(f64::NAN).is_err());
        assert!(coin_matrix(f64::INFINITY).is_err());
    }

    #[test]
    fn gain_values() {
        assert_eq!(gain_matrix(1.0, 1.0).unwrap(), SpinorMatrix::IDENTITY);
        let g = gain_matrix(0.3f64.exp(), (-0.3f64).exp()).unwrap();
        assert!((g.0[0][0].re - 1.349_858_807_576_003).abs() < 1e-15);
        assert!((g.0[1][1].re - 0.740_818_220_681_717_8).abs() < 1e-15);
        assert!((g.det() - ONE).norm() < 1e-15);
        let local = gain_matrix(1.1, 1.2).unwrap();
        assert!((local.det() - c(1.32, 0.0)).norm() < 1e-15);
        assert!(gain_matrix(0.0, 1.0).is_err());
        assert!(gain_matrix(1.0, -2.0).is_err());
    }

    #[test]
    fn phase_values() {
        assert_eq!(phase_matrix(0.0, 0.0).unwrap(), SpinorMatrix::IDENTITY);
        let phi = 0.37;
        let p = phase_matrix(phi, -phi).unwrap();
        assert!(p.max_abs_diff(&sigma3_exp(c(0.0, phi))) < 1e-15);
        let e = phase_matrix(0.0, -6.0 * PI / 5.0).unwrap();
        assert!((e.0[1][1] - Complex64::from_polar(1.0, -6.0 * PI / 5.0)).norm() < 1e-15);
        assert!((e.det().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shift_special_momenta() {
        assert!(shift_bloch(0.0).max_abs_diff(&SpinorMatrix::IDENTITY) < 1e-15);
        assert!(shift_bloch(PI).max_abs_diff(&SpinorMatrix::IDENTITY.scale(-ONE)) < 1e-15);
        assert!(shift_bloch(PI / 2.0).max_abs_diff(&SpinorMatrix::diag(I, -I)) < 1e-15);
    }

    #[test]
    fn bloch_step_without_coins_is_double_shift() {
        let p = HomogeneousParams::new(0.0, 0.0, 0.0, 0.0).unwrap();
        for k in [-2.0, 0.3, 1.7] {
            let u = bloch_step(k, &p, Frame::Original);
            let expected = SpinorMatrix::diag(c(0.0, 2.0 * k).exp(), c(0.0, -2.0 * k).exp());
            assert!(u.max_abs_diff(&expected) < 1e-14);
        }
    }

    #[test]
    fn bloch_step_quasi_energy_at_zero_momentum() {
        let p = HomogeneousParams::new(PI / 4.0, -PI / 7.0, 0.0, 0.0).unwrap();
        let u = bloch_step(0.0, &p, Frame::Original);
        // cos ε = cos θ₁ cos θ₂ − sin θ₁ sin θ₂ = cos(3π/28)
        let eps = (3.0 * PI / 28.0_f64).cos().acos();
        assert!((eps - 0.336_599_212_884_620_7).abs() < 1e-12);
        let mut ev = u.eigenvalues();
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((ev[0] - Complex64::from_polar(1.0, -eps)).norm() < 1e-12);
        assert!((ev[1] - Complex64::from_polar(1.0, eps)).norm() < 1e-12);

        let lossy = HomogeneousParams::with_exp_gamma(PI / 4.0, -PI / 7.0, 1.5, 0.0).unwrap();
        let ev = bloch_step(0.0, &lossy, Frame::Original).eigenvalues();
        assert!(ev.iter().all(|l| (l.norm() - 1.0).abs() > 1e-3));
    }

    #[test]
    fn frames_are_similar() {
        let p = HomogeneousParams::new(0.9, -0.4, 0.2, 0.3).unwrap();
        let r = frame_rotation(p.theta1);
        let r_inv = frame_rotation(-p.theta1);
        for k in [-3.0, -0.5, 0.0, 1.1, 2.9] {
            let orig = bloch_step(k, &p, Frame::Original);
            let sym = bloch_step(k, &p, Frame::Symmetry);
            assert!(sym.max_abs_diff(&(r * orig * r_inv)) < 1e-12);
            assert!(sym.max_abs_diff(&bloch_step_folded(k, &p)) < 1e-12);
            assert!((sym.det() - ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn dense_double_shift_on_four_sites() {
        let p = HomogeneousParams::new(0.0, 0.0, 0.0, 0.0).unwrap();
        let cfg = WalkConfig::homogeneous(4, &p).unwrap();
        let u = assemble_dense(&cfg, Frame::Original);
        for j in 0..4 {
            for (sigma, to) in [(0, (j + 2) % 4), (1, (j + 2) % 4)] {
                // on four sites, two steps left and two steps right coincide
                assert_eq!(u[(2 * to + sigma, 2 * j + sigma)], ONE);
            }
        }
        assert_eq!(u.frobenius_norm().powi(2).round(), 8.0);
    }

    #[test]
    fn dense_shift_directions() {
        let s = shift_operator(6, 0.0);
        let cfg = WalkConfig::homogeneous(6, &HomogeneousParams::new(0.0, 0.0, 0.0, 0.0).unwrap())
            .unwrap();
        let from = cfg.index(0);
        assert_eq!(s[(2 * cfg.index(-1), 2 * from)], ONE);
        assert_eq!(s[(2 * cfg.index(1) + 1, 2 * from + 1)], ONE);
        // wrap at the seam
        assert_eq!(s[(2 * cfg.index(2) + 1, 2 * cfg.index(-3))], ZERO);
        assert_eq!(s[(2 * cfg.index(-3) + 1, 2 * cfg.index(2) + 1)], ONE);
    }

    #[test]
    fn experiment_without_gain_is_unitary() {
        let cfg = WalkConfig::experiment(8, 0.0, 0.0).unwrap();
        assert!(unitarity_defect(&assemble_dense(&cfg, Frame::Original)) < 1e-12);
        assert!(WalkConfig::experiment(10, 0.0, 0.0).is_err());
    }

    #[test]
    fn experiment_phase_pattern() {
        let phi0 = 6.0 * PI / 5.0;
        let pattern: Vec<f64> = (0..4).map(|n| experiment_phase(n, phi0)).collect();
        assert_eq!(pattern, vec![phi0, phi0, -phi0, -phi0]);
        assert_eq!(experiment_phase(-1, phi0), -phi0);
        assert_eq!(experiment_phase(-4, phi0), phi0);
    }

    #[test]
    fn config_validation() {
        let p = HomogeneousParams::new(0.1, 0.2, 0.0, 0.0).unwrap();
        assert!(WalkConfig::homogeneous(3, &p).is_err());
        assert!(WalkConfig::homogeneous(2, &p).is_err());
        let cfg = WalkConfig::homogeneous(8, &p).unwrap();
        assert!(cfg.with_entry(ParamField::GainL, 0, 3, 0.0).is_err());
        assert!(cfg.with_entry(ParamField::Theta, 1, 3, f64::NAN).is_err());
        assert!(cfg.with_entry(ParamField::Theta, 2, 0, 0.0).is_err());
        assert!(HomogeneousParams::new(f64::NAN, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn homogeneous_round_trip() {
        let p = HomogeneousParams::new(0.7, -0.3, 0.12, -0.4).unwrap();
        let cfg = WalkConfig::homogeneous(10, &p).unwrap();
        let back = cfg.as_homogeneous().unwrap();
        assert!((back.gamma - p.gamma).abs() < 1e-14);
        assert!((back.phi - p.phi).abs() < 1e-14);
        assert!(WalkConfig::experiment(8, 0.1, 0.5).unwrap().as_homogeneous().is_err());
    }

    #[test]
    fn pauli_form_matches_product() {
        let p = HomogeneousParams::new(PI / 4.0, -PI / 7.0, 0.2, 0.0).unwrap();
        let k: f64 = 0.3;
        let (s1, c1) = p.theta1.sin_cos();
        let (s2, c2) = p.theta2.sin_cos();
        let d1 = s1 * c2 * (2.0 * k).cos() + c1 * s2 * (2.0 * p.gamma).cosh();
        let d2 = -s2 * (2.0 * p.gamma).sinh();
        let d3 = -c2 * (2.0 * k).sin();
        let cos_eps = c1 * c2 * (2.0 * k).cos() - s1 * s2 * (2.0 * p.gamma).cosh();
        let u = bloch_from_pauli(cos_eps, d1, d2, d3);
        assert!(u.max_abs_diff(&bloch_step(k, &p, Frame::Symmetry)) < 1e-14);
    }
}
