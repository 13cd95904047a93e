//! Closed-form band theory of the homogeneous walk and of the experiment's
//! four-site cell.
//!
//! In the symmetry frame the Bloch matrix has the Pauli form
//! `Ũ′(k) = cos ε·σ₀ + i d₁σ₁ + d₂σ₂ − i d₃σ₃` with `det Ũ′ = 1`, so
//! `sin²ε = d₁² + d₃² − d₂²`. The band is real while `d₂² ≤ d₁² + d₃²`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Result, WalkError};
use crate::linalg::{spinor_norm, Spinor, SpinorMatrix, I};
use crate::operators::{bloch_step, frame_rotation, Frame, HomogeneousParams};

/// Below this modulus of `cos 2ξ` the two eigenvectors are treated as coalesced.
pub const DEGENERACY_TOL: f64 = 1e-6;

/// Imaginary parts below this count as a real quasi-energy in band scans.
pub const REALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionPoint {
    pub k: f64,
    pub eps_plus: Complex64,
    pub eps_minus: Complex64,
    /// `2η = atan2(−d₁, d₃)`.
    pub eta: f64,
    /// `sin 2ξ = −d₂/|d|`; complex once `d₂² > d₁² + d₃²`.
    pub xi: Complex64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d_abs: f64,
}

impl DispersionPoint {
    pub fn xi_is_real(&self) -> bool {
        self.d2 * self.d2 <= self.d1 * self.d1 + self.d3 * self.d3
    }

    /// `cos 2ξ`, the normalization factor of the analytic eigenvectors.
    pub fn cos_2xi(&self) -> Complex64 {
        let x = self.sin_2xi();
        (Complex64::new(1.0, 0.0) - x * x).sqrt()
    }

    fn sin_2xi(&self) -> Complex64 {
        if self.d_abs == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(-self.d2 / self.d_abs, 0.0)
        }
    }

    /// `e^{−iε₊}` and `e^{−iε₋}`.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        [(-I * self.eps_plus).exp(), (-I * self.eps_minus).exp()]
    }

    pub fn max_imag(&self) -> f64 {
        self.eps_plus.im.abs().max(self.eps_minus.im.abs())
    }
}

/// Folds the real part into `(−π, π]`.
pub fn principal(eps: Complex64) -> Complex64 {
    let mut re = eps.re.rem_euclid(2.0 * PI);
    if re > PI {
        re -= 2.0 * PI;
    }
    Complex64::new(re, eps.im)
}

/// `±arccos` with the principal branch `Re ∈ [0, π]` for the `+` band.
fn branch_pair(cos_eps: Complex64) -> (Complex64, Complex64) {
    let plus = cos_eps.acos();
    (plus, principal(-plus))
}

pub fn dispersion(k: f64, p: &HomogeneousParams) -> DispersionPoint {
    let kappa = 2.0 * (k + p.phi);
    let (s1, c1) = p.theta1.sin_cos();
    let (s2, c2) = p.theta2.sin_cos();
    let (ch, sh) = ((2.0 * p.gamma).cosh(), (2.0 * p.gamma).sinh());
    let cos_eps = c1 * c2 * kappa.cos() - s1 * s2 * ch;
    let d1 = s1 * c2 * kappa.cos() + c1 * s2 * ch;
    let d2 = -s2 * sh;
    let d3 = -c2 * kappa.sin();
    let d_abs = d3.hypot(d1);
    let (eps_plus, eps_minus) = branch_pair(Complex64::new(cos_eps, 0.0));
    let mut point = DispersionPoint {
        k,
        eps_plus,
        eps_minus,
        eta: 0.5 * (-d1).atan2(d3),
        xi: Complex64::new(0.0, 0.0),
        d1,
        d2,
        d3,
        d_abs,
    };
    point.xi = point.sin_2xi().asin() * 0.5;
    point
}

/// `cos ε` from the closed form, for callers that only need the band edge.
pub fn cos_quasi_energy(k: f64, p: &HomogeneousParams) -> f64 {
    let (s1, c1) = p.theta1.sin_cos();
    let (s2, c2) = p.theta2.sin_cos();
    c1 * c2 * (2.0 * (k + p.phi)).cos() - s1 * s2 * (2.0 * p.gamma).cosh()
}

/// Analytic eigenvector pair `(|Ψ_{k,+}⟩, |Ψ_{k,−}⟩)` with eigenvalues
/// `e^{−iε₊}`, `e^{−iε₋}`.
///
/// The symmetry-frame vectors are
/// `e^{−iη}/(2√cos2ξ) · (e^{iα} ± e^{−iα}, −i[e^{iα} ∓ e^{−iα}])`, `α = η ± ξ`;
/// the original frame applies `e^{−iθ₁σ₁/2}`. Each vector is checked against
/// the Bloch matrix; a failing vector is recomputed with the opposite sign of
/// `ξ` before giving up.
pub fn eigenvectors(k: f64, p: &HomogeneousParams, frame: Frame) -> Result<(Spinor, Spinor)> {
    let point = dispersion(k, p);
    let cos_2xi = point.cos_2xi();
    if cos_2xi.norm() < DEGENERACY_TOL {
        return Err(WalkError::Degenerate {
            k,
            reason: format!("cos 2ξ = {cos_2xi} (exceptional point)"),
        });
    }
    let u = bloch_step(k, p, Frame::Symmetry);
    let [lambda_plus, lambda_minus] = point.eigenvalues();
    let plus = checked_vector(&u, &point, 1.0, lambda_plus)?;
    let minus = checked_vector(&u, &point, -1.0, lambda_minus)?;
    Ok(match frame {
        Frame::Symmetry => (plus, minus),
        Frame::Original => {
            let back = frame_rotation(-p.theta1);
            (back.apply(&plus), back.apply(&minus))
        }
    })
}

fn checked_vector(
    u: &SpinorMatrix,
    point: &DispersionPoint,
    sign: f64,
    lambda: Complex64,
) -> Result<Spinor> {
    let tol = 1e-9;
    for xi in [point.xi, -point.xi] {
        let v = analytic_vector(point.eta, xi, point.cos_2xi(), sign);
        let uv = u.apply(&v);
        let residual = spinor_norm(&[uv[0] - lambda * v[0], uv[1] - lambda * v[1]]);
        if residual <= tol * spinor_norm(&v).max(1.0) {
            return Ok(v);
        }
    }
    Err(WalkError::Degenerate {
        k: point.k,
        reason: "analytic eigenvector failed the residual check".into(),
    })
}

fn analytic_vector(eta: f64, xi: Complex64, cos_2xi: Complex64, sign: f64) -> Spinor {
    let alpha = Complex64::new(eta, 0.0) + xi * sign;
    let (ep, em) = ((I * alpha).exp(), (-I * alpha).exp());
    let norm = Complex64::from_polar(1.0, -eta) / (cos_2xi.sqrt() * 2.0);
    [norm * (ep + em * sign), norm * (-I) * (ep - em * sign)]
}

/// `e^{γ*}` at which the band edge touches `ε = 0`:
/// `cosh 2γ* = (cos θ₁ cos θ₂ − 1)/(sin θ₁ sin θ₂)`.
pub fn exceptional_gamma(theta1: f64, theta2: f64) -> Result<f64> {
    ensure_finite("theta1", theta1)?;
    ensure_finite("theta2", theta2)?;
    let s = theta1.sin() * theta2.sin();
    if s == 0.0 {
        return Err(WalkError::NoExceptionalPoint(
            "sin θ₁ sin θ₂ = 0".to_string(),
        ));
    }
    let arg = (theta1.cos() * theta2.cos() - 1.0) / s;
    if !(arg >= 1.0) {
        return Err(WalkError::NoExceptionalPoint(format!(
            "cosh⁻¹ argument {arg} is below 1"
        )));
    }
    Ok((arg.acosh() / 2.0).exp())
}

/// Quasi-energy branches of the experiment walk at cell momentum `k`
/// (translation by four sites): `cos(±ε) = −½ cos φ₀ cosh 2γ₀ ± √f_k` with
/// `f_k = [cosh 4γ₀ (cos²φ₀ − 1) − 3cos²φ₀ + 4 + cos k]/8`.
/// Returns four values `[ε₁, −ε₁, ε₂, −ε₂]`.
pub fn experiment_dispersion(k: f64, gamma0: f64, phi0: f64) -> Result<Vec<Complex64>> {
    ensure_finite("k", k)?;
    ensure_finite("gamma0", gamma0)?;
    ensure_finite("phi0", phi0)?;
    let cphi = phi0.cos();
    let f = ((4.0 * gamma0).cosh() * (cphi * cphi - 1.0) - 3.0 * cphi * cphi + 4.0 + k.cos()) / 8.0;
    let root = Complex64::new(f, 0.0).sqrt();
    let base = Complex64::new(-0.5 * cphi * (2.0 * gamma0).cosh(), 0.0);
    let mut out = Vec::with_capacity(4);
    for c in [base + root, base - root] {
        let (plus, minus) = branch_pair(c);
        out.push(plus);
        out.push(minus);
    }
    Ok(out)
}

/// Dispersion sampled on `M` uniformly spaced momenta `k_j = −π + 2π(j+1)/M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandScan {
    pub params: HomogeneousParams,
    pub points: Vec<DispersionPoint>,
}

impl BandScan {
    pub fn max_imag(&self) -> f64 {
        self.points.iter().map(|p| p.max_imag()).fold(0.0, f64::max)
    }

    /// Maximal runs of consecutive grid points with complex quasi-energy,
    /// as `(k_first, k_last)`.
    pub fn complex_windows(&self) -> Vec<(f64, f64)> {
        let mut windows = Vec::new();
        let mut start: Option<f64> = None;
        let mut last = 0.0;
        for p in &self.points {
            if p.max_imag() > REALITY_TOL {
                start.get_or_insert(p.k);
                last = p.k;
            } else if let Some(s) = start.take() {
                windows.push((s, last));
            }
        }
        if let Some(s) = start {
            windows.push((s, last));
        }
        windows
    }
}

pub fn scan_bz(p: &HomogeneousParams, grid: usize) -> Result<BandScan> {
    p.validate()?;
    if grid < 2 {
        return Err(invalid(format!("band scan needs at least 2 points, got {grid}")));
    }
    let points = (0..grid)
        .map(|j| {
            let k = -PI + 2.0 * PI * (j + 1) as f64 / grid as f64;
            dispersion(k, p)
        })
        .collect();
    Ok(BandScan { params: *p, points })
}
