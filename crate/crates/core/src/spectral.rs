//! Dense spectra of finite walks.
//!
//! General complex eigenvalue problem: diagonal balancing, Householder
//! reduction to upper Hessenberg form, then single-shift QR with Givens
//! rotations on the active window. Eigenvectors are only computed for
//! sampled residual checks, by inverse iteration.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, WalkError};
use crate::linalg::{vec_norm, CMatrix, ZERO};
use crate::operators::{assemble_dense, Frame, WalkConfig};

/// Unit-circle tolerance reported with every spectrum.
pub const UNIMODULARITY_TOL: f64 = 1e-6;

pub const MAX_ITERATIONS_PER_EIGENVALUE: usize = 40;
pub const EXCEPTIONAL_SHIFT_PERIOD: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<Complex64>,
    pub quasienergies: Vec<Complex64>,
    /// `max ||λ| − 1|`.
    pub max_unimodularity_deviation: f64,
    /// Every `|λ|` within `tolerance` of 1.
    pub real_quasienergy: bool,
    pub tolerance: f64,
    /// Largest `‖Uv − λv‖/(‖U‖·‖v‖)` over the sampled eigenpairs.
    pub sampled_residual: f64,
}

/// `ε = i·ln λ`, with `Re ε ∈ (−π, π]`.
pub fn quasienergy(lambda: Complex64) -> Result<Complex64> {
    if lambda.norm() == 0.0 || !lambda.is_finite() {
        return Err(WalkError::SingularEigenvalue(format!("λ = {lambda}")));
    }
    let mut re = -lambda.arg();
    if re <= -PI {
        re += 2.0 * PI;
    }
    Ok(Complex64::new(re, lambda.norm().ln()))
}

pub fn quasienergies(s: &SpectrumResult) -> Result<Vec<Complex64>> {
    s.eigenvalues.iter().map(|&l| quasienergy(l)).collect()
}

/// `(max ||λ| − 1| < tol, max ||λ| − 1|)`.
pub fn unimodularity(s: &SpectrumResult, tol: f64) -> (bool, f64) {
    let dev = max_unimodularity_deviation(&s.eigenvalues);
    (dev < tol, dev)
}

fn max_unimodularity_deviation(values: &[Complex64]) -> f64 {
    values.iter().map(|l| (l.norm() - 1.0).abs()).fold(0.0, f64::max)
}

/// All `2N` eigenvalues of the dense one-step operator.
pub fn eigenvalues(c: &WalkConfig, frame: Frame) -> Result<SpectrumResult> {
    spectrum_of_matrix(&assemble_dense(c, frame), 10)
}

/// Spectrum of an arbitrary square matrix with `samples` eigenpair residual checks.
pub fn spectrum_of_matrix(u: &CMatrix, samples: usize) -> Result<SpectrumResult> {
    let values = eigenvalues_of_matrix(u)?;
    let quasienergies = values.iter().map(|&l| quasienergy(l)).collect::<Result<Vec<_>>>()?;
    let dev = max_unimodularity_deviation(&values);
    let sampled_residual = sampled_residual(u, &values, samples);
    Ok(SpectrumResult {
        eigenvalues: values,
        quasienergies,
        max_unimodularity_deviation: dev,
        real_quasienergy: dev < UNIMODULARITY_TOL,
        tolerance: UNIMODULARITY_TOL,
        sampled_residual,
    })
}

/// Eigenvalues of a general complex square matrix.
pub fn eigenvalues_of_matrix(a: &CMatrix) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(invalid(format!("matrix is {}×{}, not square", a.rows(), a.cols())));
    }
    if a.rows() == 0 {
        return Ok(Vec::new());
    }
    if a.data_iter().any(|z| !z.is_finite()) {
        return Err(invalid("matrix has non-finite entries"));
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    hessenberg_qr(&mut h)
}

/// Parlett–Reinsch balancing by powers of two; a similarity, so the
/// spectrum is unchanged.
pub fn balance(a: &mut CMatrix) {
    let n = a.rows();
    let radix = 2.0_f64;
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let (mut c, mut r) = (0.0, 0.0);
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].l1_norm();
                    r += a[(i, j)].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let (mut cc, mut rr) = (c, r);
            while cc < rr / radix {
                f *= radix;
                cc *= radix;
                rr /= radix;
            }
            while cc >= rr * radix {
                f /= radix;
                cc /= radix;
                rr *= radix;
            }
            if (cc + rr) < 0.95 * s {
                converged = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// Householder reduction to upper Hessenberg form, in place.
pub fn hessenberg(a: &mut CMatrix) {
    let n = a.rows();
    if n < 3 {
        return;
    }
    let mut v = vec![ZERO; n];
    for k in 0..n - 2 {
        let alpha_norm = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        // v = x + e^{i arg x₀}‖x‖ e₁
        for i in 0..n {
            v[i] = if i > k { a[(i, k)] } else { ZERO };
        }
        v[k + 1] += phase * alpha_norm;
        let vnorm2: f64 = v[k + 1..].iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // A ← (I − 2vv*/v*v) A
        for j in k..n {
            let mut dot = ZERO;
            for i in k + 1..n {
                dot += v[i].conj() * a[(i, j)];
            }
            let f = dot * (2.0 / vnorm2);
            for i in k + 1..n {
                a[(i, j)] -= v[i] * f;
            }
        }
        // A ← A (I − 2vv*/v*v)
        for i in 0..n {
            let mut dot = ZERO;
            for j in k + 1..n {
                dot += a[(i, j)] * v[j];
            }
            let f = dot * (2.0 / vnorm2);
            for j in k + 1..n {
                a[(i, j)] -= f * v[j].conj();
            }
        }
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
    }
}

/// Givens rotation `[c s; −s̄ c]` with real `c` mapping `(a, b)` to `(r, 0)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let nu = na.hypot(nb);
    (na / nu, (a / na) * b.conj() / nu)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let (m1, m2) = (mean + disc, mean - disc);
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Shifted QR on an upper Hessenberg matrix. Only the active unreduced
/// window is updated, which is enough for eigenvalues.
fn hessenberg_qr(h: &mut CMatrix) -> Result<Vec<Complex64>> {
    let n = h.rows();
    let mut values = vec![ZERO; n];
    let norm = h.max_abs().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut rot: Vec<(f64, Complex64)> = Vec::with_capacity(n);
    loop {
        if hi == 0 {
            values[0] = h[(0, 0)];
            break;
        }
        // deflation search
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut scale = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if scale == 0.0 {
                scale = norm;
            }
            if sub <= eps * scale {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            values[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > MAX_ITERATIONS_PER_EIGENVALUE {
            return Err(WalkError::SolverFailure {
                iterations: iter - 1,
                found: n - 1 - hi,
                size: n,
            });
        }
        let mu = if iter.is_multiple_of(EXCEPTIONAL_SHIFT_PERIOD) {
            let kick = h[(hi, hi - 1)].norm() + if hi >= 2 { h[(hi - 1, hi - 2)].norm() } else { 0.0 };
            h[(hi, hi)] + Complex64::new(0.75 * kick, 0.5 * kick)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        // H − μ = QR
        rot.clear();
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rot.push((c, s));
            for j in k..=hi {
                let (x, y) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
        }
        // RQ + μ
        for (idx, &(c, s)) in rot.iter().enumerate() {
            let k = lo + idx;
            for i in lo..=(k + 1).min(hi) {
                let (x, y) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    Ok(values)
}

/// Eigenvector of `u` for the (approximate) eigenvalue `lambda` by inverse
/// iteration, normalized to unit length.
pub fn inverse_iteration(u: &CMatrix, lambda: Complex64) -> Vec<Complex64> {
    let n = u.rows();
    let mut shifted = u.clone();
    let scale = u.max_abs().max(1.0);
    shifted.add_diagonal(-(lambda + Complex64::new(1e-13, 1e-13) * scale));
    let lu = shifted.lu();
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + (i as f64 * 0.618).sin() * 0.1, (i as f64 * 0.379).cos() * 0.1))
        .collect();
    for _ in 0..3 {
        let w = lu.solve(&v);
        let norm = vec_norm(&w);
        if norm == 0.0 || !norm.is_finite() {
            break;
        }
        v = w.into_iter().map(|z| z / norm).collect();
    }
    v
}

/// `‖Uv − λv‖/(‖U‖_F‖v‖)` for the eigenvector obtained by inverse iteration.
pub fn eigenpair_residual(u: &CMatrix, lambda: Complex64) -> f64 {
    let v = inverse_iteration(u, lambda);
    let uv = u.mul_vec(&v);
    let r: Vec<Complex64> = uv.iter().zip(&v).map(|(a, b)| a - lambda * b).collect();
    vec_norm(&r) / (u.frobenius_norm() * vec_norm(&v)).max(f64::MIN_POSITIVE)
}

/// Largest residual over `samples` evenly spaced eigenvalues.
pub fn sampled_residual(u: &CMatrix, values: &[Complex64], samples: usize) -> f64 {
    if values.is_empty() || samples == 0 {
        return 0.0;
    }
    let count = samples.min(values.len());
    (0..count)
        .map(|s| eigenpair_residual(u, values[s * values.len() / count]))
        .fold(0.0, f64::max)
}
