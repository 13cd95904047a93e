//! Small dense complex linear algebra: 2×2 matrices on the internal (L, R)
//! space and general row-major matrices for position-space operators.

use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Two-component amplitude in the (L, R) basis.
pub type Spinor = [Complex64; 2];

/// A 2×2 complex matrix acting on the internal space, row-major, basis (L, R).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinorMatrix(pub [[Complex64; 2]; 2]);

impl SpinorMatrix {
    pub const IDENTITY: Self = Self([[ONE, ZERO], [ZERO, ONE]]);
    pub const SIGMA1: Self = Self([[ZERO, ONE], [ONE, ZERO]]);
    pub const SIGMA2: Self = Self([[ZERO, Complex64::new(0.0, -1.0)], [I, ZERO]]);
    pub const SIGMA3: Self = Self([[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]]);

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self([[a, b], [c, d]])
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        Self([[a, ZERO], [ZERO, d]])
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = &self.0;
        Self([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        let m = &self.0;
        Self([
            [m[0][0].conj(), m[0][1].conj()],
            [m[1][0].conj(), m[1][1].conj()],
        ])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    /// Inverse via the adjugate; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.norm() == 0.0 {
            return None;
        }
        let m = &self.0;
        Some(Self([[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]]).scale(det.inv()))
    }

    pub fn apply(&self, v: &Spinor) -> Spinor {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        d
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Both eigenvalues from the characteristic polynomial, `tr/2 ± sqrt((tr/2)^2 - det)`.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let half = self.trace() * 0.5;
        let disc = (half * half - self.det()).sqrt();
        [half + disc, half - disc]
    }
}

impl Mul for SpinorMatrix {
    type Output = SpinorMatrix;

    fn mul(self, rhs: SpinorMatrix) -> SpinorMatrix {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        SpinorMatrix(out)
    }
}

impl std::ops::Add for SpinorMatrix {
    type Output = SpinorMatrix;

    fn add(self, rhs: SpinorMatrix) -> SpinorMatrix {
        let mut out = self.0;
        for (r, row) in out.iter_mut().enumerate() {
            for (c, z) in row.iter_mut().enumerate() {
                *z += rhs.0[r][c];
            }
        }
        SpinorMatrix(out)
    }
}

pub fn spinor_norm(v: &Spinor) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

pub fn conj_spinor(v: &Spinor) -> Spinor {
    [v[0].conj(), v[1].conj()]
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data_iter(&self) -> impl Iterator<Item = &Complex64> {
        self.data.iter()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖self − I‖_max` for square matrices.
    pub fn distance_from_identity(&self) -> f64 {
        assert!(self.is_square());
        let mut d: f64 = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let target = if r == c { ONE } else { ZERO };
                d = d.max((self[(r, c)] - target).norm());
            }
        }
        d
    }

    pub fn add_diagonal(&mut self, shift: Complex64) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] += shift;
        }
    }

    pub fn lu(&self) -> Lu {
        Lu::new(self.clone())
    }

    pub fn determinant(&self) -> Complex64 {
        self.lu().determinant()
    }

    pub fn inverse(&self) -> Option<CMatrix> {
        let lu = self.lu();
        if lu.is_singular() {
            return None;
        }
        let n = self.rows;
        let mut inv = CMatrix::zeros(n, n);
        let mut e = vec![ZERO; n];
        for c in 0..n {
            e.iter_mut().for_each(|z| *z = ZERO);
            e[c] = ONE;
            let x = lu.solve(&e);
            for r in 0..n {
                inv[(r, c)] = x[r];
            }
        }
        Some(inv)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul<&CMatrix> for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for (k, a) in self.row(r).iter().enumerate() {
                if *a == ZERO {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    factors: CMatrix,
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    fn new(mut a: CMatrix) -> Self {
        assert!(a.is_square());
        let n = a.rows;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let (p, _) = (k..n).fold((k, -1.0), |(bi, bv), i| {
                let v = a[(i, k)].norm();
                if v > bv {
                    (i, v)
                } else {
                    (bi, bv)
                }
            });
            if p != k {
                for c in 0..n {
                    a.data.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = a[(k, k)];
            if pivot == ZERO {
                continue;
            }
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                a[(i, k)] = f;
                if f == ZERO {
                    continue;
                }
                for c in k + 1..n {
                    let t = a[(k, c)];
                    a[(i, c)] -= f * t;
                }
            }
        }
        Self {
            factors: a,
            perm,
            swaps,
        }
    }

    pub fn is_singular(&self) -> bool {
        (0..self.factors.rows).any(|i| self.factors[(i, i)] == ZERO)
    }

    pub fn determinant(&self) -> Complex64 {
        let mut det = if self.swaps.is_multiple_of(2) { ONE } else { -ONE };
        for i in 0..self.factors.rows {
            det *= self.factors[(i, i)];
        }
        det
    }

    /// Solves `A x = b`. Zero pivots are replaced by a tiny value so that
    /// inverse iteration on an exactly singular shift still produces a
    /// direction.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.factors.rows;
        let lu = &self.factors;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().take(i) {
                s -= lu[(i, j)] * xj;
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().skip(i + 1) {
                s -= lu[(i, j)] * xj;
            }
            let mut pivot = lu[(i, i)];
            if pivot == ZERO {
                pivot = Complex64::new(f64::EPSILON, 0.0);
            }
            x[i] = s / pivot;
        }
        x
    }
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest distance in a minimum-first greedy pairing of two equally sized
/// multisets of complex numbers. Returns `f64::INFINITY` on size mismatch.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    let mut matched = 0;
    for (d, i, j) in pairs {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        worst = worst.max(d);
        matched += 1;
        if matched == a.len() {
            break;
        }
    }
    worst
}

/// For every element of `values`, the distance to the nearest element of
/// `image` after mapping; the maximum over `values` is returned. Used to test
/// spectral closure under maps such as `λ → λ*`.
pub fn closure_distance(values: &[Complex64], map: impl Fn(Complex64) -> Complex64) -> f64 {
    values
        .iter()
        .map(|&v| {
            let m = map(v);
            values
                .iter()
                .map(|w| (m - w).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let s1 = SpinorMatrix::SIGMA1;
        let s2 = SpinorMatrix::SIGMA2;
        let s3 = SpinorMatrix::SIGMA3;
        assert!((s1 * s1).max_abs_diff(&SpinorMatrix::IDENTITY) < 1e-15);
        // σ1 σ2 = i σ3
        assert!((s1 * s2).max_abs_diff(&s3.scale(I)) < 1e-15);
        assert_eq!(s3.det(), -ONE);
    }

    #[test]
    fn spinor_inverse_round_trip() {
        let m = SpinorMatrix::new(
            Complex64::new(1.0, 2.0),
            Complex64::new(0.5, -1.0),
            Complex64::new(-0.3, 0.0),
            Complex64::new(2.0, 0.1),
        );
        let inv = m.inverse().unwrap();
        assert!((m * inv).max_abs_diff(&SpinorMatrix::IDENTITY) < 1e-14);
        assert!(SpinorMatrix::diag(ZERO, ONE).inverse().is_none());
    }

    #[test]
    fn lu_determinant_and_inverse() {
        let a = CMatrix::from_fn(4, 4, |r, c| {
            Complex64::new((r * 3 + c) as f64 % 5.0 - 1.5, (r as f64 - c as f64) * 0.25)
        });
        let inv = a.inverse().unwrap();
        assert!((&a * &inv).distance_from_identity() < 1e-12);
        let det_t = a.transpose().determinant();
        assert!((a.determinant() - det_t).norm() < 1e-12);
    }

    #[test]
    fn multiset_distance_ignores_order() {
        let a = [ONE, I, -ONE];
        let b = [-ONE, ONE, I + 1e-9];
        assert!(multiset_distance(&a, &b) < 2e-9);
        assert!(multiset_distance(&a, &b[..2]).is_infinite());
    }
}
