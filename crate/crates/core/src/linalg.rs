//! Small dense complex matrices: products, adjoints, and singular values by
//! one-sided Jacobi rotations.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// Square complex matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(n: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), n * n, "matrix data has wrong length");
        Self { n, data }
    }

    pub fn scalar(c: Complex64) -> Self {
        Self { n: 1, data: vec![c] }
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|v| v * c).collect() }
    }

    /// `self += c * other`
    pub fn add_scaled(&mut self, other: &CMatrix, c: Complex64) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * c;
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// Squared Hilbert-Schmidt (Frobenius) norm.
    pub fn hs_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        jacobi_singular_values(self)
    }

    /// Schatten norm; `None` selects the operator norm.
    pub fn schatten(&self, p: Option<f64>) -> f64 {
        let s = self.singular_values();
        match p {
            None => s.first().copied().unwrap_or(0.0),
            Some(p) => s.iter().map(|v| v.powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        CMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        CMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 60;

/// One-sided Jacobi: rotate column pairs until mutually orthogonal; the
/// column norms are then the singular values.
fn jacobi_singular_values(m: &CMatrix) -> Vec<f64> {
    let n = m.n;
    // column-major copy
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| (0..n).map(|i| m[(i, j)]).collect()).collect();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha: f64 = cols[i].iter().map(|v| v.norm_sqr()).sum();
                let beta: f64 = cols[j].iter().map(|v| v.norm_sqr()).sum();
                let gamma: Complex64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
                let g = gamma.norm();
                if g <= JACOBI_TOL * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..n {
                    let u = cols[i][r];
                    let v = cols[j][r] * phase.conj();
                    cols[i][r] = u * c - v * s;
                    cols[j][r] = u * s + v * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn singular_values_of_diagonal_and_rank_one() {
        let d = CMatrix::diag(&[c(3.0, 0.0), c(0.0, -4.0)]);
        let s = d.singular_values();
        assert!((s[0] - 4.0).abs() < 1e-12 && (s[1] - 3.0).abs() < 1e-12);

        // u v^*, |u| = sqrt(2), |v| = sqrt(5)
        let u = [c(1.0, 0.0), c(0.0, 1.0)];
        let v = [c(1.0, 0.0), c(2.0, 0.0)];
        let mut m = CMatrix::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = u[i] * v[j].conj();
            }
        }
        let s = m.singular_values();
        assert!((s[0] - 10f64.sqrt()).abs() < 1e-12, "{s:?}");
        assert!(s[1].abs() < 1e-12);
    }

    #[test]
    fn schatten_two_is_frobenius() {
        let m = CMatrix::from_rows(
            3,
            vec![c(1.0, 2.0), c(0.5, 0.0), c(-1.0, 1.0), c(0.0, 0.0), c(2.0, -3.0), c(1.0, 1.0), c(4.0, 0.0), c(0.0, 0.5), c(-2.0, 0.0)],
        );
        assert!((m.schatten(Some(2.0)).powi(2) - m.hs_norm_sq()).abs() < 1e-10);
        // operator norm bounded by Frobenius, trace norm dominates it
        assert!(m.schatten(None) <= m.schatten(Some(2.0)) + 1e-12);
        assert!(m.schatten(Some(2.0)) <= m.schatten(Some(1.0)) + 1e-12);
    }

    #[test]
    fn unitary_has_unit_singular_values() {
        let h = 1.0 / 2f64.sqrt();
        let m = CMatrix::from_rows(2, vec![c(h, 0.0), c(0.0, h), c(0.0, h), c(h, 0.0)]);
        for s in m.singular_values() {
            assert!((s - 1.0).abs() < 1e-12);
        }
        let prod = &m * &m.adjoint();
        assert!((&prod - &CMatrix::identity(2)).max_abs() < 1e-12);
    }
}
