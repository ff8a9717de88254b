//! Dense complex square matrices and a cyclic-Jacobi Hermitian eigensolver.
//!
//! Everything in this crate operates on small matrices (dimension at most 16:
//! density operators, observables and Choi matrices of qubit-sized systems),
//! so storage is a flat row-major `Vec<Complex64>` and no attempt is made at
//! sparsity or cache blocking.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Off-diagonal Frobenius mass at which the Jacobi sweep stops.
///
/// This is an absolute threshold; it is appropriate for the unit-trace,
/// O(1)-norm matrices this crate works with.
pub const JACOBI_OFF_DIAGONAL_TARGET: f64 = 1e-13;

/// Hard cap on Jacobi sweeps before reporting non-convergence.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Default tolerance for Hermiticity checks.
pub const DEFAULT_HERMITICITY_TOL: f64 = 1e-9;

/// Dense square matrix of complex numbers, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Zero matrix of dimension `dim >= 1`.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self { dim, entries: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Build from a row-major entry list; `entries.len()` must equal `dim^2`.
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("matrix dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: entries.len() });
        }
        Ok(Self { dim, entries })
    }

    /// Convenience constructor from real row-major entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::from_entries(dim, entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, Complex64::new(v, 0.0));
        }
        m
    }

    pub fn pauli_x() -> Self {
        Self::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn pauli_y() -> Self {
        let i = Complex64::new(0.0, 1.0);
        Self::from_entries(2, vec![Complex64::new(0.0, 0.0), -i, i, Complex64::new(0.0, 0.0)])
            .unwrap()
    }

    pub fn pauli_z() -> Self {
        Self::from_real(2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Checked matrix product; the operands must share one dimension.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        Ok(self.mul_raw(other))
    }

    fn mul_raw(&self, other: &Self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Kronecker (tensor) product: entry `(i*db+k, j*db+l) = a[i][j] * b[k][l]`.
    pub fn kron(&self, other: &Self) -> Self {
        let da = self.dim;
        let db = other.dim;
        let mut out = Self::zeros(da * db);
        for i in 0..da {
            for j in 0..da {
                let a = self.get(i, j);
                for k in 0..db {
                    for l in 0..db {
                        out.set(i * db + k, j * db + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conj(&self) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|z| z * factor).collect() }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// `Tr(self * other)` without forming the product matrix.
    pub fn trace_product(&self, other: &Self) -> Result<Complex64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let n = self.dim;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.get(i, j) * other.get(j, i);
            }
        }
        Ok(acc)
    }

    /// Max-norm deviation from Hermiticity: `max_ij |M[i][j] - conj(M[j][i])|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Hermitian part `(M + M^\dagger)/2`; exact for already-Hermitian input.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, (self.get(i, j) + self.get(j, i).conj()) * 0.5);
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Repeated matrix product `self^n` for `n >= 1`; `n == 0` is rejected.
    pub fn pow_int(&self, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("matrix power requires exponent >= 1".into()));
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.mul_raw(self);
        }
        Ok(out)
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
    ///
    /// The input must be Hermitian within `tol`; the iteration itself runs on
    /// the exactly-Hermitian part. Sweeps stop once the off-diagonal
    /// Frobenius mass drops below [`JACOBI_OFF_DIAGONAL_TARGET`].
    pub fn hermitian_eigen(&self, tol: f64) -> Result<HermitianEigenSystem> {
        let dev = self.hermiticity_deviation();
        if dev > tol {
            return Err(Error::NotHermitian { deviation: dev, tol });
        }
        let n = self.dim;
        let mut a = self.hermitian_part();
        let mut v = Self::identity(n);

        let mut converged = n == 1;
        for _ in 0..JACOBI_MAX_SWEEPS {
            if off_diagonal_mass(&a) < JACOBI_OFF_DIAGONAL_TARGET {
                converged = true;
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    jacobi_rotate(&mut a, &mut v, p, q);
                }
            }
        }
        if !converged && off_diagonal_mass(&a) >= JACOBI_OFF_DIAGONAL_TARGET {
            return Err(Error::EigenNoConvergence { sweeps: JACOBI_MAX_SWEEPS });
        }

        let mut order: Vec<usize> = (0..n).collect();
        let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
        order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));

        let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
        let mut eigenvectors = Self::zeros(n);
        for (new_col, &old_col) in order.iter().enumerate() {
            for row in 0..n {
                eigenvectors.set(row, new_col, v.get(row, old_col));
            }
        }
        Ok(HermitianEigenSystem { eigenvalues, eigenvectors })
    }
}

fn off_diagonal_mass(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a.get(i, j).norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// One complex Jacobi rotation annihilating the `(p, q)` entry.
///
/// With `beta = a[p][q] = |beta| e^{i phi}` the 2x2 subproblem reduces to a
/// real symmetric rotation after pulling out the phase, so the plane unitary
/// is `U = [[c, s], [-s e^{-i phi}, c e^{-i phi}]]` with the textbook
/// `(c, s)` choice for `tau = (a_qq - a_pp) / (2 |beta|)`.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let beta = a.get(p, q);
    let m = beta.norm();
    if m == 0.0 {
        return;
    }
    let phase = beta / m; // e^{i phi}
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let tau = (aqq - app) / (2.0 * m);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let u00 = Complex64::new(c, 0.0);
    let u01 = Complex64::new(s, 0.0);
    let u10 = -s * phase.conj();
    let u11 = c * phase.conj();

    let n = a.dim();
    // columns: A <- A U
    for r in 0..n {
        let arp = a.get(r, p);
        let arq = a.get(r, q);
        a.set(r, p, arp * u00 + arq * u10);
        a.set(r, q, arp * u01 + arq * u11);
    }
    // rows: A <- U^dagger A
    for r in 0..n {
        let apr = a.get(p, r);
        let aqr = a.get(q, r);
        a.set(p, r, u00.conj() * apr + u10.conj() * aqr);
        a.set(q, r, u01.conj() * apr + u11.conj() * aqr);
    }
    // the rotation zeroes (p, q) exactly in exact arithmetic
    a.set(p, q, Complex64::new(0.0, 0.0));
    a.set(q, p, Complex64::new(0.0, 0.0));
    a.set(p, p, Complex64::new(a.get(p, p).re, 0.0));
    a.set(q, q, Complex64::new(a.get(q, q).re, 0.0));

    for r in 0..n {
        let vrp = v.get(r, p);
        let vrq = v.get(r, q);
        v.set(r, p, vrp * u00 + vrq * u10);
        v.set(r, q, vrp * u01 + vrq * u11);
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvector columns of a
/// Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigenSystem {
    /// Rebuild `sum_m lambda_m |v_m><v_m|`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let mut out = ComplexMatrix::zeros(n);
        for m in 0..n {
            let lam = self.eigenvalues[m];
            for i in 0..n {
                for j in 0..n {
                    let add = self.eigenvectors.get(i, m)
                        * self.eigenvectors.get(j, m).conj()
                        * lam;
                    out.set(i, j, out.get(i, j) + add);
                }
            }
        }
        out
    }

    /// Max-norm deviation of the eigenvector Gram matrix from the identity.
    pub fn gram_deviation(&self) -> f64 {
        let v = &self.eigenvectors;
        let n = v.dim();
        let mut dev: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let mut dot = Complex64::new(0.0, 0.0);
                for r in 0..n {
                    dot += v.get(r, a).conj() * v.get(r, b);
                }
                let target = if a == b { 1.0 } else { 0.0 };
                dev = dev.max((dot - target).norm());
            }
        }
        dev
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix addition requires equal dimensions");
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix subtraction requires equal dimensions");
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product requires equal dimensions");
        self.mul_raw(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matmul_identity_and_pauli_algebra() {
        let id = ComplexMatrix::identity(2);
        let sz = ComplexMatrix::pauli_z();
        let sx = ComplexMatrix::pauli_x();
        let sy = ComplexMatrix::pauli_y();

        assert_eq!(id.matmul(&sz).unwrap(), sz);
        assert!(sx.matmul(&sx).unwrap().max_abs_diff(&id) < 1e-15);

        // sigma_x sigma_y = i sigma_z, worked out by direct 2x2 multiplication
        let isz = sz.scale(c(0.0, 1.0));
        assert!(sx.matmul(&sy).unwrap().max_abs_diff(&isz) < 1e-15);
    }

    #[test]
    fn matmul_rejects_dimension_mismatch() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(3);
        assert!(matches!(a.matmul(&b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn kron_examples() {
        let id2 = ComplexMatrix::identity(2);
        assert_eq!(id2.kron(&id2), ComplexMatrix::identity(4));

        let sz = ComplexMatrix::pauli_z();
        assert_eq!(sz.kron(&id2), ComplexMatrix::diagonal(&[1.0, 1.0, -1.0, -1.0]));

        let a = ComplexMatrix::diagonal(&[2.0, 3.0]);
        let b = ComplexMatrix::diagonal(&[5.0, 7.0]);
        assert_eq!(a.kron(&b), ComplexMatrix::diagonal(&[10.0, 14.0, 15.0, 21.0]));
    }

    #[test]
    fn trace_examples() {
        assert_eq!(ComplexMatrix::identity(4).trace(), c(4.0, 0.0));
        assert_eq!(ComplexMatrix::pauli_z().trace(), c(0.0, 0.0));
    }

    #[test]
    fn dagger_examples() {
        let sy = ComplexMatrix::pauli_y();
        assert_eq!(sy.dagger(), sy);

        let i_id = ComplexMatrix::identity(2).scale(c(0.0, 1.0));
        assert_eq!(i_id.dagger(), ComplexMatrix::identity(2).scale(c(0.0, -1.0)));

        let raising = ComplexMatrix::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let lowering = ComplexMatrix::from_real(2, &[0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(raising.dagger(), lowering);
    }

    #[test]
    fn pow_int_examples() {
        let a = ComplexMatrix::from_real(2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(a.pow_int(1).unwrap(), a);

        let sz = ComplexMatrix::pauli_z();
        assert_eq!(sz.pow_int(2).unwrap(), ComplexMatrix::identity(2));

        let d = ComplexMatrix::diagonal(&[1.2, -0.2]);
        let d3 = d.pow_int(3).unwrap();
        assert!(d3.max_abs_diff(&ComplexMatrix::diagonal(&[1.728, -0.008])) < 1e-15);

        assert!(a.pow_int(0).is_err());
    }

    #[test]
    fn hermiticity_predicate() {
        let mut m = ComplexMatrix::identity(2);
        assert!(m.is_hermitian(0.0));
        m.set(0, 1, c(0.0, 1e-6));
        assert!(!m.is_hermitian(1e-9));
        assert!(m.is_hermitian(1e-5));
    }

    #[test]
    fn eigen_diagonal_sorts_ascending() {
        let m = ComplexMatrix::diagonal(&[3.0, 1.0, 2.0]);
        let es = m.hermitian_eigen(1e-12).unwrap();
        assert_eq!(es.eigenvalues, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn eigen_pauli_x() {
        let es = ComplexMatrix::pauli_x().hermitian_eigen(1e-12).unwrap();
        assert!((es.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((es.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!(es.reconstruct().max_abs_diff(&ComplexMatrix::pauli_x()) < 1e-14);
    }

    #[test]
    fn eigen_rank_one_projector() {
        // corner 4x4 matrix with chi = 0: the maximally entangled projector
        let mut m = ComplexMatrix::zeros(4);
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            m.set(i, j, c(0.5, 0.0));
        }
        let es = m.hermitian_eigen(1e-12).unwrap();
        for k in 0..3 {
            assert!(es.eigenvalues[k].abs() < 1e-14, "lambda_{k} = {}", es.eigenvalues[k]);
        }
        assert!((es.eigenvalues[3] - 1.0).abs() < 1e-14);
        assert!(es.reconstruct().max_abs_diff(&m) < 1e-12);
        assert!(es.gram_deviation() < 1e-12);
    }

    #[test]
    fn eigen_complex_hermitian() {
        let m = ComplexMatrix::from_entries(
            3,
            vec![
                c(2.0, 0.0), c(0.3, -0.7), c(0.0, 1.1),
                c(0.3, 0.7), c(-1.0, 0.0), c(0.4, 0.0),
                c(0.0, -1.1), c(0.4, 0.0), c(0.5, 0.0),
            ],
        )
        .unwrap();
        let es = m.hermitian_eigen(1e-12).unwrap();
        assert!(es.reconstruct().max_abs_diff(&m) < 1e-13);
        assert!(es.gram_deviation() < 1e-13);
        let tr: f64 = es.eigenvalues.iter().sum();
        assert!((tr - m.trace().re).abs() < 1e-12);
        assert!(es.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(m.hermitian_eigen(1e-9), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn pow_matches_eigen_power_for_hermitian() {
        let m = ComplexMatrix::from_entries(
            2,
            vec![c(0.9, 0.0), c(0.2, 0.1), c(0.2, -0.1), c(0.1, 0.0)],
        )
        .unwrap();
        let direct = m.pow_int(3).unwrap();
        let es = m.hermitian_eigen(1e-12).unwrap();
        let cubed = HermitianEigenSystem {
            eigenvalues: es.eigenvalues.iter().map(|l| l.powi(3)).collect(),
            eigenvectors: es.eigenvectors.clone(),
        };
        assert!(direct.max_abs_diff(&cubed.reconstruct()) < 1e-9);
    }
}
