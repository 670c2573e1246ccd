//! Dense complex linear algebra on the small, fixed dimensions of a three-qubit
//! register: operator construction, tensor products, partial traces,
//! column-stacking vectorization and the Liouvillian null-space solve.
//!
//! Qubits are labelled `1..=n` with qubit 1 the most significant bit of the
//! basis index, i.e. `|q1 q2 q3>` has index `4*q1 + 2*q2 + q3`. The state `|0>`
//! is the excited state (`sigma_z = |0><0| - |1><1|`).

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::{re, Real, C};

/// Number of qubits in the refrigerator register.
pub const N_QUBITS: usize = 3;
/// Hilbert-space dimension of the register.
pub const DIM: usize = 1 << N_QUBITS;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("qubit {qubit} out of range 1..={n}")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("qubit {0} listed twice")]
    DuplicateQubit(usize),
    #[error("empty qubit subset")]
    EmptySubset,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate steady state: numerical kernel has dimension {kernel_dim}")]
    DegenerateSteadyState { kernel_dim: usize },
    #[error("generator has no kernel (smallest singular value ratio {ratio:e})")]
    NoSteadyState { ratio: f64 },
    #[error("kernel vector has vanishing trace")]
    TracelessKernel,
    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),
}

/// Dense complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C<T>>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch { expected: rows * cols, got: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a real matrix from row slices.
    pub fn from_real_rows(rows: &[&[T]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| re(rows[i][j]))
    }

    pub fn from_real_diag(diag: &[T]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { re(diag[i]) } else { C::zero() })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(re(s))
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).fold(C::zero(), |a, b| a + b)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (*a - *b).norm()).fold(T::zero(), T::max)
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square() && self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// `(M + M^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(T::half())
    }

    /// Hilbert-Schmidt inner product `tr(self^dagger other)`.
    pub fn inner(&self, other: &Self) -> C<T> {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).fold(C::zero(), |x, y| x + y)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    pub fn mul_vec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).fold(C::zero(), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    /// Column-stacking vectorization.
    pub fn vec(&self) -> Vec<C<T>> {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    /// Inverse of [`ComplexMatrix::vec`] for an `n x n` matrix.
    pub fn unvec(v: &[C<T>], n: usize) -> Result<Self, LinalgError> {
        if v.len() != n * n {
            return Err(LinalgError::DimensionMismatch { expected: n * n, got: v.len() });
        }
        Ok(Self::from_fn(n, n, |i, j| v[j * n + i]))
    }

    pub fn column(&self, j: usize) -> Vec<C<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let src = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(src) {
                    *d = *d + a * *b;
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn add(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn sub(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect(),
        }
    }
}

impl<T: Real> Neg for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn neg(self) -> ComplexMatrix<T> {
        self.scale_real(-T::one())
    }
}

// Single-qubit operators.

pub fn identity2<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::identity(2)
}

/// `|0><0| - |1><1|`.
pub fn sigma_z<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::from_real_diag(&[T::one(), -T::one()])
}

/// Raising operator `|0><1|`.
pub fn sigma_plus<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::from_real_rows(&[&[T::zero(), T::one()], &[T::zero(), T::zero()]])
}

/// Lowering operator `|1><0|`.
pub fn sigma_minus<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::from_real_rows(&[&[T::zero(), T::zero()], &[T::one(), T::zero()]])
}

pub fn sigma_x<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::from_real_rows(&[&[T::zero(), T::one()], &[T::one(), T::zero()]])
}

pub fn sigma_y<T: Real>() -> ComplexMatrix<T> {
    let i = C::new(T::zero(), T::one());
    ComplexMatrix::from_fn(2, 2, |r, c| match (r, c) {
        (0, 1) => -i,
        (1, 0) => i,
        _ => C::zero(),
    })
}

/// Kronecker product `a (x) b`.
pub fn kron<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(a.rows * b.rows, a.cols * b.cols, |i, j| {
        a[(i / b.rows, j / b.cols)] * b[(i % b.rows, j % b.cols)]
    })
}

fn check_sites(sites: &[usize], n: usize) -> Result<(), LinalgError> {
    if sites.is_empty() {
        return Err(LinalgError::EmptySubset);
    }
    for (k, &q) in sites.iter().enumerate() {
        if q == 0 || q > n {
            return Err(LinalgError::QubitOutOfRange { qubit: q, n });
        }
        if sites[..k].contains(&q) {
            return Err(LinalgError::DuplicateQubit(q));
        }
    }
    Ok(())
}

#[inline]
fn bit(index: usize, qubit: usize, n: usize) -> usize {
    (index >> (n - qubit)) & 1
}

/// Places `op` on the listed qubits of an `n`-qubit register, identity elsewhere.
/// The tensor order of `op` follows the order of `sites`.
pub fn embed_in<T: Real>(
    op: &ComplexMatrix<T>,
    sites: &[usize],
    n: usize,
) -> Result<ComplexMatrix<T>, LinalgError> {
    check_sites(sites, n)?;
    let sub = 1 << sites.len();
    if op.rows != sub || op.cols != sub {
        return Err(LinalgError::DimensionMismatch { expected: sub, got: op.rows });
    }
    let dim = 1 << n;
    let sub_index = |idx: usize| sites.iter().fold(0, |acc, &q| (acc << 1) | bit(idx, q, n));
    let mut mask = 0usize;
    for &q in sites {
        mask |= 1 << (n - q);
    }
    Ok(ComplexMatrix::from_fn(dim, dim, |r, c| {
        if (r & !mask) != (c & !mask) {
            C::zero()
        } else {
            op[(sub_index(r), sub_index(c))]
        }
    }))
}

/// [`embed_in`] on the three-qubit register.
pub fn embed<T: Real>(op: &ComplexMatrix<T>, sites: &[usize]) -> Result<ComplexMatrix<T>, LinalgError> {
    embed_in(op, sites, N_QUBITS)
}

/// Reduced operator on the qubits in `keep` (any order; output ordered ascending).
pub fn partial_trace<T: Real>(
    m: &ComplexMatrix<T>,
    keep: &[usize],
) -> Result<ComplexMatrix<T>, LinalgError> {
    let dim = m.rows;
    if !m.is_square() || !dim.is_power_of_two() {
        return Err(LinalgError::DimensionMismatch { expected: DIM, got: dim });
    }
    let n = dim.trailing_zeros() as usize;
    check_sites(keep, n)?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    let traced: Vec<usize> = (1..=n).filter(|q| !kept.contains(q)).collect();
    let place = |sub: usize, sites: &[usize]| -> usize {
        let k = sites.len();
        sites.iter().enumerate().fold(0, |acc, (pos, &q)| acc | (((sub >> (k - 1 - pos)) & 1) << (n - q)))
    };
    let out_dim = 1 << kept.len();
    let n_traced = 1 << traced.len();
    Ok(ComplexMatrix::from_fn(out_dim, out_dim, |i, j| {
        let (bi, bj) = (place(i, &kept), place(j, &kept));
        (0..n_traced).fold(C::zero(), |acc, t| {
            let bt = place(t, &traced);
            acc + m[(bi | bt, bj | bt)]
        })
    }))
}

// Superoperators under column stacking: vec(A X B) = (B^T (x) A) vec(X).

/// Matrix of `X -> A X B`.
pub fn superop_sandwich<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    kron(&b.transpose(), a)
}

/// Matrix of `X -> -i [H, X]`.
pub fn hamiltonian_superop<T: Real>(h: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let id = ComplexMatrix::identity(h.rows);
    let comm = &kron(&id, h) - &kron(&h.transpose(), &id);
    comm.scale(C::new(T::zero(), -T::one()))
}

/// Euclidean norm of `L vec(rho)`.
pub fn generator_residual<T: Real>(l: &ComplexMatrix<T>, rho: &ComplexMatrix<T>) -> T {
    l.mul_vec(&rho.vec()).iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Singular values and right singular vectors (columns of `v`) of a matrix.
#[derive(Clone, Debug)]
pub struct RightSvd<T> {
    pub singular_values: Vec<T>,
    pub v: ComplexMatrix<T>,
}

/// One-sided (Hestenes) Jacobi SVD. Orthogonalizes the columns of `a` by
/// complex plane rotations accumulated into `v`, so that `a v = u diag(s)`.
pub fn jacobi_svd<T: Real>(a: &ComplexMatrix<T>) -> RightSvd<T> {
    let (m, n) = (a.rows, a.cols);
    // Column-major working copies for contiguous column access.
    let mut cols: Vec<Vec<C<T>>> = (0..n).map(|j| a.column(j)).collect();
    let mut vcols: Vec<Vec<C<T>>> =
        (0..n).map(|j| (0..n).map(|i| if i == j { C::one() } else { C::zero() }).collect()).collect();
    let eps = T::epsilon();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols[p], &cols[q]);
                    let mut alpha = T::zero();
                    let mut beta = T::zero();
                    let mut gamma = C::zero();
                    for k in 0..m {
                        alpha = alpha + cp[k].norm_sqr();
                        beta = beta + cq[k].norm_sqr();
                        gamma = gamma + cp[k].conj() * cq[k];
                    }
                    (alpha, beta, gamma)
                };
                let g = gamma.norm();
                if g == T::zero() || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / re(g);
                let zeta = (beta - alpha) / (T::two() * g);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                // q column is re-phased by conj(phase) so the Gram entry becomes real.
                let ph = phase.conj();
                rotate_pair(&mut cols, p, q, c, s, ph);
                rotate_pair(&mut vcols, p, q, c, s, ph);
            }
        }
        if !rotated {
            break;
        }
    }
    let singular_values =
        cols.iter().map(|col| col.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()).collect();
    let v = ComplexMatrix::from_fn(n, n, |i, j| vcols[j][i]);
    RightSvd { singular_values, v }
}

fn rotate_pair<T: Real>(cols: &mut [Vec<C<T>>], p: usize, q: usize, c: T, s: T, ph: C<T>) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xo = *x;
        let yt = *y * ph;
        *x = xo * re(c) - yt * re(s);
        *y = xo * re(s) + yt * re(c);
    }
}

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// Works on the real symmetric embedding `[[Re, -Im], [Im, Re]]`, whose spectrum is
/// that of the input with every eigenvalue doubled.
pub fn eigvalsh<T: Real>(h: &ComplexMatrix<T>) -> Vec<T> {
    let n = h.rows;
    let m = 2 * n;
    let mut a = vec![T::zero(); m * m];
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            a[i * m + j] = z.re;
            a[(i + n) * m + (j + n)] = z.re;
            a[i * m + (j + n)] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    let mut evals = symmetric_jacobi_eigenvalues(&mut a, m);
    evals.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    evals.into_iter().step_by(2).collect()
}

fn symmetric_jacobi_eigenvalues<T: Real>(a: &mut [T], n: usize) -> Vec<T> {
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        let diag: T = (0..n).map(|i| a[i * n + i] * a[i * n + i]).sum();
        if off <= T::epsilon() * T::epsilon() * (diag + off) || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (T::two() * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T>(ComplexMatrix<T>);

impl<T: Real> DensityMatrix<T> {
    pub fn try_new(m: ComplexMatrix<T>) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::NotDensityMatrix("not square".into()));
        }
        if !m.is_hermitian(T::tol(1e-12)) {
            return Err(LinalgError::NotDensityMatrix("not Hermitian".into()));
        }
        let tr = m.trace();
        if (tr - C::one()).norm() > T::tol(1e-12) {
            return Err(LinalgError::NotDensityMatrix(format!("trace {tr}")));
        }
        let rho = Self(m);
        let min = rho.min_eigenvalue();
        if min < -T::tol(1e-10) {
            return Err(LinalgError::NotDensityMatrix(format!("negative eigenvalue {min}")));
        }
        Ok(rho)
    }

    pub(crate) fn new_unchecked(m: ComplexMatrix<T>) -> Self {
        Self(m)
    }

    /// Product state of single-qubit (or larger) factors.
    pub fn product(factors: &[&ComplexMatrix<T>]) -> Result<Self, LinalgError> {
        let m = factors
            .iter()
            .fold(ComplexMatrix::identity(1), |acc, f| kron(&acc, f));
        Self::try_new(m)
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.0
    }

    pub fn min_eigenvalue(&self) -> T {
        eigvalsh(&self.0)[0]
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<ComplexMatrix<T>, LinalgError> {
        partial_trace(&self.0, keep)
    }

    /// `tr(A rho)`.
    pub fn expectation(&self, a: &ComplexMatrix<T>) -> C<T> {
        (a * &self.0).trace()
    }
}

/// Unique stationary state of a trace-preserving generator `l` (column-stacking
/// convention), taken as the right singular vector of the smallest singular value.
pub fn steady_null_space<T: Real>(l: &ComplexMatrix<T>) -> Result<DensityMatrix<T>, LinalgError> {
    let dim2 = l.rows;
    let n = (dim2 as f64).sqrt().round() as usize;
    if !l.is_square() || n * n != dim2 {
        return Err(LinalgError::DimensionMismatch { expected: DIM * DIM, got: dim2 });
    }
    let svd = jacobi_svd(l);
    let sigma_max = svd.singular_values.iter().copied().fold(T::zero(), T::max);
    let threshold = T::tol(1e-9) * sigma_max;
    let kernel_dim = svd.singular_values.iter().filter(|&&s| s < threshold).count();
    let (imin, smin) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite singular values"))
        .expect("nonempty generator");
    match kernel_dim {
        0 => {
            let ratio = if sigma_max > T::zero() { smin / sigma_max } else { T::zero() };
            return Err(LinalgError::NoSteadyState { ratio: ratio.to_f64().unwrap_or(f64::NAN) });
        }
        1 => {}
        k => return Err(LinalgError::DegenerateSteadyState { kernel_dim: k }),
    }
    let m = ComplexMatrix::unvec(&svd.v.column(imin), n)?;
    let tr = m.trace();
    if tr.norm() <= T::epsilon() {
        return Err(LinalgError::TracelessKernel);
    }
    let rho = m.scale(C::<T>::new(T::one(), T::zero()) / tr).hermitian_part();
    Ok(DensityMatrix::new_unchecked(rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissipation::reset_channel;

    fn diag(v: &[f64]) -> ComplexMatrix<f64> {
        ComplexMatrix::from_real_diag(v)
    }

    #[test]
    fn kron_examples() {
        let i2 = identity2::<f64>();
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        assert_eq!(kron(&sigma_z::<f64>(), &sigma_z()), diag(&[1.0, -1.0, -1.0, 1.0]));
        let pm = kron(&sigma_plus::<f64>(), &sigma_minus());
        let mut expected = ComplexMatrix::zeros(4, 4);
        expected[(1, 2)] = C::new(1.0, 0.0);
        assert_eq!(pm, expected);
    }

    #[test]
    fn embed_examples() {
        assert_eq!(embed(&identity2::<f64>(), &[2]).unwrap(), ComplexMatrix::identity(8));
        assert_eq!(embed(&sigma_z::<f64>(), &[1]).unwrap(), diag(&[1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0]));
        let op = kron(&sigma_plus::<f64>(), &sigma_minus());
        let m = embed(&op, &[2, 3]).unwrap();
        let nonzero: Vec<(usize, usize)> =
            (0..8).flat_map(|r| (0..8).map(move |c| (r, c))).filter(|&(r, c)| m[(r, c)].norm() > 0.0).collect();
        assert_eq!(nonzero, [(1, 2), (5, 6)]);
        assert!(m.data().iter().all(|z| z.norm() == 0.0 || *z == C::new(1.0, 0.0)));
        // Reversed site order swaps the tensor factors.
        assert_eq!(embed(&op, &[3, 2]).unwrap(), embed(&kron(&sigma_minus(), &sigma_plus()), &[2, 3]).unwrap());
    }

    #[test]
    fn embed_errors() {
        let z = sigma_z::<f64>();
        assert_eq!(embed(&z, &[4]), Err(LinalgError::QubitOutOfRange { qubit: 4, n: 3 }));
        assert_eq!(embed(&z, &[0]), Err(LinalgError::QubitOutOfRange { qubit: 0, n: 3 }));
        assert_eq!(embed(&kron(&z, &z), &[2, 2]), Err(LinalgError::DuplicateQubit(2)));
        assert_eq!(embed(&z, &[]), Err(LinalgError::EmptySubset));
        assert!(matches!(embed(&z, &[1, 2]), Err(LinalgError::DimensionMismatch { .. })));
    }

    #[test]
    fn partial_trace_examples() {
        let t1 = diag(&[0.2, 0.8]);
        let t2 = diag(&[0.1, 0.9]);
        let t3 = diag(&[0.3, 0.7]);
        let rho = DensityMatrix::product(&[&t1, &t2, &t3]).unwrap();
        assert!(rho.partial_trace(&[1]).unwrap().max_abs_diff(&t1) < 1e-15);
        assert!(rho.partial_trace(&[3, 1]).unwrap().max_abs_diff(&kron(&t1, &t3)) < 1e-15);
        let mixed = ComplexMatrix::<f64>::identity(8).scale_real(0.125);
        let reduced = partial_trace(&mixed, &[2, 3]).unwrap();
        assert!(reduced.max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-16);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::try_new(diag(&[0.5, 0.5])).is_ok());
        assert!(DensityMatrix::try_new(diag(&[1.2, -0.2])).is_err());
        assert!(DensityMatrix::try_new(diag(&[0.5, 0.4])).is_err());
        let mut m = diag(&[0.5, 0.5]);
        m[(0, 1)] = C::new(0.1, 0.0);
        assert!(DensityMatrix::try_new(m).is_err());
    }

    #[test]
    fn svd_and_eigenvalues() {
        let h = ComplexMatrix::from_fn(3, 3, |r, c| match (r, c) {
            (0, 0) => C::new(2.0, 0.0),
            (1, 1) => C::new(-1.0, 0.0),
            (0, 1) => C::new(0.0, 1.0),
            (1, 0) => C::new(0.0, -1.0),
            _ => C::new(0.0, 0.0),
        });
        let ev = eigvalsh(&h);
        let disc = (9.0f64 / 4.0 + 1.0).sqrt();
        let expected = [0.5 - disc, 0.0, 0.5 + disc];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-13, "{ev:?}");
        }
        let mut sv = jacobi_svd(&h).singular_values;
        sv.sort_by(f64::total_cmp);
        for (a, b) in sv.iter().zip([0.0, disc - 0.5, disc + 0.5]) {
            assert!((a - b).abs() < 1e-13, "{sv:?}");
        }
    }

    fn uncoupled_generator(rs: [f64; 3]) -> ComplexMatrix<f64> {
        let mut l = ComplexMatrix::zeros(64, 64);
        for (q, r) in rs.into_iter().enumerate() {
            l = &l + &reset_channel(q + 1, 0.3 + 0.1 * q as f64, r).unwrap().superoperator(8);
        }
        l
    }

    #[test]
    fn null_space_of_uncoupled_resets() {
        let rs = [0.2, 0.1, 0.35];
        let rho = steady_null_space(&uncoupled_generator(rs)).unwrap();
        let tau = |r: f64| diag(&[r, 1.0 - r]);
        let expected = kron(&kron(&tau(rs[0]), &tau(rs[1])), &tau(rs[2]));
        assert!(rho.matrix().max_abs_diff(&expected) < 1e-12);
        assert!(generator_residual(&uncoupled_generator(rs), rho.matrix()) < 1e-12);
    }

    #[test]
    fn null_space_errors() {
        let zero = ComplexMatrix::<f64>::zeros(64, 64);
        assert!(matches!(steady_null_space(&zero), Err(LinalgError::NoSteadyState { .. })));
        // Only qubit 1 relaxes: qubits 2 and 3 keep their populations.
        let l = reset_channel(1, 0.5, 0.2).unwrap().superoperator(8);
        assert!(matches!(steady_null_space(&l), Err(LinalgError::DegenerateSteadyState { kernel_dim: k }) if k > 1));
        let full_rank = ComplexMatrix::<f64>::identity(64);
        assert!(matches!(steady_null_space(&full_rank), Err(LinalgError::NoSteadyState { .. })));
        let small = ComplexMatrix::<f64>::identity(10);
        assert!(matches!(steady_null_space(&small), Err(LinalgError::DimensionMismatch { .. })));
    }

    #[test]
    fn single_precision_null_space() {
        let l = uncoupled_generator([0.2, 0.1, 0.35]);
        let l32 = ComplexMatrix::<f32>::from_fn(64, 64, |r, c| C::new(l[(r, c)].re as f32, l[(r, c)].im as f32));
        let rho = steady_null_space(&l32).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 0.2 * 0.1 * 0.35).abs() < 1e-5);
    }
}
