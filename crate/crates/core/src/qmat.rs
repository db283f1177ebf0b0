//! Dense complex linear algebra for the small operators that appear in
//! bipartite problems (total dimension up to a few dozen).
//!
//! Product spaces use the computational basis ordered Alice-major: the
//! basis state `|a b⟩` of `C^dA ⊗ C^dB` has index `a * dB + b`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance for Hermiticity and unit trace.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Most negative eigenvalue still accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-9;

/// Which tensor factor an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries; fails unless the count is a
    /// positive perfect square.
    pub fn from_entries(entries: Vec<C64>) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != entries.len() {
            return Err(Error::Parse(format!(
                "{} entries do not form a square matrix",
                entries.len()
            )));
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "rows must form a square matrix");
            entries.extend_from_slice(row);
        }
        Self { dim, entries }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "rows must form a square matrix");
            entries.extend(row.iter().map(|&x| C64::new(x, 0.0)));
        }
        Self { dim, entries }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|z| z * factor)
    }

    pub fn scale_complex(&self, factor: C64) -> Self {
        self.map(|z| z * factor)
    }

    fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn dagger(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &CMatrix) -> C64 {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |M − M†|` over all entries.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= HERMITIAN_TOL
    }

    pub fn mul_ket(&self, v: &Ket) -> Ket {
        assert_eq!(self.dim, v.dim());
        let n = self.dim;
        let amps = (0..n)
            .map(|i| (0..n).map(|k| self[(i, k)] * v.amplitudes[k]).sum())
            .collect();
        Ket { amplitudes: amps }
    }

    /// Real part of `⟨v|M|v⟩`.
    pub fn expectation(&self, v: &Ket) -> f64 {
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            let mut row = ZERO;
            for k in 0..n {
                row += self[(i, k)] * v.amplitudes[k];
            }
            acc += v.amplitudes[i].conj() * row;
        }
        acc.re
    }

    /// Copies the principal submatrix on the given basis indices.
    pub fn submatrix(&self, indices: &[usize]) -> CMatrix {
        let k = indices.len();
        let mut out = CMatrix::zeros(k);
        for (r, &i) in indices.iter().enumerate() {
            for (c, &j) in indices.iter().enumerate() {
                out[(r, c)] = self[(i, j)];
            }
        }
        out
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.dim + j]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Add<&CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in add");
        CMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub<&CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in sub");
        CMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.map(|z| -z)
    }
}

impl Mul<&CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in mul");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// Column vector in `C^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ket {
    amplitudes: Vec<C64>,
}

impl Ket {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        assert!(!amplitudes.is_empty(), "a ket needs at least one amplitude");
        Self { amplitudes }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|index⟩` in `C^dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize the zero vector");
        Self {
            amplitudes: self.amplitudes.iter().map(|z| z / n).collect(),
        }
    }

    /// True when the Euclidean norm is 1 within 1e-12.
    pub fn is_unit(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-12
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> C64 {
        assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|self⟩ ⊗ |other⟩`.
    pub fn tensor(&self, other: &Ket) -> Ket {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        Ket { amplitudes: amps }
    }

    pub fn scale(&self, factor: C64) -> Ket {
        Ket {
            amplitudes: self.amplitudes.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn sub(&self, other: &Ket) -> Ket {
        Ket {
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// `|self⟩⟨other|`.
    pub fn outer(&self, other: &Ket) -> CMatrix {
        let (r, c) = (self.dim(), other.dim());
        assert_eq!(r, c, "outer products here are square");
        let mut m = CMatrix::zeros(r);
        for i in 0..r {
            for j in 0..c {
                m[(i, j)] = self.amplitudes[i] * other.amplitudes[j].conj();
            }
        }
        m
    }

    /// `|self⟩⟨self|`.
    pub fn projector(&self) -> CMatrix {
        self.outer(self)
    }
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Sorted in descending order.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[i]` belongs to `eigenvalues[i]`.
    pub eigenvectors: Vec<Ket>,
}

impl EigenDecomposition {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.eigenvectors[0].dim();
        let mut m = CMatrix::zeros(n);
        for (&e, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            m = &m + &v.projector().scale(e);
        }
        m
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// Kronecker product with the left factor as the slow index.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (da, db) = (a.dim(), b.dim());
    let n = da * db;
    let mut out = CMatrix::zeros(n);
    for i in 0..da {
        for j in 0..da {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out[(i * db + k, j * db + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// The swap operator `V|ij⟩ = |ji⟩` on `C^d ⊗ C^d`.
pub fn flip(d: usize) -> Result<CMatrix> {
    if d < 2 {
        return Err(Error::param("d", format!("flip needs d >= 2, got {d}")));
    }
    let mut v = CMatrix::zeros(d * d);
    for i in 0..d {
        for j in 0..d {
            v[(j * d + i, i * d + j)] = ONE;
        }
    }
    Ok(v)
}

fn check_bipartite(m: &CMatrix, da: usize, db: usize) -> Result<()> {
    if da == 0 || db == 0 || m.dim() != da * db {
        return Err(Error::DimensionMismatch {
            expected: da * db,
            found: m.dim(),
        });
    }
    Ok(())
}

/// Traces out subsystem `side`, returning the operator on the other factor.
pub fn partial_trace(m: &CMatrix, da: usize, db: usize, side: Side) -> Result<CMatrix> {
    check_bipartite(m, da, db)?;
    let out = match side {
        Side::B => {
            let mut r = CMatrix::zeros(da);
            for i in 0..da {
                for j in 0..da {
                    r[(i, j)] = (0..db).map(|k| m[(i * db + k, j * db + k)]).sum();
                }
            }
            r
        }
        Side::A => {
            let mut r = CMatrix::zeros(db);
            for k in 0..db {
                for l in 0..db {
                    r[(k, l)] = (0..da).map(|i| m[(i * db + k, i * db + l)]).sum();
                }
            }
            r
        }
    };
    Ok(out)
}

/// Transposes the `side` factor block-wise.
pub fn partial_transpose(m: &CMatrix, da: usize, db: usize, side: Side) -> Result<CMatrix> {
    check_bipartite(m, da, db)?;
    let mut out = CMatrix::zeros(m.dim());
    for i in 0..da {
        for j in 0..da {
            for k in 0..db {
                for l in 0..db {
                    let (row, col) = match side {
                        Side::A => (j * db + k, i * db + l),
                        Side::B => (i * db + l, j * db + k),
                    };
                    out[(row, col)] = m[(i * db + k, j * db + l)];
                }
            }
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
pub fn hermitian_eig(m: &CMatrix) -> Result<EigenDecomposition> {
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    // Symmetrize so the solver sees an exactly Hermitian input.
    let h = (&m.to_nalgebra() + m.to_nalgebra().adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = order
        .iter()
        .map(|&i| Ket::new(eig.eigenvectors.column(i).iter().copied().collect()))
        .collect();
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Outcome of [`is_density`]: the verdict plus the quantities behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityCheck {
    pub is_density: bool,
    pub hermitian_deviation: f64,
    /// `NaN` when the input was not Hermitian enough to diagonalize.
    pub min_eigenvalue: f64,
    pub trace: f64,
}

/// Hermitian within 1e-10, eigenvalues ≥ −1e-9, `|tr − 1| ≤ 1e-10`.
pub fn is_density(m: &CMatrix) -> DensityCheck {
    let hermitian_deviation = m.hermitian_deviation();
    let trace = m.trace().re;
    let min_eigenvalue = match hermitian_eig(m) {
        Ok(e) => e.min_eigenvalue(),
        Err(_) => f64::NAN,
    };
    let is_density = hermitian_deviation <= HERMITIAN_TOL
        && min_eigenvalue >= -PSD_TOL
        && (trace - 1.0).abs() <= HERMITIAN_TOL
        && m.trace().im.abs() <= HERMITIAN_TOL;
    DensityCheck {
        is_density,
        hermitian_deviation,
        min_eigenvalue,
        trace,
    }
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    let mut out = CMatrix::zeros(m.dim());
    for (&e, v) in eig.eigenvalues.iter().zip(&eig.eigenvectors) {
        out = &out + &v.projector().scale(f(e));
    }
    Ok(out)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_rows(&[&[ZERO, -I], &[I, ZERO]])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
}

/// `[σ_x, σ_y, σ_z]`.
pub fn paulis() -> [CMatrix; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}
