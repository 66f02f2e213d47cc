//! Dense complex linear algebra with real-flop instrumentation.
//!
//! Every arithmetic routine takes a [`FlopCounter`] and charges it using the
//! usual real-flop conventions: a complex addition costs 2 flops and a complex
//! multiplication costs 6 (4 real multiplications and 2 real additions).
//! Transposition, conjugation and real-part extraction are data movement and
//! cost nothing. Matrix inversion is charged the Gauss elimination model cost
//! `ceil(2n^3 / 3)` as a lump, whatever the elimination actually performs.

use std::fmt;
use std::ops::{Deref, DerefMut, Index, IndexMut};

use num_complex::Complex64;
use thiserror::Error;

/// Smallest pivot magnitude accepted by [`ComplexMatrix::gauss_invert`].
pub const PIVOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("{op}: dimension mismatch, left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimensionMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is numerically singular: pivot in column {column} has magnitude {magnitude:e}")]
    Singular { column: usize, magnitude: f64 },
    #[error("invalid shape {rows}x{cols} for {len} entries")]
    InvalidShape { rows: usize, cols: usize, len: usize },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Tally of real floating-point additions and multiplications.
///
/// Counters only grow inside a scope; [`FlopCounter::take`] closes the scope
/// and hands back what was accumulated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct FlopCounter {
    real_additions: u64,
    real_multiplications: u64,
}

impl FlopCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn real_additions(&self) -> u64 {
        self.real_additions
    }

    pub fn real_multiplications(&self) -> u64 {
        self.real_multiplications
    }

    pub fn total(&self) -> u64 {
        self.real_additions + self.real_multiplications
    }

    pub fn real_adds(&mut self, n: u64) {
        self.real_additions += n;
    }

    pub fn real_mults(&mut self, n: u64) {
        self.real_multiplications += n;
    }

    pub fn complex_adds(&mut self, n: u64) {
        self.real_additions += 2 * n;
    }

    pub fn complex_mults(&mut self, n: u64) {
        self.real_multiplications += 4 * n;
        self.real_additions += 2 * n;
    }

    /// Charges a model cost that has no add/multiply breakdown. Half goes to
    /// multiplications (rounded down), the rest to additions.
    pub fn lump(&mut self, flops: u64) {
        let mults = flops / 2;
        self.real_multiplications += mults;
        self.real_additions += flops - mults;
    }

    pub fn absorb(&mut self, other: &FlopCounter) {
        self.real_additions += other.real_additions;
        self.real_multiplications += other.real_multiplications;
    }

    /// Flops accumulated since `earlier`, a snapshot of this same counter.
    pub fn since(&self, earlier: &FlopCounter) -> u64 {
        self.total() - earlier.total()
    }

    /// Ends the current scope: returns the tally and resets to zero.
    pub fn take(&mut self) -> FlopCounter {
        std::mem::take(self)
    }
}

/// `ceil(2n^3 / 3)`, the Gauss elimination inversion cost model.
pub fn gauss_inversion_flops(n: usize) -> u64 {
    let n = n as u64;
    (2 * n * n * n).div_ceil(3)
}

/// Cost of an `m x p` by `p x n` complex product.
pub fn complex_mat_mul_flops(m: usize, p: usize, n: usize) -> u64 {
    let (m, p, n) = (m as u64, p as u64, n as u64);
    6 * m * n * p + 2 * m * n * (p - 1)
}

/// Cost of an `m x p` complex matrix times a length-`p` vector.
pub fn complex_mat_vec_flops(m: usize, p: usize) -> u64 {
    complex_mat_mul_flops(m, p, 1)
}

/// Dense complex vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn max_abs_diff(&self, other: &ComplexVector) -> f64 {
        assert_eq!(self.len(), other.len());
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl From<Vec<Complex64>> for ComplexVector {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

impl FromIterator<Complex64> for ComplexVector {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl Deref for ComplexVector {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl DerefMut for ComplexVector {
    fn deref_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }
}

/// Dense row-major complex matrix, at least 1x1.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(LinalgError::InvalidShape {
                rows,
                cols,
                len: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Panics if either dimension is zero.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| Complex64::new(0.0, 0.0))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { Complex64::new(0.0, 0.0) })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Conjugate transpose. Data movement only, no flops.
    pub fn hermitian_transpose(&self) -> ComplexMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mat_mul(&self, rhs: &ComplexMatrix, counter: &mut FlopCounter) -> Result<ComplexMatrix> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "mat_mul",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: rhs.rows,
                right_cols: rhs.cols,
            });
        }
        let (m, p, n) = (self.rows, self.cols, rhs.cols);
        let mut out = vec![Complex64::new(0.0, 0.0); m * n];
        for i in 0..m {
            let out_row = &mut out[i * n..(i + 1) * n];
            for (k, &a) in self.row(i).iter().enumerate() {
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        let (m64, p64, n64) = (m as u64, p as u64, n as u64);
        counter.complex_mults(m64 * n64 * p64);
        counter.complex_adds(m64 * n64 * (p64 - 1));
        Ok(ComplexMatrix {
            rows: m,
            cols: n,
            data: out,
        })
    }

    pub fn mat_vec(&self, x: &[Complex64], counter: &mut FlopCounter) -> Result<ComplexVector> {
        if self.cols != x.len() {
            return Err(LinalgError::DimensionMismatch {
                op: "mat_vec",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: x.len(),
                right_cols: 1,
            });
        }
        let out: ComplexVector = (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect();
        let (m, p) = (self.rows as u64, self.cols as u64);
        counter.complex_mults(m * p);
        counter.complex_adds(m * (p - 1));
        Ok(out)
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    ///
    /// The counter is charged `ceil(2n^3/3)` regardless of the arithmetic the
    /// elimination performs.
    pub fn gauss_invert(&self, counter: &mut FlopCounter) -> Result<ComplexMatrix> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut inv = ComplexMatrix::identity(n).data;

        for k in 0..n {
            let (pivot_row, magnitude) = (k..n)
                .map(|i| (i, a[i * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if magnitude < PIVOT_TOLERANCE {
                return Err(LinalgError::Singular {
                    column: k,
                    magnitude,
                });
            }
            if pivot_row != k {
                for j in 0..n {
                    a.swap(k * n + j, pivot_row * n + j);
                    inv.swap(k * n + j, pivot_row * n + j);
                }
            }
            let scale = a[k * n + k].inv();
            for j in 0..n {
                a[k * n + j] *= scale;
                inv[k * n + j] *= scale;
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let factor = a[i * n + k];
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    let (pa, pi) = (a[k * n + j], inv[k * n + j]);
                    a[i * n + j] -= factor * pa;
                    inv[i * n + j] -= factor * pi;
                }
            }
        }

        counter.lump(gauss_inversion_flops(n));
        Ok(ComplexMatrix {
            rows: n,
            cols: n,
            data: inv,
        })
    }

    /// `factor * Re(A)`; the scaling costs one real multiplication per entry.
    pub fn real_part_scaled(&self, factor: f64, counter: &mut FlopCounter) -> RealMatrix {
        counter.real_mults((self.rows * self.cols) as u64);
        RealMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| factor * z.re).collect(),
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|z| format!("{z:.4}")).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Dense row-major real matrix. Arithmetic on it charges 1 flop per real op.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// Embeds the matrix as a complex one with zero imaginary parts.
    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn mat_vec(&self, x: &[f64], counter: &mut FlopCounter) -> Result<Vec<f64>> {
        if self.cols != x.len() {
            return Err(LinalgError::DimensionMismatch {
                op: "real mat_vec",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: x.len(),
                right_cols: 1,
            });
        }
        let out = (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect();
        let (m, p) = (self.rows as u64, self.cols as u64);
        counter.real_mults(m * p);
        counter.real_adds(m * (p - 1));
        Ok(out)
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}
