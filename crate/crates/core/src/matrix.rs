//! Dense square complex matrices.
//!
//! Storage is row-major `Complex64`. The two cubic kernels (general product
//! and the Gram matrix `M†M` behind [`ComplexMatrix::unitary_defect`]) copy
//! their operands into split real/imaginary planes so the inner loops are
//! plain `f64` dot products; everything else works on the interleaved data.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

const LANES: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64 + Sync) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        if dim > 0 {
            data.par_chunks_mut(dim).enumerate().for_each(|(i, row)| {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = f(i, j);
                }
            });
        }
        Self { dim, data }
    }

    /// Builds a matrix from row-major entries; `entries.len()` must be a square.
    pub fn from_row_major(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self { dim, data: entries })
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Block-diagonal matrix `[[a, 0], [0, b]]`.
    pub fn block_diag(a: &ComplexMatrix, b: &ComplexMatrix) -> Self {
        let (p, q) = (a.dim, b.dim);
        let mut m = Self::zeros(p + q);
        for i in 0..p {
            m.row_mut(i)[..p].copy_from_slice(a.row(i));
        }
        for i in 0..q {
            m.row_mut(p + i)[p..].copy_from_slice(b.row(i));
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        let d = self.dim;
        &mut self.data[i * d..(i + 1) * d]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    /// Copies out the `size × size` block whose top-left corner is `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, size: usize) -> ComplexMatrix {
        assert!(r0 + size <= self.dim && c0 + size <= self.dim);
        let mut out = Self::zeros(size);
        for i in 0..size {
            out.row_mut(i)
                .copy_from_slice(&self.row(r0 + i)[c0..c0 + size]);
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// Entry-wise (Hadamard) product.
    pub fn hadamard(&self, other: &ComplexMatrix) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Position and values of the entry with the largest `|self - other|`.
    pub fn worst_entry(&self, other: &ComplexMatrix) -> Result<(usize, usize, f64)> {
        self.check_dim(other)?;
        let mut best = (0, 0, 0.0);
        for (k, (a, b)) in self.data.iter().zip(&other.data).enumerate() {
            let d = (a - b).norm();
            if d > best.2 {
                best = (k / self.dim, k % self.dim, d);
            }
        }
        Ok(best)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok((0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Matrix product. Sparse left operands (permutations, diagonals, masks)
    /// go through a row-scatter loop that skips zero entries.
    pub fn matmul(&self, other: &ComplexMatrix) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.dim;
        if self.nonzeros() * 4 <= n * n {
            return Ok(self.matmul_sparse_left(other));
        }
        if other.nonzeros() * 4 <= n * n {
            return Ok(self.matmul_sparse_right(other));
        }
        let a = SplitRows::from_rows(self);
        let bt = SplitRows::from_rows(&other.transpose());
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        data.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
            for (j, out) in row.iter_mut().enumerate() {
                *out = dot(a.re(i), a.im(i), bt.re(j), bt.im(j), false);
            }
        });
        Ok(Self { dim: n, data })
    }

    fn nonzeros(&self) -> usize {
        self.data.iter().filter(|z| z.re != 0.0 || z.im != 0.0).count()
    }

    fn matmul_sparse_right(&self, other: &ComplexMatrix) -> Self {
        let n = self.dim;
        let rows: Vec<Vec<(usize, Complex64)>> = (0..n)
            .map(|k| {
                other
                    .row(k)
                    .iter()
                    .enumerate()
                    .filter(|(_, z)| z.re != 0.0 || z.im != 0.0)
                    .map(|(j, &z)| (j, z))
                    .collect()
            })
            .collect();
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        data.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
            for (k, &aik) in self.row(i).iter().enumerate() {
                for &(j, b) in &rows[k] {
                    row[j] += aik * b;
                }
            }
        });
        Self { dim: n, data }
    }

    fn matmul_sparse_left(&self, other: &ComplexMatrix) -> Self {
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        data.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
            for (k, &aik) in self.row(i).iter().enumerate() {
                if aik.re == 0.0 && aik.im == 0.0 {
                    continue;
                }
                for (o, &b) in row.iter_mut().zip(other.row(k)) {
                    *o += aik * b;
                }
            }
        });
        Self { dim: n, data }
    }

    /// `self · blockdiag(block, …, block)` with as many copies of `block` as
    /// fit along the diagonal. Only the nonzero blocks are visited.
    pub fn mul_block_diag(&self, block: &ComplexMatrix) -> Result<Self> {
        let (n, b) = (self.dim, block.dim);
        if b == 0 || n % b != 0 {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b,
            });
        }
        let a = SplitRows::from_rows(self);
        let bt = SplitRows::from_rows(&block.transpose());
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let (ar, ai) = (a.re(i), a.im(i));
            for (j, out) in row.iter_mut().enumerate() {
                let (blk, jj) = (j / b, j % b);
                let span = blk * b..(blk + 1) * b;
                *out = dot(&ar[span.clone()], &ai[span], bt.re(jj), bt.im(jj), false);
            }
        });
        Ok(Self { dim: n, data })
    }

    /// `max |(M†M - I)_ij|`.
    pub fn unitary_defect(&self) -> f64 {
        let n = self.dim;
        // Columns of M as contiguous rows of M^T.
        let cols = SplitRows::from_rows(&self.transpose());
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut worst: f64 = 0.0;
                for j in i..n {
                    let mut g = dot(cols.re(i), cols.im(i), cols.re(j), cols.im(j), true);
                    if i == j {
                        g -= 1.0;
                    }
                    worst = worst.max(g.norm());
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }

    fn check_dim(&self, other: &ComplexMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

/// `max |(AB - BA)_ij|`.
pub fn commutator_defect(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let ab = a.matmul(b)?;
    let ba = b.matmul(a)?;
    ab.max_abs_diff(&ba)
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix sum");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix difference");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("dimension mismatch in matrix product")
    }
}

/// Rows stored as separate real and imaginary planes.
struct SplitRows {
    width: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl SplitRows {
    fn from_rows(m: &ComplexMatrix) -> Self {
        Self {
            width: m.dim,
            re: m.data.iter().map(|z| z.re).collect(),
            im: m.data.iter().map(|z| z.im).collect(),
        }
    }

    fn re(&self, i: usize) -> &[f64] {
        &self.re[i * self.width..(i + 1) * self.width]
    }

    fn im(&self, i: usize) -> &[f64] {
        &self.im[i * self.width..(i + 1) * self.width]
    }
}

/// `Σ a_k b_k`, or `Σ conj(a_k) b_k` when `conj_a` is set.
#[inline]
fn dot(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64], conj_a: bool) -> Complex64 {
    let s = if conj_a { -1.0 } else { 1.0 };
    let mut rr = [0.0f64; LANES];
    let mut ri = [0.0f64; LANES];
    let mut ir = [0.0f64; LANES];
    let mut ii = [0.0f64; LANES];
    let n = ar.len();
    let body = n - n % LANES;
    for (((a_r, a_i), b_r), b_i) in ar[..body]
        .chunks_exact(LANES)
        .zip(ai[..body].chunks_exact(LANES))
        .zip(br[..body].chunks_exact(LANES))
        .zip(bi[..body].chunks_exact(LANES))
    {
        for l in 0..LANES {
            rr[l] += a_r[l] * b_r[l];
            ri[l] += a_r[l] * b_i[l];
            ir[l] += a_i[l] * b_r[l];
            ii[l] += a_i[l] * b_i[l];
        }
    }
    let (mut srr, mut sri, mut sir, mut sii) = (
        rr.iter().sum::<f64>(),
        ri.iter().sum::<f64>(),
        ir.iter().sum::<f64>(),
        ii.iter().sum::<f64>(),
    );
    for k in body..n {
        srr += ar[k] * br[k];
        sri += ar[k] * bi[k];
        sir += ai[k] * br[k];
        sii += ai[k] * bi[k];
    }
    // (ar + i s ai)(br + i bi)
    Complex64::new(srr - s * sii, sri + s * sir)
}
