//! The finite subdiagonal context: `M_n` with normalized trace, a block
//! structure selecting the block upper-triangular algebra `A`, its ideal
//! `A_0`, the diagonal `D = A ∩ A^*` and the conditional expectation `Phi`
//! (block-diagonal pinching).

use alloc::vec::Vec;


use crate::matfun::{self, MatError};
use crate::matrix::{ComplexMatrix, C64, ZERO};

/// Relative membership tolerance, scaled by `|a|_F`.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlgebraError {
    #[error("block structure needs at least one block")]
    NoBlocks,
    #[error("block {index} has size zero")]
    ZeroBlock { index: usize },
    #[error("matrix is {rows}x{cols} but the context has dimension {n}")]
    ShapeMismatch { rows: usize, cols: usize, n: usize },
    #[error("exponent p must be positive, got {p}")]
    InvalidExponent { p: f64 },
}

/// Ordered block sizes partitioning `{0, .., n-1}` into consecutive runs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockStructure {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    index: Vec<usize>,
}

impl BlockStructure {
    pub fn new(sizes: Vec<usize>) -> Result<Self, AlgebraError> {
        if sizes.is_empty() {
            return Err(AlgebraError::NoBlocks);
        }
        if let Some(index) = sizes.iter().position(|&s| s == 0) {
            return Err(AlgebraError::ZeroBlock { index });
        }
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut index = Vec::new();
        let mut off = 0;
        for (b, &s) in sizes.iter().enumerate() {
            offsets.push(off);
            index.extend(core::iter::repeat_n(b, s));
            off += s;
        }
        Ok(Self {
            sizes,
            offsets,
            index,
        })
    }

    /// `(1, .., 1)`: the upper-triangular matrices.
    pub fn singletons(n: usize) -> Self {
        Self::new(alloc::vec![1; n]).expect("n >= 1")
    }

    /// `(n)`: `A = M`, `Phi = Id`.
    pub fn single(n: usize) -> Self {
        Self::new(alloc::vec![n]).expect("n >= 1")
    }

    pub fn n(&self) -> usize {
        self.index.len()
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn offset(&self, block: usize) -> usize {
        self.offsets[block]
    }

    /// Block containing row/column `i`.
    #[inline]
    pub fn block_of(&self, i: usize) -> usize {
        self.index[i]
    }

    pub fn reversed(&self) -> Self {
        let mut sizes = self.sizes.clone();
        sizes.reverse();
        Self::new(sizes).expect("reversal keeps sizes valid")
    }

    /// `dim A_0 = sum_{i<j} s_i s_j`.
    pub fn a0_dimension(&self) -> usize {
        let mut total = 0;
        for (i, &si) in self.sizes.iter().enumerate() {
            for &sj in &self.sizes[i + 1..] {
                total += si * sj;
            }
        }
        total
    }

    /// `dim D = sum_i s_i^2`.
    pub fn d_dimension(&self) -> usize {
        self.sizes.iter().map(|s| s * s).sum()
    }
}

/// Which triangle carries the algebra. `Lower` is the adjoint algebra `A^*`,
/// itself subdiagonal with the same diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Upper,
    Lower,
}

/// Subspaces of `M_n` tied to the algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    A,
    A0,
    D,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubdiagonalContext {
    blocks: BlockStructure,
    orientation: Orientation,
}

impl SubdiagonalContext {
    pub fn new(blocks: BlockStructure) -> Self {
        Self {
            blocks,
            orientation: Orientation::Upper,
        }
    }

    pub fn from_sizes(sizes: Vec<usize>) -> Result<Self, AlgebraError> {
        Ok(Self::new(BlockStructure::new(sizes)?))
    }

    /// Context for `A^*`.
    pub fn adjoint(&self) -> Self {
        Self {
            blocks: self.blocks.clone(),
            orientation: match self.orientation {
                Orientation::Upper => Orientation::Lower,
                Orientation::Lower => Orientation::Upper,
            },
        }
    }

    pub fn n(&self) -> usize {
        self.blocks.n()
    }

    pub fn blocks(&self) -> &BlockStructure {
        &self.blocks
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Whether entry `(i, j)` is free in `part`.
    #[inline]
    pub fn in_part(&self, i: usize, j: usize, part: Part) -> bool {
        let (bi, bj) = (self.blocks.block_of(i), self.blocks.block_of(j));
        let (lo, hi) = match self.orientation {
            Orientation::Upper => (bi, bj),
            Orientation::Lower => (bj, bi),
        };
        match part {
            Part::A => lo <= hi,
            Part::A0 => lo < hi,
            Part::D => lo == hi,
        }
    }

    pub fn check_shape(&self, a: &ComplexMatrix) -> Result<(), AlgebraError> {
        let n = self.n();
        if a.rows() != n || a.cols() != n {
            return Err(AlgebraError::ShapeMismatch {
                rows: a.rows(),
                cols: a.cols(),
                n,
            });
        }
        Ok(())
    }

    /// Entrywise (orthogonal) projection onto `part`.
    pub fn project(&self, a: &ComplexMatrix, part: Part) -> Result<ComplexMatrix, AlgebraError> {
        self.check_shape(a)?;
        let n = self.n();
        Ok(ComplexMatrix::from_fn(n, n, |i, j| {
            if self.in_part(i, j, part) {
                a[(i, j)]
            } else {
                ZERO
            }
        }))
    }

    /// The conditional expectation onto `D`: off-diagonal blocks zeroed.
    pub fn phi(&self, a: &ComplexMatrix) -> Result<ComplexMatrix, AlgebraError> {
        self.project(a, Part::D)
    }

    /// Normalized trace.
    pub fn tau(&self, a: &ComplexMatrix) -> C64 {
        a.normalized_trace()
    }

    /// Frobenius distance from `a` to `part`.
    pub fn membership_distance(&self, a: &ComplexMatrix, part: Part) -> Result<f64, AlgebraError> {
        self.check_shape(a)?;
        let n = self.n();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if !self.in_part(i, j, part) {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        Ok(s.sqrt())
    }

    /// Membership up to `rel_tol * |a|_F`.
    pub fn contains(&self, a: &ComplexMatrix, part: Part, rel_tol: f64) -> Result<bool, AlgebraError> {
        Ok(self.membership_distance(a, part)? <= rel_tol * a.frobenius_norm())
    }

    /// Matrix units spanning `part`, in row-major order.
    pub fn basis(&self, part: Part) -> Vec<ComplexMatrix> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.in_part(i, j, part) {
                    out.push(ComplexMatrix::unit(n, i, j));
                }
            }
        }
        out
    }

    /// Matrix units strictly above (or, for `A^*`, below) the block diagonal.
    pub fn a0_basis(&self) -> Vec<ComplexMatrix> {
        self.basis(Part::A0)
    }

    pub fn dimension(&self, part: Part) -> usize {
        match part {
            Part::A => self.blocks.a0_dimension() + self.blocks.d_dimension(),
            Part::A0 => self.blocks.a0_dimension(),
            Part::D => self.blocks.d_dimension(),
        }
    }

    /// `((1/n) sum sigma_i^p)^{1/p}`, or `sigma_max` for `p = inf`.
    pub fn p_norm(&self, a: &ComplexMatrix, p: f64) -> Result<f64, AlgebraError> {
        self.check_shape(a)?;
        p_norm_of(&matfun::singular_values(a), p)
    }

    /// Factor `m = a a^*` with `a` in this algebra and positive definite
    /// diagonal blocks.
    pub fn ul_factor(&self, m: &ComplexMatrix) -> Result<ComplexMatrix, MatError> {
        match self.orientation {
            Orientation::Upper => matfun::ul_factor(m, &self.blocks),
            Orientation::Lower => {
                let a = matfun::ul_factor(&m.reversed(), &self.blocks.reversed())?;
                Ok(a.reversed())
            }
        }
    }
}

/// `p`-(quasi-)norm from singular values.
pub fn p_norm_of(singular_values: &[f64], p: f64) -> Result<f64, AlgebraError> {
    if p.is_nan() || p <= 0.0 {
        return Err(AlgebraError::InvalidExponent { p });
    }
    let smax = singular_values.iter().copied().fold(0.0, f64::max);
    if p.is_infinite() || smax == 0.0 {
        return Ok(smax);
    }
    let n = singular_values.len() as f64;
    let mean: f64 = singular_values.iter().map(|s| (s / smax).powf(p)).sum::<f64>() / n;
    Ok(smax * mean.powf(1.0 / p))
}

/// `p < 1` gives a quasi-norm that is not subadditive.
pub fn is_quasi_norm(p: f64) -> bool {
    p < 1.0
}
