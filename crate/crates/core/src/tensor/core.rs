use nalgebra::{DMatrix, Matrix2, Vector2};
use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// One tensor-train core stored as a list of bond matrices.
///
/// An MPS core of shape `(r_{i-1}, d, r_i)` holds `d` slices of shape
/// `r_{i-1} x r_i`, slice `x` being `T[:, x, :]`. An MPO core of shape
/// `(R_{i-1}, d, d, R_i)` holds `d * d` slices, slice `x * d + y` being
/// `G[:, x, y, :]` where `x` is the output (row) and `y` the input (column)
/// index of the local operator.
#[derive(Clone, Debug, PartialEq)]
pub struct Core {
    left: usize,
    right: usize,
    slices: Vec<CMatrix>,
}

impl Core {
    pub fn new(slices: Vec<CMatrix>) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::ShapeMismatch("core needs at least one slice".into()))?;
        let (left, right) = first.shape();
        if left == 0 || right == 0 {
            return Err(Error::ShapeMismatch("core ranks must be positive".into()));
        }
        if let Some(bad) = slices.iter().find(|s| s.shape() != (left, right)) {
            return Err(Error::ShapeMismatch(format!(
                "slice shape {:?} differs from {:?}",
                bad.shape(),
                (left, right)
            )));
        }
        Ok(Self { left, right, slices })
    }

    pub fn zeros(left: usize, slots: usize, right: usize) -> Self {
        Self {
            left,
            right,
            slices: vec![CMatrix::zeros(left, right); slots],
        }
    }

    /// Builds an MPS core from core notation: `blocks[k][l]` is the vector
    /// `T[k, :, l]`.
    pub fn from_vector_blocks(blocks: &[Vec<Vector2<C64>>]) -> Result<Self> {
        let (left, right) = block_shape(blocks)?;
        let mut core = Self::zeros(left, 2, right);
        for (k, row) in blocks.iter().enumerate() {
            for (l, v) in row.iter().enumerate() {
                for x in 0..2 {
                    core.slices[x][(k, l)] = v[x];
                }
            }
        }
        Ok(core)
    }

    /// Builds an MPO core from core notation: `blocks[k][l]` is the 2x2
    /// operator `G[k, :, :, l]`.
    pub fn from_operator_blocks(blocks: &[Vec<Matrix2<C64>>]) -> Result<Self> {
        let (left, right) = block_shape(blocks)?;
        let mut core = Self::zeros(left, 4, right);
        for (k, row) in blocks.iter().enumerate() {
            for (l, m) in row.iter().enumerate() {
                for x in 0..2 {
                    for y in 0..2 {
                        core.slices[x * 2 + y][(k, l)] = m[(x, y)];
                    }
                }
            }
        }
        Ok(core)
    }

    pub fn left_rank(&self) -> usize {
        self.left
    }

    pub fn right_rank(&self) -> usize {
        self.right
    }

    /// Number of slices (`d` for MPS cores, `d * d` for MPO cores).
    pub fn slots(&self) -> usize {
        self.slices.len()
    }

    pub fn slice(&self, x: usize) -> &CMatrix {
        &self.slices[x]
    }

    pub fn slices(&self) -> &[CMatrix] {
        &self.slices
    }

    pub(crate) fn slices_mut(&mut self) -> &mut [CMatrix] {
        &mut self.slices
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            left: self.left,
            right: self.right,
            slices: self.slices.iter().map(|s| s * factor).collect(),
        }
    }

    /// `U[:, x, :] = T[:, x, :] * q` for every slice.
    pub fn mul_right(&self, q: &CMatrix) -> Result<Self> {
        if q.nrows() != self.right {
            return Err(Error::ShapeMismatch(format!(
                "right factor has {} rows, core right rank is {}",
                q.nrows(),
                self.right
            )));
        }
        Self::new(self.slices.iter().map(|s| s * q).collect())
    }

    /// `U[:, x, :] = q * T[:, x, :]` for every slice.
    pub fn mul_left(&self, q: &CMatrix) -> Result<Self> {
        if q.ncols() != self.left {
            return Err(Error::ShapeMismatch(format!(
                "left factor has {} columns, core left rank is {}",
                q.ncols(),
                self.left
            )));
        }
        Self::new(self.slices.iter().map(|s| q * s).collect())
    }

    /// Left unfolding of shape `(left * slots) x right`; the row multi-index
    /// `(k, x)` is lumped colexicographically as `k + left * x`.
    pub fn left_unfolding(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.left * self.slots(), self.right);
        for (x, s) in self.slices.iter().enumerate() {
            m.view_mut((x * self.left, 0), (self.left, self.right)).copy_from(s);
        }
        m
    }

    /// Right unfolding of shape `left x (slots * right)`; the column
    /// multi-index `(x, l)` is lumped colexicographically as `x + slots * l`.
    pub fn right_unfolding(&self) -> CMatrix {
        let slots = self.slots();
        let mut m = CMatrix::zeros(self.left, slots * self.right);
        for (x, s) in self.slices.iter().enumerate() {
            for l in 0..self.right {
                m.column_mut(x + slots * l).copy_from(&s.column(l));
            }
        }
        m
    }

    pub fn from_left_unfolding(m: &CMatrix, left: usize, slots: usize) -> Result<Self> {
        if m.nrows() != left * slots {
            return Err(Error::ShapeMismatch("left unfolding row count".into()));
        }
        let slices = (0..slots)
            .map(|x| m.view((x * left, 0), (left, m.ncols())).into_owned())
            .collect();
        Self::new(slices)
    }

    pub fn from_right_unfolding(m: &CMatrix, slots: usize, right: usize) -> Result<Self> {
        if m.ncols() != slots * right {
            return Err(Error::ShapeMismatch("right unfolding column count".into()));
        }
        let left = m.nrows();
        let slices = (0..slots)
            .map(|x| {
                let mut s = CMatrix::zeros(left, right);
                for l in 0..right {
                    s.column_mut(l).copy_from(&m.column(x + slots * l));
                }
                s
            })
            .collect();
        Self::new(slices)
    }

    /// Largest deviation of `R R^H` from the identity, `R` the right unfolding.
    pub fn right_orthonormality_error(&self) -> f64 {
        let r = self.right_unfolding();
        let gram = &r * r.adjoint();
        identity_deviation(&gram)
    }

    /// Largest deviation of `L^H L` from the identity, `L` the left unfolding.
    pub fn left_orthonormality_error(&self) -> f64 {
        let l = self.left_unfolding();
        let gram = l.adjoint() * &l;
        identity_deviation(&gram)
    }
}

fn identity_deviation(gram: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Cores of the sum of two trains: block-diagonal in the bulk, a row block
/// on the first core and a column block on the last.
pub(crate) fn direct_sum(a: &[Core], b: &[Core]) -> Result<Vec<Core>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "cannot add trains of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (ca, cb))| {
            if ca.slots() != cb.slots() {
                return Err(Error::DimensionMismatch(format!("site {i} dimensions differ")));
            }
            let (first, last) = (i == 0, i == n - 1);
            let left = if first { 1 } else { ca.left + cb.left };
            let right = if last { 1 } else { ca.right + cb.right };
            let off_left = if first { 0 } else { ca.left };
            let off_right = if last { 0 } else { ca.right };
            let slices = ca
                .slices
                .iter()
                .zip(&cb.slices)
                .map(|(sa, sb)| {
                    let mut m = CMatrix::zeros(left, right);
                    let mut block = m.view_mut((0, 0), sa.shape());
                    block += sa;
                    let mut block = m.view_mut((off_left, off_right), sb.shape());
                    block += sb;
                    m
                })
                .collect();
            Core::new(slices)
        })
        .collect()
}

fn block_shape<T>(blocks: &[Vec<T>]) -> Result<(usize, usize)> {
    let left = blocks.len();
    let right = blocks.first().map_or(0, Vec::len);
    if left == 0 || right == 0 || blocks.iter().any(|row| row.len() != right) {
        return Err(Error::ShapeMismatch(
            "core notation needs a non-empty rectangular block array".into(),
        ));
    }
    Ok((left, right))
}
