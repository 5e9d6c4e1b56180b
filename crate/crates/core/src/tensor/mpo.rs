use nalgebra::Matrix2;
use serde_json::{json, Value};

use super::core::{CMatrix, Core, C64};
use super::mps::{ranks_of, validate_chain, Canonical, Mps};
use super::ortho::{self, TruncationPolicy};
use crate::{check_dense_cap, Error, Result};

/// Matrix product operator: a chain of order-4 cores with `R_0 = R_n = 1`.
///
/// Each core stores `d * d` bond-matrix slices, slice `x * d + y` being the
/// coefficient of `|x><y|` on that site.
#[derive(Clone, Debug, PartialEq)]
pub struct Mpo {
    cores: Vec<Core>,
    dims: Vec<usize>,
}

impl Mpo {
    pub fn new(cores: Vec<Core>) -> Result<Self> {
        validate_chain(&cores)?;
        let dims = cores
            .iter()
            .map(|c| {
                let d = (c.slots() as f64).sqrt().round() as usize;
                if d * d == c.slots() && d > 0 {
                    Ok(d)
                } else {
                    Err(Error::ShapeMismatch(format!(
                        "operator core has {} slices, not a square",
                        c.slots()
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { cores, dims })
    }

    /// Builds a qubit MPO from core notation, one block array of 2x2
    /// operators per site.
    pub fn from_operator_blocks(blocks: &[Vec<Vec<Matrix2<C64>>>]) -> Result<Self> {
        let cores = blocks
            .iter()
            .map(|b| Core::from_operator_blocks(b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }

    /// Rank-one operator `A_1 ⊗ ... ⊗ A_n`.
    pub fn from_local_operators(ops: &[Matrix2<C64>]) -> Result<Self> {
        let blocks: Vec<Vec<Vec<Matrix2<C64>>>> = ops.iter().map(|m| vec![vec![*m]]).collect();
        Self::from_operator_blocks(&blocks)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_local_operators(&vec![Matrix2::identity(); n])
    }

    pub fn len(&self) -> usize {
        self.cores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cores.is_empty()
    }

    pub fn cores(&self) -> &[Core] {
        &self.cores
    }

    pub fn core(&self, i: usize) -> &Core {
        &self.cores[i]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// `(R_0, ..., R_n)`.
    pub fn ranks(&self) -> Vec<usize> {
        ranks_of(&self.cores)
    }

    pub fn max_rank(&self) -> usize {
        self.ranks().into_iter().max().unwrap_or(1)
    }

    /// `G[x, y]` for output multi-index `x` and input multi-index `y`.
    pub fn element(&self, x: &[usize], y: &[usize]) -> Result<C64> {
        if x.len() != self.len() || y.len() != self.len() {
            return Err(Error::DimensionMismatch("index length".into()));
        }
        let mut row = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        for (site, core) in self.cores.iter().enumerate() {
            let d = self.dims[site];
            for &idx in [x[site], y[site]].iter() {
                if idx >= d {
                    return Err(Error::IndexOutOfRange {
                        site,
                        index: idx,
                        dim: d,
                    });
                }
            }
            row = row * core.slice(x[site] * d + y[site]);
        }
        Ok(row[(0, 0)])
    }

    /// Dense matrix; row and column indices put the first site most significant.
    pub fn to_dense(&self) -> Result<CMatrix> {
        let dim = self
            .dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .unwrap_or(usize::MAX);
        check_dense_cap(dim.saturating_mul(dim))?;
        // rows of `acc` are indexed by (x_prefix * cols + y_prefix)
        let mut acc = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        let mut rows = 1usize;
        let mut cols = 1usize;
        for (core, &d) in self.cores.iter().zip(&self.dims) {
            let mut next = CMatrix::zeros(rows * d * cols * d, core.right_rank());
            for x in 0..d {
                for y in 0..d {
                    let part = &acc * core.slice(x * d + y);
                    for xp in 0..rows {
                        for yp in 0..cols {
                            let target = (xp * d + x) * (cols * d) + (yp * d + y);
                            next.row_mut(target).copy_from(&part.row(xp * cols + yp));
                        }
                    }
                }
            }
            acc = next;
            rows *= d;
            cols *= d;
        }
        Ok(CMatrix::from_fn(rows, cols, |r, c| acc[(r * cols + c, 0)]))
    }

    /// `G T`; ranks multiply exactly, no truncation.
    pub fn apply(&self, state: &Mps) -> Result<Mps> {
        if state.dims() != self.dims {
            return Err(Error::DimensionMismatch(format!(
                "operator dims {:?} vs state dims {:?}",
                self.dims,
                state.dims()
            )));
        }
        let cores = self
            .cores
            .iter()
            .zip(state.cores())
            .zip(&self.dims)
            .map(|((g, t), &d)| {
                let slices = (0..d)
                    .map(|x| {
                        let mut acc = CMatrix::zeros(g.left_rank() * t.left_rank(), g.right_rank() * t.right_rank());
                        for y in 0..d {
                            acc += g.slice(x * d + y).kronecker(t.slice(y));
                        }
                        acc
                    })
                    .collect();
                Core::new(slices)
            })
            .collect::<Result<Vec<_>>>()?;
        Mps::new(cores)
    }

    /// Operator product `self · other` (apply `other` first).
    pub fn multiply(&self, other: &Mpo) -> Result<Mpo> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "operator dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        let cores = self
            .cores
            .iter()
            .zip(&other.cores)
            .zip(&self.dims)
            .map(|((g, h), &d)| {
                let mut slices = Vec::with_capacity(d * d);
                for x in 0..d {
                    for y in 0..d {
                        let mut acc = CMatrix::zeros(g.left_rank() * h.left_rank(), g.right_rank() * h.right_rank());
                        for z in 0..d {
                            acc += g.slice(x * d + z).kronecker(h.slice(z * d + y));
                        }
                        slices.push(acc);
                    }
                }
                Core::new(slices)
            })
            .collect::<Result<Vec<_>>>()?;
        Mpo::new(cores)
    }

    /// Product of operators listed in application order: `ops[0]` acts first.
    pub fn product_in_order(ops: &[Mpo]) -> Result<Mpo> {
        let (first, rest) = ops
            .split_first()
            .ok_or_else(|| Error::InvalidArgument("empty operator list".into()))?;
        rest.iter().try_fold(first.clone(), |acc, op| op.multiply(&acc))
    }

    /// Sum of two operators with block-diagonal (direct-sum) cores.
    pub fn add(&self, other: &Mpo) -> Result<Mpo> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch("operator dims differ".into()));
        }
        Mpo::new(super::core::direct_sum(&self.cores, &other.cores)?)
    }

    pub fn scale(&self, factor: C64) -> Self {
        let mut cores = self.cores.clone();
        cores[0] = cores[0].scale(factor);
        Self {
            cores,
            dims: self.dims.clone(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Mpo {
        let cores = self
            .cores
            .iter()
            .zip(&self.dims)
            .map(|(c, &d)| {
                let mut out = c.clone();
                for x in 0..d {
                    for y in 0..d {
                        out.slices_mut()[x * d + y] = c.slice(y * d + x).map(|z| z.conj());
                    }
                }
                out
            })
            .collect();
        Mpo {
            cores,
            dims: self.dims.clone(),
        }
    }

    /// The same operator on the mirrored chain: site `i` moves to `n - 1 - i`.
    pub fn reversed(&self) -> Mpo {
        let cores = self
            .cores
            .iter()
            .rev()
            .map(|c| {
                Core::new(c.slices().iter().map(|s| s.transpose()).collect())
                    .expect("transposed slices keep a common shape")
            })
            .collect();
        Mpo {
            cores,
            dims: self.dims.iter().rev().copied().collect(),
        }
    }

    /// `self ⊗ other`: `other` acts on sites appended after this chain.
    pub fn kron(&self, other: &Mpo) -> Mpo {
        let mut cores = self.cores.clone();
        cores.extend(other.cores.iter().cloned());
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Mpo { cores, dims }
    }

    /// Right-to-left SVD sweep over the operator cores.
    pub fn orthonormalize_right(&self, policy: &TruncationPolicy) -> Result<Mpo> {
        let mut cores = self.cores.clone();
        ortho::sweep_right(&mut cores, policy)?;
        Mpo::new(cores)
    }

    /// Minimal-rank representation: lossless left sweep, truncating right sweep.
    pub fn compress(&self, policy: &TruncationPolicy) -> Result<Mpo> {
        let mut cores = self.cores.clone();
        ortho::sweep_left(&mut cores, &TruncationPolicy::lossless())?;
        ortho::sweep_right(&mut cores, policy)?;
        Mpo::new(cores)
    }

    /// Paired core transformation `(G^(i) q) ⊗ (q^{-1} G^(i+1))`.
    pub fn transform_pair(&self, i: usize, q: &CMatrix) -> Result<Mpo> {
        let mut cores = self.cores.clone();
        ortho::transform_pair(&mut cores, i, q)?;
        Mpo::new(cores)
    }

    /// Diagonal operator `diag(T)` with `diag(T)[x, x] = T[x]`.
    pub fn diag(state: &Mps) -> Mpo {
        let dims = state.dims();
        let cores = state
            .cores()
            .iter()
            .zip(&dims)
            .map(|(c, &d)| {
                let mut out = Core::zeros(c.left_rank(), d * d, c.right_rank());
                for x in 0..d {
                    out.slices_mut()[x * d + x] = c.slice(x).clone();
                }
                out
            })
            .collect();
        Mpo { cores, dims }
    }

    /// Debug dump with cores indexed `[k][x][y][l]` as `[re, im]` pairs.
    pub fn to_json(&self) -> Value {
        let cores: Vec<Value> = self
            .cores
            .iter()
            .zip(&self.dims)
            .map(|(c, &d)| {
                let rows: Vec<Value> = (0..c.left_rank())
                    .map(|k| {
                        let xs: Vec<Value> = (0..d)
                            .map(|x| {
                                let ys: Vec<Value> = (0..d)
                                    .map(|y| {
                                        let s = c.slice(x * d + y);
                                        Value::Array(
                                            (0..c.right_rank())
                                                .map(|l| json!([s[(k, l)].re, s[(k, l)].im]))
                                                .collect(),
                                        )
                                    })
                                    .collect();
                                Value::Array(ys)
                            })
                            .collect();
                        Value::Array(xs)
                    })
                    .collect();
                Value::Array(rows)
            })
            .collect();
        json!({ "kind": "mpo", "ranks": self.ranks(), "dims": self.dims, "cores": cores })
    }
}

impl Mps {
    /// The state on the mirrored chain.
    pub fn reversed(&self) -> Mps {
        let cores = self
            .cores()
            .iter()
            .rev()
            .map(|c| {
                Core::new(c.slices().iter().map(|s| s.transpose()).collect())
                    .expect("transposed slices keep a common shape")
            })
            .collect();
        Mps::from_parts(cores, Canonical::None)
    }
}

impl Mpo {
    /// Operator with random complex cores and bulk bond dimension `rank`.
    pub fn random<R: rand::Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Result<Mpo> {
        let ranks = super::mps::bulk_ranks(&vec![4; n], rank);
        let cores = (0..n)
            .map(|i| {
                Core::new(
                    (0..4)
                        .map(|_| CMatrix::from_fn(ranks[i], ranks[i + 1], |_, _| super::mps::gaussian_c64(rng)))
                        .collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Mpo::new(cores)
    }
}
