use nalgebra::Vector2;
use serde_json::{json, Value};

use super::core::{CMatrix, Core, C64};
use super::ortho::{self, TruncationPolicy};
use crate::{check_dense_cap, Error, Result};

/// Orthonormality state of an MPS, set only by the sweeps that certify it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Canonical {
    None,
    /// Cores `0..n-1` are left-orthonormal.
    Left,
    /// Cores `1..n` are right-orthonormal.
    Right,
}

/// Matrix product state: a chain of order-3 cores with `r_0 = r_n = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mps {
    cores: Vec<Core>,
    canonical: Canonical,
}

impl Mps {
    pub fn new(cores: Vec<Core>) -> Result<Self> {
        validate_chain(&cores)?;
        Ok(Self {
            cores,
            canonical: Canonical::None,
        })
    }

    /// Rank-one product state from one local vector per site.
    pub fn product(vectors: &[Vec<C64>]) -> Result<Self> {
        let cores = vectors
            .iter()
            .map(|v| Core::new(v.iter().map(|&a| CMatrix::from_element(1, 1, a)).collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }

    /// Computational basis state; `bits[0]` is the most significant bit.
    pub fn from_basis_state(bits: &[u8]) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::EmptyRegister);
        }
        let vectors = bits
            .iter()
            .enumerate()
            .map(|(site, &b)| match b {
                0 => Ok(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
                1 => Ok(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]),
                _ => Err(Error::IndexOutOfRange {
                    site,
                    index: b as usize,
                    dim: 2,
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::product(&vectors)
    }

    /// `|0...0>` on `n` qubits.
    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_basis_state(&vec![0; n])
    }

    /// Basis state `|x>` on `n` qubits.
    pub fn from_index(x: u64, n: usize) -> Result<Self> {
        if n < 64 && x >> n != 0 {
            return Err(Error::InvalidArgument(format!(
                "basis index {x} does not fit in {n} qubits"
            )));
        }
        let bits: Vec<u8> = (0..n)
            .map(|i| {
                let shift = n - 1 - i;
                if shift >= 64 {
                    0
                } else {
                    ((x >> shift) & 1) as u8
                }
            })
            .collect();
        Self::from_basis_state(&bits)
    }

    /// Builds a qubit MPS from core notation, one block array per site.
    pub fn from_vector_blocks(blocks: &[Vec<Vec<Vector2<C64>>>]) -> Result<Self> {
        let cores = blocks
            .iter()
            .map(|b| Core::from_vector_blocks(b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cores)
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

    pub fn into_cores(self) -> Vec<Core> {
        self.cores
    }

    pub fn dims(&self) -> Vec<usize> {
        self.cores.iter().map(Core::slots).collect()
    }

    /// `(r_0, ..., r_n)`.
    pub fn ranks(&self) -> Vec<usize> {
        ranks_of(&self.cores)
    }

    pub fn max_rank(&self) -> usize {
        self.ranks().into_iter().max().unwrap_or(1)
    }

    pub fn canonical(&self) -> Canonical {
        self.canonical
    }

    /// Single entry via the product of selected core slices.
    pub fn element(&self, x: &[usize]) -> Result<C64> {
        if x.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "index has {} entries, state has {} sites",
                x.len(),
                self.len()
            )));
        }
        let mut row = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        for (site, (core, &xi)) in self.cores.iter().zip(x).enumerate() {
            if xi >= core.slots() {
                return Err(Error::IndexOutOfRange {
                    site,
                    index: xi,
                    dim: core.slots(),
                });
            }
            row = row * core.slice(xi);
        }
        Ok(row[(0, 0)])
    }

    /// Full amplitude vector; the first site is the most significant digit.
    pub fn to_dense(&self) -> Result<Vec<C64>> {
        let total = self
            .dims()
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .unwrap_or(usize::MAX);
        check_dense_cap(total)?;
        let mut acc = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        for core in &self.cores {
            let d = core.slots();
            let prefixes = acc.nrows();
            let mut next = CMatrix::zeros(prefixes * d, core.right_rank());
            for (x, slice) in core.slices().iter().enumerate() {
                let part = &acc * slice;
                for p in 0..prefixes {
                    next.row_mut(p * d + x).copy_from(&part.row(p));
                }
            }
            acc = next;
        }
        Ok(acc.column(0).iter().copied().collect())
    }

    /// Sum of two states; ranks add.
    pub fn add(&self, other: &Mps) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch("state dims differ".into()));
        }
        Self::new(super::core::direct_sum(&self.cores, &other.cores)?)
    }

    /// Euclidean norm from the transfer-matrix contraction of `<T|T>`.
    pub fn norm(&self) -> f64 {
        let mut env = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        for core in &self.cores {
            let mut next = CMatrix::zeros(core.right_rank(), core.right_rank());
            for s in core.slices() {
                next += s.adjoint() * &env * s;
            }
            env = next;
        }
        env[(0, 0)].re.max(0.0).sqrt()
    }

    pub fn scale(&self, factor: C64) -> Self {
        let mut cores = self.cores.clone();
        let at = self.norm_site();
        cores[at] = cores[at].scale(factor);
        Self {
            cores,
            canonical: self.canonical,
        }
    }

    // core carrying the norm, so orthonormality flags survive rescaling
    fn norm_site(&self) -> usize {
        match self.canonical {
            Canonical::Left => self.len() - 1,
            _ => 0,
        }
    }

    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scale(C64::new(1.0 / norm, 0.0)))
    }

    /// Right-to-left SVD sweep; cores `1..n` become right-orthonormal.
    pub fn orthonormalize_right(&self, policy: &TruncationPolicy) -> Result<Self> {
        let mut cores = self.cores.clone();
        ortho::sweep_right(&mut cores, policy)?;
        Ok(Self {
            cores,
            canonical: Canonical::Right,
        })
    }

    /// Left-to-right SVD sweep; cores `0..n-1` become left-orthonormal.
    pub fn orthonormalize_left(&self, policy: &TruncationPolicy) -> Result<Self> {
        let mut cores = self.cores.clone();
        ortho::sweep_left(&mut cores, policy)?;
        Ok(Self {
            cores,
            canonical: Canonical::Left,
        })
    }

    /// Lossless left sweep followed by a truncating right sweep. The result
    /// is right-orthonormal with minimal ranks for the given policy.
    pub fn compress(&self, policy: &TruncationPolicy) -> Result<Self> {
        let mut cores = self.cores.clone();
        ortho::sweep_left(&mut cores, &TruncationPolicy::lossless())?;
        ortho::sweep_right(&mut cores, policy)?;
        Ok(Self {
            cores,
            canonical: Canonical::Right,
        })
    }

    /// Right-orthonormal version of this state, reusing it when already certified.
    pub fn ensure_right_orthonormal(&self, policy: &TruncationPolicy) -> Result<Self> {
        match self.canonical {
            Canonical::Right => Ok(self.clone()),
            _ => self.orthonormalize_right(policy),
        }
    }

    /// Largest `||R R^H - I||` over cores `1..n`.
    pub fn right_orthonormality_error(&self) -> f64 {
        self.cores
            .iter()
            .skip(1)
            .map(Core::right_orthonormality_error)
            .fold(0.0, f64::max)
    }

    pub fn left_orthonormality_error(&self) -> f64 {
        let n = self.len();
        self.cores
            .iter()
            .take(n.saturating_sub(1))
            .map(Core::left_orthonormality_error)
            .fold(0.0, f64::max)
    }

    /// Replaces core `i` by `T^(i) * q`; `q` must be square so the chain stays
    /// consistent. The represented tensor generally changes.
    pub fn transform_core_right(&self, i: usize, q: &CMatrix) -> Result<Self> {
        let core = self.checked_core(i)?;
        if q.shape() != (core.right_rank(), core.right_rank()) {
            return Err(Error::ShapeMismatch(format!(
                "expected a {r}x{r} matrix, got {:?}",
                q.shape(),
                r = core.right_rank()
            )));
        }
        let mut cores = self.cores.clone();
        cores[i] = core.mul_right(q)?;
        Self::new(cores)
    }

    /// Replaces core `i` by `q * T^(i)`; `q` must be square.
    pub fn transform_core_left(&self, i: usize, q: &CMatrix) -> Result<Self> {
        let core = self.checked_core(i)?;
        if q.shape() != (core.left_rank(), core.left_rank()) {
            return Err(Error::ShapeMismatch(format!(
                "expected a {r}x{r} matrix, got {:?}",
                q.shape(),
                r = core.left_rank()
            )));
        }
        let mut cores = self.cores.clone();
        cores[i] = core.mul_left(q)?;
        Self::new(cores)
    }

    /// `(T^(i) q) ⊗ (q^{-1} T^(i+1))`: same tensor, different cores.
    pub fn transform_pair(&self, i: usize, q: &CMatrix) -> Result<Self> {
        let mut cores = self.cores.clone();
        ortho::transform_pair(&mut cores, i, q)?;
        Self::new(cores)
    }

    /// Debug dump: ranks, dims and cores as nested `[re, im]` lists indexed
    /// `[k][x][l]`.
    pub fn to_json(&self) -> Value {
        let cores: Vec<Value> = self
            .cores
            .iter()
            .map(|c| {
                let rows: Vec<Value> = (0..c.left_rank())
                    .map(|k| {
                        let xs: Vec<Value> = c
                            .slices()
                            .iter()
                            .map(|s| {
                                Value::Array(
                                    (0..c.right_rank())
                                        .map(|l| json!([s[(k, l)].re, s[(k, l)].im]))
                                        .collect(),
                                )
                            })
                            .collect();
                        Value::Array(xs)
                    })
                    .collect();
                Value::Array(rows)
            })
            .collect();
        json!({ "kind": "mps", "ranks": self.ranks(), "dims": self.dims(), "cores": cores })
    }

    fn checked_core(&self, i: usize) -> Result<&Core> {
        self.cores
            .get(i)
            .ok_or_else(|| Error::InvalidArgument(format!("core index {i} out of range for {} cores", self.len())))
    }

    pub(crate) fn from_parts(cores: Vec<Core>, canonical: Canonical) -> Self {
        Self { cores, canonical }
    }
}

pub(crate) fn ranks_of(cores: &[Core]) -> Vec<usize> {
    let mut ranks = Vec::with_capacity(cores.len() + 1);
    ranks.push(cores.first().map_or(1, Core::left_rank));
    ranks.extend(cores.iter().map(Core::right_rank));
    ranks
}

pub(crate) fn validate_chain(cores: &[Core]) -> Result<()> {
    let (first, last) = match (cores.first(), cores.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::EmptyRegister),
    };
    if first.left_rank() != 1 || last.right_rank() != 1 {
        return Err(Error::ShapeMismatch(format!(
            "boundary ranks must be 1, got r_0={} and r_n={}",
            first.left_rank(),
            last.right_rank()
        )));
    }
    for (i, pair) in cores.windows(2).enumerate() {
        if pair[0].right_rank() != pair[1].left_rank() {
            return Err(Error::ShapeMismatch(format!(
                "core {i} right rank {} != core {} left rank {}",
                pair[0].right_rank(),
                i + 1,
                pair[1].left_rank()
            )));
        }
    }
    Ok(())
}

impl Mps {
    /// State with i.i.d. standard-normal-ish complex core entries (Box-Muller)
    /// and bond dimension `rank` in the bulk, capped by the exact maximum.
    pub fn random<R: rand::Rng + ?Sized>(dims: &[usize], rank: usize, rng: &mut R) -> Result<Self> {
        let ranks = bulk_ranks(dims, rank);
        let cores = dims
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                Core::new(
                    (0..d)
                        .map(|_| CMatrix::from_fn(ranks[i], ranks[i + 1], |_, _| gaussian_c64(rng)))
                        .collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }
}

/// Bond dimensions `min(rank, prod d_left, prod d_right)` so random trains are
/// not trivially rank-deficient at the edges.
pub(crate) fn bulk_ranks(dims: &[usize], rank: usize) -> Vec<usize> {
    let n = dims.len();
    let mut ranks = vec![1usize; n + 1];
    for (i, r) in ranks.iter_mut().enumerate().take(n).skip(1) {
        let left: usize = dims[..i]
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .unwrap_or(usize::MAX);
        let right: usize = dims[i..]
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .unwrap_or(usize::MAX);
        *r = rank.max(1).min(left).min(right);
    }
    ranks
}

pub(crate) fn gaussian_c64<R: rand::Rng + ?Sized>(rng: &mut R) -> C64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    let radius = (-2.0 * u1.ln()).sqrt();
    let angle = 2.0 * std::f64::consts::PI * u2;
    C64::new(radius * angle.cos(), radius * angle.sin()) * std::f64::consts::FRAC_1_SQRT_2
}
