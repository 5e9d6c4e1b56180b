//! Orthonormalization sweeps and rank truncation shared by MPS and MPO trains.
//!
//! Every sweep works on a chain of [`Core`]s; MPOs are swept as MPSs whose
//! local dimension is `d * d`.

use nalgebra::SVD;
use serde::{Deserialize, Serialize};

use super::core::{CMatrix, Core, C64};
use crate::{Error, Result};

/// Which singular values survive an SVD during orthonormalization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Singular values `<= rel_threshold * sigma_max` are dropped.
    pub rel_threshold: f64,
    #[serde(default)]
    pub max_rank: Option<usize>,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            rel_threshold: 1e-12,
            max_rank: None,
        }
    }
}

impl TruncationPolicy {
    /// Keeps every singular value.
    pub fn lossless() -> Self {
        Self {
            rel_threshold: 0.0,
            max_rank: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_threshold >= 0.0 && self.rel_threshold.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "rel_threshold must be finite and non-negative, got {}",
                self.rel_threshold
            )));
        }
        if self.max_rank == Some(0) {
            return Err(Error::InvalidArgument("max_rank must be positive".into()));
        }
        Ok(())
    }

    /// Number of leading singular values to keep; `sorted` is descending.
    pub fn retained(&self, sorted: &[f64]) -> usize {
        let sigma_max = sorted.first().copied().unwrap_or(0.0);
        let mut keep = if self.rel_threshold > 0.0 {
            let cut = self.rel_threshold * sigma_max;
            sorted.iter().take_while(|&&s| s > cut).count()
        } else {
            sorted.len()
        };
        if let Some(cap) = self.max_rank {
            keep = keep.min(cap);
        }
        keep.max(1)
    }
}

/// Thin SVD with singular values sorted in descending order.
pub(crate) struct SortedSvd {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v_t: CMatrix,
}

// Convergence tolerances tried in order. The bidiagonal iteration can
// return an inconsistent factorization of rank-deficient input when the
// tolerance is at machine epsilon, so every result is verified.
const SVD_TOLERANCES: [f64; 3] = [5.0 * f64::EPSILON, 1e2 * f64::EPSILON, 1e4 * f64::EPSILON];
const SVD_CHECK: f64 = 1e-12;

pub(crate) fn sorted_svd(m: CMatrix) -> Result<SortedSvd> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite entry before SVD".into()));
    }
    let scale = m.norm().max(f64::MIN_POSITIVE);
    for eps in SVD_TOLERANCES {
        let Some(svd) = SVD::try_new(m.clone(), true, true, eps, 0) else {
            continue;
        };
        let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
            continue;
        };
        let values = svd.singular_values;
        let sigma = CMatrix::from_diagonal(&values.map(|v| C64::new(v, 0.0)));
        let k = values.len();
        let residual = (&u * sigma * &v_t - &m).norm() / scale;
        let u_err = (u.adjoint() * &u - CMatrix::identity(k, k)).norm();
        let v_err = (&v_t * v_t.adjoint() - CMatrix::identity(k, k)).norm();
        if residual > SVD_CHECK || u_err > SVD_CHECK * 1e2 || v_err > SVD_CHECK * 1e2 {
            continue;
        }
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        return Ok(SortedSvd {
            u: u.select_columns(order.iter()),
            sigma: order.iter().map(|&i| values[i]).collect(),
            v_t: v_t.select_rows(order.iter()),
        });
    }
    Err(Error::Numerical(format!(
        "no verified SVD for a {}x{} matrix",
        m.nrows(),
        m.ncols()
    )))
}

/// Right-to-left sweep leaving cores `1..n` right-orthonormal; the norm ends
/// up in core 0.
pub(crate) fn sweep_right(cores: &mut [Core], policy: &TruncationPolicy) -> Result<()> {
    policy.validate()?;
    for i in (1..cores.len()).rev() {
        let slots = cores[i].slots();
        let right = cores[i].right_rank();
        let svd = sorted_svd(cores[i].right_unfolding())?;
        let keep = policy.retained(&svd.sigma);
        let v_t = svd.v_t.rows(0, keep).into_owned();
        let mut carry = svd.u.columns(0, keep).into_owned();
        for (j, mut col) in carry.column_iter_mut().enumerate() {
            col *= C64::new(svd.sigma[j], 0.0);
        }
        cores[i] = Core::from_right_unfolding(&v_t, slots, right)?;
        cores[i - 1] = cores[i - 1].mul_right(&carry)?;
    }
    Ok(())
}

/// Left-to-right sweep leaving cores `0..n-1` left-orthonormal; the norm ends
/// up in the last core.
pub(crate) fn sweep_left(cores: &mut [Core], policy: &TruncationPolicy) -> Result<()> {
    policy.validate()?;
    let n = cores.len();
    for i in 0..n.saturating_sub(1) {
        let slots = cores[i].slots();
        let left = cores[i].left_rank();
        let svd = sorted_svd(cores[i].left_unfolding())?;
        let keep = policy.retained(&svd.sigma);
        let u = svd.u.columns(0, keep).into_owned();
        let mut carry = svd.v_t.rows(0, keep).into_owned();
        for (j, mut row) in carry.row_iter_mut().enumerate() {
            row *= C64::new(svd.sigma[j], 0.0);
        }
        cores[i] = Core::from_left_unfolding(&u, left, slots)?;
        cores[i + 1] = cores[i + 1].mul_left(&carry)?;
    }
    Ok(())
}

/// Multiplies core `i` by `q` from the right and core `i + 1` by `q^{-1}`
/// from the left, which leaves the represented tensor unchanged.
pub(crate) fn transform_pair(cores: &mut [Core], i: usize, q: &CMatrix) -> Result<()> {
    if i + 1 >= cores.len() {
        return Err(Error::InvalidArgument(format!(
            "paired transform needs cores {i} and {}, chain has {}",
            i + 1,
            cores.len()
        )));
    }
    if !q.is_square() || q.nrows() != cores[i].right_rank() {
        return Err(Error::ShapeMismatch(format!(
            "paired transform needs a {r}x{r} matrix, got {:?}",
            q.shape(),
            r = cores[i].right_rank()
        )));
    }
    let inverse = checked_inverse(q)?;
    cores[i] = cores[i].mul_right(q)?;
    cores[i + 1] = cores[i + 1].mul_left(&inverse)?;
    Ok(())
}

fn checked_inverse(q: &CMatrix) -> Result<CMatrix> {
    let svd = sorted_svd(q.clone())?;
    let largest = svd.sigma.first().copied().unwrap_or(0.0);
    let smallest = svd.sigma.last().copied().unwrap_or(0.0);
    if largest == 0.0 || smallest <= largest * 1e-14 {
        return Err(Error::SingularMatrix);
    }
    q.clone().try_inverse().ok_or(Error::SingularMatrix)
}
