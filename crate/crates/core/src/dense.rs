//! Brute-force statevector simulator.
//!
//! This is the reference implementation the test suites compare against. It
//! deliberately shares no contraction code with [`crate::tensor`]: gates are
//! applied by walking basis indices and flipping bits, and operators are
//! assembled column by column from those actions.

use std::f64::consts::PI;

use crate::gates::GatePlacement;
use crate::tensor::{CMatrix, C64};
use crate::{check_dense_cap, Error, Result};

/// Full amplitude vector of an `n`-qubit state; qubit 1 is the most
/// significant bit of the index.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amplitudes: Vec<C64>,
}

impl DenseState {
    pub fn new(n: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyRegister);
        }
        check_dense_cap(1usize.checked_shl(n as u32).unwrap_or(usize::MAX))?;
        if amplitudes.len() != 1 << n {
            return Err(Error::DimensionMismatch(format!(
                "{n} qubits need {} amplitudes, got {}",
                1usize << n,
                amplitudes.len()
            )));
        }
        Ok(Self { n, amplitudes })
    }

    pub fn basis(n: usize, x: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyRegister);
        }
        check_dense_cap(1usize.checked_shl(n as u32).unwrap_or(usize::MAX))?;
        if x >= 1 << n {
            return Err(Error::InvalidArgument(format!(
                "basis index {x} needs more than {n} qubits"
            )));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << n];
        amplitudes[x] = C64::new(1.0, 0.0);
        Ok(Self { n, amplitudes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply(&mut self, placement: &GatePlacement) -> Result<()> {
        placement.validate(self.n)?;
        let n = self.n;
        let bit = |pos: usize| 1usize << (n - pos);
        let control_mask: usize = placement.controls.iter().map(|&p| bit(p)).sum();
        let t = bit(placement.target);
        let g = placement.gate.matrix();
        for x in 0..self.amplitudes.len() {
            if x & t != 0 || x & control_mask != control_mask {
                continue;
            }
            let (a0, a1) = (self.amplitudes[x], self.amplitudes[x | t]);
            self.amplitudes[x] = g[(0, 0)] * a0 + g[(0, 1)] * a1;
            self.amplitudes[x | t] = g[(1, 0)] * a0 + g[(1, 1)] * a1;
        }
        Ok(())
    }

    pub fn apply_all(&mut self, placements: &[GatePlacement]) -> Result<()> {
        placements.iter().try_for_each(|p| self.apply(p))
    }
}

/// Applies one placed gate to a copy of `state`.
pub fn apply_gate_dense(state: &DenseState, placement: &GatePlacement) -> Result<DenseState> {
    let mut out = state.clone();
    out.apply(placement)?;
    Ok(out)
}

/// Matrix of a gate sequence, `placements[0]` acting first.
pub fn circuit_matrix(placements: &[GatePlacement], n: usize) -> Result<CMatrix> {
    let dim = 1usize << n;
    check_dense_cap(dim.saturating_mul(dim))?;
    let mut m = CMatrix::zeros(dim, dim);
    for y in 0..dim {
        let mut s = DenseState::basis(n, y)?;
        s.apply_all(placements)?;
        m.set_column(y, &nalgebra::DVector::from_vec(s.into_amplitudes()));
    }
    Ok(m)
}

pub fn placement_matrix(placement: &GatePlacement, n: usize) -> Result<CMatrix> {
    circuit_matrix(std::slice::from_ref(placement), n)
}

/// Unitary DFT with entries `e^{2 pi i x y / 2^n} / sqrt(2^n)`.
pub fn dft_matrix(n: usize) -> Result<CMatrix> {
    let dim = 1usize << n;
    check_dense_cap(dim.saturating_mul(dim))?;
    let scale = 1.0 / (dim as f64).sqrt();
    Ok(CMatrix::from_fn(dim, dim, |x, y| {
        let k = (x * y) % dim;
        C64::from_polar(scale, 2.0 * PI * k as f64 / dim as f64)
    }))
}

/// Classical full adder: returns `(sum, carry_out)`.
pub fn full_adder_truth(c_in: u8, a: u8, b: u8) -> (u8, u8) {
    let total = c_in + a + b;
    (total & 1, u8::from(total >= 2))
}

/// `a^x mod m` by square and multiply.
pub fn mod_exp(a: u64, mut x: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut base = (a % m) as u128;
    let mut acc: u128 = 1;
    let m = m as u128;
    while x > 0 {
        if x & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        x >>= 1;
    }
    acc as u64
}

/// Exact distribution of the measured input register of Shor's algorithm
/// with `input_qubits` input and `target_qubits` target qubits: Hadamards on
/// the input register, `|x, 0> -> |x, a^x mod m>`, then the inverse DFT on the
/// input register (with the usual output order, so index `y` is the
/// measured integer directly).
pub fn shor_distribution_dense(a: u64, m: u64, input_qubits: usize, target_qubits: usize) -> Result<Vec<f64>> {
    let n = input_qubits + target_qubits;
    let mut state = DenseState::basis(n, 0)?;
    for p in 1..=input_qubits {
        state.apply(&GatePlacement::single(crate::gates::GateMatrix::hadamard(), p))?;
    }
    let rows = 1usize << input_qubits;
    let cols = 1usize << target_qubits;
    if m > cols as u64 {
        return Err(Error::InvalidArgument(format!("target register too small for M = {m}")));
    }
    // x occupies the high bits, the target register the low bits
    let mut after = vec![C64::new(0.0, 0.0); rows * cols];
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        let (x, z) = (idx / cols, idx % cols);
        let fz = (z as u64 ^ mod_exp(a, x as u64, m)) as usize;
        after[x * cols + fz] += amp;
    }
    let inverse = dft_matrix(input_qubits)?.adjoint();
    let mut probs = vec![0.0; rows];
    for z in 0..cols {
        let column = nalgebra::DVector::from_iterator(rows, (0..rows).map(|x| after[x * cols + z]));
        let out = &inverse * column;
        for (y, v) in out.iter().enumerate() {
            probs[y] += v.norm_sqr();
        }
    }
    Ok(probs)
}

/// `|psi_x|^2 / Z` for every basis index.
pub fn born_distribution_dense(state: &[C64]) -> Result<Vec<f64>> {
    let z: f64 = state.iter().map(|a| a.norm_sqr()).sum();
    if z == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(state.iter().map(|a| a.norm_sqr() / z).collect())
}

/// Sums a full distribution over the complement of `measured` (1-based,
/// ascending); the result is indexed with the first measured qubit as MSB.
pub fn marginal(probabilities: &[f64], n: usize, measured: &[usize]) -> Vec<f64> {
    let m = measured.len();
    let mut out = vec![0.0; 1 << m];
    for (x, p) in probabilities.iter().enumerate() {
        let mut y = 0usize;
        for &pos in measured {
            y = (y << 1) | ((x >> (n - pos)) & 1);
        }
        out[y] += p;
    }
    out
}

/// Renders `x` as an `n`-character bitstring, most significant bit first.
pub fn bitstring(x: usize, n: usize) -> String {
    (0..n)
        .map(|i| if (x >> (n - 1 - i)) & 1 == 1 { '1' } else { '0' })
        .collect()
}
