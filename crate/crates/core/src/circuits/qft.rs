//! Gate groups of the (inverse) quantum Fourier transform.
//!
//! Group `G_i` is a Hadamard on qubit `i` followed by `CPHASE_k(j | i)` for
//! `j = i + 1, ..., n` with `k = j - i + 1`. Swapping control and target of
//! each phase gate turns the group into a rank-2 MPO. No SWAPs are applied,
//! so `G_n ... G_1 |x>` is the transform with reversed qubit order.

use nalgebra::Matrix2;

use super::sequence::{GateGroupSequence, RegisterLayout};
use crate::gates::{c0, c1, eye, hadamard, single_qubit_mpo, zero, GateMatrix, GatePlacement};
use crate::tensor::{Mpo, C64};
use crate::{Error, Result};

fn check_group(i: usize, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptyRegister);
    }
    if i == 0 || i > n {
        return Err(Error::BadPosition { position: i, n });
    }
    Ok(())
}

fn group_mpo(i: usize, n: usize, head: [Matrix2<C64>; 2], phase: impl Fn(u32) -> GateMatrix) -> Result<Mpo> {
    check_group(i, n)?;
    if i == n {
        return single_qubit_mpo(&GateMatrix::hadamard(), n, n);
    }
    let o = zero();
    let mut blocks: Vec<Vec<Vec<Matrix2<C64>>>> = (1..i).map(|_| vec![vec![eye()]]).collect();
    blocks.push(vec![head.to_vec()]);
    for j in i + 1..n {
        let r = *phase((j - i + 1) as u32).matrix();
        blocks.push(vec![vec![eye(), o], vec![o, r]]);
    }
    blocks.push(vec![vec![eye()], vec![*phase((n - i + 1) as u32).matrix()]]);
    Mpo::from_operator_blocks(&blocks)
}

/// `G_i` in closed form; rank 2 for `i < n`, rank 1 for `i = n`.
pub fn qft_group_mpo(i: usize, n: usize) -> Result<Mpo> {
    let h = hadamard();
    group_mpo(i, n, [c0() * h, c1() * h], GateMatrix::rk)
}

/// `G_i^{-1}`: conjugated phases first, then the Hadamard.
pub fn inverse_qft_group_mpo(i: usize, n: usize) -> Result<Mpo> {
    let h = hadamard();
    group_mpo(i, n, [h * c0(), h * c1()], GateMatrix::rk_dagger)
}

/// Gates of `G_i` in application order.
pub fn qft_group_gates(i: usize, n: usize) -> Result<Vec<GatePlacement>> {
    check_group(i, n)?;
    let mut gates = vec![GatePlacement::single(GateMatrix::hadamard(), i)];
    gates.extend((i + 1..=n).map(|j| GatePlacement::cphase((j - i + 1) as u32, j, i)));
    Ok(gates)
}

/// Gates of `G_i^{-1}` in application order.
pub fn inverse_qft_group_gates(i: usize, n: usize) -> Result<Vec<GatePlacement>> {
    check_group(i, n)?;
    let mut gates: Vec<GatePlacement> = (i + 1..=n)
        .map(|j| GatePlacement::controlled(vec![j], GateMatrix::rk_dagger((j - i + 1) as u32), i))
        .collect();
    gates.push(GatePlacement::single(GateMatrix::hadamard(), i));
    Ok(gates)
}

/// `G_1, ..., G_n` in application order.
pub fn qft_sequence(n: usize) -> Result<GateGroupSequence> {
    let groups = (1..=n).map(|i| qft_group_mpo(i, n)).collect::<Result<Vec<_>>>()?;
    GateGroupSequence::new(format!("qft({n})"), n, groups, RegisterLayout::contiguous(n))
}

/// `G_n^{-1}, ..., G_1^{-1}` in application order, undoing [`qft_sequence`].
pub fn inverse_qft_sequence(n: usize) -> Result<GateGroupSequence> {
    let groups = (1..=n)
        .rev()
        .map(|i| inverse_qft_group_mpo(i, n))
        .collect::<Result<Vec<_>>>()?;
    GateGroupSequence::new(format!("inverse-qft({n})"), n, groups, RegisterLayout::contiguous(n))
}

/// Reverses the lowest `n` bits of `x`.
pub fn reverse_bits(x: u64, n: usize) -> u64 {
    (0..n).fold(0, |acc, k| (acc << 1) | ((x >> k) & 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{circuit_matrix, dft_matrix};
    use crate::tensor::{CMatrix, Mps, TruncationPolicy};

    #[test]
    fn last_group_is_single_hadamard() {
        let g = qft_group_mpo(3, 3).unwrap();
        assert_eq!(g.max_rank(), 1);
        let want = circuit_matrix(&[GatePlacement::single(GateMatrix::hadamard(), 3)], 3).unwrap();
        assert!((g.to_dense().unwrap() - want).norm() < 1e-15);
    }

    #[test]
    fn groups_match_gate_products() {
        for n in 1..=6 {
            for i in 1..=n {
                let g = qft_group_mpo(i, n).unwrap();
                assert!(g.max_rank() <= 2);
                let want = circuit_matrix(&qft_group_gates(i, n).unwrap(), n).unwrap();
                assert!((g.to_dense().unwrap() - &want).norm() < 1e-12, "G_{i}, n = {n}");
                let inv = inverse_qft_group_mpo(i, n).unwrap().to_dense().unwrap();
                assert!((&inv - want.adjoint()).norm() < 1e-12);
                let inv_gates = circuit_matrix(&inverse_qft_group_gates(i, n).unwrap(), n).unwrap();
                assert!((inv - inv_gates).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn full_product_is_reversed_dft() {
        let n = 3;
        let groups: Vec<Mpo> = (1..=n).map(|i| qft_group_mpo(i, n).unwrap()).collect();
        let q = Mpo::product_in_order(&groups).unwrap().to_dense().unwrap();
        let dft = dft_matrix(n).unwrap();
        let dim = 1 << n;
        let reversed = CMatrix::from_fn(dim, dim, |y, x| dft[(reverse_bits(y as u64, n) as usize, x)]);
        assert!((q - reversed).norm() < 1e-12);
    }

    #[test]
    fn basis_state_stays_rank_one() {
        let n = 5;
        let mut state = Mps::from_index(0b10110, n).unwrap();
        for i in 1..=n {
            let applied = qft_group_mpo(i, n).unwrap().apply(&state).unwrap();
            state = applied.orthonormalize_right(&TruncationPolicy::default()).unwrap();
            assert_eq!(state.max_rank(), 1, "after G_{i}");
        }
    }

    #[test]
    fn bad_group_index() {
        assert!(qft_group_mpo(0, 3).is_err());
        assert!(inverse_qft_group_mpo(4, 3).is_err());
        assert!(qft_group_gates(1, 0).is_err());
    }

    #[test]
    fn bit_reversal() {
        assert_eq!(reverse_bits(0b0001, 4), 0b1000);
        assert_eq!(reverse_bits(0b0110_0000, 8), 0b0000_0110);
        assert_eq!(reverse_bits(0, 8), 0);
    }
}
