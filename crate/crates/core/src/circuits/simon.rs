//! Simon's circuit for the hidden string `b = 1010` on two interleaved
//! 4-qubit registers: odd positions hold the first register, even positions
//! the second.

use nalgebra::Matrix2;

use super::sequence::{GateGroupSequence, RegisterLayout};
use crate::gates::{c0, c1, eye, hadamard, hadamard_layer, sigma_x, zero, GateMatrix, GatePlacement};
use crate::tensor::{Mpo, TruncationPolicy, C64};
use crate::Result;

pub const SIMON_REGISTER: usize = 4;
pub const SIMON_QUBITS: usize = 8;
pub const SIMON_HIDDEN: u64 = 0b1010;

pub fn simon_first_register() -> Vec<usize> {
    vec![1, 3, 5, 7]
}

pub fn simon_second_register() -> Vec<usize> {
    vec![2, 4, 6, 8]
}

pub fn simon_layout() -> RegisterLayout {
    RegisterLayout::new(
        SIMON_QUBITS,
        vec![
            ("first".into(), simon_first_register()),
            ("second".into(), simon_second_register()),
        ],
    )
    .expect("interleaved registers partition the chain")
}

/// The four gate groups as placed gates, each group in application order.
pub fn simon_gate_groups() -> Vec<Vec<GatePlacement>> {
    let hadamards: Vec<GatePlacement> = simon_first_register()
        .into_iter()
        .map(|p| GatePlacement::single(GateMatrix::hadamard(), p))
        .collect();
    let copy = vec![
        GatePlacement::cnot(1, 2),
        GatePlacement::cnot(3, 4),
        GatePlacement::cnot(5, 6),
        GatePlacement::cnot(7, 8),
    ];
    let flip = vec![GatePlacement::cnot(1, 2), GatePlacement::cnot(1, 6)];
    vec![hadamards.clone(), copy, flip, hadamards]
}

/// Gate groups as MPOs, each compressed to minimal rank.
pub fn simon_group_mpos() -> Result<Vec<Mpo>> {
    simon_gate_groups()
        .iter()
        .map(|group| {
            if group.iter().all(|g| g.controls.is_empty()) {
                let positions: Vec<usize> = group.iter().map(|g| g.target).collect();
                return hadamard_layer(&positions, SIMON_QUBITS);
            }
            let ops = group
                .iter()
                .map(|g| g.to_mpo(SIMON_QUBITS))
                .collect::<Result<Vec<_>>>()?;
            Mpo::product_in_order(&ops)?.compress(&TruncationPolicy::default())
        })
        .collect()
}

pub fn simon_sequence() -> Result<GateGroupSequence> {
    GateGroupSequence::new("simon", SIMON_QUBITS, simon_group_mpos()?, simon_layout())
}

/// Closed-form MPO of the whole circuit with ranks bounded by 4, built from
/// `A = H C_0 H` and `B = H C_1 H`.
pub fn simon_circuit_mpo() -> Result<Mpo> {
    let h = hadamard();
    let a = h * c0() * h;
    let b = h * c1() * h;
    let (i, x, o) = (eye(), sigma_x(), zero());
    let blocks: Vec<Vec<Vec<Matrix2<C64>>>> = vec![
        vec![vec![a, b]],
        vec![vec![i, o], vec![o, i]],
        vec![vec![a, b, o, o], vec![o, o, a, b]],
        vec![vec![i, o], vec![x, o], vec![o, i], vec![o, x]],
        vec![vec![a, b], vec![b, a]],
        vec![vec![i], vec![x]],
        vec![vec![a, b]],
        vec![vec![i], vec![x]],
    ];
    Mpo::from_operator_blocks(&blocks)
}

/// All nonzero `b` with `z . b = 0 (mod 2)` for every observed `z`.
pub fn hidden_string_candidates(observed: &[u64], bits: usize) -> Vec<u64> {
    (1..1u64 << bits)
        .filter(|b| observed.iter().all(|z| (z & b).count_ones() % 2 == 0))
        .collect()
}
