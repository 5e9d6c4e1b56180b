//! Quantum full adder and adder networks.
//!
//! Qubit order of one adder is `(C_in, A, B, 0)` in and `(S, A, B, C_out)`
//! out. A network of `count` adders uses `3 * count + 1` qubits: the carry-out
//! qubit of adder `i` is the carry-in qubit of adder `i + 1`.

use nalgebra::Matrix2;

use crate::gates::{c0, c1, eye, sigma_x, zero, GatePlacement};
use crate::tensor::{Mpo, C64};
use crate::{Error, Result};

/// The five gates in application order: CCNOT(2,3|4), CNOT(2|3),
/// CCNOT(1,3|4), CNOT(3|1), CNOT(2|3).
pub fn qfa_gates() -> Vec<GatePlacement> {
    vec![
        GatePlacement::ccnot(2, 3, 4),
        GatePlacement::cnot(2, 3),
        GatePlacement::ccnot(1, 3, 4),
        GatePlacement::cnot(3, 1),
        GatePlacement::cnot(2, 3),
    ]
}

/// Product of the five gate MPOs without any rank reduction.
pub fn qfa_product_mpo() -> Result<Mpo> {
    let ops = qfa_gates().iter().map(|g| g.to_mpo(4)).collect::<Result<Vec<_>>>()?;
    Mpo::product_in_order(&ops)
}

fn first_core() -> Vec<Vec<Matrix2<C64>>> {
    vec![vec![sigma_x() * c0(), eye(), sigma_x() * c1()]]
}

fn second_core() -> Vec<Vec<Matrix2<C64>>> {
    let o = zero();
    vec![vec![c0(), c1(), o, o], vec![o, c0(), c1(), o], vec![o, o, c0(), c1()]]
}

fn third_core() -> Vec<Vec<Matrix2<C64>>> {
    let o = zero();
    vec![vec![c1(), o], vec![c0(), o], vec![o, c1()], vec![o, c0()]]
}

fn last_core() -> Vec<Vec<Matrix2<C64>>> {
    vec![vec![eye()], vec![sigma_x()]]
}

/// Coupling core joining the carry-out of one adder with the carry-in of
/// the next: entry `(k, l)` is `G1[l] * G4[k]`.
pub fn coupling_core() -> Vec<Vec<Matrix2<C64>>> {
    let g1 = &first_core()[0];
    let g4 = last_core();
    g4.iter().map(|row| g1.iter().map(|a| a * row[0]).collect()).collect()
}

/// Closed-form rank-(3, 4, 2) MPO of the adder.
pub fn qfa_mpo() -> Result<Mpo> {
    Mpo::from_operator_blocks(&[first_core(), second_core(), third_core(), last_core()])
}

/// Closed-form MPO of `count` chained adders on `3 * count + 1` qubits.
pub fn qfa_network_mpo(count: usize) -> Result<Mpo> {
    if count == 0 {
        return Err(Error::InvalidArgument(
            "an adder network needs at least one adder".into(),
        ));
    }
    let mut blocks = vec![first_core(), second_core(), third_core()];
    for _ in 1..count {
        blocks.extend([coupling_core(), second_core(), third_core()]);
    }
    blocks.push(last_core());
    Mpo::from_operator_blocks(&blocks)
}

/// Gate list of the network in application order (adder 1 first).
pub fn qfa_network_gates(count: usize) -> Vec<GatePlacement> {
    (0..count)
        .flat_map(|i| {
            qfa_gates().into_iter().map(move |mut g| {
                g.target += 3 * i;
                g.controls.iter_mut().for_each(|c| *c += 3 * i);
                g
            })
        })
        .collect()
}

/// Positions of the `A_i` and `B_i` inputs, which receive Hadamards.
pub fn qfa_network_input_positions(count: usize) -> Vec<usize> {
    (0..count).flat_map(|i| [3 * i + 2, 3 * i + 3]).collect()
}

/// Positions of `S_1, ..., S_count, C_out`.
pub fn qfa_network_output_positions(count: usize) -> Vec<usize> {
    (0..=count).map(|i| 3 * i + 1).collect()
}
