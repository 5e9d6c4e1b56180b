//! Single-qubit gate matrices and their lift to low-rank MPOs.
//!
//! A single-qubit gate on qubit `p` is the rank-one operator
//! `I ⊗ ... ⊗ A ⊗ ... ⊗ I`. A gate `A` on target `q` controlled by qubits
//! `p_1, ..., p_m` equals `I + (⊗_j C at p_j) ⊗ (A - I at q)`, which has a
//! rank-2 MPO: the bond carries either the identity branch or the
//! correction branch between the outermost involved qubits, and the controls
//! may sit on either side of the target.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::Matrix2;

use crate::tensor::{Mpo, C64};
use crate::{Error, Result};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Named 2x2 complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GateMatrix {
    name: String,
    matrix: Matrix2<C64>,
}

impl GateMatrix {
    pub fn new(name: impl Into<String>, matrix: Matrix2<C64>) -> Self {
        Self {
            name: name.into(),
            matrix,
        }
    }

    pub fn identity() -> Self {
        Self::new("i", Matrix2::identity())
    }

    pub fn hadamard() -> Self {
        let h = FRAC_1_SQRT_2;
        Self::new("h", Matrix2::new(c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)))
    }

    /// Pauli-X.
    pub fn x() -> Self {
        Self::new("x", Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)))
    }

    /// `diag(1, e^{i phi})`.
    pub fn phase(phi: f64) -> Self {
        Self::new(
            format!("phase({phi})"),
            Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), C64::from_polar(1.0, phi)),
        )
    }

    /// `R_k = diag(1, e^{2 pi i / 2^k})`.
    pub fn rk(k: u32) -> Self {
        let mut g = Self::phase(2.0 * PI / 2f64.powi(k as i32));
        g.name = format!("rk({k})");
        g
    }

    /// `R_k^*`, the adjoint used by the inverse QFT.
    pub fn rk_dagger(k: u32) -> Self {
        let mut g = Self::phase(-2.0 * PI / 2f64.powi(k as i32));
        g.name = format!("rk_dagger({k})");
        g
    }

    /// Control projector `C = C_1 = |1><1|`.
    pub fn control() -> Self {
        Self::new("c1", c1())
    }

    /// `C_0 = I - C = |0><0|`.
    pub fn control_zero() -> Self {
        Self::new("c0", c0())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self::new(format!("{}^dagger", self.name), self.matrix.adjoint())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (self.matrix.adjoint() * self.matrix - Matrix2::identity()).norm() <= tol
    }
}

pub(crate) fn c0() -> Matrix2<C64> {
    Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0))
}

pub(crate) fn c1() -> Matrix2<C64> {
    Matrix2::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0))
}

pub(crate) fn sigma_x() -> Matrix2<C64> {
    *GateMatrix::x().matrix()
}

pub(crate) fn hadamard() -> Matrix2<C64> {
    *GateMatrix::hadamard().matrix()
}

pub(crate) fn eye() -> Matrix2<C64> {
    Matrix2::identity()
}

pub(crate) fn zero() -> Matrix2<C64> {
    Matrix2::zeros()
}

/// A gate placed on a register: optional controls plus one target, 1-based.
#[derive(Clone, Debug, PartialEq)]
pub struct GatePlacement {
    pub controls: Vec<usize>,
    pub target: usize,
    pub gate: GateMatrix,
}

impl GatePlacement {
    pub fn single(gate: GateMatrix, target: usize) -> Self {
        Self {
            controls: Vec::new(),
            target,
            gate,
        }
    }

    pub fn controlled(controls: Vec<usize>, gate: GateMatrix, target: usize) -> Self {
        Self { controls, target, gate }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::controlled(vec![control], GateMatrix::x(), target)
    }

    pub fn ccnot(c1: usize, c2: usize, target: usize) -> Self {
        Self::controlled(vec![c1, c2], GateMatrix::x(), target)
    }

    pub fn cphase(k: u32, control: usize, target: usize) -> Self {
        Self::controlled(vec![control], GateMatrix::rk(k), target)
    }

    /// Checks positions lie in `[1, n]` and are pairwise distinct.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut all = self.controls.clone();
        all.push(self.target);
        if let Some(&bad) = all.iter().find(|&&p| p == 0 || p > n) {
            return Err(Error::BadPosition { position: bad, n });
        }
        let mut sorted = all.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != all.len() {
            return Err(Error::OverlappingPositions(all));
        }
        Ok(())
    }

    pub fn to_mpo(&self, n: usize) -> Result<Mpo> {
        controlled_mpo(&self.controls, &self.gate, self.target, n)
    }
}

/// `I^{⊗(p-1)} ⊗ A ⊗ I^{⊗(n-p)}`, all ranks 1.
pub fn single_qubit_mpo(gate: &GateMatrix, position: usize, n: usize) -> Result<Mpo> {
    if position == 0 || position > n {
        return Err(Error::BadPosition { position, n });
    }
    let ops: Vec<Matrix2<C64>> = (1..=n)
        .map(|j| if j == position { *gate.matrix() } else { eye() })
        .collect();
    Mpo::from_local_operators(&ops)
}

/// Rank-2 MPO of a gate with any number of controls (none gives the
/// single-qubit MPO). Bonds strictly between the outermost involved qubits
/// carry rank 2, all others rank 1.
pub fn controlled_mpo(controls: &[usize], gate: &GateMatrix, target: usize, n: usize) -> Result<Mpo> {
    GatePlacement::controlled(controls.to_vec(), gate.clone(), target).validate(n)?;
    if controls.is_empty() {
        return single_qubit_mpo(gate, target, n);
    }
    let lo = controls.iter().copied().chain([target]).min().unwrap();
    let hi = controls.iter().copied().chain([target]).max().unwrap();
    let correction = gate.matrix() - eye();
    let factor = |j: usize| {
        if j == target {
            correction
        } else if controls.contains(&j) {
            c1()
        } else {
            eye()
        }
    };
    let blocks: Vec<Vec<Vec<Matrix2<C64>>>> = (1..=n)
        .map(|j| {
            if j < lo || j > hi {
                vec![vec![eye()]]
            } else if j == lo {
                vec![vec![eye(), factor(j)]]
            } else if j == hi {
                vec![vec![eye()], vec![factor(j)]]
            } else {
                vec![vec![eye(), zero()], vec![zero(), factor(j)]]
            }
        })
        .collect();
    Mpo::from_operator_blocks(&blocks)
}

/// Rank-one layer with `H` on each listed position and `I` elsewhere.
pub fn hadamard_layer(positions: &[usize], n: usize) -> Result<Mpo> {
    if n == 0 {
        return Err(Error::EmptyRegister);
    }
    if let Some(&bad) = positions.iter().find(|&&p| p == 0 || p > n) {
        return Err(Error::BadPosition { position: bad, n });
    }
    let ops: Vec<Matrix2<C64>> = (1..=n)
        .map(|j| if positions.contains(&j) { hadamard() } else { eye() })
        .collect();
    Mpo::from_local_operators(&ops)
}

pub fn cnot_mpo(control: usize, target: usize, n: usize) -> Result<Mpo> {
    controlled_mpo(&[control], &GateMatrix::x(), target, n)
}

pub fn ccnot_mpo(c1: usize, c2: usize, target: usize, n: usize) -> Result<Mpo> {
    controlled_mpo(&[c1, c2], &GateMatrix::x(), target, n)
}

/// Controlled `R_k`; symmetric in control and target.
pub fn cphase_mpo(k: u32, control: usize, target: usize, n: usize) -> Result<Mpo> {
    controlled_mpo(&[control], &GateMatrix::rk(k), target, n)
}
