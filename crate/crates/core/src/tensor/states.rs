use std::fmt;
use std::str::FromStr;

use nalgebra::Vector2;

use super::core::C64;
use super::mps::Mps;
use crate::{Error, Result};

/// Entangled reference states with closed-form MPS representations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedState {
    Ghz,
    W,
    BellPhiPlus,
    BellPhiMinus,
    BellPsiPlus,
    BellPsiMinus,
}

impl FromStr for NamedState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "ghz" => Ok(Self::Ghz),
            "w" => Ok(Self::W),
            "bell_phi_plus" => Ok(Self::BellPhiPlus),
            "bell_phi_minus" => Ok(Self::BellPhiMinus),
            "bell_psi_plus" => Ok(Self::BellPsiPlus),
            "bell_psi_minus" => Ok(Self::BellPsiMinus),
            _ => Err(Error::UnknownState(s.to_string())),
        }
    }
}

impl fmt::Display for NamedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::Ghz => "ghz",
            Self::W => "w",
            Self::BellPhiPlus => "bell_phi_plus",
            Self::BellPhiMinus => "bell_phi_minus",
            Self::BellPsiPlus => "bell_psi_plus",
            Self::BellPsiMinus => "bell_psi_minus",
        };
        f.write_str(name)
    }
}

fn ket(bit: u8) -> Vector2<C64> {
    match bit {
        0 => Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
        _ => Vector2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
    }
}

fn zero() -> Vector2<C64> {
    Vector2::zeros()
}

impl NamedState {
    /// Normalized MPS of this state on `n` qubits (Bell states need `n = 2`).
    pub fn build(self, n: usize) -> Result<Mps> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "{self} needs at least 2 qubits, got {n}"
            )));
        }
        let inv_sqrt2 = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        match self {
            Self::Ghz => {
                let mut blocks = vec![vec![vec![ket(0), ket(1)]]];
                for _ in 1..n - 1 {
                    blocks.push(vec![vec![ket(0), zero()], vec![zero(), ket(1)]]);
                }
                blocks.push(vec![vec![ket(0)], vec![ket(1)]]);
                Ok(Mps::from_vector_blocks(&blocks)?.scale(inv_sqrt2))
            }
            Self::W => {
                // rank-2 chain: bond state 0 = "no excitation yet"
                let mut blocks = vec![vec![vec![ket(1), ket(0)]]];
                for _ in 1..n - 1 {
                    blocks.push(vec![vec![ket(0), zero()], vec![ket(1), ket(0)]]);
                }
                blocks.push(vec![vec![ket(0)], vec![ket(1)]]);
                let scale = C64::new(1.0 / (n as f64).sqrt(), 0.0);
                Ok(Mps::from_vector_blocks(&blocks)?.scale(scale))
            }
            bell => {
                if n != 2 {
                    return Err(Error::InvalidArgument(format!(
                        "{bell} is a two-qubit state, got n = {n}"
                    )));
                }
                let (a, b, sign) = match bell {
                    Self::BellPhiPlus => (0, 0, 1.0),
                    Self::BellPhiMinus => (0, 0, -1.0),
                    Self::BellPsiPlus => (0, 1, 1.0),
                    _ => (0, 1, -1.0),
                };
                let blocks = vec![
                    vec![vec![ket(a), ket(1 - a)]],
                    vec![vec![ket(b)], vec![ket(1 - b) * C64::new(sign, 0.0)]],
                ];
                Ok(Mps::from_vector_blocks(&blocks)?.scale(inv_sqrt2))
            }
        }
    }
}
